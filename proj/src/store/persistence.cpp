#include <cstdio>
#include <fstream>
#include <sstream>

#include "plancache/store.hpp"

namespace plancache {

void atomic_write_file(const std::filesystem::path& path, std::string_view content,
                       const SaveOptions& options) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open " + tmp.string() + " for writing");
    const auto half = content.size() / 2;
    out.write(content.data(), static_cast<std::streamsize>(half));
    out.flush();
    if (options.fault_hook) options.fault_hook("partial_write");
    out.write(content.data() + half, static_cast<std::streamsize>(content.size() - half));
    out.flush();
    if (!out) throw PersistenceError("short write to " + tmp.string());
  }
  if (options.fault_hook) options.fault_hook("before_rename");
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw PersistenceError("cannot replace " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw PersistenceError("read error on " + path.string());
  return buf.str();
}

}  // namespace plancache
