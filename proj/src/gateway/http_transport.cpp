#include <httplib.h>

#include "plancache/gateway.hpp"

namespace plancache {

HttplibTransport::HttplibTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

HttpResponse HttplibTransport::post(const std::string& path,
                                    const std::vector<std::pair<std::string, std::string>>& headers,
                                    const std::string& body) {
  // Split "https://host[:port]/prefix" so a base URL may carry a path prefix.
  std::string host = base_url_;
  std::string prefix;
  if (auto scheme = host.find("://"); scheme != std::string::npos) {
    if (auto slash = host.find('/', scheme + 3); slash != std::string::npos) {
      prefix = host.substr(slash);
      host.resize(slash);
    }
  }

  httplib::Client client(host);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  httplib::Headers hdrs;
  std::string content_type = "application/json";
  for (const auto& [k, v] : headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      hdrs.emplace(k, v);
    }
  }

  HttpResponse out;
  auto res = client.Post(prefix + path, hdrs, body, content_type);
  if (!res) {
    out.status = 0;
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace plancache
