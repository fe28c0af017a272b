#include <algorithm>
#include <numeric>
#include <random>

#include "plancache/bench.hpp"
#include "plancache/errors.hpp"
#include "plancache/store.hpp"

namespace plancache {

std::string_view to_string(TaskFormat format) {
  switch (format) {
    case TaskFormat::TaskJsonl:
      return "jsonl";
    case TaskFormat::FinanceBench:
      return "financebench";
    case TaskFormat::TabMWP:
      return "tabmwp";
  }
  return "jsonl";
}

std::optional<TaskFormat> parse_task_format(std::string_view text) {
  for (auto f : {TaskFormat::TaskJsonl, TaskFormat::FinanceBench, TaskFormat::TabMWP}) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

namespace {

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

// Strings pass through; numbers and booleans are dumped; null and missing
// give nullopt.
std::optional<std::string> scalar_text(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number() || it->is_boolean()) return it->dump();
  return std::nullopt;
}

std::string required_query(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("record has no \"") + key + "\" field", line);
  if (!it->is_string() || blank(it->get_ref<const std::string&>())) {
    throw FormatError(std::string("\"") + key + "\" must be a non-empty string", line);
  }
  return it->get<std::string>();
}

TaskInstance from_task_jsonl(const nlohmann::json& obj, std::size_t line) {
  TaskInstance t;
  t.query = required_query(obj, "query", line);
  t.id = scalar_text(obj, "id").value_or("task-" + std::to_string(line));
  t.context = scalar_text(obj, "context").value_or("");
  t.ground_truth = scalar_text(obj, "answer");
  return t;
}

std::string financebench_context(const nlohmann::json& obj) {
  if (auto doc = scalar_text(obj, "document")) return *doc;
  if (auto ctx = scalar_text(obj, "context")) return *ctx;
  auto it = obj.find("evidence");
  if (it == obj.end() || !it->is_array()) return {};
  std::string out;
  for (const auto& ev : *it) {
    std::string text;
    if (ev.is_string()) {
      text = ev.get<std::string>();
    } else if (ev.is_object()) {
      text = scalar_text(ev, "evidence_text_full_page")
                 .value_or(scalar_text(ev, "evidence_text").value_or(""));
    }
    if (text.empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += text;
  }
  return out;
}

TaskInstance from_financebench(const nlohmann::json& obj, std::size_t line) {
  TaskInstance t;
  t.query = required_query(obj, "question", line);
  t.id = scalar_text(obj, "financebench_id")
             .value_or(scalar_text(obj, "id").value_or("financebench-" + std::to_string(line)));
  t.context = financebench_context(obj);
  t.ground_truth = scalar_text(obj, "answer");
  return t;
}

TaskInstance from_tabmwp(const nlohmann::json& obj, std::string id, std::size_t line) {
  TaskInstance t;
  t.query = required_query(obj, "question", line);
  auto choices = obj.find("choices");
  if (choices != obj.end() && choices->is_array() && !choices->empty()) {
    t.query += "\nChoose from the following options: ";
    for (std::size_t i = 0; i < choices->size(); ++i) {
      if (i) t.query += ", ";
      t.query += (*choices)[i].is_string() ? (*choices)[i].get<std::string>() : (*choices)[i].dump();
    }
  }
  t.id = std::move(id);
  const auto title = scalar_text(obj, "table_title").value_or("");
  const auto table = scalar_text(obj, "table").value_or("");
  t.context = title.empty() ? table : title + "\n" + table;
  t.ground_truth = scalar_text(obj, "answer");
  return t;
}

std::size_t line_of(std::string_view text, std::size_t offset) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                            std::min(offset, text.size())),
                            '\n'));
}

// The published TabMWP files are one object keyed by problem id.
std::optional<std::vector<TaskInstance>> parse_tabmwp_document(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object() || doc.contains("question")) return std::nullopt;
  std::vector<TaskInstance> tasks;
  for (const auto& [pid, record] : doc.items()) {
    const auto key_pos = text.find("\"" + pid + "\"");
    const auto line = line_of(text, key_pos == std::string_view::npos ? 0 : key_pos);
    if (!record.is_object()) throw FormatError("problem '" + pid + "' is not an object", line);
    tasks.push_back(from_tabmwp(record, pid, line));
  }
  return tasks;
}

}  // namespace

std::vector<TaskInstance> parse_tasks(std::string_view text, TaskFormat format) {
  if (format == TaskFormat::TabMWP) {
    if (auto tasks = parse_tabmwp_document(text)) return *tasks;
  }

  std::vector<TaskInstance> tasks;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (blank(line)) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("record is not a JSON object", line_no);

    switch (format) {
      case TaskFormat::TaskJsonl:
        tasks.push_back(from_task_jsonl(obj, line_no));
        break;
      case TaskFormat::FinanceBench:
        tasks.push_back(from_financebench(obj, line_no));
        break;
      case TaskFormat::TabMWP:
        tasks.push_back(from_tabmwp(
            obj, scalar_text(obj, "pid").value_or(scalar_text(obj, "id").value_or(
                     "tabmwp-" + std::to_string(line_no))),
            line_no));
        break;
    }
  }
  return tasks;
}

std::vector<TaskInstance> load_tasks(const std::filesystem::path& path, TaskFormat format) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const PersistenceError& e) {
    throw FormatError(e.what(), 0);
  }
  return parse_tasks(text, format);
}

std::vector<TaskInstance> sample_tasks(std::span<const TaskInstance> tasks, std::size_t n,
                                       std::uint64_t seed) {
  if (n >= tasks.size()) return {tasks.begin(), tasks.end()};
  // Hand-rolled Fisher-Yates with rejection sampling: std::shuffle and the
  // standard distributions are implementation-defined, and samples must be
  // reproducible across toolchains.
  std::mt19937_64 rng(seed);
  auto below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
      const auto x = rng();
      if (x < limit) return x % bound;
    }
  };
  std::vector<std::size_t> index(tasks.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(below(tasks.size() - i));
    std::swap(index[i], index[j]);
  }
  index.resize(n);
  std::sort(index.begin(), index.end());
  std::vector<TaskInstance> out;
  out.reserve(n);
  for (auto i : index) out.push_back(tasks[i]);
  return out;
}

}  // namespace plancache
