#include "plancache/json_extract.hpp"

namespace plancache {

namespace {

std::optional<nlohmann::json> try_object(std::string_view text, std::string* error) {
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.is_object()) return doc;
    if (error) *error = "reply is JSON but not an object";
  } catch (const nlohmann::json::parse_error& e) {
    if (error) *error = e.what();
  }
  return std::nullopt;
}

}  // namespace

std::optional<nlohmann::json> extract_json_object(std::string_view reply, std::string* error) {
  if (auto doc = try_object(reply, error)) return doc;

  if (auto fence = reply.find("```"); fence != std::string_view::npos) {
    auto body_start = reply.find('\n', fence);
    auto close = body_start == std::string_view::npos ? std::string_view::npos
                                                       : reply.find("```", body_start);
    if (close != std::string_view::npos) {
      if (auto doc = try_object(reply.substr(body_start + 1, close - body_start - 1), error)) {
        return doc;
      }
    }
  }

  const auto open = reply.find('{');
  const auto last = reply.rfind('}');
  if (open != std::string_view::npos && last != std::string_view::npos && last > open) {
    if (auto doc = try_object(reply.substr(open, last - open + 1), error)) return doc;
  }
  if (error && error->empty()) *error = "no JSON object found in reply";
  return std::nullopt;
}

std::optional<std::string> text_field(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
  const auto& v = obj[key];
  std::string out;
  if (v.is_string()) {
    out = v.get<std::string>();
  } else if (v.is_number()) {
    out = v.dump();
  } else {
    return std::nullopt;
  }
  if (out.find_first_not_of(" \t\r\n") == std::string::npos) return std::nullopt;
  return out;
}

}  // namespace plancache
