#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace plancache {

/// Pulls a JSON object out of a model reply. Accepts bare JSON, fenced
/// ```json blocks, and objects surrounded by prose. Returns nullopt and
/// fills `error` when no object parses.
std::optional<nlohmann::json> extract_json_object(std::string_view reply,
                                                  std::string* error = nullptr);

/// String value of `key`, with numbers rendered via dump(). Empty strings
/// and other types yield nullopt.
std::optional<std::string> text_field(const nlohmann::json& obj, const char* key);

}  // namespace plancache
