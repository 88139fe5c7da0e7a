#pragma once

#include <initializer_list>

#include <json.hpp>

#include "djsr/sdcae.hpp"

namespace djsr {

// Missing keys keep their defaults, so partial config files are accepted.
void to_json(nlohmann::json& j, const LayerSpec& spec);
void from_json(const nlohmann::json& j, LayerSpec& spec);
void to_json(nlohmann::json& j, const SdcaeConfig& config);
void from_json(const nlohmann::json& j, SdcaeConfig& config);

// Throws a format error naming the first key of `j` not in `known`.
void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where);

// Parses "9x9x64,5x5x32" style layer lists (kernel x kernel x channels).
std::vector<LayerSpec> parse_layer_specs(const std::string& text);
std::string format_layer_specs(const std::vector<LayerSpec>& layers);

}  // namespace djsr
