#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "friedrichs/model.hpp"
#include "friedrichs/quadrature.hpp"

namespace friedrichs {

// Everything a config file can carry. The quadrature table is optional;
// its missing keys keep their defaults.
struct ConfigFile {
  ModelConfig model;
  QuadratureSpec quadrature;
  bool operator==(const ConfigFile&) const = default;
};

// Parse failures raise Error(ConfigParse); semantically invalid values
// (negative hopping, all-zero phi) surface later from model_from_config.
ConfigFile parse_config(const nlohmann::json& j);
ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const QuadratureSpec& spec);
nlohmann::json to_json(const ConfigFile& cfg);

// Pretty-printed JSON with doubles written to round-trip exactly.
std::string serialize_config(const ConfigFile& cfg);

}  // namespace friedrichs
