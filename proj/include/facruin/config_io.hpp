#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "facruin/model.hpp"

namespace facruin {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "FACRUIN_CONFIG";

nlohmann::json config_to_json(const ScenarioConfig& config);

/// Reads a config document on top of the defaults. Unknown fields and type
/// mismatches raise ConfigError with the offending path. Does not validate.
ScenarioConfig config_from_json(const nlohmann::json& doc);

/// Applies one "path.to.field=value" assignment. The value is parsed as JSON
/// when possible and kept as a string otherwise. A bare field name resolves to
/// the unique section that defines it.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Loads path (or $FACRUIN_CONFIG, or the defaults), applies overrides and validates.
ScenarioConfig load_config(const std::optional<std::string>& path,
                           const std::vector<std::string>& overrides = {});

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

/// Resolves a bare or dotted field name to its full dotted path.
std::string resolve_field_path(const std::string& name);

}  // namespace facruin
