#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "kinetostat/chain_model.hpp"

namespace kinetostat {

inline constexpr std::string_view kModelVersion = "kinetostat/1";

/// Parses and validates a model document. Every violation is reported in the
/// ModelError message, one per line, prefixed with its JSON path.
ManipulatorModel parse_model(std::string_view text);
ManipulatorModel model_from_json(const nlohmann::json& doc);
ManipulatorModel load_model(const std::filesystem::path& path);

/// Canonical document; model_from_json(to_json(m)) reproduces m.
nlohmann::json to_json(const ManipulatorModel& model);
std::string serialize_model(const ManipulatorModel& model);

}  // namespace kinetostat
