#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ssmbb/mech_model.hpp"

namespace ssmbb {

using Json = nlohmann::json;

/// Builds a system from the model document. Duplicate nonlinear terms are summed and
/// reported through `warnings`.
MechanicalSystem parse_model(const Json& doc, std::vector<std::string>* warnings = nullptr);
MechanicalSystem parse_model_text(const std::string& text, std::vector<std::string>* warnings = nullptr);
MechanicalSystem parse_model_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

Json serialize_model(const MechanicalSystem& sys);

/// `builtin:<name>` or a file path.
MechanicalSystem load_model(const std::string& source, const std::map<std::string, double>& builtin_params = {},
                            std::vector<std::string>* warnings = nullptr);

/// FNV-1a over the canonical serialization, as 16 hex digits.
std::string model_hash(const MechanicalSystem& sys);

}  // namespace ssmbb
