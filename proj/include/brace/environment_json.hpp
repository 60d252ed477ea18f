#pragma once

#include <json.hpp>

#include "brace/environment.hpp"

namespace brace {

// Schema (field order irrelevant):
//   {
//     "name": string,
//     "context_probs": [S doubles],
//     "num_recommendations": int,
//     "num_treatments": int,
//     "compliance_types": [{"weights": [S doubles], "map": [K_z ints]}, ...],
//     "mean_rewards": [[[K_x doubles] per context] per type]
//   }
nlohmann::json environment_to_json(const Environment& env);

// Throws ContractError when the document is malformed or violates an
// Environment invariant.
Environment environment_from_json(const nlohmann::json& doc);

}  // namespace brace
