#pragma once

#include <string>

#include <json.hpp>

#include "finipost/distribution.hpp"
#include "finipost/priors.hpp"

namespace finipost {

/// {"family":"gaussian","mu":0,"sigma":1}, {"family":"uniform","lo":0,"hi":1},
/// {"family":"point_mass","at":c}, {"family":"cauchy","location":0,"scale":1}.
BaseDistribution base_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BaseDistribution& base);

/// {"kind":"finite_dirichlet","alpha":[...],"values":[...]?}
/// {"kind":"dirichlet_process","mass":c,"base":{...},"max_sticks":4096,"residual_tol":1e-8}
/// {"kind":"stick_breaking","beta_params":[[a,b],...] | "rule":{"a":..,"b":..,"discount":..},"base":{...}}
/// {"kind":"polya_tree","base":{...},"depth":m,"params":{"0":..,"1":..},"level_c":c}
/// {"kind":"iid","base":{...}}
ExchangeableModel model_from_json(const nlohmann::json& j);

/// Named test function: "identity", "square", "indicator(y)".
TestFunction test_function_from_spec(const std::string& spec);

}  // namespace finipost
