#include "finipost/json_io.hpp"

#include <cstdlib>

#include "finipost/error.hpp"

namespace finipost {

namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error("config-error", std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

Truncation truncation_from(const json& j) {
  Truncation t;
  if (j.contains("max_sticks")) t.max_sticks = j.at("max_sticks").get<std::size_t>();
  t.residual_tol = number_or(j, "residual_tol", t.residual_tol);
  return t;
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw Error("config-error", std::string("missing array field '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

BaseDistribution base_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw Error("config-error", "base needs a 'family'");
  const auto family = j.at("family").get<std::string>();
  if (family == "gaussian" || family == "normal")
    return BaseDistribution::gaussian(number_or(j, "mu", 0.0), number_or(j, "sigma", 1.0));
  if (family == "uniform") return BaseDistribution::uniform(number_or(j, "lo", 0.0), number_or(j, "hi", 1.0));
  if (family == "point_mass") return BaseDistribution::point_mass(number(j, "at"));
  if (family == "cauchy")
    return BaseDistribution::cauchy(number_or(j, "location", 0.0), number_or(j, "scale", 1.0));
  throw Error("config-error", "unknown base family '" + family + "'");
}

json to_json(const BaseDistribution& base) {
  switch (base.family()) {
    case BaseDistribution::Family::Gaussian:
      return {{"family", "gaussian"}, {"mu", base.first()}, {"sigma", base.second()}};
    case BaseDistribution::Family::Uniform:
      return {{"family", "uniform"}, {"lo", base.first()}, {"hi", base.second()}};
    case BaseDistribution::Family::PointMass: return {{"family", "point_mass"}, {"at", base.first()}};
    case BaseDistribution::Family::Cauchy:
      return {{"family", "cauchy"}, {"location", base.first()}, {"scale", base.second()}};
  }
  return {};
}

ExchangeableModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error("config-error", "model needs a 'kind'");
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "finite_dirichlet") {
      FiniteDirichletModel m;
      m.alpha = numbers(j, "alpha");
      if (j.contains("values")) m.values = numbers(j, "values");
      return ExchangeableModel(std::move(m));
    }
    if (kind == "dirichlet_process") {
      DirichletProcessModel m;
      m.mass = number(j, "mass");
      if (j.contains("base")) m.base = base_from_json(j.at("base"));
      m.truncation = truncation_from(j);
      return ExchangeableModel(std::move(m));
    }
    if (kind == "stick_breaking") {
      StickBreakingModel m;
      if (j.contains("beta_params"))
        m.beta_params = j.at("beta_params").get<std::vector<std::pair<double, double>>>();
      if (j.contains("rule")) {
        const auto& r = j.at("rule");
        m.rule = StickBreakingModel::Rule{number_or(r, "a", 1.0), number_or(r, "b", 1.0),
                                          number_or(r, "discount", 0.0)};
      }
      if (j.contains("base")) m.base = base_from_json(j.at("base"));
      m.truncation = truncation_from(j);
      return ExchangeableModel(std::move(m));
    }
    if (kind == "polya_tree") {
      PolyaTreeModel m;
      if (j.contains("base")) m.quantile_base = base_from_json(j.at("base"));
      if (j.contains("depth")) m.depth = j.at("depth").get<int>();
      if (j.contains("params")) m.params = j.at("params").get<std::map<std::string, double>>();
      if (j.contains("level_c")) m.level_c = number(j, "level_c");
      return ExchangeableModel(std::move(m));
    }
    if (kind == "iid") {
      IidModel m;
      m.base = base_from_json(j.at("base"));
      return ExchangeableModel(std::move(m));
    }
    throw Error("config-error", "unknown model kind '" + kind + "'");
  } catch (const Error& e) {
    if (e.code() == "bad-model") throw Error("config-error", e.what());
    throw;
  } catch (const json::exception& e) {
    throw Error("config-error", e.what());
  }
}

TestFunction test_function_from_spec(const std::string& spec) {
  if (spec == "identity") return TestFunction([](const Point& p) { return p.scalar(); });
  if (spec == "square") return TestFunction([](const Point& p) { return p.scalar() * p.scalar(); });
  const std::string head = "indicator(";
  if (spec.rfind(head, 0) == 0 && spec.back() == ')') {
    const std::string arg = spec.substr(head.size(), spec.size() - head.size() - 1);
    char* end = nullptr;
    const double y = std::strtod(arg.c_str(), &end);
    if (end == arg.c_str() || *end != '\0') throw Error("config-error", "bad indicator level '" + arg + "'");
    return TestFunction([y](const Point& p) { return p.scalar() <= y ? 1.0 : 0.0; }, {y});
  }
  throw Error("config-error", "unknown test function '" + spec + "'");
}

}  // namespace finipost
