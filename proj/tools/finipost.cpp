#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "finipost/bounds.hpp"
#include "finipost/error.hpp"
#include "finipost/harness.hpp"
#include "finipost/selftest.hpp"

namespace {

using nlohmann::json;
using namespace finipost;

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kViolation = 3 };

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double num(const json& p, const char* key) {
  if (!p.contains(key)) throw Error("config-error", std::string("missing parameter '") + key + "'");
  return p.at(key).get<double>();
}

long whole(const json& p, const char* key) {
  if (!p.contains(key)) throw Error("config-error", std::string("missing parameter '") + key + "'");
  return p.at(key).get<long>();
}

std::string evaluate_bound(const std::string& name, const json& p) {
  if (name == "mean_unconditional") return fmt(mean_bound_unconditional(whole(p, "N"), num(p, "Ef2")));
  if (name == "mean_conditional")
    return fmt(mean_bound_conditional(whole(p, "n"), whole(p, "N"), num(p, "sample_mean_f"), num(p, "post_mean_f"),
                                      num(p, "pred_f2")));
  if (name == "finite") return fmt(finite_bound(whole(p, "k"), whole(p, "n"), whole(p, "N")));
  if (name == "real") return fmt(real_bound(whole(p, "n"), whole(p, "N"), num(p, "post_l21")));
  if (name == "bounded_support") return fmt(bounded_support_bound(num(p, "M"), whole(p, "n"), whole(p, "N")));
  if (name == "l21_moment") return fmt(l21_moment_bound(num(p, "delta"), num(p, "m2delta")));
  if (name == "tail_probability")
    return fmt(tail_probability_bound(num(p, "epsilon"), num(p, "e_l21"), whole(p, "n"), whole(p, "N")));
  if (name == "dudley_gamma") return fmt(dudley_gamma(whole(p, "d"), whole(p, "k")));
  if (name == "euclidean") {
    std::optional<double> psi;
    if (p.contains("psi")) psi = num(p, "psi");
    return fmt(euclidean_bound(whole(p, "d"), whole(p, "k"), whole(p, "n"), whole(p, "N"),
                               p.value("gamma_moment_post", 0.0), psi));
  }
  if (name == "lemma") return fmt(lemma_bound(num(p, "mean_e"), num(p, "K"), whole(p, "n"), whole(p, "N")));
  if (name == "median_cdf") return fmt(median_cdf(whole(p, "N"), num(p, "F")));
  if (name == "median_tails") {
    const auto [l, r] = median_tail_bounds(whole(p, "N"), num(p, "p_left"), num(p, "p_right"));
    return fmt(l) + " " + fmt(r);
  }
  throw Error("config-error", "unknown bound '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finitary posterior bounds: experiments, bound evaluation and self checks"};
  app.require_subcommand(1);

  std::string config_path, out_path, format;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "experiment config")->required();
  run->add_option("--out", out_path, "output path, '-' for stdout");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = run->add_option("--seed", seed, "override master_seed");
  run->add_option("--threads", threads, "worker threads");

  std::string bound_name, params = "{}";
  auto* bound = app.add_subcommand("bound", "evaluate one closed-form bound");
  bound->add_option("name", bound_name)->required();
  bound->add_option("--params", params, "JSON object of parameters");

  auto* selftest = app.add_subcommand("selftest", "run the oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      json doc;
      {
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "io-error: cannot read '" << config_path << "'\n";
          return kIo;
        }
        try {
          doc = json::parse(in);
        } catch (const json::exception& e) {
          std::cerr << "config-error: " << e.what() << '\n';
          return kConfig;
        }
      }
      if (*seed_opt) doc["master_seed"] = seed;
      ExperimentConfig cfg = parse_config(doc);
      if (threads > 0) cfg.threads = threads;
      if (out_path.empty()) out_path = cfg.output.empty() ? "-" : cfg.output;
      if (format.empty()) {
        const auto dot = out_path.rfind('.');
        format = dot != std::string::npos && out_path.substr(dot) == ".json" ? "json" : "csv";
      }
      const auto report = run_experiment(cfg);
      emit(report, out_path, format);
      if (report.any_violation()) {
        std::cerr << "bound violation detected\n";
        return kViolation;
      }
      return kOk;
    }
    if (*bound) {
      json p;
      try {
        p = json::parse(params);
      } catch (const json::exception& e) {
        std::cerr << "config-error: " << e.what() << '\n';
        return kConfig;
      }
      std::cout << evaluate_bound(bound_name, p) << '\n';
      return kOk;
    }
    if (*selftest) return run_selftest(std::cout) == 0 ? kOk : kConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == "io-error" ? kIo : kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
