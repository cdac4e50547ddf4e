#pragma once

#include "ep4orth/ep4orth.hpp"
#include "ep4orth/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

namespace ep4orth::cli {

using json = nlohmann::ordered_json;

inline DriverConfig preset_config(const std::string& name, Index k) {
  if (name == "projection") return presets::projection();
  if (name == "onmf" || name == "opnmf") return presets::onmf();
  if (name == "kindicators") return presets::kindicators(k);
  if (name == "default") return DriverConfig{};
  throw Error(ErrorCode::InvalidParameter, "--preset: unknown preset '" + name + "'");
}

namespace detail {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidParameter, where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::InvalidParameter, where + ": unknown key '" + key + "'");
  }
}

inline SubsolverMode mode_from_name(const std::string& s) {
  if (s == "auto") return SubsolverMode::Auto;
  if (s == "first-order") return SubsolverMode::FirstOrder;
  if (s == "second-order") return SubsolverMode::SecondOrder;
  throw Error(ErrorCode::InvalidParameter, "mode: expected auto, first-order or second-order");
}

inline GPConfig::StepRule rule_from_name(const std::string& s) {
  if (s == "nonmonotone-bb") return GPConfig::StepRule::NonmonotoneBB;
  if (s == "fixed") return GPConfig::StepRule::Fixed;
  if (s == "palm-bb") return GPConfig::StepRule::PalmBB;
  throw Error(ErrorCode::InvalidParameter, "gp.rule: expected nonmonotone-bb, fixed or palm-bb");
}

}  // namespace detail

/// Applies a JSON object of DriverConfig overrides. Unknown keys are rejected.
inline void apply_config_json(const json& j, DriverConfig& c) {
  using detail::take;
  detail::check_keys(j,
                     {"sigma0", "gamma2", "gamma2_low", "gamma2_switch", "gamma1", "eps0", "p", "q", "eta",
                      "eps_grad0", "eps_grad_min", "tol_feas", "t_max", "zeta_switch", "rng_seed", "mode",
                      "postprocess", "anchor", "gp", "newton"},
                     "config");
  try {
    take(j, "sigma0", c.sigma0);
    take(j, "gamma2", c.gamma2);
    take(j, "gamma2_low", c.gamma2_low);
    take(j, "gamma2_switch", c.gamma2_switch);
    take(j, "gamma1", c.gamma1);
    take(j, "eps0", c.eps0);
    take(j, "p", c.p);
    take(j, "q", c.q);
    take(j, "eta", c.eta);
    take(j, "eps_grad0", c.eps_grad0);
    take(j, "eps_grad_min", c.eps_grad_min);
    take(j, "tol_feas", c.tol_feas);
    take(j, "t_max", c.t_max);
    take(j, "zeta_switch", c.zeta_switch);
    take(j, "rng_seed", c.rng_seed);
    take(j, "postprocess", c.postprocess);
    take(j, "anchor", c.anchor);
    if (j.contains("mode")) c.mode = detail::mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("gp")) {
      const json& g = j.at("gp");
      detail::check_keys(g,
                         {"rule", "bb_floor", "bb_cap", "window", "delta", "backtrack", "max_backtracks",
                          "max_iter", "initial_step", "fixed_alpha", "palm_cap"},
                         "config.gp");
      if (g.contains("rule")) c.gp.rule = detail::rule_from_name(g.at("rule").get<std::string>());
      take(g, "bb_floor", c.gp.bb_floor);
      take(g, "bb_cap", c.gp.bb_cap);
      take(g, "window", c.gp.window);
      take(g, "delta", c.gp.delta);
      take(g, "backtrack", c.gp.backtrack);
      take(g, "max_backtracks", c.gp.max_backtracks);
      take(g, "max_iter", c.gp.max_iter);
      take(g, "initial_step", c.gp.initial_step);
      take(g, "fixed_alpha", c.gp.fixed_alpha);
      take(g, "palm_cap", c.gp.palm_cap);
    }
    if (j.contains("newton")) {
      const json& nw = j.at("newton");
      detail::check_keys(nw,
                         {"eta1", "eta2", "beta0", "beta1", "beta2", "tau0", "c1", "c2", "kappa_hat", "kappa_max",
                          "max_iter", "max_tau_raises"},
                         "config.newton");
      take(nw, "eta1", c.newton.eta1);
      take(nw, "eta2", c.newton.eta2);
      take(nw, "beta0", c.newton.beta0);
      take(nw, "beta1", c.newton.beta1);
      take(nw, "beta2", c.newton.beta2);
      take(nw, "tau0", c.newton.tau0);
      take(nw, "c1", c.newton.c1);
      take(nw, "c2", c.newton.c2);
      take(nw, "kappa_hat", c.newton.kappa_hat);
      take(nw, "kappa_max", c.newton.kappa_max);
      take(nw, "max_iter", c.newton.max_iter);
      take(nw, "max_tau_raises", c.newton.max_tau_raises);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParameter, std::string("config: ") + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

/// FILE.ext -> FILE.tag.ext
inline std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& tag) {
  std::filesystem::path out = path.parent_path() / path.stem();
  out += "." + tag + path.extension().string();
  return out;
}

inline const char* mode_name(SubsolverMode m) {
  switch (m) {
    case SubsolverMode::Auto: return "auto";
    case SubsolverMode::FirstOrder: return "first-order";
    case SubsolverMode::SecondOrder: return "second-order";
  }
  return "auto";
}

inline json config_to_json(const DriverConfig& c) {
  json j;
  j["sigma0"] = c.sigma0;
  j["gamma2"] = c.gamma2;
  j["gamma2_low"] = c.gamma2_low;
  j["gamma2_switch"] = std::isfinite(c.gamma2_switch) ? json(c.gamma2_switch) : json(nullptr);
  j["gamma1"] = c.gamma1;
  j["eps0"] = c.eps0;
  j["p"] = c.p;
  j["q"] = c.q;
  j["eta"] = c.eta;
  j["eps_grad0"] = c.eps_grad0;
  j["eps_grad_min"] = c.eps_grad_min;
  j["tol_feas"] = c.tol_feas;
  j["t_max"] = c.t_max;
  j["zeta_switch"] = c.zeta_switch;
  j["rng_seed"] = c.rng_seed;
  j["mode"] = mode_name(c.mode);
  j["postprocess"] = c.postprocess;
  j["anchor"] = c.anchor;
  return j;
}

inline json outer_record_json(const OuterRecord& r) {
  return json{{"t", r.t},
              {"sigma", r.sigma},
              {"eps_grad", r.eps_grad},
              {"penalty_start", r.penalty_start},
              {"penalty_end", r.penalty_end},
              {"zeta_start", r.zeta_start},
              {"zeta_end", r.zeta_end},
              {"kkt", r.kkt},
              {"anchored", r.anchored},
              {"second_order", r.second_order},
              {"inner_iterations", r.inner_iterations}};
}

/// Common report fields; problem-specific fields (gap, resi, metrics) are added by the caller.
inline json solve_report_json(const SolveReport& rep, bool with_history) {
  json j;
  j["objective"] = rep.objective;
  j["zeta"] = rep.zeta;
  j["feasi"] = rep.feasi;
  j["kkt"] = rep.kkt;
  j["iterations"] = json{{"outer", rep.outer_iterations}, {"inner", rep.inner_iterations}};
  j["seconds"] = rep.seconds;
  j["termination"] = to_string(rep.termination);
  j["subsolver_failure"] = rep.subsolver_failure;
  j["newton"] = json{{"accepted", rep.newton.accepted},
                     {"rejected", rep.newton.rejected},
                     {"direction_fallbacks", rep.newton.direction_fallbacks},
                     {"curvature_raises", rep.newton.curvature_raises},
                     {"trial_condition_violations", rep.newton.trial_condition_violations},
                     {"qp_solves", rep.newton.qp_solves}};
  if (with_history) {
    json h = json::array();
    for (const OuterRecord& r : rep.history) h.push_back(outer_record_json(r));
    j["history"] = std::move(h);
  }
  return j;
}

inline json metrics_json(const ClusteringMetrics& m) {
  return json{{"purity", m.purity}, {"entropy", m.entropy}, {"nmi", m.nmi}};
}

/// Reads integer labels, one per line, and renumbers them densely from 0 in order of first appearance.
inline std::vector<int> read_labels(const std::filesystem::path& path, int* classes = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open");
  std::map<long, int> ids;
  std::vector<int> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    char* end = nullptr;
    const long v = std::strtol(line.c_str(), &end, 10);
    while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == line.c_str() || *end != '\0') {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": bad label '" + line + "'");
    }
    auto it = ids.try_emplace(v, int(ids.size())).first;
    out.push_back(it->second);
  }
  if (classes != nullptr) *classes = int(ids.size());
  return out;
}

}  // namespace ep4orth::cli
