#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prophet/instances.hpp"
#include "prophet/multi_threshold.hpp"
#include "prophet/optimal_stopping.hpp"
#include "prophet/simulator.hpp"
#include "prophet/single_threshold.hpp"
#include "prophet/version.hpp"

namespace prophet {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::uint64_t parse_count(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size() || v <= 0) throw std::invalid_argument(what);
    return static_cast<std::uint64_t>(v);
  } catch (...) {
    throw std::invalid_argument(std::string("invalid ") + what + ": " + s);
  }
}

inline double parse_real(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (...) {
    throw std::invalid_argument(std::string("invalid ") + what + ": " + s);
  }
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Named instance generators understood everywhere an instance file is
// accepted.  Anything else is treated as a path to an instance JSON file.
//   iid-uniform:N                  N i.i.d. Uniform(0,1), random order
//   iid-exponential:N              N i.i.d. Exponential(1), random order
//   mixed-uniform:N                alternating Uniform(0,1) / Uniform(0,1.2)
//   mixed-uniform-exponential:N    half Uniform(0,1), half Exponential(1)
//   two-point-heavy:N              atoms at 1,2,3 with probability 1/2 each
//   hard-instance:N                reciprocal two-point family, index order
//   hard-instance-sim:N            atomless simulation variant of the above
//   topk-lb:N:K                    sparse uniform top-k lower-bound family
//   superstar:N                    one deterministic near-threshold value
//                                  among N-1 i.i.d. Uniform(0,1)
inline Instance make_named_instance(const std::string& spec) {
  auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  auto arg = [&](std::size_t i) -> const std::string& {
    if (i >= parts.size()) throw std::invalid_argument("instance spec missing argument: " + spec);
    return parts[i];
  };
  if (name == "iid-uniform") {
    Instance inst;
    inst.distributions.assign(detail::parse_count(arg(1), "n"), Distribution::uniform(0.0, 1.0));
    return inst;
  }
  if (name == "iid-exponential") {
    Instance inst;
    inst.distributions.assign(detail::parse_count(arg(1), "n"), Distribution::exponential(1.0));
    return inst;
  }
  if (name == "mixed-uniform") {
    Instance inst;
    std::uint64_t n = detail::parse_count(arg(1), "n");
    for (std::uint64_t i = 0; i < n; ++i)
      inst.distributions.push_back(i % 2 == 0 ? Distribution::uniform(0.0, 1.0)
                                              : Distribution::uniform(0.0, 1.2));
    return inst;
  }
  if (name == "mixed-uniform-exponential") {
    Instance inst;
    std::uint64_t n = detail::parse_count(arg(1), "n");
    for (std::uint64_t i = 0; i < n; ++i)
      inst.distributions.push_back(i < n / 2 ? Distribution::uniform(0.0, 1.0)
                                             : Distribution::exponential(1.0));
    return inst;
  }
  if (name == "two-point-heavy") {
    Instance inst;
    std::uint64_t n = detail::parse_count(arg(1), "n");
    for (std::uint64_t i = 0; i < n; ++i)
      inst.distributions.push_back(Distribution::two_point(1.0 + double(i % 3), 0.5));
    return inst;
  }
  if (name == "hard-instance") return hard_instance(detail::parse_count(arg(1), "n"));
  if (name == "hard-instance-sim") return hard_instance_atomless(detail::parse_count(arg(1), "n"));
  if (name == "topk-lb")
    return topk_lb_instance(detail::parse_count(arg(1), "n"), detail::parse_count(arg(2), "k"));
  if (name == "superstar") {
    std::uint64_t n = detail::parse_count(arg(1), "n");
    if (n < 2) throw std::invalid_argument("superstar instance needs n >= 2");
    const double tau = std::exp(-lambda_star().lambda / double(n - 1));
    Instance inst;
    inst.distributions.push_back(Distribution::two_point(0.9 * tau, 1.0));
    for (std::uint64_t i = 1; i < n; ++i)
      inst.distributions.push_back(Distribution::uniform(0.0, 1.0));
    return inst;
  }
  return load_instance_file(spec);
}

// Policy spec strings: pi-single | ps-single | topk:<k> | cutoff:<i> |
// iid-optimal:<grid> | multi-threshold:<gamma>.
struct BuiltPolicy {
  std::unique_ptr<Policy> policy;
  json info;
};

inline BuiltPolicy make_policy(const std::string& spec, const Instance& inst) {
  auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  auto arg = [&](std::size_t i) -> const std::string& {
    if (i >= parts.size()) throw std::invalid_argument("policy spec missing argument: " + spec);
    return parts[i];
  };
  BuiltPolicy out;
  if (name == "pi-single" || name == "ps-single") {
    ThresholdPolicy pol = name == "pi-single" ? pi_single_threshold(inst) : ps_single_threshold(inst);
    const Observation& tau = pol.thresholds().front();
    out.info = json{{"policy", spec}, {"tau", tau.value}, {"tie_break", tau.aux}};
    if (name == "ps-single") out.info["lambda_star"] = lambda_star().lambda;
    out.policy = std::make_unique<ThresholdPolicy>(std::move(pol));
    return out;
  }
  if (name == "topk") {
    std::uint64_t k = detail::parse_count(arg(1), "k");
    ThresholdPolicy pol = topk_single_threshold(inst, k);
    const Observation& tau = pol.thresholds().front();
    out.info = json{{"policy", spec},
                    {"tau", tau.value},
                    {"tie_break", tau.aux},
                    {"expected_above", topk_gamma() * double(k)}};
    out.policy = std::make_unique<ThresholdPolicy>(std::move(pol));
    return out;
  }
  if (name == "cutoff") {
    std::uint64_t i = detail::parse_count(arg(1), "i");
    if (i > inst.size()) throw std::invalid_argument("cutoff index exceeds n");
    out.info = json{{"policy", spec}, {"cutoff", i}};
    out.policy = std::make_unique<CutoffPolicy>(i);
    return out;
  }
  if (name == "iid-optimal") {
    std::uint64_t grid = detail::parse_count(arg(1), "grid");
    if (!inst.iid()) throw std::invalid_argument("iid-optimal requires an i.i.d. instance");
    IidOptimalPolicy pol = iid_optimal_policy(inst.distributions[0], inst.size(), grid);
    out.info = json{{"policy", spec},
                    {"grid", grid},
                    {"predicted_success", pol.predicted_success}};
    out.policy = std::make_unique<ThresholdPolicy>(std::move(pol.policy));
    return out;
  }
  if (name == "multi-threshold") {
    double gamma = detail::parse_real(arg(1), "gamma");
    MultiThresholdParams params = derive_params(gamma, inst.size());
    auto grid = std::make_shared<ThresholdGrid>(build_grid(inst, params));
    InnerThresholds inner = dmin_optimal_inner(inst, params, *grid);
    out.info = json{{"policy", spec},
                    {"gamma", gamma},
                    {"bands", params.c},
                    {"group_size", params.group_size},
                    {"group_count", params.group_count},
                    {"epsilon", params.epsilon},
                    {"skip_prob", std::min(4.0 * gamma, 1.0)},
                    {"alpha", inner.alpha}};
    out.policy =
        std::make_unique<GroupedThresholdPolicy>(params, grid, std::move(inner.values));
    return out;
  }
  throw std::invalid_argument("unknown policy spec: " + spec);
}

inline Goal parse_goal(const std::string& spec) {
  if (spec == "best-choice") return Goal::best_choice();
  auto parts = detail::split(spec, ':');
  if (parts.size() == 2 && parts[0] == "top-k")
    return Goal::top_k(detail::parse_count(parts[1], "k"));
  throw std::invalid_argument("goal must be best-choice or top-k:<k>");
}

// One reproducible experiment.  Seeds are mandatory for Monte Carlo runs;
// reports are a pure function of the config, so identical configs give
// byte-identical report files (timing goes to stderr, never into reports).
struct ExperimentConfig {
  std::string instance_spec;
  std::string policy_spec;
  std::string goal_spec = "best-choice";
  std::uint64_t trials = 0;
  std::optional<std::uint64_t> seed;
  double confidence = 0.99;
  bool exact = false;
  unsigned threads = 0;  // 0 = all available; never echoed into reports
};

inline json simulate_record(const ExperimentConfig& cfg, const McEstimate& est) {
  return json{{"policy", cfg.policy_spec}, {"instance", cfg.instance_spec},
              {"goal", cfg.goal_spec},     {"trials", est.trials},
              {"successes", est.successes}, {"point", est.point},
              {"ci", json::array({est.ci_low, est.ci_high})},
              {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
              {"confidence", est.confidence}};
}

inline json run_experiment(const ExperimentConfig& cfg) {
  Instance inst = make_named_instance(cfg.instance_spec);
  BuiltPolicy built = make_policy(cfg.policy_spec, inst);
  Goal goal = parse_goal(cfg.goal_spec);

  json report;
  report["version"] = version_string;
  report["config"] = json{{"instance", cfg.instance_spec},
                          {"policy", cfg.policy_spec},
                          {"goal", cfg.goal_spec},
                          {"trials", cfg.trials},
                          {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                          {"confidence", cfg.confidence},
                          {"exact", cfg.exact}};
  report["policy_info"] = built.info;
  if (cfg.exact) {
    double value = exact_success_small(inst, *built.policy, goal);
    report["result"] = json{{"policy", cfg.policy_spec},
                            {"instance", cfg.instance_spec},
                            {"goal", cfg.goal_spec},
                            {"exact", value}};
  } else {
    if (!cfg.seed) throw std::invalid_argument("simulate requires --seed (no wall-clock default)");
    if (cfg.trials == 0) throw std::invalid_argument("simulate requires --trials >= 1");
    McEstimate est =
        estimate(inst, *built.policy, goal, cfg.trials, *cfg.seed, cfg.confidence, cfg.threads);
    report["result"] = simulate_record(cfg, est);
  }
  return report;
}

inline std::string simulate_csv_header() {
  return "policy,instance,goal,trials,successes,point,ci_low,ci_high,seed";
}

inline std::string simulate_csv_row(const ExperimentConfig& cfg, const McEstimate& est) {
  std::ostringstream row;
  row << cfg.policy_spec << ',' << cfg.instance_spec << ',' << cfg.goal_spec << ','
      << est.trials << ',' << est.successes << ',' << detail::fmt_double(est.point) << ','
      << detail::fmt_double(est.ci_low) << ',' << detail::fmt_double(est.ci_high) << ','
      << (cfg.seed ? std::to_string(*cfg.seed) : std::string());
  return row.str();
}

// Sweeps: exactly one parameter takes an explicit value list; row r runs
// with seed derive_seed(master_seed, r).  Output is CSV, one row per value,
// in list order.
struct SweepConfig {
  std::string over;                // "k" | "gamma" | "n"
  std::vector<std::string> values;
  std::string instance_spec;       // for over == "k"
  std::uint64_t trials = 0;        // for over == "k"
  std::size_t reps = 0;            // for over == "gamma"
  std::string gamma_instance;      // for over == "gamma"
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

inline std::string run_sweep(const SweepConfig& cfg) {
  std::ostringstream csv;
  if (cfg.over == "k") {
    if (!cfg.seed) throw std::invalid_argument("sweep over k requires --seed");
    Instance inst = make_named_instance(cfg.instance_spec);
    csv << "k,trials,successes,failure,failure_bound,ci_low,ci_high,seed\n";
    for (std::size_t row = 0; row < cfg.values.size(); ++row) {
      const std::uint64_t k = detail::parse_count(cfg.values[row], "k");
      const std::uint64_t row_seed = derive_seed(*cfg.seed, row);
      ThresholdPolicy pol = topk_single_threshold(inst, k);
      McEstimate est = estimate(inst, pol, Goal::top_k(k), cfg.trials, row_seed, 0.99, cfg.threads);
      const double bound = 2.0 * std::exp(-topk_gamma() * double(k));
      csv << k << ',' << est.trials << ',' << est.successes << ','
          << detail::fmt_double(1.0 - est.point) << ',' << detail::fmt_double(bound) << ','
          << detail::fmt_double(1.0 - est.ci_high) << ',' << detail::fmt_double(1.0 - est.ci_low)
          << ',' << row_seed << "\n";
    }
    return csv.str();
  }
  if (cfg.over == "gamma") {
    if (!cfg.seed) throw std::invalid_argument("sweep over gamma requires --seed");
    Instance inst = make_named_instance(cfg.gamma_instance);
    csv << "gamma,reps,subset_band_violation_fraction,subset_band_budget,"
           "subset_tail_violation_fraction,subset_tail_budget,band_pair_ok,band_exist_ok,exist_sum_ok,seed\n";
    for (std::size_t row = 0; row < cfg.values.size(); ++row) {
      const double gamma = detail::parse_real(cfg.values[row], "gamma");
      const std::uint64_t row_seed = derive_seed(*cfg.seed, row);
      MultiThresholdParams params = derive_params(gamma, inst.size());
      LemmaCheckReport rep = lemma_checkers(inst, params, cfg.reps, row_seed);
      csv << detail::fmt_double(gamma) << ',' << rep.reps << ','
          << detail::fmt_double(rep.subset_band_violation_fraction) << ','
          << detail::fmt_double(rep.subset_band_budget) << ','
          << detail::fmt_double(rep.subset_tail_violation_fraction) << ','
          << detail::fmt_double(rep.subset_tail_budget) << ',' << (rep.band_pair_ok ? 1 : 0)
          << ',' << (rep.band_exist_ok ? 1 : 0) << ',' << (rep.exist_sum_ok ? 1 : 0)
          << ',' << row_seed << "\n";
    }
    return csv.str();
  }
  if (cfg.over == "n") {
    csv << "n,best_cutoff_index,best_cutoff_value,value_minus_inv_e\n";
    for (const auto& value : cfg.values) {
      const std::uint64_t n = detail::parse_count(value, "n");
      BestCutoff best = best_cutoff(n);
      csv << n << ',' << best.index << ',' << detail::fmt_double(best.value) << ','
          << detail::fmt_double(best.value - std::exp(-1.0)) << "\n";
    }
    return csv.str();
  }
  throw std::invalid_argument("sweep --over must be k, gamma, or n");
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write output file: " + path);
  out << text;
}

}  // namespace prophet
