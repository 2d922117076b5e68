// Batch experiment runner for best-choice / top-k optimal stopping
// experiments.  Every stochastic subcommand requires an explicit --seed and
// re-running any command with the same arguments reproduces its output file
// byte for byte.  Timing goes to stderr only.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "prophet/report.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;

unsigned env_thread_cap() {
  const char* env = std::getenv("PROPHET_BENCH_THREADS");
  if (!env) return 0;
  long v = std::atol(env);
  return v > 0 ? static_cast<unsigned>(v) : 1;
}

unsigned resolve_threads(unsigned requested) {
  unsigned cap = env_thread_cap();
  if (cap == 0) return requested;
  if (requested == 0) return cap;
  return std::min(requested, cap);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    prophet::write_text_file(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prophet-bench: best-choice and top-k optimal stopping experiments"};
  app.require_subcommand(1);

  std::string instance_spec, policy_spec, goal_spec = "best-choice";
  std::string out_path, format = "json";
  std::uint64_t trials = 0;
  std::optional<std::uint64_t> seed;
  double confidence = 0.99;
  unsigned threads = 0;
  bool exact = false;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo or exact policy evaluation");
  simulate->add_option("--instance", instance_spec, "instance file or named generator")->required();
  simulate->add_option("--policy", policy_spec, "policy spec")->required();
  simulate->add_option("--goal", goal_spec, "best-choice | top-k:<k>");
  simulate->add_option("--trials", trials, "Monte Carlo trials");
  simulate->add_option("--seed", seed, "master seed (required unless --exact)");
  simulate->add_option("--confidence", confidence, "Wilson interval confidence");
  simulate->add_option("--threads", threads, "worker threads (0 = all)");
  simulate->add_option("--format", format, "json | csv");
  simulate->add_option("--out", out_path, "output path (default stdout)");
  simulate->add_flag("--exact", exact, "exhaustive evaluation for small discrete instances");

  std::string sweep_over;
  std::vector<std::string> sweep_values;
  std::size_t sweep_reps = 200;
  auto* sweep = app.add_subcommand("sweep", "one swept parameter, one CSV row per value");
  sweep->add_option("--over", sweep_over, "k | gamma | n")->required();
  sweep->add_option("--values", sweep_values, "explicit value list")->required()->delimiter(',');
  sweep->add_option("--instance", instance_spec, "instance (k and gamma sweeps)");
  sweep->add_option("--trials", trials, "trials per row (k sweep)");
  sweep->add_option("--reps", sweep_reps, "subset draws per row (gamma sweep)");
  sweep->add_option("--seed", seed, "master seed; row seeds derive from it");
  sweep->add_option("--threads", threads, "worker threads (0 = all)");
  sweep->add_option("--out", out_path, "output path (default stdout)");

  auto* threshold = app.add_subcommand("threshold", "print the threshold a policy spec computes");
  threshold->add_option("--instance", instance_spec)->required();
  threshold->add_option("--policy", policy_spec)->required();
  threshold->add_option("--out", out_path);

  auto* lambda_cmd = app.add_subcommand("lambda-star", "series maximizer and value");

  std::vector<std::string> lecam_n;
  double lecam_lambda = 1.5028610173354528;
  std::string lecam_probs;
  auto* lecam = app.add_subcommand("lecam", "exact Poisson-binomial vs Poisson L1 distance");
  lecam->add_option("--n-list", lecam_n, "sweep n with probs lambda/n each")->delimiter(',');
  lecam->add_option("--lambda", lecam_lambda, "total intensity for --n-list rows");
  lecam->add_option("--probs", lecam_probs, "comma-separated explicit probabilities");
  lecam->add_option("--out", out_path);

  std::uint64_t hard_n = 0;
  bool hard_exact = false;
  auto* hard = app.add_subcommand("hard-instance", "reciprocal two-point hard instance");
  hard->add_option("--n", hard_n)->required();
  hard->add_flag("--exact", hard_exact, "emit the best cutoff index and exact value");
  hard->add_option("--out", out_path);

  std::uint64_t topk_n = 0, topk_k = 0;
  auto* topklb = app.add_subcommand("topk-lb", "trap event probabilities and bound");
  topklb->add_option("--n", topk_n)->required();
  topklb->add_option("--k", topk_k)->required();
  topklb->add_option("--out", out_path);

  double mt_gamma = 0.2;
  std::string mt_inner = "dmin-optimal";
  auto* multi = app.add_subcommand("multi-threshold", "grouped multi-threshold policy run");
  multi->add_option("--gamma", mt_gamma)->required();
  multi->add_option("--inner", mt_inner, "dmin-optimal | path to JSON array of thresholds");
  multi->add_option("--instance", instance_spec)->required();
  multi->add_option("--trials", trials);
  multi->add_option("--seed", seed);
  multi->add_option("--goal", goal_spec);
  multi->add_option("--threads", threads);
  multi->add_option("--out", out_path);

  double lc_gamma = 0.3;
  std::size_t lc_reps = 200;
  auto* lemma = app.add_subcommand("lemma-check", "concentration checks with exact per-subset probabilities");
  lemma->add_option("--gamma", lc_gamma)->required();
  lemma->add_option("--reps", lc_reps);
  lemma->add_option("--instance", instance_spec)->required();
  lemma->add_option("--seed", seed);
  lemma->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    if (simulate->parsed()) {
      prophet::ExperimentConfig cfg;
      cfg.instance_spec = instance_spec;
      cfg.policy_spec = policy_spec;
      cfg.goal_spec = goal_spec;
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.confidence = confidence;
      cfg.exact = exact;
      cfg.threads = resolve_threads(threads);
      prophet::json report = prophet::run_experiment(cfg);
      if (format == "csv" && !exact) {
        prophet::McEstimate est;
        est.trials = report["result"]["trials"].get<std::uint64_t>();
        est.successes = report["result"]["successes"].get<std::uint64_t>();
        est.point = report["result"]["point"].get<double>();
        est.ci_low = report["result"]["ci"][0].get<double>();
        est.ci_high = report["result"]["ci"][1].get<double>();
        emit(prophet::simulate_csv_header() + "\n" + prophet::simulate_csv_row(cfg, est) + "\n",
             out_path);
      } else {
        emit(report.dump(2) + "\n", out_path);
      }
    } else if (sweep->parsed()) {
      prophet::SweepConfig cfg;
      cfg.over = sweep_over;
      cfg.values = sweep_values;
      cfg.instance_spec = instance_spec;
      cfg.gamma_instance = instance_spec;
      cfg.trials = trials;
      cfg.reps = sweep_reps;
      cfg.seed = seed;
      cfg.threads = resolve_threads(threads);
      emit(prophet::run_sweep(cfg), out_path);
    } else if (threshold->parsed()) {
      prophet::Instance inst = prophet::make_named_instance(instance_spec);
      prophet::BuiltPolicy built = prophet::make_policy(policy_spec, inst);
      prophet::json out{{"version", prophet::version_string},
                        {"instance", instance_spec},
                        {"policy_info", built.info}};
      emit(out.dump(2) + "\n", out_path);
    } else if (lambda_cmd->parsed()) {
      const auto& ls = prophet::lambda_star();
      char buf[80];
      std::snprintf(buf, sizeof buf, "%.6f %.6f\n", ls.lambda, ls.value);
      std::cout << buf;
    } else if (lecam->parsed()) {
      std::ostringstream csv;
      csv << "n,lambda,tv_exact,bound\n";
      if (!lecam_probs.empty()) {
        std::vector<double> probs;
        for (const auto& tok : prophet::detail::split(lecam_probs, ','))
          probs.push_back(prophet::detail::parse_real(tok, "prob"));
        auto r = prophet::lecam_check(probs);
        csv << probs.size() << ',' << prophet::detail::fmt_double(r.lambda) << ','
            << prophet::detail::fmt_double(r.tv_exact) << ','
            << prophet::detail::fmt_double(r.bound) << "\n";
      }
      for (const auto& tok : lecam_n) {
        std::uint64_t n = prophet::detail::parse_count(tok, "n");
        std::vector<double> probs(n, lecam_lambda / double(n));
        auto r = prophet::lecam_check(probs);
        csv << n << ',' << prophet::detail::fmt_double(r.lambda) << ','
            << prophet::detail::fmt_double(r.tv_exact) << ','
            << prophet::detail::fmt_double(r.bound) << "\n";
      }
      emit(csv.str(), out_path);
    } else if (hard->parsed()) {
      if (hard_exact) {
        prophet::BestCutoff best = prophet::best_cutoff(hard_n);
        prophet::json out{{"version", prophet::version_string},
                          {"n", hard_n},
                          {"best_cutoff_index", best.index},
                          {"best_cutoff_value", best.value}};
        emit(out.dump(2) + "\n", out_path);
      } else {
        emit(prophet::instance_to_json(prophet::hard_instance(hard_n)).dump(2) + "\n", out_path);
      }
    } else if (topklb->parsed()) {
      auto probs = prophet::topk_lb_event_probs(topk_n, topk_k);
      prophet::json out{{"version", prophet::version_string},
                        {"n", topk_n},
                        {"k", topk_k},
                        {"p_first_half_k", probs.p_first_half_k},
                        {"p_interleave", probs.p_interleave},
                        {"p_second_half_zero", probs.p_second_half_zero},
                        {"p_second_half_ge_k", probs.p_second_half_ge_k},
                        {"trap_bound", probs.trap_bound}};
      emit(out.dump(2) + "\n", out_path);
    } else if (multi->parsed()) {
      prophet::Instance inst = prophet::make_named_instance(instance_spec);
      prophet::MultiThresholdParams params = prophet::derive_params(mt_gamma, inst.size());
      auto grid = std::make_shared<prophet::ThresholdGrid>(prophet::build_grid(inst, params));
      std::vector<double> inner_values;
      double alpha = 0.0;
      if (mt_inner == "dmin-optimal") {
        prophet::InnerThresholds inner = prophet::dmin_optimal_inner(inst, params, *grid);
        inner_values = std::move(inner.values);
        alpha = inner.alpha;
      } else {
        std::ifstream in(mt_inner);
        if (!in) throw std::invalid_argument("cannot open inner thresholds file: " + mt_inner);
        prophet::json j;
        in >> j;
        for (const auto& v : j) inner_values.push_back(v.get<double>());
        if (inner_values.size() != params.group_count)
          throw std::invalid_argument("inner thresholds file must list one value per group");
      }
      prophet::json out{{"version", prophet::version_string},
                        {"gamma", mt_gamma},
                        {"bands", params.c},
                        {"group_size", params.group_size},
                        {"group_count", params.group_count},
                        {"epsilon", params.epsilon},
                        {"alpha", alpha},
                        {"skip_prob", std::min(4.0 * mt_gamma, 1.0)},
                        {"inner_source", mt_inner}};
      if (trials > 0) {
        if (!seed) throw std::invalid_argument("multi-threshold simulation requires --seed");
        prophet::GroupedThresholdPolicy policy(params, grid, inner_values);
        prophet::McEstimate est =
            prophet::estimate(inst, policy, prophet::parse_goal(goal_spec), trials, *seed, 0.99,
                              resolve_threads(threads));
        out["result"] = prophet::json{{"trials", est.trials},
                                      {"successes", est.successes},
                                      {"point", est.point},
                                      {"ci", prophet::json::array({est.ci_low, est.ci_high})},
                                      {"seed", *seed}};
      }
      emit(out.dump(2) + "\n", out_path);
    } else if (lemma->parsed()) {
      if (!seed) throw std::invalid_argument("lemma-check requires --seed");
      prophet::Instance inst = prophet::make_named_instance(instance_spec);
      prophet::MultiThresholdParams params = prophet::derive_params(lc_gamma, inst.size());
      prophet::LemmaCheckReport rep = prophet::lemma_checkers(inst, params, lc_reps, *seed);
      prophet::json out{
          {"version", prophet::version_string},
          {"gamma", lc_gamma},
          {"reps", rep.reps},
          {"seed", *seed},
          {"subset_band", prophet::json{{"violation_fraction", rep.subset_band_violation_fraction},
                                        {"budget", rep.subset_band_budget}}},
          {"subset_tail", prophet::json{{"violation_fraction", rep.subset_tail_violation_fraction},
                                        {"budget", rep.subset_tail_budget}}},
          {"band_pair", prophet::json{{"ok", rep.band_pair_ok},
                                      {"max", rep.band_pair_max},
                                      {"bound", rep.band_pair_bound}}},
          {"band_exist",
           prophet::json{{"ok", rep.band_exist_ok}, {"max_excess", rep.band_exist_max_excess}}},
          {"exist_sum",
           prophet::json{{"ok", rep.exist_sum_ok}, {"max_excess", rep.exist_sum_max_excess}}}};
      emit(out.dump(2) + "\n", out_path);
    }
  } catch (const prophet::InfeasibleTargetError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const prophet::InfeasibleParamsError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  std::cerr << "elapsed_ms=" << elapsed.count() << "\n";
  return exit_ok;
}
