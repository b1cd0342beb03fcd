#include "np/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "np/csv.hpp"
#include "np/errors.hpp"
#include "np/model_io.hpp"
#include "np/numerics.hpp"
#include "np/rng.hpp"
#include "np/sim.hpp"

namespace np {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTheoryMismatch = 4;

struct CommonOpts {
  double alpha = 0.05;
  double delta1 = 0.05;
  double delta3 = 0.05;
  double q = 0.95;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--alpha", o.alpha, "target type I level")
      ->check(CLI::Range(0.0, 1.0).description("(0,1)"));
  cmd->add_option("--delta1", o.delta1, "screening tolerance")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--delta3", o.delta3, "type I violation tolerance")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--q", o.q, "permutation cutoff quantile Q")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", o.seed, "rng seed");
}

NPConfig config_for(const std::string& variant, const CommonOpts& o,
                    const std::string& screen_stat) {
  NPConfig cfg;
  cfg.alpha = o.alpha;
  cfg.delta1 = o.delta1;
  cfg.delta3 = o.delta3;
  cfg.q_quantile = o.q;
  cfg.seed = o.seed;
  if (variant == "nsn2") {
    cfg.estimator = Estimator::nonparametric;
    cfg.screening = Screening::dstat;
  } else if (variant == "psn2") {
    cfg.estimator = Estimator::parametric;
    cfg.screening = Screening::tstat;
  } else if (variant == "nn2") {
    cfg.estimator = Estimator::nonparametric;
    cfg.screening = Screening::none;
  } else {  // pn2
    cfg.estimator = Estimator::parametric;
    cfg.screening = Screening::none;
  }
  if (!screen_stat.empty() && cfg.screening != Screening::none)
    cfg.screening =
        screen_stat == "dstat" ? Screening::dstat : Screening::tstat;
  return cfg;
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
  std::string data, label_col, class0_value, out, variant = "pn2";
  std::string screen_stat;
  bool allow_infeasible = false;
  CommonOpts common;
};

int cmd_train(const TrainArgs& a) {
  const LabeledDataset data =
      read_labeled_csv(a.data, a.label_col, a.class0_value);
  bool fatal = false;
  for (const DataIssue& issue : validate(data)) {
    if (issue.kind == DataIssue::Kind::constant_feature) {
      std::cerr << "warning: " << issue.message << "\n";
    } else {
      std::cerr << "error: " << issue.message << "\n";
      fatal = true;
    }
  }
  if (fatal) return kExitData;

  const NPConfig cfg = config_for(a.variant, a.common, a.screen_stat);
  const NPClassifier clf = train(data, cfg);

  const std::size_t n_selected = clf.model.selected.size();
  std::cout << "variant: " << variant_name(clf.variant) << "\n"
            << "m3: " << clf.m3 << "\n"
            << "k_min: " << k_min({cfg.alpha, cfg.delta3, clf.m3}) << "\n"
            << "k_used: " << clf.k_used << "\n"
            << "feasible: " << (clf.feasible ? "yes" : "no") << "\n"
            << "selected features: " << n_selected << "\n";
  if (!clf.feasible) {
    const auto sufficient = static_cast<std::int64_t>(
        std::ceil(4.0 / (cfg.alpha * cfg.delta3)));
    std::cerr << "guarantee infeasible: k_min > m3 = " << clf.m3
              << " (m3 >= " << sufficient << " always suffices at this alpha"
              << ", delta3)\n";
    if (!a.allow_infeasible) return kExitInfeasible;
  }

  if (!a.out.empty()) {
    ModelArtifact artifact;
    artifact.clf = clf;
    artifact.delta1 = cfg.delta1;
    artifact.q_quantile = cfg.q_quantile;
    artifact.screening = cfg.screening;
    artifact.seed = cfg.seed;
    for (Eigen::Index j : clf.model.selected)
      artifact.selected_names.push_back(
          data.feature_names.empty() ? "f" + std::to_string(j)
                                     : data.feature_names[static_cast<std::size_t>(j)]);
    artifact.train_rows0 = (data.labels.array() == 0).count();
    artifact.train_rows1 = (data.labels.array() == 1).count();
    artifact.train_dim = data.features.cols();
    artifact.content_hash = fnv1a_hash(data);
    save_model(a.out, artifact);
    std::cout << "model written to " << a.out << "\n";
  }
  return kExitOk;
}

// -------------------------------------------------------------- predict --

struct PredictArgs {
  std::string model, data, out;
};

// Binds input columns to the model's selected features: by name when every
// selected name appears in the header (other columns are ignored and never
// parsed), positionally otherwise (requiring the full training width).
Eigen::MatrixXd bind_columns(const CsvTable& table,
                             const ModelArtifact& artifact,
                             const std::string& path) {
  const auto& names = artifact.selected_names;
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  std::vector<Eigen::Index> sources;
  bool by_name = !names.empty();
  for (const std::string& name : names) {
    const Eigen::Index src = table.col_index(name);
    if (src < 0) {
      by_name = false;
      break;
    }
    sources.push_back(src);
  }

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(rows, artifact.clf.model.dim);
  if (by_name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto src = static_cast<std::size_t>(sources[i]);
      const Eigen::Index dst = artifact.clf.model.selected[i];
      for (Eigen::Index r = 0; r < rows; ++r)
        full(r, dst) =
            parse_double(table.rows[static_cast<std::size_t>(r)][src],
                         path + " column " + names[i]);
    }
    return full;
  }
  if (static_cast<Eigen::Index>(table.header.size()) !=
      artifact.clf.model.dim)
    throw DataError("input has " + std::to_string(table.header.size()) +
                    " columns; model expects " +
                    std::to_string(artifact.clf.model.dim) +
                    " (and selected feature names were not all found)");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < full.cols(); ++c)
      full(r, c) = parse_double(
          table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)],
          path + " row " + std::to_string(r + 2));
  return full;
}

int cmd_predict(const PredictArgs& a) {
  const ModelArtifact artifact = load_model(a.model);
  const CsvTable table = read_csv(a.data);
  std::ofstream out(a.out);
  if (!out) throw DataError("cannot open " + a.out + " for writing");
  out << "row_index,score,prediction\n";
  if (table.rows.empty()) return kExitOk;

  const Eigen::MatrixXd features = bind_columns(table, artifact, a.data);
  const Eigen::VectorXd scores = score_all(artifact.clf.model, features);
  for (Eigen::Index r = 0; r < scores.size(); ++r) {
    const int pred = scores[r] >= artifact.clf.c_hat ? 1 : 0;
    out << r << ',' << format_double(scores[r]) << ',' << pred << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------- evaluate --

struct EvaluateArgs {
  std::string model, data, label_col, class0_value, out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const ModelArtifact artifact = load_model(a.model);
  const LabeledDataset data =
      read_labeled_csv(a.data, a.label_col, a.class0_value);

  // re-bind by name through the same path as predict
  CsvTable table;
  table.header = data.feature_names;
  table.rows.resize(static_cast<std::size_t>(data.features.rows()));
  for (Eigen::Index r = 0; r < data.features.rows(); ++r)
    for (Eigen::Index c = 0; c < data.features.cols(); ++c)
      table.rows[static_cast<std::size_t>(r)].push_back(
          format_double(data.features(r, c)));
  LabeledDataset bound;
  bound.features = bind_columns(table, artifact, a.data);
  bound.labels = data.labels;

  const ErrorRates rates = empirical_errors(artifact.clf, bound);
  auto show = [](const std::optional<double>& r) {
    return r.has_value() ? format_double(*r) : std::string("undefined");
  };
  std::cout << "type I error (class 0 as 1): " << show(rates.r0) << "\n"
            << "type II error (class 1 as 0): " << show(rates.r1) << "\n";
  if (!a.out.empty()) {
    nlohmann::json j;
    if (rates.r0.has_value()) j["r0"] = *rates.r0;
    if (rates.r1.has_value()) j["r1"] = *rates.r1;
    j["alpha"] = artifact.clf.alpha;
    j["feasible"] = artifact.clf.feasible;
    std::ofstream f(a.out);
    f << j.dump(2) << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------- simulate --

struct SimulateArgs {
  int example = 1;
  std::int64_t d = 10, m = 400, n = 400, reps = 1000, test_per_class = 1000;
  std::int64_t population_r0_draws = 0;
  std::int64_t oracle_draws = 0;
  int permutations = 1;
  std::string variant = "pn2", out, screen_stat;
  CommonOpts common;
};

int cmd_simulate(const SimulateArgs& a) {
  SimSpec spec;
  spec.example =
      a.example == 1 ? Example::ex1_mean_shift : Example::ex2_mixture;
  spec.d = a.d;
  spec.m = a.m;
  spec.n = a.n;
  spec.reps = a.reps;
  spec.test_per_class = a.test_per_class;
  spec.population_r0_draws = a.population_r0_draws;
  spec.base_seed = a.common.seed;
  spec.cfg = config_for(a.variant, a.common, a.screen_stat);
  spec.cfg.n_permutations = a.permutations;

  McReport report = run_mc(spec);
  if (a.oracle_draws > 0) {
    const auto [r0_star, r1_star] =
        oracle_risks(spec.example, spec.cfg.alpha, a.oracle_draws,
                     derive_seed(spec.base_seed, 990));
    report.oracle_r0 = r0_star;
    report.oracle_r1 = r1_star;
  }
  std::filesystem::create_directories(a.out);
  write_report_csv(a.out + "/replications.csv", spec, report);
  write_aggregate_json(a.out + "/aggregate.json", spec, report);

  std::cout << "reps: " << spec.reps << " (failed: " << report.n_failed
            << ")\n"
            << "type I (test): " << report.r0_test.mean << " +- "
            << report.r0_test.se << "\n"
            << "type II (test): " << report.r1_test.mean << " +- "
            << report.r1_test.se << "\n";
  if (report.violation_rate.has_value())
    std::cout << "violation rate (population R0 > alpha): "
              << *report.violation_rate << "\n";
  if (report.selected.has_value())
    std::cout << "screening: selected " << report.selected->mean
              << ", missed " << report.missed->mean << ", false positive "
              << report.false_pos->mean << "\n";
  std::cout << "report written to " << a.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------- verify-theory --

struct VerifyArgs {
  bool grid_small = false;
  std::string convention = "all";  // or "nonempty"
};

int cmd_verify_theory(const VerifyArgs& a) {
  bool ok = true;
  const auto convention = a.convention == "all"
                              ? ChernCountConvention::all_combos
                              : ChernCountConvention::both_nonempty;
  static const int expected[10] = {83, 70, 49, 4, 0, 0, 0, 0, 0, 0};
  std::cout << "threshold comparison counts #{k_chern < k_min} (convention="
            << a.convention << "):\n";
  for (int i = 1; i <= 10; ++i) {
    const int got = count_kchern_below_kmin(0.01 * i, convention);
    const bool match = got == expected[i - 1];
    if (!match) ok = false;
    std::cout << "delta3=" << format_double(0.01 * i) << ": " << got
              << (match ? "" : (" MISMATCH (expected " +
                                std::to_string(expected[i - 1]) + ")"))
              << "\n";
  }

  // k_min ceiling formula against the brute-force minimal feasible k
  const std::vector<double> levels = {0.01, 0.05, 0.1};
  const std::int64_t m3_step = a.grid_small ? 200 : 50;
  std::int64_t mismatches = 0, checked = 0;
  for (double alpha : levels)
    for (double delta3 : levels)
      for (std::int64_t m3 = 50; m3 <= 2000; m3 += m3_step) {
        const ThresholdParams p{alpha, delta3, m3};
        std::int64_t brute = m3 + 1;
        for (std::int64_t k = 1; k <= m3 + 1; ++k)
          if (g_bound(p, k) <= alpha) {
            brute = k;
            break;
          }
        ++checked;
        if (brute != k_min(p)) ++mismatches;
      }
  std::cout << "k_min formula vs brute force: " << mismatches
            << " mismatches over " << checked << " grid points\n";
  if (mismatches > 0) ok = false;

  // beta-binomial duality against direct long-double summation
  long double max_err = 0.0L;
  const std::int64_t n_max = a.grid_small ? 40 : 100;
  for (std::int64_t n = 1; n <= n_max; ++n)
    for (std::int64_t k = 1; k <= n; ++k)
      for (int pi = 0; pi <= 10; ++pi) {
        const double p = 0.1 * pi;
        const double lib = beta_cdf_via_duality(k, n, p);
        // independent route: term recurrence in long double
        long double q = 1.0L - static_cast<long double>(p);
        long double term = std::pow(q, static_cast<long double>(n));
        long double cdf = term;  // i = 0
        for (std::int64_t i = 0; i < k - 1; ++i) {
          term *= static_cast<long double>(n - i) / (i + 1) *
                  (static_cast<long double>(p) / q);
          cdf += term;
        }
        const long double ref =
            p == 0.0 ? 0.0L : (p == 1.0 ? 1.0L : 1.0L - cdf);
        max_err = std::max(max_err,
                           std::fabs(ref - static_cast<long double>(lib)));
      }
  std::cout << "duality identity max abs error: "
            << static_cast<double>(max_err) << "\n";
  if (max_err > 1e-9L) ok = false;

  std::cout << (ok ? "all checks passed" : "THEORY VERIFICATION FAILED")
            << "\n";
  return ok ? kExitOk : kExitTheoryMismatch;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Neyman-Pearson naive Bayes classification with guaranteed "
               "type I error control"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file with defaults");

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit a classifier from a labeled CSV");
  train_cmd->fallthrough();
  train_cmd->add_option("--data", train_args.data, "training CSV")->required();
  train_cmd->add_option("--label-col", train_args.label_col, "label column")
      ->required();
  train_cmd
      ->add_option("--class0-value", train_args.class0_value,
                   "label value of the error-controlled class 0")
      ->required();
  train_cmd
      ->add_option("--variant", train_args.variant,
                   "classifier variant: nsn2|psn2|nn2|pn2")
      ->check(CLI::IsMember({"nsn2", "psn2", "nn2", "pn2"}));
  train_cmd->add_option("--screen-stat", train_args.screen_stat,
                        "override screening statistic: dstat|tstat")
      ->check(CLI::IsMember({"dstat", "tstat"}));
  train_cmd->add_option("--out", train_args.out, "model JSON output path");
  train_cmd->add_flag("--allow-infeasible", train_args.allow_infeasible,
                      "proceed when the type I guarantee cannot be honored");
  add_common(train_cmd, train_args.common);

  PredictArgs predict_args;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "score and classify a feature CSV");
  predict_cmd->fallthrough();
  predict_cmd->add_option("--model", predict_args.model, "model JSON")
      ->required();
  predict_cmd->add_option("--data", predict_args.data, "input CSV")
      ->required();
  predict_cmd->add_option("--out", predict_args.out, "predictions CSV")
      ->required();

  EvaluateArgs evaluate_args;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "empirical type I/II errors on a labeled CSV");
  evaluate_cmd->fallthrough();
  evaluate_cmd->add_option("--model", evaluate_args.model, "model JSON")
      ->required();
  evaluate_cmd->add_option("--data", evaluate_args.data, "labeled CSV")
      ->required();
  evaluate_cmd->add_option("--label-col", evaluate_args.label_col, "label column")
      ->required();
  evaluate_cmd
      ->add_option("--class0-value", evaluate_args.class0_value,
                   "label value of class 0")
      ->required();
  evaluate_cmd->add_option("--out", evaluate_args.out, "JSON output path");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Monte Carlo replication harness");
  sim_cmd->fallthrough();
  sim_cmd->add_option("--example", sim_args.example, "scenario: 1|2")
      ->check(CLI::IsMember({1, 2}));
  sim_cmd->add_option("--d", sim_args.d, "feature dimension (>= 10)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--m", sim_args.m, "class-0 training size")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--n", sim_args.n, "class-1 training size")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--reps", sim_args.reps, "replications")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--test-per-class", sim_args.test_per_class,
                      "test draws per class per replication")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--population-r0-draws", sim_args.population_r0_draws,
                      "fresh class-0 draws for population R0 of KDE variants");
  sim_cmd->add_option("--oracle-draws", sim_args.oracle_draws,
                      "Monte Carlo draws for the oracle risks in the report "
                      "(0 = skip)");
  sim_cmd->add_option("--permutations", sim_args.permutations,
                      "screening null permutations to average over")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--variant", sim_args.variant, "nsn2|psn2|nn2|pn2")
      ->check(CLI::IsMember({"nsn2", "psn2", "nn2", "pn2"}));
  sim_cmd->add_option("--screen-stat", sim_args.screen_stat,
                      "override screening statistic: dstat|tstat")
      ->check(CLI::IsMember({"dstat", "tstat"}));
  sim_cmd->add_option("--out", sim_args.out, "report directory")->required();
  add_common(sim_cmd, sim_args.common);

  VerifyArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify-theory", "recompute the threshold-theory reference numbers");
  verify_cmd->fallthrough();
  verify_cmd->add_flag("--grid-small", verify_args.grid_small,
                       "reduced grids for a quick check");
  verify_cmd
      ->add_option("--convention", verify_args.convention,
                   "comparison-count convention: all|nonempty")
      ->check(CLI::IsMember({"all", "nonempty"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (predict_cmd->parsed()) return cmd_predict(predict_args);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_args);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (verify_cmd->parsed()) return cmd_verify_theory(verify_args);
  } catch (const ScreeningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace np
