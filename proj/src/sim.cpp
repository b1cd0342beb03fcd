#include "np/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "np/errors.hpp"
#include "np/rng.hpp"
#include "np/stats.hpp"

namespace np {

namespace {

constexpr std::int64_t kSignalDim = 10;

int harness_threads() {
  if (const char* env = std::getenv("NP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double logsumexp2(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Aggregate to_aggregate(const std::vector<double>& v) {
  const MeanSe ms = mean_se(v);
  return {ms.mean, ms.se};
}

}  // namespace

Eigen::MatrixXd gen_example1(std::int64_t d, std::int64_t rows, int cls,
                             std::uint64_t seed) {
  if (d < kSignalDim)
    throw std::invalid_argument("gen_example1: d must be >= 10");
  Rng rng(seed);
  Eigen::MatrixXd out(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out(r, c) = rng.normal();
  if (cls == 1) out.leftCols(kSignalDim).array() += 0.5;
  return out;
}

Eigen::MatrixXd gen_example2(std::int64_t d, std::int64_t rows, int cls,
                             std::uint64_t seed) {
  if (d < kSignalDim)
    throw std::invalid_argument("gen_example2: d must be >= 10");
  Rng rng(seed);
  Eigen::MatrixXd out(rows, d);
  const double a = 3.0 / std::sqrt(10.0);
  const double signal_sd = std::sqrt(0.1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (cls == 1) {
      // product model: every signal coordinate draws its own mixture
      // component, so the joint density is the product of the marginal
      // two-component mixtures
      for (Eigen::Index c = 0; c < kSignalDim; ++c) {
        const double sign = rng.uniform01() < 0.5 ? 1.0 : -1.0;
        out(r, c) = sign * a + signal_sd * rng.normal();
      }
      for (Eigen::Index c = kSignalDim; c < d; ++c) out(r, c) = rng.normal();
    } else {
      for (Eigen::Index c = 0; c < d; ++c) out(r, c) = rng.normal();
    }
  }
  return out;
}

Eigen::MatrixXd gen_example(Example ex, std::int64_t d, std::int64_t rows,
                            int cls, std::uint64_t seed) {
  return ex == Example::ex1_mean_shift ? gen_example1(d, rows, cls, seed)
                                       : gen_example2(d, rows, cls, seed);
}

double ex2_log_ratio(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != kSignalDim)
    throw std::invalid_argument("ex2_log_ratio: expects the 10 signal coords");
  const double a = 3.0 / std::sqrt(10.0);
  // coordinate-wise sum of log{0.5 N(a,0.1) + 0.5 N(-a,0.1)} - log N(0,1);
  // exact for the product model
  double s = 0.0;
  for (Eigen::Index j = 0; j < kSignalDim; ++j) {
    const double v = x[j];
    const double lp = std::log(0.5) - 0.5 * std::log(0.1) +
                      logsumexp2(-5.0 * (v - a) * (v - a),
                                 -5.0 * (v + a) * (v + a));
    s += lp + 0.5 * v * v;
  }
  return s;
}

std::pair<double, double> oracle_risks(Example ex, double alpha,
                                       std::int64_t draws,
                                       std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("oracle_risks: alpha must be in (0,1)");
  if (ex == Example::ex1_mean_shift) {
    // log r(X) is N(-1.25, 2.5) under class 0 and N(1.25, 2.5) under
    // class 1, so everything is closed form.
    const double sd = std::sqrt(2.5);
    const double c = -1.25 + sd * normal_quantile(1.0 - alpha);
    const double r1 = normal_cdf((c - 1.25) / sd);
    return {alpha, r1};
  }

  // Example 2: Monte Carlo on the exact log-ratio.
  Rng rng0(derive_seed(seed, 0));
  std::vector<double> scores0(static_cast<std::size_t>(draws));
  Eigen::VectorXd x(kSignalDim);
  for (std::int64_t i = 0; i < draws; ++i) {
    for (Eigen::Index j = 0; j < kSignalDim; ++j) x[j] = rng0.normal();
    scores0[static_cast<std::size_t>(i)] = ex2_log_ratio(x);
  }
  const auto rank = std::clamp<std::int64_t>(
      ceil_tol((1.0 - alpha) * static_cast<double>(draws)), 1, draws);
  std::nth_element(scores0.begin(), scores0.begin() + (rank - 1),
                   scores0.end());
  const double c = scores0[static_cast<std::size_t>(rank - 1)];

  Rng rng1(derive_seed(seed, 1));
  const double a = 3.0 / std::sqrt(10.0);
  const double signal_sd = std::sqrt(0.1);
  std::int64_t misses = 0;
  for (std::int64_t i = 0; i < draws; ++i) {
    for (Eigen::Index j = 0; j < kSignalDim; ++j) {
      const double sign = rng1.uniform01() < 0.5 ? 1.0 : -1.0;
      x[j] = sign * a + signal_sd * rng1.normal();
    }
    if (ex2_log_ratio(x) < c) ++misses;
  }
  return {alpha, static_cast<double>(misses) / static_cast<double>(draws)};
}

double analytic_type1_gaussian(const ScoreModel& model, double c_hat,
                               double mu0, double var0) {
  if (model.kind != ModelKind::parametric_gaussian)
    throw std::invalid_argument(
        "analytic_type1_gaussian: score model is not affine");
  const double mean = model.weights.sum() * mu0 + model.intercept;
  const double sd = std::sqrt(model.weights.squaredNorm() * var0);
  if (sd == 0.0) return mean >= c_hat ? 1.0 : 0.0;
  return 1.0 - normal_cdf((c_hat - mean) / sd);
}

namespace {

RepRecord run_one_rep(const SimSpec& spec, std::int64_t rep) {
  RepRecord rec;
  rec.rep = rep;
  rec.seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(rep));
  try {
    const Eigen::MatrixXd train0 =
        gen_example(spec.example, spec.d, spec.m, 0, derive_seed(rec.seed, 10));
    const Eigen::MatrixXd train1 =
        gen_example(spec.example, spec.d, spec.n, 1, derive_seed(rec.seed, 11));

    LabeledDataset data;
    data.features.resize(spec.m + spec.n, spec.d);
    data.features.topRows(spec.m) = train0;
    data.features.bottomRows(spec.n) = train1;
    data.labels.resize(spec.m + spec.n);
    data.labels.head(spec.m).setZero();
    data.labels.tail(spec.n).setOnes();

    NPConfig cfg = spec.cfg;
    cfg.seed = derive_seed(rec.seed, 12);
    const NPClassifier clf = train(data, cfg);
    rec.feasible = clf.feasible;

    LabeledDataset test;
    test.features.resize(2 * spec.test_per_class, spec.d);
    test.features.topRows(spec.test_per_class) = gen_example(
        spec.example, spec.d, spec.test_per_class, 0, derive_seed(rec.seed, 13));
    test.features.bottomRows(spec.test_per_class) = gen_example(
        spec.example, spec.d, spec.test_per_class, 1, derive_seed(rec.seed, 14));
    test.labels.resize(2 * spec.test_per_class);
    test.labels.head(spec.test_per_class).setZero();
    test.labels.tail(spec.test_per_class).setOnes();

    const ErrorRates err = empirical_errors(clf, test);
    rec.r0_test = *err.r0;
    rec.r1_test = *err.r1;

    if (clf.model.kind == ModelKind::parametric_gaussian) {
      // class 0 is N(0, I) in both examples
      rec.r0_population = analytic_type1_gaussian(clf.model, clf.c_hat);
    } else if (spec.population_r0_draws > 0) {
      const Eigen::MatrixXd fresh0 =
          gen_example(spec.example, spec.d, spec.population_r0_draws, 0,
                      derive_seed(rec.seed, 15));
      const Eigen::VectorXd s = score_all(clf.model, fresh0);
      std::int64_t over = 0;
      for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] >= clf.c_hat) ++over;
      rec.r0_population =
          static_cast<double>(over) / static_cast<double>(s.size());
    }

    if (clf.screening.has_value()) {
      std::int64_t missed = 0, fp = 0;
      std::vector<bool> in_sel(static_cast<std::size_t>(spec.d), false);
      for (Eigen::Index j : clf.screening->selected)
        in_sel[static_cast<std::size_t>(j)] = true;
      for (std::int64_t j = 0; j < spec.d; ++j) {
        const bool sel = in_sel[static_cast<std::size_t>(j)];
        if (j < kSignalDim && !sel) ++missed;
        if (j >= kSignalDim && sel) ++fp;
      }
      rec.n_selected =
          static_cast<std::int64_t>(clf.screening->selected.size());
      rec.n_missed = missed;
      rec.n_false_pos = fp;
    }
  } catch (const ScreeningError& e) {
    // an empty selection still has a screening outcome: nothing selected,
    // every signal missed; the replication itself is excluded from the
    // error aggregates
    rec.failed = true;
    rec.fail_reason = e.what();
    if (spec.cfg.screening != Screening::none) {
      rec.n_selected = 0;
      rec.n_missed = kSignalDim;
      rec.n_false_pos = 0;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.fail_reason = e.what();
  }
  return rec;
}

}  // namespace

McReport run_mc(const SimSpec& spec) {
  if (spec.reps < 1) throw std::invalid_argument("run_mc: reps must be >= 1");
  if (spec.test_per_class < 1)
    throw std::invalid_argument("run_mc: test_per_class must be >= 1");
  spec.cfg.check();

  McReport report;
  report.reps.resize(static_cast<std::size_t>(spec.reps));

  const int nthreads =
      std::min<std::int64_t>(harness_threads(), spec.reps);
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::int64_t rep = next.fetch_add(1);
      if (rep >= spec.reps) break;
      report.reps[static_cast<std::size_t>(rep)] = run_one_rep(spec, rep);
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> r0t, r1t, r0p, sel, mis, fp;
  std::int64_t violations = 0, with_pop = 0;
  for (const RepRecord& rec : report.reps) {
    if (rec.n_selected.has_value()) {
      sel.push_back(static_cast<double>(*rec.n_selected));
      mis.push_back(static_cast<double>(*rec.n_missed));
      fp.push_back(static_cast<double>(*rec.n_false_pos));
    }
    if (rec.failed) {
      ++report.n_failed;
      continue;
    }
    r0t.push_back(rec.r0_test);
    r1t.push_back(rec.r1_test);
    if (rec.r0_population.has_value()) {
      r0p.push_back(*rec.r0_population);
      ++with_pop;
      if (*rec.r0_population > spec.cfg.alpha) ++violations;
    }
  }
  report.r0_test = to_aggregate(r0t);
  report.r1_test = to_aggregate(r1t);
  if (!r0p.empty()) {
    report.r0_population = to_aggregate(r0p);
    report.violation_rate =
        static_cast<double>(violations) / static_cast<double>(with_pop);
  }
  if (!sel.empty()) {
    report.selected = to_aggregate(sel);
    report.missed = to_aggregate(mis);
    report.false_pos = to_aggregate(fp);
  }
  return report;
}

void write_report_csv(const std::string& path, const SimSpec& spec,
                      const McReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "rep,variant,d,m,n,r0_analytic,r0_test,r1_test,n_selected,"
         "n_missed,n_false_pos,seed\n";
  const char* variant = variant_name(variant_of(spec.cfg));
  for (const RepRecord& rec : report.reps) {
    out << rec.rep << ',' << variant << ',' << spec.d << ',' << spec.m << ','
        << spec.n << ',';
    auto emit = [&out](const auto& opt) {
      if (opt.has_value()) out << *opt;
      out << ',';
    };
    if (rec.failed) {
      out << ",,,";  // no error estimates, but screening counts may exist
    } else {
      emit(rec.r0_population);
      out << rec.r0_test << ',' << rec.r1_test << ',';
    }
    emit(rec.n_selected);
    emit(rec.n_missed);
    emit(rec.n_false_pos);
    out << rec.seed << '\n';
  }
}

void write_aggregate_json(const std::string& path, const SimSpec& spec,
                          const McReport& report) {
  nlohmann::json j;
  j["variant"] = variant_name(variant_of(spec.cfg));
  j["example"] = spec.example == Example::ex1_mean_shift ? 1 : 2;
  j["d"] = spec.d;
  j["m"] = spec.m;
  j["n"] = spec.n;
  j["reps"] = spec.reps;
  j["test_per_class"] = spec.test_per_class;
  j["alpha"] = spec.cfg.alpha;
  j["delta3"] = spec.cfg.delta3;
  j["n_failed"] = report.n_failed;
  j["r0_test"] = {{"mean", report.r0_test.mean}, {"se", report.r0_test.se}};
  j["r1_test"] = {{"mean", report.r1_test.mean}, {"se", report.r1_test.se}};
  if (report.r0_population.has_value())
    j["r0_population"] = {{"mean", report.r0_population->mean},
                          {"se", report.r0_population->se}};
  if (report.violation_rate.has_value())
    j["violation_rate"] = *report.violation_rate;
  if (report.selected.has_value()) {
    j["screening"] = {
        {"selected", {{"mean", report.selected->mean}, {"se", report.selected->se}}},
        {"missed", {{"mean", report.missed->mean}, {"se", report.missed->se}}},
        {"false_pos",
         {{"mean", report.false_pos->mean}, {"se", report.false_pos->se}}}};
  }
  if (report.oracle_r0.has_value()) {
    j["oracle"] = {{"r0", *report.oracle_r0}, {"r1", *report.oracle_r1}};
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace np
