#include "np/classify.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "np/errors.hpp"
#include "np/numerics.hpp"
#include "np/rng.hpp"
#include "np/stats.hpp"

namespace np {

Variant variant_of(const NPConfig& cfg) {
  const bool screening = cfg.screening != Screening::none;
  if (cfg.estimator == Estimator::nonparametric)
    return screening ? Variant::NSN2 : Variant::NN2;
  return screening ? Variant::PSN2 : Variant::PN2;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::NSN2: return "nsn2";
    case Variant::PSN2: return "psn2";
    case Variant::NN2: return "nn2";
    case Variant::PN2: return "pn2";
  }
  return "?";
}

NPClassifier train(const LabeledDataset& data, const NPConfig& cfg) {
  cfg.check();
  NPClassifier clf;
  clf.alpha = cfg.alpha;
  clf.delta3 = cfg.delta3;
  clf.variant = variant_of(cfg);
  clf.split = make_split(data, cfg);

  std::vector<Eigen::Index> selected;  // empty = all features
  if (cfg.screening != Screening::none) {
    const Eigen::MatrixXd s01 = extract_rows(data.features, clf.split.s0_1);
    const Eigen::MatrixXd s11 = extract_rows(data.features, clf.split.s1_1);
    clf.screening = screen(s01, s11, cfg, derive_seed(cfg.seed, 2));
    selected = clf.screening->selected;
  }

  // Estimation always uses the second subsamples; with screening off the
  // first subsamples are empty, so these are the full designated halves.
  const Eigen::MatrixXd est0 = extract_rows(data.features, clf.split.s0_2);
  const Eigen::MatrixXd est1 = extract_rows(data.features, clf.split.s1_2);
  clf.model = cfg.estimator == Estimator::parametric
                  ? fit_parametric(est0, est1, selected)
                  : fit_kde(est0, est1, selected, cfg.kernel,
                            cfg.bandwidth_rule);

  const Eigen::MatrixXd holdout = extract_rows(data.features, clf.split.s0_3);
  Eigen::VectorXd scores = score_all(clf.model, holdout);
  std::sort(scores.data(), scores.data() + scores.size());
  clf.s03_scores = scores;
  clf.m3 = clf.split.m3;

  const ThresholdParams params{cfg.alpha, cfg.delta3, clf.m3};
  const std::int64_t km = k_min(params);
  clf.feasible = km <= clf.m3;
  clf.k_used = clf.feasible ? km : clf.m3;
  clf.c_hat = clf.s03_scores[clf.k_used - 1];
  return clf;
}

int predict(const NPClassifier& clf,
            const Eigen::Ref<const Eigen::VectorXd>& x) {
  return score(clf.model, x) >= clf.c_hat ? 1 : 0;
}

Eigen::VectorXi predict_all(const NPClassifier& clf,
                            const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::VectorXd s = score_all(clf.model, X);
  Eigen::VectorXi out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    out[i] = s[i] >= clf.c_hat ? 1 : 0;
  return out;
}

double classical_quantile_threshold(
    const Eigen::Ref<const Eigen::VectorXd>& scores, double alpha) {
  if (scores.size() == 0)
    throw std::invalid_argument("classical_quantile_threshold: empty scores");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("classical_quantile_threshold: alpha in (0,1)");
  const auto m3 = scores.size();
  std::vector<double> sorted(scores.data(), scores.data() + m3);
  std::sort(sorted.begin(), sorted.end());
  const auto rank = std::clamp<long long>(
      ceil_tol(static_cast<double>(m3) * (1.0 - alpha)), 1,
      static_cast<long long>(m3));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

NPClassifier rethreshold(const NPClassifier& clf, double alpha,
                         double delta3) {
  if (clf.s03_scores.size() != clf.m3)
    throw std::logic_error("rethreshold: left-out scores were not retained");
  NPClassifier out = clf;
  out.alpha = alpha;
  out.delta3 = delta3;
  const ThresholdParams params{alpha, delta3, clf.m3};
  const std::int64_t km = k_min(params);
  out.feasible = km <= clf.m3;
  out.k_used = out.feasible ? km : clf.m3;
  out.c_hat = out.s03_scores[out.k_used - 1];
  return out;
}

ErrorRates empirical_errors(const NPClassifier& clf,
                            const LabeledDataset& test) {
  if (test.features.rows() == 0)
    throw std::invalid_argument("empirical_errors: empty test set");
  const Eigen::VectorXi pred = predict_all(clf, test.features);
  std::int64_t n0 = 0, n1 = 0, wrong0 = 0, wrong1 = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (test.labels[i] == 0) {
      ++n0;
      if (pred[i] == 1) ++wrong0;
    } else {
      ++n1;
      if (pred[i] == 0) ++wrong1;
    }
  }
  ErrorRates rates;
  if (n0 > 0) rates.r0 = static_cast<double>(wrong0) / n0;
  if (n1 > 0) rates.r1 = static_cast<double>(wrong1) / n1;
  return rates;
}

}  // namespace np
