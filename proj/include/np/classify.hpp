#ifndef NP_CLASSIFY_HPP
#define NP_CLASSIFY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "np/data.hpp"
#include "np/density.hpp"
#include "np/screen.hpp"

namespace np {

enum class Variant { NSN2, PSN2, NN2, PN2 };

Variant variant_of(const NPConfig& cfg);
const char* variant_name(Variant v);

/// A trained Neyman-Pearson plug-in classifier: a score model plus the
/// order-statistic threshold c_hat and the (alpha, delta3, k, m3) record
/// that justifies it. `feasible` is true when k_used = k_min <= m3, i.e.
/// the type I guarantee P{R0 > alpha} <= delta3 holds; otherwise the k = m3
/// fallback threshold is used and the guarantee is void.
struct NPClassifier {
  ScoreModel model;
  double c_hat = 0.0;
  std::int64_t k_used = 0;
  std::int64_t m3 = 0;
  double alpha = 0.0;
  double delta3 = 0.0;
  Variant variant = Variant::PN2;
  bool feasible = false;

  Eigen::VectorXd s03_scores;  // sorted ascending; kept for audit and
                               // re-thresholding without a refit
  std::optional<ScreeningResult> screening;
  SplitPlan split;
};

/// Runs the full plug-in procedure: split, optional screening, score-model
/// fit on the estimation subsamples, then the k_min-th order statistic of
/// the left-out class-0 scores as the threshold (k = m3 when infeasible).
NPClassifier train(const LabeledDataset& data, const NPConfig& cfg);

/// 1 iff score(x) >= c_hat; ties classify as 1.
int predict(const NPClassifier& clf, const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXi predict_all(const NPClassifier& clf,
                            const Eigen::Ref<const Eigen::MatrixXd>& X);

/// The classical empirical-quantile baseline: the ceil(m3(1-alpha))-th
/// order statistic of the scores. No high-probability type I guarantee;
/// kept for comparison reports.
double classical_quantile_threshold(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                    double alpha);

/// Re-derives the threshold from the stored left-out scores at a new
/// (alpha, delta3) without refitting the score model.
NPClassifier rethreshold(const NPClassifier& clf, double alpha, double delta3);

struct ErrorRates {
  std::optional<double> r0;  // empty when the test set lacks class 0
  std::optional<double> r1;
};

/// Empirical type I / type II error rates on a labeled test set.
ErrorRates empirical_errors(const NPClassifier& clf,
                            const LabeledDataset& test);

}  // namespace np

#endif  // NP_CLASSIFY_HPP
