#ifndef NP_DENSITY_HPP
#define NP_DENSITY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "np/data.hpp"

namespace np {

enum class ModelKind { parametric_gaussian, nonparametric_kde };

/// A fitted density-ratio scorer over a selected feature set. Scores are
/// log-ratios log p-hat(x)/q-hat(x): the raw per-feature ratio product
/// under/overflows for large selected sets, and all downstream thresholding
/// is rank-based so the monotone log is harmless.
struct ScoreModel {
  ModelKind kind = ModelKind::parametric_gaussian;
  std::vector<Eigen::Index> selected;  // column indices into the full d
  Eigen::Index dim = 0;                // full input dimension d

  // parametric: per selected feature
  Eigen::VectorXd mu0, mu1, sigma2;
  Eigen::VectorXd weights;  // (mu1 - mu0) / sigma2, cached at fit
  double intercept = 0.0;   // 0.5 * sum (mu0^2 - mu1^2) / sigma2

  // nonparametric: per selected feature
  Eigen::MatrixXd samples0, samples1;  // estimation rows x |selected|
  Eigen::VectorXd h0, h1;              // per-feature bandwidths
  Kernel kernel = Kernel::gaussian;
  double density_floor_scale = 1e-12;  // per-feature floor = scale / h
};

/// Gaussian naive Bayes fit: per-feature class means with a pooled
/// per-feature variance (common diagonal covariance). The score is affine:
///   score(x) = sum_j w_j x_j + b over the selected features.
ScoreModel fit_parametric(const Eigen::MatrixXd& class0,
                          const Eigen::MatrixXd& class1,
                          const std::vector<Eigen::Index>& selected);

/// Product-form kernel naive Bayes fit. Per-feature bandwidths follow the
/// chosen rule applied to each class's sample sd; densities are floored at
/// density_floor_scale/h before taking logs (the same floor on both sides,
/// so identical classes still score exactly 0). Pass floor_scale = 0 to
/// disable flooring.
ScoreModel fit_kde(const Eigen::MatrixXd& class0,
                   const Eigen::MatrixXd& class1,
                   const std::vector<Eigen::Index>& selected,
                   Kernel kernel = Kernel::gaussian,
                   BandwidthRule rule = BandwidthRule::rate_beta2,
                   double floor_scale = 1e-12);

/// Log density-ratio score of a single full-dimension point; only the
/// selected coordinates are read.
double score(const ScoreModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Scores for every row of X.
Eigen::VectorXd score_all(const ScoreModel& model,
                          const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Kernel bandwidth for a sample of size n with spread sample_sd:
///   rate_beta2: (log n / n)^(1/5) * sample_sd
///   silverman:   1.06 * sample_sd * n^(-1/5)
double bandwidth(BandwidthRule rule, std::int64_t n, double sample_sd);

/// One-dimensional kernel density estimate at x from a sample column.
double kde_eval(const Eigen::Ref<const Eigen::VectorXd>& sample, double h,
                Kernel kernel, double x);

}  // namespace np

#endif  // NP_DENSITY_HPP
