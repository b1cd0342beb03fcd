#include "np/density.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "np/errors.hpp"

namespace np {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& col) {
  const double n = static_cast<double>(col.size());
  const double mean = col.mean();
  return std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
}

std::vector<Eigen::Index> all_columns(Eigen::Index d) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) idx[static_cast<std::size_t>(j)] = j;
  return idx;
}

void check_selected(const std::vector<Eigen::Index>& selected,
                    Eigen::Index d) {
  if (selected.empty())
    throw std::invalid_argument("selected feature set is empty");
  for (Eigen::Index j : selected)
    if (j < 0 || j >= d)
      throw std::invalid_argument("selected feature index out of range");
}

}  // namespace

ScoreModel fit_parametric(const Eigen::MatrixXd& class0,
                          const Eigen::MatrixXd& class1,
                          const std::vector<Eigen::Index>& selected) {
  if (class0.rows() < 2 || class1.rows() < 2)
    throw std::invalid_argument("fit_parametric: each class needs >= 2 rows");
  if (class0.cols() != class1.cols())
    throw std::invalid_argument("fit_parametric: dimension mismatch");
  const auto sel =
      selected.empty() ? all_columns(class0.cols()) : selected;
  check_selected(sel, class0.cols());

  const auto p = static_cast<Eigen::Index>(sel.size());
  const double m = static_cast<double>(class0.rows());
  const double n = static_cast<double>(class1.rows());

  ScoreModel model;
  model.kind = ModelKind::parametric_gaussian;
  model.selected = sel;
  model.dim = class0.cols();
  model.mu0.resize(p);
  model.mu1.resize(p);
  model.sigma2.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index j = sel[static_cast<std::size_t>(i)];
    const double mu0 = class0.col(j).mean();
    const double mu1 = class1.col(j).mean();
    const double ss0 = (class0.col(j).array() - mu0).square().sum();
    const double ss1 = (class1.col(j).array() - mu1).square().sum();
    const double pooled = (ss0 + ss1) / (m + n - 2.0);
    if (pooled <= 0.0)
      throw DataError("zero variance in feature " + std::to_string(j));
    model.mu0[i] = mu0;
    model.mu1[i] = mu1;
    model.sigma2[i] = pooled;
  }
  model.weights = (model.mu1 - model.mu0).cwiseQuotient(model.sigma2);
  model.intercept = 0.5 * ((model.mu0.array().square() -
                            model.mu1.array().square()) /
                           model.sigma2.array())
                              .sum();
  return model;
}

double bandwidth(BandwidthRule rule, std::int64_t n, double sample_sd) {
  if (n < 2) throw std::invalid_argument("bandwidth: n must be >= 2");
  if (!(sample_sd > 0.0))
    throw DataError("bandwidth: sample sd must be positive");
  const double nd = static_cast<double>(n);
  switch (rule) {
    case BandwidthRule::rate_beta2:
      return std::pow(std::log(nd) / nd, 0.2) * sample_sd;
    case BandwidthRule::silverman:
      return 1.06 * sample_sd * std::pow(nd, -0.2);
  }
  throw std::invalid_argument("bandwidth: unknown rule");
}

ScoreModel fit_kde(const Eigen::MatrixXd& class0,
                   const Eigen::MatrixXd& class1,
                   const std::vector<Eigen::Index>& selected, Kernel kernel,
                   BandwidthRule rule, double floor_scale) {
  if (class0.rows() < 2 || class1.rows() < 2)
    throw std::invalid_argument("fit_kde: each class needs >= 2 rows");
  if (class0.cols() != class1.cols())
    throw std::invalid_argument("fit_kde: dimension mismatch");
  const auto sel = selected.empty() ? all_columns(class0.cols()) : selected;
  check_selected(sel, class0.cols());

  const auto p = static_cast<Eigen::Index>(sel.size());
  ScoreModel model;
  model.kind = ModelKind::nonparametric_kde;
  model.selected = sel;
  model.dim = class0.cols();
  model.kernel = kernel;
  model.density_floor_scale = floor_scale;
  model.samples0.resize(class0.rows(), p);
  model.samples1.resize(class1.rows(), p);
  model.h0.resize(p);
  model.h1.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index j = sel[static_cast<std::size_t>(i)];
    model.samples0.col(i) = class0.col(j);
    model.samples1.col(i) = class1.col(j);
    const double sd0 = sample_sd(class0.col(j));
    const double sd1 = sample_sd(class1.col(j));
    if (sd0 <= 0.0 || sd1 <= 0.0)
      throw DataError("zero variance in feature " + std::to_string(j));
    model.h0[i] = bandwidth(rule, class0.rows(), sd0);
    model.h1[i] = bandwidth(rule, class1.rows(), sd1);
  }
  return model;
}

double kde_eval(const Eigen::Ref<const Eigen::VectorXd>& sample, double h,
                Kernel kernel, double x) {
  if (h <= 0.0) throw std::invalid_argument("kde_eval: bandwidth must be > 0");
  const double n = static_cast<double>(sample.size());
  const auto u = (sample.array() - x) / h;
  double mass;
  if (kernel == Kernel::gaussian) {
    mass = (u.square() * -0.5).exp().sum() * kInvSqrt2Pi;
  } else {  // epanechnikov, support [-1, 1]
    mass = (0.75 * (1.0 - u.square()).max(0.0)).sum();
  }
  return mass / (n * h);
}

namespace {

double kde_log_ratio(const ScoreModel& m, Eigen::Index feat, double x) {
  double p = kde_eval(m.samples1.col(feat), m.h1[feat], m.kernel, x);
  double q = kde_eval(m.samples0.col(feat), m.h0[feat], m.kernel, x);
  if (m.density_floor_scale > 0.0) {
    p = std::max(p, m.density_floor_scale / m.h1[feat]);
    q = std::max(q, m.density_floor_scale / m.h0[feat]);
  }
  return std::log(p) - std::log(q);
}

}  // namespace

double score(const ScoreModel& model,
             const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dim)
    throw std::invalid_argument("score: point has dimension " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(model.dim));
  const auto p = static_cast<Eigen::Index>(model.selected.size());
  if (model.kind == ModelKind::parametric_gaussian) {
    double s = model.intercept;
    for (Eigen::Index i = 0; i < p; ++i)
      s += model.weights[i] * x[model.selected[static_cast<std::size_t>(i)]];
    return s;
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    s += kde_log_ratio(model, i,
                       x[model.selected[static_cast<std::size_t>(i)]]);
  return s;
}

Eigen::VectorXd score_all(const ScoreModel& model,
                          const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != model.dim)
    throw std::invalid_argument("score_all: dimension mismatch");
  const auto p = static_cast<Eigen::Index>(model.selected.size());
  Eigen::VectorXd s = Eigen::VectorXd::Zero(X.rows());
  if (model.kind == ModelKind::parametric_gaussian) {
    s.array() += model.intercept;
    for (Eigen::Index i = 0; i < p; ++i)
      s += model.weights[i] *
           X.col(model.selected[static_cast<std::size_t>(i)]);
    return s;
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto col = X.col(model.selected[static_cast<std::size_t>(i)]);
    for (Eigen::Index r = 0; r < X.rows(); ++r)
      s[r] += kde_log_ratio(model, i, col[r]);
  }
  return s;
}

}  // namespace np
