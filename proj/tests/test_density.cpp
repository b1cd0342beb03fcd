#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "np/density.hpp"
#include "np/errors.hpp"
#include "np/rng.hpp"
#include "oracle_utils.hpp"

using namespace np;

namespace {

Eigen::MatrixXd randn(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                      double shift = 0.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal() + shift;
  return m;
}

double gaussian_pdf(double x, double mu, double var) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / var) /
         std::sqrt(2.0 * 3.14159265358979323846 * var);
}

}  // namespace

TEST_CASE("parametric fit: identical classes score zero") {
  const Eigen::MatrixXd c = randn(20, 3, 1);
  const ScoreModel model = fit_parametric(c, c, {});
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.normal();
    CHECK(score(model, x) == 0.0);
  }
}

TEST_CASE("parametric fit: textbook discriminant score") {
  // sample moments exactly (mu0, mu1, pooled var) = (0, 1, 1)
  const double a = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd c0(2, 1), c1(2, 1);
  c0 << -a, a;
  c1 << 1.0 - a, 1.0 + a;
  const ScoreModel model = fit_parametric(c0, c1, {});
  for (double x : {0.0, 2.0, -3.0}) {
    Eigen::VectorXd v(1);
    v[0] = x;
    CHECK(score(model, v) == doctest::Approx(x - 0.5).epsilon(1e-12));
  }
}

TEST_CASE("parametric score equals the Gaussian density quotient") {
  const Eigen::MatrixXd c0 = randn(25, 3, 3);
  const Eigen::MatrixXd c1 = randn(30, 3, 4, 0.7);
  const ScoreModel model = fit_parametric(c0, c1, {});
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = 2.0 * rng.normal();
    double ratio = 1.0;
    for (int j = 0; j < 3; ++j)
      ratio *= gaussian_pdf(x[j], model.mu1[j], model.sigma2[j]) /
               gaussian_pdf(x[j], model.mu0[j], model.sigma2[j]);
    CHECK(std::exp(score(model, x)) ==
          doctest::Approx(ratio).epsilon(1e-10));
  }
}

TEST_CASE("parametric fit rejects zero-variance features") {
  Eigen::MatrixXd c0 = randn(10, 2, 6);
  Eigen::MatrixXd c1 = randn(10, 2, 7);
  c0.col(1).setConstant(3.0);
  c1.col(1).setConstant(3.0);
  try {
    fit_parametric(c0, c1, {});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("kde fit: identical classes score zero everywhere") {
  const Eigen::MatrixXd c = randn(15, 2, 8);
  const ScoreModel model = fit_kde(c, c, {});
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(2);
    x[0] = 5.0 * rng.normal();
    x[1] = 5.0 * rng.normal();
    CHECK(score(model, x) == 0.0);
  }
}

TEST_CASE("kde density matches the direct kernel sum") {
  const Eigen::MatrixXd c0 = randn(12, 1, 10);
  const Eigen::MatrixXd c1 = randn(9, 1, 11, 0.4);
  const ScoreModel model = fit_kde(c0, c1, {});
  const double x = c1(3, 0);  // evaluate at a sample point
  double by_hand = 0.0;
  for (Eigen::Index i = 0; i < c1.rows(); ++i) {
    const double u = (c1(i, 0) - x) / model.h1[0];
    by_hand += std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
  }
  by_hand /= static_cast<double>(c1.rows()) * model.h1[0];
  CHECK(kde_eval(model.samples1.col(0), model.h1[0], Kernel::gaussian, x) ==
        doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("kde density integrates to one") {
  for (Kernel kernel : {Kernel::gaussian, Kernel::epanechnikov}) {
    const Eigen::MatrixXd c = randn(40, 1, 12);
    const ScoreModel model = fit_kde(c, c, {}, kernel,
                                     BandwidthRule::rate_beta2, 0.0);
    const double lo = c.col(0).minCoeff() - 10.0 * model.h0[0];
    const double hi = c.col(0).maxCoeff() + 10.0 * model.h0[0];
    const double mass = oracle::adaptive_simpson(
        [&](double x) {
          return kde_eval(model.samples0.col(0), model.h0[0], kernel, x);
        },
        lo, hi, 1e-9, 40, 8);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("kde far-tail points score exactly zero with symmetric floors") {
  // integer columns shifted by an exactly-representable constant keep the
  // two per-class bandwidths bit-identical, so the floors cancel
  Eigen::MatrixXd c0(4, 1), c1(4, 1);
  c0 << 1.0, 2.0, 3.0, 4.0;
  c1 << 4.0, 5.0, 6.0, 7.0;
  const ScoreModel model = fit_kde(c0, c1, {});
  REQUIRE(model.h0[0] == model.h1[0]);
  Eigen::VectorXd x(1);
  x[0] = 1e6;
  CHECK(score(model, x) == 0.0);
}

TEST_CASE("scores are deterministic") {
  const Eigen::MatrixXd c0 = randn(30, 4, 13);
  const Eigen::MatrixXd c1 = randn(30, 4, 14, 0.3);
  const ScoreModel kde = fit_kde(c0, c1, {});
  const ScoreModel par = fit_parametric(c0, c1, {});
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 0.0, 2.5;
  CHECK(score(kde, x) == score(kde, x));
  CHECK(score(par, x) == score(par, x));
}

TEST_CASE("bandwidth rules") {
  CHECK(bandwidth(BandwidthRule::rate_beta2, 3, 1.0) ==
        doctest::Approx(std::pow(std::log(3.0) / 3.0, 0.2)).epsilon(1e-15));
  CHECK(bandwidth(BandwidthRule::rate_beta2, 100, 2.5) ==
        doctest::Approx(2.5 * std::pow(std::log(100.0) / 100.0, 0.2))
            .epsilon(1e-15));
  CHECK(bandwidth(BandwidthRule::silverman, 100, 2.0) ==
        doctest::Approx(0.84398720157341411).epsilon(1e-15));
  for (BandwidthRule rule :
       {BandwidthRule::rate_beta2, BandwidthRule::silverman}) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 10; n <= 1000000; n *= 10) {
      const double h = bandwidth(rule, n, 1.0);
      CHECK(h < prev);
      prev = h;
    }
  }
  CHECK_THROWS_AS(bandwidth(BandwidthRule::silverman, 1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bandwidth(BandwidthRule::silverman, 10, 0.0), DataError);
}

TEST_CASE("parametric score is affine") {
  const Eigen::MatrixXd c0 = randn(20, 5, 15);
  const Eigen::MatrixXd c1 = randn(20, 5, 16, 0.5);
  const ScoreModel model = fit_parametric(c0, c1, {});
  Rng rng(17);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < 25; ++i) {
    Eigen::VectorXd x(5), y(5);
    for (int j = 0; j < 5; ++j) {
      x[j] = rng.normal();
      y[j] = rng.normal();
    }
    const double gap = score(model, x + y) - score(model, x) -
                       score(model, y) + score(model, zero);
    CHECK(std::fabs(gap) < 1e-9);
  }
}

TEST_CASE("exp(score) equals the product of per-feature ratios") {
  const Eigen::MatrixXd c0 = randn(25, 3, 18);
  const Eigen::MatrixXd c1 = randn(20, 3, 19, 0.6);
  const ScoreModel par = fit_parametric(c0, c1, {});
  const ScoreModel kde = fit_kde(c0, c1, {});
  Rng rng(20);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.normal();

    double par_ratio = 1.0;
    for (int j = 0; j < 3; ++j)
      par_ratio *= gaussian_pdf(x[j], par.mu1[j], par.sigma2[j]) /
                   gaussian_pdf(x[j], par.mu0[j], par.sigma2[j]);
    CHECK(std::exp(score(par, x)) ==
          doctest::Approx(par_ratio).epsilon(1e-9));

    double kde_ratio = 1.0;
    for (int j = 0; j < 3; ++j) {
      const double p = std::max(
          kde_eval(kde.samples1.col(j), kde.h1[j], kde.kernel, x[j]),
          kde.density_floor_scale / kde.h1[j]);
      const double q = std::max(
          kde_eval(kde.samples0.col(j), kde.h0[j], kde.kernel, x[j]),
          kde.density_floor_scale / kde.h0[j]);
      kde_ratio *= p / q;
    }
    CHECK(std::exp(score(kde, x)) ==
          doctest::Approx(kde_ratio).epsilon(1e-9));
  }
}

TEST_CASE("common feature scaling preserves the parametric ranking") {
  const Eigen::MatrixXd c0 = randn(30, 4, 21);
  const Eigen::MatrixXd c1 = randn(30, 4, 22, 0.4);
  const Eigen::MatrixXd tests = randn(50, 4, 23, 0.2);
  const double scale = 3.7;

  const ScoreModel base = fit_parametric(c0, c1, {});
  const ScoreModel scaled =
      fit_parametric(scale * c0, scale * c1, {});
  const Eigen::VectorXd s1 = score_all(base, tests);
  const Eigen::VectorXd s2 = score_all(scaled, scale * tests);

  std::vector<int> order1(50), order2(50);
  std::iota(order1.begin(), order1.end(), 0);
  std::iota(order2.begin(), order2.end(), 0);
  std::sort(order1.begin(), order1.end(),
            [&](int a, int b) { return s1[a] < s1[b]; });
  std::sort(order2.begin(), order2.end(),
            [&](int a, int b) { return s2[a] < s2[b]; });
  CHECK(order1 == order2);
}

TEST_CASE("selected subsets restrict scoring") {
  const Eigen::MatrixXd c0 = randn(20, 6, 24);
  const Eigen::MatrixXd c1 = randn(20, 6, 25, 1.0);
  const ScoreModel model = fit_parametric(c0, c1, {1, 4});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  const double at_zero = score(model, x);
  x[0] = 100.0;  // unselected coordinates are never read
  x[5] = -50.0;
  CHECK(score(model, x) == at_zero);
  CHECK_THROWS_AS(score(model, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_parametric(c0, c1, {7}), std::invalid_argument);
}
