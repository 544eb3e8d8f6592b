#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ldpair/energy.hpp"
#include "ldpair/rng.hpp"

using namespace ldpair;

namespace {

AtomicMeasure random_measure(Engine& eng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), wt(0.05, 1.0);
  const int m = count(eng);
  std::vector<double> a(m), w(m);
  for (int i = 0; i < m; ++i) { a[i] = pos(eng); w[i] = wt(eng); }
  return atomic(a, w);
}

}  // namespace

TEST_CASE("energy_K matches the gaussian bilinear closed form") {
  Engine eng = make_engine(7, streams::properties, 42);
  for (double th : {0.0, 0.25, 0.5, 0.75}) {
    const InteractionKernel k = gaussian_kernel(th);
    for (int t = 0; t < 25; ++t) {
      const AtomicMeasure nu1 = random_measure(eng);
      const AtomicMeasure nu2 = random_measure(eng);
      const double closed =
          moment(nu1, 2) + moment(nu2, 2) - 2.0 * th * moment(nu1, 1) * moment(nu2, 1);
      CHECK(energy_K(k, {nu1, nu2}) == Catch::Approx(closed).margin(1e-12));
    }
  }
}

TEST_CASE("energy_K propagates +inf and skips zero weights") {
  const InteractionKernel lg = loggas_kernel(1.0);
  // shared atom with positive weight on both sides: the diagonal term is hit
  const AtomicMeasure nu1 = atomic({0.5, 1.0}, {0.5, 0.5});
  const AtomicMeasure nu2 = atomic({0.5, -1.0}, {0.5, 0.5});
  CHECK(std::isinf(energy_K(lg, {nu1, nu2})));
  // but a zero-weight collision does not poison the sum
  const AtomicMeasure nu3 = atomic({0.5, -1.0}, {0.0, 1.0});
  CHECK(std::isfinite(energy_K(lg, {nu1, nu3})));
}

TEST_CASE("rate subtracts I0") {
  const RateContext ctx = make_context(loggas_kernel(1.0));
  CHECK(ctx.I0 == Catch::Approx(0.5).margin(1e-6));
  const AtomicMeasure left = atomic({0.5}, {1.0});
  const AtomicMeasure right = atomic({-0.5}, {1.0});
  // K(delta_{1/2} x delta_{-1/2}) = 1/2 - log 1 = 1/2 = I0: the minimizing pair
  CHECK(rate(ctx, {left, right}) == Catch::Approx(0.0).margin(1e-6));
  CHECK(std::isinf(rate(ctx, {left, left})));
}

TEST_CASE("bivariate merges duplicate coordinates") {
  Eigen::MatrixXd W(3, 2);
  W << 1.0, 1.0, 2.0, 0.0, 1.0, 1.0;
  const BivariateAtomic b = bivariate({1.0, -1.0, 1.0}, {0.0, 2.0}, W);
  REQUIRE(b.xs.size() == 2);  // 1.0 appears twice
  CHECK(b.xs[0] == -1.0);
  CHECK(b.weights.sum() == Catch::Approx(1.0));
  // merged row: rows for x=1 added entrywise then normalized by total 6
  CHECK(b.weights(1, 0) == Catch::Approx(2.0 / 6.0));
  CHECK_THROWS_AS(bivariate({1.0}, {1.0}, Eigen::MatrixXd::Zero(1, 1)),
                  std::invalid_argument);
  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  CHECK_THROWS_AS(bivariate({1.0}, {1.0}, neg), std::invalid_argument);
}

TEST_CASE("rate_joint accepts products and rejects the rest") {
  const RateContext ctx = make_context(gaussian_kernel(0.5));

  const AtomicMeasure nu1 = atomic({-1.0, 0.5}, {0.3, 0.7});
  const AtomicMeasure nu2 = atomic({0.0, 2.0}, {0.6, 0.4});
  const RateJointResult good = rate_joint(ctx, bivariate_product({nu1, nu2}));
  CHECK(good.second_singular <= 1e-12);
  REQUIRE(good.factors.has_value());
  CHECK(std::isfinite(good.value));
  CHECK(good.value == Catch::Approx(rate(ctx, {nu1, nu2})).margin(1e-10));
  CHECK(good.factors->left.weights[0] == Catch::Approx(0.3).margin(1e-10));

  // mu0 = (delta_(0,0) + delta_(1,1)) / 2 is as non-product as it gets
  const BivariateAtomic mu0 =
      bivariate_from_points({{0.0, 0.0, 0.5}, {1.0, 1.0, 0.5}});
  const RateJointResult bad = rate_joint(ctx, mu0);
  CHECK(std::isinf(bad.value));
  CHECK(bad.second_singular == Catch::Approx(0.5).margin(1e-12));
  CHECK_FALSE(bad.factors.has_value());

  // rank_tol is honored: an absurdly loose tolerance accepts mu0
  CHECK(std::isfinite(rate_joint(ctx, mu0, 0.6).value));
}

TEST_CASE("marginal_rate matches m2 - theta^2 m1^2 for gaussian") {
  Engine eng = make_engine(11, streams::properties, 43);
  for (double th : {0.0, 0.25, 0.5, 0.75}) {
    const RateContext ctx = make_context(gaussian_kernel(th));
    for (int t = 0; t < 10; ++t) {
      const AtomicMeasure nu = random_measure(eng);
      const double closed =
          moment(nu, 2) - th * th * moment(nu, 1) * moment(nu, 1);
      CHECK(marginal_rate(ctx, nu) == Catch::Approx(closed).margin(1e-6));
    }
  }
}

TEST_CASE("marginal_rate handles the log-gas") {
  const RateContext ctx = make_context(loggas_kernel(1.0));
  // inf_y k(1/2, y) is attained at y = -1/2 with value 1/2 = I0, by calculus:
  // the stationarity condition 2y(1/2 - y) + 1 = 0 has its valid root there.
  const double r = marginal_rate(ctx, atomic({0.5}, {1.0}));
  CHECK(r == Catch::Approx(0.0).margin(1e-5));
  CHECK(r >= -1e-6);
}

TEST_CASE("negdef_form reproduces the closed-form examples") {
  const std::vector<double> pts = {0.0, 1.0};
  const std::vector<double> c = {1.0, -1.0};
  // -2 theta (sum c_i x_i)^2 with sum c_i x_i = -1
  CHECK(negdef_form(gaussian_kernel(0.25), pts, c) == Catch::Approx(-0.5).margin(1e-14));
  CHECK(negdef_form(gaussian_kernel(-0.5), pts, c) == Catch::Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(negdef_form(gaussian_kernel(0.25), {1.0}, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("negdef_check passes for theta >= 0 and witnesses theta = -0.5") {
  CHECK(negdef_check(gaussian_kernel(0.25), 500, 4, 123).pass);
  CHECK(negdef_check(gaussian_kernel(0.0), 500, 3, 123).pass);

  const NegdefResult res = negdef_check(gaussian_kernel(-0.5), 200, 3, 123);
  CHECK_FALSE(res.pass);
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->value > 1e-9);
  double csum = 0.0;
  for (double v : res.witness->coeffs) csum += v;
  CHECK(csum == Catch::Approx(0.0).margin(1e-12));
  // the witness really evaluates to the reported form value
  CHECK(negdef_form(gaussian_kernel(-0.5), res.witness->points, res.witness->coeffs) ==
        Catch::Approx(res.witness->value));

  CHECK_THROWS_AS(negdef_check(gaussian_kernel(0.5), 0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(negdef_check(gaussian_kernel(0.5), 10, 1, 1), std::invalid_argument);
}

TEST_CASE("negdef_check is self-consistent on the log-gas") {
  // The log kernel is only conditionally negative definite at small
  // separations, so over the search box the probe may or may not find a
  // violation; either way the reported witness must reproduce its value.
  for (double beta : {1.0, 4.0}) {
    const InteractionKernel lg = loggas_kernel(beta);
    const NegdefResult r = negdef_check(lg, 200, 4, 7);
    if (!r.pass) {
      REQUIRE(r.witness.has_value());
      const auto& w = *r.witness;
      double csum = 0.0;
      for (double c : w.coeffs) csum += c;
      CHECK(std::abs(csum) <= 1e-12);
      CHECK(w.value > 1e-9);
      CHECK(negdef_form(lg, w.points, w.coeffs) ==
            Catch::Approx(w.value).margin(1e-12));
    }
  }
}

TEST_CASE("average_rate matches 2(m2 - theta m1^2) and flags bad kernels") {
  Engine eng = make_engine(13, streams::properties, 44);
  for (double th : {0.0, 0.25, 0.5, 0.75}) {
    const RateContext ctx = make_context(gaussian_kernel(th));
    for (int t = 0; t < 10; ++t) {
      const AtomicMeasure nu = random_measure(eng);
      const double closed = 2.0 * (moment(nu, 2) - th * moment(nu, 1) * moment(nu, 1));
      const AverageRateResult r = average_rate(ctx, nu);
      CHECK(r.value == Catch::Approx(closed).margin(1e-12));
      CHECK_FALSE(r.negdef_warning);
    }
  }
  // theta < 0 is not negative definite: the warning must fire
  const RateContext bad = make_context(gaussian_kernel(-0.5));
  CHECK(average_rate(bad, atomic({0.0, 1.0}, {0.5, 0.5})).negdef_warning);
}

TEST_CASE("check_2K inequality for negative-definite kernels") {
  Engine eng = make_engine(17, streams::properties, 45);
  const InteractionKernel k = gaussian_kernel(0.6);
  for (int t = 0; t < 50; ++t) {
    const TwoKResult r = check_2K(k, random_measure(eng), random_measure(eng));
    CHECK(r.holds);
    CHECK(r.lhs + 1e-9 >= r.rhs);
  }
  // and a hand-sized counterexample at theta = -0.5
  const AtomicMeasure d0 = atomic({0.0}, {1.0});
  const AtomicMeasure d1 = atomic({1.0}, {1.0});
  const TwoKResult r = check_2K(gaussian_kernel(-0.5), d0, d1);
  // 2K(d0 x d1) = 2, K(d0 x d0) + K(d1 x d1) = 0 + 3
  CHECK(r.lhs == Catch::Approx(2.0));
  CHECK(r.rhs == Catch::Approx(3.0));
  CHECK_FALSE(r.holds);
}

TEST_CASE("tightness functional q = K + C is nonnegative") {
  const InteractionKernel lg = loggas_kernel(1.0);
  CHECK(lg.lower_bound_C == 0.0);  // I0 = 1/2 > 0, so no constant is needed
  Engine eng = make_engine(19, streams::properties, 46);
  for (int t = 0; t < 50; ++t) {
    const AtomicMeasure nu1 = random_measure(eng);
    const AtomicMeasure nu2 = random_measure(eng);
    CHECK(tightness_q(lg, {nu1, nu2}) >= -1e-9);
  }
  CHECK(tightness_q(gaussian_kernel(0.5), {atomic({0.0}, {1.0}), atomic({0.0}, {1.0})}) ==
        Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("KahanSum survives cancellation-heavy input") {
  KahanSum acc;
  for (int i = 0; i < 100000; ++i) {
    acc.add(1e-16);
    acc.add(1.0);
    acc.add(-1.0);
  }
  CHECK(acc.value() == Catch::Approx(1e-11).epsilon(1e-9));
}
