#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>

#include <ldpair/properties.hpp>

#include "oracles.hpp"

using namespace ldpair;

TEST_CASE("johansson_lhs closed form hits hand-computed values") {
  // s = 1/2: the linear term drops out and the integral is 1/4
  CHECK(johansson_lhs(1.0, 2.0) == Catch::Approx(0.25).margin(1e-12));
  // s = 1: singularity inside the support, handled by the primitive
  CHECK(johansson_lhs(1.0, 1.0) == Catch::Approx(0.5).margin(1e-12));
  // only |z| matters
  CHECK(johansson_lhs(0.3, -2.0) == johansson_lhs(0.3, 2.0));

  CHECK_THROWS_AS(johansson_lhs(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(johansson_lhs(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("johansson_lhs agrees with direct quadrature off the singularity") {
  // For s = eps/|z| < 1/2 the integrand log+(1/|1+su|) is smooth on [-2, 0]
  // and zero on [0, 2], so plain Gauss-Legendre nails it.
  for (auto [eps, z] : {std::pair{0.6, 2.0}, std::pair{0.2, -1.0},
                        std::pair{0.05, 0.5}}) {
    const double s = eps / std::abs(z);
    REQUIRE(s < 0.5);
    const double quad = oracle::gl_integrate(
        [s](double u) {
          return -std::log(1.0 + s * u) * (2.0 - std::abs(u)) / 4.0;
        },
        {-2.0, 0.0}, 48);
    CHECK(johansson_lhs(eps, z) == Catch::Approx(quad).margin(1e-10));
  }
}

TEST_CASE("johansson_bound dominates at the spot values") {
  CHECK(johansson_bound(1.0, 2.0) == Catch::Approx(1.0));
  CHECK(johansson_lhs(1.0, 2.0) <= johansson_bound(1.0, 2.0));
  CHECK(johansson_lhs(1.0, 1.0) <= johansson_bound(1.0, 1.0));
}

TEST_CASE("property suites pass at reduced trial count") {
  const auto results = run_property_suites(2024, 300);
  REQUIRE(results.size() == 7);
  std::set<std::string> names;
  for (const PropertyResult& r : results) {
    INFO(r.name << ": " << r.failures << "/" << r.trials << " " << r.detail);
    CHECK(r.pass);
    CHECK(r.failures == 0);
    CHECK(r.trials == 300);
    names.insert(r.name);
  }
  CHECK(names == std::set<std::string>{
                     "negdef_gaussian", "check_2K_gaussian", "average_rate_concavity",
                     "empirical_rank_one", "smoothing_moments", "johansson_bound",
                     "kernel_invariants"});
}
