#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "ebnp/special.hpp"

using namespace ebnp::special;

TEST_CASE("normal cdf matches boost in the body and both tails") {
  const boost::math::normal_distribution<double> nd;
  for (double x = -37.0; x <= 8.0; x += 0.25) {
    const double ref = boost::math::cdf(nd, x);
    CHECK(normal_cdf(x) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("log cdf stays finite far in the lower tail") {
  for (double x : {-30.0, -100.0, -1e3, -1e5}) {
    const double v = normal_log_cdf(x);
    CHECK(std::isfinite(v));
    // Leading term -x^2/2 - log(-x) - log sqrt(2 pi).
    const double lead = -0.5 * x * x - std::log(-x) - kLogSqrt2Pi;
    CHECK(std::abs(v - lead) < 1.0 / (x * x) + 1e-12 * std::abs(lead));
  }
  CHECK(normal_log_cdf(-20.0) == doctest::Approx(std::log(normal_cdf(-20.0))).epsilon(1e-12));
}

TEST_CASE("interval probabilities") {
  CHECK(normal_interval(-1.0, 1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-14));
  CHECK(normal_interval(2.0, 3.0) == doctest::Approx(normal_cdf(3.0) - normal_cdf(2.0)));
  CHECK(normal_interval(40.0, 41.0) == 0.0);
  CHECK(std::isfinite(normal_log_interval(40.0, 41.0)));
  CHECK(normal_log_interval(40.0, 41.0) ==
        doctest::Approx(normal_log_cdf(-40.0)).epsilon(1e-10));
  CHECK(normal_log_interval(-41.0, -40.0) == normal_log_interval(40.0, 41.0));
}

TEST_CASE("quantile inverts the cdf") {
  for (double p : {1e-300, 1e-20, 1e-5, 0.1, 0.5, 0.9, 1.0 - 1e-10}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  for (double lp : {-800.0, -5000.0, -1e5}) {
    const double x = normal_quantile_log(lp);
    CHECK(normal_log_cdf(x) == doctest::Approx(lp).epsilon(1e-12));
  }
}

TEST_CASE("log_add") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  CHECK(log_add(-INFINITY, 1.5) == 1.5);
  CHECK(log_add(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)));
}
