#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ebnp/divergence.hpp"
#include "ebnp/model.hpp"
#include "ebnp/random.hpp"
#include "oracles.hpp"

using namespace ebnp;

TEST_CASE("mixing measure validation") {
  CHECK_NOTHROW(DiscreteMixingMeasure({0.0, 1.0}, {0.25, 0.75}));
  CHECK_THROWS_AS(DiscreteMixingMeasure({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMixingMeasure({0.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMixingMeasure({0.0, 1.0}, {1.1, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMixingMeasure({0.0, 1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMixingMeasure({NAN}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMixingMeasure({4.0}, {1.0}, 3.0), std::invalid_argument);
  CHECK_NOTHROW(DiscreteMixingMeasure({-3.0, 3.0}, {0.5, 0.5}, 3.0));
  CHECK_THROWS(DiscreteMixingMeasure::pruned({0.0, 1.0}, {1e-20, 1e-20}, 1e-12));

  const auto g = DiscreteMixingMeasure::pruned({0.0, 1.0, 2.0}, {0.5, 1e-14, 0.5}, 1e-12);
  CHECK(g.size() == 2);
  CHECK(g.weights()[0] == doctest::Approx(0.5));
  CHECK(g.mass_near(0.0, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("dataset rejects empty and non-finite input") {
  CHECK_THROWS_AS(Dataset({}), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({1.0, INFINITY}), std::invalid_argument);
  CHECK(Dataset({1.0, 2.0}).size() == 2);
}

TEST_CASE("uniform base marginal") {
  const UniformBase unit{-1.0, 1.0};
  const double ref = oracle::block_marginal({0.0}, -1.0, 1.0);
  CHECK(uniform_base_marginal(0.0, unit) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(uniform_base_marginal(0.0, unit) == doctest::Approx(0.3413447460685429).epsilon(1e-12));

  const UniformBase wide{};
  CHECK(uniform_base_marginal(0.0, wide) ==
        doctest::Approx(oracle::block_marginal({0.0}, -10.0, 10.0)).epsilon(1e-12));
  CHECK(uniform_base_marginal(0.0, wide) == doctest::Approx(0.05).epsilon(1e-12));

  for (double z : {0.3, 2.0, 9.5, 14.0}) {
    CHECK(uniform_base_marginal(z, wide) == uniform_base_marginal(-z, wide));
  }
  CHECK_THROWS_AS(uniform_base_marginal(NAN, wide), std::invalid_argument);
  CHECK_THROWS_AS(uniform_base_marginal(0.0, wide, 0.0), std::invalid_argument);
  CHECK(uniform_base_marginal(60.0, wide) >= 0.0);
  CHECK(std::isfinite(log_uniform_base_marginal(60.0, wide)));
}

TEST_CASE("uniform base marginal integrates to one") {
  for (const UniformBase b : {UniformBase{-1.0, 1.0}, UniformBase{-10.0, 10.0}, UniformBase{2.0, 2.5}}) {
    const SimpsonGrid grid(b.lower - 12.0, b.upper + 12.0, 0.005);
    const double total = grid.integrate([&](double z) { return uniform_base_marginal(z, b); });
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("block marginal likelihood") {
  const UniformBase unit{-1.0, 1.0};
  const std::vector<double> one{0.0};
  CHECK(block_marginal_likelihood(one, unit) ==
        doctest::Approx(uniform_base_marginal(0.0, unit)).epsilon(1e-14));

  const UniformBase wide{};
  const std::vector<double> two{0.3, -0.3};
  CHECK(block_marginal_likelihood(two, wide) ==
        doctest::Approx(oracle::block_marginal(two, -10.0, 10.0)).epsilon(1e-10));
  const std::vector<double> three{1.0, 1.0, 1.0};
  CHECK(std::abs(block_marginal_likelihood(three, wide) -
                 oracle::block_marginal(three, -10.0, 10.0)) < 1e-10);

  CHECK_THROWS_AS(block_marginal_likelihood(std::vector<double>{}, wide), std::invalid_argument);
}

TEST_CASE("block marginal likelihood agrees with quadrature for k <= 6") {
  Rng rng(11);
  std::uniform_real_distribution<double> loc(-12.0, 12.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 6);
    const double a = loc(rng) * 0.5 - 4.0;
    const double b = a + 0.5 + std::abs(loc(rng));
    const double centre = loc(rng);
    std::vector<double> zs(k);
    for (double& z : zs) z = centre + noise(rng);
    const double ref = oracle::block_marginal(zs, a, b);
    const double got = block_marginal_likelihood(zs, UniformBase{a, b});
    if (ref < 1e-250) continue;
    CHECK(std::abs(got - ref) <= 1e-8 * ref);
    double sum = 0.0, sum_sq = 0.0;
    for (double z : zs) {
      sum += z;
      sum_sq += z * z;
    }
    CHECK(log_block_marginal_likelihood(k, sum, sum_sq, UniformBase{a, b}) ==
          doctest::Approx(std::log(got)).epsilon(1e-9));
  }
}

TEST_CASE("truncated normal mean") {
  CHECK(truncated_normal_mean({0.0, 1.0, -1.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
  // The upper truncation still pulls the mean down by phi(5) / Phi(5) = 1.49e-6.
  CHECK(std::abs(truncated_normal_mean({5.0, 1.0, -10.0, 10.0}) - 5.0) < 2e-6);
  CHECK(std::abs(truncated_normal_mean({5.0, 1.0, -10.0, 10.0}) -
                 oracle::tn_mean(5.0, 1.0, -10.0, 10.0)) < 1e-10);
  const double m = truncated_normal_mean({0.0, 1.0, 2.0, 3.0});
  CHECK(m > 2.0);
  CHECK(m < 3.0);
  CHECK(std::abs(m - oracle::tn_mean(0.0, 1.0, 2.0, 3.0)) < 1e-8);

  // Far tails: Phi differences underflow, the mean must still be interior.
  for (double u : {-200.0, -45.0, 45.0, 200.0}) {
    const double t = truncated_normal_mean({u, 1.0, -10.0, 10.0});
    CHECK(std::isfinite(t));
    CHECK(t > -10.0);
    CHECK(t < 10.0);
  }
  CHECK(std::abs(truncated_normal_mean({-45.0, 1.0, -10.0, 10.0}) - (-10.0 + 1.0 / 35.0)) < 1e-3);
}

TEST_CASE("truncated normal pdf integrates to one") {
  for (const TruncatedNormalParams p :
       {TruncatedNormalParams{0.0, 1.0, -1.0, 1.0}, TruncatedNormalParams{0.0, 0.25, 2.0, 3.0},
        TruncatedNormalParams{30.0, 1.0, -10.0, 10.0}}) {
    const SimpsonGrid grid(p.lower, p.upper, 1e-4);
    const double total = grid.integrate([&](double x) { return truncated_normal_pdf(p, x); });
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(truncated_normal_cdf(p, p.upper) == doctest::Approx(1.0));
    CHECK(truncated_normal_cdf(p, p.lower) == doctest::Approx(0.0));
  }
}

TEST_CASE("truncated normal sampling") {
  SUBCASE("reproducible streams") {
    Rng a(42), b(42);
    const TruncatedNormalParams p{0.0, 1.0, -10.0, 10.0};
    for (int i = 0; i < 100; ++i) CHECK(truncated_normal_sample(p, a) == truncated_normal_sample(p, b));
  }
  SUBCASE("law of large numbers") {
    Rng rng(7);
    const TruncatedNormalParams p{0.0, 1.0, -10.0, 10.0};
    double s = 0.0;
    for (int i = 0; i < 100000; ++i) s += truncated_normal_sample(p, rng);
    CHECK(std::abs(s / 1e5) < 0.02);

    const TruncatedNormalParams q{0.0, 1.0, 2.0, 3.0};
    double t = 0.0;
    for (int i = 0; i < 100000; ++i) t += truncated_normal_sample(q, rng);
    CHECK(std::abs(t / 1e5 - truncated_normal_mean(q)) < 0.01);
  }
  SUBCASE("narrow interval") {
    Rng rng(3);
    const TruncatedNormalParams p{0.0, 1.0, 0.999, 1.001};
    for (int i = 0; i < 1000; ++i) {
      const double x = truncated_normal_sample(p, rng);
      CHECK(x >= 0.999);
      CHECK(x <= 1.001);
    }
  }
  SUBCASE("Kolmogorov-Smirnov against the analytic cdf") {
    for (const TruncatedNormalParams p :
         {TruncatedNormalParams{0.0, 1.0, -10.0, 10.0}, TruncatedNormalParams{0.0, 1.0, 2.0, 3.0},
          TruncatedNormalParams{-30.0, 0.5, -10.0, 10.0}, TruncatedNormalParams{1.0, 4.0, 0.0, 1.5}}) {
      Rng rng(99);
      std::vector<double> xs(100000);
      for (double& x : xs) x = truncated_normal_sample(p, rng);
      std::sort(xs.begin(), xs.end());
      double d = 0.0;
      const double n = static_cast<double>(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK_FALSE(xs[i] < p.lower);
        CHECK_FALSE(xs[i] > p.upper);
        const double c = truncated_normal_cdf(p, xs[i]);
        d = std::max({d, std::abs(c - static_cast<double>(i) / n),
                      std::abs(c - static_cast<double>(i + 1) / n)});
      }
      CHECK(d < 0.01);
    }
  }
}

TEST_CASE("gaussian mixture density and score") {
  const GaussianMixtureDensity f(DiscreteMixingMeasure({-1.0, 2.0}, {0.3, 0.7}));
  for (double z : {-3.0, 0.0, 0.5, 4.0}) {
    const double ref = 0.3 * oracle::phi(z + 1.0) + 0.7 * oracle::phi(z - 2.0);
    const double dref = -0.3 * (z + 1.0) * oracle::phi(z + 1.0) - 0.7 * (z - 2.0) * oracle::phi(z - 2.0);
    CHECK(f.density(z) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(f.derivative(z) == doctest::Approx(dref).epsilon(1e-13));
    CHECK(f.score(z) == doctest::Approx(dref / ref).epsilon(1e-12));
    CHECK(f.log_density(z) == doctest::Approx(std::log(ref)).epsilon(1e-14));
  }
  // Density underflows at z = 60 but the score does not.
  CHECK(f.density(60.0) == 0.0);
  CHECK(f.score(60.0) == doctest::Approx(-(60.0 - 2.0)).epsilon(1e-10));
}

TEST_CASE("csv round trips") {
  const DiscreteMixingMeasure g({-0.1, 1.0 / 3.0, 7.0}, {0.2, 0.3, 0.5});
  std::stringstream ss;
  write_measure_csv(ss, g);
  const auto back = read_measure_csv(ss);
  REQUIRE(back.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(back.atoms()[j] == g.atoms()[j]);
    CHECK(back.weights()[j] == g.weights()[j]);
  }

  const Dataset d({0.1, -2.5e-7, 1e300});
  std::stringstream ds;
  write_dataset_csv(ds, d);
  const auto dback = read_dataset_csv(ds);
  REQUIRE(dback.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(dback[i] == d[i]);
}

TEST_CASE("csv errors are specific") {
  std::stringstream wrong_header("mu\n1\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(wrong_header), doctest::Contains("header"),
                       std::invalid_argument);
  std::stringstream bad_cell("z\n1\nabc\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(bad_cell), doctest::Contains("line 3"),
                       std::invalid_argument);
  std::stringstream bad_measure("atom,weight\n0,0.5\n");
  CHECK_THROWS_AS(read_measure_csv(bad_measure), std::invalid_argument);
  CHECK(format_double(0.1) == "0.10000000000000001");
}
