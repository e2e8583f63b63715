#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rumorlab/error.hpp"
#include "rumorlab/rng.hpp"
#include "rumorlab/stifling.hpp"

using namespace rumorlab;

namespace {

std::vector<StiflingLaw> all_laws() {
  return {law::Exponential{1.0}, law::Weibull{2.0, 5.0}, law::TruncatedCauchy{4.0, 1.4},
          law::Deterministic{3.5}, law::Never{},         law::Immediate{}};
}

// Kolmogorov distance between the empirical cdf of `xs` and the law.
double ks_distance(std::vector<double> xs, const StiflingLaw& law) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = law.cdf(xs[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(i / n - f)});
  }
  return d;
}

}  // namespace

TEST_SUITE("stifling") {

TEST_CASE("closed-form values") {
  CHECK(StiflingLaw(law::Exponential{1.0}).cdf(std::log(2.0)) == doctest::Approx(0.5));
  CHECK(StiflingLaw(law::Never{}).cdf(1e6) == 0.0);
  CHECK(StiflingLaw(law::TruncatedCauchy{4.0, 1.4}).cdf(1e12) == doctest::Approx(1.0));
  CHECK(StiflingLaw(law::TruncatedCauchy{4.0, 1.4}).cdf(0.0) == 0.0);
  CHECK(StiflingLaw(law::Weibull{2.0, 5.0}).survival(5.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(StiflingLaw(law::Immediate{}).survival(0.0) == 0.0);
  CHECK(StiflingLaw(law::Deterministic{3.5}).cdf(3.4999) == 0.0);
  CHECK(StiflingLaw(law::Deterministic{3.5}).cdf(3.5) == 1.0);
  // Truncated Cauchy against the renormalized standard-Cauchy formula.
  const auto C = [](double x) { return 0.5 + std::atan(x) / M_PI; };
  const double c0 = C(-4.0 / 1.4);
  CHECK(StiflingLaw(law::TruncatedCauchy{4.0, 1.4}).cdf(3.0) ==
        doctest::Approx((C(-1.0 / 1.4) - c0) / (1.0 - c0)));
}

TEST_CASE("cdf properties on a grid") {
  for (const auto& law : all_laws()) {
    CAPTURE(law.describe());
    CHECK(law.cdf(-1.0) == 0.0);
    CHECK(law.survival(-0.5) == 1.0);
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = 0.02 * i;
      const double f = law.cdf(t);
      CHECK(f >= prev);
      CHECK(f <= 1.0);
      CHECK(law.survival(t) + f == 1.0);
      prev = f;
    }
  }
}

TEST_CASE("sampling") {
  SUBCASE("deterministic and never") {
    Rng rng(1);
    CHECK(StiflingLaw(law::Deterministic{3.5}).sample(rng) == 3.5);
    CHECK(std::isinf(StiflingLaw(law::Never{}).sample(rng)));
    CHECK(StiflingLaw(law::Immediate{}).sample(rng) == 0.0);
  }
  SUBCASE("exponential mean") {
    Rng rng(2);
    const StiflingLaw law = law::Exponential{2.0};
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += law.sample(rng);
    // sd of the mean is 0.5 / sqrt(n).
    CHECK(std::abs(sum / n - 0.5) < 3.0 * 0.5 / std::sqrt(n));
  }
  SUBCASE("DKW band at 0.999") {
    const double eps = std::sqrt(std::log(2.0 / 0.001) / (2.0 * 100000));
    for (const StiflingLaw law : {StiflingLaw(law::Exponential{1.0}), StiflingLaw(law::Weibull{2.0, 5.0}),
                                  StiflingLaw(law::TruncatedCauchy{4.0, 1.4})}) {
      CAPTURE(law.describe());
      Rng rng(3);
      std::vector<double> xs(100000);
      for (auto& x : xs) x = law.sample(rng);
      CHECK(ks_distance(xs, law) < eps);
    }
  }
  SUBCASE("same stream gives same draws") {
    Rng a(9), b(9);
    const StiflingLaw law = law::Weibull{2.0, 5.0};
    for (int i = 0; i < 100; ++i) CHECK(law.sample(a) == law.sample(b));
  }
}

TEST_CASE("quantile inverts cdf") {
  for (const StiflingLaw law : {StiflingLaw(law::Exponential{1.5}), StiflingLaw(law::Weibull{0.7, 2.0}),
                                StiflingLaw(law::TruncatedCauchy{4.0, 1.4})}) {
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(law.cdf(law.quantile(u)) == doctest::Approx(u));
  }
}

TEST_CASE("time compression") {
  const double c = 2.5;
  for (const StiflingLaw law : {StiflingLaw(law::Exponential{1.5}), StiflingLaw(law::Weibull{2.0, 5.0}),
                                StiflingLaw(law::TruncatedCauchy{4.0, 1.4}), StiflingLaw(law::Deterministic{3.0})}) {
    const auto fast = law.time_compressed(c);
    CAPTURE(fast.describe());
    for (double t : {0.1, 0.7, 1.3, 2.9}) CHECK(fast.cdf(t) == doctest::Approx(law.cdf(c * t)));
  }
  CHECK(StiflingLaw(law::Never{}).time_compressed(c).is_never());
}

TEST_CASE("parsing and validation") {
  CHECK(parse_law("weibull:2:5").cdf(5.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(parse_law("never").is_never());
  CHECK(parse_law("exponential:1").is_exponential());
  CHECK(parse_law("immediate").cdf(0.0) == 1.0);
  CHECK(parse_law("cauchy:4:1.4").cdf(4.0) > 0.0);
  CHECK(parse_law("deterministic:3.5").cdf(3.5) == 1.0);
  CHECK_THROWS_AS(parse_law("gamma:2"), Error);
  CHECK_THROWS_AS(parse_law("weibull:2"), Error);
  CHECK_THROWS_AS(parse_law("exponential:abc"), Error);
  CHECK_THROWS_AS(StiflingLaw(law::Exponential{0.0}), Error);
  CHECK_THROWS_AS(StiflingLaw(law::Weibull{-1.0, 1.0}), Error);
  CHECK_THROWS_AS(StiflingLaw(law::Deterministic{-1.0}), Error);
  CHECK_THROWS_AS(StiflingLaw(law::TruncatedCauchy{0.0, 0.0}), Error);
}

}  // TEST_SUITE
