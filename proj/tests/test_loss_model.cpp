#include <doctest.h>

#include <cmath>
#include <vector>

#include "clauselens/loss_model.hpp"

using namespace clauselens;

namespace {
RegionLossParams pure_lognormal(double rate, double mu, double sigma) {
  RegionLossParams p;
  p.event_rate = rate;
  p.lognormal_mu = mu;
  p.lognormal_sigma = sigma;
  p.tail_probability = 0.0;
  return p;
}
}  // namespace

TEST_CASE("poisson degenerate and determinism") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(sample_event_count(0.0, rng) == 0);

  Rng a(7), b(7);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_event_count(2.0, a) == sample_event_count(2.0, b));

  Rng c(3);
  CHECK_THROWS_AS(sample_event_count(-1.0, c), DomainError);
}

TEST_CASE("poisson moments at rate 3, 1e5 draws") {
  Rng rng(42);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double k = double(sample_event_count(3.0, rng));
    sum += k;
    sum_sq += k * k;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.1 / 3.0));
  CHECK(std::fabs(var - 3.0) < 0.2);
}

TEST_CASE("severity degenerate lognormal body") {
  RegionLossParams p = pure_lognormal(1.0, 0.7, 1e-9);
  Rng rng(5);
  for (int i = 0; i < 20; ++i)
    CHECK(sample_severity(p, 0.0, rng) == doctest::Approx(std::exp(0.7)).epsilon(1e-6));
}

TEST_CASE("severity pareto tail mean, 1e5 draws") {
  RegionLossParams p;
  p.event_rate = 1.0;
  p.tail_probability = 1.0;
  p.pareto_alpha = 3.0;
  p.pareto_xm = 1.0;
  Rng rng(9);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_severity(p, 0.0, rng);
  CHECK(sum / n == doctest::Approx(1.5).epsilon(0.05 / 1.5));
}

TEST_CASE("severity scales linearly in exposure") {
  RegionLossParams p;
  Rng a(33), b(33);
  for (int i = 0; i < 50; ++i) {
    const double base = sample_severity(p, 0.0, a);
    const double scaled = sample_severity(p, 1.0, b);
    CHECK(scaled == doctest::Approx(2.0 * base).epsilon(1e-12));
  }
}

TEST_CASE("annual loss bookkeeping and degenerate rate") {
  RegionLossParams p;
  p.event_rate = 0.0;
  Rng rng(2);
  const auto zero = simulate_annual_loss(p, 0.3, rng);
  CHECK(zero.event_count == 0);
  CHECK(zero.severities.empty());
  CHECK(zero.total == 0.0);

  p.event_rate = 3.0;
  for (int i = 0; i < 200; ++i) {
    const auto s = simulate_annual_loss(p, 0.5, rng);
    CHECK(s.severities.size() == s.event_count);
    double total = 0.0;
    for (double v : s.severities) {
      CHECK(v > 0.0);
      total += v;
    }
    CHECK(s.total == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("compound mean identity, pure lognormal, 1e5 years") {
  RegionLossParams p = pure_lognormal(2.0, 0.0, 0.5);
  Rng rng(77);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += simulate_annual_loss(p, 0.0, rng).total;
  const double expected = 2.0 * std::exp(0.125);  // lambda * E[X] = 2.2663
  CHECK(expected == doctest::Approx(2.2663).epsilon(1e-4));
  CHECK(sum / n == doctest::Approx(expected).epsilon(0.05 / expected));
}

TEST_CASE("compound mean identity for the mixture at 3 sigma") {
  RegionLossParams p;
  p.event_rate = 1.4;
  p.lognormal_mu = 0.4;
  p.lognormal_sigma = 0.9;
  p.pareto_alpha = 2.0;
  p.pareto_xm = 4.0;
  p.tail_probability = 0.10;
  const double exposure = 0.5;
  const double expected = compound_annual_mean(p, exposure);

  Rng rng(123);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = simulate_annual_loss(p, exposure, rng).total;
    sum += t;
    sum_sq += t * t;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - expected) < 3.0 * sd);
}

TEST_CASE("pareto tail fattens the total distribution") {
  RegionLossParams heavy;
  heavy.event_rate = 1.0;
  heavy.lognormal_mu = 0.0;
  heavy.lognormal_sigma = 0.5;
  heavy.pareto_alpha = 2.2;
  heavy.pareto_xm = 2.0;
  heavy.tail_probability = 0.15;
  RegionLossParams light = heavy;
  light.tail_probability = 0.0;

  auto excess_kurtosis = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
      const double d = x - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= double(xs.size());
    m4 /= double(xs.size());
    return m4 / (m2 * m2) - 3.0;
  };

  Rng ra(55), rb(55);
  std::vector<double> heavy_totals, light_totals;
  for (int i = 0; i < 50000; ++i) {
    heavy_totals.push_back(simulate_annual_loss(heavy, 0.0, ra).total);
    light_totals.push_back(simulate_annual_loss(light, 0.0, rb).total);
  }
  CHECK(excess_kurtosis(heavy_totals) > excess_kurtosis(light_totals));
}

TEST_CASE("per-episode seeding makes episode order irrelevant") {
  RegionLossParams p;
  std::vector<double> forward, backward(100);
  for (int i = 0; i < 100; ++i) {
    Rng rng = Rng::stream(99, 1, std::uint64_t(i));
    forward.push_back(simulate_annual_loss(p, 0.2, rng).total);
  }
  for (int i = 99; i >= 0; --i) {
    Rng rng = Rng::stream(99, 1, std::uint64_t(i));
    backward[std::size_t(i)] = simulate_annual_loss(p, 0.2, rng).total;
  }
  CHECK(forward == backward);
}

TEST_CASE("identical seed and params give identical samples") {
  RegionLossParams p;
  Rng a(1234), b(1234);
  for (int i = 0; i < 50; ++i) {
    const auto sa = simulate_annual_loss(p, 0.7, a);
    const auto sb = simulate_annual_loss(p, 0.7, b);
    CHECK(sa.total == sb.total);
    CHECK(sa.severities == sb.severities);
  }
}

TEST_CASE("closed-form severity helpers are self-consistent") {
  RegionLossParams p;
  p.lognormal_mu = 0.3;
  p.lognormal_sigma = 0.8;
  p.pareto_alpha = 2.5;
  p.pareto_xm = 3.0;
  p.tail_probability = 0.12;
  CHECK(severity_excess_mean(p, 0.0) == doctest::Approx(severity_mean(p)));
  for (double d : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    CHECK(severity_limited_mean(p, d) + severity_excess_mean(p, d) ==
          doctest::Approx(severity_mean(p)).epsilon(1e-12));
    CHECK(severity_survival(p, d) >= 0.0);
    CHECK(severity_survival(p, d) <= 1.0);
  }
  // Survival is non-increasing.
  double prev = 1.0;
  for (double d = 0.0; d < 40.0; d += 0.5) {
    const double s = severity_survival(p, d);
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
}

TEST_CASE("parameter validation") {
  RegionLossParams p;
  p.pareto_alpha = 1.0;
  Rng rng(1);
  CHECK_THROWS_AS(sample_severity(p, 0.0, rng), DomainError);
  p = RegionLossParams{};
  p.lognormal_sigma = 0.0;
  CHECK_THROWS_AS(simulate_annual_loss(p, 0.0, rng), DomainError);
  p = RegionLossParams{};
  p.tail_probability = 1.4;
  CHECK_THROWS_AS(sample_severity(p, 0.0, rng), DomainError);
}
