#include <doctest.h>

#include <cmath>
#include <map>

#include "clauselens/market_env.hpp"
#include "clauselens/pricing.hpp"

using namespace clauselens;

namespace {

std::map<Jurisdiction, RegionLossParams> one_region(const RegionLossParams& p) {
  std::map<Jurisdiction, RegionLossParams> m;
  for (auto j : kAllJurisdictions) m[j] = p;
  return m;
}

CedentRequest request_with(double exposure) {
  CedentRequest r;
  r.jurisdiction = Jurisdiction::UsFl;
  r.insured_value = 50.0;
  r.exposure_score = exposure;
  return r;
}

RegionLossParams mixture_region() {
  RegionLossParams p;
  p.event_rate = 1.2;
  p.lognormal_mu = 0.3;
  p.lognormal_sigma = 0.8;
  p.pareto_alpha = 2.4;
  p.pareto_xm = 3.0;
  p.tail_probability = 0.08;
  return p;
}

}  // namespace

TEST_CASE("quota share premium closed form") {
  RegionLossParams p;
  p.event_rate = 2.0;
  p.lognormal_mu = 0.0;
  p.lognormal_sigma = 0.5;
  p.tail_probability = 0.0;
  PricingModel pricing(one_region(p), build_action_grid(GridConfig{}), 0.2);
  const auto req = request_with(0.0);
  const TreatyAction qs{TreatyType::QS, 0.5, 0.0, 0.0};
  const double expected = 1.2 * 0.5 * 2.0 * std::exp(0.125);
  CHECK(expected == doctest::Approx(1.3596).epsilon(1e-4));
  CHECK(pricing.premium(req, qs) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero limit layers cost nothing") {
  GridConfig g;
  g.limit_levels = {0.0, 2.0};
  PricingModel pricing(one_region(mixture_region()), build_action_grid(g), 0.3);
  const auto req = request_with(0.5);
  CHECK(pricing.premium(req, {TreatyType::CatXL, 0.0, 5.0, 0.0}) == 0.0);
  CHECK(pricing.premium(req, {TreatyType::AggXL, 0.0, 5.0, 0.0}) == 0.0);
}

TEST_CASE("per-event layer quadrature agrees with the closed-form route") {
  const auto p = mixture_region();
  const ActionGrid grid = build_action_grid(GridConfig{});
  PricingModel pricing(one_region(p), grid, 0.0);
  for (double exposure : {0.0, 0.5, 1.0}) {
    const auto req = request_with(exposure);
    const double c = 1.0 + exposure;
    for (const auto& action : grid.actions()) {
      if (action.treaty_type != TreatyType::CatXL) continue;
      const double lo = action.attachment / c;
      const double hi = (action.attachment + action.limit) / c;
      const double closed =
          p.event_rate * c *
          (severity_excess_mean(p, lo) - severity_excess_mean(p, hi));
      CHECK(pricing.expected_ceded(req, action) ==
            doctest::Approx(closed).epsilon(1e-4));
    }
  }
}

TEST_CASE("aggregate layers match a Monte Carlo oracle") {
  const auto p = mixture_region();
  const ActionGrid grid = build_action_grid(GridConfig{});
  PricingModel pricing(one_region(p), grid, 0.0);
  const auto req = request_with(0.4);

  const int n = 200000;
  std::vector<double> totals(200000, 0.0);
  Rng rng(2024);
  for (int i = 0; i < n; ++i)
    totals[std::size_t(i)] = simulate_annual_loss(p, 0.4, rng).total;

  for (const auto& action : grid.actions()) {
    if (action.treaty_type != TreatyType::AggXL) continue;
    double sum = 0.0, sum_sq = 0.0;
    for (double t : totals) {
      const double ceded =
          std::min(action.limit, std::max(0.0, t - action.attachment));
      sum += ceded;
      sum_sq += ceded * ceded;
    }
    const double mc_mean = sum / n;
    const double mc_sd = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
    CHECK(std::fabs(pricing.expected_ceded(req, action) - mc_mean) <
          3.0 * mc_sd + 1e-4);
  }
}

TEST_CASE("per-event layer premium equals expected ceded loss at zero loading") {
  const auto p = mixture_region();
  PricingModel pricing(one_region(p), build_action_grid(GridConfig{}), 0.0);
  const auto req = request_with(0.5);
  const TreatyAction layer{TreatyType::CatXL, 0.0, 5.0, 10.0};

  Rng rng(8181);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto annual = simulate_annual_loss(p, 0.5, rng);
    const auto [ceded, retained] = apply_treaty_terms(layer, annual);
    sum += ceded;
    sum_sq += ceded * ceded;
  }
  const double mc_mean = sum / n;
  const double mc_sd = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
  CHECK(std::fabs(pricing.premium(req, layer) - mc_mean) < 3.0 * mc_sd);
}

TEST_CASE("quota share premium equals expected ceded loss at zero loading") {
  const auto p = mixture_region();
  PricingModel pricing(one_region(p), build_action_grid(GridConfig{}), 0.0);
  const auto req = request_with(0.7);
  const TreatyAction qs{TreatyType::QS, 0.3, 0.0, 0.0};

  Rng rng(5150);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ceded = 0.3 * simulate_annual_loss(p, 0.7, rng).total;
    sum += ceded;
    sum_sq += ceded * ceded;
  }
  const double mc_mean = sum / n;
  const double mc_sd = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
  CHECK(std::fabs(pricing.premium(req, qs) - mc_mean) < 3.0 * mc_sd);
}

TEST_CASE("pricing is deterministic") {
  const auto p = mixture_region();
  const ActionGrid grid = build_action_grid(GridConfig{});
  PricingModel a(one_region(p), grid, 0.15);
  PricingModel b(one_region(p), grid, 0.15);
  const auto req = request_with(0.33);
  for (const auto& action : grid.actions())
    CHECK(a.premium(req, action) == b.premium(req, action));
}

TEST_CASE("layers beyond the priced envelope are rejected") {
  PricingModel pricing(one_region(mixture_region()),
                       build_action_grid(GridConfig{}), 0.0);
  const auto req = request_with(0.0);
  CHECK_THROWS_AS(
      pricing.expected_ceded(req, {TreatyType::AggXL, 0.0, 100.0, 50.0}),
      DomainError);
}

TEST_CASE("aggregate stop loss is monotone in its terms") {
  PricingModel pricing(one_region(mixture_region()),
                       build_action_grid(GridConfig{}), 0.0);
  const auto req = request_with(0.2);
  const double low_att =
      pricing.expected_ceded(req, {TreatyType::AggXL, 0.0, 2.0, 5.0});
  const double high_att =
      pricing.expected_ceded(req, {TreatyType::AggXL, 0.0, 10.0, 5.0});
  CHECK(low_att >= high_att);
  const double small_lim =
      pricing.expected_ceded(req, {TreatyType::AggXL, 0.0, 5.0, 2.0});
  const double big_lim =
      pricing.expected_ceded(req, {TreatyType::AggXL, 0.0, 5.0, 10.0});
  CHECK(big_lim >= small_lim);
}
