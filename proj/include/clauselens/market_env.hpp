#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "clauselens/clause_store.hpp"
#include "clauselens/config.hpp"
#include "clauselens/errors.hpp"
#include "clauselens/loss_model.hpp"
#include "clauselens/observation_builder.hpp"
#include "clauselens/pricing.hpp"
#include "clauselens/rng.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

/// Violation indicator slots, fixed order throughout logs and dual state.
enum ViolationType : std::size_t {
  kSolvency = 0,
  kPriceCap = 1,
  kRetention = 2,
  kMaskBreach = 3,
};
constexpr std::size_t kViolationTypes = 4;
inline const char* violation_name(std::size_t k) {
  static const char* names[kViolationTypes] = {"solvency", "price_cap",
                                               "retention", "mask_breach"};
  return names[k];
}

struct EnvConfig {
  double premium_loading = 0.15;   // load over expected ceded loss
  double capital_base = 25.0;      // reinsurer capital, millions
  double capital_charge_rate = 0.02;  // cost of capital on committed limit
  double solvency_multiplier = 1.0;   // ceded-loss threshold, x capital_base
  double price_cap_ratio = 0.12;      // max premium / insured value
  double gamma = 0.99;  // discount; inert for single-decision episodes
};

inline void validate_env_config(const EnvConfig& e) {
  if (e.premium_loading < 0.0) throw ConfigError("premium_loading negative");
  if (!(e.capital_base > 0.0)) throw ConfigError("capital_base must be > 0");
  if (e.capital_charge_rate < 0.0)
    throw ConfigError("capital_charge_rate negative");
  if (!(e.solvency_multiplier > 0.0))
    throw ConfigError("solvency_multiplier must be > 0");
  if (!(e.price_cap_ratio > 0.0))
    throw ConfigError("price_cap_ratio must be > 0");
  if (e.gamma < 0.0 || e.gamma >= 1.0)
    throw ConfigError("gamma must lie in [0, 1)");
}

inline EnvConfig env_config_from(const ConfigFile& cfg) {
  EnvConfig e;
  auto opt = [&](const char* key, double& out) {
    if (cfg.has("env", key)) out = cfg.get_double("env", key);
  };
  opt("premium_loading", e.premium_loading);
  opt("capital_base", e.capital_base);
  opt("capital_charge_rate", e.capital_charge_rate);
  opt("solvency_multiplier", e.solvency_multiplier);
  opt("price_cap_ratio", e.price_cap_ratio);
  opt("gamma", e.gamma);
  validate_env_config(e);
  return e;
}

/// Ranges the cedent sampler draws requests from.
struct CedentSamplerConfig {
  std::vector<std::pair<Jurisdiction, double>> jurisdiction_mix = {
      {Jurisdiction::UsFl, 0.30}, {Jurisdiction::UsCa, 0.20},
      {Jurisdiction::EuDe, 0.20}, {Jurisdiction::Au, 0.15},
      {Jurisdiction::Sg, 0.15}};
  std::vector<std::pair<LineOfBusiness, double>> line_mix = {
      {LineOfBusiness::PropertyCat, 0.6}, {LineOfBusiness::Casualty, 0.4}};
  std::vector<std::pair<TreatyType, double>> treaty_mix = {
      {TreatyType::QS, 0.40}, {TreatyType::CatXL, 0.35},
      {TreatyType::AggXL, 0.25}};
  double insured_value_min = 10.0, insured_value_max = 100.0;
  double loss_ratio_min = 0.3, loss_ratio_max = 1.5;
  double requested_limit_min = 2.0, requested_limit_max = 10.0;
  double requested_deductible_min = 0.0, requested_deductible_max = 5.0;
};

inline void validate_cedent_config(const CedentSamplerConfig& c) {
  auto check_mix = [](double total, const char* what) {
    if (std::fabs(total - 1.0) > 1e-9)
      throw ConfigError(std::string(what) + " weights must sum to 1");
  };
  double jw = 0.0, lw = 0.0, tw = 0.0;
  for (const auto& [j, w] : c.jurisdiction_mix) jw += w;
  for (const auto& [l, w] : c.line_mix) lw += w;
  for (const auto& [t, w] : c.treaty_mix) tw += w;
  check_mix(jw, "jurisdiction mix");
  check_mix(lw, "line mix");
  check_mix(tw, "treaty mix");
}

inline CedentSamplerConfig cedent_config_from(const ConfigFile& cfg) {
  CedentSamplerConfig c;
  if (cfg.has("cedent", "jurisdiction_mix")) {
    c.jurisdiction_mix.clear();
    for (const auto& [name, w] : cfg.get_weighted("cedent", "jurisdiction_mix"))
      c.jurisdiction_mix.emplace_back(jurisdiction_from_string(name), w);
  }
  if (cfg.has("cedent", "line_mix")) {
    c.line_mix.clear();
    for (const auto& [name, w] : cfg.get_weighted("cedent", "line_mix"))
      c.line_mix.emplace_back(line_from_string(name), w);
  }
  if (cfg.has("cedent", "treaty_mix")) {
    c.treaty_mix.clear();
    for (const auto& [name, w] : cfg.get_weighted("cedent", "treaty_mix"))
      c.treaty_mix.emplace_back(treaty_type_from_string(name), w);
  }
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!cfg.has("cedent", key)) return;
    auto v = cfg.get_doubles("cedent", key);
    if (v.size() != 2 || v[0] > v[1])
      throw ConfigError(std::string("[cedent] ") + key +
                        " must be 'min,max' with min <= max");
    lo = v[0];
    hi = v[1];
  };
  range("insured_value_range", c.insured_value_min, c.insured_value_max);
  range("loss_ratio_range", c.loss_ratio_min, c.loss_ratio_max);
  range("requested_limit_range", c.requested_limit_min, c.requested_limit_max);
  range("requested_deductible_range", c.requested_deductible_min,
        c.requested_deductible_max);
  validate_cedent_config(c);
  return c;
}

inline CedentRequest sample_cedent(const CedentSamplerConfig& cfg, Rng& rng) {
  validate_cedent_config(cfg);
  CedentRequest r;
  {
    std::vector<double> w;
    for (const auto& [j, weight] : cfg.jurisdiction_mix) w.push_back(weight);
    r.jurisdiction = cfg.jurisdiction_mix[rng.categorical(w.data(), w.size())].first;
  }
  {
    std::vector<double> w;
    for (const auto& [l, weight] : cfg.line_mix) w.push_back(weight);
    r.line_of_business = cfg.line_mix[rng.categorical(w.data(), w.size())].first;
  }
  {
    std::vector<double> w;
    for (const auto& [t, weight] : cfg.treaty_mix) w.push_back(weight);
    r.requested_treaty_type =
        cfg.treaty_mix[rng.categorical(w.data(), w.size())].first;
  }
  r.insured_value = rng.uniform(cfg.insured_value_min, cfg.insured_value_max);
  r.exposure_score = rng.uniform01();
  r.historical_loss_ratio = rng.uniform(cfg.loss_ratio_min, cfg.loss_ratio_max);
  r.requested_limit =
      rng.uniform(cfg.requested_limit_min, cfg.requested_limit_max);
  r.requested_deductible =
      rng.uniform(cfg.requested_deductible_min, cfg.requested_deductible_max);
  return r;
}

/// Split one year's losses between reinsurer (ceded) and cedent (retained).
inline std::pair<double, double> apply_treaty_terms(
    const TreatyAction& action, const AnnualLossSample& annual) {
  double ceded = 0.0;
  switch (action.treaty_type) {
    case TreatyType::QS:
      ceded = action.quota_share * annual.total;
      break;
    case TreatyType::CatXL:
      for (double sev : annual.severities)
        ceded += std::min(action.limit, std::max(0.0, sev - action.attachment));
      break;
    case TreatyType::AggXL:
      ceded = std::min(action.limit,
                       std::max(0.0, annual.total - action.attachment));
      break;
  }
  return {ceded, annual.total - ceded};
}

inline double price_premium(const TreatyAction& action,
                            const CedentRequest& request,
                            const PricingModel& pricing) {
  return pricing.premium(request, action);
}

/// One rollout's full audit record.
struct EpisodeRecord {
  CedentRequest request;
  AugmentedState state;
  std::size_t action_id = 0;
  double premium = 0.0;
  double gross_loss = 0.0;
  double ceded_loss = 0.0;
  double retained_loss = 0.0;
  double reward = 0.0;
  std::array<int, kViolationTypes> violations = {0, 0, 0, 0};
  std::vector<std::string> retrieved_clause_ids;
  bool fallback_used = false;

  bool any_violation() const {
    for (int v : violations)
      if (v) return true;
    return false;
  }
};

/// Simulate the year and settle the quote. The audit mask, when given, is
/// only read to flag actions sampled outside it (possible only with masking
/// disabled; the fallback path is exempt by contract).
inline EpisodeRecord step(const CedentRequest& request, std::size_t action_id,
                          const ActionGrid& grid,
                          const std::vector<const Clause*>& retrieved,
                          const PricingModel& pricing, const EnvConfig& env,
                          Rng& loss_rng, const FeasibilityMask* audit_mask,
                          bool fallback_used) {
  const TreatyAction& action = grid.at(action_id);
  const RegionLossParams& params = pricing.region(request.jurisdiction);
  const AnnualLossSample annual =
      simulate_annual_loss(params, request.exposure_score, loss_rng);

  EpisodeRecord rec;
  rec.request = request;
  rec.action_id = action_id;
  rec.fallback_used = fallback_used;
  rec.gross_loss = annual.total;
  auto [ceded, retained] = apply_treaty_terms(action, annual);
  rec.ceded_loss = ceded;
  rec.retained_loss = retained;
  rec.premium = pricing.premium(request, action);
  const double capital_charge =
      env.capital_charge_rate * committed_limit(action, request);
  rec.reward = rec.premium - rec.ceded_loss - capital_charge;

  rec.violations[kSolvency] =
      rec.ceded_loss > env.solvency_multiplier * env.capital_base ? 1 : 0;
  rec.violations[kPriceCap] =
      rec.premium > env.price_cap_ratio * request.insured_value ? 1 : 0;

  MaskContext ctx{[&](const TreatyAction& a) { return pricing.premium(request, a); },
                  env.capital_base};
  for (const Clause* c : retrieved) {
    rec.retrieved_clause_ids.push_back(c->id);
    if (c->predicate &&
        !predicate_satisfied(*c->predicate, request, action, ctx))
      rec.violations[kRetention] = 1;
  }
  if (audit_mask && !fallback_used && !audit_mask->feasible[action_id])
    rec.violations[kMaskBreach] = 1;
  if (!std::isfinite(rec.reward))
    throw NumericError("episode reward is not finite");
  return rec;
}

}  // namespace clauselens
