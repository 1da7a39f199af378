#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "clauselens/clause_store.hpp"
#include "clauselens/config.hpp"
#include "clauselens/market_env.hpp"
#include "clauselens/observation_builder.hpp"
#include "clauselens/pricing.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

/// Everything a rollout needs, built once from configuration plus a corpus
/// and immutable afterwards; safe to share across rollout workers.
class MarketWorld {
 public:
  MarketWorld(const ConfigFile& cfg, std::vector<Clause> corpus_in)
      : grid(build_action_grid(grid_config_from(cfg))),
        bounds(feature_bounds_from(cfg)),
        env(env_config_from(cfg)),
        cedent_cfg(cedent_config_from(cfg)),
        obs(observation_config_from(cfg)),
        corpus(std::move(corpus_in)),
        index(corpus),
        projection(index, observation_config_from(cfg).dim_c,
                   observation_config_from(cfg).projection_seed),
        pricing(region_params_from(cfg), grid, env_config_from(cfg).premium_loading) {
    for (const auto& c : corpus) by_id_[c.id] = &c;
    CedentRequest probe;
    probe.insured_value = bounds.insured_value_min + 1.0;
    feature_dim_ = encode_cedent_features(probe, bounds).size();
    state_dim_ = feature_dim_ + obs.k * obs.dim_c;
  }

  MarketWorld(const MarketWorld&) = delete;
  MarketWorld& operator=(const MarketWorld&) = delete;

  static std::map<Jurisdiction, RegionLossParams> region_params_from(
      const ConfigFile& cfg) {
    std::map<Jurisdiction, RegionLossParams> out;
    for (auto j : kAllJurisdictions) out[j] = loss_params_from(cfg, j);
    return out;
  }

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t state_dim() const { return state_dim_; }

  const Clause* clause_by_id(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
      throw DomainError("clause id '" + id + "' not in corpus");
    return it->second;
  }

  std::vector<const Clause*> clauses_of(const RetrievalResult& r) const {
    std::vector<const Clause*> out;
    out.reserve(r.hits.size());
    for (const auto& hit : r.hits) out.push_back(clause_by_id(hit.id));
    return out;
  }

  MaskContext mask_context(const CedentRequest& req) const {
    return MaskContext{
        [this, req](const TreatyAction& a) { return pricing.premium(req, a); },
        env.capital_base};
  }

  AugmentedState observe(const CedentRequest& req,
                         const RetrievalResult& retrieval) const {
    return build_state(encode_cedent_features(req, bounds), retrieval, index,
                       projection, obs.k);
  }

  /// Observation with all clause blocks zeroed (retrieval-off variants).
  AugmentedState observe_plain(const CedentRequest& req) const {
    return build_state(encode_cedent_features(req, bounds), RetrievalResult{},
                       index, projection, obs.k);
  }

  ActionGrid grid;
  FeatureBounds bounds;
  EnvConfig env;
  CedentSamplerConfig cedent_cfg;
  ObservationConfig obs;
  std::vector<Clause> corpus;
  ClauseIndex index;
  HashProjection projection;
  PricingModel pricing;

 private:
  std::map<std::string, const Clause*> by_id_;
  std::size_t feature_dim_ = 0;
  std::size_t state_dim_ = 0;
};

}  // namespace clauselens
