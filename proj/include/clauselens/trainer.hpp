#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "clauselens/market_env.hpp"
#include "clauselens/policy_value_net.hpp"
#include "clauselens/risk_duals.hpp"
#include "clauselens/rng.hpp"
#include "clauselens/serialize.hpp"
#include "clauselens/world.hpp"

namespace clauselens {

enum class VariantKind { StaticHeuristic, BaselineRL, ClauseLensRL, ClauseLensRLX };

/// Agent configuration: which capabilities are switched on.
struct AgentVariant {
  VariantKind kind = VariantKind::ClauseLensRL;
  bool retrieval = true;
  bool masking = true;
  bool justification = false;
  bool cvar = true;
  bool learned = true;
};

inline AgentVariant variant_for(VariantKind kind) {
  switch (kind) {
    case VariantKind::StaticHeuristic:
      return {kind, false, false, false, false, false};
    case VariantKind::BaselineRL:
      return {kind, false, false, false, true, true};
    case VariantKind::ClauseLensRL:
      return {kind, true, true, false, true, true};
    case VariantKind::ClauseLensRLX:
      return {kind, true, true, true, true, true};
  }
  throw DomainError("unknown agent variant");
}

inline std::string to_string(VariantKind k) {
  switch (k) {
    case VariantKind::StaticHeuristic: return "StaticHeuristic";
    case VariantKind::BaselineRL: return "BaselineRL";
    case VariantKind::ClauseLensRL: return "ClauseLensRL";
    case VariantKind::ClauseLensRLX: return "ClauseLensRLX";
  }
  throw DomainError("unknown agent variant");
}

inline VariantKind variant_from_string(const std::string& s) {
  for (auto k : {VariantKind::StaticHeuristic, VariantKind::BaselineRL,
                 VariantKind::ClauseLensRL, VariantKind::ClauseLensRLX})
    if (to_string(k) == s) return k;
  throw ParseError("unknown agent variant '" + s + "'");
}

struct TrainConfig {
  std::size_t episodes_total = 100000;
  std::size_t batch_size = 512;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double ppo_clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  std::size_t epochs_per_batch = 4;
  std::size_t minibatch_size = 128;
  double grad_clip_norm = 5.0;
  double lr_decay_factor = 0.5;
  double lr_floor = 1e-5;
  double spike_threshold = 2.0;  // spike when dbar_k > threshold * epsilon_k
  std::size_t hidden_dim = 64;
  std::uint64_t seed = 7;
  std::size_t threads = 1;
};

inline void validate_train_config(const TrainConfig& t) {
  if (t.episodes_total < 1 || t.batch_size < 1 || t.epochs_per_batch < 1 ||
      t.minibatch_size < 1 || t.hidden_dim < 1)
    throw ConfigError("train sizes must be positive");
  if (!(t.learning_rate > 0.0) || !(t.lr_floor > 0.0) ||
      !(t.lr_decay_factor > 0.0) || !(t.grad_clip_norm > 0.0) ||
      !(t.spike_threshold > 0.0))
    throw ConfigError("train rates must be positive");
  if (!(t.ppo_clip > 0.0) || t.ppo_clip >= 1.0)
    throw ConfigError("ppo_clip must lie in (0, 1)");
  if (t.gamma < 0.0 || t.gamma >= 1.0)
    throw ConfigError("gamma must lie in [0, 1)");
  if (t.entropy_coef < 0.0 || t.value_coef < 0.0)
    throw ConfigError("loss coefficients must be nonnegative");
}

inline TrainConfig train_config_from(const ConfigFile& cfg) {
  TrainConfig t;
  auto d = [&](const char* key, double& out) {
    if (cfg.has("train", key)) out = cfg.get_double("train", key);
  };
  auto n = [&](const char* key, std::size_t& out) {
    if (cfg.has("train", key)) out = std::size_t(cfg.get_int("train", key));
  };
  n("episodes_total", t.episodes_total);
  n("batch_size", t.batch_size);
  d("learning_rate", t.learning_rate);
  d("gamma", t.gamma);
  d("ppo_clip", t.ppo_clip);
  d("entropy_coef", t.entropy_coef);
  d("value_coef", t.value_coef);
  n("epochs_per_batch", t.epochs_per_batch);
  n("minibatch_size", t.minibatch_size);
  d("grad_clip_norm", t.grad_clip_norm);
  d("lr_decay_factor", t.lr_decay_factor);
  d("lr_floor", t.lr_floor);
  d("spike_threshold", t.spike_threshold);
  n("hidden_dim", t.hidden_dim);
  if (cfg.has("train", "seed"))
    t.seed = std::uint64_t(cfg.get_int("train", "seed"));
  n("threads", t.threads);
  validate_train_config(t);
  return t;
}

/// Deterministic parallel map: results land in a preallocated vector by
/// index and reductions happen serially afterwards, so thread count never
/// changes any output.
template <typename Fn>
void parallel_for_indexed(std::size_t n, std::size_t threads, const Fn& fn) {
  threads = std::max<std::size_t>(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Fixed quoting rule: half quota share for QS requests, a 5M x 5M layer
/// otherwise (aggregate form for aggregate requests).
inline std::size_t static_heuristic_action(const CedentRequest& req,
                                           const ActionGrid& grid) {
  TreatyAction a;
  switch (req.requested_treaty_type) {
    case TreatyType::QS:
      a = {TreatyType::QS, 0.5, 0.0, 0.0};
      break;
    case TreatyType::CatXL:
      a = {TreatyType::CatXL, 0.0, 5.0, 5.0};
      break;
    case TreatyType::AggXL:
      a = {TreatyType::AggXL, 0.0, 5.0, 5.0};
      break;
  }
  std::size_t id = grid.find(a);
  if (id == ActionGrid::npos)
    throw ConfigError("static heuristic terms are not on the action grid");
  return id;
}

/// Rollout output: the audit-grade episode record plus the training sample
/// (advantage filled in later from the whole batch).
struct RolloutEpisode {
  EpisodeRecord record;
  TrainSample sample;
};

/// RNG sub-stream purposes; episode index is the third key so parallel and
/// serial rollouts draw identically.
enum StreamPurpose : std::uint64_t {
  kStreamCedent = 0,
  kStreamLoss = 1,
  kStreamAction = 2,
};

inline RolloutEpisode rollout_episode(const MarketWorld& world,
                                      const AgentVariant& variant,
                                      const NetParams& params,
                                      std::uint64_t seed,
                                      std::uint64_t episode_index) {
  Rng cedent_rng = Rng::stream(seed, kStreamCedent, episode_index);
  Rng loss_rng = Rng::stream(seed, kStreamLoss, episode_index);
  Rng action_rng = Rng::stream(seed, kStreamAction, episode_index);

  RolloutEpisode ep;
  const CedentRequest request = sample_cedent(world.cedent_cfg, cedent_rng);

  RetrievalResult retrieval;
  std::vector<const Clause*> clauses;
  if (variant.retrieval) {
    retrieval = retrieve_topk(world.index, request, world.obs.k);
    clauses = world.clauses_of(retrieval);
  }

  FeasibilityMask mask;
  bool have_mask = false;
  if (variant.masking && !clauses.empty()) {
    mask = compile_feasibility_mask(clauses, request, world.grid,
                                    world.mask_context(request));
    have_mask = true;
  }

  const AugmentedState state = variant.retrieval
                                   ? world.observe(request, retrieval)
                                   : world.observe_plain(request);

  std::vector<char> sampling_mask(world.grid.size(), 1);
  bool fallback = false;
  std::size_t action_id = 0;
  double old_log_prob = 0.0;

  if (!variant.learned) {
    action_id = static_heuristic_action(request, world.grid);
  } else {
    if (have_mask) {
      if (mask.empty_feasible_set()) {
        fallback = true;  // keep the all-true sampling mask
      } else {
        sampling_mask.assign(mask.feasible.begin(), mask.feasible.end());
      }
    }
    const PolicyOutput out = forward_policy(params, state.values, sampling_mask);
    action_id = fallback ? mask.least_violating() : sample_action(out, action_rng);
    old_log_prob = out.log_probs[action_id];
  }

  ep.record = step(request, action_id, world.grid, clauses, world.pricing,
                   world.env, loss_rng, have_mask ? &mask : nullptr, fallback);
  ep.record.state = state;

  ep.sample.state = state.values;
  ep.sample.mask = sampling_mask;
  ep.sample.action = action_id;
  ep.sample.old_log_prob = old_log_prob;
  ep.sample.value_target = ep.record.reward;
  for (std::size_t k = 0; k < kViolationTypes; ++k)
    ep.sample.violations[k] = double(ep.record.violations[k]);
  return ep;
}

struct RolloutBatch {
  std::vector<RolloutEpisode> episodes;
  std::size_t fallback_count = 0;

  std::vector<double> rewards() const {
    std::vector<double> out;
    out.reserve(episodes.size());
    for (const auto& e : episodes) out.push_back(e.record.reward);
    return out;
  }
  std::array<double, kViolationTypes> violation_means() const {
    std::array<double, kViolationTypes> d = {0.0, 0.0, 0.0, 0.0};
    for (const auto& e : episodes)
      for (std::size_t k = 0; k < kViolationTypes; ++k)
        d[k] += double(e.record.violations[k]);
    for (auto& v : d) v /= double(std::max<std::size_t>(1, episodes.size()));
    return d;
  }
};

inline RolloutBatch rollout_batch(const MarketWorld& world,
                                  const AgentVariant& variant,
                                  const NetParams& params, std::size_t count,
                                  std::uint64_t seed,
                                  std::uint64_t episode_offset,
                                  std::size_t threads = 1) {
  if (count < 1) throw ContractError("rollout batch size must be >= 1");
  RolloutBatch batch;
  batch.episodes.resize(count);
  parallel_for_indexed(count, threads, [&](std::size_t i) {
    batch.episodes[i] =
        rollout_episode(world, variant, params, seed, episode_offset + i);
  });
  for (const auto& e : batch.episodes)
    batch.fallback_count += e.record.fallback_used ? 1 : 0;
  return batch;
}

/// Adam with bias correction; kept explicit so checkpoint-free restarts are
/// reproducible from the metrics log alone.
struct AdamState {
  std::vector<double> m, v;
  std::size_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void apply(NetParams& params, const NetParams& grads, double lr) {
    ++step;
    const double c1 = 1.0 - std::pow(beta1, double(step));
    const double c2 = 1.0 - std::pow(beta2, double(step));
    for (std::size_t i = 0; i < params.flat.size(); ++i) {
      const double g = grads.flat[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      params.flat[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

struct UpdateStats {
  LossBreakdown last_loss;
  bool aborted = false;
};

/// One PPO iteration over a rolled-out batch: epochs_per_batch passes of
/// shuffled minibatches, dual multipliers frozen, global gradient-norm clip.
/// A non-finite loss restores the entry parameters and reports abort so the
/// caller can decay the learning rate.
inline UpdateStats ppo_update(NetParams& params, AdamState& adam,
                              std::vector<TrainSample>& samples,
                              const DualState& duals, const TrainConfig& cfg,
                              const CvarConfig& cvar_cfg, bool use_cvar,
                              Rng& shuffle_rng) {
  if (samples.empty()) throw ContractError("ppo_update on an empty batch");
  std::vector<double> rewards(samples.size()), values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rewards[i] = samples[i].value_target;
    values[i] = forward_value(params, samples[i].state);
  }
  const double alpha = use_cvar ? cvar_cfg.alpha : 1.0;
  const auto advantages = cvar_weighted_advantages(rewards, values, alpha);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i].advantage = advantages[i];

  LossConfig loss_cfg;
  loss_cfg.clip_epsilon = cfg.ppo_clip;
  loss_cfg.value_coef = cfg.value_coef;
  loss_cfg.entropy_coef = cfg.entropy_coef;
  loss_cfg.lambdas = duals.lambdas;

  const NetParams snapshot = params;
  AdamState adam_snapshot = adam;
  UpdateStats stats;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  try {
    for (std::size_t epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
      // Fisher-Yates with the iteration's dedicated stream.
      for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = std::size_t(shuffle_rng.uniform01() * double(i));
        if (j >= i) j = i - 1;
        std::swap(order[i - 1], order[j]);
      }
      for (std::size_t lo = 0; lo < order.size(); lo += cfg.minibatch_size) {
        const std::size_t hi =
            std::min(order.size(), lo + cfg.minibatch_size);
        std::vector<TrainSample> mb;
        mb.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) mb.push_back(samples[order[i]]);
        auto result = backward_gradients(params, mb, loss_cfg);
        double norm_sq = 0.0;
        for (double g : result.grads.flat) norm_sq += g * g;
        const double norm = std::sqrt(norm_sq);
        if (norm > cfg.grad_clip_norm) {
          const double scale = cfg.grad_clip_norm / norm;
          for (double& g : result.grads.flat) g *= scale;
        }
        adam.apply(params, result.grads, cfg.learning_rate);
        stats.last_loss = result.loss;
      }
    }
  } catch (const NumericError&) {
    params = snapshot;
    adam = adam_snapshot;
    stats.aborted = true;
  }
  return stats;
}

struct IterationMetrics {
  std::size_t iteration = 0;
  double mean_return = 0.0;
  double batch_cvar = 0.0;
  std::array<double, kViolationTypes> dbar = {0.0, 0.0, 0.0, 0.0};
  std::array<double, kViolationTypes> lambda = {0.0, 0.0, 0.0, 0.0};
  double lr = 0.0;
  std::size_t fallback_count = 0;
  double loss = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["iteration"] = iteration;
    j["mean_return"] = mean_return;
    j["cvar_alpha"] = batch_cvar;
    j["dbar"] = dbar;
    j["lambda"] = lambda;
    j["lr"] = lr;
    j["fallback_count"] = fallback_count;
    j["loss"] = loss;
    return j;
  }
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<IterationMetrics> metrics;

  std::string metrics_jsonl() const {
    std::string out;
    for (const auto& m : metrics) out += m.to_json().dump() + "\n";
    return out;
  }
};

/// Full training loop: rollouts with retrieval and masking per the variant,
/// tail-weighted PPO updates, projected dual ascent, and learning-rate decay
/// whenever a violation mean spikes past spike_threshold * epsilon.
inline TrainResult train(const MarketWorld& world, const AgentVariant& variant,
                         const TrainConfig& cfg, const CvarConfig& cvar_cfg) {
  validate_train_config(cfg);
  validate_cvar_config(cvar_cfg);
  TrainResult result;
  result.checkpoint.variant = to_string(variant.kind);

  if (!variant.learned) {
    // Fixed-rule agent: nothing to optimize, checkpoint records the variant.
    result.checkpoint.has_net = false;
    return result;
  }

  NetParams params = NetParams::init(world.state_dim(), cfg.hidden_dim,
                                     world.grid.size(), cfg.seed);
  AdamState adam(params.flat.size());
  DualState duals;
  double lr = cfg.learning_rate;
  const std::size_t iterations =
      std::max<std::size_t>(1, cfg.episodes_total / cfg.batch_size);

  for (std::size_t iter = 0; iter < iterations; ++iter) {
    const std::uint64_t offset = iter * cfg.batch_size;
    RolloutBatch batch = rollout_batch(world, variant, params, cfg.batch_size,
                                       cfg.seed, offset, cfg.threads);
    const auto rewards = batch.rewards();
    const auto dbar = batch.violation_means();

    std::vector<TrainSample> samples;
    samples.reserve(batch.episodes.size());
    for (auto& e : batch.episodes) samples.push_back(std::move(e.sample));

    TrainConfig step_cfg = cfg;
    step_cfg.learning_rate = lr;
    Rng shuffle_rng = Rng::stream(cfg.seed, 1000 + iter, 0);
    UpdateStats stats = ppo_update(params, adam, samples, duals, step_cfg,
                                   cvar_cfg, variant.cvar, shuffle_rng);
    if (stats.aborted) lr = std::max(cfg.lr_floor, lr * 0.5);

    duals = dual_update(duals, dbar, cvar_cfg);

    bool spike = false;
    for (std::size_t k = 0; k < kViolationTypes; ++k)
      if (dbar[k] > cfg.spike_threshold * cvar_cfg.epsilon[k]) spike = true;
    if (spike) lr = std::max(cfg.lr_floor, lr * cfg.lr_decay_factor);

    IterationMetrics m;
    m.iteration = iter;
    double mean = 0.0;
    for (double r : rewards) mean += r;
    m.mean_return = mean / double(rewards.size());
    m.batch_cvar = cvar(rewards, cvar_cfg.alpha);
    m.dbar = dbar;
    m.lambda = duals.lambdas;
    m.lr = lr;
    m.fallback_count = batch.fallback_count;
    m.loss = total_loss(stats.last_loss.total, duals.lambdas, dbar);
    result.metrics.push_back(m);
  }

  result.checkpoint.has_net = true;
  result.checkpoint.net = std::move(params);
  result.checkpoint.duals = duals;
  return result;
}

}  // namespace clauselens
