#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "clauselens/config.hpp"
#include "clauselens/errors.hpp"
#include "clauselens/market_env.hpp"

namespace clauselens {

struct CvarConfig {
  double alpha = 0.10;  // tail level
  std::array<double, kViolationTypes> epsilon = {0.05, 0.05, 0.05, 0.05};
  double delta = 0.05;  // feasibility margin used by the evaluation harness
  double eta = 2.0;     // dual ascent step
};

inline void validate_cvar_config(const CvarConfig& c) {
  if (!(c.alpha > 0.0) || c.alpha > 1.0)
    throw ConfigError("cvar alpha must lie in (0, 1]");
  for (double e : c.epsilon)
    if (e < 0.0) throw ConfigError("constraint tolerance negative");
  if (!(c.eta > 0.0)) throw ConfigError("dual step eta must be > 0");
}

inline CvarConfig cvar_config_from(const ConfigFile& cfg) {
  CvarConfig c;
  if (cfg.has("cvar", "alpha")) c.alpha = cfg.get_double("cvar", "alpha");
  if (cfg.has("cvar", "epsilon")) {
    auto v = cfg.get_doubles("cvar", "epsilon");
    if (v.size() == 1) {
      c.epsilon.fill(v[0]);
    } else if (v.size() == kViolationTypes) {
      for (std::size_t k = 0; k < kViolationTypes; ++k) c.epsilon[k] = v[k];
    } else {
      throw ConfigError("[cvar] epsilon needs 1 or 4 entries");
    }
  }
  if (cfg.has("cvar", "delta")) c.delta = cfg.get_double("cvar", "delta");
  if (cfg.has("cvar", "eta")) c.eta = cfg.get_double("cvar", "eta");
  validate_cvar_config(c);
  return c;
}

/// Nonnegative Lagrange multipliers plus the violation averages they react
/// to. Updated once per training iteration by the owning thread.
struct DualState {
  std::array<double, kViolationTypes> lambdas = {0.0, 0.0, 0.0, 0.0};
  std::array<double, kViolationTypes> violation_means = {0.0, 0.0, 0.0, 0.0};
};

namespace detail {
/// Indices of the ceil(alpha * N) lowest entries, stably ordered so ties at
/// the tail boundary resolve to the lowest episode index.
inline std::vector<std::size_t> tail_indices(const std::vector<double>& returns,
                                             double alpha) {
  if (returns.empty()) throw DomainError("cvar of an empty return list");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw DomainError("cvar alpha must lie in (0, 1]");
  const std::size_t m = std::size_t(
      std::ceil(alpha * double(returns.size())) + 1e-12);
  std::vector<std::size_t> order(returns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return returns[a] < returns[b];
  });
  order.resize(std::max<std::size_t>(1, m));
  return order;
}
}  // namespace detail

/// Empirical CVaR: mean of the ceil(alpha * N) smallest returns.
inline double cvar(const std::vector<double>& returns, double alpha) {
  const auto tail = detail::tail_indices(returns, alpha);
  double acc = 0.0;
  for (std::size_t i : tail) acc += returns[i];
  return acc / double(tail.size());
}

/// Uniform 1/m weights on the tail trajectories, 0 elsewhere; sums to 1.
inline std::vector<double> tail_weights(const std::vector<double>& returns,
                                        double alpha) {
  const auto tail = detail::tail_indices(returns, alpha);
  std::vector<double> w(returns.size(), 0.0);
  const double u = 1.0 / double(tail.size());
  for (std::size_t i : tail) w[i] = u;
  return w;
}

/// Advantage estimates concentrated on the return tail: raw one-step
/// advantages r - V(s), rescaled by N * w_i, then standardized over the tail
/// set. Entries outside the tail are exactly zero, so only worst-quantile
/// trajectories move the policy; alpha = 1 recovers standardized vanilla
/// advantages.
inline std::vector<double> cvar_weighted_advantages(
    const std::vector<double>& rewards, const std::vector<double>& values,
    double alpha) {
  if (rewards.empty()) throw DomainError("advantage batch is empty");
  if (rewards.size() != values.size())
    throw DomainError("rewards and values length mismatch");
  const auto weights = tail_weights(rewards, alpha);
  const double n = double(rewards.size());
  std::vector<double> adv(rewards.size(), 0.0);
  std::vector<std::size_t> tail;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (weights[i] == 0.0) continue;
    adv[i] = n * weights[i] * (rewards[i] - values[i]);
    tail.push_back(i);
  }
  double mean = 0.0;
  for (std::size_t i : tail) mean += adv[i];
  mean /= double(tail.size());
  double var = 0.0;
  for (std::size_t i : tail) var += (adv[i] - mean) * (adv[i] - mean);
  const double sd = std::sqrt(var / double(tail.size()));
  const double denom = std::max(sd, 1e-8);
  for (std::size_t i : tail) adv[i] = (adv[i] - mean) / denom;
  return adv;
}

/// Projected dual ascent: lambda' = max(0, lambda + eta * (dbar - epsilon)).
inline DualState dual_update(const DualState& state,
                             const std::array<double, kViolationTypes>& observed,
                             const CvarConfig& cfg) {
  validate_cvar_config(cfg);
  DualState next = state;
  for (std::size_t k = 0; k < kViolationTypes; ++k) {
    if (observed[k] < 0.0 || observed[k] > 1.0)
      throw DomainError("violation mean outside [0, 1]");
    next.lambdas[k] =
        std::max(0.0, state.lambdas[k] + cfg.eta * (observed[k] - cfg.epsilon[k]));
    next.violation_means[k] = observed[k];
  }
  return next;
}

/// Scalar constrained objective: the PPO loss plus sum_k lambda_k * dbar_k.
/// The matching parameter gradient comes from the likelihood-ratio penalty
/// inside backward_gradients, with the lambdas held fixed.
inline double total_loss(double ppo_loss,
                         const std::array<double, kViolationTypes>& lambdas,
                         const std::array<double, kViolationTypes>& dbar) {
  double acc = ppo_loss;
  for (std::size_t k = 0; k < kViolationTypes; ++k) {
    if (lambdas[k] < 0.0) throw ContractError("negative dual multiplier");
    acc += lambdas[k] * dbar[k];
  }
  return acc;
}

}  // namespace clauselens
