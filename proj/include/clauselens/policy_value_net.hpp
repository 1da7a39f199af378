#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "clauselens/errors.hpp"
#include "clauselens/market_env.hpp"
#include "clauselens/rng.hpp"

namespace clauselens {

/// Two-hidden-layer tanh trunk with a masked-softmax policy head over the
/// action grid and a scalar value head off the second hidden layer. All
/// parameters live in one flat vector so optimizer steps, checkpoints and
/// finite-difference sweeps can treat them uniformly.
///
/// Layout: w1 (h x d), b1, w2 (h x h), b2, w3 (A x h), b3, wv (h), bv.
struct NetParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> flat;

  NetParams() = default;
  NetParams(std::size_t d, std::size_t h, std::size_t a)
      : input_dim(d), hidden_dim(h), action_dim(a),
        flat(h * d + h + h * h + h + a * h + a + h + 1, 0.0) {}

  std::size_t off_w1() const { return 0; }
  std::size_t off_b1() const { return hidden_dim * input_dim; }
  std::size_t off_w2() const { return off_b1() + hidden_dim; }
  std::size_t off_b2() const { return off_w2() + hidden_dim * hidden_dim; }
  std::size_t off_w3() const { return off_b2() + hidden_dim; }
  std::size_t off_b3() const { return off_w3() + action_dim * hidden_dim; }
  std::size_t off_wv() const { return off_b3() + action_dim; }
  std::size_t off_bv() const { return off_wv() + hidden_dim; }

  double w1(std::size_t i, std::size_t j) const {
    return flat[off_w1() + i * input_dim + j];
  }
  double w2(std::size_t i, std::size_t j) const {
    return flat[off_w2() + i * hidden_dim + j];
  }
  double w3(std::size_t i, std::size_t j) const {
    return flat[off_w3() + i * hidden_dim + j];
  }

  bool same_shape(const NetParams& o) const {
    return input_dim == o.input_dim && hidden_dim == o.hidden_dim &&
           action_dim == o.action_dim;
  }

  /// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization.
  static NetParams init(std::size_t d, std::size_t h, std::size_t a,
                        std::uint64_t seed) {
    NetParams p(d, h, a);
    Rng rng(seed ^ 0x5ca1ab1e0ddba11ULL);
    auto fill = [&](std::size_t off, std::size_t count, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(double(fan_in));
      for (std::size_t i = 0; i < count; ++i)
        p.flat[off + i] = rng.uniform(-bound, bound);
    };
    fill(p.off_w1(), h * d, d);
    fill(p.off_b1(), h, d);
    fill(p.off_w2(), h * h, h);
    fill(p.off_b2(), h, h);
    fill(p.off_w3(), a * h, h);
    fill(p.off_b3(), a, h);
    fill(p.off_wv(), h, h);
    fill(p.off_bv(), 1, h);
    return p;
  }
};

struct PolicyOutput {
  std::vector<double> logits;
  std::vector<char> mask;
  std::vector<double> probs;      // exactly 0 on masked actions
  std::vector<double> log_probs;  // -inf sentinel on masked actions
  double value = 0.0;

  double entropy() const {
    double h = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (mask[i] && probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    return h;
  }
};

namespace detail {

struct TrunkCache {
  std::vector<double> a1, a2, logits;
  double value = 0.0;
};

inline void forward_trunk(const NetParams& p, const std::vector<double>& x,
                          TrunkCache& c) {
  if (x.size() != p.input_dim)
    throw ContractError("state width " + std::to_string(x.size()) +
                        " does not match network input " +
                        std::to_string(p.input_dim));
  const std::size_t d = p.input_dim, h = p.hidden_dim, a = p.action_dim;
  c.a1.assign(h, 0.0);
  c.a2.assign(h, 0.0);
  c.logits.assign(a, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    double z = p.flat[p.off_b1() + i];
    const double* row = &p.flat[p.off_w1() + i * d];
    for (std::size_t j = 0; j < d; ++j) z += row[j] * x[j];
    c.a1[i] = std::tanh(z);
  }
  for (std::size_t i = 0; i < h; ++i) {
    double z = p.flat[p.off_b2() + i];
    const double* row = &p.flat[p.off_w2() + i * h];
    for (std::size_t j = 0; j < h; ++j) z += row[j] * c.a1[j];
    c.a2[i] = std::tanh(z);
  }
  for (std::size_t i = 0; i < a; ++i) {
    double z = p.flat[p.off_b3() + i];
    const double* row = &p.flat[p.off_w3() + i * h];
    for (std::size_t j = 0; j < h; ++j) z += row[j] * c.a2[j];
    c.logits[i] = z;
  }
  double v = p.flat[p.off_bv()];
  for (std::size_t j = 0; j < h; ++j) v += p.flat[p.off_wv() + j] * c.a2[j];
  c.value = v;
}

/// Masked softmax over feasible logits only: masked entries never enter the
/// normalizer, so no non-finite intermediates arise.
inline void masked_softmax(const std::vector<double>& logits,
                           const std::vector<char>& mask,
                           std::vector<double>& probs,
                           std::vector<double>& log_probs) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double max_logit = neg_inf;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i] && logits[i] > max_logit) max_logit = logits[i];
  if (max_logit == neg_inf)
    throw ContractError("masked softmax needs at least one feasible action");
  double z = 0.0;
  probs.assign(logits.size(), 0.0);
  log_probs.assign(logits.size(), neg_inf);
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) z += std::exp(logits[i] - max_logit);
  const double log_z = std::log(z);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    log_probs[i] = logits[i] - max_logit - log_z;
    probs[i] = std::exp(log_probs[i]);
  }
}

/// Accumulate parameter gradients from per-logit gradients g_z and the value
/// gradient dv for one sample. `grads` shares NetParams' layout.
inline void backprop_sample(const NetParams& p, const std::vector<double>& x,
                            const TrunkCache& c, const std::vector<double>& gz,
                            double dv, NetParams& grads) {
  const std::size_t d = p.input_dim, h = p.hidden_dim, a = p.action_dim;
  std::vector<double> da2(h, 0.0);
  for (std::size_t i = 0; i < a; ++i) {
    if (gz[i] == 0.0) continue;
    double* row = &grads.flat[grads.off_w3() + i * h];
    for (std::size_t j = 0; j < h; ++j) {
      row[j] += gz[i] * c.a2[j];
      da2[j] += gz[i] * p.w3(i, j);
    }
    grads.flat[grads.off_b3() + i] += gz[i];
  }
  if (dv != 0.0) {
    for (std::size_t j = 0; j < h; ++j) {
      grads.flat[grads.off_wv() + j] += dv * c.a2[j];
      da2[j] += dv * p.flat[p.off_wv() + j];
    }
    grads.flat[grads.off_bv()] += dv;
  }
  std::vector<double> dz2(h), da1(h, 0.0);
  for (std::size_t i = 0; i < h; ++i)
    dz2[i] = da2[i] * (1.0 - c.a2[i] * c.a2[i]);
  for (std::size_t i = 0; i < h; ++i) {
    if (dz2[i] == 0.0) continue;
    double* row = &grads.flat[grads.off_w2() + i * h];
    for (std::size_t j = 0; j < h; ++j) {
      row[j] += dz2[i] * c.a1[j];
      da1[j] += dz2[i] * p.w2(i, j);
    }
    grads.flat[grads.off_b2() + i] += dz2[i];
  }
  for (std::size_t i = 0; i < h; ++i) {
    const double dz1 = da1[i] * (1.0 - c.a1[i] * c.a1[i]);
    if (dz1 == 0.0) continue;
    double* row = &grads.flat[grads.off_w1() + i * d];
    for (std::size_t j = 0; j < d; ++j) row[j] += dz1 * x[j];
    grads.flat[grads.off_b1() + i] += dz1;
  }
}

}  // namespace detail

inline PolicyOutput forward_policy(const NetParams& p,
                                   const std::vector<double>& state,
                                   const std::vector<char>& mask) {
  if (mask.size() != p.action_dim)
    throw ContractError("mask width does not match the action grid");
  detail::TrunkCache c;
  detail::forward_trunk(p, state, c);
  PolicyOutput out;
  out.logits = c.logits;
  out.mask = mask;
  detail::masked_softmax(c.logits, mask, out.probs, out.log_probs);
  out.value = c.value;
  return out;
}

inline double forward_value(const NetParams& p,
                            const std::vector<double>& state) {
  detail::TrunkCache c;
  detail::forward_trunk(p, state, c);
  return c.value;
}

inline std::size_t sample_action(const PolicyOutput& out, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last_feasible = std::size_t(-1);
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    if (!out.mask[i]) continue;
    last_feasible = i;
    acc += out.probs[i];
    if (u < acc) return i;
  }
  if (last_feasible == std::size_t(-1))
    throw ContractError("cannot sample from an all-masked policy output");
  return last_feasible;
}

/// One training example; advantages and targets are fixed per batch from
/// the rollout snapshot.
struct TrainSample {
  std::vector<double> state;
  std::vector<char> mask;
  std::size_t action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
  std::array<double, kViolationTypes> violations = {0.0, 0.0, 0.0, 0.0};
};

struct LossConfig {
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  std::array<double, kViolationTypes> lambdas = {0.0, 0.0, 0.0, 0.0};
};

struct LossBreakdown {
  double total = 0.0;
  double clip = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double penalty = 0.0;
};

/// Composite objective: clipped PPO surrogate + value_coef * value MSE
/// - entropy_coef * entropy + sum_k lambda_k * mean(d_k * log pi). The last
/// term is the likelihood-ratio surrogate whose gradient estimates
/// grad E[d_k]; the duals are held constant inside a policy step.
inline LossBreakdown composite_loss(const NetParams& p,
                                    const std::vector<TrainSample>& batch,
                                    const LossConfig& cfg) {
  if (batch.empty()) throw ContractError("loss over an empty batch");
  for (double l : cfg.lambdas)
    if (l < 0.0) throw ContractError("negative dual multiplier");
  LossBreakdown out;
  detail::TrunkCache c;
  std::vector<double> probs, log_probs;
  for (const auto& s : batch) {
    detail::forward_trunk(p, s.state, c);
    detail::masked_softmax(c.logits, s.mask, probs, log_probs);
    const double lp = log_probs[s.action];
    if (!std::isfinite(lp))
      throw NumericError("log-probability of a masked or degenerate action");
    const double ratio = std::exp(lp - s.old_log_prob);
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    out.clip += -std::min(ratio * s.advantage, clipped * s.advantage);
    const double verr = c.value - s.value_target;
    out.value += verr * verr;
    double h = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (s.mask[i] && probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    out.entropy += h;
    double pen = 0.0;
    for (std::size_t k = 0; k < kViolationTypes; ++k)
      pen += cfg.lambdas[k] * s.violations[k];
    out.penalty += pen * lp;
  }
  const double n = double(batch.size());
  out.clip /= n;
  out.value /= n;
  out.entropy /= n;
  out.penalty /= n;
  out.total = out.clip + cfg.value_coef * out.value -
              cfg.entropy_coef * out.entropy + out.penalty;
  if (!std::isfinite(out.total))
    throw NumericError("composite loss is not finite");
  return out;
}

struct GradientResult {
  LossBreakdown loss;
  NetParams grads;  // same layout as the parameters
};

/// Analytic gradient of composite_loss w.r.t. every parameter.
inline GradientResult backward_gradients(const NetParams& p,
                                         const std::vector<TrainSample>& batch,
                                         const LossConfig& cfg) {
  if (batch.empty()) throw ContractError("gradient over an empty batch");
  for (double l : cfg.lambdas)
    if (l < 0.0) throw ContractError("negative dual multiplier");
  GradientResult out;
  out.grads = NetParams(p.input_dim, p.hidden_dim, p.action_dim);
  detail::TrunkCache c;
  std::vector<double> probs, log_probs, gz;
  for (const auto& s : batch) {
    detail::forward_trunk(p, s.state, c);
    detail::masked_softmax(c.logits, s.mask, probs, log_probs);
    const double lp = log_probs[s.action];
    if (!std::isfinite(lp))
      throw NumericError("log-probability of a masked or degenerate action");
    const double ratio = std::exp(lp - s.old_log_prob);
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
    const double surr_unclipped = ratio * s.advantage;
    const double surr_clipped = clipped * s.advantage;
    out.loss.clip += -std::min(surr_unclipped, surr_clipped);
    // min() takes the unclipped branch on ties, so the clip gradient is
    // -ratio * advantage when active and exactly 0 when the clip binds.
    const double g_lp_clip =
        surr_unclipped <= surr_clipped ? -ratio * s.advantage : 0.0;

    double h = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (s.mask[i] && probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    out.loss.entropy += h;

    double pen_weight = 0.0;
    for (std::size_t k = 0; k < kViolationTypes; ++k)
      pen_weight += cfg.lambdas[k] * s.violations[k];
    out.loss.penalty += pen_weight * lp;

    const double verr = c.value - s.value_target;
    out.loss.value += verr * verr;
    const double dv = 2.0 * cfg.value_coef * verr;

    gz.assign(p.action_dim, 0.0);
    const double g_lp = g_lp_clip + pen_weight;
    for (std::size_t i = 0; i < p.action_dim; ++i) {
      if (!s.mask[i]) continue;
      double g = -g_lp * probs[i];
      if (i == s.action) g += g_lp;
      // d(-entropy_coef * H)/dz_i = entropy_coef * p_i * (log p_i + H)
      if (probs[i] > 0.0)
        g += cfg.entropy_coef * probs[i] * (std::log(probs[i]) + h);
      gz[i] = g;
    }
    detail::backprop_sample(p, s.state, c, gz, dv, out.grads);
  }
  const double n = double(batch.size());
  out.loss.clip /= n;
  out.loss.value /= n;
  out.loss.entropy /= n;
  out.loss.penalty /= n;
  out.loss.total = out.loss.clip + cfg.value_coef * out.loss.value -
                   cfg.entropy_coef * out.loss.entropy + out.loss.penalty;
  for (double& g : out.grads.flat) g /= n;
  if (!std::isfinite(out.loss.total))
    throw NumericError("composite loss is not finite");
  for (double g : out.grads.flat)
    if (!std::isfinite(g)) throw NumericError("non-finite gradient entry");
  return out;
}

/// Gradient of log pi(action | state) alone; building block for exact
/// score-function expectations in the tests.
inline NetParams logprob_gradient(const NetParams& p,
                                  const std::vector<double>& state,
                                  const std::vector<char>& mask,
                                  std::size_t action) {
  detail::TrunkCache c;
  detail::forward_trunk(p, state, c);
  std::vector<double> probs, log_probs;
  detail::masked_softmax(c.logits, mask, probs, log_probs);
  std::vector<double> gz(p.action_dim, 0.0);
  for (std::size_t i = 0; i < p.action_dim; ++i) {
    if (!mask[i]) continue;
    gz[i] = (i == action ? 1.0 : 0.0) - probs[i];
  }
  NetParams grads(p.input_dim, p.hidden_dim, p.action_dim);
  detail::backprop_sample(p, state, c, gz, 0.0, grads);
  return grads;
}

/// Central finite differences over every parameter; returns the maximum
/// relative disagreement with the analytic gradient.
inline double gradient_check(const NetParams& params,
                             const std::vector<TrainSample>& batch,
                             const LossConfig& cfg, double fd_step = 1e-5) {
  const auto analytic = backward_gradients(params, batch, cfg);
  NetParams probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.flat.size(); ++i) {
    const double saved = probe.flat[i];
    probe.flat[i] = saved + fd_step;
    const double up = composite_loss(probe, batch, cfg).total;
    probe.flat[i] = saved - fd_step;
    const double down = composite_loss(probe, batch, cfg).total;
    probe.flat[i] = saved;
    const double fd = (up - down) / (2.0 * fd_step);
    const double a = analytic.grads.flat[i];
    const double denom = std::max({1e-6, std::fabs(a), std::fabs(fd)});
    worst = std::max(worst, std::fabs(a - fd) / denom);
  }
  return worst;
}

}  // namespace clauselens
