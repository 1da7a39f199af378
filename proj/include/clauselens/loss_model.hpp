#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clauselens/config.hpp"
#include "clauselens/errors.hpp"
#include "clauselens/rng.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

/// Annual catastrophe loss process for one region: Poisson event counts,
/// severities drawn from a Bernoulli mixture of a log-normal body and a
/// Pareto tail. Monetary units are millions.
struct RegionLossParams {
  double event_rate = 1.0;       // Poisson events / year
  double lognormal_mu = 0.0;     // log-space location of the body
  double lognormal_sigma = 1.0;  // log-space scale, > 0
  double pareto_alpha = 2.5;     // tail index, > 1 so the mean exists
  double pareto_xm = 2.0;        // tail scale, > 0
  double tail_probability = 0.05;
};

inline void validate_loss_params(const RegionLossParams& p) {
  if (p.event_rate < 0.0) throw DomainError("event_rate must be >= 0");
  if (!(p.lognormal_sigma > 0.0))
    throw DomainError("lognormal_sigma must be > 0");
  if (!(p.pareto_alpha > 1.0)) throw DomainError("pareto_alpha must be > 1");
  if (!(p.pareto_xm > 0.0)) throw DomainError("pareto_xm must be > 0");
  if (p.tail_probability < 0.0 || p.tail_probability > 1.0)
    throw DomainError("tail_probability outside [0, 1]");
}

struct AnnualLossSample {
  std::uint32_t event_count = 0;
  std::vector<double> severities;
  double total = 0.0;
};

inline std::uint32_t sample_event_count(double rate, Rng& rng) {
  return rng.poisson(rate);
}

/// One event's loss: tail_probability chance of a Pareto draw, log-normal
/// otherwise, then scaled by (1 + exposure_score).
inline double sample_severity(const RegionLossParams& p, double exposure_score,
                              Rng& rng) {
  validate_loss_params(p);
  double base = rng.bernoulli(p.tail_probability)
                    ? rng.pareto(p.pareto_alpha, p.pareto_xm)
                    : rng.lognormal(p.lognormal_mu, p.lognormal_sigma);
  return (1.0 + exposure_score) * base;
}

inline AnnualLossSample simulate_annual_loss(const RegionLossParams& p,
                                             double exposure_score, Rng& rng) {
  validate_loss_params(p);
  AnnualLossSample out;
  out.event_count = sample_event_count(p.event_rate, rng);
  out.severities.reserve(out.event_count);
  for (std::uint32_t i = 0; i < out.event_count; ++i) {
    double s = sample_severity(p, exposure_score, rng);
    out.severities.push_back(s);
    out.total += s;
  }
  return out;
}

// --- closed forms over the unscaled severity mixture -----------------------
//
// These drive deterministic premium pricing and the moment oracles in the
// tests. All take the unscaled mixture X; callers fold in the exposure
// factor c = 1 + exposure_score via E[f(cX)] identities.

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// E[X] of the severity mixture.
inline double severity_mean(const RegionLossParams& p) {
  double body = std::exp(p.lognormal_mu +
                         0.5 * p.lognormal_sigma * p.lognormal_sigma);
  double tail = p.pareto_alpha * p.pareto_xm / (p.pareto_alpha - 1.0);
  return (1.0 - p.tail_probability) * body + p.tail_probability * tail;
}

/// P(X > x) of the severity mixture.
inline double severity_survival(const RegionLossParams& p, double x) {
  if (x <= 0.0) return 1.0;
  double body =
      1.0 - normal_cdf((std::log(x) - p.lognormal_mu) / p.lognormal_sigma);
  double tail =
      x <= p.pareto_xm ? 1.0 : std::pow(p.pareto_xm / x, p.pareto_alpha);
  return (1.0 - p.tail_probability) * body + p.tail_probability * tail;
}

/// E[(X - d)+] for the log-normal component alone.
inline double lognormal_excess_mean(double mu, double sigma, double d) {
  double mean = std::exp(mu + 0.5 * sigma * sigma);
  if (d <= 0.0) return mean - d;
  double z = (std::log(d) - mu) / sigma;
  return mean * normal_cdf(sigma - z) - d * (1.0 - normal_cdf(z));
}

/// E[(X - d)+] for the Pareto component alone.
inline double pareto_excess_mean(double alpha, double xm, double d) {
  if (d <= xm) return xm * alpha / (alpha - 1.0) - d;
  return std::pow(xm / d, alpha) * d / (alpha - 1.0);
}

/// E[(X - d)+] of the severity mixture.
inline double severity_excess_mean(const RegionLossParams& p, double d) {
  double body = lognormal_excess_mean(p.lognormal_mu, p.lognormal_sigma, d);
  double tail = pareto_excess_mean(p.pareto_alpha, p.pareto_xm, d);
  return (1.0 - p.tail_probability) * body + p.tail_probability * tail;
}

/// E[min(X, d)] of the severity mixture; exact because both components
/// have closed-form excess means.
inline double severity_limited_mean(const RegionLossParams& p, double d) {
  if (d <= 0.0) return 0.0;
  return severity_mean(p) - severity_excess_mean(p, d);
}

/// Mean annual total: event_rate * E[severity] * (1 + exposure_score).
inline double compound_annual_mean(const RegionLossParams& p,
                                   double exposure_score) {
  return p.event_rate * severity_mean(p) * (1.0 + exposure_score);
}

// --- configuration ----------------------------------------------------------

inline RegionLossParams loss_params_from(const ConfigFile& cfg,
                                         Jurisdiction j) {
  const std::string section = "loss." + to_string(j);
  RegionLossParams p;
  if (cfg.has(section, "event_rate"))
    p.event_rate = cfg.get_double(section, "event_rate");
  if (cfg.has(section, "lognormal_mu"))
    p.lognormal_mu = cfg.get_double(section, "lognormal_mu");
  if (cfg.has(section, "lognormal_sigma"))
    p.lognormal_sigma = cfg.get_double(section, "lognormal_sigma");
  if (cfg.has(section, "pareto_alpha"))
    p.pareto_alpha = cfg.get_double(section, "pareto_alpha");
  if (cfg.has(section, "pareto_xm"))
    p.pareto_xm = cfg.get_double(section, "pareto_xm");
  if (cfg.has(section, "tail_probability"))
    p.tail_probability = cfg.get_double(section, "tail_probability");
  validate_loss_params(p);
  return p;
}

}  // namespace clauselens
