#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "clauselens/errors.hpp"
#include "clauselens/loss_model.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

namespace detail {

/// Adaptive Simpson on [a, b]. Used for per-event layer expectations where
/// the integrand is the severity survival function.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0)
    throw NumericError("layer quadrature did not converge");
  if (std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole,
                          std::max(std::fabs(whole) * tol, 1e-12), 48);
}

}  // namespace detail

/// Discretized compound-Poisson aggregate for one region: severity mixture
/// discretized on a step-h grid (mean matched through limited expected
/// values), aggregate pmf via the Panjer recursion. Severities are capped at
/// the grid top; stop-loss values with attachment + limit inside the grid
/// are unaffected because a single capped event already saturates the layer.
class AggregateTable {
 public:
  AggregateTable() = default;

  AggregateTable(const RegionLossParams& params, double top, double step)
      : step_(step) {
    validate_loss_params(params);
    if (!(top > 0.0) || !(step > 0.0))
      throw DomainError("aggregate table needs positive top and step");
    const auto severity_cells = std::size_t(std::ceil(top / step)) + 1;
    top_ = double(severity_cells - 1) * step;

    // Severity mass per cell from limited expected values; preserves the
    // capped mean.
    std::vector<double> f(severity_cells, 0.0);
    auto lev = [&](double d) { return severity_limited_mean(params, d); };
    f[0] = 1.0 - lev(step) / step;
    double assigned = f[0];
    for (std::size_t j = 1; j + 1 < severity_cells; ++j) {
      double d = double(j) * step;
      f[j] = (2.0 * lev(d) - lev(d - step) - lev(d + step)) / step;
      if (f[j] < 0.0) f[j] = 0.0;  // clamp rounding noise
      assigned += f[j];
    }
    f[severity_cells - 1] = std::max(0.0, 1.0 - assigned);

    // Panjer recursion, truncated at the grid top; mass that would land
    // above it is tracked as `residual_` and pays full limits.
    const double lambda = params.event_rate;
    pmf_.assign(severity_cells, 0.0);
    pmf_[0] = std::exp(-lambda * (1.0 - f[0]));
    double mass = pmf_[0];
    for (std::size_t k = 1; k < pmf_.size(); ++k) {
      double acc = 0.0;
      std::size_t j_max = std::min(k, severity_cells - 1);
      for (std::size_t j = 1; j <= j_max; ++j)
        acc += double(j) * f[j] * pmf_[k - j];
      pmf_[k] = lambda / double(k) * acc;
      mass += pmf_[k];
    }
    residual_ = std::max(0.0, 1.0 - mass);
  }

  bool empty() const { return pmf_.empty(); }
  double top() const { return top_; }

  /// E[min(limit, (T - attachment)+)] for the aggregate T.
  double stop_loss(double attachment, double limit) const {
    if (limit <= 0.0) return 0.0;
    if (attachment + limit > top_ + 1e-9)
      throw DomainError("aggregate layer extends beyond the priced envelope");
    double acc = 0.0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) {
      double t = double(k) * step_;
      acc += pmf_[k] * std::min(limit, std::max(0.0, t - attachment));
    }
    return acc + residual_ * limit;
  }

 private:
  double step_ = 0.0;
  double top_ = 0.0;
  double residual_ = 0.0;
  std::vector<double> pmf_;
};

/// Deterministic expected-ceded-loss engine per treaty type. Quota share is
/// closed form, per-event layers integrate the severity survival function
/// (relative tolerance 1e-4 or better), aggregate layers read the cached
/// Panjer table of their region.
class PricingModel {
 public:
  PricingModel(std::map<Jurisdiction, RegionLossParams> params,
               const ActionGrid& grid, double premium_loading,
               double aggregate_step = 0.01)
      : params_(std::move(params)), loading_(premium_loading) {
    double envelope = 0.0;
    for (const auto& a : grid.actions())
      if (a.treaty_type != TreatyType::QS)
        envelope = std::max(envelope, a.attachment + a.limit);
    envelope = std::max(envelope, aggregate_step);
    for (const auto& [jur, p] : params_)
      tables_[jur] = AggregateTable(p, envelope * 1.000001 + aggregate_step,
                                    aggregate_step);
  }

  const RegionLossParams& region(Jurisdiction j) const {
    auto it = params_.find(j);
    if (it == params_.end())
      throw ConfigError("no loss parameters for jurisdiction " + to_string(j));
    return it->second;
  }

  double expected_ceded(const CedentRequest& req,
                        const TreatyAction& action) const {
    const RegionLossParams& p = region(req.jurisdiction);
    const double c = 1.0 + req.exposure_score;
    switch (action.treaty_type) {
      case TreatyType::QS:
        return action.quota_share * p.event_rate * c * severity_mean(p);
      case TreatyType::CatXL: {
        if (action.limit <= 0.0) return 0.0;
        double lo = action.attachment / c;
        double hi = (action.attachment + action.limit) / c;
        double layer = detail::integrate(
            [&](double t) { return severity_survival(p, t); }, lo, hi, 1e-6);
        return p.event_rate * c * layer;
      }
      case TreatyType::AggXL: {
        if (action.limit <= 0.0) return 0.0;
        const auto& table = tables_.at(req.jurisdiction);
        return c * table.stop_loss(action.attachment / c, action.limit / c);
      }
    }
    throw DomainError("unknown treaty type in pricing");
  }

  /// Premium = (1 + loading) * expected ceded loss.
  double premium(const CedentRequest& req, const TreatyAction& action) const {
    return (1.0 + loading_) * expected_ceded(req, action);
  }

  const AggregateTable& aggregate_table(Jurisdiction j) const {
    return tables_.at(j);
  }

 private:
  std::map<Jurisdiction, RegionLossParams> params_;
  std::map<Jurisdiction, AggregateTable> tables_;
  double loading_ = 0.0;
};

}  // namespace clauselens
