#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "clauselens/config.hpp"
#include "clauselens/errors.hpp"

namespace clauselens {

enum class Jurisdiction { UsFl, UsCa, EuDe, Au, Sg };
enum class LineOfBusiness { PropertyCat, Casualty };
enum class TreatyType { QS, CatXL, AggXL };

constexpr std::array<Jurisdiction, 5> kAllJurisdictions = {
    Jurisdiction::UsFl, Jurisdiction::UsCa, Jurisdiction::EuDe,
    Jurisdiction::Au, Jurisdiction::Sg};
constexpr std::array<LineOfBusiness, 2> kAllLines = {
    LineOfBusiness::PropertyCat, LineOfBusiness::Casualty};
constexpr std::array<TreatyType, 3> kAllTreatyTypes = {
    TreatyType::QS, TreatyType::CatXL, TreatyType::AggXL};

inline std::string to_string(Jurisdiction j) {
  switch (j) {
    case Jurisdiction::UsFl: return "US-FL";
    case Jurisdiction::UsCa: return "US-CA";
    case Jurisdiction::EuDe: return "EU-DE";
    case Jurisdiction::Au: return "AU";
    case Jurisdiction::Sg: return "SG";
  }
  throw DomainError("unknown jurisdiction tag");
}

inline Jurisdiction jurisdiction_from_string(const std::string& s) {
  for (auto j : kAllJurisdictions)
    if (to_string(j) == s) return j;
  throw ParseError("unknown jurisdiction '" + s + "'");
}

inline std::string to_string(LineOfBusiness l) {
  switch (l) {
    case LineOfBusiness::PropertyCat: return "property-cat";
    case LineOfBusiness::Casualty: return "casualty";
  }
  throw DomainError("unknown line-of-business tag");
}

inline LineOfBusiness line_from_string(const std::string& s) {
  for (auto l : kAllLines)
    if (to_string(l) == s) return l;
  throw ParseError("unknown line of business '" + s + "'");
}

inline std::string to_string(TreatyType t) {
  switch (t) {
    case TreatyType::QS: return "QS";
    case TreatyType::CatXL: return "CatXL";
    case TreatyType::AggXL: return "AggXL";
  }
  throw DomainError("unknown treaty type tag");
}

inline TreatyType treaty_type_from_string(const std::string& s) {
  for (auto t : kAllTreatyTypes)
    if (to_string(t) == s) return t;
  throw ParseError("unknown treaty type '" + s + "'");
}

/// A cedent's structured treaty request; the numeric part of the policy
/// observation. Monetary fields are in millions.
struct CedentRequest {
  Jurisdiction jurisdiction = Jurisdiction::UsFl;
  LineOfBusiness line_of_business = LineOfBusiness::PropertyCat;
  double insured_value = 0.0;
  double exposure_score = 0.0;        // dimensionless, [0, 1]
  double historical_loss_ratio = 0.0;
  TreatyType requested_treaty_type = TreatyType::QS;
  double requested_limit = 0.0;
  double requested_deductible = 0.0;
};

/// One cell of the discrete quoting grid. Exactly one family of fields is
/// active: quota_share for QS, attachment/limit for the XL types.
struct TreatyAction {
  TreatyType treaty_type = TreatyType::QS;
  double quota_share = 0.0;
  double attachment = 0.0;
  double limit = 0.0;

  bool operator==(const TreatyAction&) const = default;
};

/// Capital the reinsurer exposes by writing the treaty: the ceded share of
/// the insured value for QS, the layer limit for the XL types.
inline double committed_limit(const TreatyAction& a, const CedentRequest& r) {
  return a.treaty_type == TreatyType::QS ? a.quota_share * r.insured_value
                                         : a.limit;
}

inline std::vector<std::string> validate_action(const TreatyAction& a) {
  std::vector<std::string> bad;
  if (a.quota_share < 0.0 || a.quota_share > 1.0)
    bad.push_back("quota_share outside [0, 1]");
  if (a.attachment < 0.0) bad.push_back("attachment negative");
  if (a.limit < 0.0) bad.push_back("limit negative");
  if (a.treaty_type == TreatyType::QS) {
    if (a.attachment != 0.0 || a.limit != 0.0)
      bad.push_back("QS action carries XL fields");
  } else if (a.quota_share != 0.0) {
    bad.push_back("XL action carries quota_share");
  }
  return bad;
}

struct GridConfig {
  std::vector<double> quota_share_levels = {0.1, 0.2, 0.3, 0.4, 0.5,
                                            0.6, 0.7, 0.8, 0.9};
  std::vector<double> attachment_levels = {2.0, 5.0, 10.0, 20.0};
  std::vector<double> limit_levels = {2.0, 5.0, 10.0};
};

/// Discretized action space with deterministic ordering: QS actions by
/// quota share, then each XL type by (attachment, limit).
class ActionGrid {
 public:
  explicit ActionGrid(std::vector<TreatyAction> actions)
      : actions_(std::move(actions)) {}

  const std::vector<TreatyAction>& actions() const { return actions_; }
  const TreatyAction& at(std::size_t id) const {
    if (id >= actions_.size())
      throw DomainError("action id " + std::to_string(id) + " out of range");
    return actions_[id];
  }
  std::size_t size() const { return actions_.size(); }

  /// Index of an exact action, or npos when absent.
  static constexpr std::size_t npos = std::size_t(-1);
  std::size_t find(const TreatyAction& a) const {
    for (std::size_t i = 0; i < actions_.size(); ++i)
      if (actions_[i] == a) return i;
    return npos;
  }

 private:
  std::vector<TreatyAction> actions_;
};

inline ActionGrid build_action_grid(const GridConfig& cfg) {
  if (cfg.quota_share_levels.empty() || cfg.attachment_levels.empty() ||
      cfg.limit_levels.empty())
    throw ConfigError("action grid: every dimension needs at least one level");
  for (double q : cfg.quota_share_levels)
    if (q < 0.0 || q > 1.0)
      throw ConfigError("action grid: quota share level outside [0, 1]");

  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto qs = sorted(cfg.quota_share_levels);
  const auto att = sorted(cfg.attachment_levels);
  const auto lim = sorted(cfg.limit_levels);

  std::vector<TreatyAction> actions;
  actions.reserve(qs.size() + 2 * att.size() * lim.size());
  for (double q : qs)
    actions.push_back({TreatyType::QS, q, 0.0, 0.0});
  for (TreatyType t : {TreatyType::CatXL, TreatyType::AggXL})
    for (double a : att)
      for (double l : lim) actions.push_back({t, 0.0, a, l});

  for (std::size_t i = 0; i + 1 < actions.size(); ++i)
    for (std::size_t j = i + 1; j < actions.size(); ++j)
      if (actions[i] == actions[j])
        throw ConfigError("action grid: duplicate action at level lists");
  return ActionGrid(std::move(actions));
}

inline GridConfig grid_config_from(const ConfigFile& cfg) {
  GridConfig g;
  if (cfg.has("domain", "quota_share_levels"))
    g.quota_share_levels = cfg.get_doubles("domain", "quota_share_levels");
  if (cfg.has("domain", "attachment_levels"))
    g.attachment_levels = cfg.get_doubles("domain", "attachment_levels");
  if (cfg.has("domain", "limit_levels"))
    g.limit_levels = cfg.get_doubles("domain", "limit_levels");
  return g;
}

/// Min-max bounds for the continuous request fields. Values are clipped
/// into the declared range before scaling, so encodings stay in [0, 1]
/// without dataset statistics.
struct FeatureBounds {
  double insured_value_min = 10.0, insured_value_max = 100.0;
  double loss_ratio_min = 0.0, loss_ratio_max = 3.0;
  double limit_min = 0.0, limit_max = 20.0;
  double deductible_min = 0.0, deductible_max = 10.0;
};

inline FeatureBounds feature_bounds_from(const ConfigFile& cfg) {
  FeatureBounds b;
  auto pair = [&](const char* key, double& lo, double& hi) {
    if (!cfg.has("domain", key)) return;
    auto v = cfg.get_doubles("domain", key);
    if (v.size() != 2 || v[0] >= v[1])
      throw ConfigError(std::string("[domain] ") + key +
                        " must be 'min,max' with min < max");
    lo = v[0];
    hi = v[1];
  };
  pair("insured_value_bounds", b.insured_value_min, b.insured_value_max);
  pair("loss_ratio_bounds", b.loss_ratio_min, b.loss_ratio_max);
  pair("limit_bounds", b.limit_min, b.limit_max);
  pair("deductible_bounds", b.deductible_min, b.deductible_max);
  return b;
}

/// Fixed-width numeric encoding of a request plus a layout descriptor.
struct FeatureVector {
  std::vector<double> values;
  struct Block {
    std::string name;
    std::size_t offset;
    std::size_t width;
  };
  std::vector<Block> layout;

  std::size_t size() const { return values.size(); }
};

inline std::vector<std::string> validate_request(const CedentRequest& r) {
  std::vector<std::string> bad;
  if (!(r.insured_value > 0.0)) bad.push_back("insured_value must be > 0");
  if (r.exposure_score < 0.0 || r.exposure_score > 1.0)
    bad.push_back("exposure_score outside [0, 1]");
  if (r.historical_loss_ratio < 0.0)
    bad.push_back("historical_loss_ratio negative");
  if (r.requested_limit < 0.0) bad.push_back("requested_limit negative");
  if (r.requested_deductible < 0.0)
    bad.push_back("requested_deductible negative");
  return bad;
}

namespace detail {
inline double minmax01(double v, double lo, double hi) {
  double clipped = std::clamp(v, lo, hi);
  return (clipped - lo) / (hi - lo);
}
}  // namespace detail

/// One-hot jurisdiction / line / requested-type blocks followed by min-max
/// scaled continuous fields. Layout is identical for every request, so the
/// policy input width is constant across a run.
inline FeatureVector encode_cedent_features(const CedentRequest& req,
                                            const FeatureBounds& bounds) {
  {
    auto bad = validate_request(req);
    if (!bad.empty()) throw DomainError("invalid request: " + bad.front());
  }
  const auto j = static_cast<std::size_t>(req.jurisdiction);
  const auto l = static_cast<std::size_t>(req.line_of_business);
  const auto t = static_cast<std::size_t>(req.requested_treaty_type);
  if (j >= kAllJurisdictions.size() || l >= kAllLines.size() ||
      t >= kAllTreatyTypes.size())
    throw DomainError("encoding error: enum tag out of range");

  FeatureVector fv;
  auto block = [&](const std::string& name, std::size_t width) {
    fv.layout.push_back({name, fv.values.size(), width});
    fv.values.insert(fv.values.end(), width, 0.0);
  };
  block("jurisdiction", kAllJurisdictions.size());
  block("line_of_business", kAllLines.size());
  block("requested_treaty_type", kAllTreatyTypes.size());
  block("continuous", 5);

  fv.values[j] = 1.0;
  fv.values[kAllJurisdictions.size() + l] = 1.0;
  fv.values[kAllJurisdictions.size() + kAllLines.size() + t] = 1.0;

  const std::size_t c = fv.layout.back().offset;
  fv.values[c + 0] = detail::minmax01(req.insured_value,
                                      bounds.insured_value_min,
                                      bounds.insured_value_max);
  fv.values[c + 1] = detail::minmax01(req.exposure_score, 0.0, 1.0);
  fv.values[c + 2] = detail::minmax01(req.historical_loss_ratio,
                                      bounds.loss_ratio_min,
                                      bounds.loss_ratio_max);
  fv.values[c + 3] =
      detail::minmax01(req.requested_limit, bounds.limit_min, bounds.limit_max);
  fv.values[c + 4] = detail::minmax01(req.requested_deductible,
                                      bounds.deductible_min,
                                      bounds.deductible_max);
  return fv;
}

}  // namespace clauselens
