#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clauselens/clause_store.hpp"
#include "clauselens/market_env.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

/// Clause-grounded explanation of one quote. Every cited id comes from the
/// episode's retrieved set and every number in the text equals a recorded
/// attribute exactly.
struct Justification {
  std::string text;
  std::vector<std::string> cited_clause_ids;
  std::vector<std::pair<std::string, double>> cited_quote_attributes;
};

namespace detail {

/// Minimal decimal rendering: no exponent, no trailing zeros.
inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline std::string format_percent(double fraction) {
  return format_number(fraction * 100.0) + "%";
}

inline std::string format_money(double millions) {
  return format_number(millions) + "M";
}

inline std::string kind_phrase(const ConstraintPredicate& p) {
  switch (p.kind) {
    case PredicateKind::MaxQuotaShare:
      return "quota share to at most " + format_percent(p.threshold);
    case PredicateKind::MinAttachment:
      return "attachment to at least " + format_money(p.threshold);
    case PredicateKind::MaxLimit:
      return "layer limit to at most " + format_money(p.threshold);
    case PredicateKind::MaxPremiumRatio:
      return "premium to at most " + format_percent(p.threshold) +
             " of insured value";
    case PredicateKind::MinCapitalRatio:
      return "committed limit to at most " + format_number(1.0 / p.threshold) +
             "x capital";
  }
  throw DomainError("unknown predicate kind");
}

inline std::string action_terms(const TreatyAction& a) {
  if (a.treaty_type == TreatyType::QS)
    return format_percent(a.quota_share) + " quota share";
  return format_money(a.limit) + " xs " + format_money(a.attachment);
}

/// Numeric claims in a rendered sentence: digit runs with optional decimal
/// point and a '%' or 'M' unit marker, returned in the exact spelling used
/// by the renderer. Digits embedded in identifiers (preceded by a letter,
/// digit or hyphen, as in clause ids) do not count.
inline std::vector<std::pair<std::string, std::string>> numeric_claims(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool in_identifier =
        i > 0 && (std::isalnum(static_cast<unsigned char>(text[i - 1])) ||
                  text[i - 1] == '-');
    if (!in_identifier &&
        std::isdigit(static_cast<unsigned char>(text[i]))) {
      std::size_t j = i;
      bool dot = false;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) ||
              (text[j] == '.' && !dot))) {
        if (text[j] == '.') dot = true;
        ++j;
      }
      std::string unit = "plain";
      if (j < text.size() && text[j] == '%') unit = "percent";
      if (j < text.size() && text[j] == 'M') unit = "money";
      out.emplace_back(unit, text.substr(i, j - i));
      i = j + (unit != "plain" ? 1 : 0);
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace detail

/// Render the deterministic justification: one sentence per retrieved
/// predicate the quoted action is bound by and satisfies (in retrieval rank
/// order), then the action sentence. Violated predicates are never cited as
/// satisfied, so fallback quotes stay truthful.
inline Justification generate_justification(
    const EpisodeRecord& record, const std::vector<const Clause*>& clauses,
    const ActionGrid& grid, double capital_base) {
  const TreatyAction& action = grid.at(record.action_id);
  Justification j;
  MaskContext ctx{[&](const TreatyAction&) { return record.premium; },
                  capital_base};
  for (const Clause* c : clauses) {
    if (!c->predicate) continue;
    const auto& pred = *c->predicate;
    if (!predicate_applies(pred, record.request, action)) continue;
    if (!predicate_satisfied(pred, record.request, action, ctx)) continue;
    j.text += "This quote satisfies " + to_string(c->source) + " clause " +
              c->id + " limiting " + detail::kind_phrase(pred) + ". ";
    j.cited_clause_ids.push_back(c->id);
    j.cited_quote_attributes.emplace_back(to_string(pred.kind), pred.threshold);
  }
  j.text += "A " + detail::action_terms(action) + " " +
            to_string(action.treaty_type) + " treaty limits retention exposure.";
  if (action.treaty_type == TreatyType::QS) {
    j.cited_quote_attributes.emplace_back("quota_share", action.quota_share);
  } else {
    j.cited_quote_attributes.emplace_back("attachment", action.attachment);
    j.cited_quote_attributes.emplace_back("limit", action.limit);
  }
  return j;
}

struct FidelityResult {
  bool pass = true;
  std::vector<std::string> reasons;

  void fail(const std::string& why) {
    pass = false;
    reasons.push_back(why);
  }
};

/// Rule-based fidelity: cited ids must come from the retrieved set, every
/// number in the text must equal a quoted attribute, and the action must
/// satisfy every cited predicate.
inline FidelityResult fidelity_check(const Justification& j,
                                     const EpisodeRecord& record,
                                     const std::vector<const Clause*>& clauses,
                                     const ActionGrid& grid,
                                     double capital_base) {
  FidelityResult res;
  const TreatyAction& action = grid.at(record.action_id);

  std::map<std::string, const Clause*> retrieved;
  for (const Clause* c : clauses) retrieved[c->id] = c;
  for (const auto& id : j.cited_clause_ids)
    if (!retrieved.count(id))
      res.fail("attribution: cited clause '" + id + "' was not retrieved");

  // Legitimate numeric claims: the action's own terms plus cited thresholds,
  // spelled exactly as the renderer spells them.
  std::vector<std::pair<std::string, std::string>> allowed;
  if (action.treaty_type == TreatyType::QS) {
    allowed.emplace_back("percent",
                         detail::format_number(action.quota_share * 100.0));
  } else {
    allowed.emplace_back("money", detail::format_number(action.attachment));
    allowed.emplace_back("money", detail::format_number(action.limit));
  }
  for (const auto& id : j.cited_clause_ids) {
    auto it = retrieved.find(id);
    if (it == retrieved.end() || !it->second->predicate) continue;
    const auto& p = *it->second->predicate;
    switch (p.kind) {
      case PredicateKind::MaxQuotaShare:
      case PredicateKind::MaxPremiumRatio:
        allowed.emplace_back("percent",
                             detail::format_number(p.threshold * 100.0));
        break;
      case PredicateKind::MinAttachment:
      case PredicateKind::MaxLimit:
        allowed.emplace_back("money", detail::format_number(p.threshold));
        break;
      case PredicateKind::MinCapitalRatio:
        allowed.emplace_back("plain",
                             detail::format_number(1.0 / p.threshold));
        break;
    }
  }
  for (const auto& [unit, spelled] : detail::numeric_claims(j.text)) {
    bool ok = false;
    for (const auto& [au, av] : allowed)
      if (au == unit && av == spelled) ok = true;
    if (!ok)
      res.fail("numeric-mismatch: text claims " + spelled + " (" + unit +
               ") which matches no quote attribute");
  }

  MaskContext ctx{[&](const TreatyAction&) { return record.premium; },
                  capital_base};
  for (const auto& id : j.cited_clause_ids) {
    auto it = retrieved.find(id);
    if (it == retrieved.end()) continue;
    const Clause* c = it->second;
    if (c->predicate &&
        !predicate_satisfied(*c->predicate, record.request, action, ctx))
      res.fail("predicate: quoted action violates cited clause '" + id + "'");
  }
  return res;
}

// --- text metrics -----------------------------------------------------------

namespace detail {
inline std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + std::ptrdiff_t(i),
                                      tokens.begin() + std::ptrdiff_t(i + n))];
  return counts;
}
}  // namespace detail

/// BLEU with modified n-gram precision, brevity penalty, and add-1 smoothing
/// of zero counts for n >= 2; orders the candidate is too short to form are
/// skipped.
inline double bleu(const std::string& candidate, const std::string& reference,
                   std::size_t max_n = 4) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  if (ref.empty()) throw DomainError("bleu needs a non-empty reference");
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand_counts = detail::ngram_counts(cand, n);
    if (cand_counts.empty()) continue;
    const auto ref_counts = detail::ngram_counts(ref, n);
    double total = 0.0, matched = 0.0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double p;
    if (matched == 0.0) {
      if (n == 1) return 0.0;
      p = 1.0 / (total + 1.0);
    } else {
      p = matched / total;
    }
    log_sum += std::log(p);
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double geo_mean = std::exp(log_sum / double(orders));
  const double c = double(cand.size()), r = double(ref.size());
  const double brevity = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return brevity * geo_mean;
}

/// ROUGE-1 recall: clipped unigram overlap over the reference length.
inline double rouge1(const std::string& candidate,
                     const std::string& reference) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  if (ref.empty()) throw DomainError("rouge1 needs a non-empty reference");
  std::map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::map<std::string, int> cand_counts;
  for (const auto& t : cand) ++cand_counts[t];
  double overlap = 0.0;
  for (const auto& [tok, count] : cand_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  return overlap / double(ref.size());
}

}  // namespace clauselens
