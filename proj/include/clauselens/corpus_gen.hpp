#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "clauselens/clause_store.hpp"
#include "clauselens/justifier.hpp"
#include "clauselens/rng.hpp"

namespace clauselens {

/// Synthetic clause corpus plus the artifacts the evaluation harness needs:
/// per-scenario gold labels, reference justification texts, and a manifest
/// of per-source counts.
struct SyntheticCorpus {
  struct Scenario {
    Jurisdiction jurisdiction = Jurisdiction::UsFl;
    LineOfBusiness line = LineOfBusiness::PropertyCat;
    TreatyType treaty = TreatyType::QS;
    std::string key;
    std::vector<std::string> relevant;  // gold clause ids, ascending
  };

  std::vector<Clause> clauses;
  std::vector<Scenario> scenarios;
  std::vector<std::pair<std::string, std::string>> references;  // key -> text
  std::map<std::string, std::size_t> source_counts;
  std::uint64_t seed = 0;
  std::size_t scale = 0;
};

namespace corpus_detail {

// Corpus mix mirrors the production composition 3200:1100:800:600:900.
constexpr std::array<double, 5> kSourceWeights = {3200.0, 1100.0, 800.0,
                                                  600.0, 900.0};

inline std::array<std::size_t, 5> source_counts(std::size_t scale) {
  const double total = 6600.0;
  std::array<std::size_t, 5> counts{};
  std::array<double, 5> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double share = double(scale) * kSourceWeights[i] / total;
    counts[i] = std::size_t(share);
    remainders[i] = share - double(counts[i]);
    assigned += counts[i];
  }
  while (assigned < scale) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 5; ++i)
      if (remainders[i] > remainders[best]) best = i;
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

/// Jurisdiction-specific flavor pools; partially disjoint so sparse cosine
/// retrieval can separate regimes.
inline const std::vector<std::string>& flavor_pool(
    const std::optional<Jurisdiction>& j) {
  static const std::vector<std::string> fl = {"hurricane", "windstorm", "surge",
                                              "coastal", "evacuation"};
  static const std::vector<std::string> ca = {"wildfire", "earthquake",
                                              "seismic", "drought", "canyon"};
  static const std::vector<std::string> de = {"bafin", "solvenz", "kapital",
                                              "aufsicht", "bundes"};
  static const std::vector<std::string> au = {"cyclone", "bushfire",
                                              "queensland", "reef", "outback"};
  static const std::vector<std::string> sg = {"monsoon", "strait", "harbor",
                                              "merlion", "padang"};
  static const std::vector<std::string> global = {"basel", "iais", "framework",
                                                  "governance", "group"};
  if (!j) return global;
  switch (*j) {
    case Jurisdiction::UsFl: return fl;
    case Jurisdiction::UsCa: return ca;
    case Jurisdiction::EuDe: return de;
    case Jurisdiction::Au: return au;
    case Jurisdiction::Sg: return sg;
  }
  return global;
}

inline const std::vector<std::string>& focus_pool(ClauseSource s) {
  static const std::vector<std::string> com = {"layering", "reinstatement",
                                               "warranty", "subrogation"};
  static const std::vector<std::string> sol = {"scr", "margin", "tier",
                                               "buffer"};
  static const std::vector<std::string> naic = {"rbc", "statutory", "surplus",
                                                "filing"};
  static const std::vector<std::string> ifrs = {"disclosure", "measurement",
                                                "cohort", "boundary"};
  static const std::vector<std::string> inst = {"appetite", "referral",
                                                "escalation", "mandate"};
  switch (s) {
    case ClauseSource::CommercialTreaty: return com;
    case ClauseSource::SolvencyII: return sol;
    case ClauseSource::NaicRbc: return naic;
    case ClauseSource::Ifrs17ApraMas: return ifrs;
    case ClauseSource::Institutional: return inst;
  }
  return inst;
}

inline std::string treaty_word(TreatyType t) {
  switch (t) {
    case TreatyType::QS: return "proportional";
    case TreatyType::CatXL: return "occurrence";
    case TreatyType::AggXL: return "aggregate";
  }
  return "proportional";
}

inline std::string line_word(LineOfBusiness l) {
  return l == LineOfBusiness::PropertyCat ? "property" : "casualty";
}

// Restriction phrases are all exactly five tokens with integer thresholds,
// keeping clause norms comparable so ranking is decided by matched canonical
// tokens rather than template length.
inline std::string restriction_phrase(const ConstraintPredicate& p) {
  switch (p.kind) {
    case PredicateKind::MaxQuotaShare:
      return "ceded quota within " +
             detail::format_number(p.threshold * 100.0) + " percent";
    case PredicateKind::MinAttachment:
      return "attachment points above " + detail::format_number(p.threshold) +
             " million";
    case PredicateKind::MaxLimit:
      return "layer limits within " + detail::format_number(p.threshold) +
             " million";
    case PredicateKind::MaxPremiumRatio:
      return "premium rates within " +
             detail::format_number(p.threshold * 100.0) + " percent";
    case PredicateKind::MinCapitalRatio:
      return "capital ratio above " +
             detail::format_number(p.threshold * 100.0) + " percent";
  }
  throw DomainError("unknown predicate kind");
}

}  // namespace corpus_detail

/// Deterministic synthetic corpus. Every regulatory clause (and half of the
/// commercial ones) carries a fully specified predicate; clause text embeds
/// the canonical jurisdiction / treaty / line tokens its predicate applies
/// to, so gold relevance is recoverable by sparse cosine retrieval.
inline SyntheticCorpus gen_synthetic_corpus(std::uint64_t seed,
                                            std::size_t scale) {
  if (scale < 10) throw ConfigError("corpus scale must be at least 10 clauses");
  SyntheticCorpus out;
  out.seed = seed;
  out.scale = scale;
  Rng rng(seed ^ 0xc0a9b5u);
  const auto counts = corpus_detail::source_counts(scale);

  const std::vector<std::optional<Jurisdiction>> commercial_jur = {
      Jurisdiction::UsFl, Jurisdiction::UsCa, Jurisdiction::EuDe};
  const std::vector<std::optional<Jurisdiction>> naic_jur = {
      Jurisdiction::UsFl, Jurisdiction::UsCa};
  const std::vector<std::optional<Jurisdiction>> solvency_jur = {
      Jurisdiction::EuDe};
  const std::vector<std::optional<Jurisdiction>> ifrs_jur = {
      std::nullopt, Jurisdiction::Au, Jurisdiction::Sg};
  const std::vector<std::optional<Jurisdiction>> inst_jur = {std::nullopt};

  struct SourcePlan {
    ClauseSource source;
    std::string prefix;
    const std::vector<std::optional<Jurisdiction>>* jurisdictions;
    std::vector<PredicateKind> kinds;
    double predicate_probability;
  };
  const std::vector<SourcePlan> plans = {
      {ClauseSource::CommercialTreaty, "COM", &commercial_jur,
       {PredicateKind::MinAttachment, PredicateKind::MaxLimit}, 0.5},
      {ClauseSource::SolvencyII, "SOL", &solvency_jur,
       {PredicateKind::MinCapitalRatio, PredicateKind::MaxLimit,
        PredicateKind::MaxPremiumRatio},
       1.0},
      {ClauseSource::NaicRbc, "NAIC", &naic_jur,
       {PredicateKind::MinCapitalRatio, PredicateKind::MaxQuotaShare,
        PredicateKind::MinAttachment},
       1.0},
      {ClauseSource::Ifrs17ApraMas, "IFRS", &ifrs_jur,
       {PredicateKind::MaxPremiumRatio, PredicateKind::MaxLimit,
        PredicateKind::MinAttachment},
       1.0},
      {ClauseSource::Institutional, "INST", &inst_jur,
       {PredicateKind::MaxQuotaShare, PredicateKind::MinAttachment,
        PredicateKind::MaxLimit, PredicateKind::MaxPremiumRatio,
        PredicateKind::MinCapitalRatio},
       1.0},
  };

  const std::vector<double> quota_caps = {0.2, 0.3, 0.4, 0.6, 0.7};
  const std::vector<double> attachment_floors = {5.0, 10.0};
  const std::vector<double> limit_caps = {5.0, 10.0};
  const std::vector<double> premium_caps = {0.05, 0.08, 0.12};
  const std::vector<double> capital_ratios = {0.3, 0.5};

  auto pick = [&](const auto& pool) {
    return pool[std::size_t(rng.uniform01() * double(pool.size())) %
                pool.size()];
  };

  for (std::size_t s = 0; s < plans.size(); ++s) {
    const auto& plan = plans[s];
    for (std::size_t i = 0; i < counts[s]; ++i) {
      Clause c;
      {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s-%04zu", plan.prefix.c_str(), i + 1);
        c.id = buf;
      }
      c.source = plan.source;
      c.jurisdiction = pick(*plan.jurisdictions);
      const auto& flavors = corpus_detail::flavor_pool(c.jurisdiction);
      const std::string f1 = pick(flavors);
      const std::string f2 = pick(corpus_detail::focus_pool(plan.source));
      std::string f3 = pick(flavors);
      while (f3 == f1) f3 = pick(flavors);

      const bool with_predicate = rng.uniform01() < plan.predicate_probability;
      if (with_predicate) {
        ConstraintPredicate p;
        p.kind = pick(plan.kinds);
        p.jurisdiction = c.jurisdiction;
        p.line_of_business = rng.bernoulli(0.5) ? LineOfBusiness::PropertyCat
                                                : LineOfBusiness::Casualty;
        switch (p.kind) {
          case PredicateKind::MaxQuotaShare:
            p.treaty_type = TreatyType::QS;
            p.threshold = pick(quota_caps);
            break;
          case PredicateKind::MinAttachment:
            p.treaty_type =
                rng.bernoulli(0.5) ? TreatyType::CatXL : TreatyType::AggXL;
            p.threshold = pick(attachment_floors);
            break;
          case PredicateKind::MaxLimit:
            p.treaty_type =
                rng.bernoulli(0.5) ? TreatyType::CatXL : TreatyType::AggXL;
            p.threshold = pick(limit_caps);
            break;
          case PredicateKind::MaxPremiumRatio:
            p.treaty_type = kAllTreatyTypes[std::size_t(rng.uniform01() * 3.0) % 3];
            p.threshold = pick(premium_caps);
            break;
          case PredicateKind::MinCapitalRatio:
            p.treaty_type = kAllTreatyTypes[std::size_t(rng.uniform01() * 3.0) % 3];
            p.threshold = pick(capital_ratios);
            break;
        }
        c.predicate = p;
        c.focus = to_string(p.kind);
        // Jurisdictional identity lives in the tags (and the retrieval
        // filter), not the text: canonical jurisdiction names would carry
        // wildly uneven idf across regions. The treaty and line tokens
        // appear twice so their cosine contribution dominates idf noise
        // from flavor and number tokens.
        const std::string treaty_tok = corpus_detail::treaty_word(*p.treaty_type);
        const std::string line_tok =
            corpus_detail::line_word(*p.line_of_business);
        std::string lead = f3;
        lead[0] = char(std::toupper(static_cast<unsigned char>(lead[0])));
        c.text = lead + " " + f1 + " " + f2 + " directive: " + treaty_tok +
                 " " + line_tok + " treaties shall restrict " +
                 corpus_detail::restriction_phrase(p) + "; applies to " +
                 treaty_tok + " " + line_tok + " cessions.";
      } else {
        c.focus = "exclusions";
        const std::string f4 = pick(corpus_detail::focus_pool(plan.source));
        std::string lead = f3;
        lead[0] = char(std::toupper(static_cast<unsigned char>(lead[0])));
        c.text = lead + " " + f1 + " " + f2 + " memorandum: " + f4 +
                 " recoveries excluded beyond the stated schedule.";
      }
      out.clauses.push_back(std::move(c));
    }
    out.source_counts[to_string(plan.source)] = counts[s];
  }

  // Scenario templates span every jurisdiction x line x treaty combination.
  for (auto j : kAllJurisdictions)
    for (auto l : kAllLines)
      for (auto t : kAllTreatyTypes) {
        SyntheticCorpus::Scenario sc;
        sc.jurisdiction = j;
        sc.line = l;
        sc.treaty = t;
        sc.key = to_string(j) + "|" + to_string(l) + "|" + to_string(t);
        for (const auto& c : out.clauses) {
          if (!c.predicate) continue;
          if (c.jurisdiction && *c.jurisdiction != j) continue;  // retrievable?
          if (predicate_matches_scenario(*c.predicate, j, l, t))
            sc.relevant.push_back(c.id);
        }
        std::sort(sc.relevant.begin(), sc.relevant.end());
        out.scenarios.push_back(std::move(sc));
      }

  // Self-audit: every predicate must be reachable by at least one scenario
  // template, and the vocabulary hygiene the retrieval design relies on must
  // hold (no canonical tokens in predicate-free texts, no bucket words).
  {
    std::map<std::string, bool> covered;
    for (const auto& sc : out.scenarios)
      for (const auto& id : sc.relevant) covered[id] = true;
    for (const auto& c : out.clauses) {
      if (c.predicate && !covered[c.id])
        throw DomainError("generator self-audit: predicate of clause " + c.id +
                          " matches no scenario template");
      const auto tokens = tokenize(c.text);
      for (const auto& tok : tokens) {
        if (tok == "small" || tok == "medium" || tok == "large")
          throw DomainError("generator self-audit: bucket word in clause " +
                            c.id);
        if (!c.predicate &&
            (tok == "proportional" || tok == "occurrence" ||
             tok == "aggregate" || tok == "property" || tok == "casualty"))
          throw DomainError(
              "generator self-audit: canonical token in predicate-free "
              "clause " +
              c.id);
      }
    }
  }

  // Reference justifications per scenario, rendered for the canonical quote
  // of each treaty type over the first few gold clauses.
  std::map<std::string, const Clause*> by_id;
  for (const auto& c : out.clauses) by_id[c.id] = &c;
  for (const auto& sc : out.scenarios) {
    TreatyAction canonical;
    switch (sc.treaty) {
      case TreatyType::QS: canonical = {TreatyType::QS, 0.5, 0.0, 0.0}; break;
      case TreatyType::CatXL: canonical = {TreatyType::CatXL, 0.0, 5.0, 5.0}; break;
      case TreatyType::AggXL: canonical = {TreatyType::AggXL, 0.0, 5.0, 5.0}; break;
    }
    std::string text;
    std::size_t cited = 0;
    for (const auto& id : sc.relevant) {
      if (cited >= 4) break;
      const Clause* c = by_id.at(id);
      text += "This quote satisfies " + to_string(c->source) + " clause " +
              c->id + " limiting " + detail::kind_phrase(*c->predicate) + ". ";
      ++cited;
    }
    text += "A " + detail::action_terms(canonical) + " " +
            to_string(canonical.treaty_type) +
            " treaty limits retention exposure.";
    out.references.emplace_back(sc.key, text);
  }
  return out;
}

// --- file emission ------------------------------------------------------------

inline std::string corpus_jsonl(const SyntheticCorpus& c) {
  std::string out;
  for (const auto& clause : c.clauses) out += clause_to_json(clause).dump() + "\n";
  return out;
}

inline std::string gold_jsonl(const SyntheticCorpus& c) {
  std::string out;
  for (const auto& sc : c.scenarios) {
    nlohmann::ordered_json j;
    j["scenario"] = sc.key;
    j["jurisdiction"] = to_string(sc.jurisdiction);
    j["line_of_business"] = to_string(sc.line);
    j["treaty_type"] = to_string(sc.treaty);
    j["relevant"] = sc.relevant;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string references_jsonl(const SyntheticCorpus& c) {
  std::string out;
  for (const auto& [key, text] : c.references) {
    nlohmann::ordered_json j;
    j["scenario"] = key;
    j["text"] = text;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string manifest_json(const SyntheticCorpus& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["scale"] = c.scale;
  j["source_counts"] = c.source_counts;
  std::size_t with_predicates = 0;
  for (const auto& clause : c.clauses) with_predicates += clause.predicate ? 1 : 0;
  j["clauses_with_predicates"] = with_predicates;
  j["scenarios"] = c.scenarios.size();
  const std::string corpus_text = corpus_jsonl(c);
  j["corpus_digest"] = hex64(fnv1a64(corpus_text.data(), corpus_text.size()));
  return j.dump(2) + "\n";
}

}  // namespace clauselens
