#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clauselens/errors.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

enum class ClauseSource {
  CommercialTreaty,
  SolvencyII,
  NaicRbc,
  Ifrs17ApraMas,
  Institutional
};

constexpr std::array<ClauseSource, 5> kAllClauseSources = {
    ClauseSource::CommercialTreaty, ClauseSource::SolvencyII,
    ClauseSource::NaicRbc, ClauseSource::Ifrs17ApraMas,
    ClauseSource::Institutional};

inline std::string to_string(ClauseSource s) {
  switch (s) {
    case ClauseSource::CommercialTreaty: return "commercial-treaty";
    case ClauseSource::SolvencyII: return "solvency-ii";
    case ClauseSource::NaicRbc: return "naic-rbc";
    case ClauseSource::Ifrs17ApraMas: return "ifrs17-apra-mas";
    case ClauseSource::Institutional: return "institutional";
  }
  throw DomainError("unknown clause source tag");
}

inline ClauseSource clause_source_from_string(const std::string& s) {
  for (auto v : kAllClauseSources)
    if (to_string(v) == s) return v;
  throw ParseError("unknown clause source '" + s + "'");
}

enum class PredicateKind {
  MaxQuotaShare,
  MinAttachment,
  MaxLimit,
  MaxPremiumRatio,
  MinCapitalRatio
};

inline std::string to_string(PredicateKind k) {
  switch (k) {
    case PredicateKind::MaxQuotaShare: return "max_quota_share";
    case PredicateKind::MinAttachment: return "min_attachment";
    case PredicateKind::MaxLimit: return "max_limit";
    case PredicateKind::MaxPremiumRatio: return "max_premium_ratio";
    case PredicateKind::MinCapitalRatio: return "min_capital_ratio";
  }
  throw DomainError("unknown predicate kind tag");
}

inline PredicateKind predicate_kind_from_string(const std::string& s) {
  for (auto v : {PredicateKind::MaxQuotaShare, PredicateKind::MinAttachment,
                 PredicateKind::MaxLimit, PredicateKind::MaxPremiumRatio,
                 PredicateKind::MinCapitalRatio})
    if (to_string(v) == s) return v;
  throw ParseError("unknown predicate kind '" + s + "'");
}

/// Machine-readable constraint carried by a clause. Unset applies_to fields
/// are wildcards; the treaty filter matches the candidate *action*, the
/// jurisdiction and line filters match the request.
struct ConstraintPredicate {
  PredicateKind kind = PredicateKind::MaxQuotaShare;
  double threshold = 0.0;
  std::optional<Jurisdiction> jurisdiction;  // nullopt = any / global
  std::optional<TreatyType> treaty_type;
  std::optional<LineOfBusiness> line_of_business;
};

inline void validate_predicate(const ConstraintPredicate& p) {
  switch (p.kind) {
    case PredicateKind::MaxQuotaShare:
      if (p.threshold < 0.0 || p.threshold > 1.0)
        throw DomainError("max_quota_share threshold outside [0, 1]");
      break;
    case PredicateKind::MinAttachment:
    case PredicateKind::MaxLimit:
      if (p.threshold < 0.0)
        throw DomainError(to_string(p.kind) + " threshold negative");
      break;
    case PredicateKind::MaxPremiumRatio:
    case PredicateKind::MinCapitalRatio:
      if (p.threshold <= 0.0)
        throw DomainError(to_string(p.kind) + " threshold must be positive");
      break;
  }
}

struct Clause {
  std::string id;
  ClauseSource source = ClauseSource::Institutional;
  std::optional<Jurisdiction> jurisdiction;  // nullopt = "global"
  std::string focus;
  std::string text;
  std::optional<ConstraintPredicate> predicate;
};

inline std::string jurisdiction_tag(const std::optional<Jurisdiction>& j) {
  return j ? to_string(*j) : std::string("global");
}

/// Whether a predicate constrains this (request, action) pair at all.
inline bool predicate_applies(const ConstraintPredicate& p,
                              const CedentRequest& req,
                              const TreatyAction& action) {
  if (p.jurisdiction && *p.jurisdiction != req.jurisdiction) return false;
  if (p.line_of_business && *p.line_of_business != req.line_of_business)
    return false;
  if (p.treaty_type && *p.treaty_type != action.treaty_type) return false;
  switch (p.kind) {
    case PredicateKind::MaxQuotaShare:
      return action.treaty_type == TreatyType::QS;
    case PredicateKind::MinAttachment:
    case PredicateKind::MaxLimit:
      return action.treaty_type != TreatyType::QS;
    default:
      return true;
  }
}

/// Whether a predicate's applies_to filter matches a scenario template
/// (jurisdiction, line, requested treaty). Gold-label semantics.
inline bool predicate_matches_scenario(const ConstraintPredicate& p,
                                       Jurisdiction jur, LineOfBusiness line,
                                       TreatyType treaty) {
  if (p.jurisdiction && *p.jurisdiction != jur) return false;
  if (p.line_of_business && *p.line_of_business != line) return false;
  if (p.treaty_type && *p.treaty_type != treaty) return false;
  return true;
}

/// Pricing context the premium- and capital-linked predicate kinds need.
struct MaskContext {
  std::function<double(const TreatyAction&)> premium_of;
  double capital_base = 0.0;
};

inline bool predicate_satisfied(const ConstraintPredicate& p,
                                const CedentRequest& req,
                                const TreatyAction& action,
                                const MaskContext& ctx) {
  if (!predicate_applies(p, req, action)) return true;
  switch (p.kind) {
    case PredicateKind::MaxQuotaShare:
      return action.quota_share <= p.threshold + 1e-12;
    case PredicateKind::MinAttachment:
      return action.attachment >= p.threshold - 1e-12;
    case PredicateKind::MaxLimit:
      return action.limit <= p.threshold + 1e-12;
    case PredicateKind::MaxPremiumRatio:
      return ctx.premium_of(action) <=
             p.threshold * req.insured_value + 1e-12;
    case PredicateKind::MinCapitalRatio:
      return ctx.capital_base >=
             p.threshold * committed_limit(action, req) - 1e-12;
  }
  throw DomainError("unknown predicate kind");
}

// --- corpus I/O -------------------------------------------------------------

inline Clause clause_from_json(const nlohmann::json& j) {
  Clause c;
  c.id = j.at("id").get<std::string>();
  if (c.id.empty()) throw ParseError("clause with empty id");
  c.source = clause_source_from_string(j.at("source").get<std::string>());
  const std::string jur = j.at("jurisdiction").get<std::string>();
  if (jur != "global") c.jurisdiction = jurisdiction_from_string(jur);
  c.focus = j.value("focus", std::string());
  c.text = j.at("text").get<std::string>();
  if (c.text.empty()) throw ParseError("clause " + c.id + " has empty text");
  if (j.contains("predicate") && !j["predicate"].is_null()) {
    const auto& pj = j["predicate"];
    ConstraintPredicate p;
    p.kind = predicate_kind_from_string(pj.at("kind").get<std::string>());
    p.threshold = pj.at("threshold").get<double>();
    if (pj.contains("applies_to")) {
      const auto& a = pj["applies_to"];
      if (a.contains("jurisdiction")) {
        const std::string aj = a["jurisdiction"].get<std::string>();
        if (aj != "global") p.jurisdiction = jurisdiction_from_string(aj);
      }
      if (a.contains("treaty_type"))
        p.treaty_type =
            treaty_type_from_string(a["treaty_type"].get<std::string>());
      if (a.contains("line_of_business"))
        p.line_of_business =
            line_from_string(a["line_of_business"].get<std::string>());
    }
    validate_predicate(p);
    c.predicate = p;
  }
  return c;
}

inline nlohmann::json clause_to_json(const Clause& c) {
  nlohmann::json j;
  j["id"] = c.id;
  j["source"] = to_string(c.source);
  j["jurisdiction"] = jurisdiction_tag(c.jurisdiction);
  j["focus"] = c.focus;
  j["text"] = c.text;
  if (c.predicate) {
    nlohmann::json pj;
    pj["kind"] = to_string(c.predicate->kind);
    pj["threshold"] = c.predicate->threshold;
    nlohmann::json applies;
    applies["jurisdiction"] = jurisdiction_tag(c.predicate->jurisdiction);
    if (c.predicate->treaty_type)
      applies["treaty_type"] = to_string(*c.predicate->treaty_type);
    if (c.predicate->line_of_business)
      applies["line_of_business"] = to_string(*c.predicate->line_of_business);
    pj["applies_to"] = applies;
    j["predicate"] = pj;
  }
  return j;
}

/// Parse a JSON Lines corpus. Reports the first malformed line by number and
/// rejects duplicate ids.
inline std::vector<Clause> parse_corpus(std::istream& in,
                                        const std::string& origin) {
  std::vector<Clause> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Clause c;
    try {
      c = clause_from_json(nlohmann::json::parse(line));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(origin + " line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (!seen.insert(c.id).second)
      throw ParseError(origin + " line " + std::to_string(line_no) +
                       ": duplicate clause id '" + c.id + "'");
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Clause> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, path);
}

// --- tf-idf index -----------------------------------------------------------

/// Lowercase, strip punctuation to spaces, split on whitespace.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(char(std::tolower(ch)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Sparse tf-idf index over the corpus with cosine scoring. The vocabulary
/// is sorted and rows are stored in ascending clause-id order, so equal
/// corpus content produces a bit-identical index regardless of file order.
class ClauseIndex {
 public:
  explicit ClauseIndex(const std::vector<Clause>& corpus) {
    if (corpus.empty()) throw DomainError("cannot index an empty corpus");
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return corpus[a].id < corpus[b].id;
    });

    std::vector<std::vector<std::string>> docs;
    docs.reserve(corpus.size());
    std::map<std::string, std::size_t> doc_freq;
    for (std::size_t i : order) {
      ids_.push_back(corpus[i].id);
      jurisdictions_.push_back(corpus[i].jurisdiction);
      docs.push_back(tokenize(corpus[i].text));
      std::set<std::string> uniq(docs.back().begin(), docs.back().end());
      for (const auto& t : uniq) ++doc_freq[t];
    }

    for (const auto& [term, df] : doc_freq) {
      vocabulary_[term] = idf_.size();
      idf_.push_back(std::log((1.0 + double(docs.size())) / (1.0 + double(df))) +
                     1.0);
    }

    rows_.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::map<std::size_t, double> tf;
      for (const auto& t : docs[d]) ++tf[vocabulary_.at(t)];
      double norm_sq = 0.0;
      for (auto& [col, count] : tf) {
        count *= idf_[col];
        norm_sq += count * count;
      }
      const double norm = std::sqrt(norm_sq);
      for (auto& [col, weight] : tf)
        rows_[d].emplace_back(col, norm > 0.0 ? weight / norm : 0.0);
    }
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::map<std::string, std::size_t>& vocabulary() const {
    return vocabulary_;
  }
  const std::vector<double>& idf() const { return idf_; }
  const std::optional<Jurisdiction>& jurisdiction_of(std::size_t row) const {
    return jurisdictions_[row];
  }

  /// L2-normalized sparse row (column, weight) of one clause.
  const std::vector<std::pair<std::size_t, double>>& row(
      std::size_t i) const {
    return rows_[i];
  }

  std::size_t row_of(const std::string& id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id)
      throw DomainError("clause id '" + id + "' not in index");
    return std::size_t(it - ids_.begin());
  }

  /// L2-normalized query vector over the index vocabulary; terms outside
  /// the vocabulary are dropped.
  std::vector<std::pair<std::size_t, double>> embed(
      const std::string& text) const {
    std::map<std::size_t, double> tf;
    for (const auto& t : tokenize(text)) {
      auto it = vocabulary_.find(t);
      if (it != vocabulary_.end()) ++tf[it->second];
    }
    double norm_sq = 0.0;
    for (auto& [col, count] : tf) {
      count *= idf_[col];
      norm_sq += count * count;
    }
    std::vector<std::pair<std::size_t, double>> out;
    const double norm = std::sqrt(norm_sq);
    for (auto& [col, weight] : tf)
      out.emplace_back(col, norm > 0.0 ? weight / norm : 0.0);
    return out;
  }

  double cosine(const std::vector<std::pair<std::size_t, double>>& query,
                std::size_t row_index) const {
    const auto& r = rows_[row_index];
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < query.size() && j < r.size()) {
      if (query[i].first == r[j].first) {
        acc += query[i].second * r[j].second;
        ++i;
        ++j;
      } else if (query[i].first < r[j].first) {
        ++i;
      } else {
        ++j;
      }
    }
    return acc;
  }

 private:
  std::vector<std::string> ids_;  // ascending
  std::vector<std::optional<Jurisdiction>> jurisdictions_;
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

inline ClauseIndex build_index(const std::vector<Clause>& corpus) {
  return ClauseIndex(corpus);
}

struct RetrievalResult {
  struct Hit {
    std::string id;
    double score = 0.0;
    bool jurisdiction_matched = true;
  };
  std::vector<Hit> hits;  // score non-increasing, ties by ascending id
  std::size_t k_requested = 0;
};

/// Bucket label for the requested limit; part of the deterministic query.
inline std::string limit_bucket(double requested_limit) {
  if (requested_limit < 4.0) return "small";
  if (requested_limit < 8.0) return "medium";
  return "large";
}

/// Deterministic query rendering from request fields.
inline std::string render_query(const CedentRequest& req) {
  static const std::map<Jurisdiction, std::string> jur_word = {
      {Jurisdiction::UsFl, "florida"}, {Jurisdiction::UsCa, "california"},
      {Jurisdiction::EuDe, "germany"}, {Jurisdiction::Au, "australia"},
      {Jurisdiction::Sg, "singapore"}};
  static const std::map<TreatyType, std::string> treaty_word = {
      {TreatyType::QS, "proportional"},
      {TreatyType::CatXL, "occurrence"},
      {TreatyType::AggXL, "aggregate"}};
  static const std::map<LineOfBusiness, std::string> line_word = {
      {LineOfBusiness::PropertyCat, "property"},
      {LineOfBusiness::Casualty, "casualty"}};
  return jur_word.at(req.jurisdiction) + " global " +
         treaty_word.at(req.requested_treaty_type) + " " +
         line_word.at(req.line_of_business) + " " +
         limit_bucket(req.requested_limit);
}

/// Cosine top-k over the clauses passing the jurisdiction filter
/// (request's own tag or global). Shorter-than-k results are not an error.
inline RetrievalResult retrieve_topk_text(const ClauseIndex& index,
                                          const std::string& query_text,
                                          Jurisdiction request_jurisdiction,
                                          std::size_t k) {
  if (k < 1) throw DomainError("retrieval k must be >= 1");
  const auto query = index.embed(query_text);
  std::vector<RetrievalResult::Hit> hits;
  for (std::size_t row = 0; row < index.size(); ++row) {
    const auto& jur = index.jurisdiction_of(row);
    if (jur && *jur != request_jurisdiction) continue;
    hits.push_back({index.ids()[row], index.cosine(query, row), true});
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (hits.size() > k) hits.resize(k);
  RetrievalResult out;
  out.hits = std::move(hits);
  out.k_requested = k;
  return out;
}

inline RetrievalResult retrieve_topk(const ClauseIndex& index,
                                     const CedentRequest& req, std::size_t k) {
  return retrieve_topk_text(index, render_query(req), req.jurisdiction, k);
}

// --- feasibility masking ----------------------------------------------------

/// Boolean mask over the action grid plus the audit trail: for every
/// excluded action, the ids of the clauses that excluded it.
struct FeasibilityMask {
  std::vector<char> feasible;
  std::vector<std::vector<std::string>> excluded_by;

  std::size_t feasible_count() const {
    std::size_t n = 0;
    for (char f : feasible) n += (f != 0);
    return n;
  }
  bool empty_feasible_set() const { return feasible_count() == 0; }

  /// Least-violating action: fewest failed predicates, ties by action id.
  std::size_t least_violating() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < excluded_by.size(); ++i)
      if (excluded_by[i].size() < excluded_by[best].size()) best = i;
    return best;
  }
};

inline FeasibilityMask compile_feasibility_mask(
    const std::vector<const Clause*>& retrieved, const CedentRequest& req,
    const ActionGrid& grid, const MaskContext& ctx) {
  if (grid.size() == 0) throw DomainError("cannot mask an empty action grid");
  FeasibilityMask mask;
  mask.feasible.assign(grid.size(), 1);
  mask.excluded_by.assign(grid.size(), {});
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const TreatyAction& action = grid.at(a);
    for (const Clause* c : retrieved) {
      if (!c->predicate) continue;
      if (!predicate_satisfied(*c->predicate, req, action, ctx)) {
        mask.feasible[a] = 0;
        mask.excluded_by[a].push_back(c->id);
      }
    }
  }
  return mask;
}

// --- retrieval scoring --------------------------------------------------------

struct ScenarioRetrieval {
  Jurisdiction jurisdiction = Jurisdiction::UsFl;
  std::vector<std::string> retrieved;  // ranked ids
  std::vector<std::string> retrieved_jurisdiction_tags;
  std::vector<std::string> gold;
};

struct RetrievalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double jurisdiction_match = 0.0;
  std::size_t scenarios_scored = 0;
  std::size_t scenarios_skipped = 0;  // empty gold sets
};

/// Micro-averaged precision / recall over scenarios plus the share of
/// retrieved clauses whose jurisdiction tag is the scenario's or global.
inline RetrievalMetrics retrieval_metrics(
    const std::vector<ScenarioRetrieval>& scenarios) {
  RetrievalMetrics m;
  double hit = 0.0, retrieved = 0.0, gold = 0.0, jur_ok = 0.0;
  for (const auto& s : scenarios) {
    if (s.gold.empty()) {
      ++m.scenarios_skipped;
      continue;
    }
    ++m.scenarios_scored;
    std::set<std::string> gold_set(s.gold.begin(), s.gold.end());
    for (const auto& id : s.retrieved) hit += gold_set.count(id) ? 1.0 : 0.0;
    retrieved += double(s.retrieved.size());
    gold += double(gold_set.size());
    const std::string own = to_string(s.jurisdiction);
    for (const auto& tag : s.retrieved_jurisdiction_tags)
      jur_ok += (tag == own || tag == "global") ? 1.0 : 0.0;
  }
  m.precision = retrieved > 0.0 ? hit / retrieved : 0.0;
  m.recall = gold > 0.0 ? hit / gold : 0.0;
  m.jurisdiction_match = retrieved > 0.0 ? jur_ok / retrieved : 0.0;
  return m;
}

}  // namespace clauselens
