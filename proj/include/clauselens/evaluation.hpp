#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clauselens/justifier.hpp"
#include "clauselens/risk_duals.hpp"
#include "clauselens/serialize.hpp"
#include "clauselens/trainer.hpp"
#include "clauselens/world.hpp"

namespace clauselens {

struct EvalConfig {
  std::size_t n_episodes = 5000;
  std::size_t n_boot = 10000;
  std::uint64_t seed = 99;
  std::size_t threads = 1;
};

inline EvalConfig eval_config_from(const ConfigFile& cfg) {
  EvalConfig e;
  if (cfg.has("eval", "n_episodes"))
    e.n_episodes = std::size_t(cfg.get_int("eval", "n_episodes"));
  if (cfg.has("eval", "n_boot"))
    e.n_boot = std::size_t(cfg.get_int("eval", "n_boot"));
  if (cfg.has("eval", "seed"))
    e.seed = std::uint64_t(cfg.get_int("eval", "seed"));
  if (cfg.has("eval", "threads"))
    e.threads = std::size_t(cfg.get_int("eval", "threads"));
  if (e.n_episodes < 1 || e.n_boot < 1)
    throw ConfigError("[eval] sizes must be positive");
  return e;
}

/// Paired bootstrap comparison of two agents evaluated on the same episode
/// draws: percentile CIs on the mean difference and the CVaR difference.
struct AgentComparison {
  std::string agent_a, agent_b;
  double mean_diff = 0.0, mean_ci_lo = 0.0, mean_ci_hi = 0.0;
  double cvar_diff = 0.0, cvar_ci_lo = 0.0, cvar_ci_hi = 0.0;
  bool mean_significant = false;
  bool cvar_significant = false;
};

inline AgentComparison compare_agents(const std::vector<double>& returns_a,
                                      const std::vector<double>& returns_b,
                                      double alpha, std::size_t n_boot,
                                      std::uint64_t seed) {
  if (returns_a.size() != returns_b.size() || returns_a.empty())
    throw DomainError("paired comparison needs equal-length samples");
  AgentComparison out;
  const std::size_t n = returns_a.size();
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += returns_a[i];
    mean_b += returns_b[i];
  }
  out.mean_diff = (mean_a - mean_b) / double(n);
  out.cvar_diff = cvar(returns_a, alpha) - cvar(returns_b, alpha);

  Rng rng(seed ^ 0xb007u);
  std::vector<double> boot_mean(n_boot), boot_cvar(n_boot);
  std::vector<double> sample_a(n), sample_b(n);
  for (std::size_t b = 0; b < n_boot; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = std::size_t(rng.uniform01() * double(n)) % n;
      sample_a[i] = returns_a[pick];
      sample_b[i] = returns_b[pick];
      acc += sample_a[i] - sample_b[i];
    }
    boot_mean[b] = acc / double(n);
    boot_cvar[b] = cvar(sample_a, alpha) - cvar(sample_b, alpha);
  }
  auto percentile_ci = [](std::vector<double>& v, double& lo, double& hi) {
    std::sort(v.begin(), v.end());
    const double last = double(v.size() - 1);
    lo = v[std::size_t(std::floor(0.025 * last))];
    hi = v[std::size_t(std::ceil(0.975 * last))];
  };
  percentile_ci(boot_mean, out.mean_ci_lo, out.mean_ci_hi);
  percentile_ci(boot_cvar, out.cvar_ci_lo, out.cvar_ci_hi);
  out.mean_significant = out.mean_ci_lo > 0.0 || out.mean_ci_hi < 0.0;
  out.cvar_significant = out.cvar_ci_lo > 0.0 || out.cvar_ci_hi < 0.0;
  return out;
}

struct AgentEvalRow {
  std::string variant;
  double mean_return = 0.0;
  double cvar = 0.0;
  double violation_rate = 0.0;  // share of episodes with any d_k = 1
  std::array<double, kViolationTypes> violation_type_rates = {0, 0, 0, 0};
  std::optional<double> fidelity_pass_rate;
  std::optional<double> bleu_mean;
  std::optional<double> rouge_mean;
  std::size_t fallback_count = 0;
};

/// Raw per-episode series kept in memory for tests and comparisons.
struct AgentEvalSeries {
  std::vector<double> returns;
  std::vector<double> gross_losses;
  std::vector<int> any_violation;
  std::vector<std::string> audit_lines;  // JSONL episode records
};

struct EvalReport {
  std::vector<AgentEvalRow> rows;
  std::vector<AgentComparison> comparisons;
  double retrieval_precision = 0.0;
  double retrieval_recall = 0.0;
  double retrieval_jurisdiction_match = 0.0;
  std::size_t n_episodes = 0;
  std::uint64_t eval_seed = 0;
  double cvar_alpha = 0.10;
  std::string config_digest;
  std::string corpus_digest;

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string render_table() const;
};

inline nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_episodes"] = n_episodes;
  j["eval_seed"] = eval_seed;
  j["cvar_alpha"] = cvar_alpha;
  j["config_digest"] = config_digest;
  j["corpus_digest"] = corpus_digest;
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json a;
    a["variant"] = r.variant;
    a["mean_return"] = r.mean_return;
    a["cvar"] = r.cvar;
    a["violation_rate"] = r.violation_rate;
    nlohmann::ordered_json types;
    for (std::size_t k = 0; k < kViolationTypes; ++k)
      types[violation_name(k)] = r.violation_type_rates[k];
    a["violation_type_rates"] = types;
    a["fidelity_pass_rate"] =
        r.fidelity_pass_rate ? nlohmann::ordered_json(*r.fidelity_pass_rate)
                             : nlohmann::ordered_json(nullptr);
    a["bleu"] = r.bleu_mean ? nlohmann::ordered_json(*r.bleu_mean)
                            : nlohmann::ordered_json(nullptr);
    a["rouge1"] = r.rouge_mean ? nlohmann::ordered_json(*r.rouge_mean)
                               : nlohmann::ordered_json(nullptr);
    a["fallback_count"] = r.fallback_count;
    j["agents"].push_back(a);
  }
  j["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& c : comparisons) {
    nlohmann::ordered_json cj;
    cj["agent_a"] = c.agent_a;
    cj["agent_b"] = c.agent_b;
    cj["mean_diff"] = c.mean_diff;
    cj["mean_ci"] = {c.mean_ci_lo, c.mean_ci_hi};
    cj["cvar_diff"] = c.cvar_diff;
    cj["cvar_ci"] = {c.cvar_ci_lo, c.cvar_ci_hi};
    cj["mean_significant"] = c.mean_significant;
    cj["cvar_significant"] = c.cvar_significant;
    j["comparisons"].push_back(cj);
  }
  nlohmann::ordered_json r;
  r["precision"] = retrieval_precision;
  r["recall"] = retrieval_recall;
  r["jurisdiction_match"] = retrieval_jurisdiction_match;
  j["retrieval"] = r;
  return j;
}

inline EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport rep;
  rep.n_episodes = j.at("n_episodes").get<std::size_t>();
  rep.eval_seed = j.at("eval_seed").get<std::uint64_t>();
  rep.cvar_alpha = j.at("cvar_alpha").get<double>();
  rep.config_digest = j.at("config_digest").get<std::string>();
  rep.corpus_digest = j.at("corpus_digest").get<std::string>();
  for (const auto& a : j.at("agents")) {
    AgentEvalRow r;
    r.variant = a.at("variant").get<std::string>();
    r.mean_return = a.at("mean_return").get<double>();
    r.cvar = a.at("cvar").get<double>();
    r.violation_rate = a.at("violation_rate").get<double>();
    for (std::size_t k = 0; k < kViolationTypes; ++k)
      r.violation_type_rates[k] =
          a.at("violation_type_rates").at(violation_name(k)).get<double>();
    if (!a.at("fidelity_pass_rate").is_null())
      r.fidelity_pass_rate = a.at("fidelity_pass_rate").get<double>();
    if (!a.at("bleu").is_null()) r.bleu_mean = a.at("bleu").get<double>();
    if (!a.at("rouge1").is_null()) r.rouge_mean = a.at("rouge1").get<double>();
    r.fallback_count = a.at("fallback_count").get<std::size_t>();
    rep.rows.push_back(r);
  }
  for (const auto& cj : j.at("comparisons")) {
    AgentComparison c;
    c.agent_a = cj.at("agent_a").get<std::string>();
    c.agent_b = cj.at("agent_b").get<std::string>();
    c.mean_diff = cj.at("mean_diff").get<double>();
    c.mean_ci_lo = cj.at("mean_ci").at(0).get<double>();
    c.mean_ci_hi = cj.at("mean_ci").at(1).get<double>();
    c.cvar_diff = cj.at("cvar_diff").get<double>();
    c.cvar_ci_lo = cj.at("cvar_ci").at(0).get<double>();
    c.cvar_ci_hi = cj.at("cvar_ci").at(1).get<double>();
    c.mean_significant = cj.at("mean_significant").get<bool>();
    c.cvar_significant = cj.at("cvar_significant").get<bool>();
    rep.comparisons.push_back(c);
  }
  rep.retrieval_precision = j.at("retrieval").at("precision").get<double>();
  rep.retrieval_recall = j.at("retrieval").at("recall").get<double>();
  rep.retrieval_jurisdiction_match =
      j.at("retrieval").at("jurisdiction_match").get<double>();
  return rep;
}

inline std::string EvalReport::render_table() const {
  auto fmt = [](double v, int prec = 3) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return std::string(buf);
  };
  std::string out;
  out += "Agent              Return   CVaR     Viol.%   Fidelity  BLEU    P/R\n";
  out += "------------------------------------------------------------------------\n";
  for (const auto& r : rows) {
    char line[256];
    const std::string fid =
        r.fidelity_pass_rate ? fmt(*r.fidelity_pass_rate * 100.0, 1) + "%" : "N/A";
    const std::string bl = r.bleu_mean ? fmt(*r.bleu_mean * 100.0, 1) : "N/A";
    // Retrieval quality only applies to clause-aware agents.
    const bool clause_aware = r.variant == "ClauseLensRL" ||
                              r.variant == "ClauseLensRLX";
    const std::string pr = clause_aware
                               ? fmt(retrieval_precision * 100.0, 1) + "/" +
                                     fmt(retrieval_recall * 100.0, 1)
                               : "N/A";
    std::snprintf(line, sizeof line, "%-18s %-8s %-8s %-8s %-9s %-7s %s\n",
                  r.variant.c_str(), fmt(r.mean_return).c_str(),
                  fmt(r.cvar).c_str(), fmt(r.violation_rate * 100.0, 1).c_str(),
                  fid.c_str(), bl.c_str(), pr.c_str());
    out += line;
  }
  return out;
}

// --- evaluation harness -------------------------------------------------------

/// One evaluation episode. Cedent and loss draws depend only on
/// (seed, episode index); retrieval and the feasibility mask are computed for
/// every agent as the audit baseline, while the variant flags decide what the
/// policy itself sees.
struct EvalEpisodeResult {
  EpisodeRecord record;
  std::optional<Justification> justification;
  bool fidelity_pass = true;
  double bleu_score = 0.0;
  double rouge_score = 0.0;
  bool scored_text = false;
};

inline EvalEpisodeResult eval_episode(
    const MarketWorld& world, const AgentVariant& variant,
    const Checkpoint& ckpt, std::uint64_t seed, std::uint64_t index,
    const std::map<std::string, std::string>* references) {
  Rng cedent_rng = Rng::stream(seed, kStreamCedent, index);
  Rng loss_rng = Rng::stream(seed, kStreamLoss, index);
  // Common random numbers across agents: identical policies take identical
  // actions, so paired differences isolate genuine policy divergence.
  Rng action_rng = Rng::stream(seed, kStreamAction, index);

  const CedentRequest request = sample_cedent(world.cedent_cfg, cedent_rng);
  const RetrievalResult retrieval =
      retrieve_topk(world.index, request, world.obs.k);
  const auto clauses = world.clauses_of(retrieval);
  const FeasibilityMask mask = compile_feasibility_mask(
      clauses, request, world.grid, world.mask_context(request));

  std::vector<char> sampling_mask(world.grid.size(), 1);
  bool fallback = false;
  std::size_t action_id = 0;
  if (!variant.learned) {
    action_id = static_heuristic_action(request, world.grid);
  } else {
    if (!ckpt.has_net)
      throw DomainError("checkpoint for " + to_string(variant.kind) +
                        " carries no network");
    if (variant.masking) {
      if (mask.empty_feasible_set())
        fallback = true;
      else
        sampling_mask.assign(mask.feasible.begin(), mask.feasible.end());
    }
    const AugmentedState state = variant.retrieval
                                     ? world.observe(request, retrieval)
                                     : world.observe_plain(request);
    const PolicyOutput out = forward_policy(ckpt.net, state.values, sampling_mask);
    action_id = fallback ? mask.least_violating() : sample_action(out, action_rng);
  }

  EvalEpisodeResult res;
  res.record = step(request, action_id, world.grid, clauses, world.pricing,
                    world.env, loss_rng, &mask, fallback);

  if (variant.justification) {
    res.justification = generate_justification(res.record, clauses, world.grid,
                                               world.env.capital_base);
    res.fidelity_pass = fidelity_check(*res.justification, res.record, clauses,
                                       world.grid, world.env.capital_base)
                            .pass;
    if (references) {
      const TreatyAction& action = world.grid.at(action_id);
      const std::string key = to_string(request.jurisdiction) + "|" +
                              to_string(request.line_of_business) + "|" +
                              to_string(action.treaty_type);
      auto it = references->find(key);
      if (it != references->end()) {
        res.bleu_score = bleu(res.justification->text, it->second);
        res.rouge_score = rouge1(res.justification->text, it->second);
        res.scored_text = true;
      }
    }
  }
  return res;
}

inline nlohmann::ordered_json episode_audit_json(
    const std::string& variant, std::uint64_t index,
    const EvalEpisodeResult& res, const ActionGrid& grid) {
  const auto& rec = res.record;
  const TreatyAction& action = grid.at(rec.action_id);
  nlohmann::ordered_json j;
  j["episode"] = index;
  j["agent"] = variant;
  j["jurisdiction"] = to_string(rec.request.jurisdiction);
  j["line_of_business"] = to_string(rec.request.line_of_business);
  j["requested_treaty_type"] = to_string(rec.request.requested_treaty_type);
  j["insured_value"] = rec.request.insured_value;
  j["exposure_score"] = rec.request.exposure_score;
  j["action_id"] = rec.action_id;
  j["treaty_type"] = to_string(action.treaty_type);
  j["quota_share"] = action.quota_share;
  j["attachment"] = action.attachment;
  j["limit"] = action.limit;
  j["premium"] = rec.premium;
  j["gross_loss"] = rec.gross_loss;
  j["ceded_loss"] = rec.ceded_loss;
  j["retained_loss"] = rec.retained_loss;
  j["reward"] = rec.reward;
  nlohmann::ordered_json viol;
  for (std::size_t k = 0; k < kViolationTypes; ++k)
    viol[violation_name(k)] = rec.violations[k];
  j["violations"] = viol;
  j["retrieved_clause_ids"] = rec.retrieved_clause_ids;
  j["fallback"] = rec.fallback_used;
  if (res.justification) j["justification"] = res.justification->text;
  return j;
}

struct GoldScenario {
  Jurisdiction jurisdiction = Jurisdiction::UsFl;
  LineOfBusiness line = LineOfBusiness::PropertyCat;
  TreatyType treaty = TreatyType::QS;
  std::string key;
  std::vector<std::string> relevant;
};

inline std::vector<GoldScenario> parse_gold_jsonl(std::istream& in) {
  std::vector<GoldScenario> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      GoldScenario g;
      g.key = j.at("scenario").get<std::string>();
      g.jurisdiction =
          jurisdiction_from_string(j.at("jurisdiction").get<std::string>());
      g.line = line_from_string(j.at("line_of_business").get<std::string>());
      g.treaty = treaty_type_from_string(j.at("treaty_type").get<std::string>());
      g.relevant = j.at("relevant").get<std::vector<std::string>>();
      out.push_back(std::move(g));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("gold line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::map<std::string, std::string> parse_references_jsonl(
    std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out[j.at("scenario").get<std::string>()] = j.at("text").get<std::string>();
    } catch (const std::exception& e) {
      throw ParseError("references line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return out;
}

/// Retrieval quality against the generator's gold labels. Each scenario is
/// queried at k = |gold| (R-precision style), making precision and recall
/// directly comparable.
inline RetrievalMetrics score_retrieval(
    const MarketWorld& world, const std::vector<GoldScenario>& gold) {
  std::vector<ScenarioRetrieval> scored;
  for (const auto& g : gold) {
    if (g.relevant.empty()) {
      scored.push_back({g.jurisdiction, {}, {}, {}});
      continue;
    }
    CedentRequest probe;
    probe.jurisdiction = g.jurisdiction;
    probe.line_of_business = g.line;
    probe.requested_treaty_type = g.treaty;
    probe.insured_value = 50.0;
    probe.requested_limit = 5.0;  // medium bucket
    const auto result = retrieve_topk(world.index, probe, g.relevant.size());
    ScenarioRetrieval s;
    s.jurisdiction = g.jurisdiction;
    s.gold = g.relevant;
    for (const auto& hit : result.hits) {
      s.retrieved.push_back(hit.id);
      s.retrieved_jurisdiction_tags.push_back(
          jurisdiction_tag(world.clause_by_id(hit.id)->jurisdiction));
    }
    scored.push_back(std::move(s));
  }
  return retrieval_metrics(scored);
}

struct EvalOutput {
  EvalReport report;
  std::map<std::string, AgentEvalSeries> series;  // per variant
};

/// Paired evaluation of all four variants over shared episode draws.
inline EvalOutput run_evaluation(
    const MarketWorld& world,
    const std::map<std::string, Checkpoint>& checkpoints,
    const std::vector<GoldScenario>& gold,
    const std::map<std::string, std::string>& references,
    const EvalConfig& cfg, const CvarConfig& cvar_cfg,
    const std::string& config_digest, const std::string& corpus_digest) {
  const std::vector<VariantKind> order = {
      VariantKind::StaticHeuristic, VariantKind::BaselineRL,
      VariantKind::ClauseLensRL, VariantKind::ClauseLensRLX};
  for (auto kind : order)
    if (!checkpoints.count(to_string(kind)))
      throw IoError("missing checkpoint for variant " + to_string(kind));

  EvalOutput out;
  out.report.n_episodes = cfg.n_episodes;
  out.report.eval_seed = cfg.seed;
  out.report.cvar_alpha = cvar_cfg.alpha;
  out.report.config_digest = config_digest;
  out.report.corpus_digest = corpus_digest;

  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const AgentVariant variant = variant_for(order[slot]);
    const std::string name = to_string(variant.kind);
    const Checkpoint& ckpt = checkpoints.at(name);

    std::vector<EvalEpisodeResult> episodes(cfg.n_episodes);
    parallel_for_indexed(cfg.n_episodes, cfg.threads, [&](std::size_t i) {
      episodes[i] =
          eval_episode(world, variant, ckpt, cfg.seed, i, &references);
    });

    AgentEvalRow row;
    row.variant = name;
    AgentEvalSeries series;
    double fid_pass = 0.0, bleu_acc = 0.0, rouge_acc = 0.0;
    std::size_t scored_text = 0;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const auto& e = episodes[i];
      series.returns.push_back(e.record.reward);
      series.gross_losses.push_back(e.record.gross_loss);
      series.any_violation.push_back(e.record.any_violation() ? 1 : 0);
      series.audit_lines.push_back(
          episode_audit_json(name, i, e, world.grid).dump());
      row.mean_return += e.record.reward;
      row.violation_rate += e.record.any_violation() ? 1.0 : 0.0;
      for (std::size_t k = 0; k < kViolationTypes; ++k)
        row.violation_type_rates[k] += double(e.record.violations[k]);
      row.fallback_count += e.record.fallback_used ? 1 : 0;
      if (variant.justification) {
        fid_pass += e.fidelity_pass ? 1.0 : 0.0;
        if (e.scored_text) {
          bleu_acc += e.bleu_score;
          rouge_acc += e.rouge_score;
          ++scored_text;
        }
      }
    }
    const double n = double(cfg.n_episodes);
    row.mean_return /= n;
    row.violation_rate /= n;
    for (auto& v : row.violation_type_rates) v /= n;
    row.cvar = cvar(series.returns, cvar_cfg.alpha);
    if (variant.justification) {
      row.fidelity_pass_rate = fid_pass / n;
      if (scored_text > 0) {
        row.bleu_mean = bleu_acc / double(scored_text);
        row.rouge_mean = rouge_acc / double(scored_text);
      }
    }
    out.report.rows.push_back(row);
    out.series[name] = std::move(series);
  }

  const auto retrieval = score_retrieval(world, gold);
  out.report.retrieval_precision = retrieval.precision;
  out.report.retrieval_recall = retrieval.recall;
  out.report.retrieval_jurisdiction_match = retrieval.jurisdiction_match;

  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"ClauseLensRL", "BaselineRL"},
      {"ClauseLensRLX", "ClauseLensRL"},
      {"ClauseLensRLX", "BaselineRL"},
      {"BaselineRL", "StaticHeuristic"}};
  for (const auto& [a, b] : pairs)
    out.report.comparisons.push_back(
        compare_agents(out.series.at(a).returns, out.series.at(b).returns,
                       cvar_cfg.alpha, cfg.n_boot, cfg.seed));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.report.comparisons[i].agent_a = pairs[i].first;
    out.report.comparisons[i].agent_b = pairs[i].second;
  }
  return out;
}

/// One-shot quote: retrieval, mask audit, action, premium, justification.
struct QuoteResult {
  EpisodeRecord record;
  FeasibilityMask mask;
  RetrievalResult retrieval;
  Justification justification;
};

inline QuoteResult quote_once(const MarketWorld& world,
                              const AgentVariant& variant,
                              const Checkpoint& ckpt,
                              const CedentRequest& request,
                              std::uint64_t seed) {
  QuoteResult q;
  q.retrieval = retrieve_topk(world.index, request, world.obs.k);
  const auto clauses = world.clauses_of(q.retrieval);
  q.mask = compile_feasibility_mask(clauses, request, world.grid,
                                    world.mask_context(request));
  std::vector<char> sampling_mask(world.grid.size(), 1);
  bool fallback = false;
  std::size_t action_id = 0;
  if (!variant.learned) {
    action_id = static_heuristic_action(request, world.grid);
  } else {
    if (!ckpt.has_net)
      throw DomainError("checkpoint carries no network");
    if (variant.masking) {
      if (q.mask.empty_feasible_set())
        fallback = true;
      else
        sampling_mask.assign(q.mask.feasible.begin(), q.mask.feasible.end());
    }
    const AugmentedState state = variant.retrieval
                                     ? world.observe(request, q.retrieval)
                                     : world.observe_plain(request);
    const PolicyOutput out = forward_policy(ckpt.net, state.values, sampling_mask);
    Rng action_rng = Rng::stream(seed, kStreamAction, 0);
    action_id = fallback ? q.mask.least_violating() : sample_action(out, action_rng);
  }
  Rng loss_rng = Rng::stream(seed, kStreamLoss, 0);
  q.record = step(request, action_id, world.grid, clauses, world.pricing,
                  world.env, loss_rng, &q.mask, fallback);
  q.justification = generate_justification(q.record, clauses, world.grid,
                                           world.env.capital_base);
  return q;
}

}  // namespace clauselens
