#include <doctest.h>

#include <memory>
#include <sstream>

#include "clauselens/clauselens.hpp"

using namespace clauselens;

namespace {

struct Fixture {
  SyntheticCorpus corpus;
  std::unique_ptr<MarketWorld> world;
  std::map<std::string, Checkpoint> checkpoints;
  std::vector<GoldScenario> gold;
  std::map<std::string, std::string> references;

  Fixture() {
    corpus = gen_synthetic_corpus(42, 132);
    world = std::make_unique<MarketWorld>(default_config(), corpus.clauses);
    for (auto kind : {VariantKind::StaticHeuristic, VariantKind::BaselineRL,
                      VariantKind::ClauseLensRL, VariantKind::ClauseLensRLX}) {
      Checkpoint c;
      c.variant = to_string(kind);
      if (kind != VariantKind::StaticHeuristic) {
        c.has_net = true;
        c.net = NetParams::init(world->state_dim(), 16, world->grid.size(),
                                std::uint64_t(kind) + 100);
      }
      checkpoints[c.variant] = c;
    }
    std::istringstream gold_in(gold_jsonl(corpus));
    gold = parse_gold_jsonl(gold_in);
    std::istringstream ref_in(references_jsonl(corpus));
    references = parse_references_jsonl(ref_in);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

EvalConfig tiny_eval() {
  EvalConfig e;
  e.n_episodes = 60;
  e.n_boot = 300;
  e.seed = 9;
  return e;
}

}  // namespace

TEST_CASE("paired bootstrap: identical, constant-shift, and normal samples") {
  const std::vector<double> base = {1.0, 2.0, 3.0, 4.0, 5.0,
                                    6.0, 7.0, 8.0, 9.0, 10.0};
  const auto self = compare_agents(base, base, 0.3, 500, 1);
  CHECK(self.mean_diff == 0.0);
  CHECK(self.mean_ci_lo == 0.0);
  CHECK(self.mean_ci_hi == 0.0);
  CHECK_FALSE(self.mean_significant);
  CHECK_FALSE(self.cvar_significant);

  std::vector<double> shifted = base;
  for (auto& v : shifted) v += 1.0;
  const auto plus = compare_agents(shifted, base, 0.3, 500, 1);
  CHECK(plus.mean_diff == doctest::Approx(1.0));
  CHECK(plus.mean_ci_lo == doctest::Approx(1.0));
  CHECK(plus.mean_ci_hi == doctest::Approx(1.0));
  CHECK(plus.mean_significant);
  CHECK(plus.cvar_significant);

  // Known gap of 0.5 between unit-variance normal samples, n = 5000: the CI
  // must cover the gap and exclude zero (closed-form CI half-width ~0.055).
  Rng rng(111);
  std::vector<double> a(5000), b(5000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.5 + rng.normal();
    b[i] = rng.normal();
  }
  const auto gap = compare_agents(a, b, 0.10, 2000, 3);
  CHECK(gap.mean_ci_lo < 0.5);
  CHECK(gap.mean_ci_hi > 0.5);
  CHECK(gap.mean_ci_lo > 0.0);
  CHECK(gap.mean_significant);

  CHECK_THROWS_AS(compare_agents({1.0}, {1.0, 2.0}, 0.5, 10, 1), DomainError);
}

TEST_CASE("retrieval scoring on the generated gold set is near perfect") {
  const auto& f = fixture();
  const auto m = score_retrieval(*f.world, f.gold);
  CHECK(m.precision >= 0.95);
  CHECK(m.recall >= 0.95);
  CHECK(m.jurisdiction_match == doctest::Approx(1.0));
}

TEST_CASE("evaluation runs all four agents on shared draws") {
  const auto& f = fixture();
  const auto out = run_evaluation(*f.world, f.checkpoints, f.gold,
                                  f.references, tiny_eval(), CvarConfig{},
                                  "cfgdigest", "corpusdigest");
  REQUIRE(out.report.rows.size() == 4);

  // Identical cedent and loss draws per index across agents.
  const auto& g0 = out.series.at("StaticHeuristic").gross_losses;
  for (const auto& [name, series] : out.series) {
    REQUIRE(series.gross_losses.size() == g0.size());
    for (std::size_t i = 0; i < g0.size(); ++i)
      CHECK(series.gross_losses[i] == g0[i]);
  }

  // Masked agents cannot violate retention or breach the mask.
  for (const auto& row : out.report.rows) {
    if (row.variant == "ClauseLensRL" || row.variant == "ClauseLensRLX") {
      CHECK(row.violation_type_rates[kRetention] == 0.0);
      CHECK(row.violation_type_rates[kMaskBreach] == 0.0);
    }
    if (row.variant == "ClauseLensRLX") {
      REQUIRE(row.fidelity_pass_rate.has_value());
      CHECK(*row.fidelity_pass_rate == doctest::Approx(1.0));
      CHECK(row.bleu_mean.has_value());
    } else {
      CHECK_FALSE(row.fidelity_pass_rate.has_value());
    }
  }

  // Violation rate recomputed from the stored series matches the row.
  for (const auto& row : out.report.rows) {
    const auto& flags = out.series.at(row.variant).any_violation;
    double rate = 0.0;
    for (int v : flags) rate += v;
    rate /= double(flags.size());
    CHECK(row.violation_rate == doctest::Approx(rate).epsilon(1e-12));
  }
}

TEST_CASE("evaluation is deterministic end to end") {
  const auto& f = fixture();
  const auto a = run_evaluation(*f.world, f.checkpoints, f.gold, f.references,
                                tiny_eval(), CvarConfig{}, "d", "c");
  const auto b = run_evaluation(*f.world, f.checkpoints, f.gold, f.references,
                                tiny_eval(), CvarConfig{}, "d", "c");
  CHECK(a.report.to_json().dump() == b.report.to_json().dump());
  CHECK(a.series.at("BaselineRL").audit_lines ==
        b.series.at("BaselineRL").audit_lines);

  EvalConfig threaded = tiny_eval();
  threaded.threads = 4;
  const auto c = run_evaluation(*f.world, f.checkpoints, f.gold, f.references,
                                threaded, CvarConfig{}, "d", "c");
  CHECK(a.report.to_json().dump() == c.report.to_json().dump());
}

TEST_CASE("report json round trip and table rendering") {
  const auto& f = fixture();
  const auto out = run_evaluation(*f.world, f.checkpoints, f.gold,
                                  f.references, tiny_eval(), CvarConfig{},
                                  "cfg", "corp");
  const auto dumped = out.report.to_json().dump(2);
  const auto parsed = EvalReport::from_json(nlohmann::json::parse(dumped));
  CHECK(parsed.to_json().dump(2) == dumped);

  const auto table = out.report.render_table();
  std::size_t rows = 0;
  for (const auto& name : {"StaticHeuristic", "BaselineRL", "ClauseLensRL",
                           "ClauseLensRLX"})
    rows += table.find(name) != std::string::npos ? 1 : 0;
  CHECK(rows == 4);
}

TEST_CASE("config digest flips when any byte changes") {
  auto cfg = default_config();
  const auto d1 = cfg.digest();
  cfg.set("env", "capital_base", "26");
  CHECK(cfg.digest() != d1);

  const std::string text = default_config().dump();
  std::string mutated = text;
  mutated[mutated.size() / 2] ^= 1;
  CHECK(hex64(fnv1a64(text.data(), text.size())) !=
        hex64(fnv1a64(mutated.data(), mutated.size())));
}

TEST_CASE("missing checkpoints are a named error") {
  const auto& f = fixture();
  std::map<std::string, Checkpoint> incomplete = f.checkpoints;
  incomplete.erase("ClauseLensRL");
  CHECK_THROWS_AS(run_evaluation(*f.world, incomplete, f.gold, f.references,
                                 tiny_eval(), CvarConfig{}, "d", "c"),
                  IoError);
}

TEST_CASE("quote helper produces a consistent masked quote") {
  const auto& f = fixture();
  CedentRequest req;
  req.jurisdiction = Jurisdiction::UsFl;
  req.line_of_business = LineOfBusiness::PropertyCat;
  req.insured_value = 50.0;
  req.exposure_score = 0.4;
  req.historical_loss_ratio = 0.7;
  req.requested_treaty_type = TreatyType::QS;
  req.requested_limit = 5.0;
  const auto q = quote_once(*f.world, variant_for(VariantKind::ClauseLensRLX),
                            f.checkpoints.at("ClauseLensRLX"), req, 31);
  CHECK(q.record.premium >= 0.0);
  CHECK(q.retrieval.hits.size() <= f.world->obs.k);
  if (!q.record.fallback_used)
    CHECK(bool(q.mask.feasible[q.record.action_id]));
  const auto clauses = f.world->clauses_of(q.retrieval);
  CHECK(fidelity_check(q.justification, q.record, clauses, f.world->grid,
                       f.world->env.capital_base)
            .pass);
}
