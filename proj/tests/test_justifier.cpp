#include <doctest.h>

#include <cmath>

#include "clauselens/justifier.hpp"

using namespace clauselens;

namespace {

Clause quota_cap_clause(double threshold) {
  Clause c;
  c.id = "NAIC-0042";
  c.source = ClauseSource::NaicRbc;
  c.jurisdiction = Jurisdiction::UsFl;
  c.text = "florida proportional property cap";
  ConstraintPredicate p;
  p.kind = PredicateKind::MaxQuotaShare;
  p.threshold = threshold;
  p.jurisdiction = Jurisdiction::UsFl;
  p.treaty_type = TreatyType::QS;
  c.predicate = p;
  return c;
}

Clause capital_clause() {
  Clause c;
  c.id = "INST-0007";
  c.source = ClauseSource::Institutional;
  c.jurisdiction = std::nullopt;
  c.text = "global capital guardrail";
  ConstraintPredicate p;
  p.kind = PredicateKind::MinCapitalRatio;
  p.threshold = 0.5;
  p.treaty_type = TreatyType::QS;
  c.predicate = p;
  return c;
}

EpisodeRecord record_for(const ActionGrid& grid, const TreatyAction& action) {
  EpisodeRecord r;
  r.request.jurisdiction = Jurisdiction::UsFl;
  r.request.insured_value = 40.0;
  r.request.exposure_score = 0.3;
  r.action_id = grid.find(action);
  REQUIRE(r.action_id != ActionGrid::npos);
  r.premium = 1.1;
  return r;
}

}  // namespace

TEST_CASE("sixty percent quota share citation") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.7);
  const std::vector<const Clause*> retrieved = {&cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.6, 0.0, 0.0});
  const auto j = generate_justification(rec, retrieved, grid, 25.0);
  CHECK(j.text.find("NAIC-0042") != std::string::npos);
  CHECK(j.text.find("60% quota share") != std::string::npos);
  REQUIRE(j.cited_clause_ids.size() == 1);
  CHECK(fidelity_check(j, rec, retrieved, grid, 25.0).pass);
}

TEST_CASE("empty retrieval yields the action sentence alone") {
  const auto grid = build_action_grid(GridConfig{});
  const auto rec = record_for(grid, {TreatyType::CatXL, 0.0, 5.0, 10.0});
  const auto j = generate_justification(rec, {}, grid, 25.0);
  CHECK(j.cited_clause_ids.empty());
  CHECK(j.text == "A 10M xs 5M CatXL treaty limits retention exposure.");
  CHECK(fidelity_check(j, rec, {}, grid, 25.0).pass);
}

TEST_CASE("two binding predicates render in retrieval rank order") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.7);
  const Clause capital = capital_clause();
  const std::vector<const Clause*> retrieved = {&capital, &cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.4, 0.0, 0.0});
  const auto j = generate_justification(rec, retrieved, grid, 25.0);
  REQUIRE(j.cited_clause_ids.size() == 2);
  CHECK(j.cited_clause_ids[0] == "INST-0007");
  CHECK(j.cited_clause_ids[1] == "NAIC-0042");
  CHECK(j.text.find("INST-0007") < j.text.find("NAIC-0042"));
  CHECK(fidelity_check(j, rec, retrieved, grid, 25.0).pass);
}

TEST_CASE("violated predicates are never cited as satisfied") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.3);
  const std::vector<const Clause*> retrieved = {&cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.6, 0.0, 0.0});
  const auto j = generate_justification(rec, retrieved, grid, 25.0);
  CHECK(j.cited_clause_ids.empty());
  CHECK(fidelity_check(j, rec, retrieved, grid, 25.0).pass);
}

TEST_CASE("tampered numbers fail with a numeric-mismatch reason") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.7);
  const std::vector<const Clause*> retrieved = {&cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.6, 0.0, 0.0});
  auto j = generate_justification(rec, retrieved, grid, 25.0);
  auto pos = j.text.find("60%");
  REQUIRE(pos != std::string::npos);
  j.text.replace(pos, 3, "80%");
  const auto res = fidelity_check(j, rec, retrieved, grid, 25.0);
  CHECK_FALSE(res.pass);
  REQUIRE_FALSE(res.reasons.empty());
  CHECK(res.reasons[0].find("numeric-mismatch") != std::string::npos);
}

TEST_CASE("citing a clause that was not retrieved fails attribution") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.7);
  const std::vector<const Clause*> retrieved = {&cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.6, 0.0, 0.0});
  auto j = generate_justification(rec, retrieved, grid, 25.0);
  j.cited_clause_ids.push_back("GHOST-1");
  const auto res = fidelity_check(j, rec, retrieved, grid, 25.0);
  CHECK_FALSE(res.pass);
  bool found = false;
  for (const auto& r : res.reasons)
    found = found || r.find("attribution") != std::string::npos;
  CHECK(found);
}

TEST_CASE("generation is deterministic") {
  const auto grid = build_action_grid(GridConfig{});
  const Clause cap = quota_cap_clause(0.7);
  const std::vector<const Clause*> retrieved = {&cap};
  const auto rec = record_for(grid, {TreatyType::QS, 0.5, 0.0, 0.0});
  const auto a = generate_justification(rec, retrieved, grid, 25.0);
  const auto b = generate_justification(rec, retrieved, grid, 25.0);
  CHECK(a.text == b.text);
  CHECK(a.cited_clause_ids == b.cited_clause_ids);
}

TEST_CASE("bleu identity, disjoint, and the hand-computed bigram case") {
  CHECK(bleu("the cat sat down", "the cat sat down") == doctest::Approx(1.0));
  CHECK(bleu("alpha beta gamma", "delta epsilon zeta") == doctest::Approx(0.0));
  CHECK(bleu("", "reference words") == 0.0);
  CHECK_THROWS_AS(bleu("words", ""), DomainError);

  // p1 = 3/3, p2 = 2/2, brevity = exp(1 - 4/3): score = 0.716531.
  const double hand = std::exp(1.0 - 4.0 / 3.0);
  CHECK(bleu("the cat sat", "the cat sat down", 2) ==
        doctest::Approx(hand).epsilon(1e-9));
  CHECK(bleu("the cat sat", "the cat sat down", 2) ==
        doctest::Approx(0.7165).epsilon(1e-3));
}

TEST_CASE("bleu stays within [0, 1] on random token strings") {
  Rng rng(3141);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta",
                                          "epsilon"};
  for (int trial = 0; trial < 200; ++trial) {
    auto sentence = [&](int len) {
      std::string s;
      for (int i = 0; i < len; ++i)
        s += words[std::size_t(rng.uniform01() * 5) % 5] + " ";
      return s;
    };
    const std::string cand = sentence(1 + int(rng.uniform01() * 8));
    const std::string ref = sentence(1 + int(rng.uniform01() * 8));
    const double b = bleu(cand, ref);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0 + 1e-12);
    CHECK(bleu(cand, cand) == doctest::Approx(1.0));
  }
}

TEST_CASE("rouge-1 recall arithmetic") {
  CHECK(rouge1("identical words here", "identical words here") ==
        doctest::Approx(1.0));
  CHECK(rouge1("alpha beta", "gamma delta") == doctest::Approx(0.0));
  CHECK(rouge1("a b c", "a b d e") == doctest::Approx(0.5));
}
