#include <doctest.h>

#include <sstream>

#include "clauselens/corpus_gen.hpp"

using namespace clauselens;

TEST_CASE("source counts follow the corpus mix at scale 66 and 660") {
  const auto small = gen_synthetic_corpus(1, 66);
  CHECK(small.source_counts.at("commercial-treaty") == 32);
  CHECK(small.source_counts.at("solvency-ii") == 11);
  CHECK(small.source_counts.at("naic-rbc") == 8);
  CHECK(small.source_counts.at("ifrs17-apra-mas") == 6);
  CHECK(small.source_counts.at("institutional") == 9);
  CHECK(small.clauses.size() == 66);

  const auto big = gen_synthetic_corpus(1, 660);
  CHECK(big.source_counts.at("commercial-treaty") == 320);
  CHECK(big.source_counts.at("solvency-ii") == 110);
  CHECK(big.source_counts.at("naic-rbc") == 80);
  CHECK(big.source_counts.at("ifrs17-apra-mas") == 60);
  CHECK(big.source_counts.at("institutional") == 90);
  CHECK(big.clauses.size() == 660);

  CHECK_THROWS_AS(gen_synthetic_corpus(1, 5), ConfigError);
}

TEST_CASE("same seed gives a byte-identical corpus file") {
  const auto a = gen_synthetic_corpus(7, 132);
  const auto b = gen_synthetic_corpus(7, 132);
  CHECK(corpus_jsonl(a) == corpus_jsonl(b));
  CHECK(gold_jsonl(a) == gold_jsonl(b));
  CHECK(references_jsonl(a) == references_jsonl(b));
  CHECK(manifest_json(a) == manifest_json(b));

  const auto c = gen_synthetic_corpus(8, 132);
  CHECK(corpus_jsonl(a) != corpus_jsonl(c));
}

TEST_CASE("loader recount agrees with the generator manifest") {
  const auto corpus = gen_synthetic_corpus(42, 660);
  std::istringstream in(corpus_jsonl(corpus));
  const auto loaded = parse_corpus(in, "generated");
  REQUIRE(loaded.size() == corpus.clauses.size());
  std::map<std::string, std::size_t> recount;
  for (const auto& c : loaded) ++recount[to_string(c.source)];
  for (const auto& [source, count] : corpus.source_counts)
    CHECK(recount[source] == count);
}

TEST_CASE("every gold id exists and its predicate matches the scenario") {
  const auto corpus = gen_synthetic_corpus(3, 220);
  std::map<std::string, const Clause*> by_id;
  for (const auto& c : corpus.clauses) by_id[c.id] = &c;
  CHECK(corpus.scenarios.size() == 30);  // 5 jurisdictions x 2 lines x 3 types
  for (const auto& sc : corpus.scenarios) {
    for (const auto& id : sc.relevant) {
      REQUIRE(by_id.count(id));
      const Clause* c = by_id.at(id);
      REQUIRE(c->predicate.has_value());
      CHECK(predicate_matches_scenario(*c->predicate, sc.jurisdiction, sc.line,
                                       sc.treaty));
      const std::string tag = jurisdiction_tag(c->jurisdiction);
      CHECK((tag == to_string(sc.jurisdiction) || tag == "global"));
    }
  }
}

TEST_CASE("every predicate is reachable from some scenario template") {
  const auto corpus = gen_synthetic_corpus(9, 150);
  std::map<std::string, bool> covered;
  for (const auto& sc : corpus.scenarios)
    for (const auto& id : sc.relevant) covered[id] = true;
  for (const auto& c : corpus.clauses)
    if (c.predicate) CHECK(covered[c.id]);
}

TEST_CASE("references cover every scenario and carry the action sentence") {
  const auto corpus = gen_synthetic_corpus(5, 66);
  CHECK(corpus.references.size() == corpus.scenarios.size());
  for (const auto& [key, text] : corpus.references)
    CHECK(text.find("limits retention exposure.") != std::string::npos);
}

TEST_CASE("generated predicates validate and thresholds are in range") {
  const auto corpus = gen_synthetic_corpus(11, 330);
  std::size_t with_pred = 0;
  for (const auto& c : corpus.clauses) {
    CHECK_FALSE(c.text.empty());
    if (!c.predicate) continue;
    ++with_pred;
    CHECK_NOTHROW(validate_predicate(*c.predicate));
    CHECK(c.predicate->treaty_type.has_value());
    CHECK(c.predicate->line_of_business.has_value());
  }
  // All regulatory sources carry predicates; commercial ones only partially.
  CHECK(with_pred > corpus.clauses.size() / 2);
  CHECK(with_pred < corpus.clauses.size());
}
