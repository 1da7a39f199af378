#include <doctest.h>

#include <memory>
#include <sstream>

#include "clauselens/clauselens.hpp"

using namespace clauselens;

namespace {

const MarketWorld& shared_world() {
  static std::unique_ptr<MarketWorld> world = [] {
    const auto corpus = gen_synthetic_corpus(42, 132);
    return std::make_unique<MarketWorld>(default_config(), corpus.clauses);
  }();
  return *world;
}

TrainConfig tiny_train(std::size_t episodes, std::size_t batch) {
  TrainConfig t;
  t.episodes_total = episodes;
  t.batch_size = batch;
  t.minibatch_size = std::min<std::size_t>(batch, 64);
  t.hidden_dim = 16;
  t.seed = 5;
  return t;
}

}  // namespace

TEST_CASE("static heuristic maps request types onto fixed grid cells") {
  const auto& world = shared_world();
  CedentRequest r;
  r.insured_value = 30.0;
  r.requested_treaty_type = TreatyType::QS;
  CHECK(world.grid.at(static_heuristic_action(r, world.grid)) ==
        TreatyAction{TreatyType::QS, 0.5, 0.0, 0.0});
  r.requested_treaty_type = TreatyType::CatXL;
  CHECK(world.grid.at(static_heuristic_action(r, world.grid)) ==
        TreatyAction{TreatyType::CatXL, 0.0, 5.0, 5.0});
  r.requested_treaty_type = TreatyType::AggXL;
  CHECK(world.grid.at(static_heuristic_action(r, world.grid)) ==
        TreatyAction{TreatyType::AggXL, 0.0, 5.0, 5.0});
}

TEST_CASE("single-episode rollout is fully reproducible") {
  const auto& world = shared_world();
  const auto variant = variant_for(VariantKind::ClauseLensRL);
  const NetParams params = NetParams::init(world.state_dim(), 8,
                                           world.grid.size(), 3);
  const auto a = rollout_episode(world, variant, params, 11, 0);
  const auto b = rollout_episode(world, variant, params, 11, 0);
  CHECK(a.record.reward == b.record.reward);
  CHECK(a.record.action_id == b.record.action_id);
  CHECK(a.record.gross_loss == b.record.gross_loss);
  CHECK(a.record.retrieved_clause_ids == b.record.retrieved_clause_ids);
  CHECK(a.sample.old_log_prob == b.sample.old_log_prob);
}

TEST_CASE("baseline rollouts carry no clauses and an all-true mask") {
  const auto& world = shared_world();
  const auto variant = variant_for(VariantKind::BaselineRL);
  const NetParams params = NetParams::init(world.state_dim(), 8,
                                           world.grid.size(), 3);
  const auto batch = rollout_batch(world, variant, params, 64, 21, 0);
  for (const auto& e : batch.episodes) {
    CHECK(e.record.retrieved_clause_ids.empty());
    CHECK(e.record.violations[kRetention] == 0);
    CHECK(e.record.violations[kMaskBreach] == 0);
    for (char m : e.sample.mask) CHECK(m == 1);
    // Clause blocks of the observation are exactly zero.
    for (std::size_t i = world.feature_dim(); i < world.state_dim(); ++i)
      CHECK(e.sample.state[i] == 0.0);
  }
}

TEST_CASE("masked rollouts never violate a retrieved predicate") {
  const auto& world = shared_world();
  const auto variant = variant_for(VariantKind::ClauseLensRL);
  const NetParams params = NetParams::init(world.state_dim(), 8,
                                           world.grid.size(), 17);
  const auto batch = rollout_batch(world, variant, params, 2000, 77, 0);
  for (const auto& e : batch.episodes) {
    CHECK(e.record.violations[kRetention] == 0);
    CHECK(e.record.violations[kMaskBreach] == 0);
  }
}

TEST_CASE("rollouts are identical under serial and parallel execution") {
  const auto& world = shared_world();
  const auto variant = variant_for(VariantKind::ClauseLensRLX);
  const NetParams params = NetParams::init(world.state_dim(), 8,
                                           world.grid.size(), 29);
  const auto serial = rollout_batch(world, variant, params, 128, 5, 0, 1);
  const auto parallel = rollout_batch(world, variant, params, 128, 5, 0, 4);
  REQUIRE(serial.episodes.size() == parallel.episodes.size());
  for (std::size_t i = 0; i < serial.episodes.size(); ++i) {
    CHECK(serial.episodes[i].record.reward ==
          parallel.episodes[i].record.reward);
    CHECK(serial.episodes[i].record.action_id ==
          parallel.episodes[i].record.action_id);
  }
}

TEST_CASE("old log probs are exact at epoch zero (ratio = 1)") {
  const auto& world = shared_world();
  const auto variant = variant_for(VariantKind::ClauseLensRL);
  const NetParams params = NetParams::init(world.state_dim(), 8,
                                           world.grid.size(), 101);
  const auto batch = rollout_batch(world, variant, params, 64, 13, 0);
  for (const auto& e : batch.episodes) {
    if (e.record.fallback_used) continue;
    const auto out = forward_policy(params, e.sample.state, e.sample.mask);
    CHECK(out.log_probs[e.sample.action] ==
          doctest::Approx(e.sample.old_log_prob).epsilon(1e-15));
  }
}

TEST_CASE("flat-reward batches leave parameters untouched") {
  NetParams params = NetParams::init(6, 4, 3, 8);
  const NetParams before = params;
  AdamState adam(params.flat.size());
  std::vector<TrainSample> samples;
  Rng rng(2);
  for (int i = 0; i < 16; ++i) {
    TrainSample s;
    s.state = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    s.mask = std::vector<char>(3, 1);
    const auto out = forward_policy(params, s.state, s.mask);
    s.action = sample_action(out, rng);
    s.old_log_prob = out.log_probs[s.action];
    s.value_target = 1.0;  // identical rewards -> zero advantages
    samples.push_back(s);
  }
  TrainConfig cfg = tiny_train(16, 16);
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  DualState duals;  // all lambdas zero
  Rng shuffle(4);
  const auto stats =
      ppo_update(params, adam, samples, duals, cfg, CvarConfig{}, true, shuffle);
  CHECK_FALSE(stats.aborted);
  CHECK(params.flat == before.flat);
}

TEST_CASE("non-finite batches abort the update and restore parameters") {
  NetParams params = NetParams::init(6, 4, 3, 8);
  const NetParams before = params;
  AdamState adam(params.flat.size());
  std::vector<TrainSample> samples;
  Rng rng(2);
  for (int i = 0; i < 8; ++i) {
    TrainSample s;
    s.state = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    s.mask = std::vector<char>(3, 1);
    const auto out = forward_policy(params, s.state, s.mask);
    s.action = sample_action(out, rng);
    s.old_log_prob = out.log_probs[s.action];
    s.value_target = i == 3 ? std::numeric_limits<double>::infinity() : 1.0;
    samples.push_back(s);
  }
  TrainConfig cfg = tiny_train(8, 8);
  DualState duals;
  Rng shuffle(4);
  const auto stats =
      ppo_update(params, adam, samples, duals, cfg, CvarConfig{}, true, shuffle);
  CHECK(stats.aborted);
  CHECK(params.flat == before.flat);
}

TEST_CASE("two-action bandit: greedy within 500 iterations") {
  // Single-state bandit, rewards (1, 0): plain PPO machinery should push
  // the policy onto action 0 almost surely.
  NetParams params = NetParams::init(2, 8, 2, 77);
  AdamState adam(params.flat.size());
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.minibatch_size = 64;
  cfg.epochs_per_batch = 4;
  cfg.learning_rate = 0.02;
  cfg.entropy_coef = 0.01;
  cfg.value_coef = 0.5;
  const std::vector<double> state = {1.0, 0.0};
  const std::vector<char> mask = {1, 1};
  DualState duals;
  CvarConfig cvar_cfg;

  double p0 = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Rng rng = Rng::stream(31, 50, std::uint64_t(iter));
    std::vector<TrainSample> batch;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      TrainSample s;
      s.state = state;
      s.mask = mask;
      const auto out = forward_policy(params, state, mask);
      s.action = sample_action(out, rng);
      s.old_log_prob = out.log_probs[s.action];
      s.value_target = s.action == 0 ? 1.0 : 0.0;
      batch.push_back(s);
    }
    Rng shuffle = Rng::stream(31, 51, std::uint64_t(iter));
    ppo_update(params, adam, batch, duals, cfg, cvar_cfg, false, shuffle);
    p0 = forward_policy(params, state, mask).probs[0];
    if (p0 > 0.99) break;
  }
  CHECK(p0 > 0.99);
}

TEST_CASE("static heuristic training is a no-op checkpoint") {
  const auto& world = shared_world();
  const auto result = train(world, variant_for(VariantKind::StaticHeuristic),
                            tiny_train(256, 128), CvarConfig{});
  CHECK(result.checkpoint.variant == "StaticHeuristic");
  CHECK_FALSE(result.checkpoint.has_net);
  CHECK(result.metrics.empty());
}

TEST_CASE("training twice with one seed gives byte-identical metrics") {
  const auto& world = shared_world();
  const auto cfg = tiny_train(512, 128);
  const auto a = train(world, variant_for(VariantKind::ClauseLensRL), cfg,
                       CvarConfig{});
  const auto b = train(world, variant_for(VariantKind::ClauseLensRL), cfg,
                       CvarConfig{});
  CHECK(a.metrics_jsonl() == b.metrics_jsonl());
  CHECK(a.checkpoint.net.flat == b.checkpoint.net.flat);
  CHECK(a.metrics.size() == 4);  // 512 episodes / batch 128
}

TEST_CASE("checkpoints reload bit-exact") {
  const auto& world = shared_world();
  const auto result = train(world, variant_for(VariantKind::BaselineRL),
                            tiny_train(256, 128), CvarConfig{});
  const std::string path = "ckpt_roundtrip_test.bin";
  save_checkpoint(result.checkpoint, path);
  const auto back = load_checkpoint(path);
  CHECK(back.variant == result.checkpoint.variant);
  REQUIRE(back.has_net == result.checkpoint.has_net);
  CHECK(back.net.flat == result.checkpoint.net.flat);
  CHECK(back.net.input_dim == result.checkpoint.net.input_dim);
  CHECK(back.duals.lambdas == result.checkpoint.duals.lambdas);
  std::remove(path.c_str());
}

TEST_CASE("variant flag table") {
  const auto s = variant_for(VariantKind::StaticHeuristic);
  CHECK_FALSE(s.retrieval);
  CHECK_FALSE(s.masking);
  CHECK_FALSE(s.justification);
  CHECK_FALSE(s.cvar);
  CHECK_FALSE(s.learned);
  const auto b = variant_for(VariantKind::BaselineRL);
  CHECK_FALSE(b.retrieval);
  CHECK(b.cvar);
  CHECK(b.learned);
  const auto rl = variant_for(VariantKind::ClauseLensRL);
  CHECK(rl.retrieval);
  CHECK(rl.masking);
  CHECK_FALSE(rl.justification);
  const auto rlx = variant_for(VariantKind::ClauseLensRLX);
  CHECK(rlx.retrieval);
  CHECK(rlx.masking);
  CHECK(rlx.justification);
  CHECK(rlx.cvar);
  for (auto k : {VariantKind::StaticHeuristic, VariantKind::BaselineRL,
                 VariantKind::ClauseLensRL, VariantKind::ClauseLensRLX})
    CHECK(variant_from_string(to_string(k)) == k);
}
