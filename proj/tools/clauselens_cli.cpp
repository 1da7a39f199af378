// Command-line surface for the treaty quoting pipeline: corpus generation,
// training, paired evaluation, one-shot quoting, and report rendering.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "clauselens/clauselens.hpp"

namespace fs = std::filesystem;
using namespace clauselens;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::string out_dir = ".";
  std::size_t threads = 1;
  bool verbose = false;
};

ConfigFile load_config(const GlobalOpts& g) {
  ConfigFile cfg = default_config();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw IoError("cannot open config file '" + g.config_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    cfg.merge(ConfigFile::parse(text));
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

CedentRequest request_from_json(const nlohmann::json& j) {
  CedentRequest r;
  r.jurisdiction = jurisdiction_from_string(j.at("jurisdiction").get<std::string>());
  r.line_of_business =
      line_from_string(j.at("line_of_business").get<std::string>());
  r.insured_value = j.at("insured_value").get<double>();
  r.exposure_score = j.at("exposure_score").get<double>();
  r.historical_loss_ratio = j.value("historical_loss_ratio", 0.0);
  r.requested_treaty_type =
      treaty_type_from_string(j.at("requested_treaty_type").get<std::string>());
  r.requested_limit = j.value("requested_limit", 0.0);
  r.requested_deductible = j.value("requested_deductible", 0.0);
  const auto problems = validate_request(r);
  if (!problems.empty()) throw DomainError("request invalid: " + problems[0]);
  return r;
}

int run_gen_corpus(const GlobalOpts& g, std::size_t scale_override) {
  ConfigFile cfg = load_config(g);
  const std::size_t scale = scale_override > 0
                                ? scale_override
                                : std::size_t(cfg.get_int("corpus", "scale"));
  const std::uint64_t seed =
      g.seed ? *g.seed : std::uint64_t(cfg.get_int("corpus", "seed"));
  const auto corpus = gen_synthetic_corpus(seed, scale);
  const fs::path out(g.out_dir);
  write_file(out / "corpus.jsonl", corpus_jsonl(corpus));
  write_file(out / "gold.jsonl", gold_jsonl(corpus));
  write_file(out / "references.jsonl", references_jsonl(corpus));
  write_file(out / "manifest.json", manifest_json(corpus));
  if (g.verbose)
    std::cout << "corpus: " << corpus.clauses.size() << " clauses, "
              << corpus.scenarios.size() << " scenarios\n";
  std::cout << "wrote " << (out / "corpus.jsonl").string() << "\n";
  return 0;
}

int run_train(const GlobalOpts& g, const std::string& variant_name,
              const std::string& corpus_path) {
  ConfigFile cfg = load_config(g);
  const auto kind = variant_from_string(variant_name);
  const auto variant = variant_for(kind);
  MarketWorld world(cfg, load_corpus(corpus_path));
  TrainConfig train_cfg = train_config_from(cfg);
  if (g.seed) train_cfg.seed = *g.seed;
  if (g.episodes) train_cfg.episodes_total = *g.episodes;
  if (g.threads > 1) train_cfg.threads = g.threads;
  const CvarConfig cvar_cfg = cvar_config_from(cfg);

  const auto result = train(world, variant, train_cfg, cvar_cfg);
  const fs::path out(g.out_dir);
  fs::create_directories(out);
  const std::string name = to_string(kind);
  save_checkpoint(result.checkpoint,
                  (out / ("checkpoint_" + name + ".bin")).string());
  write_file(out / ("metrics_" + name + ".jsonl"), result.metrics_jsonl());
  if (g.verbose && !result.metrics.empty()) {
    const auto& last = result.metrics.back();
    std::cout << name << ": " << result.metrics.size()
              << " iterations, final mean return " << last.mean_return
              << ", final cvar " << last.batch_cvar << "\n";
  }
  std::cout << "wrote " << (out / ("checkpoint_" + name + ".bin")).string()
            << "\n";
  return 0;
}

int run_evaluate(const GlobalOpts& g, const std::string& corpus_path,
                 const std::string& gold_path, const std::string& refs_path,
                 const std::string& ckpt_dir) {
  ConfigFile cfg = load_config(g);
  MarketWorld world(cfg, load_corpus(corpus_path));
  EvalConfig eval_cfg = eval_config_from(cfg);
  if (g.seed) eval_cfg.seed = *g.seed;
  if (g.episodes) eval_cfg.n_episodes = *g.episodes;
  if (g.threads > 1) eval_cfg.threads = g.threads;
  const CvarConfig cvar_cfg = cvar_config_from(cfg);

  std::map<std::string, Checkpoint> checkpoints;
  for (auto kind : {VariantKind::StaticHeuristic, VariantKind::BaselineRL,
                    VariantKind::ClauseLensRL, VariantKind::ClauseLensRLX}) {
    const std::string name = to_string(kind);
    const fs::path path = fs::path(ckpt_dir) / ("checkpoint_" + name + ".bin");
    if (!fs::exists(path))
      throw IoError("missing checkpoint for " + name + " at " + path.string());
    checkpoints[name] = load_checkpoint(path.string());
  }

  std::vector<GoldScenario> gold;
  {
    std::ifstream in(gold_path);
    if (!in) throw IoError("cannot open gold file '" + gold_path + "'");
    gold = parse_gold_jsonl(in);
  }
  std::map<std::string, std::string> references;
  {
    std::ifstream in(refs_path);
    if (!in) throw IoError("cannot open references file '" + refs_path + "'");
    references = parse_references_jsonl(in);
  }

  const std::string corpus_text = read_file(corpus_path);
  const std::string corpus_digest =
      hex64(fnv1a64(corpus_text.data(), corpus_text.size()));
  const auto out = run_evaluation(world, checkpoints, gold, references,
                                  eval_cfg, cvar_cfg, cfg.digest(),
                                  corpus_digest);

  const fs::path dir(g.out_dir);
  write_file(dir / "report.json", out.report.to_json().dump(2) + "\n");
  write_file(dir / "report.txt", out.report.render_table());
  for (const auto& [name, series] : out.series) {
    std::string audit;
    for (const auto& line : series.audit_lines) audit += line + "\n";
    write_file(dir / ("audit_" + name + ".jsonl"), audit);
  }
  std::cout << out.report.render_table();
  std::cout << "wrote " << (dir / "report.json").string() << "\n";
  return 0;
}

int run_quote(const GlobalOpts& g, const std::string& request_path,
              const std::string& corpus_path, const std::string& ckpt_path) {
  ConfigFile cfg = load_config(g);
  MarketWorld world(cfg, load_corpus(corpus_path));
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto variant = variant_for(variant_from_string(ckpt.variant));
  const auto request =
      request_from_json(nlohmann::json::parse(read_file(request_path)));
  const std::uint64_t seed = g.seed ? *g.seed : 17;

  const auto q = quote_once(world, variant, ckpt, request, seed);
  const TreatyAction& action = world.grid.at(q.record.action_id);

  nlohmann::ordered_json j;
  j["agent"] = ckpt.variant;
  j["action_id"] = q.record.action_id;
  j["treaty_type"] = to_string(action.treaty_type);
  j["quota_share"] = action.quota_share;
  j["attachment"] = action.attachment;
  j["limit"] = action.limit;
  j["premium"] = q.record.premium;
  j["fallback"] = q.record.fallback_used;
  j["justification"] = q.justification.text;
  j["cited_clause_ids"] = q.justification.cited_clause_ids;
  nlohmann::ordered_json retrieved = nlohmann::ordered_json::array();
  for (const auto& hit : q.retrieval.hits) {
    nlohmann::ordered_json h;
    h["id"] = hit.id;
    h["score"] = hit.score;
    retrieved.push_back(h);
  }
  j["retrieved"] = retrieved;
  nlohmann::ordered_json masked = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < world.grid.size(); ++i) {
    if (q.mask.feasible[i]) continue;
    nlohmann::ordered_json m;
    m["action_id"] = i;
    m["excluded_by"] = q.mask.excluded_by[i];
    masked.push_back(m);
  }
  j["mask_audit"] = masked;

  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (g.out_dir != ".") write_file(fs::path(g.out_dir) / "quote.json", text);
  return 0;
}

int run_report(const GlobalOpts& g, const std::string& in_path) {
  const auto report =
      EvalReport::from_json(nlohmann::json::parse(read_file(in_path)));
  const std::string table = report.render_table();
  std::cout << table;
  if (g.out_dir != ".") write_file(fs::path(g.out_dir) / "report.txt", table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clause-grounded reinsurance treaty quoting pipeline"};
  app.require_subcommand(0, 1);

  GlobalOpts g;
  bool print_config = false;
  app.add_option("--config", g.config_path,
                 "configuration file (overlays defaults)");
  app.add_option("--seed", g.seed, "seed override for the subcommand");
  app.add_option("--episodes", g.episodes, "episode-count override");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads,
                 "worker threads (results are identical)");
  app.add_flag("--verbose", g.verbose, "chatty progress output");
  app.add_flag("--print-config", print_config,
               "print the effective configuration and exit");

  auto* gen =
      app.add_subcommand("gen-corpus", "generate the synthetic clause corpus");
  std::size_t scale = 0;
  gen->add_option("--scale", scale, "corpus size (defaults to [corpus] scale)");

  auto* tr = app.add_subcommand("train", "train one agent variant");
  std::string variant_name, corpus_path;
  tr->add_option("--variant", variant_name,
                 "StaticHeuristic|BaselineRL|ClauseLensRL|ClauseLensRLX")
      ->required();
  tr->add_option("--corpus", corpus_path, "corpus.jsonl path")->required();

  auto* ev =
      app.add_subcommand("evaluate", "paired evaluation of all four agents");
  std::string eval_corpus, gold_path, refs_path, ckpt_dir = ".";
  ev->add_option("--corpus", eval_corpus, "corpus.jsonl path")->required();
  ev->add_option("--gold", gold_path, "gold.jsonl path")->required();
  ev->add_option("--references", refs_path, "references.jsonl path")
      ->required();
  ev->add_option("--checkpoints", ckpt_dir,
                 "directory holding checkpoint_<variant>.bin");

  auto* qu = app.add_subcommand(
      "quote", "one-shot quote with justification and mask audit");
  std::string request_path, quote_corpus, quote_ckpt;
  qu->add_option("--request", request_path, "request JSON file")->required();
  qu->add_option("--corpus", quote_corpus, "corpus.jsonl path")->required();
  qu->add_option("--checkpoint", quote_ckpt, "agent checkpoint")->required();

  auto* rp = app.add_subcommand("report", "render a report.json as a table");
  std::string report_in;
  rp->add_option("--in", report_in, "report.json path")->required();

  for (auto* sub : {gen, tr, ev, qu, rp}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config) {
      std::cout << load_config(g).dump();
      return 0;
    }
    if (gen->parsed()) return run_gen_corpus(g, scale);
    if (tr->parsed()) return run_train(g, variant_name, corpus_path);
    if (ev->parsed())
      return run_evaluate(g, eval_corpus, gold_path, refs_path, ckpt_dir);
    if (qu->parsed())
      return run_quote(g, request_path, quote_corpus, quote_ckpt);
    if (rp->parsed()) return run_report(g, report_in);
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << e.what() << "\n";
    return 5;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 6;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 7;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
