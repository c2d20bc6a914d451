#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "convoforge/config.hpp"
#include "convoforge/corpus.hpp"
#include "convoforge/error.hpp"
#include "convoforge/pipeline.hpp"
#include "convoforge/synthetic.hpp"

namespace cf = convoforge;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  bool fallback_vectors = false;
  std::string spec = "all";
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "TOML config file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "Override every seed in the config");
  app->add_option("--jobs", f.jobs, "Worker threads for featurization and explanation")->check(CLI::PositiveNumber);
  app->add_flag("--fallback-vectors", f.fallback_vectors,
                "Use the built-in hashing embedder and lexicon sentiment when no sidecar is given");
}

std::optional<std::vector<int>> parse_spec_flag(const std::string& spec) {
  if (spec == "all") return std::nullopt;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(spec, &pos);
    if (pos == spec.size() && v >= 1 && v <= 6) return std::vector<int>{v};
  } catch (const std::exception&) {
  }
  throw cf::ValidationError("--spec must be 1..6 or all, got '" + spec + "'");
}

// Config from --config, or defaults with every seed taken from --seed (0 when
// absent) for the single-step subcommands used without a config file.
cf::Config resolve_config(const CommonFlags& f, const std::string& input = {}) {
  cf::Config c;
  if (!f.config.empty()) {
    c = cf::load_config(f.config);
  } else {
    const std::uint64_t s = f.seed.value_or(0);
    c.data.balance_seed = c.data.split_seed = s;
    c.features.options.lda_seed = s;
    c.model.params.seed = s;
    c.topics.seed = s;
    c.explain.seed = s;
    c.hash = cf::hex64(cf::fnv1a64("defaults;seed=" + std::to_string(s)));
  }
  if (!input.empty()) c.data.input = input;
  cf::ConfigOverrides o;
  if (!f.config.empty()) o.seed = f.seed;
  o.jobs = f.jobs;
  o.fallback_vectors = f.fallback_vectors;
  o.specs = parse_spec_flag(f.spec);
  cf::apply_overrides(c, o);
  return c;
}

cf::Corpus read_corpus_file(const std::string& path, cf::Provenance provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cf::ValidationError("cannot open " + path);
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  return cf::parse_corpus(in, csv ? cf::CorpusFormat::kCsv : cf::CorpusFormat::kJsonl, provenance);
}

cf::FeatureTable read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cf::ValidationError("cannot open " + path);
  return cf::FeatureTable::read_csv(in);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cf::ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw cf::ValidationError(path + ": " + e.what());
  }
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    cf::write_text_file(out, content);
  }
}

std::string corpus_jsonl(const cf::Corpus& corpus, const std::string& hash) {
  std::ostringstream s;
  cf::write_corpus_jsonl(corpus, s, hash);
  return s.str();
}

// The registry the feature table was built against: with topic columns the
// topic block is resized to match.
cf::FeatureRegistry registry_for(const cf::Resources& resources, const cf::FeatureTable& table) {
  std::size_t topics = 0;
  while (table.column_index(cf::topic_feature_name(topics))) ++topics;
  return topics > 0 ? resources.registry.with_topic_count(topics) : resources.registry;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convoforge: conversation features, conflict-outcome models and importance reports"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string in, out, labels, model_path, provenance = "other";

  auto* ingest = app.add_subcommand("ingest", "Parse, label and preprocess a corpus into JSONL");
  add_common(ingest, f);
  ingest->add_option("--in", in, "Corpus file (.jsonl or .csv); defaults to [data] input");
  ingest->add_option("--labels", labels, "CSV conversation_id,label");
  ingest->add_option("--provenance", provenance, "synthetic|reddit|other");
  ingest->add_option("--out", out, "Output JSONL (stdout when omitted)");

  auto* featurize = app.add_subcommand("featurize", "Compute registry feature columns per conversation");
  add_common(featurize, f);
  featurize->add_option("--in", in, "Corpus JSONL")->required();
  featurize->add_option("--out", out, "Output CSV (stdout when omitted)");

  auto* balance = app.add_subcommand("balance", "Downsample to balance classes within confounder deciles");
  add_common(balance, f);
  balance->add_option("--in", in, "Corpus JSONL")->required();
  balance->add_option("--out", out, "Output JSONL (stdout when omitted)");

  auto* topics = app.add_subcommand("topics", "Cluster conversations into topics plus a residual topic");
  add_common(topics, f);
  topics->add_option("--in", in, "Corpus JSONL")->required();
  topics->add_option("--out", out, "Topic report JSON (stdout when omitted)");

  auto* train = app.add_subcommand("train", "Train one model spec on a seeded split of a feature CSV");
  add_common(train, f);
  train->add_option("--spec", f.spec, "Model specification 1..6 or all")->required();
  train->add_option("--features", in, "Feature CSV")->required();
  train->add_option("--out", out, "Model JSON path (a directory when --spec all)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on its held-out conversations");
  add_common(evaluate, f);
  evaluate->add_option("--features", in, "Feature CSV")->required();
  evaluate->add_option("--model", model_path, "Model JSON from train")->required();
  evaluate->add_option("--out", out, "Metrics JSON (stdout when omitted)");

  auto* explain = app.add_subcommand("explain", "Permutation importance and signed top features");
  add_common(explain, f);
  explain->add_option("--features", in, "Feature CSV")->required();
  explain->add_option("--model", model_path, "Model JSON from train")->required();
  explain->add_option("--out", out, "Report JSON (stdout when omitted)");

  auto* run = app.add_subcommand("run", "Full pipeline from config to report");
  add_common(run, f);
  run->add_option("--spec", f.spec, "Restrict to one model specification 1..6 or all");

  std::size_t synth_n = 400;
  auto* synth = app.add_subcommand("synth", "Write the labeled synthetic benchmark corpus");
  synth->add_option("--n", synth_n, "Number of conversations")->check(CLI::PositiveNumber);
  synth->add_option("--seed", f.seed, "Generator seed")->required();
  synth->add_option("--out", out, "Output JSONL (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      cf::Config c = resolve_config(f, in);
      if (!in.empty()) c.data.format = in.ends_with(".csv") ? cf::CorpusFormat::kCsv : cf::CorpusFormat::kJsonl;
      if (f.config.empty()) c.data.provenance = cf::parse_provenance(provenance);
      if (!labels.empty()) c.data.labels = labels;
      if (c.data.input.empty()) throw cf::ValidationError("ingest needs --in or a config with [data] input");
      emit(out, corpus_jsonl(cf::ingest(c.data), c.hash));
    } else if (*featurize) {
      const cf::Config c = resolve_config(f, in);
      const cf::Resources resources = cf::load_resources(c);
      const cf::VectorSources sources = cf::VectorSources::load(c);
      const cf::Corpus corpus = read_corpus_file(in, c.data.provenance);
      const auto table = cf::featurize_corpus(corpus, resources, sources.provider(), c.features.options);
      std::ostringstream s;
      table.write_csv(s, "config_hash: " + c.hash);
      emit(out, s.str());
    } else if (*balance) {
      const cf::Config c = resolve_config(f, in);
      const cf::Corpus corpus = read_corpus_file(in, c.data.provenance);
      emit(out, corpus_jsonl(cf::balance(corpus, c.data), c.hash));
    } else if (*topics) {
      const cf::Config c = resolve_config(f, in);
      const cf::Resources resources = cf::load_resources(c);
      const cf::VectorSources sources = cf::VectorSources::load(c);
      const cf::Corpus corpus = read_corpus_file(in, c.data.provenance);
      const auto result = cf::run_topics(corpus, c.topics, resources, sources.provider());
      emit(out, result.to_json(c.hash).dump(2) + "\n");
    } else if (*train) {
      const cf::Config c = resolve_config(f);
      const cf::Resources resources = cf::load_resources(c);
      const auto table = read_features(in);
      const auto registry = registry_for(resources, table);
      const auto split = cf::split_table(table, c.data);
      const bool all = f.spec == "all";
      for (const int spec : c.model.specs) {
        if (!cf::spec_available(table, registry, spec)) {
          if (!all) throw cf::ValidationError("spec " + std::to_string(spec) + " needs columns missing from " + in);
          std::cerr << "spec " << spec << ": skipped (no topic columns)\n";
          continue;
        }
        const auto trained = cf::train_spec(table, registry, spec, split, c);
        const std::string path = all ? (std::filesystem::path(out) / ("spec_" + std::to_string(spec) + ".json")).string() : out;
        cf::write_text_file(path, trained.to_json(c.hash).dump(2) + "\n");
      }
    } else if (*evaluate) {
      const cf::Config c = resolve_config(f);
      const auto table = read_features(in);
      const auto trained = cf::TrainedSpec::from_json(read_json(model_path));
      const auto m = cf::evaluate_spec(trained, table);
      const nlohmann::json j = {{"config_hash", c.hash}, {"spec", trained.spec}, {"f1", m.f1},
                                {"precision", m.precision}, {"recall", m.recall}, {"tp", m.tp},
                                {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
      emit(out, j.dump(2) + "\n");
    } else if (*explain) {
      const cf::Config c = resolve_config(f);
      const auto table = read_features(in);
      const auto trained = cf::TrainedSpec::from_json(read_json(model_path));
      const std::vector<cf::SpecReport> reports{cf::explain_spec(trained, table, c)};
      emit(out, cf::render_report_json(reports, c.hash, c.explain.top_k).dump(2) + "\n");
    } else if (*run) {
      if (f.config.empty()) throw cf::ValidationError("run needs --config");
      const cf::Config c = resolve_config(f);
      const auto result = cf::run_pipeline(c);
      for (const auto& r : result.reports) {
        std::cout << "spec " << r.spec << ": ";
        if (r.f1) {
          std::printf("F1 %.4f, %zu features\n", *r.f1, r.n_features);
          std::fflush(stdout);
        } else {
          std::cout << r.status << " (" << r.reason << ")\n";
        }
      }
      std::cout << "report: " << (c.output.dir / "report.json").string() << "\n";
    } else if (*synth) {
      cf::SyntheticOptions o;
      o.n_conversations = synth_n;
      o.seed = *f.seed;
      emit(out, corpus_jsonl(cf::generate_synthetic_corpus(o), {}));
    }
  } catch (const cf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
