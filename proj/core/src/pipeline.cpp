#include "convoforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "convoforge/error.hpp"
#include "convoforge/random.hpp"
#include "convoforge/text.hpp"

namespace convoforge {

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("write failed for " + path.string());
}

Corpus preprocess(const Corpus& corpus, const DataConfig& data) {
  Corpus out;
  out.provenance = corpus.provenance;
  for (const auto& conv : corpus.conversations) {
    Conversation c = conv;
    if (data.strip_markup) c = apply_markup_stripping(c);
    if (data.drop_thread_root) c = drop_thread_root(c);
    if (data.max_words > 0) c = split_long_utterances(c, data.max_words);
    out.conversations.push_back(std::move(c));
  }
  return out;
}

Corpus ingest(const DataConfig& data) {
  std::ifstream in(data.input, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus " + data.input.string());
  Corpus corpus = parse_corpus(in, data.format, data.provenance);
  if (data.labels) {
    std::ifstream labels(*data.labels, std::ios::binary);
    if (!labels) throw ValidationError("cannot open labels " + data.labels->string());
    attach_labels_csv(corpus, labels);
  }
  return preprocess(corpus, data);
}

Corpus balance(const Corpus& corpus, const DataConfig& data) {
  std::vector<Confounder> confounders;
  if (data.confounders.empty()) {
    confounders = default_confounders();
  } else {
    for (const auto& name : data.confounders) confounders.push_back(*find_confounder(name));
  }
  return balance_by_confounders(corpus, confounders, data.balance_seed);
}

VectorSources VectorSources::load(const Config& config) {
  VectorSources s;
  if (config.data.embeddings) s.embeddings = EmbeddingSidecar::load(*config.data.embeddings);
  if (config.data.sentiment) s.sentiment = SentimentSidecar::load(*config.data.sentiment);
  s.allow_fallback = config.features.fallback_vectors;
  return s;
}

VectorProvider VectorSources::provider() const {
  return VectorProvider(embeddings ? &*embeddings : nullptr, sentiment ? &*sentiment : nullptr, allow_fallback);
}

Resources load_resources(const Config& config) {
  return Resources::load(config.features.resources.value_or(default_resource_dir()));
}

std::vector<std::vector<double>> TopicResult::dummies_for(std::span<const std::string> ids) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < conversation_ids.size(); ++i) index.emplace(conversation_ids[i], i);
  std::vector<std::size_t> topics;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("conversation '" + id + "' has no topic assignment");
    topics.push_back(assignment.topics[it->second]);
  }
  return dummy_encode(topics, assignment.k);
}

nlohmann::json TopicResult::to_json(std::string_view config_hash) const {
  nlohmann::json assignments = nlohmann::json::array();
  for (std::size_t i = 0; i < conversation_ids.size(); ++i) {
    const std::size_t t = assignment.topics[i];
    assignments.push_back({{"conversation_id", conversation_ids[i]},
                           {"topic_id", t == assignment.k ? nlohmann::json("residual") : nlohmann::json(t)},
                           {"similarity", assignment.similarity[i]}});
  }
  return {{"config_hash", config_hash},
          {"k", assignment.k},
          {"threshold", assignment.threshold},
          {"topics", topic_report(assignment, top_words)},
          {"assignments", std::move(assignments)}};
}

TopicResult run_topics(const Corpus& corpus, const TopicsConfig& topics, const Resources& resources,
                       const VectorProvider& vectors) {
  TopicResult out;
  std::vector<Vector> embeddings;
  std::vector<std::vector<std::string>> documents;
  for (const auto& conv : corpus.conversations) {
    std::vector<Vector> utterance_vectors;
    std::vector<std::string> doc;
    for (const auto& u : conv.utterances) {
      utterance_vectors.push_back(vectors.embedding(u.utterance_id, u.text));
      for (auto& tok : tokenize(u.text).tokens) {
        if (!resources.stopwords.matches(tok)) doc.push_back(std::move(tok));
      }
    }
    embeddings.push_back(conversation_embedding(utterance_vectors));
    documents.push_back(std::move(doc));
    out.conversation_ids.push_back(conv.conversation_id);
  }
  TopicOptions options;
  options.k = topics.k;
  options.coverage_target = topics.coverage_target;
  options.seed = topics.seed;
  out.assignment = cluster_topics(embeddings, options);
  out.top_words = ctfidf_words(out.assignment.topics, documents, topics.k + 1, topics.top_n);
  return out;
}

FeatureMatrix to_matrix(const FeatureTable& table) {
  FeatureMatrix m;
  m.columns = table.columns;
  m.rows = table.rows;
  for (const Label l : table.labels) {
    if (l == Label::kUnlabeled) throw ValidationError("training needs every conversation labeled");
    m.labels.push_back(label_to_int(l));
  }
  return m;
}

IndexSplit split_table(const FeatureTable& table, const DataConfig& data, std::size_t repeat) {
  const std::uint64_t seed = repeat == 0 ? data.split_seed : mix_seed(data.split_seed, repeat);
  return stratified_split(table.labels, data.test_fraction, seed);
}

bool spec_available(const FeatureTable& table, const FeatureRegistry& registry, int spec) {
  for (const auto& name : select_features(registry, spec)) {
    if (!table.column_index(name)) return false;
  }
  return true;
}

nlohmann::json TrainedSpec::to_json(std::string_view config_hash) const {
  nlohmann::json j = model.to_json();
  j["spec"] = spec;
  j["selected_columns"] = columns;
  j["regularized"] = regularized;
  j["train_ids"] = train_ids;
  j["test_ids"] = test_ids;
  j["config_hash"] = config_hash;
  return j;
}

TrainedSpec TrainedSpec::from_json(const nlohmann::json& j) {
  TrainedSpec t;
  t.model = GbtModel::from_json(j);
  try {
    t.spec = j.at("spec").get<int>();
    t.columns = j.value("selected_columns", t.model.columns);
    t.regularized = j.value("regularized", false);
    t.train_ids = j.value("train_ids", std::vector<std::string>{});
    t.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
  return t;
}

FeatureMatrix rows_by_id(const FeatureTable& table, std::span<const std::string> ids,
                         std::span<const std::string> columns) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.conversation_ids.size(); ++i) index.emplace(table.conversation_ids[i], i);
  std::vector<std::size_t> rows;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("conversation '" + id + "' is not in the feature table");
    rows.push_back(it->second);
  }
  return to_matrix(table).subset_rows(rows).select_columns(columns);
}

TrainedSpec train_spec(const FeatureTable& table, const FeatureRegistry& registry, int spec,
                       const IndexSplit& split, const Config& config) {
  TrainedSpec out;
  out.spec = spec;
  out.columns = select_features(registry, spec);
  for (const std::size_t i : split.train) out.train_ids.push_back(table.conversation_ids[i]);
  for (const std::size_t i : split.test) out.test_ids.push_back(table.conversation_ids[i]);
  const FeatureMatrix train = to_matrix(table).subset_rows(split.train).select_columns(out.columns);
  out.model = train_scaled(train, config.model.params);

  if (config.model.regularize) {
    // Importance on training rows: the test split stays untouched until
    // evaluation.
    PermutationOptions opts;
    opts.repeats = 5;
    opts.seed = mix_seed(config.explain.seed, 1000 + static_cast<std::uint64_t>(spec));
    opts.jobs = config.features.options.jobs;
    const auto importance = permutation_importance(out.model, train, opts);
    std::vector<std::string> kept;
    for (const auto& imp : importance) {
      if (imp.mean > 0.0) kept.push_back(imp.name);
    }
    if (!kept.empty()) {
      out.model = train_scaled(train.select_columns(kept), config.model.params);
      out.regularized = true;
    }
  }
  return out;
}

Classification evaluate_spec(const TrainedSpec& trained, const FeatureTable& table) {
  const FeatureMatrix test = rows_by_id(table, trained.test_ids, trained.model.columns);
  return classify(threshold_predictions(trained.model.predict_proba(test.rows)), test.labels);
}

SpecReport explain_spec(const TrainedSpec& trained, const FeatureTable& table, const Config& config) {
  const FeatureMatrix test = rows_by_id(table, trained.test_ids, trained.model.columns);
  const auto probs = trained.model.predict_proba(test.rows);
  const auto metrics = classify(threshold_predictions(probs), test.labels);
  PermutationOptions opts;
  opts.repeats = config.explain.repeats;
  opts.seed = mix_seed(config.explain.seed, static_cast<std::uint64_t>(trained.spec));
  opts.jobs = config.features.options.jobs;
  const auto importance = permutation_importance(trained.model, test, opts);

  SpecReport r;
  r.spec = trained.spec;
  r.f1 = metrics.f1;
  r.precision = metrics.precision;
  r.recall = metrics.recall;
  r.n_features = trained.columns.size();
  r.regularized = trained.regularized;
  r.ranking = rank_features(importance, test, probs);
  return r;
}

PipelineResult run_pipeline(const Config& config) {
  PipelineResult result;
  const auto& dir = config.output.dir;
  const auto emit = [&](const std::filesystem::path& name, std::string_view content) {
    write_text_file(dir / name, content);
    result.artifacts.push_back(dir / name);
  };

  const Resources resources = load_resources(config);
  const VectorSources sources = VectorSources::load(config);
  const VectorProvider vectors = sources.provider();

  Corpus corpus = ingest(config.data);
  FeatureRegistry registry = resources.registry;

  std::optional<TopicResult> topics;
  if (config.topics.enabled) {
    topics = run_topics(corpus, config.topics, resources, vectors);
    registry = registry.with_topic_count(config.topics.k);
    emit("topics.json", topics->to_json(config.hash).dump(2) + "\n");
  }
  if (config.data.balance) corpus = balance(corpus, config.data);
  {
    std::ostringstream out;
    write_corpus_jsonl(corpus, out, config.hash);
    emit("corpus.jsonl", out.str());
  }

  FeatureTable table = featurize_corpus(corpus, resources, vectors, config.features.options);
  if (topics) append_topic_columns(table, topics->dummies_for(table.conversation_ids), registry);
  {
    std::ostringstream out;
    table.write_csv(out, "config_hash: " + config.hash);
    emit("features.csv", out.str());
  }

  const IndexSplit split = split_table(table, config.data);
  for (const int spec : config.model.specs) {
    if (!spec_available(table, registry, spec)) {
      SpecReport r;
      r.spec = spec;
      r.status = "skipped";
      r.reason = "corpus has no topic features";
      r.n_features = select_features(registry, spec).size();
      result.reports.push_back(std::move(r));
      continue;
    }
    const TrainedSpec trained = train_spec(table, registry, spec, split, config);
    emit(std::filesystem::path("models") / ("spec_" + std::to_string(spec) + ".json"),
         trained.to_json(config.hash).dump(2) + "\n");
    SpecReport report = explain_spec(trained, table, config);
    if (config.model.repeats > 1) {
      double sum = *report.f1;
      for (std::size_t rep = 1; rep < config.model.repeats; ++rep) {
        const auto extra = train_spec(table, registry, spec, split_table(table, config.data, rep), config);
        sum += evaluate_spec(extra, table).f1;
      }
      report.f1 = sum / static_cast<double>(config.model.repeats);
    }
    result.reports.push_back(std::move(report));
  }

  result.report_json = render_report_json(result.reports, config.hash, config.explain.top_k);
  emit("report.json", result.report_json.dump(2) + "\n");
  emit("report.md", render_report_markdown(result.reports, config.hash, config.explain.top_k));
  emit("importance.csv", render_importance_csv(result.reports, config.hash));
  return result;
}

}  // namespace convoforge
