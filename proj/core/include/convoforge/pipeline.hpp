#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convoforge/config.hpp"
#include "convoforge/corpus.hpp"
#include "convoforge/explain.hpp"
#include "convoforge/featurize.hpp"
#include "convoforge/gbt.hpp"
#include "convoforge/resources.hpp"
#include "convoforge/topics.hpp"
#include "convoforge/vectors.hpp"
#include "json.hpp"

namespace convoforge {

// Parses the configured input, attaches labels and applies the configured
// preprocessing (markup stripping, root dropping, long-utterance splitting).
Corpus ingest(const DataConfig& data);
Corpus preprocess(const Corpus& corpus, const DataConfig& data);
Corpus balance(const Corpus& corpus, const DataConfig& data);

// Sidecars named in the config, loaded once.
struct VectorSources {
  std::optional<EmbeddingSidecar> embeddings;
  std::optional<SentimentSidecar> sentiment;
  bool allow_fallback = false;

  static VectorSources load(const Config& config);
  VectorProvider provider() const;
};

Resources load_resources(const Config& config);

struct TopicResult {
  TopicAssignment assignment;
  std::vector<std::string> conversation_ids;
  std::vector<std::vector<std::string>> top_words;

  // Dummy rows for `ids`; throws if an id was not clustered.
  std::vector<std::vector<double>> dummies_for(std::span<const std::string> ids) const;
  nlohmann::json to_json(std::string_view config_hash) const;
};

TopicResult run_topics(const Corpus& corpus, const TopicsConfig& topics, const Resources& resources,
                       const VectorProvider& vectors);

FeatureMatrix to_matrix(const FeatureTable& table);

// Indices into `table` rows; seed = split_seed for repeat 0, derived after.
IndexSplit split_table(const FeatureTable& table, const DataConfig& data, std::size_t repeat = 0);

// True when every column of the spec is present in the table.
bool spec_available(const FeatureTable& table, const FeatureRegistry& registry, int spec);

struct TrainedSpec {
  int spec = 0;
  GbtModel model;
  std::vector<std::string> columns;  // original selection before regularization
  bool regularized = false;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  // Model JSON plus spec, original columns, split ids and config hash.
  nlohmann::json to_json(std::string_view config_hash) const;
  static TrainedSpec from_json(const nlohmann::json& j);
};

TrainedSpec train_spec(const FeatureTable& table, const FeatureRegistry& registry, int spec,
                       const IndexSplit& split, const Config& config);

// Rows of `table` whose ids appear in `ids`, in `ids` order.
FeatureMatrix rows_by_id(const FeatureTable& table, std::span<const std::string> ids,
                         std::span<const std::string> columns);

Classification evaluate_spec(const TrainedSpec& trained, const FeatureTable& table);
SpecReport explain_spec(const TrainedSpec& trained, const FeatureTable& table, const Config& config);

struct PipelineResult {
  std::vector<SpecReport> reports;
  nlohmann::json report_json;
  std::vector<std::filesystem::path> artifacts;
};

// ingest -> preprocess -> topics (full corpus) -> balance -> featurize ->
// split -> per-spec train, evaluate, explain -> report. Artifacts go to
// config.output.dir.
PipelineResult run_pipeline(const Config& config);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace convoforge
