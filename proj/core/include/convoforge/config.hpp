#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convoforge/corpus.hpp"
#include "convoforge/featurize.hpp"
#include "convoforge/gbt.hpp"

namespace convoforge {

struct DataConfig {
  std::filesystem::path input;
  CorpusFormat format = CorpusFormat::kJsonl;
  Provenance provenance = Provenance::kOther;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> sentiment;
  // Markup stripping and root dropping default on for Reddit provenance.
  bool strip_markup = false;
  bool drop_thread_root = false;
  std::size_t max_words = 50;  // 0 disables splitting
  bool balance = false;
  std::vector<std::string> confounders;
  std::uint64_t balance_seed = 0;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

struct FeaturesConfig {
  std::optional<std::filesystem::path> resources;
  FeaturizeOptions options;
  bool fallback_vectors = false;
};

struct ModelConfig {
  std::vector<int> specs{1, 2, 3, 4, 5, 6};
  GbtParams params;
  bool regularize = false;
  std::size_t repeats = 1;
};

struct TopicsConfig {
  bool enabled = false;
  std::size_t k = 30;
  double coverage_target = 0.65;
  std::uint64_t seed = 0;
  std::size_t top_n = 10;
};

struct ExplainConfig {
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t top_k = 5;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
};

struct Config {
  DataConfig data;
  FeaturesConfig features;
  ModelConfig model;
  TopicsConfig topics;
  ExplainConfig explain;
  OutputConfig output;
  // 16 hex digits; FNV-1a over the config bytes plus applied overrides.
  std::string hash;
};

// Relative paths resolve against `base_dir`. Every seed key is required.
// Unknown sections or keys are rejected.
Config parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;  // replaces every seed
  std::optional<std::size_t> jobs;
  bool fallback_vectors = false;
  std::optional<std::vector<int>> specs;
};

// Overrides that change results are folded into the hash; jobs is not.
void apply_overrides(Config& config, const ConfigOverrides& overrides);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace convoforge
