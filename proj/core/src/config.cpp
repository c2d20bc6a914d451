#include "convoforge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "convoforge/error.hpp"
#include "toml.hpp"

namespace convoforge {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

namespace {

class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!table_) return;
    const std::set<std::string_view> allowed(keys);
    for (const auto& [k, v] : *table_) {
      if (!allowed.contains(k.str())) {
        throw ValidationError("config: unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
      }
    }
  }

  const toml::node* node(std::string_view key) const { return table_ ? table_->get(key) : nullptr; }

  template <typename T>
  std::optional<T> get(std::string_view key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<T>()) return *v;
    // Integers are accepted where reals are expected.
    if constexpr (std::is_same_v<T, double>) {
      if (auto i = n->value_exact<std::int64_t>()) return static_cast<double>(*i);
    }
    throw ValidationError("config: [" + name_ + "] " + std::string(key) + " has the wrong type");
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) const {
    return get<T>(key).value_or(fallback);
  }

  std::size_t count(std::string_view key, std::size_t fallback, std::size_t min = 0) const {
    const auto v = get<std::int64_t>(key);
    if (!v) return fallback;
    if (*v < static_cast<std::int64_t>(min)) {
      throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must be >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(*v);
  }

  std::uint64_t seed(std::string_view key) const {
    const auto v = get<std::int64_t>(key);
    if (!v) {
      throw ValidationError("config: [" + name_ + "] " + std::string(key) +
                            " is required (seeds have no default)");
    }
    if (*v < 0) throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must be non-negative");
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<std::filesystem::path> path(std::string_view key, const std::filesystem::path& base) const {
    const auto v = get<std::string>(key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    return p.is_absolute() || base.empty() ? p : base / p;
  }

  std::vector<std::string> strings(std::string_view key) const {
    std::vector<std::string> out;
    const toml::node* n = node(key);
    if (!n) return out;
    const auto* arr = n->as_array();
    if (!arr) throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must be an array");
    for (const auto& e : *arr) {
      const auto s = e.value_exact<std::string>();
      if (!s) throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must hold strings");
      out.push_back(*s);
    }
    return out;
  }

  std::optional<std::vector<int>> ints(std::string_view key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const auto* arr = n->as_array();
    if (!arr) throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must be an array");
    std::vector<int> out;
    for (const auto& e : *arr) {
      const auto s = e.value_exact<std::int64_t>();
      if (!s) throw ValidationError("config: [" + name_ + "] " + std::string(key) + " must hold integers");
      out.push_back(static_cast<int>(*s));
    }
    return out;
  }

 private:
  const toml::table* table_;
  std::string name_;
};

ZScope parse_scope(const std::string& s) {
  if (s == "conversation") return ZScope::kWithinConversation;
  if (s == "corpus") return ZScope::kAcrossCorpus;
  throw ValidationError("config: scope must be \"conversation\" or \"corpus\", got \"" + s + "\"");
}

void check_specs(const std::vector<int>& specs) {
  if (specs.empty()) throw ValidationError("config: [model] specs must not be empty");
  std::set<int> seen;
  for (const int s : specs) {
    if (s < 1 || s > 6) throw ValidationError("config: model spec " + std::to_string(s) + " is outside 1..6");
    if (!seen.insert(s).second) throw ValidationError("config: model spec " + std::to_string(s) + " repeated");
  }
}

}  // namespace

Config parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string("config: ") + std::string(e.description()));
  }
  for (const auto& [k, v] : root) {
    static const std::set<std::string_view> kSections{"data", "features", "model", "topics", "explain", "output"};
    if (!kSections.contains(k.str()) || !v.is_table()) {
      throw ValidationError("config: unknown section '" + std::string(k.str()) + "'");
    }
  }
  const Section data(root["data"].as_table(), "data");
  const Section features(root["features"].as_table(), "features");
  const Section model(root["model"].as_table(), "model");
  const Section topics(root["topics"].as_table(), "topics");
  const Section explain(root["explain"].as_table(), "explain");
  const Section output(root["output"].as_table(), "output");

  Config c;
  data.allow({"input", "format", "provenance", "labels", "embeddings", "sentiment", "strip_markup", "drop_thread_root",
              "max_words", "balance", "confounders", "balance_seed", "test_fraction", "split_seed"});
  const auto input = data.path("input", base_dir);
  if (!input) throw ValidationError("config: [data] input is required");
  c.data.input = *input;
  const auto format = data.get_or<std::string>("format", "jsonl");
  if (format == "jsonl") {
    c.data.format = CorpusFormat::kJsonl;
  } else if (format == "csv") {
    c.data.format = CorpusFormat::kCsv;
  } else {
    throw ValidationError("config: [data] format must be \"jsonl\" or \"csv\"");
  }
  c.data.provenance = parse_provenance(data.get_or<std::string>("provenance", "other"));
  const bool reddit = c.data.provenance == Provenance::kReddit;
  c.data.labels = data.path("labels", base_dir);
  c.data.embeddings = data.path("embeddings", base_dir);
  c.data.sentiment = data.path("sentiment", base_dir);
  c.data.strip_markup = data.get_or<bool>("strip_markup", reddit);
  c.data.drop_thread_root = data.get_or<bool>("drop_thread_root", reddit);
  c.data.max_words = data.count("max_words", 50);
  c.data.balance = data.get_or<bool>("balance", false);
  c.data.confounders = data.strings("confounders");
  for (const auto& name : c.data.confounders) {
    if (!find_confounder(name)) throw ValidationError("config: unknown confounder '" + name + "'");
  }
  c.data.balance_seed = data.seed("balance_seed");
  c.data.test_fraction = data.get_or<double>("test_fraction", 0.2);
  if (!(c.data.test_fraction > 0.0 && c.data.test_fraction < 1.0)) {
    throw ValidationError("config: [data] test_fraction must lie in (0, 1)");
  }
  c.data.split_seed = data.seed("split_seed");

  features.allow({"resources", "info_exchange_scope", "positivity_scope", "dd_as_distance", "lda_iterations",
                  "lda_seed", "fallback_vectors", "jobs"});
  c.features.resources = features.path("resources", base_dir);
  c.features.options.info_exchange_scope = parse_scope(features.get_or<std::string>("info_exchange_scope", "conversation"));
  c.features.options.positivity_scope = parse_scope(features.get_or<std::string>("positivity_scope", "conversation"));
  c.features.options.dd_as_distance = features.get_or<bool>("dd_as_distance", false);
  c.features.options.lda_iterations = features.count("lda_iterations", 500, 1);
  c.features.options.lda_seed = features.seed("lda_seed");
  c.features.options.jobs = features.count("jobs", 1, 1);
  c.features.fallback_vectors = features.get_or<bool>("fallback_vectors", false);

  model.allow({"specs", "n_trees", "learning_rate", "max_depth", "lambda", "gamma", "min_child_weight", "seed",
               "regularize", "repeats"});
  if (auto specs = model.ints("specs")) c.model.specs = *specs;
  check_specs(c.model.specs);
  auto& p = c.model.params;
  p.n_trees = model.count("n_trees", 200);
  p.learning_rate = model.get_or<double>("learning_rate", 0.1);
  p.max_depth = model.count("max_depth", 4);
  p.lambda = model.get_or<double>("lambda", 1.0);
  p.gamma = model.get_or<double>("gamma", 0.0);
  p.min_child_weight = model.get_or<double>("min_child_weight", 1.0);
  if (!(p.learning_rate > 0.0) || p.lambda < 0.0 || p.gamma < 0.0 || p.min_child_weight < 0.0) {
    throw ValidationError("config: [model] learning_rate must be > 0; lambda, gamma, min_child_weight >= 0");
  }
  p.seed = model.seed("seed");
  c.model.regularize = model.get_or<bool>("regularize", false);
  c.model.repeats = model.count("repeats", 1, 1);

  topics.allow({"enabled", "k", "coverage_target", "seed", "top_n"});
  c.topics.enabled = topics.get_or<bool>("enabled", reddit);
  c.topics.k = topics.count("k", 30, 1);
  c.topics.coverage_target = topics.get_or<double>("coverage_target", 0.65);
  if (!(c.topics.coverage_target > 0.0 && c.topics.coverage_target <= 1.0)) {
    throw ValidationError("config: [topics] coverage_target must lie in (0, 1]");
  }
  c.topics.seed = topics.seed("seed");
  c.topics.top_n = topics.count("top_n", 10, 1);

  explain.allow({"repeats", "seed", "top_k"});
  c.explain.repeats = explain.count("repeats", 10, 1);
  c.explain.seed = explain.seed("seed");
  c.explain.top_k = explain.count("top_k", 5, 1);

  output.allow({"dir"});
  if (auto dir = output.path("dir", base_dir)) c.output.dir = *dir;
  else if (!base_dir.empty()) c.output.dir = base_dir / "out";

  c.hash = hex64(fnv1a64(toml_text));
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void apply_overrides(Config& config, const ConfigOverrides& overrides) {
  std::string extra;
  if (overrides.seed) {
    const std::uint64_t s = *overrides.seed;
    config.data.balance_seed = config.data.split_seed = s;
    config.features.options.lda_seed = s;
    config.model.params.seed = s;
    config.topics.seed = s;
    config.explain.seed = s;
    extra += "\nseed=" + std::to_string(s);
  }
  if (overrides.fallback_vectors && !config.features.fallback_vectors) {
    config.features.fallback_vectors = true;
    extra += "\nfallback_vectors=true";
  }
  if (overrides.specs) {
    check_specs(*overrides.specs);
    config.model.specs = *overrides.specs;
    extra += "\nspecs=";
    for (const int s : *overrides.specs) extra += std::to_string(s) + ",";
  }
  if (overrides.jobs) {
    if (*overrides.jobs == 0) throw ValidationError("--jobs must be at least 1");
    config.features.options.jobs = *overrides.jobs;
  }
  if (!extra.empty()) config.hash = hex64(fnv1a64(config.hash + extra));
}

}  // namespace convoforge
