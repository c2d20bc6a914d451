// Acceptance gate. Each criterion prints one PASS/FAIL line; the exit code is
// non-zero when any criterion fails. argv[1] is a scratch directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "convoforge/config.hpp"
#include "convoforge/conversation_features.hpp"
#include "convoforge/explain.hpp"
#include "convoforge/featurize.hpp"
#include "convoforge/gbt.hpp"
#include "convoforge/pipeline.hpp"
#include "convoforge/random.hpp"
#include "convoforge/synthetic.hpp"
#include "convoforge/topics.hpp"
#include "convoforge/utterance_features.hpp"
#include "oracles.hpp"

using namespace convoforge;
namespace fs = std::filesystem;

namespace {

constexpr double kRel = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const Resources& resources() {
  static const Resources r = Resources::load(default_resource_dir());
  return r;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> random_speakers(Rng& rng, std::size_t n) {
  const std::size_t k = 1 + rng.uniform_index(10);
  std::vector<std::string> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("s" + std::to_string(rng.uniform_index(k)));
  return s;
}

Outcome metric_oracles() {
  Outcome o;
  const auto start = Clock::now();
  Rng rng(20240601);
  const std::vector<std::string> pool{"the", "cat", "i", "me", "my", "we", "run", "quickly", "bizarre",
                                      "a",   "dog", "sat", "mine", "myself", "ubiquitous", "and"};
  const auto& easy = resources().easy_words;
  std::set<std::string> easy_set;
  for (const auto& w : pool) {
    if (easy.matches(w)) easy_set.insert(w);
  }
  constexpr int kInstances = 150;
  for (int trial = 0; trial < kInstances && o.pass; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(30);
    const auto speakers = random_speakers(rng, n);

    std::vector<double> counts;
    for (std::size_t i = 1 + rng.uniform_index(10); i > 0; --i) counts.push_back(static_cast<double>(rng.uniform_index(40)));
    o.require(oracle::close_rel(gini(counts), oracle::gini_pairwise(counts), kRel), "gini");
    o.require(oracle::close_rel(turn_taking_index(speakers), oracle::turn_taking(speakers), kRel), "turn_taking_index");

    std::vector<std::int64_t> t{static_cast<std::int64_t>(rng.uniform_index(1000))};
    for (std::size_t i = 1; i < n; ++i) t.push_back(t.back() + static_cast<std::int64_t>(rng.uniform_index(600)));
    o.require(oracle::close_rel(burstiness(t), oracle::burstiness(t), kRel), "burstiness");

    std::vector<Vector> v(n, Vector(16));
    for (auto& x : v)
      for (auto& c : x) c = rng.normal();
    const auto dd = discursive_diversity_family(speakers, v);
    const auto want = oracle::discursive_diversity(speakers, v);
    o.require(oracle::close_rel(dd.discursive_diversity, want.dd, kRel) &&
                  oracle::close_rel(dd.variance_in_dd, want.var_dd, kRel) &&
                  oracle::close_rel(dd.incongruent_modulation, want.incongruent, kRel) &&
                  oracle::close_rel(dd.within_person_disc_range, want.range, kRel),
              "discursive diversity family");

    std::vector<int> pred, label;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(static_cast<int>(rng.uniform_index(2)));
      label.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    o.require(oracle::close_rel(f1_score(pred, label), oracle::f1_counts(pred, label), kRel), "f1");

    // One utterance per speaker turn, built sentence by sentence.
    std::vector<double> raw, oracle_raw;
    for (std::size_t u = 0; u < n; ++u) {
      std::string text;
      std::vector<std::vector<std::string>> sentences;
      for (std::size_t s = 1 + rng.uniform_index(3); s > 0; --s) {
        std::vector<std::string> sentence;
        for (std::size_t w = 1 + rng.uniform_index(8); w > 0; --w) sentence.push_back(pool[rng.uniform_index(pool.size())]);
        for (std::size_t w = 0; w < sentence.size(); ++w) text += (w ? " " : "") + sentence[w];
        text += ". ";
        sentences.push_back(sentence);
      }
      const auto tok = tokenize(text);
      o.require(oracle::close_rel(dale_chall(tok, easy), oracle::dale_chall(sentences, easy_set), kRel), "dale_chall");
      raw.push_back(information_exchange_raw(tok));
      double words = 0, first = 0;
      for (const auto& s : sentences)
        for (const auto& w : s) {
          ++words;
          first += (w == "i" || w == "me" || w == "my" || w == "mine" || w == "myself");
        }
      oracle_raw.push_back(words - first);
    }
    const auto z = zscore_population(raw);
    const auto zo = oracle::zscores(oracle_raw);
    for (std::size_t i = 0; i < z.size(); ++i) o.require(oracle::close_rel(z[i], zo[i], kRel), "info-exchange z-score");
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s >= 30 s");
  if (o.pass) o.detail = std::to_string(kInstances) + " instances per metric, " + fmt(elapsed) + " s";
  return o;
}

Outcome analytic_anchors() {
  Outcome o;
  o.require(gini(std::vector<double>{1, 0}) == 0.5, "gini([1,0])");
  o.require(turn_taking_index(std::vector<std::string>{"A", "B", "A", "B"}) == 1.0, "alternation TTI");
  o.require(burstiness(std::vector<std::int64_t>{0, 10, 20, 30, 40}) == -1.0, "periodic burstiness");
  const std::vector<std::string> speakers{"A", "B", "C", "A", "B", "C"};
  const std::vector<Vector> same(6, Vector{0.6, 0.8});
  o.require(discursive_diversity_family(speakers, same).discursive_diversity == 1.0, "identical-embedding DD");
  o.require(type_token_ratio(tokenize("the the cat")) == 2.0 / 3.0, "TTR");
  if (o.pass) o.detail = "all exact";
  return o;
}

Outcome gbt_correctness() {
  Outcome o;
  for (double z = -5.0; z <= 5.0 + 1e-12; z += 0.25) {
    for (const double y : {0.0, 1.0}) {
      const double eps = 1e-5;
      const double g = (logistic_loss(z + eps, y) - logistic_loss(z - eps, y)) / (2 * eps);
      const double h = (logistic_grad_hess(z + eps, y).g - logistic_grad_hess(z - eps, y).g) / (2 * eps);
      o.require(std::fabs(logistic_grad_hess(z, y).g - g) <= 1e-6, "gradient at " + fmt(z));
      o.require(std::fabs(logistic_grad_hess(z, y).h - h) <= 1e-5, "hessian at " + fmt(z));
    }
  }

  Rng rng(7);
  Matrix x;
  std::vector<int> y;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = rng.normal();
    y.push_back(row[0] - row[1] + 0.8 * rng.normal() > 0 ? 1 : 0);
    x.push_back(std::move(row));
  }
  GbtParams params;
  params.n_trees = 200;
  const auto model = train(x, y, params);
  bool monotone = model.loss_history.size() == 201;
  for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
    monotone = monotone && model.loss_history[i] <= model.loss_history[i - 1];
  }
  o.require(monotone, "training log-loss increased");

  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(199);
    Matrix xs(n, std::vector<double>(3));
    std::vector<double> g(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : xs[i]) v = trial % 2 ? static_cast<double>(rng.uniform_index(12)) : rng.normal();
      const double p = rng.uniform01();
      g[i] = p - static_cast<double>(rng.uniform_index(2));
      h[i] = p * (1 - p);
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    GbtParams sp;
    sp.min_child_weight = 0.1;
    const auto got = find_best_split(xs, g, h, idx, sp);
    const auto want = oracle::best_split(xs, g, h, sp.lambda, sp.gamma, sp.min_child_weight);
    o.require(got.found == want.found && (!want.found || oracle::close_rel(got.gain, want.gain, kRel)),
              "split gain differs from brute force on " + std::to_string(n) + " rows");
  }

  // Separable along x0 + x1 with a 0.5 margin.
  Matrix sx;
  std::vector<Label> labels;
  std::vector<int> sy;
  while (sx.size() < 200) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    if (std::fabs(a + b) < 0.5) continue;
    sx.push_back({a, b});
    sy.push_back(a + b > 0 ? 1 : 0);
    labels.push_back(sy.back() ? Label::kDestructive : Label::kConstructive);
  }
  const auto split = stratified_split(labels, 0.2, 3);
  FeatureMatrix all{{"a", "b"}, sx, sy};
  const auto m = train_scaled(all.subset_rows(split.train), GbtParams{});
  const auto test = all.subset_rows(split.test);
  const double f1 = f1_score(threshold_predictions(m.predict_proba(test.rows)), test.labels);
  o.require(f1 >= 0.99, "separable held-out F1 " + fmt(f1));
  if (o.pass) o.detail = "final loss " + fmt(model.loss_history.back()) + ", separable F1 " + fmt(f1);
  return o;
}

struct Benchmark {
  FeatureTable table;
  IndexSplit split;
};

const Benchmark& benchmark_data() {
  static const Benchmark b = [] {
    Benchmark out;
    SyntheticOptions opts;
    opts.n_conversations = 400;
    opts.seed = 100;
    const VectorProvider vectors(nullptr, nullptr, true);
    out.table = featurize_corpus(generate_synthetic_corpus(opts), resources(), vectors, FeaturizeOptions{});
    out.split = split_table(out.table, DataConfig{});
    return out;
  }();
  return b;
}

Outcome discrimination() {
  Outcome o;
  // Corpus generation and featurization count toward the runtime.
  const auto start = Clock::now();
  const auto& b = benchmark_data();
  const Config config;  // split and explain seeds 0, default model parameters, one job
  const auto trained = train_spec(b.table, resources().registry, 1, b.split, config);
  const auto report = explain_spec(trained, b.table, config);
  const double elapsed = seconds_since(start);

  const double f1 = report.f1.value_or(0.0);
  o.require(f1 >= 0.95, "Model-1 F1 " + fmt(f1) + " < 0.95");
  // Destructive conversations carry more negative words, a dominant speaker
  // and long runs (low TTI), so TTI points toward Destructive with "+".
  std::size_t hits = 0;
  std::string top;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, report.ranking.size()); ++i) {
    const auto& r = report.ranking[i];
    top += (i ? ", " : "") + r.name + "(" + std::string(to_string(r.sign)) + ")";
    hits += (r.name == "negative_affect_lexical_per_100" && r.sign == Sign::kMinus) ||
            (r.name == "gini_coefficient_sum_num_messages" && r.sign == Sign::kMinus) ||
            (r.name == "turn_taking_index" && r.sign == Sign::kPlus);
  }
  o.require(hits >= 2, "only " + std::to_string(hits) + " expected features in top 5: " + top);
  o.require(elapsed < 300.0, "runtime " + fmt(elapsed) + " s >= 300 s");
  if (o.pass) o.detail = "F1 " + fmt(f1) + ", top 5: " + top + ", " + fmt(elapsed) + " s";
  return o;
}

Outcome z_scoring() {
  Outcome o;
  const auto& b = benchmark_data();
  const auto m = to_matrix(b.table).subset_rows(b.split.train);
  const auto z = ZScaler::fit(m.rows).apply(m.rows);
  std::size_t checked = 0;
  double worst_mean = 0.0, worst_std = 0.0;
  for (std::size_t c = 0; c < m.num_columns(); ++c) {
    const double first = m.rows[0][c];
    const bool constant = std::all_of(m.rows.begin(), m.rows.end(), [&](const auto& r) { return r[c] == first; });
    double mean = 0.0, sq = 0.0;
    for (const auto& r : z) mean += r[c];
    mean /= static_cast<double>(z.size());
    for (const auto& r : z) sq += (r[c] - mean) * (r[c] - mean);
    const double sd = std::sqrt(sq / static_cast<double>(z.size()));
    worst_mean = std::max(worst_mean, std::fabs(mean));
    o.require(std::fabs(mean) < 1e-9, m.columns[c] + " mean " + fmt(mean));
    if (constant) continue;
    ++checked;
    worst_std = std::max(worst_std, std::fabs(sd - 1.0));
    o.require(std::fabs(sd - 1.0) < 1e-9, m.columns[c] + " std " + fmt(sd));
  }
  if (o.pass) {
    o.detail = std::to_string(checked) + " non-constant columns, max |mean| " + fmt(worst_mean) + ", max |std-1| " +
               fmt(worst_std);
  }
  return o;
}

Outcome feature_counts() {
  Outcome o;
  const std::size_t expected[] = {128, 32, 31, 63, 160, 191};
  std::string got;
  for (int spec = 1; spec <= 6; ++spec) {
    const auto n = select_features(resources().registry, spec).size();
    got += (spec > 1 ? "/" : "") + std::to_string(n);
    o.require(n == expected[spec - 1], "spec " + std::to_string(spec) + " has " + std::to_string(n));
  }
  o.detail = got;
  return o;
}

Outcome topic_coverage() {
  Outcome o;
  SyntheticOptions opts;
  opts.n_conversations = 600;
  opts.seed = 5;
  const auto corpus = generate_synthetic_corpus(opts);
  TopicsConfig topics;
  topics.k = 30;
  topics.coverage_target = 0.65;
  topics.seed = 1;
  const VectorProvider vectors(nullptr, nullptr, true);
  const auto result = run_topics(corpus, topics, resources(), vectors);
  const auto& t = result.assignment.topics;
  const double share =
      static_cast<double>(std::count(t.begin(), t.end(), result.assignment.residual_id())) / static_cast<double>(t.size());
  o.require(std::fabs(share - 0.35) <= 0.02, "residual share " + fmt(share));
  o.detail = "residual share " + fmt(share) + " of " + std::to_string(t.size());
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  const auto dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SyntheticOptions opts;
  opts.n_conversations = 120;
  opts.seed = 9;
  {
    std::ofstream out(dir / "conversations.jsonl");
    write_corpus_jsonl(generate_synthetic_corpus(opts), out);
  }
  // Reddit provenance exercises markup stripping, root dropping and topics.
  const std::string toml = R"([data]
input = "conversations.jsonl"
provenance = "reddit"
split_seed = 1
balance = true
balance_seed = 2
[features]
lda_seed = 3
lda_iterations = 100
fallback_vectors = true
[model]
n_trees = 60
seed = 4
regularize = true
[topics]
enabled = true
k = 30
seed = 5
[explain]
repeats = 5
seed = 6
[output]
dir = "out"
)";
  {
    std::ofstream out(dir / "run.toml");
    out << toml;
  }
  const auto config = load_config(dir / "run.toml");
  run_pipeline(config);
  const auto first = slurp(dir / "out" / "report.json");
  auto again = load_config(dir / "run.toml");
  again.features.options.jobs = 4;
  run_pipeline(again);
  const auto second = slurp(dir / "out" / "report.json");
  o.require(!first.empty(), "no report.json written");
  o.require(first == second, "report.json differs between runs");
  const auto report = nlohmann::json::parse(first);
  std::size_t ok = 0;
  for (const auto& s : report["specs"]) ok += s["status"] == "ok";
  o.require(ok == 6, "expected all six specs to run, got " + std::to_string(ok));
  if (o.pass) o.detail = std::to_string(first.size()) + " identical bytes, 6 specs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "convoforge_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric-oracles", metric_oracles},
      {"analytic-anchors", analytic_anchors},
      {"gbt-correctness", gbt_correctness},
      {"discrimination-benchmark", discrimination},
      {"z-scoring", z_scoring},
      {"feature-counts", feature_counts},
      {"topic-coverage", topic_coverage},
      {"determinism", [&] { return determinism(work); }},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
