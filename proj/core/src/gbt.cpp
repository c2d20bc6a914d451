#include "convoforge/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "convoforge/error.hpp"

namespace convoforge {

void FeatureMatrix::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c).second) throw ValidationError("duplicate feature column '" + c + "'");
  }
  if (labels.size() != rows.size()) throw ValidationError("feature matrix: label count != row count");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size()) {
      throw ValidationError("feature matrix: row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " values, expected " +
                            std::to_string(columns.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (!std::isfinite(rows[r][c])) {
        throw ValidationError("feature matrix: non-finite value in column '" + columns[c] + "' row " +
                              std::to_string(r));
      }
    }
    if (labels[r] != 0 && labels[r] != 1) throw ValidationError("feature matrix: label outside {0, 1}");
  }
}

FeatureMatrix FeatureMatrix::subset_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.columns = columns;
  for (const std::size_t i : indices) {
    if (i >= rows.size()) throw ValidationError("subset_rows: index out of range");
    out.rows.push_back(rows[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < columns.size(); ++c) index.emplace(columns[c], c);
  std::vector<std::size_t> picks;
  for (const auto& n : names) {
    const auto it = index.find(n);
    if (it == index.end()) throw ValidationError("feature column '" + n + "' is missing");
    picks.push_back(it->second);
  }
  FeatureMatrix out;
  out.columns.assign(names.begin(), names.end());
  out.labels = labels;
  out.rows.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r;
    r.reserve(picks.size());
    for (const std::size_t p : picks) r.push_back(row[p]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

ZScaler ZScaler::fit(const Matrix& rows) {
  ZScaler s;
  if (rows.empty()) return s;
  const std::size_t d = rows[0].size();
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.size() != d) throw ValidationError("ZScaler: ragged rows");
    for (std::size_t c = 0; c < d; ++c) s.means[c] += r[c];
  }
  for (auto& m : s.means) m /= n;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < d; ++c) s.stds[c] += (r[c] - s.means[c]) * (r[c] - s.means[c]);
  }
  for (auto& v : s.stds) v = std::sqrt(v / n);
  return s;
}

Matrix ZScaler::apply(const Matrix& rows) const {
  Matrix out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != means.size()) throw ValidationError("ZScaler: column count mismatch");
    std::vector<double> z(r.size());
    for (std::size_t c = 0; c < r.size(); ++c) z[c] = stds[c] > 0.0 ? (r[c] - means[c]) / stds[c] : 0.0;
    out.push_back(std::move(z));
  }
  return out;
}

ScaledSplit fit_apply_zscaler(const Matrix& train, const Matrix& test) {
  ScaledSplit out;
  out.scaler = ZScaler::fit(train);
  out.train = out.scaler.apply(train);
  out.test = out.scaler.apply(test);
  return out;
}

std::vector<std::string> select_features(const FeatureRegistry& registry, int model_spec) {
  bool expr = false, sem = false, topic = false;
  switch (model_spec) {
    case 1: expr = true; break;
    case 2: sem = true; break;
    case 3: topic = true; break;
    case 4: sem = topic = true; break;
    case 5: expr = sem = true; break;
    case 6: expr = sem = topic = true; break;
    default: throw ValidationError("model spec must be 1..6, got " + std::to_string(model_spec));
  }
  std::vector<std::string> out;
  for (const auto& e : registry.entries()) {
    if ((e.category == FeatureCategory::kExpression && expr) ||
        (e.category == FeatureCategory::kContentSemantic && sem) ||
        (e.category == FeatureCategory::kContentTopic && topic)) {
      out.push_back(e.name);
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GradHess logistic_grad_hess(double pred_logit, double label) {
  const double p = sigmoid(pred_logit);
  return {p - label, p * (1.0 - p)};
}

double logistic_loss(double pred_logit, double label) {
  // log(1 + e^z) - y z, evaluated without overflow.
  const double softplus = pred_logit > 0.0 ? pred_logit + std::log1p(std::exp(-pred_logit))
                                           : std::log1p(std::exp(pred_logit));
  return softplus - label * pred_logit;
}

double mean_log_loss(std::span<const double> logits, std::span<const int> labels) {
  if (logits.size() != labels.size()) throw ValidationError("mean_log_loss: size mismatch");
  if (logits.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += logistic_loss(logits[i], labels[i]);
  return s / static_cast<double>(logits.size());
}

double Tree::predict(std::span<const double> row) const {
  if (nodes.empty()) return 0.0;
  std::size_t n = 0;
  while (nodes[n].feature >= 0) {
    const auto& node = nodes[n];
    n = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                                : node.right);
  }
  return nodes[n].weight;
}

std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

namespace {

double midpoint_threshold(double a, double b) {
  const double mid = a + (b - a) * 0.5;
  return mid > a ? mid : b;
}

double leaf_weight(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

// Running state of one node's scan over a single feature.
struct ScanState {
  double gl = 0.0;
  double hl = 0.0;
  double last = 0.0;
  bool started = false;
};

inline void scan_step(ScanState& st, double value, double gi, double hi, double g_total, double h_total,
                      std::size_t feature, const GbtParams& p, SplitCandidate& best) {
  if (st.started && value != st.last) {
    const double gr = g_total - st.gl;
    const double hr = h_total - st.hl;
    if (st.hl >= p.min_child_weight && hr >= p.min_child_weight) {
      const double gain = split_gain(st.gl, st.hl, gr, hr, p.lambda, p.gamma);
      if (gain > 0.0 && (!best.found || gain > best.gain)) {
        best = {true, feature, midpoint_threshold(st.last, value), gain};
      }
    }
  }
  st.gl += gi;
  st.hl += hi;
  st.last = value;
  st.started = true;
}

std::vector<std::vector<std::size_t>> presort(const Matrix& x) {
  const std::size_t d = x.empty() ? 0 : x[0].size();
  std::vector<std::vector<std::size_t>> order(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& o = order[f];
    o.resize(x.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
  }
  return order;
}

void check_inputs(const Matrix& x, std::span<const double> g, std::span<const double> h) {
  if (x.empty()) throw ValidationError("build_tree: empty node");
  if (g.size() != x.size() || h.size() != x.size()) throw ValidationError("build_tree: gradient size mismatch");
  for (const auto& r : x) {
    if (r.size() != x[0].size()) throw ValidationError("build_tree: ragged rows");
  }
}

// Level-wise exact greedy growth over presorted columns. Scanning each
// feature in (value, row) order reproduces the per-node scan order of
// find_best_split, so both compute identical gains.
Tree grow_tree(const Matrix& x, std::span<const double> g, std::span<const double> h, const GbtParams& p,
               const std::vector<std::vector<std::size_t>>& order) {
  const std::size_t n = x.size();
  const std::size_t d = x[0].size();
  struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t depth = 0;
  };
  Tree tree;
  std::vector<NodeStats> stats(1);
  for (std::size_t i = 0; i < n; ++i) {
    stats[0].g += g[i];
    stats[0].h += h[i];
  }
  tree.nodes.push_back({-1, 0.0, -1, -1, leaf_weight(stats[0].g, stats[0].h, p.lambda)});
  std::vector<int> row_node(n, 0);
  std::vector<std::size_t> frontier{0};

  while (!frontier.empty()) {
    std::vector<int> slot(tree.nodes.size(), -1);
    std::vector<std::size_t> active;
    for (const std::size_t nd : frontier) {
      if (stats[nd].depth < p.max_depth) {
        slot[nd] = static_cast<int>(active.size());
        active.push_back(nd);
      }
    }
    if (active.empty()) break;

    std::vector<SplitCandidate> best(active.size());
    std::vector<ScanState> state(active.size());
    for (std::size_t f = 0; f < d; ++f) {
      std::fill(state.begin(), state.end(), ScanState{});
      for (const std::size_t i : order[f]) {
        const int nd = row_node[i];
        if (nd < 0) continue;
        const int s = slot[static_cast<std::size_t>(nd)];
        if (s < 0) continue;
        const auto su = static_cast<std::size_t>(s);
        scan_step(state[su], x[i][f], g[i], h[i], stats[static_cast<std::size_t>(nd)].g,
                  stats[static_cast<std::size_t>(nd)].h, f, p, best[su]);
      }
    }

    std::vector<std::size_t> next;
    for (std::size_t s = 0; s < active.size(); ++s) {
      if (!best[s].found) continue;
      const std::size_t nd = active[s];
      const auto left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      stats.push_back({0.0, 0.0, stats[nd].depth + 1});
      stats.push_back({0.0, 0.0, stats[nd].depth + 1});
      auto& node = tree.nodes[nd];
      node.feature = static_cast<int>(best[s].feature);
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      next.push_back(static_cast<std::size_t>(left));
      next.push_back(static_cast<std::size_t>(left + 1));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int nd = row_node[i];
      if (nd < 0) continue;
      const auto& node = tree.nodes[static_cast<std::size_t>(nd)];
      if (node.feature < 0) {
        row_node[i] = -1;  // finalized leaf
        continue;
      }
      const int child = x[i][static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
      row_node[i] = child;
      stats[static_cast<std::size_t>(child)].g += g[i];
      stats[static_cast<std::size_t>(child)].h += h[i];
    }
    for (const std::size_t c : next) tree.nodes[c].weight = leaf_weight(stats[c].g, stats[c].h, p.lambda);
    frontier = std::move(next);
  }
  return tree;
}

}  // namespace

SplitCandidate find_best_split(const Matrix& x, std::span<const double> g, std::span<const double> h,
                               std::span<const std::size_t> indices, const GbtParams& params) {
  if (indices.empty()) throw ValidationError("find_best_split: empty node");
  check_inputs(x, g, h);
  double g_total = 0.0, h_total = 0.0;
  std::vector<std::size_t> rows(indices.begin(), indices.end());
  std::sort(rows.begin(), rows.end());
  for (const std::size_t i : rows) {
    g_total += g[i];
    h_total += h[i];
  }
  SplitCandidate best;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<std::size_t> o = rows;
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
    ScanState st;
    for (const std::size_t i : o) scan_step(st, x[i][f], g[i], h[i], g_total, h_total, f, params, best);
  }
  return best;
}

Tree build_tree(const Matrix& x, std::span<const double> g, std::span<const double> h,
                const GbtParams& params) {
  check_inputs(x, g, h);
  return grow_tree(x, g, h, params, presort(x));
}

double GbtModel::predict_logit(std::span<const double> raw_row) const {
  if (raw_row.size() != columns.size() && !columns.empty()) {
    throw ValidationError("predict: row has " + std::to_string(raw_row.size()) + " values, model expects " +
                          std::to_string(columns.size()));
  }
  std::vector<double> z(raw_row.begin(), raw_row.end());
  if (!scaler.empty()) {
    for (std::size_t c = 0; c < z.size(); ++c) {
      z[c] = scaler.stds[c] > 0.0 ? (z[c] - scaler.means[c]) / scaler.stds[c] : 0.0;
    }
  }
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(z);
  return base_score + learning_rate * s;
}

std::vector<double> GbtModel::predict_proba(const Matrix& raw_rows) const {
  std::vector<double> out;
  out.reserve(raw_rows.size());
  for (const auto& r : raw_rows) out.push_back(sigmoid(predict_logit(r)));
  return out;
}

nlohmann::json GbtModel::to_json() const {
  nlohmann::json j;
  j["base_score"] = base_score;
  j["learning_rate"] = learning_rate;
  j["params"] = {{"n_trees", params.n_trees},     {"learning_rate", params.learning_rate},
                 {"max_depth", params.max_depth}, {"lambda", params.lambda},
                 {"gamma", params.gamma},         {"min_child_weight", params.min_child_weight},
                 {"seed", params.seed}};
  j["columns"] = columns;
  j["scaler"] = {{"means", scaler.means}, {"stds", scaler.stds}};
  nlohmann::json trees_json = nlohmann::json::array();
  for (const auto& t : trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"weight", n.weight}});
    }
    trees_json.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees_json);
  j["loss_history"] = loss_history;
  return j;
}

GbtModel GbtModel::from_json(const nlohmann::json& j) {
  GbtModel m;
  try {
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<std::size_t>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.lambda = p.at("lambda").get<double>();
    m.params.gamma = p.at("gamma").get<double>();
    m.params.min_child_weight = p.at("min_child_weight").get<double>();
    m.params.seed = p.value("seed", std::uint64_t{0});
    m.columns = j.value("columns", std::vector<std::string>{});
    if (j.contains("scaler")) {
      m.scaler.means = j["scaler"].at("means").get<std::vector<double>>();
      m.scaler.stds = j["scaler"].at("stds").get<std::vector<double>>();
    }
    for (const auto& tj : j.at("trees")) {
      Tree t;
      for (const auto& nj : tj.at("nodes")) {
        t.nodes.push_back({nj.at("feature").get<int>(), nj.at("threshold").get<double>(), nj.at("left").get<int>(),
                           nj.at("right").get<int>(), nj.at("weight").get<double>()});
      }
      m.trees.push_back(std::move(t));
    }
    m.loss_history = j.value("loss_history", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
  const std::size_t d = m.columns.size();
  if (!m.scaler.empty() && (m.scaler.means.size() != d || m.scaler.stds.size() != d)) {
    throw ValidationError("model JSON: scaler size does not match columns");
  }
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) {
      const auto sz = static_cast<int>(t.nodes.size());
      if (!std::isfinite(n.weight) || !std::isfinite(n.threshold)) throw ValidationError("model JSON: non-finite value");
      if (n.feature >= 0 && ((d > 0 && static_cast<std::size_t>(n.feature) >= d) || n.left <= 0 || n.right <= 0 ||
                             n.left >= sz || n.right >= sz)) {
        throw ValidationError("model JSON: malformed tree node");
      }
    }
  }
  return m;
}

GbtModel train(const Matrix& x, std::span<const int> labels, const GbtParams& params,
               std::span<const std::string> columns) {
  if (x.empty()) throw ValidationError("train: no rows");
  if (labels.size() != x.size()) throw ValidationError("train: label count != row count");
  if (!columns.empty() && columns.size() != x[0].size()) throw ValidationError("train: column names mismatch");
  if (!(params.learning_rate > 0.0) || params.lambda < 0.0 || params.gamma < 0.0 || params.min_child_weight < 0.0) {
    throw ValidationError("train: learning_rate must be > 0; lambda, gamma, min_child_weight >= 0");
  }
  for (const auto& row : x) {
    if (row.size() != x[0].size()) throw ValidationError("train: ragged rows");
    for (const double v : row) {
      if (!std::isfinite(v)) throw ValidationError("train: non-finite feature value");
    }
  }
  const auto n = x.size();
  double prevalence = 0.0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("train: label outside {0, 1}");
    prevalence += y;
  }
  prevalence = std::clamp(prevalence / static_cast<double>(n), 1e-6, 1.0 - 1e-6);

  GbtModel m;
  m.base_score = std::log(prevalence / (1.0 - prevalence));
  m.learning_rate = params.learning_rate;
  m.params = params;
  m.columns.assign(columns.begin(), columns.end());

  std::vector<double> logits(n, m.base_score);
  std::vector<double> g(n), h(n);
  m.loss_history.push_back(mean_log_loss(logits, labels));
  const auto order = params.n_trees > 0 ? presort(x) : std::vector<std::vector<std::size_t>>{};
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = logistic_grad_hess(logits[i], labels[i]);
      g[i] = gh.g;
      h[i] = gh.h;
    }
    Tree tree = grow_tree(x, g, h, params, order);
    for (std::size_t i = 0; i < n; ++i) logits[i] += params.learning_rate * tree.predict(x[i]);
    m.trees.push_back(std::move(tree));
    m.loss_history.push_back(mean_log_loss(logits, labels));
  }
  return m;
}

GbtModel train_scaled(const FeatureMatrix& train_set, const GbtParams& params) {
  train_set.validate();
  const ZScaler scaler = ZScaler::fit(train_set.rows);
  GbtModel m = train(scaler.apply(train_set.rows), train_set.labels, params, train_set.columns);
  m.scaler = scaler;
  return m;
}

std::vector<int> threshold_predictions(std::span<const double> probabilities, double threshold) {
  std::vector<int> out;
  out.reserve(probabilities.size());
  for (const double p : probabilities) out.push_back(p > threshold ? 1 : 0);
  return out;
}

Classification classify(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ValidationError("classify: size mismatch");
  Classification c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) throw ValidationError("classify: values must be 0 or 1");
    if (p == 1 && y == 1) ++c.tp;
    else if (p == 1) ++c.fp;
    else if (y == 1) ++c.fn;
    else ++c.tn;
  }
  c.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  c.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
  return c;
}

double f1_score(std::span<const int> predictions, std::span<const int> labels) {
  return classify(predictions, labels).f1;
}

}  // namespace convoforge
