#pragma once

// Independent reference implementations used to freeze expected values.
// They trade speed for directness: pairwise sums, explicit loops, O(n^2)
// split scans.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline double gini_pairwise(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double sum = 0.0, diff = 0.0;
  for (double v : x) sum += v;
  if (x.empty() || sum == 0.0) return 0.0;
  for (double a : x)
    for (double b : x) diff += std::fabs(a - b);
  return diff / (2.0 * n * n * (sum / n));
}

inline double turn_taking(const std::vector<std::string>& speakers) {
  std::size_t turns = 0;
  for (std::size_t i = 0; i < speakers.size(); ++i)
    if (i == 0 || speakers[i] != speakers[i - 1]) ++turns;
  return static_cast<double>(turns) / static_cast<double>(speakers.size());
}

inline double burstiness(const std::vector<std::int64_t>& t) {
  if (t.size() < 3) return 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < t.size(); ++i) gaps.push_back(static_cast<double>(t[i] - t[i - 1]));
  double mu = 0.0;
  for (double g : gaps) mu += g;
  mu /= static_cast<double>(gaps.size());
  double var = 0.0;
  for (double g : gaps) var += (g - mu) * (g - mu);
  const double sd = std::sqrt(var / static_cast<double>(gaps.size()));
  if (sd + mu == 0.0) return 0.0;
  return (sd - mu) / (sd + mu);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cos_sim(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline double pop_var(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

struct DD {
  double dd = 0, var_dd = 0, incongruent = 0, range = 0;
};

// Centroid of the unit-normalized vectors of `speaker` in [lo, hi); empty
// when the speaker is absent.
inline std::vector<double> centroid(const std::vector<std::string>& speakers,
                                    const std::vector<std::vector<double>>& vecs, const std::string& speaker,
                                    std::size_t lo, std::size_t hi) {
  std::vector<double> c;
  std::size_t n = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (speakers[i] != speaker) continue;
    const double norm = std::sqrt(dot(vecs[i], vecs[i]));
    if (c.empty()) c.assign(vecs[i].size(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += norm > 0 ? vecs[i][k] / norm : 0.0;
    ++n;
  }
  for (auto& x : c) x /= static_cast<double>(n);
  return c;
}

inline DD discursive_diversity(const std::vector<std::string>& speakers,
                               const std::vector<std::vector<double>>& vecs) {
  std::set<std::string> names(speakers.begin(), speakers.end());
  DD out;
  if (names.size() < 2) return out;
  const std::size_t n = speakers.size();
  auto mean_dist = [&](std::size_t lo, std::size_t hi, double* result) {
    std::vector<std::vector<double>> cs;
    for (const auto& s : names) {
      auto c = centroid(speakers, vecs, s, lo, hi);
      if (!c.empty()) cs.push_back(c);
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a + 1; b < cs.size(); ++b) {
        sum += 1.0 - cos_sim(cs[a], cs[b]);
        ++pairs;
      }
    if (pairs == 0) return false;
    *result = sum / static_cast<double>(pairs);
    return true;
  };
  double whole = 0;
  mean_dist(0, n, &whole);
  out.dd = 1.0 - whole;
  // Thirds by index, remainder to the earliest thirds.
  const std::size_t base = n / 3, rem = n % 3;
  std::size_t b[4] = {0, 0, 0, 0};
  for (int k = 0; k < 3; ++k) b[k + 1] = b[k] + base + (static_cast<std::size_t>(k) < rem ? 1 : 0);
  std::vector<double> stage;
  for (int k = 0; k < 3; ++k) {
    double d;
    if (mean_dist(b[k], b[k + 1], &d)) stage.push_back(1.0 - d);
  }
  out.var_dd = pop_var(stage);
  std::vector<double> s1, s2;
  for (const auto& s : names) {
    auto c0 = centroid(speakers, vecs, s, b[0], b[1]);
    auto c1 = centroid(speakers, vecs, s, b[1], b[2]);
    auto c2 = centroid(speakers, vecs, s, b[2], b[3]);
    std::vector<double> own;
    if (!c0.empty() && !c1.empty()) {
      s1.push_back(1.0 - cos_sim(c0, c1));
      own.push_back(s1.back());
    }
    if (!c1.empty() && !c2.empty()) {
      s2.push_back(1.0 - cos_sim(c1, c2));
      own.push_back(s2.back());
    }
    if (!own.empty()) {
      double m = 0;
      for (double x : own) m += x;
      out.range += m / static_cast<double>(own.size());
    }
  }
  out.incongruent = pop_var(s1) + pop_var(s2);
  return out;
}

inline double f1_counts(const std::vector<int>& pred, const std::vector<int>& label) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    tp += pred[i] == 1 && label[i] == 1;
    fp += pred[i] == 1 && label[i] == 0;
    fn += pred[i] == 0 && label[i] == 1;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Dale-Chall from a pre-split representation: sentences of words and the
// set of easy words.
inline double dale_chall(const std::vector<std::vector<std::string>>& sentences, const std::set<std::string>& easy) {
  double words = 0, difficult = 0;
  for (const auto& s : sentences)
    for (const auto& w : s) {
      ++words;
      if (!easy.count(w)) ++difficult;
    }
  if (words == 0 || sentences.empty()) return 0.0;
  return 0.1579 * (100.0 * difficult / words) + 0.0496 * (words / static_cast<double>(sentences.size()));
}

inline std::vector<double> zscores(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  s = std::sqrt(s / static_cast<double>(v.size()));
  std::vector<double> out;
  for (double x : v) out.push_back(s > 0 ? (x - m) / s : 0.0);
  return out;
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0;
  double gain = 0;
};

// Every (feature, midpoint threshold) pair; sums recomputed from scratch per
// candidate.
inline Split best_split(const std::vector<std::vector<double>>& x, const std::vector<double>& g,
                        const std::vector<double>& h, double lambda, double gamma, double min_child_weight) {
  Split best;
  const std::size_t n = x.size(), d = x[0].size();
  for (std::size_t f = 0; f < d; ++f) {
    std::set<double> values;
    for (std::size_t i = 0; i < n; ++i) values.insert(x[i][f]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      double thr = v[k] + (v[k + 1] - v[k]) * 0.5;
      if (!(thr > v[k])) thr = v[k + 1];
      double gl = 0, hl = 0, gr = 0, hr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i][f] < thr) {
          gl += g[i];
          hl += h[i];
        } else {
          gr += g[i];
          hr += h[i];
        }
      }
      if (hl < min_child_weight || hr < min_child_weight) continue;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                 (gl + gr) * (gl + gr) / (hl + hr + lambda)) - gamma;
      if (gain > 0 && (!best.found || gain > best.gain)) best = {true, f, thr, gain};
    }
  }
  return best;
}

inline double logloss(double z, double y) {
  const double p = 1.0 / (1.0 + std::exp(-z));
  return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::fabs(a - b) <= rel * std::fabs(b) + abs_floor;
}

}  // namespace oracle
