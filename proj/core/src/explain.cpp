#include "convoforge/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "convoforge/csv.hpp"
#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

namespace convoforge {

namespace {

std::set<std::size_t> used_features(const GbtModel& model) {
  std::set<std::size_t> used;
  for (const auto& t : model.trees) {
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) used.insert(static_cast<std::size_t>(n.feature));
    }
  }
  return used;
}

double f1_of(const GbtModel& model, const Matrix& rows, std::span<const int> labels) {
  return f1_score(threshold_predictions(model.predict_proba(rows)), labels);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::vector<PermutationImportance> permutation_importance(const GbtModel& model, const FeatureMatrix& test,
                                                          const PermutationOptions& options) {
  if (options.repeats == 0) throw ValidationError("permutation_importance: repeats must be positive");
  for (const auto& c : test.columns) {
    if (std::find(model.columns.begin(), model.columns.end(), c) == model.columns.end()) {
      throw ValidationError("permutation_importance: column '" + c + "' was not a training column");
    }
  }
  const FeatureMatrix x = test.select_columns(model.columns);
  x.validate();
  const auto positives = static_cast<std::size_t>(std::count(x.labels.begin(), x.labels.end(), 1));
  if (positives < 2 || x.num_rows() - positives < 2) {
    throw ValidationError("permutation_importance: need at least two test rows per class");
  }

  const double baseline = f1_of(model, x.rows, x.labels);
  const auto used = used_features(model);
  const std::size_t d = x.num_columns();
  std::vector<PermutationImportance> out(d);
  for (std::size_t f = 0; f < d; ++f) out[f].name = x.columns[f];

  auto evaluate = [&](std::size_t f) {
    if (!used.contains(f)) return;
    Matrix rows = x.rows;
    std::vector<double> col(rows.size());
    std::vector<double> drops(options.repeats);
    for (std::size_t r = 0; r < options.repeats; ++r) {
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = x.rows[i][f];
      Rng rng(mix_seed(mix_seed(options.seed, f), r));
      rng.shuffle(std::span<double>(col));
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i][f] = col[i];
      drops[r] = baseline - f1_of(model, rows, x.labels);
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(drops.size());
    double var = 0.0;
    for (const double v : drops) var += (v - mean) * (v - mean);
    out[f].mean = mean;
    out[f].std = std::sqrt(var / static_cast<double>(drops.size()));
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, d));
  if (jobs == 1) {
    for (std::size_t f = 0; f < d; ++f) evaluate(f);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t f = w; f < d; f += jobs) evaluate(f);
      });
    }
  }
  return out;
}

std::string_view to_string(Sign sign) {
  switch (sign) {
    case Sign::kPlus: return "+";
    case Sign::kMinus: return "-";
    case Sign::kNotSignificant: return "n.s.";
  }
  return "n.s.";
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: size mismatch");
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Sign direction_sign(std::span<const double> feature, std::span<const double> p_destructive,
                    double importance_mean, double importance_std, double min_abs_r) {
  const double r = pearson(feature, p_destructive);
  if (importance_mean <= importance_std || std::abs(r) < min_abs_r) return Sign::kNotSignificant;
  return r < 0.0 ? Sign::kPlus : Sign::kMinus;
}

std::vector<RankedFeature> rank_features(std::span<const PermutationImportance> importances,
                                         const FeatureMatrix& test, std::span<const double> p_destructive) {
  std::vector<RankedFeature> out;
  for (const auto& imp : importances) {
    const auto it = std::find(test.columns.begin(), test.columns.end(), imp.name);
    if (it == test.columns.end()) throw ValidationError("rank_features: unknown column '" + imp.name + "'");
    const auto c = static_cast<std::size_t>(it - test.columns.begin());
    std::vector<double> values(test.rows.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = test.rows[i][c];
    RankedFeature rf;
    rf.name = imp.name;
    rf.importance = imp.mean;
    rf.std = imp.std;
    rf.r = pearson(values, p_destructive);
    rf.sign = direction_sign(values, p_destructive, imp.mean, imp.std);
    out.push_back(std::move(rf));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.importance > b.importance; });
  return out;
}

nlohmann::json render_report_json(std::span<const SpecReport> reports, std::string_view config_hash,
                                   std::size_t top_k) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json s;
    s["spec"] = r.spec;
    s["status"] = r.status;
    if (!r.reason.empty()) s["reason"] = r.reason;
    s["f1"] = r.f1 ? nlohmann::json(*r.f1) : nlohmann::json(nullptr);
    if (r.f1) {
      s["precision"] = r.precision;
      s["recall"] = r.recall;
    }
    s["n_features"] = r.n_features;
    s["regularized"] = r.regularized;
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min(top_k, r.ranking.size()); ++i) {
      const auto& f = r.ranking[i];
      top.push_back({{"name", f.name}, {"importance", f.importance}, {"std", f.std}, {"sign", to_string(f.sign)}});
    }
    s["top"] = std::move(top);
    specs.push_back(std::move(s));
  }
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["footer"] = kSignFootnote;
  j["specs"] = std::move(specs);
  return j;
}

std::string render_report_markdown(std::span<const SpecReport> reports, std::string_view config_hash,
                                   std::size_t top_k) {
  std::ostringstream out;
  out << "<!-- config_hash: " << config_hash << " -->\n\n";
  out << "| Model | F1 | Number of Features | Regularized? | Top " << top_k << " Features |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    out << "| " << r.spec << " | ";
    if (r.status != "ok" || !r.f1) {
      out << "N/A | " << r.n_features << " | N/A | N/A |\n";
      continue;
    }
    out << format_double(*r.f1) << " | " << r.n_features << " | " << (r.regularized ? "Yes" : "No") << " | ";
    for (std::size_t i = 0; i < std::min(top_k, r.ranking.size()); ++i) {
      if (i) out << "<br>";
      out << (i + 1) << ". " << r.ranking[i].name << " (" << to_string(r.ranking[i].sign) << ")";
    }
    out << " |\n";
  }
  out << "\n" << kSignFootnote << "\n";
  return out.str();
}

std::string render_importance_csv(std::span<const SpecReport> reports, std::string_view config_hash) {
  std::ostringstream out;
  out << "# config_hash: " << config_hash << "\n";
  csv::write_row(out, {"spec", "rank", "name", "importance", "std", "r", "sign"});
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.ranking.size(); ++i) {
      const auto& f = r.ranking[i];
      csv::write_row(out, {std::to_string(r.spec), std::to_string(i + 1), f.name, format_double(f.importance),
                           format_double(f.std), format_double(f.r), std::string(to_string(f.sign))});
    }
  }
  return out.str();
}

}  // namespace convoforge
