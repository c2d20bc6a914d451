#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convoforge/gbt.hpp"
#include "json.hpp"

namespace convoforge {

struct PermutationImportance {
  std::string name;
  double mean = 0.0;  // baseline F1 minus permuted F1, averaged over repeats
  double std = 0.0;   // population std over repeats
};

struct PermutationOptions {
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// `test` columns must all exist in the model; they are reordered to match.
// Requires at least two rows of each class. Columns the model never splits on
// get exactly 0 without being evaluated.
std::vector<PermutationImportance> permutation_importance(const GbtModel& model, const FeatureMatrix& test,
                                                          const PermutationOptions& options);

enum class Sign { kPlus, kMinus, kNotSignificant };
std::string_view to_string(Sign sign);

double pearson(std::span<const double> x, std::span<const double> y);

// "+" means high values push toward Constructive (negative correlation with
// the destructive probability).
Sign direction_sign(std::span<const double> feature, std::span<const double> p_destructive,
                    double importance_mean, double importance_std, double min_abs_r = 0.05);

struct RankedFeature {
  std::string name;
  double importance = 0.0;
  double std = 0.0;
  double r = 0.0;
  Sign sign = Sign::kNotSignificant;
};

struct SpecReport {
  int spec = 0;
  std::string status = "ok";  // "ok" or "skipped"
  std::string reason;
  std::optional<double> f1;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_features = 0;
  bool regularized = false;
  // Full ranking, descending importance; ties keep column order.
  std::vector<RankedFeature> ranking;
};

// Ranks importances and attaches signs computed on the test rows.
std::vector<RankedFeature> rank_features(std::span<const PermutationImportance> importances,
                                         const FeatureMatrix& test, std::span<const double> p_destructive);

inline constexpr std::string_view kSignFootnote =
    "sign: + pushes toward Constructive, - toward Destructive; n.s. when mean importance <= its std "
    "over repeats or |r| < 0.05";

nlohmann::json render_report_json(std::span<const SpecReport> reports, std::string_view config_hash,
                                   std::size_t top_k = 5);
std::string render_report_markdown(std::span<const SpecReport> reports, std::string_view config_hash,
                                   std::size_t top_k = 5);
// spec,rank,name,importance,std,r,sign for every ranked feature.
std::string render_importance_csv(std::span<const SpecReport> reports, std::string_view config_hash);

}  // namespace convoforge
