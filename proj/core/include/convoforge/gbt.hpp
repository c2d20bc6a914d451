#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "convoforge/registry.hpp"
#include "json.hpp"

namespace convoforge {

using Matrix = std::vector<std::vector<double>>;

// Rows in conversation order; labels 0 = constructive, 1 = destructive.
struct FeatureMatrix {
  std::vector<std::string> columns;
  Matrix rows;
  std::vector<int> labels;

  std::size_t num_rows() const noexcept { return rows.size(); }
  std::size_t num_columns() const noexcept { return columns.size(); }
  // Throws ValidationError on ragged rows, non-finite values, duplicate
  // column names or labels outside {0, 1}.
  void validate() const;
  FeatureMatrix subset_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(std::span<const std::string> names) const;
};

// Population statistics; zero-variance columns scale to 0.
struct ZScaler {
  std::vector<double> means;
  std::vector<double> stds;

  static ZScaler fit(const Matrix& rows);
  Matrix apply(const Matrix& rows) const;
  bool empty() const noexcept { return means.empty(); }
};

struct ScaledSplit {
  Matrix train;
  Matrix test;
  ZScaler scaler;
};
ScaledSplit fit_apply_zscaler(const Matrix& train, const Matrix& test);

// Model specifications 1..6 over registry order.
std::vector<std::string> select_features(const FeatureRegistry& registry, int model_spec);

struct GradHess {
  double g;
  double h;
};
double sigmoid(double x);
GradHess logistic_grad_hess(double pred_logit, double label);
double logistic_loss(double pred_logit, double label);
double mean_log_loss(std::span<const double> logits, std::span<const int> labels);

struct GbtParams {
  std::size_t n_trees = 200;
  double learning_rate = 0.1;
  std::size_t max_depth = 4;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;
};

// Leaves have feature == -1. Rows with x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  std::size_t depth() const;
};

struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

// Exact greedy search over every (feature, threshold) candidate for the rows
// in `indices`. Only splits with gain > 0 and both children meeting
// min_child_weight qualify.
SplitCandidate find_best_split(const Matrix& x, std::span<const double> g, std::span<const double> h,
                               std::span<const std::size_t> indices, const GbtParams& params);

Tree build_tree(const Matrix& x, std::span<const double> g, std::span<const double> h,
                const GbtParams& params);

struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  GbtParams params;
  std::vector<std::string> columns;
  // Applied to raw rows before the trees when present.
  ZScaler scaler;
  std::vector<Tree> trees;
  // Mean training log-loss, entry 0 before the first tree.
  std::vector<double> loss_history;

  double predict_logit(std::span<const double> raw_row) const;
  std::vector<double> predict_proba(const Matrix& raw_rows) const;

  nlohmann::json to_json() const;
  static GbtModel from_json(const nlohmann::json& j);
};

// `x` is used as given; attach a scaler afterwards when it was pre-scaled.
GbtModel train(const Matrix& x, std::span<const int> labels, const GbtParams& params,
               std::span<const std::string> columns = {});

// Fits a ZScaler on `train` rows, trains on the scaled rows and stores the
// scaler so that predict_proba takes raw rows.
GbtModel train_scaled(const FeatureMatrix& train, const GbtParams& params);

std::vector<int> threshold_predictions(std::span<const double> probabilities, double threshold = 0.5);

struct Classification {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Destructive (1) is the positive class.
Classification classify(std::span<const int> predictions, std::span<const int> labels);
double f1_score(std::span<const int> predictions, std::span<const int> labels);

}  // namespace convoforge
