#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iotfp/fingerprint.hpp"

namespace iotfp::ml {

inline constexpr std::string_view kModelSchemaVersion = "iotfp-model/1";

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void append_row(std::span<const double> values);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One-vs-all training data: +1 for the positive class, -1 for everything else.
struct LabeledDataset {
  Matrix rows;
  std::vector<int> labels;
  std::string positive_class;

  std::size_t size() const { return labels.size(); }
  std::size_t dimension() const { return rows.cols(); }
  std::size_t positives() const;

  // Throws Error{EmptyData}, Error{InvalidArgument} (bad label or length
  // mismatch) or, when `need_both_classes`, Error{SingleClassData}.
  void validate(bool need_both_classes) const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct Prediction {
  int label = -1;
  double score = 0.0;
};

// ---------------------------------------------------------------------------
// Gradient boosting over depth-1 regression trees with binomial deviance.

struct Stump {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double left_value = 0.0;   // feature <= threshold
  double right_value = 0.0;  // feature > threshold

  double evaluate(std::span<const double> x) const {
    return x[feature_index] <= threshold ? left_value : right_value;
  }

  friend bool operator==(const Stump&, const Stump&) = default;
};

struct BoostingParams {
  std::size_t n_stages = 100;
  double learning_rate = 1.0;
};

struct BoostedModel {
  double initial_score = 0.0;  // prior log-odds of the positive class
  std::vector<Stump> stages;
  double learning_rate = 1.0;
  std::size_t n_stages = 0;
  std::size_t dimension = 0;
  std::string positive_class;
  // Mean binomial deviance on the training set: entry 0 is the prior-only
  // model, entry m the model after m stages.
  std::vector<double> training_deviance;
};

BoostedModel train_boosted(const LabeledDataset& data, const BoostingParams& params = {});
// score = initial + learning_rate * sum of stage outputs; label +1 iff score >= 0.
Prediction predict_boosted(const BoostedModel& model, std::span<const double> x);

// Mean binomial deviance of raw scores against +/-1 labels.
double binomial_deviance(std::span<const int> labels, std::span<const double> scores);

// ---------------------------------------------------------------------------
// k-nearest neighbours (Euclidean, unscaled features).

struct KnnModel {
  Matrix rows;
  std::vector<int> labels;
  std::size_t k = 5;
  std::string positive_class;
};

KnnModel train_knn(const LabeledDataset& data, std::size_t k);
// Ties at equal distance are ordered by row content, then label (-1 first), so
// the result does not depend on training-row order. Even vote splits give -1.
int predict_knn(const KnnModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// CART-style classification tree with Gini impurity.

struct TreeNode {
  // leaf when feature_index < 0
  int feature_index = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  int label = -1;
};

inline constexpr std::size_t kDefaultTreeDepth = 5;

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t max_depth = kDefaultTreeDepth;
  std::size_t dimension = 0;
  std::string positive_class;

  std::size_t depth() const;
};

TreeModel train_tree(const LabeledDataset& data, std::size_t max_depth = kDefaultTreeDepth);
int predict_tree(const TreeModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Majority vote over the three classifiers above.

struct VoteModel {
  BoostedModel boosted;
  KnnModel knn;
  TreeModel tree;
};

int majority_vote(int a, int b, int c);
int predict_vote(const VoteModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Uniform handling for evaluation and persistence.

enum class ClassifierKind : std::uint8_t { Boosted, Knn, Tree, Vote };

std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> classifier_from_string(std::string_view name);

struct ClassifierParams {
  BoostingParams boosting;
  std::size_t knn_k = 5;
  std::size_t tree_max_depth = kDefaultTreeDepth;
};

using AnyModel = std::variant<BoostedModel, KnnModel, TreeModel, VoteModel>;

AnyModel train(ClassifierKind kind, const LabeledDataset& data, const ClassifierParams& params = {});
// Non-boosted classifiers report their label as the score.
Prediction predict(const AnyModel& model, std::span<const double> x);
ClassifierKind kind_of(const AnyModel& model);
const std::string& positive_class_of(const AnyModel& model);
std::size_t dimension_of(const AnyModel& model);

// A trained model plus the feature variant its inputs are projected with.
struct TrainedModel {
  AnyModel model;
  FeatureVariant variant = FeatureVariant::All;
};

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace iotfp::ml
