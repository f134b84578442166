#include "iotfp/ml.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "iotfp/error.hpp"

namespace iotfp::ml {

using nlohmann::json;

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(ErrorKind::DimensionMismatch, "row of dimension " + std::to_string(values.size()) +
                                                  " appended to matrix with " + std::to_string(cols_) +
                                                  " columns");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void LabeledDataset::validate(bool need_both_classes) const {
  if (labels.empty()) throw Error(ErrorKind::EmptyData, "dataset is empty");
  if (rows.rows() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "dataset has " + std::to_string(rows.rows()) + " rows but " +
                                                std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error(ErrorKind::InvalidArgument, "labels must be +1 or -1");
  }
  if (need_both_classes) {
    const std::size_t pos = positives();
    if (pos == 0 || pos == labels.size()) {
      throw Error(ErrorKind::SingleClassData, "training data for '" + positive_class + "' holds only one class");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.positive_class = positive_class;
  out.rows = Matrix(0, rows.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.rows.append_row(rows.row(i));
    out.labels.push_back(labels[i]);
  }
  return out;
}

namespace {

// Relative slack under which two split scores count as tied, so the lowest
// feature index / threshold wins regardless of summation order.
constexpr double kTieTolerance = 1e-12;

bool clearly_greater(double candidate, double incumbent) {
  if (incumbent == -std::numeric_limits<double>::infinity()) return true;
  return candidate > incumbent + kTieTolerance * std::max(1.0, std::abs(incumbent));
}

double split_point(double lo, double hi) {
  const double m = std::midpoint(lo, hi);
  return m < hi ? m : lo;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Negative log-likelihood of one point; y01 in {0, 1}.
double point_loss(double score, double y01) { return softplus(score) - y01 * score; }

using SortedColumns = std::vector<std::vector<std::uint32_t>>;

SortedColumns presort(const Matrix& x) {
  SortedColumns cols(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto& order = cols[j];
    order.resize(x.rows());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, j) < x(b, j); });
  }
  return cols;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
};

// Least-squares split of `target`: maximizes sumL^2/nL + sumR^2/nR, which is
// equivalent to minimizing the two-leaf squared error.
SplitChoice best_least_squares_split(const Matrix& x, const SortedColumns& sorted,
                                     std::span<const double> target) {
  const std::size_t n = target.size();
  const double total = std::accumulate(target.begin(), target.end(), 0.0);
  SplitChoice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto& order = sorted[j];
    double left_sum = 0.0;
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      left_sum += target[order[pos]];
      const double v = x(order[pos], j);
      const double next = x(order[pos + 1], j);
      if (v == next) continue;
      const double nl = static_cast<double>(pos + 1);
      const double nr = static_cast<double>(n - pos - 1);
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
      if (clearly_greater(score, best_score)) {
        best_score = score;
        best = {true, j, split_point(v, next)};
      }
    }
  }
  return best;
}

// Newton step for one leaf, halved until it does not increase the leaf's loss.
double leaf_value(std::span<const std::size_t> members, std::span<const double> scores,
                  std::span<const double> y01, double learning_rate) {
  if (members.empty()) return 0.0;
  double grad = 0.0;
  double hess = 0.0;
  for (std::size_t i : members) {
    const double p = sigmoid(scores[i]);
    grad += y01[i] - p;
    hess += p * (1.0 - p);
  }
  if (hess < 1e-150) return 0.0;
  double step = grad / hess;

  const auto loss_at = [&](double value) {
    double total = 0.0;
    for (std::size_t i : members) total += point_loss(scores[i] + learning_rate * value, y01[i]);
    return total;
  };
  const double base = loss_at(0.0);
  for (int attempt = 0; attempt < 60; ++attempt) {
    if (loss_at(step) <= base) return step;
    step /= 2.0;
  }
  return 0.0;
}

double mean_deviance(std::span<const double> scores, std::span<const double> y01) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) total += point_loss(scores[i], y01[i]);
  return 2.0 * total / static_cast<double>(scores.size());
}

}  // namespace

double binomial_deviance(std::span<const int> labels, std::span<const double> scores) {
  std::vector<double> y01(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y01[i] = labels[i] == 1 ? 1.0 : 0.0;
  return mean_deviance(scores, y01);
}

BoostedModel train_boosted(const LabeledDataset& data, const BoostingParams& params) {
  data.validate(true);
  const std::size_t n = data.size();
  const Matrix& x = data.rows;

  std::vector<double> y01(n);
  for (std::size_t i = 0; i < n; ++i) y01[i] = data.labels[i] == 1 ? 1.0 : 0.0;
  const double p = static_cast<double>(data.positives()) / static_cast<double>(n);

  BoostedModel model;
  model.initial_score = std::log(p / (1.0 - p));
  model.learning_rate = params.learning_rate;
  model.dimension = data.dimension();
  model.positive_class = data.positive_class;

  std::vector<double> scores(n, model.initial_score);
  std::vector<double> residuals(n);
  model.training_deviance.push_back(mean_deviance(scores, y01));

  const auto sorted = presort(x);
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  left.reserve(n);
  right.reserve(n);

  for (std::size_t stage = 0; stage < params.n_stages; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = y01[i] - sigmoid(scores[i]);

    const auto split = best_least_squares_split(x, sorted, residuals);
    Stump stump;
    left.clear();
    right.clear();
    if (split.found) {
      stump.feature_index = split.feature;
      stump.threshold = split.threshold;
      for (std::size_t i = 0; i < n; ++i) {
        (x(i, split.feature) <= split.threshold ? left : right).push_back(i);
      }
      stump.left_value = leaf_value(left, scores, y01, params.learning_rate);
      stump.right_value = leaf_value(right, scores, y01, params.learning_rate);
    } else {
      // no feature varies: a single leaf
      for (std::size_t i = 0; i < n; ++i) left.push_back(i);
      stump.threshold = std::numeric_limits<double>::max();
      stump.left_value = leaf_value(left, scores, y01, params.learning_rate);
      stump.right_value = stump.left_value;
    }

    for (std::size_t i = 0; i < n; ++i) scores[i] += params.learning_rate * stump.evaluate(x.row(i));
    model.stages.push_back(stump);
    model.training_deviance.push_back(mean_deviance(scores, y01));
  }
  model.n_stages = model.stages.size();
  return model;
}

Prediction predict_boosted(const BoostedModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw Error(ErrorKind::DimensionMismatch, "input of dimension " + std::to_string(x.size()) +
                                                  ", model expects " + std::to_string(model.dimension));
  }
  double stage_sum = 0.0;
  for (const auto& stump : model.stages) stage_sum += stump.evaluate(x);
  const double score = model.initial_score + model.learning_rate * stage_sum;
  return {score >= 0.0 ? 1 : -1, score};
}

// ---------------------------------------------------------------------------

KnnModel train_knn(const LabeledDataset& data, std::size_t k) {
  data.validate(false);
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (k > data.size()) {
    throw Error(ErrorKind::KTooLarge,
                "k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(data.size()));
  }
  return {data.rows, data.labels, k, data.positive_class};
}

int predict_knn(const KnnModel& model, std::span<const double> x) {
  const Matrix& rows = model.rows;
  if (x.size() != rows.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "input of dimension " + std::to_string(x.size()) +
                                                  ", model expects " + std::to_string(rows.cols()));
  }
  const std::size_t n = rows.rows();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rows.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double diff = r[j] - x[j];
      d += diff * diff;
    }
    dist[i] = d;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto closer = [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    const auto ra = rows.row(a);
    const auto rb = rows.row(b);
    if (!std::equal(ra.begin(), ra.end(), rb.begin())) {
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    }
    return model.labels[a] < model.labels[b];
  };
  const auto kth = order.begin() + static_cast<std::ptrdiff_t>(model.k);
  std::partial_sort(order.begin(), kth, order.end(), closer);

  int votes = 0;
  for (auto it = order.begin(); it != kth; ++it) votes += model.labels[*it];
  return votes > 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------

namespace {

double gini(double positives, double count) {
  if (count == 0) return 0.0;
  const double p = positives / count;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct TreeBuilder {
  const LabeledDataset& data;
  std::size_t max_depth;
  std::vector<TreeNode> nodes;

  static int majority(std::size_t positives, std::size_t count) {
    return 2 * positives > count ? 1 : -1;
  }

  SplitChoice best_gini_split(std::span<const std::size_t> idx) const {
    const Matrix& x = data.rows;
    const double n = static_cast<double>(idx.size());
    double total_pos = 0.0;
    for (std::size_t i : idx) total_pos += data.labels[i] == 1 ? 1.0 : 0.0;

    SplitChoice best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(idx.begin(), idx.end());
    for (std::size_t j = 0; j < x.cols(); ++j) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x(a, j) < x(b, j); });
      double left_pos = 0.0;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        left_pos += data.labels[order[pos]] == 1 ? 1.0 : 0.0;
        const double v = x(order[pos], j);
        const double next = x(order[pos + 1], j);
        if (v == next) continue;
        const double nl = static_cast<double>(pos + 1);
        const double nr = n - nl;
        // negated weighted child impurity; larger is better
        const double score = -(nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr));
        if (clearly_greater(score, best_score)) {
          best_score = score;
          best = {true, j, split_point(v, next)};
        }
      }
    }
    return best;
  }

  std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += data.labels[i] == 1 ? 1 : 0;

    const auto node_id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[node_id].label = majority(pos, idx.size());

    const bool pure = pos == 0 || pos == idx.size();
    if (pure || depth >= max_depth) return node_id;
    const auto split = best_gini_split(idx);
    if (!split.found) return node_id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) {
      (data.rows(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    nodes[node_id].feature_index = static_cast<int>(split.feature);
    nodes[node_id].threshold = split.threshold;
    const auto l = build(std::move(left), depth + 1);
    const auto r = build(std::move(right), depth + 1);
    nodes[node_id].left = l;
    nodes[node_id].right = r;
    return node_id;
  }
};

std::size_t subtree_depth(const std::vector<TreeNode>& nodes, std::int32_t id) {
  const auto& node = nodes[static_cast<std::size_t>(id)];
  if (node.feature_index < 0) return 0;
  return 1 + std::max(subtree_depth(nodes, node.left), subtree_depth(nodes, node.right));
}

}  // namespace

std::size_t TreeModel::depth() const { return nodes.empty() ? 0 : subtree_depth(nodes, 0); }

TreeModel train_tree(const LabeledDataset& data, std::size_t max_depth) {
  data.validate(false);
  if (max_depth < 1) throw Error(ErrorKind::InvalidArgument, "max_depth must be at least 1");
  TreeBuilder builder{data, max_depth, {}};
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  builder.build(std::move(all), 0);

  TreeModel model;
  model.nodes = std::move(builder.nodes);
  model.max_depth = max_depth;
  model.dimension = data.dimension();
  model.positive_class = data.positive_class;
  return model;
}

int predict_tree(const TreeModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw Error(ErrorKind::DimensionMismatch, "input of dimension " + std::to_string(x.size()) +
                                                  ", model expects " + std::to_string(model.dimension));
  }
  std::size_t id = 0;
  while (model.nodes[id].feature_index >= 0) {
    const auto& node = model.nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature_index)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return model.nodes[id].label;
}

// ---------------------------------------------------------------------------

int majority_vote(int a, int b, int c) { return a + b + c > 0 ? 1 : -1; }

int predict_vote(const VoteModel& model, std::span<const double> x) {
  return majority_vote(predict_boosted(model.boosted, x).label, predict_knn(model.knn, x),
                       predict_tree(model.tree, x));
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Boosted: return "boosted";
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Tree: return "tree";
    case ClassifierKind::Vote: return "vote";
  }
  return "boosted";
}

std::optional<ClassifierKind> classifier_from_string(std::string_view name) {
  if (name == "boosted") return ClassifierKind::Boosted;
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "tree") return ClassifierKind::Tree;
  if (name == "vote") return ClassifierKind::Vote;
  return std::nullopt;
}

AnyModel train(ClassifierKind kind, const LabeledDataset& data, const ClassifierParams& params) {
  switch (kind) {
    case ClassifierKind::Boosted: return train_boosted(data, params.boosting);
    case ClassifierKind::Knn: return train_knn(data, params.knn_k);
    case ClassifierKind::Tree: return train_tree(data, params.tree_max_depth);
    case ClassifierKind::Vote:
      return VoteModel{train_boosted(data, params.boosting), train_knn(data, params.knn_k),
                       train_tree(data, params.tree_max_depth)};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown classifier");
}

Prediction predict(const AnyModel& model, std::span<const double> x) {
  struct Visitor {
    std::span<const double> x;
    Prediction operator()(const BoostedModel& m) const { return predict_boosted(m, x); }
    Prediction operator()(const KnnModel& m) const {
      const int y = predict_knn(m, x);
      return {y, static_cast<double>(y)};
    }
    Prediction operator()(const TreeModel& m) const {
      const int y = predict_tree(m, x);
      return {y, static_cast<double>(y)};
    }
    Prediction operator()(const VoteModel& m) const {
      const int y = predict_vote(m, x);
      return {y, static_cast<double>(y)};
    }
  };
  return std::visit(Visitor{x}, model);
}

ClassifierKind kind_of(const AnyModel& model) { return static_cast<ClassifierKind>(model.index()); }

const std::string& positive_class_of(const AnyModel& model) {
  struct Visitor {
    const std::string& operator()(const BoostedModel& m) const { return m.positive_class; }
    const std::string& operator()(const KnnModel& m) const { return m.positive_class; }
    const std::string& operator()(const TreeModel& m) const { return m.positive_class; }
    const std::string& operator()(const VoteModel& m) const { return m.boosted.positive_class; }
  };
  return std::visit(Visitor{}, model);
}

std::size_t dimension_of(const AnyModel& model) {
  struct Visitor {
    std::size_t operator()(const BoostedModel& m) const { return m.dimension; }
    std::size_t operator()(const KnnModel& m) const { return m.rows.cols(); }
    std::size_t operator()(const TreeModel& m) const { return m.dimension; }
    std::size_t operator()(const VoteModel& m) const { return m.boosted.dimension; }
  };
  return std::visit(Visitor{}, model);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json boosted_json(const BoostedModel& m) {
  json stages = json::array();
  for (const auto& s : m.stages) {
    stages.push_back({{"feature", s.feature_index}, {"threshold", s.threshold},
                      {"left", s.left_value}, {"right", s.right_value}});
  }
  return {{"positive_class", m.positive_class}, {"dimension", m.dimension},
          {"learning_rate", m.learning_rate},   {"n_stages", m.n_stages},
          {"initial_score", m.initial_score},   {"stages", std::move(stages)}};
}

BoostedModel boosted_from(const json& j) {
  BoostedModel m;
  m.positive_class = j.at("positive_class").get<std::string>();
  m.dimension = j.at("dimension").get<std::size_t>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.initial_score = j.at("initial_score").get<double>();
  for (const auto& s : j.at("stages")) {
    Stump stump{s.at("feature").get<std::size_t>(), s.at("threshold").get<double>(),
                s.at("left").get<double>(), s.at("right").get<double>()};
    if (stump.feature_index >= m.dimension) {
      throw Error(ErrorKind::BadFormat, "stump feature index out of range");
    }
    m.stages.push_back(stump);
  }
  m.n_stages = j.at("n_stages").get<std::size_t>();
  if (m.n_stages != m.stages.size()) throw Error(ErrorKind::BadFormat, "n_stages does not match stage list");
  return m;
}

json knn_json(const KnnModel& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows.rows(); ++i) {
    const auto r = m.rows.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"positive_class", m.positive_class}, {"dimension", m.rows.cols()}, {"k", m.k},
          {"labels", m.labels}, {"rows", std::move(rows)}};
}

KnnModel knn_from(const json& j) {
  KnnModel m;
  m.positive_class = j.at("positive_class").get<std::string>();
  m.k = j.at("k").get<std::size_t>();
  m.labels = j.at("labels").get<std::vector<int>>();
  m.rows = Matrix(0, j.at("dimension").get<std::size_t>());
  for (const auto& r : j.at("rows")) m.rows.append_row(r.get<std::vector<double>>());
  if (m.rows.rows() != m.labels.size() || m.k == 0 || m.k > m.labels.size()) {
    throw Error(ErrorKind::BadFormat, "inconsistent kNN model");
  }
  return m;
}

json tree_json(const TreeModel& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back({{"feature", n.feature_index}, {"threshold", n.threshold}, {"left", n.left},
                     {"right", n.right}, {"label", n.label}});
  }
  return {{"positive_class", m.positive_class}, {"dimension", m.dimension},
          {"max_depth", m.max_depth}, {"nodes", std::move(nodes)}};
}

TreeModel tree_from(const json& j) {
  TreeModel m;
  m.positive_class = j.at("positive_class").get<std::string>();
  m.dimension = j.at("dimension").get<std::size_t>();
  m.max_depth = j.at("max_depth").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    m.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                       n.at("left").get<std::int32_t>(), n.at("right").get<std::int32_t>(),
                       n.at("label").get<int>()});
  }
  const auto count = static_cast<std::int32_t>(m.nodes.size());
  if (count == 0) throw Error(ErrorKind::BadFormat, "tree has no nodes");
  for (std::int32_t id = 0; id < count; ++id) {
    const auto& n = m.nodes[static_cast<std::size_t>(id)];
    if (n.feature_index < 0) continue;
    // children always follow their parent in pre-order, which rules out cycles
    if (n.left <= id || n.right <= id || n.left >= count || n.right >= count ||
        static_cast<std::size_t>(n.feature_index) >= m.dimension) {
      throw Error(ErrorKind::BadFormat, "malformed tree node");
    }
  }
  return m;
}

}  // namespace

std::string model_to_json(const TrainedModel& trained) {
  json body;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BoostedModel>) body = boosted_json(m);
        else if constexpr (std::is_same_v<T, KnnModel>) body = knn_json(m);
        else if constexpr (std::is_same_v<T, TreeModel>) body = tree_json(m);
        else body = {{"boosted", boosted_json(m.boosted)}, {"knn", knn_json(m.knn)}, {"tree", tree_json(m.tree)}};
      },
      trained.model);
  const json doc = {
      {"schema", kModelSchemaVersion},
      {"classifier", to_string(kind_of(trained.model))},
      {"positive_class", positive_class_of(trained.model)},
      {"feature_variant", variant_to_int(trained.variant)},
      {"model", std::move(body)},
  };
  return doc.dump(1) + '\n';
}

TrainedModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadFormat, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kModelSchemaVersion) {
      throw Error(ErrorKind::BadFormat, "unsupported model schema " + doc.at("schema").dump());
    }
    const auto kind = classifier_from_string(doc.at("classifier").get<std::string>());
    if (!kind) throw Error(ErrorKind::BadFormat, "unknown classifier " + doc.at("classifier").dump());
    const auto variant = variant_from_int(doc.at("feature_variant").get<int>());
    if (!variant) throw Error(ErrorKind::BadFormat, "unknown feature variant");

    TrainedModel trained;
    trained.variant = *variant;
    const json& body = doc.at("model");
    switch (*kind) {
      case ClassifierKind::Boosted: trained.model = boosted_from(body); break;
      case ClassifierKind::Knn: trained.model = knn_from(body); break;
      case ClassifierKind::Tree: trained.model = tree_from(body); break;
      case ClassifierKind::Vote:
        trained.model = VoteModel{boosted_from(body.at("boosted")), knn_from(body.at("knn")),
                                  tree_from(body.at("tree"))};
        break;
    }
    if (dimension_of(trained.model) != variant_dimension(trained.variant)) {
      throw Error(ErrorKind::DimensionMismatch, "model dimension does not match its feature variant");
    }
    return trained;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadFormat, std::string("malformed model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out << model_to_json(model);
  if (!out) throw Error(ErrorKind::IoFailure, "write error on " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace iotfp::ml
