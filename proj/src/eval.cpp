#include "iotfp/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iotfp/error.hpp"

namespace iotfp::eval {

using nlohmann::json;

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Device: return "device";
    case Level::Category: return "category";
    case Level::Instance: return "instance";
  }
  return "device";
}

std::optional<Level> level_from_string(std::string_view name) {
  if (name == "device") return Level::Device;
  if (name == "category") return Level::Category;
  if (name == "instance") return Level::Instance;
  return std::nullopt;
}

void ConfusionCounts::record(int truth, int predicted) {
  if (truth == 1) {
    ++(predicted == 1 ? tp : fn);
  } else {
    ++(predicted == 1 ? fp : tn);
  }
}

Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  const auto rate = [](std::size_t num, std::size_t den, bool& degenerate) {
    if (den == 0) {
      degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.tpr = rate(c.tp, c.tp + c.fn, m.tpr_degenerate);
  m.accuracy = rate(c.tp + c.tn, c.total(), m.accuracy_degenerate);
  m.tnr = rate(c.tn, c.tn + c.fp, m.tnr_degenerate);
  m.ppv = rate(c.tp, c.tp + c.fp, m.ppv_degenerate);
  return m;
}

const std::string& label_at(const BehavioralProfile& profile, Level level) {
  switch (level) {
    case Level::Device: return profile.device_label;
    case Level::Category: return profile.category_label;
    case Level::Instance: return profile.instance_label;
  }
  return profile.device_label;
}

namespace {

void append_profile(ml::LabeledDataset& data, const BehavioralProfile& profile, int label,
                    FeatureVariant variant) {
  for (const auto& fp : profile.fingerprints) {
    data.rows.append_row(project(fp, variant));
    data.labels.push_back(label);
  }
}

std::vector<std::string> labels_at(std::span<const BehavioralProfile> profiles, Level level) {
  std::set<std::string> labels;
  for (const auto& p : profiles) labels.insert(label_at(p, level));
  return {labels.begin(), labels.end()};
}

double mean(const std::vector<FoldResult>& folds, double Metrics::*field) {
  if (folds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : folds) sum += f.metrics.*field;
  return sum / static_cast<double>(folds.size());
}

void summarize(ReportRow& row) {
  row.mean_tpr = mean(row.folds, &Metrics::tpr);
  row.mean_accuracy = mean(row.folds, &Metrics::accuracy);
  row.mean_tnr = mean(row.folds, &Metrics::tnr);
  row.mean_ppv = mean(row.folds, &Metrics::ppv);
  row.degenerate = std::any_of(row.folds.begin(), row.folds.end(), [](const FoldResult& f) {
    return f.metrics.tpr_degenerate || f.metrics.accuracy_degenerate || f.metrics.tnr_degenerate ||
           f.metrics.ppv_degenerate;
  });
}

FoldResult score(const ml::AnyModel& model, const ml::LabeledDataset& test) {
  FoldResult result;
  for (std::size_t i = 0; i < test.size(); ++i) {
    result.counts.record(test.labels[i], ml::predict(model, test.rows.row(i)).label);
  }
  result.metrics = metrics(result.counts);
  return result;
}

ReportRow cross_validate(std::span<const BehavioralProfile> profiles, const std::string& positive,
                         const ExperimentConfig& config) {
  const auto data = assemble_one_vs_all(profiles, positive, config.level, config.variant);
  const auto plan = stratified_folds(data, config.folds, config.seed);

  ReportRow row;
  row.label = positive;
  row.positives = data.positives();
  row.negatives = data.size() - row.positives;
  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const auto train_idx = plan.train_indices(fold);
    const auto test_idx = plan.test_indices(fold);
    const auto model = ml::train(config.classifier, data.subset(train_idx), config.params);
    row.folds.push_back(score(model, data.subset(test_idx)));
  }
  summarize(row);
  return row;
}

std::vector<ReportRow> cross_instance(std::span<const BehavioralProfile> profiles,
                                      const ExperimentConfig& config) {
  std::vector<ReportRow> rows;
  for (const auto& device : labels_at(profiles, Level::Device)) {
    std::map<std::string, std::vector<const BehavioralProfile*>> units;
    for (const auto& p : profiles) {
      if (p.device_label == device) units[p.instance_label].push_back(&p);
    }
    if (units.size() < 2) continue;

    // Negatives: every other device type, halved into train / held-out.
    ml::LabeledDataset negatives;
    negatives.positive_class = device;
    for (const auto& p : profiles) {
      if (p.device_label != device) append_profile(negatives, p, -1, config.variant);
    }
    if (negatives.size() < 2) {
      throw Error(ErrorKind::NoNegatives, "no other device types to contrast '" + device + "' against");
    }
    std::vector<std::size_t> order(negatives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, config.seed);
    const std::size_t half = order.size() / 2;
    const std::vector<std::size_t> neg_train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<std::size_t> neg_test(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());

    for (const auto& [train_unit, train_profiles] : units) {
      ml::LabeledDataset train_set;
      train_set.positive_class = device;
      for (const auto* p : train_profiles) append_profile(train_set, *p, 1, config.variant);
      const auto held = negatives.subset(neg_train);
      for (std::size_t i = 0; i < held.size(); ++i) {
        train_set.rows.append_row(held.rows.row(i));
        train_set.labels.push_back(-1);
      }
      const auto model = ml::train(config.classifier, train_set, config.params);

      for (const auto& [test_unit, test_profiles] : units) {
        if (test_unit == train_unit) continue;
        ml::LabeledDataset test_set;
        test_set.positive_class = device;
        for (const auto* p : test_profiles) append_profile(test_set, *p, 1, config.variant);
        const std::size_t test_positives = test_set.size();
        const auto held_out = negatives.subset(neg_test);
        for (std::size_t i = 0; i < held_out.size(); ++i) {
          test_set.rows.append_row(held_out.rows.row(i));
          test_set.labels.push_back(-1);
        }
        ReportRow row;
        row.label = device;
        row.trained_on = train_unit;
        row.tested_on = test_unit;
        row.positives = test_positives;
        row.negatives = held_out.size();
        row.folds.push_back(score(model, test_set));
        summarize(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string fixed(double v, int precision) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

ml::LabeledDataset assemble_one_vs_all(std::span<const BehavioralProfile> profiles,
                                       std::string_view positive, Level level, FeatureVariant variant) {
  ml::LabeledDataset data;
  data.positive_class = std::string(positive);
  data.rows = ml::Matrix(0, variant_dimension(variant));
  bool found = false;
  bool other = false;
  for (const auto& p : profiles) {
    const bool is_positive = label_at(p, level) == positive;
    found = found || is_positive;
    other = other || !is_positive;
  }
  if (!found) throw Error(ErrorKind::UnknownLabel, "no profile labeled '" + std::string(positive) + "'");
  if (!other) throw Error(ErrorKind::NoNegatives, "no profiles other than '" + std::string(positive) + "'");
  for (const auto& p : profiles) {
    append_profile(data, p, label_at(p, level) == positive ? 1 : -1, variant);
  }
  return data;
}

void seeded_shuffle(std::span<std::size_t> items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    // unbiased draw in [0, i)
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(items[i - 1], items[static_cast<std::size_t>(r % bound)]);
  }
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(const ml::LabeledDataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "cross-validation needs at least 2 folds");
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(data.size(), 0);

  for (int cls : {1, -1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == cls) members.push_back(i);
    }
    if (members.size() < k) {
      throw Error(ErrorKind::ClassTooSmall, "class " + std::to_string(cls) + " of '" + data.positive_class +
                                                "' has " + std::to_string(members.size()) +
                                                " instances, fewer than " + std::to_string(k) + " folds");
    }
    // distinct stream per class so both classes are not shuffled identically
    seeded_shuffle(members, seed ^ (cls == 1 ? 0x9E3779B97F4A7C15ull : 0ull));
    for (std::size_t t = 0; t < members.size(); ++t) plan.assignments[members[t]] = t % k;
  }
  return plan;
}

const ReportRow* EvaluationReport::find(std::string_view label) const {
  for (const auto& row : rows) {
    if (row.label == label) return &row;
  }
  return nullptr;
}

EvaluationReport run_experiment(std::span<const BehavioralProfile> profiles, const ExperimentConfig& config) {
  if (profiles.empty()) throw Error(ErrorKind::EmptyData, "no profiles to evaluate");
  EvaluationReport report;
  report.level = config.level;
  report.classifier = config.classifier;
  report.variant = config.variant;
  report.folds = config.level == Level::Instance ? 1 : config.folds;
  report.seed = config.seed;

  if (config.level == Level::Instance) {
    report.rows = cross_instance(profiles, config);
    if (!config.positives.empty()) {
      std::erase_if(report.rows, [&](const ReportRow& r) {
        return std::find(config.positives.begin(), config.positives.end(), r.label) == config.positives.end();
      });
    }
    if (report.rows.empty()) {
      throw Error(ErrorKind::InsufficientTraffic,
                  "instance level needs a device type with at least two physical units");
    }
    return report;
  }

  const auto positives = config.positives.empty() ? labels_at(profiles, config.level) : config.positives;
  for (const auto& label : positives) report.rows.push_back(cross_validate(profiles, label, config));
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json fold_tpr = json::array();
    json fold_acc = json::array();
    json fold_tnr = json::array();
    json fold_ppv = json::array();
    json counts = json::array();
    for (const auto& f : r.folds) {
      fold_tpr.push_back(f.metrics.tpr);
      fold_acc.push_back(f.metrics.accuracy);
      fold_tnr.push_back(f.metrics.tnr);
      fold_ppv.push_back(f.metrics.ppv);
      counts.push_back({{"tp", f.counts.tp}, {"fp", f.counts.fp}, {"tn", f.counts.tn}, {"fn", f.counts.fn}});
    }
    json row = {
        {"label", r.label},
        {"classifier", ml::to_string(report.classifier)},
        {"variant", variant_to_int(report.variant)},
        {"positives", r.positives},
        {"negatives", r.negatives},
        {"mean_tpr", r.mean_tpr},
        {"mean_accuracy", r.mean_accuracy},
        {"mean_tnr", r.mean_tnr},
        {"mean_ppv", r.mean_ppv},
        {"degenerate", r.degenerate},
        {"fold_tpr", std::move(fold_tpr)},
        {"fold_accuracy", std::move(fold_acc)},
        {"fold_tnr", std::move(fold_tnr)},
        {"fold_ppv", std::move(fold_ppv)},
        {"fold_counts", std::move(counts)},
    };
    if (report.level == Level::Instance) {
      row["trained_on"] = r.trained_on;
      row["tested_on"] = r.tested_on;
    }
    rows.push_back(std::move(row));
  }
  const json doc = {
      {"schema", kReportSchemaVersion},
      {"level", to_string(report.level)},
      {"classifier", ml::to_string(report.classifier)},
      {"variant", variant_to_int(report.variant)},
      {"folds", report.folds},
      {"seed", report.seed},
      {"rows", std::move(rows)},
  };
  return doc.dump(1) + '\n';
}

std::string report_summary(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# " << kReportSchemaVersion << " level=" << to_string(report.level)
      << " classifier=" << ml::to_string(report.classifier) << " variant=" << variant_to_int(report.variant)
      << " folds=" << report.folds << " seed=" << report.seed << '\n';

  std::size_t width = 5;
  for (const auto& r : report.rows) {
    std::size_t w = r.label.size();
    if (report.level == Level::Instance) w += r.trained_on.size() + r.tested_on.size() + 5;
    width = std::max(width, w);
  }
  const auto pad = [&](std::string s) {
    s.resize(width + 2, ' ');
    return s;
  };
  out << pad("label") << "mean_tpr  mean_acc  mean_tnr  mean_ppv  positives  negatives\n";
  for (const auto& r : report.rows) {
    std::string name = r.label;
    if (report.level == Level::Instance) name += " (" + r.trained_on + "->" + r.tested_on + ")";
    out << pad(name) << fixed(r.mean_tpr, 4) << "    " << fixed(r.mean_accuracy, 4) << "    "
        << fixed(r.mean_tnr, 4) << "    " << fixed(r.mean_ppv, 4) << "    " << r.positives << "  "
        << r.negatives << (r.degenerate ? "  [degenerate]" : "") << '\n';
  }
  return out.str();
}

}  // namespace iotfp::eval
