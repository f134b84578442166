#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iotfp/fingerprint.hpp"
#include "iotfp/ml.hpp"

namespace iotfp::eval {

inline constexpr std::string_view kReportSchemaVersion = "iotfp-report/1";

enum class Level : std::uint8_t { Device, Category, Instance };

std::string_view to_string(Level level);
std::optional<Level> level_from_string(std::string_view name);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void record(int truth, int predicted);
};

// A rate whose denominator is zero is reported as 0 with its flag set.
struct Metrics {
  double tpr = 0.0;
  double accuracy = 0.0;
  double tnr = 0.0;
  double ppv = 0.0;
  bool tpr_degenerate = false;
  bool accuracy_degenerate = false;
  bool tnr_degenerate = false;
  bool ppv_degenerate = false;
};

Metrics metrics(const ConfusionCounts& counts);

// The grouping key a profile contributes under `level`.
const std::string& label_at(const BehavioralProfile& profile, Level level);

// Positive rows come from every profile whose key equals `positive`; all other
// profiles supply -1 rows. Throws Error{UnknownLabel} / Error{NoNegatives}.
ml::LabeledDataset assemble_one_vs_all(std::span<const BehavioralProfile> profiles,
                                       std::string_view positive, Level level,
                                       FeatureVariant variant = FeatureVariant::All);

struct FoldPlan {
  std::size_t k = 5;
  std::vector<std::size_t> assignments;  // fold index per instance

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Each class is shuffled with a seeded generator and dealt round-robin into k
// folds. Throws Error{ClassTooSmall} when a class has fewer than k members.
FoldPlan stratified_folds(const ml::LabeledDataset& data, std::size_t k, std::uint64_t seed);

struct ExperimentConfig {
  Level level = Level::Device;
  ml::ClassifierKind classifier = ml::ClassifierKind::Boosted;
  FeatureVariant variant = FeatureVariant::All;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  ml::ClassifierParams params;
  // Restrict to these positive labels; empty means every label at the level.
  std::vector<std::string> positives;
};

struct FoldResult {
  ConfusionCounts counts;
  Metrics metrics;
};

struct ReportRow {
  std::string label;
  // Instance level only: which physical units were trained on and tested on.
  std::string trained_on;
  std::string tested_on;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<FoldResult> folds;
  double mean_tpr = 0.0;
  double mean_accuracy = 0.0;
  double mean_tnr = 0.0;
  double mean_ppv = 0.0;
  bool degenerate = false;
};

struct EvaluationReport {
  Level level = Level::Device;
  ml::ClassifierKind classifier = ml::ClassifierKind::Boosted;
  FeatureVariant variant = FeatureVariant::All;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::vector<ReportRow> rows;

  const ReportRow* find(std::string_view label) const;
};

// Device and category levels: k-fold cross-validation per positive label.
// Instance level: for every device type with two or more physical units, train
// on one unit and test on each other unit's full profile; the other device
// types' fingerprints are split in half (seeded) into training and held-out
// negatives.
EvaluationReport run_experiment(std::span<const BehavioralProfile> profiles, const ExperimentConfig& config);

std::string report_to_json(const EvaluationReport& report);
std::string report_summary(const EvaluationReport& report);

// Deterministic Fisher-Yates on a 64-bit Mersenne Twister, independent of the
// standard library's distribution implementations.
void seeded_shuffle(std::span<std::size_t> items, std::uint64_t seed);

}  // namespace iotfp::eval
