#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "iotfp/error.hpp"
#include "iotfp/eval.hpp"
#include "iotfp/synth.hpp"

using namespace iotfp;
using namespace iotfp::eval;

namespace {

template <typename F>
ErrorKind failure_kind(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an iotfp::Error");
  return ErrorKind::InvalidArgument;
}

BehavioralProfile fake_profile(const std::string& device, const std::string& category, const std::string& instance,
                               std::size_t n, double marker) {
  BehavioralProfile p;
  p.device_label = device;
  p.category_label = category;
  p.instance_label = instance;
  for (std::size_t i = 0; i < n; ++i) {
    Fingerprint fp;
    fp.label = device;
    fp.values.fill(marker);
    fp.values[0] = static_cast<double>(i);
    p.fingerprints.push_back(fp);
  }
  return p;
}

// Small corpus shared by the end-to-end cases.
const std::vector<BehavioralProfile>& small_corpus() {
  static const auto profiles = [] {
    const auto corpus = synth::standard_corpus(3, 600);
    return synth::corpus_profiles(corpus);
  }();
  return profiles;
}

}  // namespace

TEST_CASE("confusion counts and metrics") {
  ConfusionCounts c;
  c.record(1, 1);
  c.record(1, -1);
  c.record(-1, -1);
  c.record(-1, -1);
  c.record(-1, 1);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 1);
  const auto m = metrics(c);
  CHECK(m.tpr == 0.5);
  CHECK(m.accuracy == 0.6);
  CHECK(m.tnr == doctest::Approx(2.0 / 3.0));
  CHECK(m.ppv == 0.5);
  CHECK_FALSE(m.tpr_degenerate);

  ConfusionCounts negatives_only;
  negatives_only.record(-1, -1);
  const auto d = metrics(negatives_only);
  CHECK(d.tpr == 0.0);
  CHECK(d.tpr_degenerate);
  CHECK(d.ppv_degenerate);
  CHECK_FALSE(d.tnr_degenerate);
  CHECK(metrics(ConfusionCounts{}).accuracy_degenerate);
}

TEST_CASE("levels") {
  CHECK(level_from_string("category") == Level::Category);
  CHECK_FALSE(level_from_string("room"));
  CHECK(to_string(Level::Instance) == "instance");
}

TEST_CASE("one-vs-all assembly") {
  const std::vector<BehavioralProfile> profiles{
      fake_profile("bulb", "Light", "bulb-1", 10, 1.0), fake_profile("lamp", "Light", "lamp", 7, 2.0),
      fake_profile("cam", "Camera", "cam", 5, 3.0)};
  const auto device = assemble_one_vs_all(profiles, "lamp", Level::Device);
  CHECK(device.size() == 22);
  CHECK(device.positives() == 7);
  CHECK(device.dimension() == 100);
  CHECK(device.positive_class == "lamp");

  const auto category = assemble_one_vs_all(profiles, "Light", Level::Category, FeatureVariant::PayloadOnly);
  CHECK(category.positives() == 17);
  CHECK(category.dimension() == 15);

  CHECK(failure_kind([&] { assemble_one_vs_all(profiles, "fridge", Level::Device); }) == ErrorKind::UnknownLabel);
  const std::vector<BehavioralProfile> lights{profiles[0], profiles[1]};
  CHECK(failure_kind([&] { assemble_one_vs_all(lights, "Light", Level::Category); }) == ErrorKind::NoNegatives);
}

TEST_CASE("stratified folds partition every class evenly") {
  const std::vector<BehavioralProfile> profiles{fake_profile("a", "A", "a", 23, 1.0),
                                                fake_profile("b", "B", "b", 51, 2.0)};
  const auto data = assemble_one_vs_all(profiles, "a", Level::Device);
  const auto plan = stratified_folds(data, 5, 42);
  REQUIRE(plan.assignments.size() == data.size());

  std::vector<std::size_t> seen;
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    const auto train = plan.train_indices(f);
    CHECK(test.size() + train.size() == data.size());
    std::size_t pos = 0;
    for (auto i : test) pos += data.labels[i] == 1;
    // 23 positives over 5 folds: 4 or 5 each; 51 negatives: 10 or 11 each
    CHECK((pos == 4 || pos == 5));
    CHECK((test.size() - pos == 10 || test.size() - pos == 11));
    for (auto i : test) seen.push_back(i);
  }
  std::sort(seen.begin(), seen.end());
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK(seen == all);

  CHECK(stratified_folds(data, 5, 42).assignments == plan.assignments);
  CHECK(stratified_folds(data, 5, 43).assignments != plan.assignments);
  CHECK(failure_kind([&] { stratified_folds(data, 1, 1); }) == ErrorKind::InvalidArgument);
  CHECK(failure_kind([&] { stratified_folds(data, 24, 1); }) == ErrorKind::ClassTooSmall);
}

TEST_CASE("seeded shuffle is a deterministic permutation") {
  std::vector<std::size_t> a(100);
  std::iota(a.begin(), a.end(), std::size_t{0});
  std::vector<std::size_t> b(a);
  seeded_shuffle(a, 9);
  seeded_shuffle(b, 9);
  CHECK(a == b);
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 100);
  std::vector<std::size_t> sorted(100);
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  CHECK(a != sorted);
}

TEST_CASE("device, category and instance experiments on synthetic traffic") {
  const auto& profiles = small_corpus();
  REQUIRE(profiles.size() == 7);

  ExperimentConfig config;
  config.positives = {"outlet", "hub-conduit"};
  const auto device = run_experiment(profiles, config);
  REQUIRE(device.rows.size() == 2);
  for (const auto& row : device.rows) {
    CAPTURE(row.label);
    CHECK(row.folds.size() == 5);
    CHECK(row.positives == 120);
    CHECK(row.mean_tpr >= 0.9);
  }
  CHECK(device.find("outlet") != nullptr);
  CHECK(device.find("speaker") == nullptr);

  config.level = Level::Category;
  config.positives = {"Light"};
  config.classifier = ml::ClassifierKind::Tree;
  const auto category = run_experiment(profiles, config);
  REQUIRE(category.rows.size() == 1);
  CHECK(category.rows[0].positives == 240);

  config.level = Level::Instance;
  config.positives = {};
  config.classifier = ml::ClassifierKind::Boosted;
  const auto instance = run_experiment(profiles, config);
  REQUIRE(instance.rows.size() == 2);  // a->b and b->a
  CHECK(instance.rows[0].trained_on != instance.rows[0].tested_on);
  CHECK(instance.rows[0].folds.size() == 1);

  const auto doc = nlohmann::json::parse(report_to_json(device));
  CHECK(doc["schema"] == "iotfp-report/1");
  CHECK(doc["rows"].size() == 2);
  CHECK(report_summary(device).rfind("# iotfp-report/1", 0) == 0);
}

TEST_CASE("reports are reproducible") {
  const auto& profiles = small_corpus();
  ExperimentConfig config;
  config.classifier = ml::ClassifierKind::Knn;
  config.positives = {"speaker"};
  CHECK(report_to_json(run_experiment(profiles, config)) == report_to_json(run_experiment(profiles, config)));
}

TEST_CASE("experiment configuration errors") {
  const auto& profiles = small_corpus();
  ExperimentConfig config;
  config.positives = {"toaster"};
  CHECK(failure_kind([&] { run_experiment(profiles, config); }) == ErrorKind::UnknownLabel);
  config.positives = {};
  config.folds = 1;
  CHECK(failure_kind([&] { run_experiment(profiles, config); }) == ErrorKind::InvalidArgument);
}
