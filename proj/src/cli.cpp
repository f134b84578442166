#include "iotfp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "iotfp/error.hpp"
#include "iotfp/eval.hpp"
#include "iotfp/features.hpp"
#include "iotfp/fingerprint.hpp"
#include "iotfp/ml.hpp"
#include "iotfp/pcap.hpp"
#include "iotfp/synth.hpp"

namespace iotfp::cli {

namespace {

constexpr std::string_view kSessionsSchema = "iotfp-sessions/1";
constexpr std::string_view kEcdfSchema = "iotfp-ecdf/1";
constexpr std::string_view kIdentifySchema = "iotfp-identify/1";

// Raised for invalid flag combinations discovered after CLI11 parsing.
struct ConfigError {
  std::string message;
};

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

struct SelectorFlags {
  std::string mac;
  std::string ip;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mac", mac, "Device MAC address (aa:bb:cc:dd:ee:ff)");
    cmd->add_option("--ip", ip, "Device IP address (IPv4 or IPv6)");
  }

  std::optional<DeviceSelector> parse() const {
    if (mac.empty() && ip.empty()) return std::nullopt;
    DeviceSelector sel;
    if (!mac.empty()) {
      sel.mac = parse_mac(mac);
      if (!sel.mac) throw ConfigError{"invalid --mac '" + mac + "'"};
    }
    if (!ip.empty()) {
      sel.ip = parse_ip(ip);
      if (!sel.ip) throw ConfigError{"invalid --ip '" + ip + "'"};
    }
    return sel;
  }

  DeviceSelector require() const {
    auto sel = parse();
    if (!sel) throw ConfigError{"a device selector is required (--mac and/or --ip)"};
    return *sel;
  }
};

FeatureVariant parse_variant(int n) {
  const auto v = variant_from_int(n);
  if (!v) throw ConfigError{"--variant must be 20, 19 or 3"};
  return *v;
}

ml::ClassifierKind parse_classifier(const std::string& name) {
  const auto k = ml::classifier_from_string(name);
  if (!k) throw ConfigError{"--classifier must be boosted, knn, tree or vote"};
  return *k;
}

eval::Level parse_level(const std::string& name) {
  const auto l = eval::level_from_string(name);
  if (!l) throw ConfigError{"--level must be device, category or instance"};
  return *l;
}

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::trunc | std::ios::binary);
  if (!file) throw Error(ErrorKind::IoFailure, "cannot open " + path + " for writing");
  file << text;
  if (!file) throw Error(ErrorKind::IoFailure, "write error on " + path);
}

std::vector<ParsedPacket> load_packets(const std::string& pcap, const std::optional<DeviceSelector>& sel) {
  const auto capture = read_capture(pcap);
  auto parsed = parse_frames(capture.frames);
  if (!sel) return std::move(parsed.packets);
  return filter_device(parsed.packets, *sel);
}

std::vector<BehavioralProfile> load_profiles(const std::vector<std::string>& paths) {
  std::vector<BehavioralProfile> profiles;
  for (const auto& p : paths) profiles.push_back(load_profile(p));
  return profiles;
}

// ---------------------------------------------------------------------------

struct ExtractCmd {
  std::string pcap;
  SelectorFlags selector;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("extract", "Write the per-packet feature vectors of one device as CSV");
    cmd->add_option("--pcap", pcap, "Input capture")->required();
    selector.attach(cmd);
    cmd->add_option("--out", out, "Output CSV (stdout when omitted)");
  }

  void run(std::ostream& stdout_) const {
    const auto sel = selector.require();
    const auto packets = load_packets(pcap, sel);
    std::ostringstream csv;
    write_feature_csv(csv, extract_all(packets));
    emit(out, csv.str(), stdout_);
  }
};

struct ProfileCmd {
  std::string pcap;
  SelectorFlags selector;
  std::string label;
  std::string category;
  std::string instance;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("profile", "Build and save the behavioral profile of one device");
    cmd->add_option("--pcap", pcap, "Input capture")->required();
    selector.attach(cmd);
    cmd->add_option("--label", label, "Device type label")->required();
    cmd->add_option("--category", category, "Device category label")->required();
    cmd->add_option("--instance", instance, "Physical unit label (defaults to --label)");
    cmd->add_option("--out", out, "Output profile document")->required();
  }

  void run(std::ostream& stdout_) const {
    const auto sel = selector.require();
    const auto profile = build_profile(pcap, sel, label, category, instance);
    save_profile(out, profile);
    stdout_ << "profile " << profile.device_label << ": " << profile.fingerprints.size()
            << " fingerprints -> " << out << '\n';
  }
};

struct SessionsCmd {
  std::string pcap;
  SelectorFlags selector;
  std::string label;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("sessions", "Print packets-per-session statistics");
    cmd->add_option("--pcap", pcap, "Input capture")->required();
    selector.attach(cmd);
    cmd->add_option("--label", label, "Device name for the table row (defaults to the capture name)");
  }

  void run(std::ostream& stdout_) const {
    const auto packets = load_packets(pcap, selector.parse());
    const auto stats = session_stats(packets);
    const std::string name = label.empty() ? std::filesystem::path(pcap).filename().string() : label;
    stdout_ << "# " << kSessionsSchema << '\n'
            << "Device\tTotal Sessions' Packets\tSessions\tPackets/Session\n"
            << name << '\t' << stats.total_session_packets << '\t' << stats.session_count << '\t'
            << format_packets_per_session(stats.avg_packets_per_session) << '\n';
  }
};

struct EcdfCmd {
  std::string feature;
  std::vector<std::string> pcaps;
  SelectorFlags selector;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("ecdf", "ECDF tables of a payload feature, one per capture");
    cmd->add_option("--feature", feature, "entropy, length or window")
        ->required()
        ->check(CLI::IsMember({"entropy", "length", "window"}));
    cmd->add_option("--pcap", pcaps, "Input capture (repeatable, one per device)")->required();
    selector.attach(cmd);
    cmd->add_option("--out", out, "Output CSV (stdout when omitted)");
  }

  void run(std::ostream& stdout_) const {
    const auto sel = selector.parse();
    std::ostringstream text;
    text << "# " << kEcdfSchema << " feature=" << feature << '\n' << "source,value,probability\n";
    for (const auto& pcap : pcaps) {
      const auto features = extract_all(load_packets(pcap, sel));
      std::vector<double> values;
      for (const auto& f : features) {
        if (feature == "entropy") {
          values.push_back(f.entropy);
        } else if (f.flag(HeaderFlag::TCP)) {
          // length and window only exist for TCP packets
          values.push_back(feature == "length" ? f.tcp_payload_length : f.tcp_window_size);
        }
      }
      if (values.empty()) {
        throw Error(ErrorKind::InsufficientTraffic, "no packets with a " + feature + " value in " + pcap);
      }
      const std::string name = std::filesystem::path(pcap).filename().string();
      for (const auto& point : ecdf(values)) {
        text << name << ',' << shortest(point.value) << ',' << shortest(point.probability) << '\n';
      }
    }
    emit(out, text.str(), stdout_);
  }
};

struct TrainCmd {
  std::vector<std::string> profiles;
  std::string positive;
  std::string level = "device";
  std::string classifier = "boosted";
  int variant = 20;
  std::size_t knn_k = 5;
  std::size_t max_depth = ml::kDefaultTreeDepth;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train a one-vs-all classifier and save it");
    cmd->add_option("--profile", profiles, "Profile document (repeatable)")->required();
    cmd->add_option("--label,--positive", positive, "Positive class label")->required();
    cmd->add_option("--level", level, "device or category")->capture_default_str();
    cmd->add_option("--classifier", classifier, "boosted, knn, tree or vote")->capture_default_str();
    cmd->add_option("--variant", variant, "Feature set: 20, 19 or 3")->capture_default_str();
    cmd->add_option("--k", knn_k, "Neighbours for knn / vote")->capture_default_str();
    cmd->add_option("--max-depth", max_depth, "Depth limit for tree / vote")->capture_default_str();
    cmd->add_option("--out", out, "Output model document")->required();
  }

  void run(std::ostream& stdout_) const {
    const auto lvl = parse_level(level);
    if (lvl == eval::Level::Instance) throw ConfigError{"train supports --level device or category"};
    const auto kind = parse_classifier(classifier);
    const auto var = parse_variant(variant);
    const auto loaded = load_profiles(profiles);
    const auto data = eval::assemble_one_vs_all(loaded, positive, lvl, var);

    ml::ClassifierParams params;
    params.knn_k = knn_k;
    params.tree_max_depth = max_depth;
    ml::TrainedModel trained{ml::train(kind, data, params), var};
    ml::save_model(out, trained);
    stdout_ << "trained " << ml::to_string(kind) << " model for '" << positive << "' on " << data.size()
            << " fingerprints (" << data.positives() << " positive) -> " << out << '\n';
  }
};

struct IdentifyCmd {
  std::vector<std::string> models;
  std::string pcap;
  SelectorFlags selector;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("identify", "Label every fingerprint of a device and report a verdict");
    cmd->add_option("--model", models, "Model document (repeatable, one per device type)")->required();
    cmd->add_option("--pcap", pcap, "Input capture")->required();
    selector.attach(cmd);
    cmd->add_option("--out", out, "Also write the result as a JSON document");
  }

  void run(std::ostream& stdout_) const {
    const auto sel = selector.require();
    std::vector<ml::TrainedModel> loaded;
    for (const auto& m : models) loaded.push_back(ml::load_model(m));

    const auto packets = load_packets(pcap, sel);
    if (packets.size() < kPacketsPerFingerprint) {
      throw Error(ErrorKind::InsufficientTraffic, "insufficient traffic: " + std::to_string(packets.size()) +
                                                      " matching packets, need at least 5");
    }
    const auto fingerprints = build_fingerprints(extract_all(packets), "");

    std::map<std::string, std::size_t> tally;
    std::ostringstream text;
    nlohmann::json rows = nlohmann::json::array();
    text << "# " << kIdentifySchema << '\n' << "fingerprint\tpositive_classes\n";
    for (std::size_t i = 0; i < fingerprints.size(); ++i) {
      std::vector<std::string> positives;
      nlohmann::json scores = nlohmann::json::object();
      for (const auto& m : loaded) {
        const auto pred = ml::predict(m.model, project(fingerprints[i], m.variant));
        const auto& cls = ml::positive_class_of(m.model);
        scores[cls] = pred.score;
        if (pred.label == 1) positives.push_back(cls);
      }
      std::sort(positives.begin(), positives.end());
      positives.erase(std::unique(positives.begin(), positives.end()), positives.end());
      for (const auto& p : positives) ++tally[p];

      text << i << '\t';
      if (positives.empty()) text << '-';
      for (std::size_t j = 0; j < positives.size(); ++j) text << (j ? "," : "") << positives[j];
      text << '\n';
      rows.push_back({{"index", i}, {"positive_classes", positives}, {"scores", std::move(scores)}});
    }

    // Verdict: the class positive on a strict majority of fingerprints, if
    // exactly one class leads; otherwise "unknown".
    std::string verdict = "unknown";
    std::size_t best = 0;
    bool tied = false;
    for (const auto& [cls, count] : tally) {
      if (count > best) {
        best = count;
        verdict = cls;
        tied = false;
      } else if (count == best) {
        tied = true;
      }
    }
    if (tied || 2 * best <= fingerprints.size()) verdict = "unknown";

    text << "verdict\t" << verdict << '\n';
    stdout_ << text.str();
    if (!out.empty()) {
      const nlohmann::json doc = {{"schema", kIdentifySchema}, {"capture", pcap}, {"fingerprints", std::move(rows)},
                                  {"tally", tally}, {"verdict", verdict}};
      emit(out, doc.dump(1) + '\n', stdout_);
    }
  }
};

struct EvaluateCmd {
  std::vector<std::string> profiles;
  std::string level = "device";
  std::string classifier = "boosted";
  int variant = 20;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::size_t knn_k = 5;
  std::size_t max_depth = ml::kDefaultTreeDepth;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "Cross-validated one-vs-all evaluation over saved profiles");
    cmd->add_option("--profile", profiles, "Profile document (repeatable)")->required();
    cmd->add_option("--level", level, "device, category or instance")->capture_default_str();
    cmd->add_option("--classifier", classifier, "boosted, knn, tree or vote")->capture_default_str();
    cmd->add_option("--variant", variant, "Feature set: 20, 19 or 3")->capture_default_str();
    cmd->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    cmd->add_option("--seed", seed, "Fold shuffling seed")->capture_default_str();
    cmd->add_option("--k", knn_k, "Neighbours for knn / vote")->capture_default_str();
    cmd->add_option("--max-depth", max_depth, "Depth limit for tree / vote")->capture_default_str();
    cmd->add_option("--out", out, "Write the JSON report here");
  }

  void run(std::ostream& stdout_) const {
    eval::ExperimentConfig config;
    config.level = parse_level(level);
    config.classifier = parse_classifier(classifier);
    config.variant = parse_variant(variant);
    if (folds < 2) throw ConfigError{"--folds must be at least 2"};
    config.folds = folds;
    config.seed = seed;
    config.params.knn_k = knn_k;
    config.params.tree_max_depth = max_depth;

    const auto report = eval::run_experiment(load_profiles(profiles), config);
    if (!out.empty()) emit(out, eval::report_to_json(report), stdout_);
    stdout_ << eval::report_summary(report);
  }
};

struct SynthCmd {
  std::string archetype;
  bool corpus = false;
  std::size_t packets = synth::kCorpusPacketsPerTrace;
  std::uint64_t seed = 1;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "Generate labeled synthetic device captures");
    auto* arch = cmd->add_option("--archetype", archetype, "One archetype to generate");
    auto* all = cmd->add_flag("--corpus", corpus, "Generate the standard corpus");
    arch->excludes(all);
    cmd->add_option("--packets", packets, "Packets per trace")->capture_default_str();
    cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
    cmd->add_option("--out", out, "Output directory")->required();
  }

  void run(std::ostream& stdout_) const {
    if (archetype.empty() == !corpus) throw ConfigError{"synth needs exactly one of --archetype or --corpus"};
    std::vector<synth::CorpusEntry> entries;
    if (corpus) {
      entries = synth::standard_corpus(seed, packets);
    } else {
      const auto roster = synth::standard_archetypes();
      const auto it = std::find_if(roster.begin(), roster.end(), [&](const auto& a) { return a.name == archetype; });
      if (it == roster.end()) {
        std::string names;
        for (const auto& a : roster) names += (names.empty() ? "" : ", ") + a.name;
        throw ConfigError{"unknown --archetype '" + archetype + "' (choose from " + names + ")"};
      }
      entries.push_back({*it, it->name, synth::generate_trace(*it, packets, seed)});
    }
    const auto manifest = synth::write_corpus(out, entries);
    for (const auto& e : entries) {
      stdout_ << e.instance_label << "\t" << e.archetype.category << "\t" << format_mac(e.archetype.mac) << "\t"
              << e.trace.frames.size() << " packets\n";
    }
    stdout_ << "manifest " << manifest.string() << '\n';
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IoT device-type fingerprinting from packet captures", "iotfp"};
  app.require_subcommand(1, 1);

  ExtractCmd extract;
  ProfileCmd profile;
  SessionsCmd sessions;
  EcdfCmd ecdf_cmd;
  TrainCmd train;
  IdentifyCmd identify;
  EvaluateCmd evaluate;
  SynthCmd synth_cmd;
  extract.attach(app);
  profile.attach(app);
  sessions.attach(app);
  ecdf_cmd.attach(app);
  train.attach(app);
  identify.attach(app);
  evaluate.attach(app);
  synth_cmd.attach(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: kind=config " << one_line(e.what()) << '\n';
    return kConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "extract") extract.run(out);
    else if (name == "profile") profile.run(out);
    else if (name == "sessions") sessions.run(out);
    else if (name == "ecdf") ecdf_cmd.run(out);
    else if (name == "train") train.run(out);
    else if (name == "identify") identify.run(out);
    else if (name == "evaluate") evaluate.run(out);
    else if (name == "synth") synth_cmd.run(out);
  } catch (const ConfigError& e) {
    err << "error: kind=config " << one_line(e.message) << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: kind=" << to_string(e.kind()) << ' ' << one_line(e.what()) << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: kind=internal " << one_line(e.what()) << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace iotfp::cli
