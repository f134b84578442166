#include "iotfp/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iotfp/error.hpp"

namespace iotfp {

using nlohmann::json;

namespace {

std::vector<std::size_t> columns_for(FeatureVariant variant) {
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < kPacketsPerFingerprint; ++k) {
    for (std::size_t f = 0; f < kPacketFeatureCount; ++f) {
      const bool keep = variant == FeatureVariant::All ||
                        (variant == FeatureVariant::NoEntropy && f != kEntropyIndex) ||
                        (variant == FeatureVariant::PayloadOnly && f >= kHeaderFlagCount);
      if (keep) cols.push_back(k * kPacketFeatureCount + f);
    }
  }
  return cols;
}

}  // namespace

const std::vector<std::size_t>& variant_columns(FeatureVariant variant) {
  static const std::vector<std::size_t> all = columns_for(FeatureVariant::All);
  static const std::vector<std::size_t> no_entropy = columns_for(FeatureVariant::NoEntropy);
  static const std::vector<std::size_t> payload = columns_for(FeatureVariant::PayloadOnly);
  switch (variant) {
    case FeatureVariant::All: return all;
    case FeatureVariant::NoEntropy: return no_entropy;
    case FeatureVariant::PayloadOnly: return payload;
  }
  return all;
}

std::size_t variant_dimension(FeatureVariant variant) { return variant_columns(variant).size(); }

std::vector<double> project(const Fingerprint& fp, FeatureVariant variant) {
  const auto& cols = variant_columns(variant);
  std::vector<double> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) out[i] = fp.values[cols[i]];
  return out;
}

std::optional<FeatureVariant> variant_from_int(int n) {
  switch (n) {
    case 20: return FeatureVariant::All;
    case 19: return FeatureVariant::NoEntropy;
    case 3: return FeatureVariant::PayloadOnly;
    default: return std::nullopt;
  }
}

int variant_to_int(FeatureVariant variant) { return static_cast<int>(variant); }

std::vector<Fingerprint> build_fingerprints(std::span<const PacketFeatures> features,
                                            std::string_view label) {
  const std::size_t groups = features.size() / kPacketsPerFingerprint;
  std::vector<Fingerprint> out(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    auto& fp = out[g];
    fp.label = label;
    for (std::size_t k = 0; k < kPacketsPerFingerprint; ++k) {
      const auto v = features[g * kPacketsPerFingerprint + k].to_vector();
      std::copy(v.begin(), v.end(), fp.values.begin() + static_cast<std::ptrdiff_t>(k * kPacketFeatureCount));
    }
  }
  return out;
}

BehavioralProfile build_profile_from_frames(std::span<const RawFrame> frames,
                                            const DeviceSelector& selector, std::string device_label,
                                            std::string category_label, std::string instance_label,
                                            std::string source) {
  if (!selector.valid()) {
    throw Error(ErrorKind::InvalidArgument, "device selector needs a MAC or IP address");
  }
  const auto parsed = parse_frames(frames);
  const auto device_packets = filter_device(parsed.packets, selector);
  if (device_packets.size() < kPacketsPerFingerprint) {
    throw Error(ErrorKind::InsufficientTraffic,
                "insufficient traffic: " + std::to_string(device_packets.size()) +
                    " matching packets, need at least " + std::to_string(kPacketsPerFingerprint));
  }
  const auto features = extract_all(device_packets);

  BehavioralProfile profile;
  profile.fingerprints = build_fingerprints(features, device_label);
  profile.device_label = std::move(device_label);
  profile.category_label = std::move(category_label);
  profile.instance_label = instance_label.empty() ? profile.device_label : std::move(instance_label);
  profile.source_captures.push_back(std::move(source));
  return profile;
}

BehavioralProfile build_profile(const std::filesystem::path& capture, const DeviceSelector& selector,
                                std::string device_label, std::string category_label,
                                std::string instance_label) {
  const auto cap = read_capture(capture);
  return build_profile_from_frames(cap.frames, selector, std::move(device_label),
                                   std::move(category_label), std::move(instance_label),
                                   capture.filename().string());
}

std::string profile_to_json(const BehavioralProfile& profile) {
  json rows = json::array();
  for (const auto& fp : profile.fingerprints) rows.push_back(fp.values);
  const json doc = {
      {"schema", kProfileSchemaVersion},
      {"feature_schema", profile.feature_schema},
      {"device_label", profile.device_label},
      {"category_label", profile.category_label},
      {"instance_label", profile.instance_label},
      {"source_captures", profile.source_captures},
      {"dimension", kFingerprintDimension},
      {"fingerprints", std::move(rows)},
  };
  return doc.dump(1) + '\n';
}

BehavioralProfile profile_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadFormat, std::string("profile is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kProfileSchemaVersion) {
      throw Error(ErrorKind::BadFormat, "unsupported profile schema " + doc.at("schema").dump());
    }
    if (doc.at("dimension").get<std::size_t>() != kFingerprintDimension) {
      throw Error(ErrorKind::DimensionMismatch, "profile dimension must be 100");
    }
    BehavioralProfile profile;
    profile.feature_schema = doc.at("feature_schema").get<std::string>();
    if (profile.feature_schema != kFeatureSchemaVersion) {
      throw Error(ErrorKind::BadFormat, "unsupported feature schema " + profile.feature_schema);
    }
    profile.device_label = doc.at("device_label").get<std::string>();
    profile.category_label = doc.at("category_label").get<std::string>();
    profile.instance_label = doc.value("instance_label", profile.device_label);
    profile.source_captures = doc.at("source_captures").get<std::vector<std::string>>();
    for (const auto& row : doc.at("fingerprints")) {
      const auto values = row.get<std::vector<double>>();
      if (values.size() != kFingerprintDimension) {
        throw Error(ErrorKind::DimensionMismatch,
                    "fingerprint of dimension " + std::to_string(values.size()) + ", expected 100");
      }
      Fingerprint fp;
      std::copy(values.begin(), values.end(), fp.values.begin());
      fp.label = profile.device_label;
      profile.fingerprints.push_back(std::move(fp));
    }
    return profile;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadFormat, std::string("malformed profile: ") + e.what());
  }
}

void save_profile(const std::filesystem::path& path, const BehavioralProfile& profile) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out << profile_to_json(profile);
  if (!out) throw Error(ErrorKind::IoFailure, "write error on " + path.string());
}

BehavioralProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return profile_from_json(buf.str());
}

SessionStats session_stats(std::span<const ParsedPacket> packets) {
  SessionStats stats;
  for (const auto& pkt : packets) {
    if (!pkt.src_port || !pkt.dst_port) continue;
    const auto [lo, hi] = std::minmax(*pkt.src_port, *pkt.dst_port);
    ++stats.session_packets[{lo, hi}];
    ++stats.total_session_packets;
  }
  stats.session_count = stats.session_packets.size();
  stats.avg_packets_per_session = average_packets_per_session(stats.total_session_packets, stats.session_count);
  return stats;
}

double average_packets_per_session(std::size_t total_packets, std::size_t sessions) {
  if (sessions == 0) return 0.0;
  return static_cast<double>(total_packets) / static_cast<double>(sessions);
}

std::string format_packets_per_session(double average) {
  // the small bias keeps values like 9.77 (stored as 9.76999...) from dropping a cent
  const double hundredths = std::floor(average * 100.0 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", hundredths / 100.0);
  return buf;
}

}  // namespace iotfp
