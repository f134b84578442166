#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iotfp/features.hpp"
#include "iotfp/pcap.hpp"

namespace iotfp {

inline constexpr std::size_t kPacketsPerFingerprint = 5;
inline constexpr std::size_t kFingerprintDimension = kPacketsPerFingerprint * kPacketFeatureCount;
inline constexpr std::string_view kProfileSchemaVersion = "iotfp-profile/1";

struct Fingerprint {
  std::array<double, kFingerprintDimension> values{};
  std::string label;
};

// Column subsets of a fingerprint, applied positionally to each of its five
// 20-feature segments.
enum class FeatureVariant : std::uint8_t {
  All = 20,        // every feature
  NoEntropy = 19,  // entropy dropped
  PayloadOnly = 3, // entropy, TCP payload length, TCP window size
};

std::size_t variant_dimension(FeatureVariant variant);
const std::vector<std::size_t>& variant_columns(FeatureVariant variant);
std::vector<double> project(const Fingerprint& fp, FeatureVariant variant);
// Accepts 20, 19 or 3.
std::optional<FeatureVariant> variant_from_int(int n);
int variant_to_int(FeatureVariant variant);

// Non-overlapping groups of five consecutive packets; a trailing remainder of
// fewer than five packets is dropped.
std::vector<Fingerprint> build_fingerprints(std::span<const PacketFeatures> features,
                                            std::string_view label);

struct BehavioralProfile {
  std::string device_label;
  std::string category_label;
  // Distinguishes physical units of the same device type; defaults to the
  // device label when only one unit exists.
  std::string instance_label;
  std::vector<Fingerprint> fingerprints;
  std::vector<std::string> source_captures;
  std::string feature_schema{kFeatureSchemaVersion};
};

BehavioralProfile build_profile(const std::filesystem::path& capture, const DeviceSelector& selector,
                                std::string device_label, std::string category_label,
                                std::string instance_label = {});

// Same pipeline on frames already in memory; `source` is recorded as provenance.
BehavioralProfile build_profile_from_frames(std::span<const RawFrame> frames,
                                            const DeviceSelector& selector, std::string device_label,
                                            std::string category_label, std::string instance_label,
                                            std::string source);

void save_profile(const std::filesystem::path& path, const BehavioralProfile& profile);
BehavioralProfile load_profile(const std::filesystem::path& path);
std::string profile_to_json(const BehavioralProfile& profile);
BehavioralProfile profile_from_json(std::string_view text);

// Sessions are keyed by the unordered port pair (low, high).
using PortPair = std::pair<std::uint16_t, std::uint16_t>;

struct SessionStats {
  std::map<PortPair, std::size_t> session_packets;
  std::size_t total_session_packets = 0;
  std::size_t session_count = 0;
  double avg_packets_per_session = 0.0;
};

SessionStats session_stats(std::span<const ParsedPacket> packets);

// total / sessions, or 0 when there are no sessions.
double average_packets_per_session(std::size_t total_packets, std::size_t sessions);

// Two-decimal display in the style of a printed table: truncated, not rounded
// (739/84 = 8.7976 displays as "8.79").
std::string format_packets_per_session(double average);

}  // namespace iotfp
