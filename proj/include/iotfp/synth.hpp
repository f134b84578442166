#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iotfp/fingerprint.hpp"
#include "iotfp/packet.hpp"

namespace iotfp::synth {

inline constexpr std::string_view kLabelsSchemaVersion = "iotfp-labels/1";
inline constexpr std::string_view kCorpusSchemaVersion = "iotfp-corpus/1";

enum class TrafficKind : std::uint8_t {
  TcpHttp,
  TcpHttps,
  UdpDns,
  UdpMdns,
  UdpSsdp,
  UdpNtp,
  UdpDhcp,
  Eapol,
  Arp,
  Icmp,
};

std::string_view to_string(TrafficKind kind);

enum class EntropyRegime : std::uint8_t {
  Low,   // bytes drawn from a 16-symbol alphabet, entropy <= 0.5
  High,  // every byte value equally likely
};

struct PayloadProfile {
  EntropyRegime regime = EntropyRegime::Low;
  std::vector<std::uint16_t> lengths;  // typical lengths, picked uniformly
  std::uint16_t jitter = 0;            // +/- uniform jitter around the pick
};

struct WindowProfile {
  std::vector<std::uint16_t> values;
  std::uint16_t jitter = 0;
};

inline constexpr std::size_t kMinSessionLength = 2;
inline constexpr std::size_t kMaxSessionLength = 10;

struct DeviceArchetype {
  std::string name;
  std::string category;
  MacAddress mac{};
  IpAddress ip;
  std::map<TrafficKind, double> protocol_mix;
  // Kinds without an entry fall back to a built-in default profile.
  std::map<TrafficKind, PayloadProfile> payloads;
  WindowProfile window;
  // weights for session lengths 2..10
  std::array<double, kMaxSessionLength - kMinSessionLength + 1> session_length_weights{};
  // Conduit devices relay single packets on fresh port pairs instead of
  // running request/response sessions.
  bool sessionless = false;

  // Throws Error{InvalidArgument} unless weights are non-negative and sum to 1.
  void validate() const;
};

struct Trace {
  std::vector<RawFrame> frames;
  std::vector<std::string> labels;  // ground truth, one per frame
  // Port pair (low, high) of every port-carrying session, in emission order.
  std::vector<PortPair> session_ports;
};

// Pure function of (archetype, n_packets, seed).
Trace generate_trace(const DeviceArchetype& archetype, std::size_t n_packets, std::uint64_t seed);

// Payload bytes for one regime; exposed for entropy checks.
std::vector<std::uint8_t> generate_payload(EntropyRegime regime, std::size_t length, std::uint64_t seed);

// constrained-bulb, hue-bulb, camera-streamer, hub-conduit, speaker, outlet
std::vector<DeviceArchetype> standard_archetypes();
const DeviceArchetype& find_archetype(std::span<const DeviceArchetype> archetypes, std::string_view name);

struct CorpusEntry {
  DeviceArchetype archetype;
  std::string instance_label;
  Trace trace;
};

inline constexpr std::size_t kCorpusPacketsPerTrace = 3000;
inline constexpr std::string_view kTwinArchetype = "camera-streamer";

// One trace per standard archetype plus a second physical unit ("twin") of
// camera-streamer that differs only in MAC and seed.
std::vector<CorpusEntry> standard_corpus(std::uint64_t seed,
                                         std::size_t packets_per_trace = kCorpusPacketsPerTrace);

// Profiles built by running the regular pipeline over each corpus trace.
std::vector<BehavioralProfile> corpus_profiles(std::span<const CorpusEntry> corpus);

std::string labels_to_json(std::string_view capture_name, std::span<const std::string> labels);
void write_labels(const std::filesystem::path& path, std::string_view capture_name,
                  std::span<const std::string> labels);

// Writes <instance>.pcap and <instance>.labels.json per entry plus a
// corpus.json manifest; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, std::span<const CorpusEntry> corpus);

}  // namespace iotfp::synth
