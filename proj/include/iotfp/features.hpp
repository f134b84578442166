#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "iotfp/packet.hpp"

namespace iotfp {

inline constexpr std::string_view kFeatureSchemaVersion = "iotfp-features/1";

// Frozen order. Fingerprints concatenate these vectors, so reordering breaks
// every persisted profile and model.
enum class HeaderFlag : std::uint8_t {
  ARP,
  IP,
  ICMP,
  ICMPv6,
  EAPoL,
  TCP,
  UDP,
  HTTP,
  HTTPS,
  DHCP,
  BOOTP,
  SSDP,
  DNS,
  MDNS,
  NTP,
  IpPadding,
  IpRouterAlert,
};

inline constexpr std::size_t kHeaderFlagCount = 17;
inline constexpr std::size_t kPayloadFeatureCount = 3;
inline constexpr std::size_t kPacketFeatureCount = kHeaderFlagCount + kPayloadFeatureCount;

inline constexpr std::size_t kEntropyIndex = 17;
inline constexpr std::size_t kTcpPayloadLengthIndex = 18;
inline constexpr std::size_t kTcpWindowSizeIndex = 19;

const std::array<std::string_view, kPacketFeatureCount>& feature_names();

struct PacketFeatures {
  std::array<std::uint8_t, kHeaderFlagCount> header_flags{};
  double entropy = 0.0;
  std::uint32_t tcp_payload_length = 0;
  std::uint32_t tcp_window_size = 0;

  bool flag(HeaderFlag f) const { return header_flags[static_cast<std::size_t>(f)] != 0; }
  std::array<double, kPacketFeatureCount> to_vector() const;

  friend bool operator==(const PacketFeatures&, const PacketFeatures&) = default;
};

// Base-256 Shannon entropy of the byte-value distribution, in [0, 1].
// An empty payload has entropy 0.
double shannon_entropy(std::span<const std::uint8_t> payload);

PacketFeatures extract_features(const ParsedPacket& pkt);
std::vector<PacketFeatures> extract_all(std::span<const ParsedPacket> packets);

struct EcdfPoint {
  double value = 0.0;
  double probability = 0.0;

  friend bool operator==(const EcdfPoint&, const EcdfPoint&) = default;
};

// One point per distinct value: (v, fraction of samples <= v). Throws
// Error{EmptyInput} for an empty sample.
std::vector<EcdfPoint> ecdf(std::span<const double> values);

// Schema line, column header, then one row per packet.
void write_feature_csv(std::ostream& out, std::span<const PacketFeatures> rows);

}  // namespace iotfp
