#include "iotfp/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "iotfp/error.hpp"

namespace iotfp {

namespace {

void set(PacketFeatures& f, HeaderFlag flag) { f.header_flags[static_cast<std::size_t>(flag)] = 1; }

std::string shortest_repr(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

const std::array<std::string_view, kPacketFeatureCount>& feature_names() {
  static constexpr std::array<std::string_view, kPacketFeatureCount> names = {
      "arp",  "ip",   "icmp", "icmpv6", "eapol", "tcp",        "udp",
      "http", "https", "dhcp", "bootp", "ssdp",  "dns",        "mdns",
      "ntp",  "ip_padding", "ip_router_alert", "entropy", "tcp_payload_length", "tcp_window_size",
  };
  return names;
}

std::array<double, kPacketFeatureCount> PacketFeatures::to_vector() const {
  std::array<double, kPacketFeatureCount> v{};
  for (std::size_t i = 0; i < kHeaderFlagCount; ++i) v[i] = header_flags[i];
  v[kEntropyIndex] = entropy;
  v[kTcpPayloadLengthIndex] = tcp_payload_length;
  v[kTcpWindowSizeIndex] = tcp_window_size;
  return v;
}

double shannon_entropy(std::span<const std::uint8_t> payload) {
  if (payload.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (std::uint8_t b : payload) ++counts[b];

  const double m = static_cast<double>(payload.size());
  double bits = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / m;
    bits -= p * std::log2(p);
  }
  // log_256(x) = log_2(x) / 8
  return std::clamp(bits / 8.0, 0.0, 1.0);
}

PacketFeatures extract_features(const ParsedPacket& pkt) {
  PacketFeatures f;
  switch (pkt.network) {
    case Network::IPv4:
    case Network::IPv6: set(f, HeaderFlag::IP); break;
    case Network::ARP: set(f, HeaderFlag::ARP); break;
    case Network::EAPoL: set(f, HeaderFlag::EAPoL); break;
    case Network::Other: break;
  }
  switch (pkt.transport) {
    case Transport::TCP: set(f, HeaderFlag::TCP); break;
    case Transport::UDP: set(f, HeaderFlag::UDP); break;
    case Transport::ICMP: set(f, HeaderFlag::ICMP); break;
    case Transport::ICMPv6: set(f, HeaderFlag::ICMPv6); break;
    case Transport::None: break;
  }

  static constexpr std::array<std::pair<AppProtocol, HeaderFlag>, kAppProtocolCount> app_flags = {{
      {AppProtocol::HTTP, HeaderFlag::HTTP},
      {AppProtocol::HTTPS, HeaderFlag::HTTPS},
      {AppProtocol::DHCP, HeaderFlag::DHCP},
      {AppProtocol::BOOTP, HeaderFlag::BOOTP},
      {AppProtocol::SSDP, HeaderFlag::SSDP},
      {AppProtocol::DNS, HeaderFlag::DNS},
      {AppProtocol::MDNS, HeaderFlag::MDNS},
      {AppProtocol::NTP, HeaderFlag::NTP},
  }};
  for (auto [proto, flag] : app_flags) {
    if (pkt.app_protocols.contains(proto)) set(f, flag);
  }
  if (pkt.ip_options.padding) set(f, HeaderFlag::IpPadding);
  if (pkt.ip_options.router_alert) set(f, HeaderFlag::IpRouterAlert);

  f.entropy = shannon_entropy(pkt.payload);
  if (pkt.transport == Transport::TCP) {
    f.tcp_payload_length = static_cast<std::uint32_t>(pkt.payload.size());
    f.tcp_window_size = pkt.tcp_window_size.value_or(0);
  }
  return f;
}

std::vector<PacketFeatures> extract_all(std::span<const ParsedPacket> packets) {
  std::vector<PacketFeatures> out;
  out.reserve(packets.size());
  for (const auto& p : packets) out.push_back(extract_features(p));
  return out;
}

std::vector<EcdfPoint> ecdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "ECDF of an empty sample is undefined");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<EcdfPoint> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // emit at the last occurrence of each distinct value
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

void write_feature_csv(std::ostream& out, std::span<const PacketFeatures> rows) {
  out << "# " << kFeatureSchemaVersion << '\n';
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kHeaderFlagCount; ++i) out << static_cast<int>(row.header_flags[i]) << ',';
    out << shortest_repr(row.entropy) << ',' << row.tcp_payload_length << ',' << row.tcp_window_size << '\n';
  }
}

}  // namespace iotfp
