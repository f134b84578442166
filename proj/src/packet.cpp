#include "iotfp/packet.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstdio>

#include "iotfp/error.hpp"

namespace iotfp {

namespace {

std::uint16_t read_be16(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint16_t>((bytes[offset] << 8) | bytes[offset + 1]);
}

[[noreturn]] void truncated(const char* layer) {
  throw Error(ErrorKind::TruncatedHeader, std::string(layer) + " header extends past captured bytes");
}

constexpr std::uint8_t kProtoICMP = 1;
constexpr std::uint8_t kProtoTCP = 6;
constexpr std::uint8_t kProtoUDP = 17;
constexpr std::uint8_t kProtoICMPv6 = 58;

constexpr std::uint8_t kIPv4OptEnd = 0;
constexpr std::uint8_t kIPv4OptNop = 1;
constexpr std::uint8_t kIPv4OptRouterAlert = 148;

constexpr std::uint8_t kIPv6HopByHop = 0;
constexpr std::uint8_t kIPv6Routing = 43;
constexpr std::uint8_t kIPv6Fragment = 44;
constexpr std::uint8_t kIPv6DestOpts = 60;
constexpr std::uint8_t kIPv6NoNext = 59;
constexpr std::uint8_t kIPv6OptRouterAlert = 5;

void scan_ipv4_options(std::span<const std::uint8_t> options, IpOptions& out) {
  std::size_t i = 0;
  while (i < options.size()) {
    const std::uint8_t kind = options[i];
    if (kind == kIPv4OptEnd || kind == kIPv4OptNop) {
      out.padding = true;
      ++i;
      continue;
    }
    if (i + 1 >= options.size()) break;
    const std::uint8_t len = options[i + 1];
    if (kind == kIPv4OptRouterAlert) out.router_alert = true;
    if (len < 2) break;  // malformed length; stop scanning
    i += len;
  }
}

void scan_ipv6_hop_by_hop(std::span<const std::uint8_t> options, IpOptions& out) {
  std::size_t i = 0;
  while (i < options.size()) {
    const std::uint8_t type = options[i];
    if (type == 0) {  // Pad1
      ++i;
      continue;
    }
    if (i + 1 >= options.size()) break;
    if (type == kIPv6OptRouterAlert) out.router_alert = true;
    i += 2u + options[i + 1];
  }
}

// Fills transport fields and payload from the bytes following the IP header.
void decode_transport(std::uint8_t protocol, std::span<const std::uint8_t> segment,
                      ParsedPacket& pkt) {
  switch (protocol) {
    case kProtoTCP: {
      if (segment.size() < 20) truncated("TCP");
      const std::size_t data_offset = static_cast<std::size_t>(segment[12] >> 4) * 4;
      if (data_offset < 20) return;  // malformed; leave transport None
      if (data_offset > segment.size()) truncated("TCP");
      pkt.transport = Transport::TCP;
      pkt.src_port = read_be16(segment, 0);
      pkt.dst_port = read_be16(segment, 2);
      pkt.tcp_window_size = read_be16(segment, 14);
      pkt.payload.assign(segment.begin() + static_cast<std::ptrdiff_t>(data_offset), segment.end());
      break;
    }
    case kProtoUDP: {
      if (segment.size() < 8) truncated("UDP");
      pkt.transport = Transport::UDP;
      pkt.src_port = read_be16(segment, 0);
      pkt.dst_port = read_be16(segment, 2);
      std::size_t end = segment.size();
      const std::uint16_t udp_length = read_be16(segment, 4);
      if (udp_length >= 8 && udp_length < end) end = udp_length;
      pkt.payload.assign(segment.begin() + 8, segment.begin() + static_cast<std::ptrdiff_t>(end));
      break;
    }
    case kProtoICMP:
    case kProtoICMPv6: {
      if (segment.size() < 4) truncated(protocol == kProtoICMP ? "ICMP" : "ICMPv6");
      pkt.transport = protocol == kProtoICMP ? Transport::ICMP : Transport::ICMPv6;
      pkt.payload.assign(segment.begin() + 4, segment.end());
      break;
    }
    default:
      pkt.payload.assign(segment.begin(), segment.end());
      return;
  }
  if (pkt.src_port && pkt.dst_port) {
    pkt.app_protocols = classify_app_protocols(pkt.transport, *pkt.src_port, *pkt.dst_port);
  }
}

void decode_ipv4(std::span<const std::uint8_t> bytes, ParsedPacket& pkt) {
  if (bytes.size() < 20) truncated("IPv4");
  if ((bytes[0] >> 4) != 4) return;
  const std::size_t header_length = static_cast<std::size_t>(bytes[0] & 0x0F) * 4;
  if (header_length < 20) return;
  if (header_length > bytes.size()) truncated("IPv4");

  pkt.network = Network::IPv4;
  pkt.src_ip = IpAddress::from_v4_bytes(bytes.subspan(12, 4));
  pkt.dst_ip = IpAddress::from_v4_bytes(bytes.subspan(16, 4));
  scan_ipv4_options(bytes.subspan(20, header_length - 20), pkt.ip_options);

  // Trim Ethernet trailer padding using the IP total length.
  std::size_t end = bytes.size();
  const std::uint16_t total_length = read_be16(bytes, 2);
  if (total_length >= header_length && total_length < end) end = total_length;

  const std::uint16_t fragment_offset = read_be16(bytes, 6) & 0x1FFF;
  const auto segment = bytes.subspan(header_length, end - header_length);
  if (fragment_offset != 0) {
    pkt.payload.assign(segment.begin(), segment.end());
    return;
  }
  decode_transport(bytes[9], segment, pkt);
}

void decode_ipv6(std::span<const std::uint8_t> bytes, ParsedPacket& pkt) {
  if (bytes.size() < 40) truncated("IPv6");
  if ((bytes[0] >> 4) != 6) return;

  pkt.network = Network::IPv6;
  pkt.src_ip = IpAddress::from_v6_bytes(bytes.subspan(8, 16));
  pkt.dst_ip = IpAddress::from_v6_bytes(bytes.subspan(24, 16));

  std::size_t end = bytes.size();
  const std::size_t payload_length = read_be16(bytes, 4);
  if (payload_length > 0 && 40 + payload_length < end) end = 40 + payload_length;

  std::uint8_t next = bytes[6];
  std::size_t offset = 40;
  for (;;) {
    if (next == kIPv6HopByHop || next == kIPv6Routing || next == kIPv6DestOpts) {
      if (offset + 2 > end) truncated("IPv6 extension");
      const std::size_t ext_length = (static_cast<std::size_t>(bytes[offset + 1]) + 1) * 8;
      if (offset + ext_length > end) truncated("IPv6 extension");
      if (next == kIPv6HopByHop) {
        scan_ipv6_hop_by_hop(bytes.subspan(offset + 2, ext_length - 2), pkt.ip_options);
      }
      next = bytes[offset];
      offset += ext_length;
    } else if (next == kIPv6Fragment) {
      if (offset + 8 > end) truncated("IPv6 fragment");
      const std::uint16_t fragment_offset = read_be16(bytes, offset + 2) >> 3;
      next = bytes[offset];
      offset += 8;
      if (fragment_offset != 0) {
        pkt.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                           bytes.begin() + static_cast<std::ptrdiff_t>(end));
        return;
      }
    } else {
      break;
    }
  }
  if (next == kIPv6NoNext) return;
  decode_transport(next, bytes.subspan(offset, end - offset), pkt);
}

}  // namespace

std::string format_mac(const MacAddress& mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                mac[4], mac[5]);
  return buf;
}

std::optional<MacAddress> parse_mac(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  MacAddress mac{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (i > 0) {
      const char sep = text[i * 3 - 1];
      if (sep != ':' && sep != '-') return std::nullopt;
    }
    unsigned value = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      const char c = text[i * 3 + j];
      unsigned digit;
      if (c >= '0' && c <= '9') digit = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') digit = static_cast<unsigned>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') digit = static_cast<unsigned>(c - 'A' + 10);
      else return std::nullopt;
      value = value * 16 + digit;
    }
    mac[i] = static_cast<std::uint8_t>(value);
  }
  return mac;
}

IpAddress IpAddress::v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  IpAddress ip;
  ip.bytes[0] = a;
  ip.bytes[1] = b;
  ip.bytes[2] = c;
  ip.bytes[3] = d;
  return ip;
}

IpAddress IpAddress::from_v4_bytes(std::span<const std::uint8_t> four) {
  return v4(four[0], four[1], four[2], four[3]);
}

IpAddress IpAddress::from_v6_bytes(std::span<const std::uint8_t> sixteen) {
  IpAddress ip;
  ip.family = Family::V6;
  std::copy_n(sixteen.begin(), 16, ip.bytes.begin());
  return ip;
}

std::string format_ip(const IpAddress& ip) {
  char buf[INET6_ADDRSTRLEN];
  const int af = ip.family == IpAddress::Family::V4 ? AF_INET : AF_INET6;
  if (inet_ntop(af, ip.bytes.data(), buf, sizeof buf) == nullptr) return {};
  return buf;
}

std::optional<IpAddress> parse_ip(std::string_view text) {
  const std::string s(text);
  IpAddress ip;
  if (inet_pton(AF_INET, s.c_str(), ip.bytes.data()) == 1) return ip;
  ip.family = IpAddress::Family::V6;
  if (inet_pton(AF_INET6, s.c_str(), ip.bytes.data()) == 1) return ip;
  return std::nullopt;
}

AppProtocolSet classify_app_protocols(Transport transport, std::uint16_t src_port,
                                      std::uint16_t dst_port) {
  AppProtocolSet set;
  const auto either = [&](std::uint16_t port) { return src_port == port || dst_port == port; };
  if (transport == Transport::TCP) {
    if (either(80)) set.insert(AppProtocol::HTTP);
    if (either(443)) set.insert(AppProtocol::HTTPS);
    if (either(53)) set.insert(AppProtocol::DNS);
  } else if (transport == Transport::UDP) {
    if (either(67) || either(68)) {
      set.insert(AppProtocol::DHCP);
      set.insert(AppProtocol::BOOTP);
    }
    if (either(1900)) set.insert(AppProtocol::SSDP);
    if (either(53)) set.insert(AppProtocol::DNS);
    if (either(5353)) set.insert(AppProtocol::MDNS);
    if (either(123)) set.insert(AppProtocol::NTP);
  }
  return set;
}

ParsedPacket parse_frame(const RawFrame& frame) {
  const std::span<const std::uint8_t> bytes(frame.data);
  if (bytes.size() < kEthernetHeaderLength) {
    throw Error(ErrorKind::FrameTooShort,
                "frame of " + std::to_string(bytes.size()) + " bytes is shorter than an Ethernet header");
  }

  ParsedPacket pkt;
  pkt.timestamp = frame.timestamp;
  std::copy_n(bytes.begin(), 6, pkt.dst_mac.begin());
  std::copy_n(bytes.begin() + 6, 6, pkt.src_mac.begin());
  pkt.ether_type = read_be16(bytes, 12);
  std::size_t offset = kEthernetHeaderLength;

  if (pkt.ether_type == kEtherTypeVlan) {
    if (bytes.size() < offset + 4) truncated("802.1Q");
    pkt.ether_type = read_be16(bytes, offset + 2);
    offset += 4;
  }

  const auto inner = bytes.subspan(offset);
  switch (pkt.ether_type) {
    case kEtherTypeIPv4:
      decode_ipv4(inner, pkt);
      break;
    case kEtherTypeIPv6:
      decode_ipv6(inner, pkt);
      break;
    case kEtherTypeARP:
      pkt.network = Network::ARP;
      pkt.payload.assign(inner.begin(), inner.end());
      break;
    case kEtherTypeEAPoL:
      pkt.network = Network::EAPoL;
      pkt.payload.assign(inner.begin(), inner.end());
      break;
    default:
      pkt.payload.assign(inner.begin(), inner.end());
      break;
  }
  return pkt;
}

ParseResult parse_frames(std::span<const RawFrame> frames) {
  ParseResult result;
  result.packets.reserve(frames.size());
  for (const auto& frame : frames) {
    try {
      result.packets.push_back(parse_frame(frame));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FrameTooShort && e.kind() != ErrorKind::TruncatedHeader) throw;
      ++result.skipped;
    }
  }
  return result;
}

}  // namespace iotfp
