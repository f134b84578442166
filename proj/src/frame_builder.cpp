#include "iotfp/frame_builder.hpp"

#include <algorithm>

namespace iotfp::frames {

namespace {

void put_be16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void append(Bytes& out, std::span<const std::uint8_t> bytes) {
  out.insert(out.end(), bytes.begin(), bytes.end());
}

}  // namespace

Bytes ethernet(const MacAddress& dst, const MacAddress& src, std::uint16_t ether_type,
               std::span<const std::uint8_t> body) {
  Bytes out;
  out.reserve(kEthernetHeaderLength + body.size());
  append(out, dst);
  append(out, src);
  put_be16(out, ether_type);
  append(out, body);
  return out;
}

Bytes ethernet_vlan(const MacAddress& dst, const MacAddress& src, std::uint16_t vlan_id,
                    std::uint16_t ether_type, std::span<const std::uint8_t> body) {
  Bytes out;
  append(out, dst);
  append(out, src);
  put_be16(out, kEtherTypeVlan);
  put_be16(out, vlan_id & 0x0FFF);
  put_be16(out, ether_type);
  append(out, body);
  return out;
}

Bytes ipv4(const IpAddress& src, const IpAddress& dst, std::uint8_t protocol,
           std::span<const std::uint8_t> body, std::span<const std::uint8_t> options,
           std::uint16_t fragment_offset) {
  Bytes opts(options.begin(), options.end());
  while (opts.size() % 4 != 0) opts.push_back(0);
  const std::size_t header_length = 20 + opts.size();

  Bytes out;
  out.reserve(header_length + body.size());
  out.push_back(static_cast<std::uint8_t>(0x40 | (header_length / 4)));
  out.push_back(0);
  put_be16(out, static_cast<std::uint16_t>(header_length + body.size()));
  put_be16(out, 0);  // identification
  put_be16(out, fragment_offset & 0x1FFF);
  out.push_back(64);
  out.push_back(protocol);
  put_be16(out, 0);
  out.insert(out.end(), src.bytes.begin(), src.bytes.begin() + 4);
  out.insert(out.end(), dst.bytes.begin(), dst.bytes.begin() + 4);
  append(out, opts);
  append(out, body);
  return out;
}

Bytes ipv6(const IpAddress& src, const IpAddress& dst, std::uint8_t next_header,
           std::span<const std::uint8_t> body) {
  Bytes out;
  out.reserve(40 + body.size());
  out.push_back(0x60);
  out.push_back(0);
  put_be16(out, 0);
  put_be16(out, static_cast<std::uint16_t>(body.size()));
  out.push_back(next_header);
  out.push_back(64);
  append(out, src.bytes);
  append(out, dst.bytes);
  append(out, body);
  return out;
}

Bytes tcp(std::uint16_t src_port, std::uint16_t dst_port, std::uint16_t window,
          std::span<const std::uint8_t> payload, std::uint8_t flags) {
  Bytes out;
  out.reserve(20 + payload.size());
  put_be16(out, src_port);
  put_be16(out, dst_port);
  out.insert(out.end(), 8, 0);  // seq, ack
  out.push_back(5 << 4);
  out.push_back(flags);
  put_be16(out, window);
  put_be16(out, 0);  // checksum
  put_be16(out, 0);  // urgent
  append(out, payload);
  return out;
}

Bytes udp(std::uint16_t src_port, std::uint16_t dst_port, std::span<const std::uint8_t> payload) {
  Bytes out;
  out.reserve(8 + payload.size());
  put_be16(out, src_port);
  put_be16(out, dst_port);
  put_be16(out, static_cast<std::uint16_t>(8 + payload.size()));
  put_be16(out, 0);
  append(out, payload);
  return out;
}

Bytes icmp(std::uint8_t type, std::uint8_t code, std::span<const std::uint8_t> payload) {
  Bytes out;
  out.reserve(4 + payload.size());
  out.push_back(type);
  out.push_back(code);
  put_be16(out, 0);  // checksum left zero
  append(out, payload);
  return out;
}

Bytes arp_request(const MacAddress& sender_mac, const IpAddress& sender_ip, const IpAddress& target_ip) {
  Bytes out;
  put_be16(out, 1);  // Ethernet
  put_be16(out, kEtherTypeIPv4);
  out.push_back(6);
  out.push_back(4);
  put_be16(out, 1);  // request
  append(out, sender_mac);
  out.insert(out.end(), sender_ip.bytes.begin(), sender_ip.bytes.begin() + 4);
  out.insert(out.end(), 6, 0);
  out.insert(out.end(), target_ip.bytes.begin(), target_ip.bytes.begin() + 4);
  return out;
}

Bytes eapol(std::uint8_t packet_type, std::span<const std::uint8_t> payload) {
  Bytes out{2, packet_type};
  put_be16(out, static_cast<std::uint16_t>(payload.size()));
  append(out, payload);
  return out;
}

}  // namespace iotfp::frames
