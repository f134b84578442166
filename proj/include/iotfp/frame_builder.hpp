#pragma once

// Byte-level encoders for the frame layouts parse_frame understands. Used by
// the synthetic traffic generator and by tests that need hand-built frames.
// Checksums are left zero.

#include <cstdint>
#include <span>
#include <vector>

#include "iotfp/packet.hpp"

namespace iotfp::frames {

using Bytes = std::vector<std::uint8_t>;

Bytes ethernet(const MacAddress& dst, const MacAddress& src, std::uint16_t ether_type,
               std::span<const std::uint8_t> body);

// 802.1Q-tagged Ethernet frame.
Bytes ethernet_vlan(const MacAddress& dst, const MacAddress& src, std::uint16_t vlan_id,
                    std::uint16_t ether_type, std::span<const std::uint8_t> body);

// `options` is appended verbatim after the fixed header and padded to a
// multiple of four with End-of-Options bytes.
Bytes ipv4(const IpAddress& src, const IpAddress& dst, std::uint8_t protocol,
           std::span<const std::uint8_t> body, std::span<const std::uint8_t> options = {},
           std::uint16_t fragment_offset = 0);

// `body` may start with pre-encoded extension headers; `next_header` names the
// first of them (or the transport protocol when there are none).
Bytes ipv6(const IpAddress& src, const IpAddress& dst, std::uint8_t next_header,
           std::span<const std::uint8_t> body);

Bytes tcp(std::uint16_t src_port, std::uint16_t dst_port, std::uint16_t window,
          std::span<const std::uint8_t> payload, std::uint8_t flags = 0x18);

Bytes udp(std::uint16_t src_port, std::uint16_t dst_port, std::span<const std::uint8_t> payload);

Bytes icmp(std::uint8_t type, std::uint8_t code, std::span<const std::uint8_t> payload);

// Minimal ARP request (Ethernet/IPv4) body.
Bytes arp_request(const MacAddress& sender_mac, const IpAddress& sender_ip, const IpAddress& target_ip);

// EAPoL body: version 2, given packet type, payload as body.
Bytes eapol(std::uint8_t packet_type, std::span<const std::uint8_t> payload);

}  // namespace iotfp::frames
