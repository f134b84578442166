#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iotfp {

using MacAddress = std::array<std::uint8_t, 6>;

std::string format_mac(const MacAddress& mac);
// Accepts "aa:bb:cc:dd:ee:ff" or "aa-bb-cc-dd-ee-ff"; nullopt on malformed input.
std::optional<MacAddress> parse_mac(std::string_view text);

// IPv4 addresses are stored in the first four bytes.
struct IpAddress {
  enum class Family : std::uint8_t { V4, V6 };

  Family family = Family::V4;
  std::array<std::uint8_t, 16> bytes{};

  static IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d);
  static IpAddress from_v4_bytes(std::span<const std::uint8_t> four);
  static IpAddress from_v6_bytes(std::span<const std::uint8_t> sixteen);

  friend bool operator==(const IpAddress&, const IpAddress&) = default;
};

std::string format_ip(const IpAddress& ip);
std::optional<IpAddress> parse_ip(std::string_view text);

struct Timestamp {
  std::int64_t seconds = 0;
  std::uint32_t microseconds = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct RawFrame {
  Timestamp timestamp;
  std::uint32_t original_length = 0;
  std::vector<std::uint8_t> data;

  std::uint32_t capture_length() const { return static_cast<std::uint32_t>(data.size()); }
};

enum class Network : std::uint8_t { IPv4, IPv6, ARP, EAPoL, Other };
enum class Transport : std::uint8_t { TCP, UDP, ICMP, ICMPv6, None };

enum class AppProtocol : std::uint8_t { HTTP, HTTPS, DHCP, BOOTP, SSDP, DNS, MDNS, NTP };
inline constexpr std::size_t kAppProtocolCount = 8;

// Small value-type set over AppProtocol.
class AppProtocolSet {
 public:
  constexpr AppProtocolSet() = default;

  constexpr void insert(AppProtocol p) { bits_ |= bit(p); }
  constexpr bool contains(AppProtocol p) const { return (bits_ & bit(p)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(AppProtocolSet, AppProtocolSet) = default;

 private:
  static constexpr std::uint8_t bit(AppProtocol p) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
  }
  std::uint8_t bits_ = 0;
};

struct IpOptions {
  bool padding = false;
  bool router_alert = false;

  friend bool operator==(const IpOptions&, const IpOptions&) = default;
};

struct ParsedPacket {
  Timestamp timestamp;
  MacAddress src_mac{};
  MacAddress dst_mac{};
  std::uint16_t ether_type = 0;
  Network network = Network::Other;
  std::optional<IpAddress> src_ip;
  std::optional<IpAddress> dst_ip;
  IpOptions ip_options;
  Transport transport = Transport::None;
  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;
  std::optional<std::uint16_t> tcp_window_size;
  AppProtocolSet app_protocols;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const ParsedPacket&, const ParsedPacket&) = default;
};

inline constexpr std::uint16_t kEtherTypeIPv4 = 0x0800;
inline constexpr std::uint16_t kEtherTypeARP = 0x0806;
inline constexpr std::uint16_t kEtherTypeVlan = 0x8100;
inline constexpr std::uint16_t kEtherTypeIPv6 = 0x86DD;
inline constexpr std::uint16_t kEtherTypeEAPoL = 0x888E;

inline constexpr std::size_t kEthernetHeaderLength = 14;

// Decodes an Ethernet II frame. Throws Error{FrameTooShort} for frames below
// 14 bytes and Error{TruncatedHeader} when a header claims more bytes than were
// captured. Unknown or malformed inner layers degrade to Other/None.
ParsedPacket parse_frame(const RawFrame& frame);

// Well-known-port classification; a match on either endpoint counts.
AppProtocolSet classify_app_protocols(Transport transport, std::uint16_t src_port,
                                      std::uint16_t dst_port);

struct ParseResult {
  std::vector<ParsedPacket> packets;
  std::size_t skipped = 0;
};

// Parses every frame, skipping (and counting) the ones parse_frame rejects.
ParseResult parse_frames(std::span<const RawFrame> frames);

}  // namespace iotfp
