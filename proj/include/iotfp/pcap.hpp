#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "iotfp/packet.hpp"

namespace iotfp {

enum class ByteOrder : std::uint8_t { Little, Big };
enum class TimestampResolution : std::uint8_t { Microseconds, Nanoseconds };

inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::size_t kPcapGlobalHeaderLength = 24;
inline constexpr std::size_t kPcapRecordHeaderLength = 16;
inline constexpr std::uint32_t kMaxFrameLength = 65535;

struct CaptureMeta {
  std::uint32_t link_type = kLinkTypeEthernet;
  ByteOrder byte_order = ByteOrder::Little;
  TimestampResolution timestamp_resolution = TimestampResolution::Microseconds;
  std::size_t packet_count = 0;
  // Non-zero when the file ended inside a record; frames before it are kept.
  std::size_t truncated_records = 0;
};

struct Capture {
  CaptureMeta meta;
  std::vector<RawFrame> frames;
};

// Classic libpcap format only. Throws Error{BadMagic} (with a dedicated message
// for pcapng), Error{UnsupportedLinkType}, Error{TruncatedFile} when the global
// header itself is cut short, and Error{IoFailure} when the file cannot be read.
Capture read_capture(const std::filesystem::path& path);
Capture decode_capture(std::span<const std::uint8_t> bytes);

// Writes a little-endian, microsecond-resolution, Ethernet pcap. Returns the
// number of frames written. Throws Error{InvalidArgument} for frames longer than
// 65535 bytes and Error{IoFailure} on write errors.
std::size_t write_capture(const std::filesystem::path& path, std::span<const RawFrame> frames);
std::vector<std::uint8_t> encode_capture(std::span<const RawFrame> frames,
                                         ByteOrder order = ByteOrder::Little);

// Identifies one device's traffic. At least one field must be set; when both
// are, a packet must match both (each on either endpoint).
struct DeviceSelector {
  std::optional<MacAddress> mac;
  std::optional<IpAddress> ip;

  bool valid() const { return mac.has_value() || ip.has_value(); }
  bool matches(const ParsedPacket& pkt) const;
};

std::vector<ParsedPacket> filter_device(std::span<const ParsedPacket> packets,
                                        const DeviceSelector& selector);

}  // namespace iotfp
