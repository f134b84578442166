#include "iotfp/pcap.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "iotfp/error.hpp"

namespace iotfp {

namespace {

constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNano = 0xA1B23C4D;
constexpr std::uint32_t kMagicPcapng = 0x0A0D0D0A;

std::uint32_t load32(const std::uint8_t* p, ByteOrder order) {
  if (order == ByteOrder::Little) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }
  return static_cast<std::uint32_t>(p[3]) | static_cast<std::uint32_t>(p[2]) << 8 |
         static_cast<std::uint32_t>(p[1]) << 16 | static_cast<std::uint32_t>(p[0]) << 24;
}

void store32(std::vector<std::uint8_t>& out, std::uint32_t v, ByteOrder order) {
  if (order == ByteOrder::Little) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  } else {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void store16(std::vector<std::uint8_t>& out, std::uint16_t v, ByteOrder order) {
  if (order == ByteOrder::Little) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  } else {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  }
}

}  // namespace

Capture decode_capture(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::BadMagic, "file too short to hold a pcap magic number");

  Capture capture;
  auto& meta = capture.meta;
  const std::uint32_t magic_le = load32(bytes.data(), ByteOrder::Little);
  const std::uint32_t magic_be = load32(bytes.data(), ByteOrder::Big);
  if (magic_le == kMagicMicro || magic_le == kMagicNano) {
    meta.byte_order = ByteOrder::Little;
  } else if (magic_be == kMagicMicro || magic_be == kMagicNano) {
    meta.byte_order = ByteOrder::Big;
  } else if (magic_le == kMagicPcapng) {
    throw Error(ErrorKind::BadMagic, "pcapng files are not supported; convert to classic pcap");
  } else {
    throw Error(ErrorKind::BadMagic, "not a pcap file (unrecognized magic number)");
  }
  const std::uint32_t magic = load32(bytes.data(), meta.byte_order);
  meta.timestamp_resolution =
      magic == kMagicNano ? TimestampResolution::Nanoseconds : TimestampResolution::Microseconds;

  if (bytes.size() < kPcapGlobalHeaderLength) {
    throw Error(ErrorKind::TruncatedFile, "pcap global header is truncated");
  }
  meta.link_type = load32(bytes.data() + 20, meta.byte_order) & 0x0FFFFFFF;
  if (meta.link_type != kLinkTypeEthernet) {
    throw Error(ErrorKind::UnsupportedLinkType,
                "unsupported link type " + std::to_string(meta.link_type) + " (only Ethernet is accepted)");
  }

  std::size_t offset = kPcapGlobalHeaderLength;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kPcapRecordHeaderLength) {
      ++meta.truncated_records;
      break;
    }
    const std::uint8_t* rec = bytes.data() + offset;
    const std::uint32_t ts_sec = load32(rec, meta.byte_order);
    const std::uint32_t ts_frac = load32(rec + 4, meta.byte_order);
    const std::uint32_t incl_len = load32(rec + 8, meta.byte_order);
    const std::uint32_t orig_len = load32(rec + 12, meta.byte_order);
    offset += kPcapRecordHeaderLength;
    if (bytes.size() - offset < incl_len) {
      ++meta.truncated_records;
      break;
    }
    RawFrame frame;
    frame.timestamp.seconds = ts_sec;
    frame.timestamp.microseconds =
        meta.timestamp_resolution == TimestampResolution::Nanoseconds ? ts_frac / 1000 : ts_frac;
    frame.original_length = std::max(orig_len, incl_len);
    frame.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                      bytes.begin() + static_cast<std::ptrdiff_t>(offset + incl_len));
    offset += incl_len;
    capture.frames.push_back(std::move(frame));
  }
  meta.packet_count = capture.frames.size();
  return capture;
}

Capture read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read error on " + path.string());
  return decode_capture(bytes);
}

std::vector<std::uint8_t> encode_capture(std::span<const RawFrame> frames, ByteOrder order) {
  std::vector<std::uint8_t> out;
  std::size_t total = kPcapGlobalHeaderLength;
  for (const auto& f : frames) {
    if (f.data.size() > kMaxFrameLength) {
      throw Error(ErrorKind::InvalidArgument,
                  "frame of " + std::to_string(f.data.size()) + " bytes exceeds the 65535-byte limit");
    }
    total += kPcapRecordHeaderLength + f.data.size();
  }
  out.reserve(total);

  store32(out, kMagicMicro, order);
  store16(out, 2, order);
  store16(out, 4, order);
  store32(out, 0, order);  // thiszone
  store32(out, 0, order);  // sigfigs
  store32(out, kMaxFrameLength, order);
  store32(out, kLinkTypeEthernet, order);

  for (const auto& f : frames) {
    store32(out, static_cast<std::uint32_t>(f.timestamp.seconds), order);
    store32(out, f.timestamp.microseconds, order);
    store32(out, f.capture_length(), order);
    store32(out, std::max(f.original_length, f.capture_length()), order);
    out.insert(out.end(), f.data.begin(), f.data.end());
  }
  return out;
}

std::size_t write_capture(const std::filesystem::path& path, std::span<const RawFrame> frames) {
  const auto bytes = encode_capture(frames);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write error on " + path.string());
  return frames.size();
}

bool DeviceSelector::matches(const ParsedPacket& pkt) const {
  if (mac && pkt.src_mac != *mac && pkt.dst_mac != *mac) return false;
  if (ip) {
    const bool src = pkt.src_ip && *pkt.src_ip == *ip;
    const bool dst = pkt.dst_ip && *pkt.dst_ip == *ip;
    if (!src && !dst) return false;
  }
  return valid();
}

std::vector<ParsedPacket> filter_device(std::span<const ParsedPacket> packets,
                                        const DeviceSelector& selector) {
  std::vector<ParsedPacket> out;
  for (const auto& pkt : packets) {
    if (selector.matches(pkt)) out.push_back(pkt);
  }
  return out;
}

}  // namespace iotfp
