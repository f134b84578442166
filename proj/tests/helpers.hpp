#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "iotfp/frame_builder.hpp"
#include "iotfp/packet.hpp"

namespace testutil {

inline const iotfp::MacAddress kMacA{0x02, 0xaa, 0x00, 0x00, 0x00, 0x01};
inline const iotfp::MacAddress kMacB{0x02, 0xbb, 0x00, 0x00, 0x00, 0x02};
inline const iotfp::MacAddress kMacGw{0x02, 0x00, 0x00, 0x00, 0x00, 0xfe};
inline const iotfp::IpAddress kIpA = iotfp::IpAddress::v4(192, 168, 1, 10);
inline const iotfp::IpAddress kIpB = iotfp::IpAddress::v4(192, 168, 1, 20);
inline const iotfp::IpAddress kIpGw = iotfp::IpAddress::v4(192, 168, 1, 1);

inline iotfp::RawFrame frame(std::vector<std::uint8_t> data, std::int64_t sec = 0, std::uint32_t usec = 0) {
  iotfp::RawFrame f;
  f.timestamp = {sec, usec};
  f.data = std::move(data);
  f.original_length = f.capture_length();
  return f;
}

inline iotfp::RawFrame tcp_frame(const iotfp::MacAddress& src_mac, const iotfp::IpAddress& src_ip,
                                 std::uint16_t sport, std::uint16_t dport, std::uint16_t window,
                                 const std::vector<std::uint8_t>& payload) {
  namespace fb = iotfp::frames;
  return frame(fb::ethernet(kMacGw, src_mac, iotfp::kEtherTypeIPv4,
                            fb::ipv4(src_ip, kIpGw, 6, fb::tcp(sport, dport, window, payload))));
}

inline iotfp::RawFrame udp_frame(const iotfp::MacAddress& src_mac, const iotfp::IpAddress& src_ip,
                                 std::uint16_t sport, std::uint16_t dport,
                                 const std::vector<std::uint8_t>& payload) {
  namespace fb = iotfp::frames;
  return frame(fb::ethernet(kMacGw, src_mac, iotfp::kEtherTypeIPv4,
                            fb::ipv4(src_ip, kIpGw, 17, fb::udp(sport, dport, payload))));
}

inline std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xFF);
  return out;
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("iotfp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
