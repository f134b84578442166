#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "helpers.hpp"
#include "iotfp/error.hpp"
#include "iotfp/fingerprint.hpp"
#include "iotfp/pcap.hpp"
#include "iotfp/synth.hpp"

using namespace iotfp;

namespace {

// Packets whose window-size feature carries their sequence number.
std::vector<PacketFeatures> marked(std::size_t n) {
  std::vector<PacketFeatures> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].tcp_window_size = static_cast<std::uint32_t>(1000 + i);
    out[i].header_flags[static_cast<std::size_t>(HeaderFlag::TCP)] = 1;
  }
  return out;
}

template <typename F>
ErrorKind failure_kind(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an iotfp::Error");
  return ErrorKind::InvalidArgument;
}

struct TableRow {
  const char* device;
  std::size_t total;
  std::size_t sessions;
  const char* printed;
};

const TableRow kTableOne[] = {
    {"AWOX Speaker", 12755, 3274, "3.89"}, {"D-Link Camera", 8600, 1390, "6.18"},
    {"MUSAIC Speaker", 1346, 305, "4.41"}, {"OMNA Camera", 8253, 1608, "5.13"},
    {"TP Link Light", 1660, 175, "9.48"},  {"WEMO Outlet", 1994, 204, "9.77"},
    {"WINK Hub", 739, 84, "8.79"},
};

}  // namespace

TEST_CASE("fingerprint count, dimension and packet order") {
  for (std::size_t n = 0; n <= 37; ++n) {
    CAPTURE(n);
    const auto fps = build_fingerprints(marked(n), "dev");
    REQUIRE(fps.size() == n / 5);
    for (std::size_t g = 0; g < fps.size(); ++g) {
      CHECK(fps[g].values.size() == 100);
      CHECK(fps[g].label == "dev");
      for (std::size_t p = 0; p < 5; ++p) {
        CHECK(fps[g].values[p * 20 + kTcpWindowSizeIndex] == static_cast<double>(1000 + g * 5 + p));
        CHECK(fps[g].values[p * 20 + static_cast<std::size_t>(HeaderFlag::TCP)] == 1.0);
      }
    }
  }
  CHECK(build_fingerprints(marked(5755), "TCP Light").size() == 1151);
}

TEST_CASE("feature variants project each segment") {
  Fingerprint fp;
  for (std::size_t i = 0; i < kFingerprintDimension; ++i) fp.values[i] = static_cast<double>(i);

  CHECK(project(fp, FeatureVariant::All).size() == 100);
  const auto no_entropy = project(fp, FeatureVariant::NoEntropy);
  REQUIRE(no_entropy.size() == 95);
  for (double v : no_entropy) CHECK(static_cast<std::size_t>(v) % 20 != kEntropyIndex);

  const auto payload = project(fp, FeatureVariant::PayloadOnly);
  CHECK(payload == std::vector<double>{17, 18, 19, 37, 38, 39, 57, 58, 59, 77, 78, 79, 97, 98, 99});
  CHECK(variant_dimension(FeatureVariant::PayloadOnly) == 15);

  CHECK(variant_from_int(19) == FeatureVariant::NoEntropy);
  CHECK_FALSE(variant_from_int(7));
  CHECK(variant_to_int(FeatureVariant::PayloadOnly) == 3);
}

TEST_CASE("packets-per-session arithmetic") {
  double printed_sum = 0.0;
  for (const auto& row : kTableOne) {
    CAPTURE(row.device);
    const double avg = average_packets_per_session(row.total, row.sessions);
    CHECK(format_packets_per_session(avg) == row.printed);
    printed_sum += std::stod(row.printed);
  }
  CHECK(std::abs(printed_sum / 7.0 - 6.8) <= 0.05);
  CHECK(average_packets_per_session(10, 0) == 0.0);
  CHECK(format_packets_per_session(0.0) == "0.00");
}

TEST_CASE("session statistics group by unordered port pair") {
  const std::vector<RawFrame> frames{
      testutil::tcp_frame(testutil::kMacA, testutil::kIpA, 50000, 443, 1, {}),
      testutil::tcp_frame(testutil::kMacGw, testutil::kIpGw, 443, 50000, 1, {}),
      testutil::udp_frame(testutil::kMacA, testutil::kIpA, 50001, 53, {}),
      testutil::tcp_frame(testutil::kMacA, testutil::kIpA, 50000, 443, 1, {}),
      testutil::frame(frames::ethernet(testutil::kMacGw, testutil::kMacA, kEtherTypeARP,
                                       frames::arp_request(testutil::kMacA, testutil::kIpA, testutil::kIpGw))),
  };
  const auto stats = session_stats(parse_frames(frames).packets);
  CHECK(stats.session_count == 2);
  CHECK(stats.total_session_packets == 4);  // ARP has no ports
  CHECK(stats.session_packets.at({443, 50000}) == 3);
  CHECK(stats.session_packets.at({53, 50001}) == 1);
  CHECK(stats.avg_packets_per_session == 2.0);
}

TEST_CASE("profile from a single-device capture") {
  const auto roster = synth::standard_archetypes();
  const auto& arch = synth::find_archetype(roster, "outlet");
  const auto trace = synth::generate_trace(arch, 500, 4);
  testutil::TempDir dir;
  write_capture(dir / "outlet.pcap", trace.frames);

  DeviceSelector sel;
  sel.mac = arch.mac;
  const auto profile = build_profile(dir / "outlet.pcap", sel, "outlet", "Outlet");
  CHECK(profile.fingerprints.size() == 100);
  CHECK(profile.instance_label == "outlet");
  CHECK(profile.category_label == "Outlet");
  REQUIRE(profile.source_captures.size() == 1);

  SUBCASE("json round trip is lossless") {
    save_profile(dir / "p.json", profile);
    const auto back = load_profile(dir / "p.json");
    CHECK(back.device_label == profile.device_label);
    CHECK(back.instance_label == profile.instance_label);
    CHECK(back.source_captures == profile.source_captures);
    REQUIRE(back.fingerprints.size() == profile.fingerprints.size());
    for (std::size_t i = 0; i < back.fingerprints.size(); ++i) {
      CHECK(back.fingerprints[i].values == profile.fingerprints[i].values);
    }
  }
  SUBCASE("validation") {
    auto doc = nlohmann::json::parse(profile_to_json(profile));
    auto bad_schema = doc;
    bad_schema["schema"] = "iotfp-profile/99";
    CHECK(failure_kind([&] { profile_from_json(bad_schema.dump()); }) == ErrorKind::BadFormat);

    auto short_row = doc;
    short_row["fingerprints"][0].erase(0);
    CHECK(failure_kind([&] { profile_from_json(short_row.dump()); }) == ErrorKind::DimensionMismatch);

    CHECK(failure_kind([&] { profile_from_json("{not json"); }) == ErrorKind::BadFormat);
  }
  SUBCASE("errors") {
    CHECK(failure_kind([&] { build_profile(dir / "outlet.pcap", DeviceSelector{}, "x", "y"); }) ==
          ErrorKind::InvalidArgument);
    DeviceSelector nobody;
    nobody.mac = testutil::kMacB;
    CHECK(failure_kind([&] { build_profile(dir / "outlet.pcap", nobody, "x", "y"); }) ==
          ErrorKind::InsufficientTraffic);
  }
}

TEST_CASE("profile of one device in a mixed capture equals its isolated profile") {
  const auto roster = synth::standard_archetypes();
  const auto& a = synth::find_archetype(roster, "hue-bulb");
  const auto& b = synth::find_archetype(roster, "camera-streamer");
  const auto ta = synth::generate_trace(a, 333, 10);
  const auto tb = synth::generate_trace(b, 300, 11);

  std::vector<RawFrame> merged = ta.frames;
  merged.insert(merged.end(), tb.frames.begin(), tb.frames.end());
  std::stable_sort(merged.begin(), merged.end(),
                   [](const RawFrame& x, const RawFrame& y) { return x.timestamp < y.timestamp; });

  DeviceSelector sel;
  sel.mac = a.mac;
  const auto mixed = build_profile_from_frames(merged, sel, "hue", "Light", "", "mixed");
  const auto alone = build_profile_from_frames(ta.frames, sel, "hue", "Light", "", "alone");
  REQUIRE(mixed.fingerprints.size() == 66);
  REQUIRE(alone.fingerprints.size() == 66);
  for (std::size_t i = 0; i < 66; ++i) CHECK(mixed.fingerprints[i].values == alone.fingerprints[i].values);
}
