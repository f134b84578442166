#include "iotfp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "iotfp/error.hpp"
#include "iotfp/frame_builder.hpp"
#include "iotfp/pcap.hpp"

namespace iotfp::synth {

using nlohmann::json;

std::string_view to_string(TrafficKind kind) {
  switch (kind) {
    case TrafficKind::TcpHttp: return "tcp-http";
    case TrafficKind::TcpHttps: return "tcp-https";
    case TrafficKind::UdpDns: return "udp-dns";
    case TrafficKind::UdpMdns: return "udp-mdns";
    case TrafficKind::UdpSsdp: return "udp-ssdp";
    case TrafficKind::UdpNtp: return "udp-ntp";
    case TrafficKind::UdpDhcp: return "udp-dhcp";
    case TrafficKind::Eapol: return "eapol";
    case TrafficKind::Arp: return "arp";
    case TrafficKind::Icmp: return "icmp";
  }
  return "unknown";
}

void DeviceArchetype::validate() const {
  double total = 0.0;
  for (const auto& [kind, w] : protocol_mix) {
    if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, name + ": negative protocol weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, name + ": protocol weights must sum to 1");
  }
  if (!sessionless) {
    double sessions = 0.0;
    for (double w : session_length_weights) {
      if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, name + ": negative session-length weight");
      sessions += w;
    }
    if (std::abs(sessions - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, name + ": session-length weights must sum to 1");
    }
  }
  if (window.values.empty()) throw Error(ErrorKind::InvalidArgument, name + ": empty window profile");
}

namespace {

// Integer and real draws built directly on the engine so traces do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename Weights>
  std::size_t weighted(const Weights& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = unit() * total;
    std::size_t i = 0;
    for (double w : weights) {
      if (u < w) return i;
      u -= w;
      ++i;
    }
    // rounding left u at the top edge; return the last non-zero weight
    std::size_t last = 0;
    i = 0;
    for (double w : weights) {
      if (w > 0) last = i;
      ++i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::string_view kLowAlphabet = "0123456789abcdef";

void fill_payload(Rng& rng, EntropyRegime regime, std::size_t length, std::vector<std::uint8_t>& out) {
  out.resize(length);
  if (regime == EntropyRegime::Low) {
    for (auto& b : out) b = static_cast<std::uint8_t>(kLowAlphabet[rng.below(kLowAlphabet.size())]);
    return;
  }
  // Concatenated random permutations of 0..255: each value is equally likely
  // at every position, and long payloads carry near-maximal entropy.
  std::array<std::uint8_t, 256> block;
  std::iota(block.begin(), block.end(), std::uint8_t{0});
  for (std::size_t start = 0; start < length; start += block.size()) {
    for (std::size_t i = block.size(); i > 1; --i) std::swap(block[i - 1], block[rng.below(i)]);
    const std::size_t n = std::min(block.size(), length - start);
    std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(start));
  }
}

const PayloadProfile& default_profile(TrafficKind kind) {
  static const std::map<TrafficKind, PayloadProfile> defaults = {
      {TrafficKind::TcpHttp, {EntropyRegime::Low, {120, 240}, 8}},
      {TrafficKind::TcpHttps, {EntropyRegime::High, {256, 512}, 16}},
      {TrafficKind::UdpDns, {EntropyRegime::Low, {32, 48, 90}, 4}},
      {TrafficKind::UdpMdns, {EntropyRegime::Low, {80, 200}, 6}},
      {TrafficKind::UdpSsdp, {EntropyRegime::Low, {300, 420}, 10}},
      {TrafficKind::UdpNtp, {EntropyRegime::High, {48}, 0}},
      {TrafficKind::UdpDhcp, {EntropyRegime::Low, {300}, 0}},
      {TrafficKind::Eapol, {EntropyRegime::High, {95, 121}, 0}},
      {TrafficKind::Arp, {EntropyRegime::Low, {0}, 0}},
      {TrafficKind::Icmp, {EntropyRegime::Low, {56}, 0}},
  };
  return defaults.at(kind);
}

const MacAddress kGatewayMac{0x02, 0x00, 0x5e, 0x00, 0x00, 0x01};
const MacAddress kBroadcastMac{0xff, 0xff, 0xff, 0xff, 0xff, 0xff};
const MacAddress kPaeGroupMac{0x01, 0x80, 0xc2, 0x00, 0x00, 0x03};
const MacAddress kMdnsMac{0x01, 0x00, 0x5e, 0x00, 0x00, 0xfb};
const MacAddress kSsdpMac{0x01, 0x00, 0x5e, 0x7f, 0xff, 0xfa};
const MacAddress kResponderMac{0x02, 0x00, 0x5e, 0x00, 0x00, 0x32};

const IpAddress kGatewayIp = IpAddress::v4(10, 0, 0, 1);
const IpAddress kCloudIp = IpAddress::v4(93, 184, 216, 34);
const IpAddress kMdnsIp = IpAddress::v4(224, 0, 0, 251);
const IpAddress kSsdpIp = IpAddress::v4(239, 255, 255, 250);
const IpAddress kResponderIp = IpAddress::v4(10, 0, 0, 50);
const IpAddress kBroadcastIp = IpAddress::v4(255, 255, 255, 255);

constexpr std::uint16_t kPeerWindow = 64240;
constexpr std::uint16_t kEphemeralBase = 49152;
constexpr std::uint16_t kEphemeralSpan = 16384;

struct Endpoints {
  std::uint16_t device_port = 0;
  std::uint16_t service_port = 0;
};

class TraceBuilder {
 public:
  TraceBuilder(const DeviceArchetype& arch, std::uint64_t seed)
      : arch_(arch), rng_(seed), next_port_(static_cast<std::uint16_t>(rng_.below(kEphemeralSpan))) {
    now_.seconds = 1'500'000'000 + static_cast<std::int64_t>(seed % 100'000);
    now_.microseconds = 0;
    for (const auto& [kind, w] : arch_.protocol_mix) {
      kinds_.push_back(kind);
      weights_.push_back(w);
    }
  }

  Trace build(std::size_t n) {
    Trace trace;
    trace.frames.reserve(n);
    while (trace.frames.size() < n) {
      const TrafficKind kind = kinds_[rng_.weighted(weights_)];
      const std::size_t remaining = n - trace.frames.size();
      if (arch_.sessionless) {
        emit_session(trace, kind, 1, /*fresh_ports=*/true, remaining);
      } else {
        const std::size_t length = kMinSessionLength + rng_.weighted(arch_.session_length_weights);
        emit_session(trace, kind, length, false, remaining);
      }
      advance(500'000, 5'000'000);
    }
    trace.labels.assign(trace.frames.size(), arch_.name);
    return trace;
  }

 private:
  void advance(std::int64_t min_us, std::int64_t max_us) {
    const std::int64_t total = now_.microseconds + rng_.between(min_us, max_us);
    now_.seconds += total / 1'000'000;
    now_.microseconds = static_cast<std::uint32_t>(total % 1'000'000);
  }

  std::uint16_t ephemeral_port() {
    const auto port = static_cast<std::uint16_t>(kEphemeralBase + next_port_);
    next_port_ = static_cast<std::uint16_t>((next_port_ + 1) % kEphemeralSpan);
    return port;
  }

  Endpoints ports_for(TrafficKind kind, bool fresh) {
    switch (kind) {
      case TrafficKind::TcpHttp: return {ephemeral_port(), 80};
      case TrafficKind::TcpHttps: return {ephemeral_port(), 443};
      case TrafficKind::UdpDns: return {ephemeral_port(), 53};
      case TrafficKind::UdpMdns: return {fresh ? ephemeral_port() : std::uint16_t{5353}, 5353};
      case TrafficKind::UdpSsdp: return {ephemeral_port(), 1900};
      case TrafficKind::UdpNtp: return {ephemeral_port(), 123};
      case TrafficKind::UdpDhcp: return {68, 67};
      default: return {};
    }
  }

  const PayloadProfile& profile(TrafficKind kind) const {
    const auto it = arch_.payloads.find(kind);
    return it != arch_.payloads.end() ? it->second : default_profile(kind);
  }

  std::vector<std::uint8_t> payload(TrafficKind kind) {
    const auto& p = profile(kind);
    std::int64_t length = p.lengths[rng_.below(p.lengths.size())];
    if (p.jitter > 0) length += rng_.between(-p.jitter, p.jitter);
    length = std::clamp<std::int64_t>(length, 0, 1460);
    std::vector<std::uint8_t> bytes;
    fill_payload(rng_, p.regime, static_cast<std::size_t>(length), bytes);
    return bytes;
  }

  std::uint16_t device_window() {
    const auto& w = arch_.window;
    std::int64_t value = w.values[rng_.below(w.values.size())];
    if (w.jitter > 0) value += rng_.between(-w.jitter, w.jitter);
    return static_cast<std::uint16_t>(std::clamp<std::int64_t>(value, 1, 65535));
  }

  void emit_session(Trace& trace, TrafficKind kind, std::size_t length, bool fresh_ports,
                    std::size_t remaining) {
    const Endpoints ports = ports_for(kind, fresh_ports);
    const bool has_ports = ports.service_port != 0;
    const std::size_t count = std::min(length, remaining);
    if (has_ports && count > 0) {
      trace.session_ports.push_back(std::minmax(ports.device_port, ports.service_port));
    }
    // Conduit traffic flows either way; sessions always open outbound.
    const bool start_inbound = fresh_ports && rng_.below(2) == 1;
    for (std::size_t i = 0; i < count; ++i) {
      const bool outbound = ((i % 2) == 0) != start_inbound;
      RawFrame frame;
      frame.timestamp = now_;
      frame.data = build_frame(kind, ports, outbound);
      frame.original_length = frame.capture_length();
      trace.frames.push_back(std::move(frame));
      advance(1'000, 50'000);
    }
  }

  std::vector<std::uint8_t> build_frame(TrafficKind kind, const Endpoints& ports, bool outbound) {
    const auto body = payload(kind);
    switch (kind) {
      case TrafficKind::TcpHttp:
      case TrafficKind::TcpHttps: {
        const auto seg = outbound ? frames::tcp(ports.device_port, ports.service_port, device_window(), body)
                                  : frames::tcp(ports.service_port, ports.device_port, kPeerWindow, body);
        return ip_frame(kGatewayMac, kCloudIp, outbound, 6, seg);
      }
      case TrafficKind::UdpDns:
      case TrafficKind::UdpNtp:
      case TrafficKind::UdpDhcp: {
        const auto dgram = outbound ? frames::udp(ports.device_port, ports.service_port, body)
                                    : frames::udp(ports.service_port, ports.device_port, body);
        if (kind == TrafficKind::UdpDhcp && outbound) {
          return frames::ethernet(kBroadcastMac, arch_.mac, kEtherTypeIPv4,
                                  frames::ipv4(arch_.ip, kBroadcastIp, 17, dgram));
        }
        return ip_frame(kGatewayMac, kind == TrafficKind::UdpNtp ? kCloudIp : kGatewayIp, outbound, 17, dgram);
      }
      case TrafficKind::UdpMdns:
      case TrafficKind::UdpSsdp: {
        const bool mdns = kind == TrafficKind::UdpMdns;
        if (outbound) {
          const auto dgram = frames::udp(ports.device_port, ports.service_port, body);
          return frames::ethernet(mdns ? kMdnsMac : kSsdpMac, arch_.mac, kEtherTypeIPv4,
                                  frames::ipv4(arch_.ip, mdns ? kMdnsIp : kSsdpIp, 17, dgram));
        }
        const auto dgram = frames::udp(ports.service_port, ports.device_port, body);
        return ip_frame(kResponderMac, kResponderIp, false, 17, dgram);
      }
      case TrafficKind::Eapol: {
        const auto msg = frames::eapol(3, body);  // EAPOL-Key
        return outbound ? frames::ethernet(kPaeGroupMac, arch_.mac, kEtherTypeEAPoL, msg)
                        : frames::ethernet(arch_.mac, kGatewayMac, kEtherTypeEAPoL, msg);
      }
      case TrafficKind::Arp: {
        if (outbound) {
          return frames::ethernet(kBroadcastMac, arch_.mac, kEtherTypeARP,
                                  frames::arp_request(arch_.mac, arch_.ip, kGatewayIp));
        }
        return frames::ethernet(arch_.mac, kGatewayMac, kEtherTypeARP,
                                frames::arp_request(kGatewayMac, kGatewayIp, arch_.ip));
      }
      case TrafficKind::Icmp: {
        const auto msg = frames::icmp(outbound ? 8 : 0, 0, body);
        return ip_frame(kGatewayMac, kGatewayIp, outbound, 1, msg);
      }
    }
    return {};
  }

  std::vector<std::uint8_t> ip_frame(const MacAddress& peer_mac, const IpAddress& peer_ip, bool outbound,
                                     std::uint8_t protocol, std::span<const std::uint8_t> l4) {
    if (outbound) {
      return frames::ethernet(peer_mac, arch_.mac, kEtherTypeIPv4, frames::ipv4(arch_.ip, peer_ip, protocol, l4));
    }
    return frames::ethernet(arch_.mac, peer_mac, kEtherTypeIPv4, frames::ipv4(peer_ip, arch_.ip, protocol, l4));
  }

  const DeviceArchetype& arch_;
  Rng rng_;
  std::uint16_t next_port_;
  Timestamp now_;
  std::vector<TrafficKind> kinds_;
  std::vector<double> weights_;
};

std::array<double, 9> session_weights(std::size_t lo, std::size_t hi) {
  std::array<double, 9> w{};
  for (std::size_t len = lo; len <= hi; ++len) w[len - kMinSessionLength] = 1.0 / static_cast<double>(hi - lo + 1);
  return w;
}

}  // namespace

std::vector<std::uint8_t> generate_payload(EntropyRegime regime, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> out;
  fill_payload(rng, regime, length, out);
  return out;
}

Trace generate_trace(const DeviceArchetype& archetype, std::size_t n_packets, std::uint64_t seed) {
  archetype.validate();
  return TraceBuilder(archetype, seed).build(n_packets);
}

std::vector<DeviceArchetype> standard_archetypes() {
  using K = TrafficKind;
  using R = EntropyRegime;
  std::vector<DeviceArchetype> out;

  DeviceArchetype bulb;
  bulb.name = "constrained-bulb";
  bulb.category = "Light";
  bulb.mac = {0x50, 0xc7, 0xbf, 0x10, 0x00, 0x01};
  bulb.ip = IpAddress::v4(10, 0, 0, 11);
  bulb.protocol_mix = {{K::TcpHttp, 0.7}, {K::UdpDhcp, 0.1}, {K::Arp, 0.2}};
  bulb.payloads = {{K::TcpHttp, {R::Low, {24, 36, 52}, 2}}, {K::UdpDhcp, {R::Low, {12}, 0}}};
  bulb.window = {{512, 1024}, 0};
  bulb.session_length_weights = session_weights(2, 4);
  out.push_back(bulb);

  DeviceArchetype hue;
  hue.name = "hue-bulb";
  hue.category = "Light";
  hue.mac = {0x00, 0x17, 0x88, 0x20, 0x00, 0x02};
  hue.ip = IpAddress::v4(10, 0, 0, 12);
  hue.protocol_mix = {{K::TcpHttp, 0.65}, {K::UdpSsdp, 0.35}};
  hue.payloads = {{K::TcpHttp, {R::Low, {180, 260, 310}, 10}}, {K::UdpSsdp, {R::Low, {300, 420}, 10}}};
  hue.window = {{4096, 8192}, 0};
  hue.session_length_weights = session_weights(4, 8);
  out.push_back(hue);

  DeviceArchetype camera;
  camera.name = "camera-streamer";
  camera.category = "Camera";
  camera.mac = {0xb0, 0xc5, 0x54, 0x30, 0x00, 0x03};
  camera.ip = IpAddress::v4(10, 0, 0, 13);
  camera.protocol_mix = {{K::TcpHttps, 0.9}, {K::UdpDns, 0.1}};
  camera.payloads = {{K::TcpHttps, {R::High, {1200, 1360, 1448}, 40}}, {K::UdpDns, {R::High, {200}, 0}}};
  camera.window = {{29200, 42340}, 2000};
  camera.session_length_weights = session_weights(6, 10);
  out.push_back(camera);

  DeviceArchetype hub;
  hub.name = "hub-conduit";
  hub.category = "Hub";
  hub.mac = {0xd0, 0x52, 0xa8, 0x40, 0x00, 0x04};
  hub.ip = IpAddress::v4(10, 0, 0, 14);
  hub.protocol_mix = {{K::TcpHttps, 0.55}, {K::UdpMdns, 0.25}, {K::Eapol, 0.1}, {K::Arp, 0.1}};
  hub.payloads = {{K::TcpHttps, {R::High, {600, 900}, 12}},
                  {K::UdpMdns, {R::High, {100}, 0}},
                  {K::Eapol, {R::High, {32}, 0}}};
  hub.window = {{14600}, 0};
  hub.sessionless = true;
  out.push_back(hub);

  DeviceArchetype speaker;
  speaker.name = "speaker";
  speaker.category = "Music Player";
  speaker.mac = {0x44, 0x65, 0x0d, 0x50, 0x00, 0x05};
  speaker.ip = IpAddress::v4(10, 0, 0, 15);
  speaker.protocol_mix = {{K::TcpHttps, 0.6}, {K::UdpMdns, 0.25}, {K::Icmp, 0.15}};
  speaker.payloads = {{K::TcpHttps, {R::High, {300, 400}, 16}},
                      {K::UdpMdns, {R::Low, {120, 340}, 8}},
                      {K::Icmp, {R::High, {16}, 0}}};
  speaker.window = {{16384}, 512};
  speaker.session_length_weights = session_weights(2, 6);
  out.push_back(speaker);

  DeviceArchetype outlet;
  outlet.name = "outlet";
  outlet.category = "Outlet";
  outlet.mac = {0x94, 0x10, 0x3e, 0x60, 0x00, 0x06};
  outlet.ip = IpAddress::v4(10, 0, 0, 16);
  outlet.protocol_mix = {{K::TcpHttps, 0.65}, {K::Eapol, 0.15}, {K::UdpNtp, 0.2}};
  outlet.payloads = {{K::TcpHttps, {R::High, {64, 96, 128}, 4}},
                     {K::Eapol, {R::High, {121}, 0}},
                     {K::UdpNtp, {R::High, {8}, 0}}};
  outlet.window = {{5840}, 0};
  outlet.session_length_weights = session_weights(2, 10);
  out.push_back(outlet);

  return out;
}

const DeviceArchetype& find_archetype(std::span<const DeviceArchetype> archetypes, std::string_view name) {
  for (const auto& a : archetypes) {
    if (a.name == name) return a;
  }
  throw Error(ErrorKind::UnknownLabel, "unknown archetype '" + std::string(name) + "'");
}

std::vector<CorpusEntry> standard_corpus(std::uint64_t seed, std::size_t packets_per_trace) {
  const auto archetypes = standard_archetypes();
  std::vector<CorpusEntry> corpus;
  std::uint64_t stream = 0;
  for (const auto& arch : archetypes) {
    const std::uint64_t trace_seed = seed * 1000 + (++stream);
    if (arch.name == kTwinArchetype) {
      corpus.push_back({arch, arch.name + "-a", generate_trace(arch, packets_per_trace, trace_seed)});
      DeviceArchetype twin = arch;
      twin.mac[5] ^= 0x80;
      corpus.push_back({twin, arch.name + "-b", generate_trace(twin, packets_per_trace, seed * 1000 + 500)});
    } else {
      corpus.push_back({arch, arch.name, generate_trace(arch, packets_per_trace, trace_seed)});
    }
  }
  return corpus;
}

std::vector<BehavioralProfile> corpus_profiles(std::span<const CorpusEntry> corpus) {
  std::vector<BehavioralProfile> profiles;
  for (const auto& entry : corpus) {
    DeviceSelector selector;
    selector.mac = entry.archetype.mac;
    profiles.push_back(build_profile_from_frames(entry.trace.frames, selector, entry.archetype.name,
                                                 entry.archetype.category, entry.instance_label,
                                                 entry.instance_label + ".pcap"));
  }
  return profiles;
}

std::string labels_to_json(std::string_view capture_name, std::span<const std::string> labels) {
  const json doc = {
      {"schema", kLabelsSchemaVersion},
      {"capture", capture_name},
      {"labels", std::vector<std::string>(labels.begin(), labels.end())},
  };
  return doc.dump() + '\n';
}

void write_labels(const std::filesystem::path& path, std::string_view capture_name,
                  std::span<const std::string> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out << labels_to_json(capture_name, labels);
  if (!out) throw Error(ErrorKind::IoFailure, "write error on " + path.string());
}

std::filesystem::path write_corpus(const std::filesystem::path& dir, std::span<const CorpusEntry> corpus) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  json entries = json::array();
  for (const auto& e : corpus) {
    const std::string pcap_name = e.instance_label + ".pcap";
    const std::string labels_name = e.instance_label + ".labels.json";
    write_capture(dir / pcap_name, e.trace.frames);
    write_labels(dir / labels_name, pcap_name, e.trace.labels);
    entries.push_back({{"instance", e.instance_label},
                       {"archetype", e.archetype.name},
                       {"category", e.archetype.category},
                       {"mac", format_mac(e.archetype.mac)},
                       {"ip", format_ip(e.archetype.ip)},
                       {"pcap", pcap_name},
                       {"labels", labels_name},
                       {"packets", e.trace.frames.size()}});
  }
  const auto manifest = dir / "corpus.json";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + manifest.string() + " for writing");
  out << json{{"schema", kCorpusSchemaVersion}, {"entries", std::move(entries)}}.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::IoFailure, "write error on " + manifest.string());
  return manifest;
}

}  // namespace iotfp::synth
