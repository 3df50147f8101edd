#include "coopsearch/comms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coopsearch/errors.hpp"

namespace coopsearch {

void History::push(const StateRecord& rec) {
  if (!records_.empty() && !(rec.t > records_.back().t)) {
    throw std::invalid_argument("history records must have increasing timestamps");
  }
  records_.push_back(rec);
  while (records_.size() > capacity_) records_.pop_front();
}

void History::assign(std::vector<StateRecord> records) {
  records_.assign(records.begin(), records.end());
  while (records_.size() > capacity_) records_.pop_front();
}

InfoStore::InfoStore(int n_uav, int history, int n_targets)
    : capacity_(static_cast<std::size_t>(history)),
      histories_(static_cast<std::size_t>(n_uav), History(static_cast<std::size_t>(history))),
      targets_(static_cast<std::size_t>(n_targets)) {}

bool InfoStore::confirm_target(int slot, const TargetEntry& entry) {
  auto& t = targets_.at(static_cast<std::size_t>(slot));
  if (t.filled()) return false;
  t = entry;
  return true;
}

int InfoStore::targets_confirmed() const {
  return static_cast<int>(std::count_if(targets_.begin(), targets_.end(), [](const auto& t) { return t.filled(); }));
}

std::size_t payload_bytes(std::size_t history, std::size_t n_uav, std::size_t n_targets) {
  return (4 * history * n_uav + 3 * n_targets) * 4;
}

std::size_t package_bytes(std::size_t history, std::size_t n_uav, std::size_t n_targets) {
  return kWireHeaderBytes + payload_bytes(history, n_uav, n_targets);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    if (pos_ + 4 > bytes_.size()) throw WireFormatError("truncated package");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() {
    const float v = std::bit_cast<float>(u32());
    if (!std::isfinite(v)) throw WireFormatError("non-finite field");
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kMaxDim = 1u << 16;

}  // namespace

std::vector<std::uint8_t> encode(const InfoStore& store, std::uint32_t sender) {
  const auto h = store.history_capacity();
  const auto n_u = static_cast<std::size_t>(store.n_uav());
  const auto n_t = static_cast<std::size_t>(store.n_targets());
  std::vector<std::uint8_t> out;
  out.reserve(package_bytes(h, n_u, n_t));
  put_u32(out, kWireMagic);
  put_u32(out, kWireVersion);
  put_u32(out, sender);
  put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(n_u));
  put_u32(out, static_cast<std::uint32_t>(n_t));
  for (std::size_t c = 0; c < n_u; ++c) {
    const auto& recs = store.history(static_cast<int>(c)).records();
    std::size_t k = 0;
    for (const auto& r : recs) {
      put_f32(out, r.x);
      put_f32(out, r.y);
      put_f32(out, r.heading);
      put_f32(out, r.t);
      ++k;
    }
    for (; k < h; ++k) {
      put_f32(out, 0.0f);
      put_f32(out, 0.0f);
      put_f32(out, 0.0f);
      put_f32(out, -1.0f);
    }
  }
  for (const auto& t : store.targets()) {
    put_f32(out, t.filled() ? t.x : 0.0f);
    put_f32(out, t.filled() ? t.y : 0.0f);
    put_f32(out, t.filled() ? t.t : -1.0f);
  }
  return out;
}

MessagePackage decode(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  if (rd.u32() != kWireMagic) throw WireFormatError("bad magic");
  if (rd.u32() != kWireVersion) throw WireFormatError("unsupported version");
  MessagePackage pkg;
  pkg.sender = rd.u32();
  const std::uint32_t h = rd.u32();
  const std::uint32_t n_u = rd.u32();
  const std::uint32_t n_t = rd.u32();
  if (h == 0 || h > kMaxDim || n_u > kMaxDim || n_t > kMaxDim) throw WireFormatError("header dimensions out of range");
  if (bytes.size() != package_bytes(h, n_u, n_t)) {
    throw WireFormatError("length " + std::to_string(bytes.size()) + " does not match header (" +
                          std::to_string(package_bytes(h, n_u, n_t)) + ")");
  }
  pkg.history = h;
  pkg.histories.resize(n_u);
  for (auto& hist : pkg.histories) {
    bool padding = false;
    for (std::uint32_t k = 0; k < h; ++k) {
      StateRecord r{rd.f32(), rd.f32(), rd.f32(), rd.f32()};
      if (r.t == -1.0f) {
        padding = true;
        continue;
      }
      if (padding) throw WireFormatError("record after padding");
      if (r.t < 0.0f) throw WireFormatError("negative timestamp");
      if (!hist.empty() && !(r.t > hist.back().t)) throw WireFormatError("timestamps not increasing");
      hist.push_back(r);
    }
  }
  pkg.targets.resize(n_t);
  for (auto& t : pkg.targets) {
    t = {rd.f32(), rd.f32(), rd.f32()};
    if (t.t < 0.0f && t.t != -1.0f) throw WireFormatError("negative target timestamp");
    if (!t.filled()) t = TargetEntry{};
  }
  return pkg;
}

MergeResult merge(InfoStore& local, const MessagePackage& incoming, double dt) {
  MergeResult res;
  const int n_u = std::min(local.n_uav(), static_cast<int>(incoming.histories.size()));
  for (int c = 0; c < n_u; ++c) {
    const auto& in = incoming.histories[static_cast<std::size_t>(c)];
    if (in.empty()) continue;
    History& mine = local.history(c);
    const float mine_latest = mine.latest();
    if (!(in.back().t > mine_latest)) continue;
    for (const auto& r : in) {
      if (r.t > mine_latest) res.replay.push_back({c, r});
    }
    if (mine_latest >= 0.0f && dt > 0.0) {
      const double gap = std::round((static_cast<double>(in.front().t) - mine_latest) / dt) - 1.0;
      if (gap > 0.0) res.dropped_records += static_cast<std::uint64_t>(gap);
    }
    mine.assign(in);
    res.replaced.push_back(c);
  }
  auto& targets = local.targets();
  const std::size_t n_t = std::min(targets.size(), incoming.targets.size());
  for (std::size_t d = 0; d < n_t; ++d) {
    if (incoming.targets[d].t > targets[d].t) {
      targets[d] = incoming.targets[d];
      res.new_targets.push_back(static_cast<int>(d));
    }
  }
  return res;
}

ReplayStats replay_detections(SearchMap& map, std::vector<ReplayRecord> replay,
                              std::span<FootprintCache* const> fov_by_uav, std::span<const TargetEntry> targets,
                              const SensorModel& sensor, double delta_p) {
  std::stable_sort(replay.begin(), replay.end(), [](const ReplayRecord& a, const ReplayRecord& b) {
    return a.record.t != b.record.t ? a.record.t < b.record.t : a.uav < b.uav;
  });
  const GridSpec& grid = map.grid();
  ReplayStats stats;
  std::vector<std::size_t> cells;
  for (const auto& rr : replay) {
    const auto slot = static_cast<std::size_t>(rr.uav);
    FootprintCache* fov = slot < fov_by_uav.size() ? fov_by_uav[slot] : nullptr;
    if (fov == nullptr || !fov->fov().has_sensor()) continue;
    const Vec2 pos{rr.record.x, rr.record.y};
    if (!grid.contains(pos)) continue;
    const Cell cell = world_to_grid(grid, pos);
    std::vector<std::size_t> hits;
    for (const auto& t : targets) {
      const Vec2 tp{t.x, t.y};
      if (t.filled() && t.t == rr.record.t && grid.contains(tp)) hits.push_back(grid.index(world_to_grid(grid, tp)));
    }
    cells.clear();
    fov->cells(cell, rr.record.heading, cells);
    for (std::size_t idx : cells) {
      const double before = map.chi(idx);
      const bool detection = std::find(hits.begin(), hits.end(), idx) != hits.end();
      map.observe(idx, detection, sensor, delta_p);
      stats.chi_drop += before - map.chi(idx);
    }
    stats.cells += cells.size();
    ++stats.poses;
  }
  return stats;
}

std::vector<Link> compute_links(std::span<const CommNode> nodes) {
  std::vector<Link> links;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (!nodes[a].alive) continue;
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (!nodes[b].alive) continue;
      const double dz = nodes[a].altitude - nodes[b].altitude;
      const double d = std::hypot(distance(nodes[a].pos, nodes[b].pos), dz);
      if (d <= std::max(nodes[a].range, nodes[b].range)) links.push_back({static_cast<int>(a), static_cast<int>(b)});
    }
  }
  return links;
}

Delivery deliver(std::span<InfoStore> stores, std::span<const CommNode> nodes, double dt) {
  Delivery out;
  out.links = compute_links(nodes);
  out.received.resize(stores.size());
  if (out.links.empty()) return out;
  std::vector<std::vector<std::uint8_t>> packages(stores.size());
  for (std::size_t i = 0; i < stores.size(); ++i) {
    if (i < nodes.size() && nodes[i].alive) packages[i] = encode(stores[i], static_cast<std::uint32_t>(i));
  }
  std::vector<std::vector<int>> senders(stores.size());
  for (const Link& l : out.links) {
    senders[static_cast<std::size_t>(l.b)].push_back(l.a);
    senders[static_cast<std::size_t>(l.a)].push_back(l.b);
  }
  for (std::size_t rx = 0; rx < stores.size(); ++rx) {
    auto& from = senders[rx];
    std::sort(from.begin(), from.end());
    for (int tx : from) {
      const auto& bytes = packages[static_cast<std::size_t>(tx)];
      out.bytes += bytes.size();
      MessagePackage pkg;
      try {
        pkg = decode(bytes);
      } catch (const WireFormatError&) {
        ++out.decode_failures;
        continue;
      }
      MergeResult m = merge(stores[rx], pkg, dt);
      auto& acc = out.received[rx];
      acc.replay.insert(acc.replay.end(), m.replay.begin(), m.replay.end());
      acc.replaced.insert(acc.replaced.end(), m.replaced.begin(), m.replaced.end());
      acc.new_targets.insert(acc.new_targets.end(), m.new_targets.begin(), m.new_targets.end());
      acc.dropped_records += m.dropped_records;
    }
  }
  return out;
}

}  // namespace coopsearch
