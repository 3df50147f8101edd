#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "coopsearch/grid_world.hpp"

namespace coopsearch {

// One pose sample as it travels on the wire (single precision).
struct StateRecord {
  float x = 0.0f;
  float y = 0.0f;
  float heading = 0.0f;
  float t = -1.0f;

  bool operator==(const StateRecord&) const = default;
};

// Most recent `capacity` records of one UAV, oldest first.
class History {
 public:
  explicit History(std::size_t capacity = 100) : capacity_(capacity) {}

  // Throws std::invalid_argument unless rec.t is newer than latest().
  void push(const StateRecord& rec);
  void assign(std::vector<StateRecord> records);

  float latest() const { return records_.empty() ? -1.0f : records_.back().t; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<StateRecord>& records() const { return records_; }
  const StateRecord& back() const { return records_.back(); }

  bool operator==(const History&) const = default;

 private:
  std::size_t capacity_;
  std::deque<StateRecord> records_;
};

struct TargetEntry {
  float x = 0.0f;
  float y = 0.0f;
  float t = -1.0f;

  bool filled() const { return t >= 0.0f; }
  bool operator==(const TargetEntry&) const = default;
};

// Per-UAV knowledge base: one history per UAV slot plus the target table.
class InfoStore {
 public:
  InfoStore() = default;
  InfoStore(int n_uav, int history, int n_targets);

  int n_uav() const { return static_cast<int>(histories_.size()); }
  int n_targets() const { return static_cast<int>(targets_.size()); }
  std::size_t history_capacity() const { return capacity_; }

  History& history(int slot) { return histories_.at(static_cast<std::size_t>(slot)); }
  const History& history(int slot) const { return histories_.at(static_cast<std::size_t>(slot)); }
  const std::vector<TargetEntry>& targets() const { return targets_; }
  std::vector<TargetEntry>& targets() { return targets_; }

  void record(int slot, const StateRecord& rec) { history(slot).push(rec); }
  // Fills an empty slot; returns false if the slot was already filled.
  bool confirm_target(int slot, const TargetEntry& entry);
  int targets_confirmed() const;

  bool operator==(const InfoStore&) const = default;

 private:
  std::size_t capacity_ = 0;
  std::vector<History> histories_;
  std::vector<TargetEntry> targets_;
};

inline constexpr std::uint32_t kWireMagic = 0x53564155;  // "UAVS"
inline constexpr std::uint32_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 6 * 4;

struct MessagePackage {
  std::uint32_t sender = 0;
  std::uint32_t history = 0;
  std::vector<std::vector<StateRecord>> histories;  // per UAV slot, oldest first, unpadded
  std::vector<TargetEntry> targets;

  bool operator==(const MessagePackage&) const = default;
};

// Bytes occupied by the state and target matrices alone.
std::size_t payload_bytes(std::size_t history, std::size_t n_uav, std::size_t n_targets);
std::size_t package_bytes(std::size_t history, std::size_t n_uav, std::size_t n_targets);

// Layout (all little-endian, 4 bytes per field):
//   header: magic, version, sender, H, N_U, N_T (uint32)
//   N_U state matrices: H records of (x, y, heading, t) float32, oldest
//     first, unused records padded as (0, 0, 0, -1)
//   target matrix: N_T entries of (x, y, t) float32, empty entries (0, 0, -1)
std::vector<std::uint8_t> encode(const InfoStore& store, std::uint32_t sender);
// Throws WireFormatError on a bad header, length, or record ordering.
MessagePackage decode(std::span<const std::uint8_t> bytes);

struct ReplayRecord {
  int uav = 0;
  StateRecord record;
};

struct MergeResult {
  std::vector<ReplayRecord> replay;  // newly acquired poses
  std::vector<int> replaced;         // UAV slots whose history was replaced
  std::vector<int> new_targets;      // target slots newly filled or refreshed
  std::uint64_t dropped_records = 0;  // poses between the local latest and the incoming window
};

// Latest-timestamp-wins: a UAV's history is replaced wholesale when the
// incoming latest timestamp is newer; target slots likewise. `dt` is the
// nominal record spacing used to size dropped-record gaps.
MergeResult merge(InfoStore& local, const MessagePackage& incoming, double dt = 1.0);

struct ReplayStats {
  std::size_t poses = 0;
  std::size_t cells = 0;
  double chi_drop = 0.0;  // total decrease of chi over the replayed coverings
};

// Re-applies remote coverings to a local map, oldest first. Cells holding a
// target entry stamped with the same time as the pose take the detection
// branch; all others take the miss branch. `fov_by_uav[slot]` may be null for
// UAVs without a sensor.
ReplayStats replay_detections(SearchMap& map, std::vector<ReplayRecord> replay,
                              std::span<FootprintCache* const> fov_by_uav, std::span<const TargetEntry> targets,
                              const SensorModel& sensor, double delta_p);

struct CommNode {
  bool alive = true;
  Vec2 pos;
  double altitude = 0.0;
  double range = 0.0;  // metres; +inf for unconstrained links
};

struct Link {
  int a = 0;
  int b = 0;

  bool operator==(const Link&) const = default;
};

// Pairs (a < b) of alive nodes whose 3-D separation is within the longer of
// the two ranges, so a long-range node can reach short-range ones.
std::vector<Link> compute_links(std::span<const CommNode> nodes);

struct Delivery {
  std::vector<Link> links;
  std::vector<MergeResult> received;  // per node, merged over all senders
  std::uint64_t bytes = 0;
  std::uint64_t decode_failures = 0;
};

// One synchronous exchange round: every alive node's package is encoded from
// its pre-round store, then each linked pair merges the other's package,
// receivers and senders in ascending order.
Delivery deliver(std::span<InfoStore> stores, std::span<const CommNode> nodes, double dt = 1.0);

}  // namespace coopsearch
