#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "exocap/stream_sync.hpp"

namespace exocap {

/// Episode directory layout:
///
///   <episode>/manifest.txt        key: value text (see write_manifest)
///   <episode>/<stream_id>.chunk   one per roster stream
///
/// Chunk file, all integers little-endian:
///   header  "EXVH" | u16 version (=1) | u8 stream kind
///   body    per record: u64 timestamp_ns | u32 payload_len | payload
///   footer  u32 CRC-32 (IEEE) of the body bytes
///
/// payload_len 0 is the gap marker. Payloads: pose = 7 f64 (tx ty tz qw qx qy
/// qz); joints = n f64; frame = u16 encoding | u32 width | u32 height | bytes.
/// Record timestamps are master tick times; tick i sits at
/// tick_origin_ns + round(i · 1e9 / tick_rate_hz).
inline constexpr char kChunkMagic[4] = {'E', 'X', 'V', 'H'};
inline constexpr std::uint16_t kChunkVersion = 1;
inline constexpr std::size_t kChunkHeaderSize = 7;
inline constexpr std::size_t kChunkFooterSize = 4;
inline constexpr std::size_t kRecordHeaderSize = 12;

struct EpisodeMeta {
  std::string task_name;
  std::string operator_id;
  std::string start_time;  // wall clock, ISO-8601 text
  double duration_s = 0.0;
  bool success = false;
  double tick_rate_hz = 30.0;
  std::int64_t tick_origin_ns = 0;
  std::vector<StreamDescriptor> roster;

  // Filled by finalize.
  std::uint64_t record_count = 0;
  bool complete = false;

  bool empty() const { return record_count == 0; }
};

using EpisodeRecord = SyncedFrame;

std::string manifest_text(const EpisodeMeta& meta);
EpisodeMeta parse_manifest(std::string_view text);

class EpisodeWriter {
 public:
  ~EpisodeWriter();
  EpisodeWriter(const EpisodeWriter&) = delete;
  EpisodeWriter& operator=(const EpisodeWriter&) = delete;
  EpisodeWriter(EpisodeWriter&&) noexcept;
  EpisodeWriter& operator=(EpisodeWriter&&) noexcept;

  /// Creates `root/name` (or the first free `root/episode_NNNN` when name is
  /// empty) with chunk headers and an open manifest.
  /// Throws InvalidRoster or IoError.
  static EpisodeWriter begin(EpisodeMeta meta, const std::filesystem::path& root, const std::string& name = {});

  /// Throws TickOrderError, SizeMismatch, WriterClosed or IoError.
  void append(const EpisodeRecord& record);
  /// Writes chunk footers and the completed manifest. A second call throws
  /// WriterClosed.
  EpisodeMeta finalize();

  const std::filesystem::path& path() const;
  std::uint64_t record_count() const;

 private:
  struct State;
  explicit EpisodeWriter(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;
};

/// Lazily yields the records of a finalized episode in tick order. Opening
/// verifies every chunk's header and CRC before any record is returned.
class EpisodeReader {
 public:
  ~EpisodeReader();
  EpisodeReader(EpisodeReader&&) noexcept;
  EpisodeReader& operator=(EpisodeReader&&) noexcept;

  /// Throws ChecksumMismatch, FormatVersionUnsupported, FormatError, IoError.
  static EpisodeReader open(const std::filesystem::path& episode_dir);

  const EpisodeMeta& meta() const;
  std::optional<EpisodeRecord> next();

 private:
  struct State;
  explicit EpisodeReader(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;
};

inline EpisodeReader load_episode(const std::filesystem::path& episode_dir) {
  return EpisodeReader::open(episode_dir);
}

std::vector<EpisodeRecord> read_all_records(const std::filesystem::path& episode_dir);

struct ValidationReport {
  std::uint64_t records = 0;
  std::uint64_t gaps = 0;
};

/// Full audit: manifest, chunk headers, CRCs, record layout, tick order,
/// payload sizes and the manifest record count. Throws on the first failure.
ValidationReport validate_episode(const std::filesystem::path& episode_dir);

enum class ChecksumStatus { unchecked, ok, failed };

struct DatasetEntry {
  std::filesystem::path path;
  EpisodeMeta meta;
  std::uint64_t record_count = 0;
  ChecksumStatus checksum = ChecksumStatus::unchecked;
};

struct DatasetIndex {
  std::vector<DatasetEntry> episodes;
};

/// Every directory directly under `root` that holds a manifest. With
/// `verify`, each episode is validated and its checksum status recorded.
DatasetIndex build_index(const std::filesystem::path& root, bool verify = false);

struct TaskStats {
  double mean_duration_s = 0.0;
  double stddev_duration_s = 0.0;  // sample (n−1) convention; 0 for n = 1
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double success_rate = 0.0;
};

/// Statistics over the completed episodes of one task. Throws NoSuchTask.
TaskStats task_stats(const DatasetIndex& index, const std::string& task_name);

/// "4.8 ± 0.9  29/30  96.7%"
std::string format_task_stats(const TaskStats& stats);

std::vector<std::byte> encode_payload(const StreamValue& value);
StreamValue decode_payload(StreamKind kind, std::span<const std::byte> bytes);

}  // namespace exocap
