#include "exocap/episode_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "exocap/error.hpp"
#include "exocap/kv_text.hpp"
#include "exocap/le_io.hpp"

namespace exocap {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestName = "manifest.txt";
constexpr std::string_view kManifestFormat = "exvh-episode";
constexpr std::uint64_t kManifestVersion = 1;

std::uint32_t crc_update(std::uint32_t crc, std::span<const std::byte> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void check_text_field(const std::string& value, std::string_view what) {
  if (value.find_first_of("\n\r#") != std::string::npos) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must not contain newlines or '#'");
  }
}

fs::path chunk_path(const fs::path& dir, const StreamDescriptor& desc) { return dir / (desc.stream_id + ".chunk"); }

void validate_roster(const std::vector<StreamDescriptor>& roster) {
  if (roster.empty()) fail(ErrorCode::InvalidRoster, "episode roster is empty");
  std::set<std::string> ids;
  for (const auto& d : roster) {
    try {
      validate_descriptor(d);
    } catch (const Error& e) {
      fail(ErrorCode::InvalidRoster, e.what());
    }
    if (!ids.insert(d.stream_id).second) fail(ErrorCode::InvalidRoster, "duplicate stream '" + d.stream_id + "'");
  }
}

void check_payload(const StreamDescriptor& desc, const StreamValue& value) {
  if (kind_of(value) != desc.kind) {
    fail(ErrorCode::SizeMismatch, "stream '" + desc.stream_id + "' expects " + std::string(to_string(desc.kind)) +
                                      " payloads, got " + std::string(to_string(kind_of(value))));
  }
  if (const auto* joints = std::get_if<JointVector>(&value); joints && joints->size() != desc.channels) {
    fail(ErrorCode::SizeMismatch, "stream '" + desc.stream_id + "' expects " + std::to_string(desc.channels) +
                                      " joints, got " + std::to_string(joints->size()));
  }
  if (const auto* frame = std::get_if<FrameBlob>(&value);
      frame && frame->encoding == kEncodingGray8 &&
      frame->data.size() != static_cast<std::size_t>(frame->width) * frame->height) {
    fail(ErrorCode::SizeMismatch, "stream '" + desc.stream_id + "': gray8 frame size does not match width*height");
  }
}

double tick_duration(std::uint64_t first, std::uint64_t last, double rate_hz) {
  return static_cast<double>(last - first) / rate_hz;
}

void write_file_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

// ---------------------------------------------------------------------------
// Payloads

std::vector<std::byte> encode_payload(const StreamValue& value) {
  std::vector<std::byte> out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Pose>) {
          const auto bytes = encode_pose(v);
          out.assign(bytes.begin(), bytes.end());
        } else if constexpr (std::is_same_v<T, JointVector>) {
          out.reserve(v.size() * 8);
          for (double a : v) le::put(out, a);
        } else {
          out.reserve(10 + v.data.size());
          le::put(out, v.encoding);
          le::put(out, v.width);
          le::put(out, v.height);
          out.insert(out.end(), v.data.begin(), v.data.end());
        }
      },
      value);
  return out;
}

StreamValue decode_payload(StreamKind kind, std::span<const std::byte> bytes) {
  switch (kind) {
    case StreamKind::pose:
      return decode_pose(bytes);
    case StreamKind::joints: {
      if (bytes.size() % 8 != 0) fail(ErrorCode::SizeMismatch, "joint payload is not a multiple of 8 bytes");
      JointVector v(bytes.size() / 8);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = le::get<double>(bytes, i * 8);
      return v;
    }
    case StreamKind::frame: {
      if (bytes.size() < 10) fail(ErrorCode::SizeMismatch, "frame payload shorter than its header");
      FrameBlob f;
      f.encoding = le::get<std::uint16_t>(bytes, 0);
      f.width = le::get<std::uint32_t>(bytes, 2);
      f.height = le::get<std::uint32_t>(bytes, 6);
      f.data.assign(bytes.begin() + 10, bytes.end());
      return f;
    }
  }
  fail(ErrorCode::FormatError, "unknown stream kind");
}

// ---------------------------------------------------------------------------
// Manifest

std::string manifest_text(const EpisodeMeta& meta) {
  std::ostringstream out;
  out << "format: " << kManifestFormat << "\n";
  out << "version: " << kManifestVersion << "\n";
  out << "task_name: " << meta.task_name << "\n";
  out << "operator_id: " << meta.operator_id << "\n";
  out << "start_time: " << meta.start_time << "\n";
  out << "success: " << (meta.success ? "true" : "false") << "\n";
  out << "tick_rate_hz: " << format_double(meta.tick_rate_hz) << "\n";
  out << "tick_origin_ns: " << meta.tick_origin_ns << "\n";
  for (const auto& d : meta.roster) {
    out << "stream: " << d.stream_id << " " << to_string(d.kind) << " " << format_double(d.nominal_rate_hz) << " "
        << d.staleness_budget_ns << " " << d.channels << "\n";
  }
  out << "status: " << (meta.complete ? "complete" : "open") << "\n";
  if (meta.complete) {
    out << "record_count: " << meta.record_count << "\n";
    out << "duration_s: " << format_double(meta.duration_s) << "\n";
    out << "empty: " << (meta.empty() ? "true" : "false") << "\n";
  }
  return out.str();
}

EpisodeMeta parse_manifest(std::string_view text) {
  const KvDocument doc = KvDocument::parse(text);
  const KvEntry* format = doc.find("format");
  const KvEntry* version = doc.find("version");
  if (format == nullptr || format->value != kManifestFormat || version == nullptr ||
      version->value != std::to_string(kManifestVersion)) {
    fail(ErrorCode::FormatVersionUnsupported, "manifest is not an exvh-episode version 1 manifest");
  }
  EpisodeMeta meta;
  meta.task_name = doc.get_string("task_name", "");
  meta.operator_id = doc.get_string("operator_id", "");
  meta.start_time = doc.get_string("start_time", "");
  meta.success = doc.get_bool("success", false);
  meta.tick_rate_hz = doc.require_double("tick_rate_hz");
  const KvEntry& origin = doc.require("tick_origin_ns");
  meta.tick_origin_ns = parse_int(origin.value, origin.line);
  for (const KvEntry* e : doc.all("stream")) {
    const auto tok = e->tokens();
    if (tok.size() != 5) fail(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": malformed stream line");
    StreamDescriptor d;
    d.stream_id = tok[0];
    const auto kind = parse_stream_kind(tok[1]);
    if (!kind) fail(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": unknown stream kind '" + tok[1] + "'");
    d.kind = *kind;
    d.nominal_rate_hz = parse_double(tok[2], e->line);
    d.staleness_budget_ns = parse_int(tok[3], e->line);
    d.channels = static_cast<std::uint32_t>(parse_uint(tok[4], e->line));
    meta.roster.push_back(std::move(d));
  }
  const std::string status = doc.require("status").value;
  if (status == "complete") {
    meta.complete = true;
    meta.record_count = doc.get_uint("record_count", 0);
    meta.duration_s = doc.require_double("duration_s");
  } else if (status != "open") {
    fail(ErrorCode::ParseError, "unknown episode status '" + status + "'");
  }
  return meta;
}

// ---------------------------------------------------------------------------
// Writer

struct EpisodeWriter::State {
  EpisodeMeta meta;
  fs::path dir;
  std::vector<std::ofstream> chunks;
  std::vector<std::uint32_t> crcs;
  std::optional<std::uint64_t> first_tick;
  std::optional<std::uint64_t> last_tick;
  bool closed = false;

  void write_manifest() const { write_file_atomically(dir / kManifestName, manifest_text(meta)); }
};

EpisodeWriter::EpisodeWriter(std::unique_ptr<State> state) : state_(std::move(state)) {}
EpisodeWriter::~EpisodeWriter() = default;
EpisodeWriter::EpisodeWriter(EpisodeWriter&&) noexcept = default;
EpisodeWriter& EpisodeWriter::operator=(EpisodeWriter&&) noexcept = default;

EpisodeWriter EpisodeWriter::begin(EpisodeMeta meta, const fs::path& root, const std::string& name) {
  validate_roster(meta.roster);
  if (!(meta.tick_rate_hz > 0.0) || !std::isfinite(meta.tick_rate_hz)) {
    fail(ErrorCode::InvalidArgument, "tick rate must be positive");
  }
  check_text_field(meta.task_name, "task name");
  check_text_field(meta.operator_id, "operator id");
  check_text_field(meta.start_time, "start time");
  meta.complete = false;
  meta.record_count = 0;
  meta.duration_s = 0.0;

  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) fail(ErrorCode::IoError, "cannot create root " + root.string());

  fs::path dir;
  if (name.empty()) {
    for (int i = 0;; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "episode_%04d", i);
      if (!fs::exists(root / buf)) {
        dir = root / buf;
        break;
      }
    }
  } else {
    dir = root / name;
  }
  if (!fs::create_directory(dir, ec) || ec) {
    fail(ErrorCode::IoError, "cannot create episode directory " + dir.string() +
                                 (ec ? ": " + ec.message() : std::string(": already exists")));
  }

  auto state = std::make_unique<State>();
  state->meta = std::move(meta);
  state->dir = dir;
  for (const auto& d : state->meta.roster) {
    std::ofstream out(chunk_path(dir, d), std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot create " + chunk_path(dir, d).string());
    std::vector<std::byte> header;
    for (char c : kChunkMagic) header.push_back(static_cast<std::byte>(c));
    le::put(header, kChunkVersion);
    le::put(header, static_cast<std::uint8_t>(d.kind));
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    if (!out) fail(ErrorCode::IoError, "cannot write " + chunk_path(dir, d).string());
    state->chunks.push_back(std::move(out));
    state->crcs.push_back(0);
  }
  state->write_manifest();
  return EpisodeWriter(std::move(state));
}

void EpisodeWriter::append(const EpisodeRecord& record) {
  State& s = *state_;
  if (s.closed) fail(ErrorCode::WriterClosed, "episode writer already finalized");
  if (s.last_tick && record.tick_index <= *s.last_tick) {
    fail(ErrorCode::TickOrderError, "tick " + std::to_string(record.tick_index) + " does not follow tick " +
                                        std::to_string(*s.last_tick));
  }
  const auto expected_time = tick_time_ns(record.tick_index, s.meta.tick_rate_hz, s.meta.tick_origin_ns);
  if (record.tick_time_ns != expected_time) {
    fail(ErrorCode::TickOrderError, "tick " + std::to_string(record.tick_index) + " has time " +
                                        std::to_string(record.tick_time_ns) + ", expected " +
                                        std::to_string(expected_time));
  }
  if (record.entries.size() != s.meta.roster.size()) {
    fail(ErrorCode::SizeMismatch, "record has " + std::to_string(record.entries.size()) + " entries, roster has " +
                                      std::to_string(s.meta.roster.size()));
  }
  std::vector<std::vector<std::byte>> encoded;
  encoded.reserve(record.entries.size());
  for (std::size_t i = 0; i < record.entries.size(); ++i) {
    std::vector<std::byte> bytes;
    le::put(bytes, static_cast<std::uint64_t>(record.tick_time_ns));
    if (record.entries[i]) {
      check_payload(s.meta.roster[i], *record.entries[i]);
      const auto payload = encode_payload(*record.entries[i]);
      if (payload.size() > UINT32_MAX) fail(ErrorCode::SizeMismatch, "payload too large");
      le::put(bytes, static_cast<std::uint32_t>(payload.size()));
      bytes.insert(bytes.end(), payload.begin(), payload.end());
    } else {
      le::put(bytes, std::uint32_t{0});
    }
    encoded.push_back(std::move(bytes));
  }
  // All payloads validated before anything touches disk.
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    s.chunks[i].write(reinterpret_cast<const char*>(encoded[i].data()), static_cast<std::streamsize>(encoded[i].size()));
    if (!s.chunks[i]) fail(ErrorCode::IoError, "write failed for stream '" + s.meta.roster[i].stream_id + "'");
    s.crcs[i] = crc_update(s.crcs[i], encoded[i]);
  }
  if (!s.first_tick) s.first_tick = record.tick_index;
  s.last_tick = record.tick_index;
  ++s.meta.record_count;
}

EpisodeMeta EpisodeWriter::finalize() {
  State& s = *state_;
  if (s.closed) fail(ErrorCode::WriterClosed, "episode writer already finalized");
  s.closed = true;
  for (std::size_t i = 0; i < s.chunks.size(); ++i) {
    std::vector<std::byte> footer;
    le::put(footer, s.crcs[i]);
    s.chunks[i].write(reinterpret_cast<const char*>(footer.data()), static_cast<std::streamsize>(footer.size()));
    s.chunks[i].close();
    if (!s.chunks[i]) fail(ErrorCode::IoError, "cannot finish chunk for '" + s.meta.roster[i].stream_id + "'");
  }
  s.meta.duration_s = s.first_tick ? tick_duration(*s.first_tick, *s.last_tick, s.meta.tick_rate_hz) : 0.0;
  s.meta.complete = true;
  s.write_manifest();
  return s.meta;
}

const fs::path& EpisodeWriter::path() const { return state_->dir; }
std::uint64_t EpisodeWriter::record_count() const { return state_->meta.record_count; }

// ---------------------------------------------------------------------------
// Reader

struct EpisodeReader::State {
  struct Chunk {
    std::string name;
    std::ifstream in;
    std::uint64_t offset = 0;
    std::uint64_t body_end = 0;
  };
  EpisodeMeta meta;
  std::vector<Chunk> chunks;
  std::uint64_t yielded = 0;
  std::optional<std::uint64_t> last_tick;
  bool done = false;

  void read_exact(Chunk& c, std::span<std::byte> out) {
    if (c.offset + out.size() > c.body_end) {
      fail(ErrorCode::FormatError, "chunk " + c.name + ": record at offset " + std::to_string(c.offset) +
                                       " runs past the body");
    }
    c.in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!c.in) fail(ErrorCode::IoError, "read failed in chunk " + c.name);
    c.offset += out.size();
  }
};

EpisodeReader::EpisodeReader(std::unique_ptr<State> state) : state_(std::move(state)) {}
EpisodeReader::~EpisodeReader() = default;
EpisodeReader::EpisodeReader(EpisodeReader&&) noexcept = default;
EpisodeReader& EpisodeReader::operator=(EpisodeReader&&) noexcept = default;

EpisodeReader EpisodeReader::open(const fs::path& episode_dir) {
  if (!fs::is_directory(episode_dir)) fail(ErrorCode::IoError, "no episode at " + episode_dir.string());
  auto state = std::make_unique<State>();
  state->meta = parse_manifest(read_text_file((episode_dir / kManifestName).string()));
  if (!state->meta.complete) fail(ErrorCode::FormatError, "episode " + episode_dir.string() + " was never finalized");
  validate_roster(state->meta.roster);

  for (const auto& d : state->meta.roster) {
    State::Chunk c;
    const fs::path p = chunk_path(episode_dir, d);
    c.name = p.filename().string();
    c.in.open(p, std::ios::binary);
    if (!c.in) fail(ErrorCode::IoError, "cannot open chunk " + p.string());
    std::error_code ec;
    const auto size = fs::file_size(p, ec);
    if (ec) fail(ErrorCode::IoError, "cannot stat chunk " + p.string());

    std::array<std::byte, kChunkHeaderSize> header{};
    if (size < kChunkHeaderSize) fail(ErrorCode::FormatVersionUnsupported, "chunk " + c.name + " is too short");
    c.in.read(reinterpret_cast<char*>(header.data()), kChunkHeaderSize);
    if (std::memcmp(header.data(), kChunkMagic, 4) != 0) {
      fail(ErrorCode::FormatVersionUnsupported, "chunk " + c.name + " has unknown magic bytes");
    }
    const auto version = le::get<std::uint16_t>(header, 4);
    if (version != kChunkVersion) {
      fail(ErrorCode::FormatVersionUnsupported, "chunk " + c.name + " has unsupported version " + std::to_string(version));
    }
    if (le::get<std::uint8_t>(header, 6) != static_cast<std::uint8_t>(d.kind)) {
      fail(ErrorCode::FormatError, "chunk " + c.name + " kind does not match the manifest roster");
    }
    if (size < kChunkHeaderSize + kChunkFooterSize) fail(ErrorCode::FormatError, "chunk " + c.name + " has no footer");
    c.body_end = size - kChunkFooterSize;

    std::uint32_t crc = 0;
    std::vector<std::byte> buf(1 << 16);
    for (std::uint64_t pos = kChunkHeaderSize; pos < c.body_end;) {
      const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), c.body_end - pos));
      c.in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
      if (!c.in) fail(ErrorCode::IoError, "read failed in chunk " + c.name);
      crc = crc_update(crc, std::span(buf.data(), n));
      pos += n;
    }
    std::array<std::byte, 4> footer{};
    c.in.read(reinterpret_cast<char*>(footer.data()), 4);
    if (!c.in) fail(ErrorCode::IoError, "read failed in chunk " + c.name);
    const auto stored = le::get<std::uint32_t>(footer, 0);
    if (stored != crc) {
      char msg[256];
      std::snprintf(msg, sizeof(msg), "chunk %s offset %llu: stored crc %08x, body [%zu, %llu) hashes to %08x",
                    c.name.c_str(), static_cast<unsigned long long>(c.body_end), stored, kChunkHeaderSize,
                    static_cast<unsigned long long>(c.body_end), crc);
      fail(ErrorCode::ChecksumMismatch, msg);
    }
    c.in.seekg(static_cast<std::streamoff>(kChunkHeaderSize));
    c.offset = kChunkHeaderSize;
    state->chunks.push_back(std::move(c));
  }
  return EpisodeReader(std::move(state));
}

const EpisodeMeta& EpisodeReader::meta() const { return state_->meta; }

std::optional<EpisodeRecord> EpisodeReader::next() {
  State& s = *state_;
  if (s.done) return std::nullopt;

  const bool at_end = s.chunks.front().offset == s.chunks.front().body_end;
  for (const auto& c : s.chunks) {
    if ((c.offset == c.body_end) != at_end) fail(ErrorCode::FormatError, "chunks hold different record counts");
  }
  if (at_end) {
    s.done = true;
    if (s.yielded != s.meta.record_count) {
      fail(ErrorCode::FormatError, "manifest lists " + std::to_string(s.meta.record_count) + " records, chunks hold " +
                                       std::to_string(s.yielded));
    }
    return std::nullopt;
  }

  EpisodeRecord record;
  record.entries.reserve(s.chunks.size());
  std::optional<std::int64_t> time;
  for (std::size_t i = 0; i < s.chunks.size(); ++i) {
    auto& c = s.chunks[i];
    std::array<std::byte, kRecordHeaderSize> head{};
    const auto record_offset = c.offset;
    s.read_exact(c, head);
    const auto ts = static_cast<std::int64_t>(le::get<std::uint64_t>(head, 0));
    const auto len = le::get<std::uint32_t>(head, 8);
    if (time && ts != *time) {
      fail(ErrorCode::FormatError, "chunk " + c.name + " offset " + std::to_string(record_offset) +
                                       ": timestamp disagrees with other streams");
    }
    time = ts;
    if (len == 0) {
      record.entries.emplace_back(std::nullopt);
      continue;
    }
    std::vector<std::byte> payload(len);
    s.read_exact(c, payload);
    StreamValue value = decode_payload(s.meta.roster[i].kind, payload);
    check_payload(s.meta.roster[i], value);
    record.entries.emplace_back(std::move(value));
  }

  const double ticks = static_cast<double>(*time - s.meta.tick_origin_ns) * s.meta.tick_rate_hz / 1.0e9;
  if (ticks < -0.5) fail(ErrorCode::FormatError, "record time precedes the tick origin");
  record.tick_index = static_cast<std::uint64_t>(std::llround(ticks));
  record.tick_time_ns = *time;
  if (tick_time_ns(record.tick_index, s.meta.tick_rate_hz, s.meta.tick_origin_ns) != *time) {
    fail(ErrorCode::FormatError, "record time " + std::to_string(*time) + " is not on the tick grid");
  }
  if (s.last_tick && record.tick_index <= *s.last_tick) fail(ErrorCode::FormatError, "records out of tick order");
  s.last_tick = record.tick_index;
  ++s.yielded;
  return record;
}

std::vector<EpisodeRecord> read_all_records(const fs::path& episode_dir) {
  auto reader = EpisodeReader::open(episode_dir);
  std::vector<EpisodeRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

ValidationReport validate_episode(const fs::path& episode_dir) {
  auto reader = EpisodeReader::open(episode_dir);
  ValidationReport report;
  std::optional<std::uint64_t> first;
  std::uint64_t last = 0;
  while (auto r = reader.next()) {
    ++report.records;
    report.gaps += r->gap_count();
    if (!first) first = r->tick_index;
    last = r->tick_index;
  }
  const auto& meta = reader.meta();
  const double expected = first ? tick_duration(*first, last, meta.tick_rate_hz) : 0.0;
  if (std::abs(expected - meta.duration_s) > 1e-9) {
    fail(ErrorCode::FormatError, "manifest duration " + format_double(meta.duration_s) +
                                     " s disagrees with recorded ticks (" + format_double(expected) + " s)");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Dataset statistics

DatasetIndex build_index(const fs::path& root, bool verify) {
  if (!fs::is_directory(root)) fail(ErrorCode::IoError, "no dataset at " + root.string());
  DatasetIndex index;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / kManifestName)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    DatasetEntry e;
    e.path = dir;
    e.meta = parse_manifest(read_text_file((dir / kManifestName).string()));
    e.record_count = e.meta.record_count;
    if (verify) {
      try {
        e.record_count = validate_episode(dir).records;
        e.checksum = ChecksumStatus::ok;
      } catch (const Error&) {
        e.checksum = ChecksumStatus::failed;
      }
    }
    index.episodes.push_back(std::move(e));
  }
  return index;
}

TaskStats task_stats(const DatasetIndex& index, const std::string& task_name) {
  std::vector<const EpisodeMeta*> metas;
  for (const auto& e : index.episodes) {
    if (e.meta.complete && e.meta.task_name == task_name) metas.push_back(&e.meta);
  }
  if (metas.empty()) fail(ErrorCode::NoSuchTask, "no completed episodes for task '" + task_name + "'");

  TaskStats stats;
  stats.trials = metas.size();
  double sum = 0.0;
  for (const auto* m : metas) {
    sum += m->duration_s;
    if (m->success) ++stats.successes;
  }
  const double n = static_cast<double>(metas.size());
  stats.mean_duration_s = sum / n;
  if (metas.size() > 1) {
    double ss = 0.0;
    for (const auto* m : metas) ss += (m->duration_s - stats.mean_duration_s) * (m->duration_s - stats.mean_duration_s);
    stats.stddev_duration_s = std::sqrt(ss / (n - 1.0));
  }
  stats.success_rate = static_cast<double>(stats.successes) / n;
  return stats;
}

std::string format_task_stats(const TaskStats& stats) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.1f \xC2\xB1 %.1f  %llu/%llu  %.1f%%", stats.mean_duration_s,
                stats.stddev_duration_s, static_cast<unsigned long long>(stats.successes),
                static_cast<unsigned long long>(stats.trials), 100.0 * stats.success_rate);
  return buf;
}

}  // namespace exocap
