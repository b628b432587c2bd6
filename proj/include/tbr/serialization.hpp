#pragma once

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tbr/arcflags.hpp"
#include "tbr/timetable.hpp"
#include "tbr/transfers.hpp"

/*
 * Versioned binary artifact container. Every file starts with a fixed
 * header (magic, section type, format version, payload size, FNV-1a
 * checksum of the payload) followed by the little-endian payload. Loading
 * verifies magic, version and checksum and fails loudly on any mismatch.
 */

namespace tbr {

namespace io {

inline constexpr uint64_t kMagic = 0x314152544252ull;  // "TBRA1"
inline constexpr uint32_t kVersion = 1;

enum class Section : uint32_t {
  kTimetable = 1,
  kTransfers = 2,
  kFlags = 3,
};

inline uint64_t fnv1a(const char* data, size_t n) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void value(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    value<uint64_t>(s.size());
    buf_.append(s.data(), s.size());
  }
  template <typename T>
  void pod_vec(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    value<uint64_t>(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  }
  const std::string& payload() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, size_t n) : data_(data), size_(n) {}

  template <typename T>
  T value() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    uint64_t n = value<uint64_t>();
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  std::vector<T> pod_vec() {
    uint64_t n = value<uint64_t>();
    need(n * sizeof(T));
    std::vector<T> v(n);
    std::memcpy(v.data(), data_ + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  bool done() const { return pos_ == size_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > size_) throw std::runtime_error("artifact payload truncated");
  }
  const char* data_;
  size_t size_;
  size_t pos_ = 0;
};

inline void write_artifact(const std::string& path, Section section,
                           const std::string& payload) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  uint64_t magic = kMagic;
  uint32_t ver = kVersion, sec = static_cast<uint32_t>(section);
  uint64_t size = payload.size(), sum = fnv1a(payload.data(), payload.size());
  f.write(reinterpret_cast<const char*>(&magic), sizeof magic);
  f.write(reinterpret_cast<const char*>(&sec), sizeof sec);
  f.write(reinterpret_cast<const char*>(&ver), sizeof ver);
  f.write(reinterpret_cast<const char*>(&size), sizeof size);
  f.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

inline std::string read_artifact(const std::string& path, Section expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  uint64_t magic = 0, size = 0, sum = 0;
  uint32_t ver = 0, sec = 0;
  f.read(reinterpret_cast<char*>(&magic), sizeof magic);
  f.read(reinterpret_cast<char*>(&sec), sizeof sec);
  f.read(reinterpret_cast<char*>(&ver), sizeof ver);
  f.read(reinterpret_cast<char*>(&size), sizeof size);
  f.read(reinterpret_cast<char*>(&sum), sizeof sum);
  if (!f || magic != kMagic)
    throw std::runtime_error(path + ": not a recognized artifact file");
  if (ver > kVersion)
    throw std::runtime_error(path + ": unsupported artifact version " +
                             std::to_string(ver));
  if (sec != static_cast<uint32_t>(expected))
    throw std::runtime_error(path + ": wrong artifact type");
  std::string payload(size, '\0');
  f.read(payload.data(), static_cast<std::streamsize>(size));
  if (!f || static_cast<uint64_t>(f.gcount()) != size)
    throw std::runtime_error(path + ": truncated artifact");
  if (fnv1a(payload.data(), payload.size()) != sum)
    throw std::runtime_error(path + ": checksum mismatch");
  return payload;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Timetable

inline std::string encode_timetable(const Timetable& tt) {
  io::Writer w;
  w.value<uint64_t>(tt.n_stops());
  for (size_t i = 0; i < tt.n_stops(); ++i) {
    w.str(tt.stop_external_ids[i]);
    w.str(tt.stop_names[i]);
  }
  w.value<uint64_t>(tt.lines.size());
  for (const Line& l : tt.lines) {
    w.pod_vec(l.stops);
    w.pod_vec(l.trips);
  }
  w.pod_vec(tt.trips);
  w.pod_vec(tt.events);
  w.value<uint64_t>(tt.footpaths.out.size());
  for (const auto& v : tt.footpaths.out) w.pod_vec(v);
  w.value<Time>(tt.service_start);
  w.value<Time>(tt.service_end);
  return w.payload();
}

inline Timetable decode_timetable(const std::string& payload) {
  io::Reader r(payload.data(), payload.size());
  Timetable tt;
  uint64_t n_stops = r.value<uint64_t>();
  tt.stop_external_ids.reserve(n_stops);
  for (uint64_t i = 0; i < n_stops; ++i) {
    tt.stop_external_ids.push_back(r.str());
    tt.stop_names.push_back(r.str());
  }
  uint64_t n_lines = r.value<uint64_t>();
  tt.lines.resize(n_lines);
  for (auto& l : tt.lines) {
    l.stops = r.pod_vec<StopId>();
    l.trips = r.pod_vec<TripId>();
  }
  tt.trips = r.pod_vec<Trip>();
  tt.events = r.pod_vec<StopEvent>();
  uint64_t n_fp = r.value<uint64_t>();
  tt.footpaths.out.resize(n_fp);
  for (auto& v : tt.footpaths.out) v = r.pod_vec<FootpathEdge>();
  tt.service_start = r.value<Time>();
  tt.service_end = r.value<Time>();
  tt.footpaths.build_reverse();
  tt.stops_to_lines.assign(tt.n_stops(), {});
  for (LineId li = 0; li < tt.lines.size(); ++li)
    for (uint32_t pos = 0; pos < tt.lines[li].stops.size(); ++pos)
      tt.stops_to_lines[tt.lines[li].stops[pos]].push_back({li, pos});
  return tt;
}

inline void save_timetable(const Timetable& tt, const std::string& path) {
  io::write_artifact(path, io::Section::kTimetable, encode_timetable(tt));
}

inline Timetable load_timetable(const std::string& path) {
  return decode_timetable(io::read_artifact(path, io::Section::kTimetable));
}

// ---------------------------------------------------------------------------
// TransferSet

inline std::string encode_transfers(const TransferSet& ts) {
  io::Writer w;
  w.pod_vec(ts.transfers);
  w.pod_vec(ts.event_offsets);
  return w.payload();
}

inline TransferSet decode_transfers(const std::string& payload) {
  io::Reader r(payload.data(), payload.size());
  TransferSet ts;
  ts.transfers = r.pod_vec<Transfer>();
  ts.event_offsets = r.pod_vec<uint32_t>();
  return ts;
}

inline void save_transfers(const TransferSet& ts, const std::string& path) {
  io::write_artifact(path, io::Section::kTransfers, encode_transfers(ts));
}

inline TransferSet load_transfers(const std::string& path) {
  return decode_transfers(io::read_artifact(path, io::Section::kTransfers));
}

// ---------------------------------------------------------------------------
// FlagStore. Header: k, transfer count, mode, compressed; then either the
// raw bit matrix (one row of ceil(k/8) bytes per transfer) or the pattern
// dictionary followed by per-transfer 32-bit indices.

namespace io {

inline std::vector<uint8_t> pack_bits(const std::vector<uint64_t>& words,
                                      size_t n_rows, size_t stride, uint32_t k) {
  size_t row_bytes = (k + 7) / 8;
  std::vector<uint8_t> out(n_rows * row_bytes, 0);
  for (size_t r = 0; r < n_rows; ++r)
    for (uint32_t c = 0; c < k; ++c) {
      uint64_t bit = (words[r * stride + (c >> 6)] >> (c & 63)) & 1u;
      if (bit) out[r * row_bytes + (c >> 3)] |= uint8_t(1u << (c & 7));
    }
  return out;
}

inline std::vector<uint64_t> unpack_bits(const std::vector<uint8_t>& bytes,
                                         size_t n_rows, uint32_t k) {
  size_t stride = (k + 63) / 64;
  size_t row_bytes = (k + 7) / 8;
  std::vector<uint64_t> out(n_rows * stride, 0);
  for (size_t r = 0; r < n_rows; ++r)
    for (uint32_t c = 0; c < k; ++c) {
      uint8_t bit = (bytes[r * row_bytes + (c >> 3)] >> (c & 7)) & 1u;
      if (bit) out[r * stride + (c >> 6)] |= uint64_t{1} << (c & 63);
    }
  return out;
}

}  // namespace io

inline std::string encode_flags(const FlagStore& s) {
  io::Writer w;
  w.value<uint32_t>(s.k);
  w.value<uint64_t>(s.n_transfers);
  w.value<uint8_t>(static_cast<uint8_t>(s.mode));
  w.value<uint8_t>(s.compressed ? 1 : 0);
  if (!s.compressed) {
    w.pod_vec(io::pack_bits(s.rows, s.n_transfers, s.stride, s.k));
  } else {
    size_t n_patterns = s.patterns.size() / s.stride;
    w.value<uint64_t>(n_patterns);
    w.pod_vec(io::pack_bits(s.patterns, n_patterns, s.stride, s.k));
    w.pod_vec(s.indices);
  }
  return w.payload();
}

inline FlagStore decode_flags(const std::string& payload) {
  io::Reader r(payload.data(), payload.size());
  FlagStore s;
  s.k = r.value<uint32_t>();
  s.n_transfers = r.value<uint64_t>();
  s.mode = static_cast<FlagStore::Mode>(r.value<uint8_t>());
  s.compressed = r.value<uint8_t>() != 0;
  s.stride = (s.k + 63) / 64;
  if (!s.compressed) {
    s.rows = io::unpack_bits(r.pod_vec<uint8_t>(), s.n_transfers, s.k);
  } else {
    uint64_t n_patterns = r.value<uint64_t>();
    s.patterns = io::unpack_bits(r.pod_vec<uint8_t>(), n_patterns, s.k);
    s.indices = r.pod_vec<uint32_t>();
  }
  return s;
}

inline void save_flags(const FlagStore& s, const std::string& path) {
  io::write_artifact(path, io::Section::kFlags, encode_flags(s));
}

inline FlagStore load_flags(const std::string& path) {
  return decode_flags(io::read_artifact(path, io::Section::kFlags));
}

}  // namespace tbr
