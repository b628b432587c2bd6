#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace tbr {

using StopId = uint32_t;
using TripId = uint32_t;
using LineId = uint32_t;

// Seconds since midnight of the first service day. A timetable covering two
// consecutive days uses values beyond 86400 for the second day and for
// overnight trips, so the type must comfortably hold a few hundred thousand.
using Time = int32_t;

inline constexpr Time kInfTime = std::numeric_limits<Time>::max() / 4;
inline constexpr Time kNegInfTime = -kInfTime;
inline constexpr uint32_t kNone32 = std::numeric_limits<uint32_t>::max();

inline std::string format_time(Time t) {
  if (t >= kInfTime) return "inf";
  if (t <= kNegInfTime) return "-inf";
  bool neg = t < 0;
  long v = neg ? -static_cast<long>(t) : t;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%ld:%02ld:%02ld", neg ? "-" : "", v / 3600,
                (v / 60) % 60, v % 60);
  return buf;
}

// Accepts "h:mm:ss" or "h:mm"; hours may exceed 24 (GTFS overnight times).
inline Time parse_time(const std::string& s) {
  long h = 0, m = 0, sec = 0;
  int n = std::sscanf(s.c_str(), "%ld:%ld:%ld", &h, &m, &sec);
  if (n < 2 || h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59)
    throw std::invalid_argument("bad time literal: " + s);
  return static_cast<Time>(h * 3600 + m * 60 + sec);
}

}  // namespace tbr
