#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace splatcal {

// All recoverable failures (IO, validation, bad arguments) surface as SplatError.
class SplatError : public std::runtime_error {
public:
  explicit SplatError(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  throw SplatError(buf);
}

inline void require(bool cond, const char* fmt, ...) {
  if (cond)
    return;
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  throw SplatError(buf);
}

}  // namespace splatcal
