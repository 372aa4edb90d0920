#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace medgan {

// Contract violations (bad shapes, bad arguments). CLI maps these to exit 2.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed config, manifest, or file contents. CLI maps these to exit 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required. CLI maps these to exit 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// FNV-1a over raw bytes. Used to assert parameter stores are untouched
// across optimizer half-steps.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace medgan
