#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace impact {

/// 64-bit FNV-1a. Used for config hashes and feature-space fingerprints, so
/// the value must never change between releases.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  Fnv1a& update(std::uint64_t value);
  Fnv1a& update(double value);
  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string to_hex(std::uint64_t value);

/// splitmix64 finalizer; decorrelates derived seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);

}  // namespace impact
