#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace brace {

// Deterministic 64-bit generator used by every run. The helpers below avoid the
// implementation-defined std:: distributions so that streams are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  int uniform_int(int n) {
    // Rejection-free for the tiny n used here; bias is below 2^-50.
    return static_cast<int>(uniform01() * n);
  }

  // Draws an index from an unnormalised nonnegative weight vector.
  int categorical(std::span<const double> weights);

  // Beta(a, b) via two gamma draws.
  double beta(double a, double b);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finaliser; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Stable FNV-1a hash of a string, finalised with mix64.
std::uint64_t hash_string(std::string_view s);

}  // namespace brace
