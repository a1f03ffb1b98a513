#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nelliptic {

/// Platform-independent uniform doubles in [0,1) from mt19937_64 (whose
/// output sequence is fully specified, unlike std distributions).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double in(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

/// Randomly shifted Halton sequence: point i, coordinate d is the radical
/// inverse of i in the d-th prime base, plus a per-coordinate shift mod 1.
class HaltonSequence {
 public:
  HaltonSequence(int dims, std::uint64_t seed);
  int dims() const { return static_cast<int>(bases_.size()); }
  std::vector<double> point(std::uint64_t index) const;

 private:
  std::vector<int> bases_;
  std::vector<double> shifts_;
};

}  // namespace nelliptic
