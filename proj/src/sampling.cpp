#include "nelliptic/sampling.hpp"

#include <cmath>

namespace nelliptic {

namespace {

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

HaltonSequence::HaltonSequence(int dims, std::uint64_t seed) : bases_(first_primes(dims)), shifts_(dims) {
  UniformStream u(seed);
  for (auto& s : shifts_) s = u.next();
}

std::vector<double> HaltonSequence::point(std::uint64_t index) const {
  std::vector<double> out(bases_.size());
  for (std::size_t d = 0; d < bases_.size(); ++d) {
    const double v = radical_inverse(index, bases_[d]) + shifts_[d];
    out[d] = v - std::floor(v);
  }
  return out;
}

}  // namespace nelliptic
