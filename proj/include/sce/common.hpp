#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sce {

// Bad input data, file formats, shape mismatches. CLI exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, diverging training, undefined metrics. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace rng {

// All randomness in the library goes through mt19937_64 with explicit
// distribution code below. std::*_distribution and std::shuffle are
// implementation-defined, so they are off limits wherever a seed has to
// reproduce results bit-for-bit.
using Engine = std::mt19937_64;

// Mixes a seed with a stream tag so derived generators (per class, per
// epoch, per record) are decorrelated. SplitMix64 finalizer.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform integer in [0, n) by rejection; exact and portable.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("rng::below: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = eng();
  } while (v >= limit);
  return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * unit(eng);
}

// Marsaglia polar method; deterministic given the engine state.
class Gaussian {
public:
  double operator()(Engine& eng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * unit(eng) - 1.0;
      v = 2.0 * unit(eng) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void shuffle(std::vector<T>& items, Engine& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(below(eng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace rng

inline std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace sce
