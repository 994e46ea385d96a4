#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace iafb {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream key from a base seed and a tuple of labels.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t label : labels) h = splitmix64(h ^ splitmix64(label + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  return Rng(derive_seed(seed, labels));
}

// Circularly-symmetric complex Gaussian entries, unit variance.
inline Eigen::MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = {re, im};
    }
  return m;
}

}  // namespace iafb
