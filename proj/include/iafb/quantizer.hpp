#pragma once

// Grassmannian quantization of fed subspaces with random codebooks.
//
// Codebooks of up to 2^explicit_bits_limit entries are materialized. Larger
// codebooks are never built: the nearest neighbour of the source point is drawn
// directly from the distribution of the minimum chordal distance among 2^bits
// independent uniform points, then placed along a uniformly random geodesic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/matproc.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/rng.hpp"

namespace iafb {

/// Uniformly distributed point of G(A,B).
inline SubspaceBasis random_subspace(int a, int b, Rng& rng) {
  require(a >= 0 && a <= b, ErrorKind::InvalidInput, "random_subspace: need 0 <= A <= B");
  if (a == 0) return SubspaceBasis::empty(b);
  const CMatrix g = complex_gaussian(b, a, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return SubspaceBasis(CMatrix(qr.householderQ() * CMatrix::Identity(b, a)));
}

struct Codebook {
  int grass_a = 0;
  int grass_b = 0;
  int bits = 0;
  std::uint64_t seed = 0;
  std::vector<SubspaceBasis> entries;

  std::size_t size() const { return entries.size(); }

  /// Index of the entry closest in chordal distance; ties go to the lower index.
  std::size_t nearest(const SubspaceBasis& x) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const double d = chordal_distance(x, entries[e]);
      if (d < best_d) {
        best_d = d;
        best = e;
      }
    }
    return best;
  }
};

inline Codebook random_codebook(int a, int b, int bits, std::uint64_t seed) {
  require(bits >= 0 && bits <= 20, ErrorKind::UnsupportedSize,
          "random_codebook: " + std::to_string(bits) + " bits is too many to materialize");
  Codebook cb{a, b, bits, seed, {}};
  Rng rng = make_rng(seed, {0x43ULL});
  const std::size_t n = std::size_t{1} << bits;
  cb.entries.reserve(n);
  for (std::size_t e = 0; e < n; ++e) cb.entries.push_back(random_subspace(a, b, rng));
  return cb;
}

/// Largest-remainder split of total_bits proportional to dims; remainder ties
/// go to the lower index and zero-dimension entries get nothing.
inline std::vector<int> allocate_bits(std::span<const long> dims, long total_bits) {
  long positive = 0;
  long dim_sum = 0;
  for (long d : dims) {
    require(d >= 0, ErrorKind::InvalidInput, "allocate_bits: negative dimension");
    if (d > 0) ++positive;
    dim_sum += d;
  }
  require(total_bits >= positive, ErrorKind::InvalidInput,
          "allocate_bits: " + std::to_string(total_bits) + " bits for " + std::to_string(positive) +
              " subspaces");
  std::vector<int> out(dims.size(), 0);
  if (dim_sum == 0) return out;
  std::vector<long> remainder(dims.size());
  long assigned = 0;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    out[s] = static_cast<int>(dims[s] * total_bits / dim_sum);
    remainder[s] = dims[s] * total_bits % dim_sum;
    assigned += out[s];
  }
  std::vector<std::size_t> order(dims.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t r = 0; assigned < total_bits; ++r, ++assigned) ++out[order[r]];
  return out;
}

inline std::vector<int> allocate_bits(std::span<const FedSubspace> fed, long total_bits) {
  std::vector<long> dims;
  dims.reserve(fed.size());
  for (const auto& s : fed) dims.push_back(s.dimension());
  return allocate_bits(dims, total_bits);
}

/// log of the small-ball constant c in vol{chordal^2 <= x} ~ c x^D on G(A,B).
inline double log_ball_constant(int a, int b) {
  const double dim = static_cast<double>(a) * (b - a);
  double out = -std::lgamma(dim + 1.0);
  for (int i = 1; i <= a; ++i) out += std::lgamma(b - i + 1.0) - std::lgamma(a - i + 1.0);
  return out;
}

/// Squared chordal distance to the nearest of 2^bits uniform points.
inline double sample_nearest_sq_distance(int a, int b, int bits, Rng& rng) {
  const double dim = static_cast<double>(a) * (b - a);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  // P(min > x) = (1 - c x^D)^N  =>  c x^D = 1 - U^(1/N)
  const double mass = -std::expm1(std::ldexp(std::log(u), -bits));
  const double x = std::exp((std::log(mass) - log_ball_constant(a, b)) / dim);
  return std::min(x, static_cast<double>(a));
}

/// Point at the given chordal distance from y along a random geodesic.
inline SubspaceBasis move_along_geodesic(const SubspaceBasis& y, double distance, Rng& rng) {
  const int a = y.rank();
  const int b = y.ambient_dim();
  const CMatrix& yb = y.basis();
  CMatrix z = complex_gaussian(b, a, rng);
  z -= yb * (yb.adjoint() * z);
  Eigen::BDCSVD<CMatrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector sigma = svd.singularValues();
  const CMatrix w = svd.matrixU();
  const CMatrix q = svd.matrixV();
  const double smax = sigma.size() ? sigma(0) : 0.0;
  if (smax <= 0.0) return y;
  auto chord_sq = [&](double t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) s += std::pow(std::sin(sigma(k) * t), 2);
    return s;
  };
  const double target = distance * distance;
  double lo = 0.0, hi = M_PI / (2.0 * smax);
  if (chord_sq(hi) <= target) {
    lo = hi;
  } else {
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (chord_sq(mid) < target ? lo : hi) = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  Eigen::VectorXcd c(sigma.size()), s(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    c(k) = std::cos(sigma(k) * t);
    s(k) = std::sin(sigma(k) * t);
  }
  CMatrix moved = yb * q * c.asDiagonal() * q.adjoint() + w * s.asDiagonal() * q.adjoint();
  Eigen::HouseholderQR<CMatrix> qr(moved);
  CMatrix frame = qr.householderQ() * CMatrix::Identity(b, a);
  // Keep the frame aligned with moved so the representative is continuous in t.
  const CMatrix r = frame.adjoint() * moved;
  for (int k = 0; k < a; ++k)
    if (std::abs(r(k, k)) > 0) frame.col(k) *= r(k, k) / std::abs(r(k, k));
  return SubspaceBasis(std::move(frame));
}

struct QuantizerOptions {
  int explicit_bits_limit = 10;  // materialize codebooks up to this size
  bool oracle = false;           // the source point is codebook entry 0
};

struct QuantizedPoint {
  SubspaceBasis space;
  double distortion = 0.0;  // chordal distance to the source
};

inline QuantizedPoint quantize_subspace(const SubspaceBasis& x, int bits, std::uint64_t seed,
                                        const QuantizerOptions& opts = {}) {
  require(bits >= 0, ErrorKind::InvalidInput, "quantize: negative bit count");
  const int a = x.rank();
  const int b = x.ambient_dim();
  if (a == 0 || a == b || opts.oracle) return {x, 0.0};
  if (bits <= opts.explicit_bits_limit) {
    const Codebook cb = random_codebook(a, b, bits, seed);
    const SubspaceBasis& pick = cb.entries[cb.nearest(x)];
    return {pick, chordal_distance(x, pick)};
  }
  Rng rng = make_rng(seed, {0x4eULL});
  const double d2 = sample_nearest_sq_distance(a, b, bits, rng);
  SubspaceBasis moved = move_along_geodesic(x, std::sqrt(d2), rng);
  const double dist = chordal_distance(x, moved);
  return {std::move(moved), dist};
}

struct QuantizedFedCsi {
  std::vector<FedSubspace> subspaces;
  std::vector<int> bits;
  std::vector<double> distortion;
};

/// Replaces every fed subspace by its quantized counterpart. Subspace s draws
/// its codebook from (seed, s).
inline QuantizedFedCsi quantize(std::span<const FedSubspace> fed, std::span<const int> allocation,
                                std::uint64_t seed, const QuantizerOptions& opts = {}) {
  require(allocation.size() == fed.size(), ErrorKind::InvalidInput,
          "quantize: one bit count per fed subspace is required");
  QuantizedFedCsi out;
  out.bits.assign(allocation.begin(), allocation.end());
  for (std::size_t s = 0; s < fed.size(); ++s) {
    QuantizedPoint q = quantize_subspace(fed[s].space, allocation[s],
                                         derive_seed(seed, {0x51ULL, static_cast<std::uint64_t>(s)}), opts);
    FedSubspace f = fed[s];
    f.space = std::move(q.space);
    out.subspaces.push_back(std::move(f));
    out.distortion.push_back(q.distortion);
  }
  return out;
}

/// Full channel directions vec(H_ji) of every cross link, as points of G(1, M_j N_i).
inline std::vector<FedSubspace> direction_feedback(const NetworkConfig& cfg, const ChannelRealization& h) {
  std::vector<FedSubspace> out;
  for (int j = 0; j < cfg.users(); ++j)
    for (int i = 0; i < cfg.users(); ++i) {
      if (i == j) continue;
      const CMatrix& hji = h(j, i);
      const double norm = hji.norm();
      require(norm > 0.0, ErrorKind::DegenerateChannel, "direction_feedback: zero channel");
      CMatrix v = Eigen::Map<const Eigen::VectorXcd>(hji.data(), hji.size()) / norm;
      const int b = static_cast<int>(hji.size());
      out.push_back({FedKind::Direction, j, i, SubspaceBasis(std::move(v)), 1, b});
    }
  return out;
}

/// Channel estimate with each cross link rebuilt from its (unit-norm) direction.
inline ChannelRealization channels_from_directions(const NetworkConfig& cfg,
                                                   std::span<const FedSubspace> fed) {
  ChannelRealization out(cfg.users(), 0);
  for (int j = 0; j < cfg.users(); ++j)
    for (int i = 0; i < cfg.users(); ++i)
      out(j, i) = CMatrix::Zero(cfg.rx_antennas[j], cfg.tx_antennas[i]);
  for (const auto& s : fed) {
    require(s.kind == FedKind::Direction, ErrorKind::InvalidInput,
            "channels_from_directions: expected direction feedback");
    out(s.rx, s.tx) = Eigen::Map<const CMatrix>(s.space.basis().data(), cfg.rx_antennas[s.rx],
                                                cfg.tx_antennas[s.tx]);
  }
  return out;
}

}  // namespace iafb
