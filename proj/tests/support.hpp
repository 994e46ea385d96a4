#pragma once

// Shared fixtures and independent reference computations for the test suite.
// Everything here is deliberately written without calling the library code it
// is used to check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "iafb/matproc.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/rng.hpp"

namespace iafb::test {

inline NetworkConfig mixed_network() { return NetworkConfig{{5, 4, 4, 3}, {4, 3, 2, 4}, {2, 1, 1, 1}}; }
inline NetworkConfig symmetric_network() { return NetworkConfig::symmetric(4, 3, 3, 1); }

/// Three users, 4x6 antennas, two streams; each receiver sends one null space
/// and ignores the other link.
inline NetworkConfig null_space_network() { return NetworkConfig::symmetric(3, 4, 6, 2); }
inline FeedbackProfile null_space_profile() {
  return FeedbackProfile::from_sets({4, 4, 4}, {6, 6, 6},
                                    {{{{2}, {}, {1}, {}}}, {{{0}, {}, {2}, {}}}, {{{1}, {}, {0}, {}}}});
}

/// Three users, 4 receive and 6 transmit antennas (two streams) with
/// aggregate and null-space feedback at receivers 1 and 2.
inline NetworkConfig aggregate_network() { return NetworkConfig{{6, 6, 2}, {4, 4, 2}, {2, 2, 2}}; }
inline FeedbackProfile aggregate_profile() {
  return FeedbackProfile::from_sets({4, 4, 2}, {6, 6, 2},
                                    {{{{}, {2}, {1}, {}}}, {{{}, {2}, {0}, {}}}, {{{}, {}, {0, 1}, {}}}});
}

/// Three users, 5 receive and 4 transmit antennas; 4x4 submatrices, all links aligned.
inline NetworkConfig row_space_network() { return NetworkConfig::symmetric(3, 5, 4, 1); }
inline FeedbackProfile row_space_profile() {
  return FeedbackProfile::uniform({4, 4, 4}, {4, 4, 4}, LinkMode::RowSpace);
}

// ---------------------------------------------------------------------------
// Reference formulas, written out longhand.

struct RefDims {
  std::vector<long> me, ne, d0;
};

inline RefDims ref_dims(const NetworkConfig& cfg, const FeedbackProfile& p) {
  const int k = cfg.users();
  RefDims r{std::vector<long>(k), std::vector<long>(k), std::vector<long>(k)};
  for (int j = 0; j < k; ++j) {
    long absorbed = 0, ignored = 0;
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      if (p.mode[j][i] == LinkMode::Aggregate) absorbed += p.tx_sub[i];
      if (p.mode[j][i] == LinkMode::NoFeedback) ignored += cfg.streams[i];
    }
    r.me[j] = p.rx_sub[j] - absorbed;
    r.d0[j] = cfg.streams[j] + ignored;
  }
  for (int i = 0; i < k; ++i) {
    long nulled = 0;
    for (int j = 0; j < k; ++j)
      if (j != i && p.mode[j][i] == LinkMode::NullSpace) nulled += r.me[j];
    r.ne[i] = p.tx_sub[i] - nulled;
  }
  return r;
}

/// Sum of Grassmannian dimensions A(B-A) of the subspaces each receiver sends.
inline long ref_feedback_dimension(const NetworkConfig& cfg, const FeedbackProfile& p) {
  const RefDims r = ref_dims(cfg, p);
  long total = 0;
  for (int j = 0; j < cfg.users(); ++j) {
    long width = 0;
    for (int i = 0; i < cfg.users(); ++i) {
      if (i == j) continue;
      if (p.mode[j][i] == LinkMode::RowSpace) width += p.tx_sub[i];
      if (p.mode[j][i] == LinkMode::NullSpace) total += r.me[j] * (p.tx_sub[i] - r.me[j]);
    }
    if (width > r.me[j]) total += r.me[j] * (width - r.me[j]);
  }
  return total;
}

inline long ref_full_dimension(const NetworkConfig& cfg) {
  long total = 0;
  for (int j = 0; j < cfg.users(); ++j)
    for (int i = 0; i < cfg.users(); ++i)
      if (i != j) total += static_cast<long>(cfg.rx_antennas[j]) * cfg.tx_antennas[i] - 1;
  return total;
}

/// Conditions 1-2 plus every subset of aligned links, enumerated from scratch.
inline bool ref_counting_feasible(const NetworkConfig& cfg, const FeedbackProfile& p) {
  const RefDims r = ref_dims(cfg, p);
  const int k = cfg.users();
  for (int u = 0; u < k; ++u)
    if (r.ne[u] < cfg.streams[u] || r.me[u] < r.d0[u]) return false;
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      if (i != j && p.mode[j][i] == LinkMode::RowSpace) pairs.emplace_back(j, i);
  const int n = static_cast<int>(pairs.size());
  for (long mask = 1; mask < (1L << n); ++mask) {
    std::vector<bool> rx(k, false), tx(k, false);
    long need = 0;
    for (int b = 0; b < n; ++b)
      if (mask & (1L << b)) {
        rx[pairs[b].first] = true;
        tx[pairs[b].second] = true;
        need += r.d0[pairs[b].first] * cfg.streams[pairs[b].second];
      }
    long have = 0;
    for (int u = 0; u < k; ++u) {
      if (rx[u]) have += r.d0[u] * (r.me[u] - r.d0[u]);
      if (tx[u]) have += cfg.streams[u] * (r.ne[u] - cfg.streams[u]);
    }
    if (have < need) return false;
  }
  return true;
}

/// Random divisible profile: common d, submatrix sizes multiples of d.
inline std::pair<NetworkConfig, FeedbackProfile> random_divisible_instance(std::mt19937_64& rng, int max_users,
                                                                          int max_size) {
  std::uniform_int_distribution<int> users(2, max_users);
  const int k = users(rng);
  std::uniform_int_distribution<int> dd(1, 2);
  const int d = std::min(dd(rng), max_size);
  std::uniform_int_distribution<int> mult(1, max_size / d);
  std::uniform_int_distribution<int> mode(0, 3);
  std::vector<int> rx(k), tx(k);
  for (int u = 0; u < k; ++u) {
    rx[u] = d * mult(rng);
    tx[u] = d * mult(rng);
  }
  NetworkConfig cfg{tx, rx, std::vector<int>(k, d)};
  FeedbackProfile p = FeedbackProfile::uniform(rx, tx, LinkMode::RowSpace);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      if (i != j) p.mode[j][i] = kCrossModes[mode(rng)];
  return {cfg, p};
}

inline CMatrix random_invertible(int n, Rng& rng) {
  // Diagonally loaded Gaussian: well conditioned but far from the identity.
  return complex_gaussian(n, n, rng) + 2.0 * CMatrix::Identity(n, n);
}

inline bool bit_equal(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace iafb::test
