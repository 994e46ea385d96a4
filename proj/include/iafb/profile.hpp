#pragma once

// Feedback profiles: which part of each cross link a receiver feeds back, the
// derived effective dimensions, the feedback dimension, and evaluation of the
// feedback functions on a channel realization.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/matproc.hpp"
#include "iafb/netcfg.hpp"

namespace iafb {

/// Per cross link treatment at a receiver. Direct links carry Direct.
enum class LinkMode : std::uint8_t {
  Direct,
  NoFeedback,  // strategy I
  Aggregate,   // strategy II: absorbed by the receive-side filter S^r
  NullSpace,   // strategy III: null space of the filtered submatrix
  RowSpace,    // strategy IV: row space of the concatenated submatrices
};

inline constexpr std::array<LinkMode, 4> kCrossModes = {LinkMode::NoFeedback, LinkMode::Aggregate,
                                                        LinkMode::NullSpace, LinkMode::RowSpace};

inline std::string_view roman(LinkMode m) {
  switch (m) {
    case LinkMode::NoFeedback: return "I";
    case LinkMode::Aggregate: return "II";
    case LinkMode::NullSpace: return "III";
    case LinkMode::RowSpace: return "IV";
    case LinkMode::Direct: break;
  }
  return "-";
}

struct FeedbackProfile {
  std::vector<int> rx_sub;                  // M^s_j
  std::vector<int> tx_sub;                  // N^s_i
  std::vector<std::vector<LinkMode>> mode;  // mode[j][i]: treatment of Tx i at Rx j

  int users() const { return static_cast<int>(rx_sub.size()); }

  LinkMode at(int rx, int tx) const { return mode[rx][tx]; }

  /// Ascending list of transmitters i with mode[rx][i] == m.
  std::vector<int> links(int rx, LinkMode m) const {
    std::vector<int> out;
    for (int i = 0; i < users(); ++i)
      if (i != rx && mode[rx][i] == m) out.push_back(i);
    return out;
  }

  bool has_row_space_links() const {
    for (int j = 0; j < users(); ++j)
      if (!links(j, LinkMode::RowSpace).empty()) return true;
    return false;
  }

  void validate(const NetworkConfig& cfg) const {
    const int k = cfg.users();
    require(static_cast<int>(rx_sub.size()) == k && static_cast<int>(tx_sub.size()) == k &&
                static_cast<int>(mode.size()) == k,
            ErrorKind::InvalidProfile, "profile: lists must have K entries");
    for (int i = 0; i < k; ++i) {
      require(rx_sub[i] >= 1 && rx_sub[i] <= cfg.rx_antennas[i], ErrorKind::InvalidProfile,
              "profile: M^s out of range for user " + std::to_string(i + 1));
      require(tx_sub[i] >= 1 && tx_sub[i] <= cfg.tx_antennas[i], ErrorKind::InvalidProfile,
              "profile: N^s out of range for user " + std::to_string(i + 1));
      require(static_cast<int>(mode[i].size()) == k, ErrorKind::InvalidProfile,
              "profile: partition row has wrong length");
      for (int t = 0; t < k; ++t) {
        const bool direct = mode[i][t] == LinkMode::Direct;
        require(direct == (i == t), ErrorKind::InvalidProfile,
                "profile: cross links of Rx " + std::to_string(i + 1) +
                    " are not partitioned into I..IV");
      }
    }
  }

  /// Every cross link gets the same mode.
  static FeedbackProfile uniform(std::vector<int> rx_sub, std::vector<int> tx_sub, LinkMode m) {
    const int k = static_cast<int>(rx_sub.size());
    FeedbackProfile p{std::move(rx_sub), std::move(tx_sub), {}};
    p.mode.assign(k, std::vector<LinkMode>(k, m));
    for (int j = 0; j < k; ++j) p.mode[j][j] = LinkMode::Direct;
    return p;
  }

  /// Builds a profile from explicit index sets (0-based), sets[j] = {I, II, III, IV}.
  /// Each Rx's four sets must partition the other users.
  static FeedbackProfile from_sets(std::vector<int> rx_sub, std::vector<int> tx_sub,
                                   const std::vector<std::array<std::vector<int>, 4>>& sets) {
    const int k = static_cast<int>(rx_sub.size());
    require(static_cast<int>(sets.size()) == k, ErrorKind::InvalidProfile,
            "profile: one partition per receiver is required");
    FeedbackProfile p{std::move(rx_sub), std::move(tx_sub), {}};
    p.mode.assign(k, std::vector<LinkMode>(k, LinkMode::Direct));
    for (int j = 0; j < k; ++j) {
      std::vector<int> seen(k, 0);
      for (std::size_t s = 0; s < 4; ++s)
        for (int i : sets[j][s]) {
          require(i >= 0 && i < k && i != j, ErrorKind::InvalidProfile,
                  "profile: Rx " + std::to_string(j + 1) + " lists an invalid user");
          require(seen[i]++ == 0, ErrorKind::InvalidProfile,
                  "profile: Rx " + std::to_string(j + 1) + " lists user " +
                      std::to_string(i + 1) + " twice");
          p.mode[j][i] = kCrossModes[s];
        }
      for (int i = 0; i < k; ++i)
        require(i == j || seen[i] == 1, ErrorKind::InvalidProfile,
                "profile: Rx " + std::to_string(j + 1) + " does not cover user " +
                    std::to_string(i + 1));
    }
    return p;
  }

  bool operator==(const FeedbackProfile&) const = default;
};

struct DerivedProfile {
  std::vector<int> rx_eff;      // M^e_j = M^s_j - sum_{i in II_j} N^s_i
  std::vector<int> tx_eff;      // N^e_i = N^s_i - sum_{j: i in III_j} M^e_j
  std::vector<int> rx_streams;  // d^0_j = d_j + sum_{i in I_j} d_i
};

inline DerivedProfile derive(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  prof.validate(cfg);
  const int k = cfg.users();
  DerivedProfile out{std::vector<int>(k), std::vector<int>(k), std::vector<int>(k)};
  for (int j = 0; j < k; ++j) {
    out.rx_eff[j] = prof.rx_sub[j];
    out.rx_streams[j] = cfg.streams[j];
    for (int i = 0; i < k; ++i) {
      if (prof.mode[j][i] == LinkMode::Aggregate) out.rx_eff[j] -= prof.tx_sub[i];
      if (prof.mode[j][i] == LinkMode::NoFeedback) out.rx_streams[j] += cfg.streams[i];
    }
  }
  for (int i = 0; i < k; ++i) {
    out.tx_eff[i] = prof.tx_sub[i];
    for (int j = 0; j < k; ++j)
      if (prof.mode[j][i] == LinkMode::NullSpace) out.tx_eff[i] -= out.rx_eff[j];
  }
  return out;
}

/// Closed-form feedback dimension of a profile.
inline long feedback_dimension(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  const DerivedProfile dp = derive(cfg, prof);
  long total = 0;
  for (int j = 0; j < cfg.users(); ++j) {
    const long me = dp.rx_eff[j];
    long row_space_cols = 0;
    for (int i : prof.links(j, LinkMode::RowSpace)) row_space_cols += prof.tx_sub[i];
    total += me * std::max(0L, row_space_cols - me);
    for (int i : prof.links(j, LinkMode::NullSpace)) total += me * (prof.tx_sub[i] - me);
  }
  return total;
}

/// Feedback dimension of sending every cross link's full channel direction.
inline long full_direction_dimension(const NetworkConfig& cfg) {
  cfg.validate();
  long total = 0;
  for (int j = 0; j < cfg.users(); ++j)
    for (int i = 0; i < cfg.users(); ++i)
      if (i != j) total += static_cast<long>(cfg.rx_antennas[j]) * cfg.tx_antennas[i] - 1;
  return total;
}

enum class FedKind : std::uint8_t {
  NullSpace,  // null space of (S^r_j)^H H^s_jp, lives in C^{N^s_p}
  RowSpace,   // row space of the concatenated filtered submatrices at Rx j
  Direction,  // full channel direction vec(H_ji) (baseline feedback)
};

/// One element of a receiver's feedback tuple, with its Grassmannian
/// parameters (A,B).
struct FedSubspace {
  FedKind kind = FedKind::NullSpace;
  int rx = 0;
  int tx = -1;  // -1 for row-space feedback (covers several transmitters)
  SubspaceBasis space;
  int grass_a = 0;
  int grass_b = 0;

  long dimension() const { return static_cast<long>(grass_a) * (grass_b - grass_a); }
};

inline long total_dimension(std::span<const FedSubspace> fed) {
  long total = 0;
  for (const auto& s : fed) total += s.dimension();
  return total;
}

/// CSI available for precoder design. rx_filter is only populated on the
/// receiver side (evaluate_feedback); transmitter reconstructions leave it
/// empty.
struct FedCsi {
  std::vector<CMatrix> rx_filter;               // S^r_j, M^s_j x M^e_j
  std::vector<CMatrix> tx_filter;               // S^t_i, N^s_i x N^e_i
  std::vector<std::vector<CMatrix>> effective;  // G_ji for i in IV_j, else empty
  std::vector<FedSubspace> subspaces;

  const CMatrix& G(int rx, int tx) const { return effective[rx][tx]; }
};

inline CMatrix sub_channel(const ChannelRealization& h, const FeedbackProfile& prof, int rx, int tx) {
  return h(rx, tx).topLeftCorner(prof.rx_sub[rx], prof.tx_sub[tx]);
}

namespace detail {

inline void require_nonnegative_dims(const DerivedProfile& dp) {
  for (std::size_t j = 0; j < dp.rx_eff.size(); ++j) {
    require(dp.rx_eff[j] >= 0, ErrorKind::InvalidProfile,
            "profile: M^e is negative for Rx " + std::to_string(j + 1));
    require(dp.tx_eff[j] >= 0, ErrorKind::InvalidProfile,
            "profile: N^e is negative for Tx " + std::to_string(j + 1));
  }
}

inline void require_rank(int got, int want, const std::string& what) {
  require(got == want, ErrorKind::DegenerateChannel,
          what + ": expected dimension " + std::to_string(want) + ", got " + std::to_string(got));
}

}  // namespace detail

/// Evaluates the feedback functions on a realization. rx_transform optionally
/// supplies invertible M^e_j x M^e_j matrices R_j applied to the effective
/// channels (identity when empty).
inline FedCsi evaluate_feedback(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                const ChannelRealization& h,
                                std::span<const CMatrix> rx_transform = {}) {
  const DerivedProfile dp = derive(cfg, prof);
  detail::require_nonnegative_dims(dp);
  const int k = cfg.users();
  require(h.users() == k, ErrorKind::InvalidInput, "evaluate_feedback: channel has wrong user count");
  require(rx_transform.empty() || static_cast<int>(rx_transform.size()) == k,
          ErrorKind::InvalidInput, "evaluate_feedback: one R_j per receiver is required");

  FedCsi fed;
  fed.rx_filter.resize(k);
  fed.tx_filter.resize(k);
  fed.effective.assign(k, std::vector<CMatrix>(k));

  for (int j = 0; j < k; ++j) {
    const auto absorbed = prof.links(j, LinkMode::Aggregate);
    if (absorbed.empty()) {
      fed.rx_filter[j] = CMatrix::Identity(prof.rx_sub[j], prof.rx_sub[j]);
      continue;
    }
    int cols = 0;
    for (int i : absorbed) cols += prof.tx_sub[i];
    CMatrix concat(prof.rx_sub[j], cols);
    int at = 0;
    for (int i : absorbed) {
      concat.middleCols(at, prof.tx_sub[i]) = sub_channel(h, prof, j, i);
      at += prof.tx_sub[i];
    }
    SubspaceBasis sr = left_null_space(concat);
    detail::require_rank(sr.rank(), dp.rx_eff[j], "S^r of Rx " + std::to_string(j + 1));
    fed.rx_filter[j] = sr.basis();
  }

  // Strategy III: per-link null spaces, and their intersection per transmitter.
  std::vector<std::vector<CMatrix>> tx_constraints(k);
  for (int j = 0; j < k; ++j)
    for (int p : prof.links(j, LinkMode::NullSpace)) {
      CMatrix filtered = fed.rx_filter[j].adjoint() * sub_channel(h, prof, j, p);
      SubspaceBasis ns = null_space(filtered);
      detail::require_rank(ns.rank(), prof.tx_sub[p] - dp.rx_eff[j],
                           "null space fed by Rx " + std::to_string(j + 1));
      const int a = ns.rank();
      fed.subspaces.push_back({FedKind::NullSpace, j, p, std::move(ns), a, prof.tx_sub[p]});
      tx_constraints[p].push_back(std::move(filtered));
    }
  for (int i = 0; i < k; ++i) {
    if (tx_constraints[i].empty()) {
      fed.tx_filter[i] = CMatrix::Identity(prof.tx_sub[i], prof.tx_sub[i]);
      continue;
    }
    Eigen::Index rows = 0;
    for (const auto& c : tx_constraints[i]) rows += c.rows();
    CMatrix stacked(rows, prof.tx_sub[i]);
    Eigen::Index at = 0;
    for (const auto& c : tx_constraints[i]) {
      stacked.middleRows(at, c.rows()) = c;
      at += c.rows();
    }
    SubspaceBasis st = null_space(stacked);
    detail::require_rank(st.rank(), dp.tx_eff[i], "S^t of Tx " + std::to_string(i + 1));
    fed.tx_filter[i] = st.basis();
  }

  // Strategy IV: row space of the concatenation, and the effective channels.
  for (int j = 0; j < k; ++j) {
    const auto aligned = prof.links(j, LinkMode::RowSpace);
    if (aligned.empty()) continue;
    int cols = 0;
    for (int i : aligned) cols += prof.tx_sub[i];
    CMatrix concat(dp.rx_eff[j], cols);
    int at = 0;
    for (int i : aligned) {
      CMatrix filtered = fed.rx_filter[j].adjoint() * sub_channel(h, prof, j, i);
      concat.middleCols(at, prof.tx_sub[i]) = filtered;
      at += prof.tx_sub[i];
      CMatrix g = filtered * fed.tx_filter[i];
      if (!rx_transform.empty()) {
        require(rx_transform[j].rows() == dp.rx_eff[j] && rx_transform[j].cols() == dp.rx_eff[j],
                ErrorKind::InvalidInput, "evaluate_feedback: R_j has the wrong shape");
        g = rx_transform[j] * g;
      }
      fed.effective[j][i] = std::move(g);
    }
    SubspaceBasis rows = column_span(concat.transpose());
    const int a = std::min(dp.rx_eff[j], cols);
    detail::require_rank(rows.rank(), a, "row space fed by Rx " + std::to_string(j + 1));
    fed.subspaces.push_back({FedKind::RowSpace, j, -1, std::move(rows), a, cols});
  }
  return fed;
}

/// Rebuilds the transmitter-side knowledge (S^t_i and effective channels up to
/// an invertible receive-side transform) from the fed subspaces alone.
inline FedCsi transmitter_view(const NetworkConfig& cfg, const FeedbackProfile& prof,
                               std::span<const FedSubspace> fed) {
  const DerivedProfile dp = derive(cfg, prof);
  detail::require_nonnegative_dims(dp);
  const int k = cfg.users();
  FedCsi out;
  out.tx_filter.resize(k);
  out.effective.assign(k, std::vector<CMatrix>(k));
  out.subspaces.assign(fed.begin(), fed.end());

  std::vector<std::vector<SubspaceBasis>> null_spaces(k);
  for (const auto& s : fed)
    if (s.kind == FedKind::NullSpace) null_spaces[s.tx].push_back(s.space);
  for (int i = 0; i < k; ++i) {
    if (null_spaces[i].empty()) {
      out.tx_filter[i] = CMatrix::Identity(prof.tx_sub[i], prof.tx_sub[i]);
      continue;
    }
    SubspaceBasis st = intersect_subspaces(null_spaces[i]);
    detail::require_rank(st.rank(), dp.tx_eff[i], "S^t of Tx " + std::to_string(i + 1));
    out.tx_filter[i] = st.basis();
  }

  for (const auto& s : fed) {
    if (s.kind != FedKind::RowSpace) continue;
    const int j = s.rx;
    const auto aligned = prof.links(j, LinkMode::RowSpace);
    // Any matrix whose rows span the fed space is a valid stand-in for
    // R_j [.. (S^r_j)^H H^s_ji ..]; the missing rows stay zero when M^e_j
    // exceeds the concatenated width.
    CMatrix stand_in = CMatrix::Zero(dp.rx_eff[j], s.grass_b);
    stand_in.topRows(s.space.rank()) = s.space.basis().transpose();
    int at = 0;
    for (int i : aligned) {
      out.effective[j][i] = stand_in.middleCols(at, prof.tx_sub[i]) * out.tx_filter[i];
      at += prof.tx_sub[i];
    }
  }
  return out;
}

}  // namespace iafb
