#pragma once

// Feedback profile design: greedy strategy search with a feasibility oracle,
// exhaustive search for tiny networks, and the closed-form profile for
// symmetric networks.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/feasibility.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"

namespace iafb {

enum class StrategyKind : std::uint8_t { S_I, S_II, S_III, S_IV, S_V, S_VI };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::S_I: return "S_I";
    case StrategyKind::S_II: return "S_II";
    case StrategyKind::S_III: return "S_III";
    case StrategyKind::S_IV: return "S_IV";
    case StrategyKind::S_V: return "S_V";
    case StrategyKind::S_VI: return "S_VI";
  }
  return "?";
}

/// Pair strategies (S_I..S_III) carry rx and tx; unary ones carry tx only
/// (rx = -1). For S_V the index names the receiver, stored in tx.
struct UpdateStrategy {
  StrategyKind kind = StrategyKind::S_I;
  int rx = -1;
  int tx = -1;

  bool is_pair() const { return kind <= StrategyKind::S_III; }
  bool operator==(const UpdateStrategy&) const = default;
  auto key() const { return std::tuple(static_cast<int>(kind), rx, tx); }
};

inline std::string describe(const UpdateStrategy& s) {
  std::string out(to_string(s.kind));
  if (s.is_pair()) return out + "(" + std::to_string(s.rx + 1) + "," + std::to_string(s.tx + 1) + ")";
  return out + "(" + std::to_string(s.tx + 1) + ")";
}

inline std::vector<UpdateStrategy> strategy_space(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  prof.validate(cfg);
  const int k = cfg.users();
  std::vector<UpdateStrategy> out;
  for (StrategyKind kind : {StrategyKind::S_I, StrategyKind::S_II, StrategyKind::S_III})
    for (int j = 0; j < k; ++j)
      for (int i : prof.links(j, LinkMode::RowSpace)) out.push_back({kind, j, i});
  for (int i = 0; i < k; ++i) out.push_back({StrategyKind::S_IV, -1, i});
  for (int i = 0; i < k; ++i)
    if (prof.rx_sub[i] > 1) out.push_back({StrategyKind::S_V, -1, i});
  for (int i = 0; i < k; ++i)
    if (prof.tx_sub[i] > 1) out.push_back({StrategyKind::S_VI, -1, i});
  return out;
}

inline FeedbackProfile apply_strategy(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                      const UpdateStrategy& s) {
  prof.validate(cfg);
  const int k = cfg.users();
  require(s.tx >= 0 && s.tx < k, ErrorKind::InvalidStrategy, "strategy index out of range");
  FeedbackProfile out = prof;
  const int i = s.tx;
  switch (s.kind) {
    case StrategyKind::S_I:
    case StrategyKind::S_II:
    case StrategyKind::S_III: {
      require(s.rx >= 0 && s.rx < k && prof.mode[s.rx][i] == LinkMode::RowSpace,
              ErrorKind::InvalidStrategy, describe(s) + ": link is not in the row-space set");
      out.mode[s.rx][i] = kCrossModes[static_cast<int>(s.kind)];
      break;
    }
    case StrategyKind::S_IV:
      out.tx_sub[i] = cfg.streams[i];
      for (int j = 0; j < k; ++j)
        if (j != i && out.mode[j][i] == LinkMode::RowSpace) out.mode[j][i] = LinkMode::Aggregate;
      break;
    case StrategyKind::S_V:
      require(prof.rx_sub[i] > 1, ErrorKind::InvalidStrategy, describe(s) + ": M^s is already 1");
      --out.rx_sub[i];
      break;
    case StrategyKind::S_VI:
      require(prof.tx_sub[i] > 1, ErrorKind::InvalidStrategy, describe(s) + ": N^s is already 1");
      --out.tx_sub[i];
      break;
  }
  return out;
}

/// Slack of the transformed problem: free variables minus aligned-link constraints.
inline long slack_variables(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  const DerivedProfile dp = derive(cfg, prof);
  const CountingTerms t = counting_terms(cfg, prof, dp);
  return t.total_variables() - t.total_constraints();
}

struct PriorityTerms {
  long reduction = 0;    // D(L) - D(L')
  long consumption = 0;  // V(L) - V(L')
  double priority = -1.0;
};

inline PriorityTerms priority_terms(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                    const UpdateStrategy& s) {
  const FeedbackProfile next = apply_strategy(cfg, prof, s);
  PriorityTerms p;
  p.reduction = feedback_dimension(cfg, prof) - feedback_dimension(cfg, next);
  p.consumption = slack_variables(cfg, prof) - slack_variables(cfg, next);
  const double total = cfg.total_streams();
  const double alpha = cfg.users() * total * total;
  if (p.reduction >= 0 && p.consumption <= 0)
    p.priority = static_cast<double>(p.reduction) * static_cast<double>(1 - p.consumption) * alpha;
  else if (p.reduction >= 0)
    p.priority = static_cast<double>(p.reduction) / static_cast<double>(p.consumption);
  return p;
}

inline double priority(const NetworkConfig& cfg, const FeedbackProfile& prof, const UpdateStrategy& s) {
  return priority_terms(cfg, prof, s).priority;
}

using FeasibilityOracle = std::function<bool(const FeedbackProfile&)>;

/// Rank test on one fixed realization drawn from seed; the counting
/// conditions screen out candidates before the SVD.
inline FeasibilityOracle rank_test_oracle(const NetworkConfig& cfg, std::uint64_t seed) {
  auto h = std::make_shared<ChannelRealization>(generate_channels(cfg, derive_seed(seed, {0x52ULL})));
  return [cfg, h, seed](const FeedbackProfile& prof) {
    RankTestOptions opts;
    opts.seed = seed;
    return rank_test(cfg, prof, *h, opts).verdict == Verdict::Feasible;
  };
}

/// Pruned starting point: M^s = min(M, sum d), N^s = min(N, sum d), every
/// cross link in the row-space set.
inline FeedbackProfile initial_profile(const NetworkConfig& cfg) {
  cfg.validate();
  const int total = cfg.total_streams();
  std::vector<int> rx(cfg.users()), tx(cfg.users());
  for (int i = 0; i < cfg.users(); ++i) {
    rx[i] = std::min(cfg.rx_antennas[i], total);
    tx[i] = std::min(cfg.tx_antennas[i], total);
  }
  return FeedbackProfile::uniform(std::move(rx), std::move(tx), LinkMode::RowSpace);
}

struct DesignStep {
  UpdateStrategy strategy;
  long reduction = 0;
  long consumption = 0;
  double priority = 0.0;
  long dimension = 0;  // D after the step
};

struct RejectedTrial {
  int pass = 0;
  UpdateStrategy strategy;
  std::string reason;
};

struct DesignTrace {
  long initial_dimension = 0;
  std::vector<DesignStep> accepted;
  std::vector<RejectedTrial> rejected;
  long oracle_calls = 0;
  long passes = 0;
};

struct DesignResult {
  FeedbackProfile profile;
  DesignTrace trace;
};

namespace detail {

// S_IV is a no-op once N^s = d and the transmitter is in no row-space set.
inline bool changes_profile(const FeedbackProfile& prof, const FeedbackProfile& next) {
  return !(prof == next);
}

}  // namespace detail

inline DesignResult greedy_design(const NetworkConfig& cfg, const FeasibilityOracle& feasible,
                                  std::optional<FeedbackProfile> start = std::nullopt) {
  cfg.validate();
  DesignResult result{start ? *start : initial_profile(cfg), {}};
  FeedbackProfile& prof = result.profile;
  prof.validate(cfg);
  DesignTrace& trace = result.trace;
  ++trace.oracle_calls;
  if (!feasible(prof))
    fail(ErrorKind::InfeasibleAtStart, "the starting profile does not pass the feasibility test");
  trace.initial_dimension = feedback_dimension(cfg, prof);

  struct Candidate {
    UpdateStrategy s;
    PriorityTerms p;
    FeedbackProfile next;
  };
  for (;;) {
    ++trace.passes;
    std::vector<Candidate> candidates;
    for (const auto& s : strategy_space(cfg, prof)) {
      FeedbackProfile next = apply_strategy(cfg, prof, s);
      if (!detail::changes_profile(prof, next)) continue;
      PriorityTerms p = priority_terms(cfg, prof, s);
      if (p.priority < 0) continue;
      candidates.push_back({s, p, std::move(next)});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.p.priority != b.p.priority) return a.p.priority > b.p.priority;
      return a.s.key() < b.s.key();
    });
    bool moved = false;
    for (auto& c : candidates) {
      ++trace.oracle_calls;
      if (!feasible(c.next)) {
        trace.rejected.push_back({static_cast<int>(trace.passes), c.s, "infeasible"});
        continue;
      }
      prof = std::move(c.next);
      trace.accepted.push_back(
          {c.s, c.p.reduction, c.p.consumption, c.p.priority, feedback_dimension(cfg, prof)});
      moved = true;
      break;
    }
    if (!moved) break;
  }
  return result;
}

inline DesignResult greedy_design(const NetworkConfig& cfg, std::uint64_t seed) {
  return greedy_design(cfg, rank_test_oracle(cfg, seed));
}

struct ExhaustiveCaps {
  std::optional<std::vector<int>> rx_sub;  // fixed M^s when set
  std::optional<std::vector<int>> tx_sub;  // fixed N^s when set
  long max_candidates = 1'000'000;
};

/// Minimal-D feasible profile by full enumeration; ties keep the first
/// candidate in enumeration order.
inline FeedbackProfile exhaustive_design(const NetworkConfig& cfg, const FeasibilityOracle& feasible,
                                         const ExhaustiveCaps& caps = {}) {
  cfg.validate();
  const int k = cfg.users();
  const int cross = k * (k - 1);
  long sizes = 1;
  for (int i = 0; i < k; ++i) {
    if (!caps.rx_sub) sizes *= cfg.rx_antennas[i];
    if (!caps.tx_sub) sizes *= cfg.tx_antennas[i];
  }
  double space = static_cast<double>(sizes);
  for (int c = 0; c < cross; ++c) space *= 4.0;
  require(space <= static_cast<double>(caps.max_candidates), ErrorKind::SpaceTooLarge,
          "exhaustive_design: " + std::to_string(static_cast<long long>(space)) +
              " candidates exceed the guard");
  long partitions = 1;
  for (int c = 0; c < cross; ++c) partitions *= 4;

  std::optional<FeedbackProfile> best;
  long best_dim = 0;
  std::vector<int> rx(k), tx(k);
  for (long sz = 0; sz < sizes; ++sz) {
    long code = sz;
    for (int i = 0; i < k; ++i) {
      if (caps.rx_sub) {
        rx[i] = (*caps.rx_sub)[i];
      } else {
        rx[i] = 1 + static_cast<int>(code % cfg.rx_antennas[i]);
        code /= cfg.rx_antennas[i];
      }
      if (caps.tx_sub) {
        tx[i] = (*caps.tx_sub)[i];
      } else {
        tx[i] = 1 + static_cast<int>(code % cfg.tx_antennas[i]);
        code /= cfg.tx_antennas[i];
      }
    }
    for (long part = 0; part < partitions; ++part) {
      FeedbackProfile prof = FeedbackProfile::uniform(rx, tx, LinkMode::NoFeedback);
      long pc = part;
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) {
          if (i == j) continue;
          prof.mode[j][i] = kCrossModes[pc % 4];
          pc /= 4;
        }
      const DerivedProfile dp = derive(cfg, prof);
      bool sane = true;
      for (int u = 0; u < k; ++u) sane = sane && dp.rx_eff[u] >= 0 && dp.tx_eff[u] >= 0;
      if (!sane) continue;
      const long dim = feedback_dimension(cfg, prof);
      if (best && dim >= best_dim) continue;
      if (necessary_check(cfg, prof).verdict == Verdict::Infeasible) continue;
      if (!feasible(prof)) continue;
      best = std::move(prof);
      best_dim = dim;
    }
  }
  require(best.has_value(), ErrorKind::InfeasibleAtStart, "exhaustive_design: no feasible profile");
  return *best;
}

struct SymmetricDesign {
  NetworkConfig network;
  FeedbackProfile profile;
  long dimension = 0;
};

/// Closed-form profile for K users with M receive and KM/2 transmit antennas.
inline SymmetricDesign symmetric_profile(int k, int m, int d) {
  require(k >= 2 && m >= 2 && d >= 1 && m % 2 == 0 && m <= 2 * k + 1 && m % d == 0,
          ErrorKind::UnsupportedCase, "symmetric_profile: parameters outside the supported family");
  const int n = k * m / 2;
  SymmetricDesign out{NetworkConfig::symmetric(k, m, n, d), {}, 0};
  if (d * k <= m) {
    out.profile = FeedbackProfile::uniform(std::vector<int>(k, m), std::vector<int>(k, d),
                                           LinkMode::NoFeedback);
    out.dimension = 0;
    return out;
  }
  const int groups = m / d;  // K - kappa
  const int kappa = k - groups;
  require(kappa >= 1 && kappa <= k - 2, ErrorKind::UnsupportedCase,
          "symmetric_profile: d = M is outside the supported family");
  const int head = kappa + 1;  // users 0..head-1 keep N^s = Kd
  std::vector<int> rx(k), tx(k);
  for (int i = 0; i < k; ++i) {
    rx[i] = i < head ? m : m - d;
    tx[i] = i < head ? k * d : d;
  }
  out.profile = FeedbackProfile::uniform(rx, tx, LinkMode::Aggregate);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < head; ++i)
      if (i != j) out.profile.mode[j][i] = LinkMode::NullSpace;
  out.dimension = static_cast<long>((k + 1) * d * d - m * d) * (k - 1) * (k - 1);
  return out;
}

}  // namespace iafb
