#pragma once

// Feasibility verdicts for IA under a feedback profile:
//   * counting conditions on effective dimensions and on every subset of
//     aligned links (necessary),
//   * the generic rank test on the linearised constraint rows (sufficient),
//   * the max-flow test for the divisible case (necessary and sufficient).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/matproc.hpp"
#include "iafb/maxflow.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/rng.hpp"

namespace iafb {

enum class Verdict { Feasible, Infeasible, Unknown };
enum class Method { Necessary, RankTest, MaxFlow, BruteSubset };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Necessary: return "necessary";
    case Method::RankTest: return "rank_test";
    case Method::MaxFlow: return "maxflow";
    case Method::BruteSubset: return "brute_subset";
  }
  return "unknown";
}

/// Scalar IA constraint (rx, tx, p, q); p indexes receive streams, q transmit streams.
struct ConstraintIndex {
  int rx = 0;
  int tx = 0;
  int p = 0;
  int q = 0;
  bool operator==(const ConstraintIndex&) const = default;
};

struct FeasibilityReport {
  Verdict verdict = Verdict::Unknown;
  Method method = Method::Necessary;
  std::optional<std::string> failed_condition;
  std::vector<std::pair<int, int>> violating_pairs;        // (rx, tx)
  std::vector<ConstraintIndex> violating_constraints;      // max-flow cut
  long flow_value = -1;
  long flow_demand = -1;

  static FeasibilityReport infeasible(Method m, std::string why) {
    FeasibilityReport r;
    r.verdict = Verdict::Infeasible;
    r.method = m;
    r.failed_condition = std::move(why);
    return r;
  }
  static FeasibilityReport with(Verdict v, Method m) {
    FeasibilityReport r;
    r.verdict = v;
    r.method = m;
    return r;
  }
};

/// Free-variable and constraint counts of the transformed problem.
struct CountingTerms {
  std::vector<long> rx_vars;  // U_j = d0_j (M^e_j - d0_j)
  std::vector<long> tx_vars;  // V_i = d_i (N^e_i - d_i)
  std::vector<std::pair<int, int>> pairs;  // aligned links (j,i), i in IV_j
  std::vector<long> pair_constraints;      // C_ji = d0_j d_i

  long total_variables() const {
    long s = 0;
    for (long u : rx_vars) s += u;
    for (long v : tx_vars) s += v;
    return s;
  }
  long total_constraints() const {
    long s = 0;
    for (long c : pair_constraints) s += c;
    return s;
  }
};

inline CountingTerms counting_terms(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                    const DerivedProfile& dp) {
  const int k = cfg.users();
  CountingTerms t;
  t.rx_vars.resize(k);
  t.tx_vars.resize(k);
  for (int j = 0; j < k; ++j)
    t.rx_vars[j] = static_cast<long>(dp.rx_streams[j]) * (dp.rx_eff[j] - dp.rx_streams[j]);
  for (int i = 0; i < k; ++i)
    t.tx_vars[i] = static_cast<long>(cfg.streams[i]) * (dp.tx_eff[i] - cfg.streams[i]);
  for (int j = 0; j < k; ++j)
    for (int i : prof.links(j, LinkMode::RowSpace)) {
      t.pairs.emplace_back(j, i);
      t.pair_constraints.push_back(static_cast<long>(dp.rx_streams[j]) * cfg.streams[i]);
    }
  return t;
}

/// Conditions N^e_i >= d_i and M^e_j >= d0_j. Never returns Feasible.
inline FeasibilityReport necessary_check(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  const DerivedProfile dp = derive(cfg, prof);
  for (int i = 0; i < cfg.users(); ++i)
    if (dp.tx_eff[i] < cfg.streams[i])
      return FeasibilityReport::infeasible(
          Method::Necessary, "condition 1: N^e < d at Tx " + std::to_string(i + 1) + " (" +
                                 std::to_string(dp.tx_eff[i]) + " < " +
                                 std::to_string(cfg.streams[i]) + ")");
  for (int j = 0; j < cfg.users(); ++j)
    if (dp.rx_eff[j] < dp.rx_streams[j])
      return FeasibilityReport::infeasible(
          Method::Necessary, "condition 2: M^e < d0 at Rx " + std::to_string(j + 1) + " (" +
                                 std::to_string(dp.rx_eff[j]) + " < " +
                                 std::to_string(dp.rx_streams[j]) + ")");
  return FeasibilityReport::with(Verdict::Unknown, Method::Necessary);
}

/// Enumerates every subset of aligned links and checks that the variables
/// touched by the subset are at least its constraint count.
inline FeasibilityReport brute_subset_check(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                            int max_pairs = 20) {
  const DerivedProfile dp = derive(cfg, prof);
  const CountingTerms t = counting_terms(cfg, prof, dp);
  const int n = static_cast<int>(t.pairs.size());
  require(n <= max_pairs, ErrorKind::UnsupportedSize,
          "brute_subset_check: " + std::to_string(n) + " aligned links exceed the limit of " +
              std::to_string(max_pairs));
  const int k = cfg.users();
  std::vector<int> rx_count(k), tx_count(k);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::fill(rx_count.begin(), rx_count.end(), 0);
    std::fill(tx_count.begin(), tx_count.end(), 0);
    long constraints = 0;
    for (int b = 0; b < n; ++b)
      if (mask >> b & 1) {
        rx_count[t.pairs[b].first] = 1;
        tx_count[t.pairs[b].second] = 1;
        constraints += t.pair_constraints[b];
      }
    long variables = 0;
    for (int u = 0; u < k; ++u) {
      if (rx_count[u]) variables += t.rx_vars[u];
      if (tx_count[u]) variables += t.tx_vars[u];
    }
    if (variables < constraints) {
      auto r = FeasibilityReport::infeasible(
          Method::BruteSubset, "condition 3: subset has " + std::to_string(constraints) +
                                   " constraints but " + std::to_string(variables) + " variables");
      for (int b = 0; b < n; ++b)
        if (mask >> b & 1) r.violating_pairs.push_back(t.pairs[b]);
      return r;
    }
  }
  return FeasibilityReport::with(Verdict::Unknown, Method::BruteSubset);
}

/// Polynomial form of the subset condition: each aligned link must draw C_ji
/// units from its receiver's or transmitter's variables. Equivalent to the
/// subset enumeration by max-flow/min-cut. Requires conditions 1 and 2.
inline bool subset_condition_holds(const CountingTerms& t) {
  for (long u : t.rx_vars)
    if (u < 0) return false;
  for (long v : t.tx_vars)
    if (v < 0) return false;
  if (t.pairs.empty()) return true;
  const int k = static_cast<int>(t.rx_vars.size());
  FlowNetwork net(2 + 2 * k);
  const int source = 0, sink = 1;
  for (int u = 0; u < k; ++u) {
    net.add_edge(source, 2 + u, t.rx_vars[u]);
    net.add_edge(source, 2 + k + u, t.tx_vars[u]);
  }
  for (std::size_t p = 0; p < t.pairs.size(); ++p) {
    const int c = net.add_node();
    net.add_edge(2 + t.pairs[p].first, c, FlowNetwork::kInfinite);
    net.add_edge(2 + k + t.pairs[p].second, c, FlowNetwork::kInfinite);
    net.add_edge(c, sink, t.pair_constraints[p]);
  }
  return net.max_flow(source, sink) == t.total_constraints();
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Coefficient rows of the linear terms of the aligned-link equations, one
/// d_i d0_j block per link, over the variable vector
/// [vec(U~_1^H) .. vec(U~_K^H) vec(V~_1) .. vec(V~_K)].
inline CMatrix constraint_rows(const NetworkConfig& cfg, const FeedbackProfile& prof,
                               const DerivedProfile& dp, const FedCsi& fed) {
  const int k = cfg.users();
  std::vector<long> rx_offset(k), tx_offset(k);
  long at = 0;
  for (int j = 0; j < k; ++j) {
    rx_offset[j] = at;
    at += static_cast<long>(dp.rx_streams[j]) * (dp.rx_eff[j] - dp.rx_streams[j]);
  }
  for (int i = 0; i < k; ++i) {
    tx_offset[i] = at;
    at += static_cast<long>(cfg.streams[i]) * (dp.tx_eff[i] - cfg.streams[i]);
  }
  const long columns = at;
  long rows = 0;
  for (int j = 0; j < k; ++j)
    for (int i : prof.links(j, LinkMode::RowSpace))
      rows += static_cast<long>(dp.rx_streams[j]) * cfg.streams[i];

  CMatrix x = CMatrix::Zero(rows, columns);
  long row = 0;
  for (int j = 0; j < k; ++j) {
    const int d0 = dp.rx_streams[j];
    const int me = dp.rx_eff[j];
    for (int i : prof.links(j, LinkMode::RowSpace)) {
      const int di = cfg.streams[i];
      const int ne = dp.tx_eff[i];
      const CMatrix& g = fed.G(j, i);
      const long height = static_cast<long>(d0) * di;
      if (me > d0) {
        const CMatrix g2 = g.block(d0, 0, me - d0, di);
        x.block(row, rx_offset[j], height, static_cast<long>(d0) * (me - d0)) =
            kron(g2.transpose(), CMatrix::Identity(d0, d0));
      }
      if (ne > di) {
        const CMatrix g3 = g.block(0, di, d0, ne - di);
        x.block(row, tx_offset[i], height, static_cast<long>(di) * (ne - di)) =
            kron(CMatrix::Identity(di, di), g3);
      }
      row += height;
    }
  }
  return x;
}

struct RankTestOptions {
  double tol = kRankTol;
  std::uint64_t seed = 0;                  // augmentation rows
  std::span<const CMatrix> rx_transform;   // optional R_j
  bool counting_prefilter = true;          // reject subset-condition violations before the SVD
};

/// Generic sufficient test on one realization; the verdict holds for the
/// profile almost surely.
inline FeasibilityReport rank_test(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                   const ChannelRealization& h, const RankTestOptions& opts = {}) {
  FeasibilityReport nec = necessary_check(cfg, prof);
  if (nec.verdict == Verdict::Infeasible) {
    nec.method = Method::RankTest;
    return nec;
  }
  const DerivedProfile dp = derive(cfg, prof);
  const CountingTerms t = counting_terms(cfg, prof, dp);
  const long vars = t.total_variables();
  const long rows = t.total_constraints();
  if (vars < rows)
    return FeasibilityReport::infeasible(
        Method::RankTest, "row count " + std::to_string(rows) + " exceeds variable count " +
                              std::to_string(vars));
  if (opts.counting_prefilter && !subset_condition_holds(t))
    return FeasibilityReport::infeasible(Method::RankTest,
                                         "condition 3: a subset of aligned links is overloaded");
  if (rows == 0) return FeasibilityReport::with(Verdict::Feasible, Method::RankTest);

  const FedCsi fed = evaluate_feedback(cfg, prof, h, opts.rx_transform);
  CMatrix square(vars, vars);
  square.topRows(rows) = constraint_rows(cfg, prof, dp, fed);
  if (vars > rows) {
    Rng rng = make_rng(opts.seed, {0x58ULL});
    square.bottomRows(vars - rows) = complex_gaussian(vars - rows, vars, rng);
  }
  if (det_nonzero(square, opts.tol)) return FeasibilityReport::with(Verdict::Feasible, Method::RankTest);
  return FeasibilityReport::infeasible(Method::RankTest,
                                       "constraint rows are linearly dependent");
}

/// Rank test on a freshly drawn realization keyed by seed.
inline FeasibilityReport rank_test(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                   std::uint64_t seed) {
  const ChannelRealization h = generate_channels(cfg, derive_seed(seed, {0x52ULL}));
  RankTestOptions opts;
  opts.seed = seed;
  return rank_test(cfg, prof, h, opts);
}

// ---------------------------------------------------------------------------
// Max-flow test (common stream count d, all submatrix sizes divisible by d).

/// Range of the receive-stream index p in the constraint set. ReceiverStreams
/// uses p = 1..d0_j (one entry per scalar constraint); Literal uses
/// p = 1..d + d0_j.
enum class StreamIndexRange { ReceiverStreams, Literal };

/// Flow graph with the d transmit-stream replicas of every constraint merged
/// into one node; merged capacities are scaled by d.
struct FlowAnalysis {
  struct Group {
    int rx, tx, p;  // constraint (rx, tx, p, q) for q = 0..d-1
    int node;
    int sink_edge;
  };

  FlowNetwork net;
  int source = 0;
  int sink = 1;
  int d = 1;
  std::vector<Group> groups;
  std::vector<std::vector<int>> rx_node;  // rx_node[j][p]
  std::vector<int> tx_node;
  std::vector<long> rx_capacity;          // U_jp per receiver
  std::vector<long> tx_capacity;          // V_iq per transmitter
  long flow = 0;
  long demand = 0;

  bool saturated() const { return flow == demand; }
};

inline void require_divisible(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  const int d = cfg.streams.front();
  for (int i = 0; i < cfg.users(); ++i) {
    require(cfg.streams[i] == d, ErrorKind::UnsupportedCase,
            "maxflow_check: stream counts differ across users");
    require(prof.rx_sub[i] % d == 0 && prof.tx_sub[i] % d == 0, ErrorKind::UnsupportedCase,
            "maxflow_check: submatrix sizes are not divisible by d");
  }
}

/// Builds and solves the flow problem. Conditions 1 and 2 must hold.
inline FlowAnalysis analyze_flow(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                 StreamIndexRange range = StreamIndexRange::ReceiverStreams) {
  require_divisible(cfg, prof);
  const DerivedProfile dp = derive(cfg, prof);
  const int k = cfg.users();
  FlowAnalysis fa;
  fa.d = cfg.streams.front();
  fa.net = FlowNetwork(2);
  fa.rx_node.assign(k, {});
  fa.tx_node.assign(k, -1);
  fa.rx_capacity.resize(k);
  fa.tx_capacity.resize(k);
  for (int u = 0; u < k; ++u) {
    fa.rx_capacity[u] = dp.rx_eff[u] - dp.rx_streams[u];
    fa.tx_capacity[u] = dp.tx_eff[u] - fa.d;
    require(fa.rx_capacity[u] >= 0 && fa.tx_capacity[u] >= 0, ErrorKind::InvalidState,
            "analyze_flow: conditions 1-2 do not hold");
  }
  for (int j = 0; j < k; ++j) {
    const auto aligned = prof.links(j, LinkMode::RowSpace);
    if (aligned.empty()) continue;
    const int p_count = range == StreamIndexRange::Literal ? fa.d + dp.rx_streams[j] : dp.rx_streams[j];
    for (int p = 0; p < p_count; ++p) {
      const int u = fa.net.add_node();
      fa.net.add_edge(fa.source, u, fa.rx_capacity[j]);
      fa.rx_node[j].push_back(u);
    }
    for (int i : aligned) {
      if (fa.tx_node[i] < 0) {
        fa.tx_node[i] = fa.net.add_node();
        fa.net.add_edge(fa.source, fa.tx_node[i], fa.d * fa.tx_capacity[i]);
      }
      for (int p = 0; p < p_count; ++p) {
        const int c = fa.net.add_node();
        fa.net.add_edge(fa.rx_node[j][p], c, FlowNetwork::kInfinite);
        fa.net.add_edge(fa.tx_node[i], c, FlowNetwork::kInfinite);
        const int e = fa.net.add_edge(c, fa.sink, fa.d);
        fa.groups.push_back({j, i, p, c, e});
      }
    }
  }
  fa.demand = static_cast<long>(fa.groups.size()) * fa.d;
  fa.flow = fa.net.max_flow(fa.source, fa.sink);
  return fa;
}

/// Alternating closure from an unsaturated constraint: collects constraints
/// reachable through variable nodes that carry flow into them. The result
/// violates the counting inequality (checked before returning).
inline std::vector<ConstraintIndex> violating_subset_from_cut(const FlowAnalysis& fa) {
  require(!fa.saturated(), ErrorKind::InvalidState,
          "violating_subset_from_cut: the flow saturates every constraint");
  const FlowNetwork& net = fa.net;
  const int n = net.nodes();
  std::vector<char> in_c(n, 0), in_u(n, 0);
  std::vector<int> group_of(n, -1);
  for (std::size_t g = 0; g < fa.groups.size(); ++g) group_of[fa.groups[g].node] = static_cast<int>(g);

  int start = -1;
  for (std::size_t g = 0; g < fa.groups.size(); ++g)
    if (net.flow(fa.groups[g].sink_edge) < fa.d) {
      start = static_cast<int>(g);
      break;
    }
  std::vector<int> c_list{fa.groups[start].node};
  in_c[fa.groups[start].node] = 1;
  std::vector<int> u_list;
  std::size_t c_done = 0, u_done = 0;
  while (c_done < c_list.size() || u_done < u_list.size()) {
    // Variable nodes adjacent to collected constraints.
    for (; c_done < c_list.size(); ++c_done)
      for (int e : net.in_edges(c_list[c_done])) {
        const int z = net.edge_from(e);
        if (!in_u[z]) {
          in_u[z] = 1;
          u_list.push_back(z);
        }
      }
    // Constraints fed by collected variable nodes.
    for (; u_done < u_list.size(); ++u_done)
      for (int e : net.out_edges(u_list[u_done])) {
        const int r = net.edge_to(e);
        if (group_of[r] >= 0 && !in_c[r] && net.flow(e) > 0) {
          in_c[r] = 1;
          c_list.push_back(r);
        }
      }
  }

  long capacity = 0;
  for (int z : u_list) {
    for (int e : net.in_edges(z))
      if (net.edge_from(e) == fa.source) capacity += net.capacity(e);
  }
  std::vector<ConstraintIndex> out;
  for (int node : c_list) {
    const auto& g = fa.groups[group_of[node]];
    for (int q = 0; q < fa.d; ++q) out.push_back({g.rx, g.tx, g.p, q});
  }
  std::sort(out.begin(), out.end(), [](const ConstraintIndex& a, const ConstraintIndex& b) {
    return std::tie(a.rx, a.tx, a.p, a.q) < std::tie(b.rx, b.tx, b.p, b.q);
  });
  require(capacity < static_cast<long>(out.size()), ErrorKind::InvalidState,
          "violating_subset_from_cut: closure does not violate the counting inequality");
  return out;
}

inline FeasibilityReport maxflow_check(const NetworkConfig& cfg, const FeedbackProfile& prof,
                                       StreamIndexRange range = StreamIndexRange::ReceiverStreams) {
  require_divisible(cfg, prof);
  FeasibilityReport nec = necessary_check(cfg, prof);
  if (nec.verdict == Verdict::Infeasible) {
    nec.method = Method::MaxFlow;
    return nec;
  }
  const FlowAnalysis fa = analyze_flow(cfg, prof, range);
  FeasibilityReport r = FeasibilityReport::with(Verdict::Feasible, Method::MaxFlow);
  if (!fa.saturated()) {
    r = FeasibilityReport::infeasible(Method::MaxFlow,
                                      "max flow " + std::to_string(fa.flow) + " < " +
                                          std::to_string(fa.demand) + " constraints");
    r.violating_constraints = violating_subset_from_cut(fa);
    for (const auto& c : r.violating_constraints) {
      std::pair<int, int> pr{c.rx, c.tx};
      if (r.violating_pairs.empty() || r.violating_pairs.back() != pr) r.violating_pairs.push_back(pr);
    }
  }
  r.flow_value = fa.flow;
  r.flow_demand = fa.demand;
  return r;
}

/// Necessary conditions plus the subset condition; Feasible only where the
/// two coincide with sufficiency (divisible case), Unknown otherwise.
inline FeasibilityReport counting_check(const NetworkConfig& cfg, const FeedbackProfile& prof) {
  FeasibilityReport nec = necessary_check(cfg, prof);
  if (nec.verdict == Verdict::Infeasible) return nec;
  const DerivedProfile dp = derive(cfg, prof);
  const CountingTerms t = counting_terms(cfg, prof, dp);
  FeasibilityReport r;
  if (t.pairs.size() <= 20) {
    r = brute_subset_check(cfg, prof);
  } else {
    r = subset_condition_holds(t)
            ? FeasibilityReport::with(Verdict::Unknown, Method::BruteSubset)
            : FeasibilityReport::infeasible(Method::BruteSubset,
                                            "condition 3: a subset of aligned links is overloaded");
  }
  if (r.verdict == Verdict::Infeasible) return r;
  bool divisible = true;
  const int d = cfg.streams.front();
  for (int i = 0; i < cfg.users(); ++i)
    divisible = divisible && cfg.streams[i] == d && prof.rx_sub[i] % d == 0 && prof.tx_sub[i] % d == 0;
  r.verdict = divisible ? Verdict::Feasible : Verdict::Unknown;
  return r;
}

}  // namespace iafb
