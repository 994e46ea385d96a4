#pragma once

// Baseline feedback schemes, sum-rate evaluation and Monte-Carlo sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "iafb/designer.hpp"
#include "iafb/error.hpp"
#include "iafb/feasibility.hpp"
#include "iafb/matproc.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/quantizer.hpp"
#include "iafb/rng.hpp"
#include "iafb/solver.hpp"

namespace iafb {

inline long baseline1_dimension(const NetworkConfig& cfg) { return full_direction_dimension(cfg); }

/// Full submatrices, every cross link in the row-space set.
inline FeedbackProfile baseline2_profile(const NetworkConfig& cfg) {
  cfg.validate();
  return FeedbackProfile::uniform(cfg.rx_antennas, cfg.tx_antennas, LinkMode::RowSpace);
}

/// Shrinks the baseline-2 submatrices one antenna at a time while the oracle
/// accepts: the largest of all M^s_j and N^s_i goes first, receivers before
/// transmitters on ties, then the lower index; the scan restarts after every
/// accepted decrement.
inline FeedbackProfile baseline3_profile(const NetworkConfig& cfg, const FeasibilityOracle& feasible) {
  FeedbackProfile prof = baseline2_profile(cfg);
  if (!feasible(prof)) return prof;
  const int k = cfg.users();
  for (;;) {
    struct Move {
      int size;
      int side;  // 0 = Rx, 1 = Tx
      int user;
    };
    std::vector<Move> moves;
    for (int u = 0; u < k; ++u) {
      if (prof.rx_sub[u] > 1) moves.push_back({prof.rx_sub[u], 0, u});
      if (prof.tx_sub[u] > 1) moves.push_back({prof.tx_sub[u], 1, u});
    }
    std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) {
      if (a.size != b.size) return a.size > b.size;
      if (a.side != b.side) return a.side < b.side;
      return a.user < b.user;
    });
    bool moved = false;
    for (const Move& m : moves) {
      FeedbackProfile next = prof;
      --(m.side == 0 ? next.rx_sub : next.tx_sub)[m.user];
      if (feasible(next)) {
        prof = std::move(next);
        moved = true;
        break;
      }
    }
    if (!moved) return prof;
  }
}

inline FeedbackProfile baseline3_profile(const NetworkConfig& cfg, std::uint64_t seed) {
  return baseline3_profile(cfg, rank_test_oracle(cfg, seed));
}

/// Sum of per-user log-det rates with residual interference treated as noise.
inline double sum_rate(const NetworkConfig& cfg, const ChannelRealization& h, const std::vector<CMatrix>& v,
                       const std::vector<CMatrix>& u, double snr_db) {
  const int k = cfg.users();
  require(static_cast<int>(v.size()) == k && static_cast<int>(u.size()) == k, ErrorKind::InvalidInput,
          "sum_rate: one precoder and one decorrelator per user are required");
  const double p = std::pow(10.0, snr_db / 10.0);
  std::vector<CMatrix> vn(k), un(k);
  for (int i = 0; i < k; ++i) {
    vn[i] = v[i];
    for (Eigen::Index c = 0; c < vn[i].cols(); ++c) {
      const double n = vn[i].col(c).norm();
      if (n > 0.0) vn[i].col(c) /= n;
    }
    Eigen::HouseholderQR<CMatrix> qr(u[i]);
    un[i] = qr.householderQ() * CMatrix::Identity(u[i].rows(), u[i].cols());
  }
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const int dj = static_cast<int>(un[j].cols());
    CMatrix q = CMatrix::Identity(dj, dj);
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      const CMatrix x = un[j].adjoint() * h(j, i) * vn[i];
      q.noalias() += (p / cfg.streams[i]) * x * x.adjoint();
    }
    const CMatrix a = un[j].adjoint() * h(j, j) * vn[j];
    const CMatrix qa = q.llt().solve(a);
    CMatrix s = CMatrix::Identity(dj, dj) + (p / cfg.streams[j]) * a.adjoint() * qa;
    s = 0.5 * (s + s.adjoint()).eval();
    Eigen::LLT<CMatrix> llt(s);
    double logdet = 0.0;
    for (int r = 0; r < dj; ++r) logdet += 2.0 * std::log2(std::real(llt.matrixL()(r, r)));
    total += logdet;
  }
  return total;
}

enum class Scheme { Proposed, Baseline1, Baseline2, Baseline3 };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::Baseline1: return "baseline1";
    case Scheme::Baseline2: return "baseline2";
    case Scheme::Baseline3: return "baseline3";
  }
  return "?";
}

inline Scheme scheme_from_string(std::string_view name) {
  for (Scheme s : {Scheme::Proposed, Scheme::Baseline1, Scheme::Baseline2, Scheme::Baseline3})
    if (to_string(s) == name) return s;
  fail(ErrorKind::InvalidInput, "unknown scheme '" + std::string(name) + "'");
}

struct SchemeSpec {
  Scheme scheme = Scheme::Proposed;
  bool quantized = true;

  std::string label() const { return std::string(to_string(scheme)) + (quantized ? "" : "_perfect"); }
};

enum class SweepAxis { Bits, Snr };

struct SweepSpec {
  std::vector<SchemeSpec> schemes;
  std::vector<long> total_bits{400};
  std::vector<double> snr_db{25.0};
  SweepAxis axis = SweepAxis::Bits;
  int trials = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  SolverOptions solver;
  QuantizerOptions quantizer;
  double z = 1.959963984540054;  // two-sided 95% normal quantile
  std::optional<FeedbackProfile> proposed_profile;
  std::optional<FeedbackProfile> baseline3;

  void validate() const {
    require(!schemes.empty(), ErrorKind::InvalidInput, "sweep: at least one scheme is required");
    require(!snr_db.empty(), ErrorKind::InvalidInput, "sweep: the SNR list is empty");
    require(!total_bits.empty(), ErrorKind::InvalidInput, "sweep: the bits list is empty");
    require(trials >= 1, ErrorKind::InvalidInput, "sweep: trials must be at least 1");
    for (long b : total_bits) require(b >= 0, ErrorKind::InvalidInput, "sweep: negative bit budget");
  }
};

struct ExperimentResult {
  std::string scheme;
  bool quantized = true;
  long total_bits = -1;  // -1 for perfect CSI
  double snr_db = 0.0;
  double sweep_value = 0.0;
  double mean_tput = 0.0;
  double ci95 = 0.0;
  int trials = 0;
  int failures = 0;
  int unconverged = 0;
  long feedback_dim = 0;
  std::uint64_t seed = 0;
};

/// One channel draw through one scheme at one bit budget: rates per SNR.
struct TrialOutcome {
  bool ok = false;
  bool converged = false;
  std::vector<double> rates;
  std::string error;
};

struct SchemePlan {
  SchemeSpec spec;
  FeedbackProfile profile;  // profile the precoders are designed with
  long feedback_dim = 0;
};

inline TrialOutcome run_trial(const NetworkConfig& cfg, const SchemePlan& plan, const ChannelRealization& h,
                              long bits, const std::vector<double>& snr_db, std::uint64_t quant_seed,
                              const SolverOptions& solver, const QuantizerOptions& qopts) {
  TrialOutcome out;
  try {
    FedCsi view;
    if (plan.spec.scheme == Scheme::Baseline1) {
      std::vector<FedSubspace> dirs = direction_feedback(cfg, h);
      if (plan.spec.quantized) {
        const auto alloc = allocate_bits(dirs, bits);
        dirs = quantize(dirs, alloc, quant_seed, qopts).subspaces;
      }
      const ChannelRealization estimate = channels_from_directions(cfg, dirs);
      view = evaluate_feedback(cfg, plan.profile, estimate);
    } else {
      const FedCsi fed = evaluate_feedback(cfg, plan.profile, h);
      std::vector<FedSubspace> subspaces = fed.subspaces;
      if (plan.spec.quantized) {
        const auto alloc = allocate_bits(subspaces, bits);
        subspaces = quantize(subspaces, alloc, quant_seed, qopts).subspaces;
      }
      view = transmitter_view(cfg, plan.profile, subspaces);
    }
    IASolution sol = solve_inner(cfg, plan.profile, view, solver);
    sol = reconstruct(cfg, plan.profile, h, view, std::move(sol));
    out.converged = sol.converged;
    for (double snr : snr_db) out.rates.push_back(sum_rate(cfg, h, sol.precoder, sol.decorrelator, snr));
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// Calls body(t) for t in [0, n) on up to `workers` threads. Output slots are
/// indexed by t, so results do not depend on scheduling.
template <class Body>
void parallel_for(int n, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max(n, 1))));
  if (workers == 1) {
    for (int t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int t = next++; t < n; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<SchemePlan> plan_schemes(const NetworkConfig& cfg, const SweepSpec& spec) {
  std::optional<FeedbackProfile> proposed = spec.proposed_profile;
  std::optional<FeedbackProfile> b3 = spec.baseline3;
  std::vector<SchemePlan> plans;
  for (const auto& s : spec.schemes) {
    SchemePlan p{s, baseline2_profile(cfg), 0};
    switch (s.scheme) {
      case Scheme::Proposed:
        if (!proposed) proposed = greedy_design(cfg, spec.seed).profile;
        p.profile = *proposed;
        p.feedback_dim = feedback_dimension(cfg, p.profile);
        break;
      case Scheme::Baseline1:
        p.feedback_dim = baseline1_dimension(cfg);
        break;
      case Scheme::Baseline2:
        p.feedback_dim = feedback_dimension(cfg, p.profile);
        break;
      case Scheme::Baseline3:
        if (!b3) b3 = baseline3_profile(cfg, spec.seed);
        p.profile = *b3;
        p.feedback_dim = feedback_dimension(cfg, p.profile);
        break;
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

inline std::vector<ExperimentResult> run_sweep(const NetworkConfig& cfg, const SweepSpec& spec) {
  cfg.validate();
  spec.validate();
  const std::vector<SchemePlan> plans = plan_schemes(cfg, spec);

  // One solve per (scheme, bit budget) and trial; perfect-CSI schemes ignore the budget.
  struct Cell {
    std::size_t plan;
    long bits;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    if (!plans[p].spec.quantized) {
      cells.push_back({p, -1});
      continue;
    }
    for (long b : spec.total_bits) cells.push_back({p, b});
  }
  std::vector<std::vector<TrialOutcome>> outcomes(cells.size(), std::vector<TrialOutcome>(spec.trials));
  parallel_for(spec.trials, spec.workers, [&](int t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const ChannelRealization h = generate_channels(cfg, derive_seed(spec.seed, {0x54ULL, trial}));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto scheme_id = static_cast<std::uint64_t>(plans[cells[c].plan].spec.scheme);
      SolverOptions so = spec.solver;
      so.seed = derive_seed(spec.seed, {0x56ULL, trial, scheme_id});
      const std::uint64_t qseed =
          derive_seed(spec.seed, {0x51ULL, trial, scheme_id, static_cast<std::uint64_t>(cells[c].bits)});
      outcomes[c][t] = run_trial(cfg, plans[cells[c].plan], h, cells[c].bits, spec.snr_db, qseed, so,
                                 spec.quantizer);
    }
  });

  std::vector<ExperimentResult> results;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SchemePlan& plan = plans[cells[c].plan];
    for (std::size_t s = 0; s < spec.snr_db.size(); ++s) {
      ExperimentResult r;
      r.scheme = plan.spec.label();
      r.quantized = plan.spec.quantized;
      r.total_bits = cells[c].bits;
      r.snr_db = spec.snr_db[s];
      r.sweep_value = spec.axis == SweepAxis::Bits ? static_cast<double>(r.total_bits) : r.snr_db;
      r.trials = spec.trials;
      r.feedback_dim = plan.feedback_dim;
      r.seed = spec.seed;
      double sum = 0.0, sum_sq = 0.0;
      int n = 0;
      for (const TrialOutcome& o : outcomes[c]) {  // trial order
        if (!o.ok) {
          ++r.failures;
          continue;
        }
        if (!o.converged) ++r.unconverged;
        sum += o.rates[s];
        sum_sq += o.rates[s] * o.rates[s];
        ++n;
      }
      if (n > 0) {
        r.mean_tput = sum / n;
        const double var = n > 1 ? std::max(0.0, (sum_sq - n * r.mean_tput * r.mean_tput) / (n - 1)) : 0.0;
        r.ci95 = spec.z * std::sqrt(var / n);
      }
      results.push_back(r);
    }
  }
  return results;
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline void write_results_csv(std::ostream& os, const std::vector<ExperimentResult>& results,
                              const std::string& config_hash, std::uint64_t seed) {
  os << "# config_hash=" << config_hash << " seed=" << seed << "\n";
  os << "scheme,sweep_var,mean_tput,ci95,trials,feedback_dim,seed,total_bits,snr_db,failures,unconverged\n";
  for (const auto& r : results)
    os << r.scheme << ',' << format_double(r.sweep_value) << ',' << format_double(r.mean_tput) << ','
       << format_double(r.ci95) << ',' << r.trials << ',' << r.feedback_dim << ',' << r.seed << ','
       << r.total_bits << ',' << format_double(r.snr_db) << ',' << r.failures << ',' << r.unconverged
       << '\n';
}

}  // namespace iafb
