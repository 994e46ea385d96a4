#pragma once

// Alternating leakage minimization on the effective channels, reconstruction
// of full precoders and decorrelators, and verification of the IA conditions.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/matproc.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/rng.hpp"

namespace iafb {

struct SolverOptions {
  int max_iters = 5000;
  double leak_tol = 1e-14;  // on the summed squared residual
  std::uint64_t seed = 0;
  int restarts = 0;  // extra seeded attempts after a non-converged run

  void validate() const {
    require(max_iters >= 1, ErrorKind::InvalidInput, "solver: max_iters must be at least 1");
    require(leak_tol > 0.0, ErrorKind::InvalidInput, "solver: leak_tol must be positive");
    require(restarts >= 0, ErrorKind::InvalidInput, "solver: restarts must be non-negative");
  }
};

struct IASolution {
  std::vector<CMatrix> tx_inner;  // V^a_i, N^e_i x d_i
  std::vector<CMatrix> rx_inner;  // U^b_j, M^e_j x d0_j
  std::vector<CMatrix> precoder;  // V_i, N_i x d_i
  std::vector<CMatrix> decorrelator;  // U_j, M_j x d_j
  std::vector<double> leakage_trace;  // one entry per sweep
  bool converged = false;
  int attempts = 1;

  double final_leakage() const {
    return leakage_trace.empty() ? 0.0 : leakage_trace.back();
  }
};

inline CMatrix random_frame(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (cols == 0) return CMatrix(rows, 0);
  const CMatrix g = complex_gaussian(rows, cols, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(rows, cols);
}

namespace detail {

inline void check_shapes(const NetworkConfig& cfg, const FeedbackProfile& prof,
                         const DerivedProfile& dp, const FedCsi& fed) {
  const int k = cfg.users();
  for (int i = 0; i < k; ++i) {
    require(dp.tx_eff[i] >= cfg.streams[i] && dp.rx_eff[i] >= dp.rx_streams[i],
            ErrorKind::InvalidInput, "solver: profile violates the dimension conditions");
  }
  require(static_cast<int>(fed.effective.size()) == k && static_cast<int>(fed.tx_filter.size()) == k,
          ErrorKind::InvalidInput, "solver: fed CSI has the wrong user count");
  for (int j = 0; j < k; ++j)
    for (int i : prof.links(j, LinkMode::RowSpace)) {
      const CMatrix& g = fed.G(j, i);
      require(g.rows() == dp.rx_eff[j] && g.cols() == dp.tx_eff[i], ErrorKind::InvalidInput,
              "solver: effective channel (" + std::to_string(j + 1) + "," + std::to_string(i + 1) +
                  ") has the wrong shape");
    }
}

inline double leakage(const FeedbackProfile& prof, const FedCsi& fed, const std::vector<CMatrix>& u,
                      const std::vector<CMatrix>& v) {
  double total = 0.0;
  for (int j = 0; j < prof.users(); ++j)
    for (int i : prof.links(j, LinkMode::RowSpace))
      total += (u[j].adjoint() * fed.G(j, i) * v[i]).squaredNorm();
  return total;
}

}  // namespace detail

/// Minimizes the total leakage over V^a and U^b using the effective channels only.
inline IASolution solve_inner(const NetworkConfig& cfg, const FeedbackProfile& prof, const FedCsi& fed,
                              const SolverOptions& opts = {}) {
  opts.validate();
  const DerivedProfile dp = derive(cfg, prof);
  detail::check_shapes(cfg, prof, dp, fed);
  const int k = cfg.users();

  IASolution best;
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    IASolution sol;
    sol.attempts = attempt + 1;
    Rng rng = make_rng(opts.seed, {0x53ULL, static_cast<std::uint64_t>(attempt)});
    sol.tx_inner.resize(k);
    sol.rx_inner.resize(k);
    for (int i = 0; i < k; ++i) sol.tx_inner[i] = random_frame(dp.tx_eff[i], cfg.streams[i], rng);
    for (int j = 0; j < k; ++j)
      sol.rx_inner[j] = CMatrix::Identity(dp.rx_eff[j], dp.rx_streams[j]);

    if (!prof.has_row_space_links()) {
      sol.leakage_trace.push_back(0.0);
      sol.converged = true;
      return sol;
    }
    for (int it = 0; it < opts.max_iters; ++it) {
      for (int j = 0; j < k; ++j) {
        CMatrix e = CMatrix::Zero(dp.rx_eff[j], dp.rx_eff[j]);
        for (int i : prof.links(j, LinkMode::RowSpace)) {
          const CMatrix gv = fed.G(j, i) * sol.tx_inner[i];
          e.noalias() += gv * gv.adjoint();
        }
        sol.rx_inner[j] = smallest_eigvecs(e, dp.rx_streams[j]);
      }
      for (int i = 0; i < k; ++i) {
        CMatrix t = CMatrix::Zero(dp.tx_eff[i], dp.tx_eff[i]);
        for (int j = 0; j < k; ++j) {
          if (j == i || prof.mode[j][i] != LinkMode::RowSpace) continue;
          const CMatrix gu = fed.G(j, i).adjoint() * sol.rx_inner[j];
          t.noalias() += gu * gu.adjoint();
        }
        sol.tx_inner[i] = smallest_eigvecs(t, cfg.streams[i]);
      }
      sol.leakage_trace.push_back(detail::leakage(prof, fed, sol.rx_inner, sol.tx_inner));
      if (sol.leakage_trace.back() < opts.leak_tol) {
        sol.converged = true;
        break;
      }
    }
    if (sol.converged) return sol;
    if (attempt == 0 || sol.final_leakage() < best.final_leakage()) best = std::move(sol);
  }
  return best;
}

/// Fills full precoders V_i = [S^t_i V^a_i; 0] and decorrelators U_j from the
/// receiver's local interference covariance.
inline IASolution reconstruct(const NetworkConfig& cfg, const FeedbackProfile& prof,
                              const ChannelRealization& h, const FedCsi& fed, IASolution sol) {
  const int k = cfg.users();
  require(static_cast<int>(sol.tx_inner.size()) == k, ErrorKind::InvalidInput,
          "reconstruct: solution has the wrong user count");
  sol.precoder.resize(k);
  sol.decorrelator.resize(k);
  for (int i = 0; i < k; ++i) {
    CMatrix v = CMatrix::Zero(cfg.tx_antennas[i], cfg.streams[i]);
    v.topRows(prof.tx_sub[i]) = fed.tx_filter[i] * sol.tx_inner[i];
    sol.precoder[i] = std::move(v);
  }
  for (int j = 0; j < k; ++j) {
    CMatrix cov = CMatrix::Zero(cfg.rx_antennas[j], cfg.rx_antennas[j]);
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      const CMatrix hv = h(j, i) * sol.precoder[i];
      cov.noalias() += hv * hv.adjoint();
    }
    cov = 0.5 * (cov + cov.adjoint()).eval();
    sol.decorrelator[j] = smallest_eigvecs(cov, cfg.streams[j]);
  }
  return sol;
}

struct IAReport {
  double max_residual = 0.0;     // max over i != j of ||U_j^H H_ji V_i||_F
  double min_direct_sv = 0.0;    // min over j of sigma_min(U_j^H H_jj V_j)
  bool pass = false;
};

inline IAReport verify_ia(const NetworkConfig& cfg, const ChannelRealization& h,
                          const std::vector<CMatrix>& v, const std::vector<CMatrix>& u, double tol = 1e-6) {
  const int k = cfg.users();
  require(static_cast<int>(v.size()) == k && static_cast<int>(u.size()) == k, ErrorKind::InvalidInput,
          "verify_ia: one precoder and one decorrelator per user are required");
  IAReport r;
  r.min_direct_sv = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const CMatrix x = u[j].adjoint() * h(j, i) * v[i];
      if (i != j) {
        r.max_residual = std::max(r.max_residual, x.norm());
      } else {
        double smin = 0.0;
        if (x.size() > 0) {
          Eigen::BDCSVD<CMatrix> svd(x);
          smin = svd.singularValues().minCoeff();
          if (x.rows() != x.cols()) smin = 0.0;
        }
        r.min_direct_sv = std::min(r.min_direct_sv, smin);
      }
    }
  if (k == 0) r.min_direct_sv = 0.0;
  r.pass = r.max_residual < tol && r.min_direct_sv > tol;
  return r;
}

}  // namespace iafb
