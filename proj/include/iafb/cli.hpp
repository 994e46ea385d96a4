#pragma once

// Command-line front end: design, check, solve, sweep, dims.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 infeasible, 3 non-converged.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "iafb/designer.hpp"
#include "iafb/error.hpp"
#include "iafb/evaluator.hpp"
#include "iafb/feasibility.hpp"
#include "iafb/io.hpp"
#include "iafb/profile.hpp"
#include "iafb/quantizer.hpp"
#include "iafb/solver.hpp"

namespace iafb::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInfeasible = 2, kNotConverged = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out = ".";
};

struct Context {
  RunConfig rc;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::filesystem::path out;

  Json header() const { return Json{{"config_hash", rc.hash}, {"seed", seed}, {"schema", kSchemaVersion}}; }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream f(out / name, std::ios::binary);
    require(f.good(), ErrorKind::InvalidInput, "cannot write '" + (out / name).string() + "'");
    f << body;
  }
  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }
};

inline Context make_context(const Options& o) {
  Context c{load_config(o.config), 0, o.workers, o.out};
  c.seed = o.seed ? *o.seed : c.rc.seed;
  std::filesystem::create_directories(c.out);
  return c;
}

inline int cmd_design(const Context& c) {
  const NetworkConfig& cfg = c.rc.network;
  DesignResult r;
  try {
    r = greedy_design(cfg, rank_test_oracle(cfg, c.seed), c.rc.initial_profile);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InfeasibleAtStart) throw;
    Json j = c.header();
    j["status"] = "infeasible-at-start";
    j["message"] = e.what();
    c.write_json("design.json", j);
    std::cerr << e.what() << "\n";
    return kInfeasible;
  }
  Json j = c.header();
  j["status"] = "ok";
  j["feedback_dimension"] = feedback_dimension(cfg, r.profile);
  j["full_direction_dimension"] = full_direction_dimension(cfg);
  j["profile"] = to_json(r.profile);
  j["trace"] = to_json(r.trace);
  c.write_json("design.json", j);
  std::cout << "design: D=" << feedback_dimension(cfg, r.profile) << " (full direction "
            << full_direction_dimension(cfg) << "), " << r.trace.accepted.size() << " accepted steps\n";
  return kOk;
}

inline int cmd_check(const Context& c) {
  const NetworkConfig& cfg = c.rc.network;
  const FeedbackProfile prof = c.rc.profile ? *c.rc.profile : baseline2_profile(cfg);
  Json j = c.header();
  j["profile"] = to_json(prof);
  j["feedback_dimension"] = feedback_dimension(cfg, prof);

  std::vector<Verdict> decisive;
  const FeasibilityReport nec = necessary_check(cfg, prof);
  j["necessary"] = to_json(nec);
  if (nec.verdict != Verdict::Unknown) decisive.push_back(nec.verdict);

  try {
    FeasibilityReport brute = nec.verdict == Verdict::Infeasible ? nec : brute_subset_check(cfg, prof);
    j["brute_subset"] = to_json(brute);
    if (brute.verdict != Verdict::Unknown) decisive.push_back(brute.verdict);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedSize) throw;
    j["brute_subset"] = Json{{"status", to_string(e.kind())}, {"message", e.what()}};
  }

  const FeasibilityReport rank = rank_test(cfg, prof, c.seed);
  j["rank_test"] = to_json(rank);
  decisive.push_back(rank.verdict);
  Verdict overall = rank.verdict;

  try {
    const FeasibilityReport flow = maxflow_check(cfg, prof, c.rc.stream_range);
    j["maxflow"] = to_json(flow);
    decisive.push_back(flow.verdict);
    overall = flow.verdict;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedCase) throw;
    j["maxflow"] = Json{{"status", to_string(e.kind())}, {"message", e.what()}};
  }

  bool agree = true;
  for (Verdict v : decisive) agree = agree && v == decisive.front();
  j["agreement"] = agree;
  j["verdict"] = to_string(overall);
  c.write_json("check.json", j);
  std::cout << "check: " << to_string(overall) << (agree ? "" : " (checkers disagree)") << "\n";
  return overall == Verdict::Infeasible ? kInfeasible : kOk;
}

inline int cmd_solve(const Context& c) {
  const NetworkConfig& cfg = c.rc.network;
  const FeedbackProfile prof =
      c.rc.profile ? *c.rc.profile : greedy_design(cfg, rank_test_oracle(cfg, c.seed)).profile;
  Json j = c.header();
  j["profile"] = to_json(prof);
  j["feedback_dimension"] = feedback_dimension(cfg, prof);

  const FeasibilityReport nec = necessary_check(cfg, prof);
  if (nec.verdict == Verdict::Infeasible) {
    j["status"] = "infeasible";
    j["necessary"] = to_json(nec);
    c.write_json("solve.json", j);
    std::cerr << "solve: " << *nec.failed_condition << "\n";
    return kInfeasible;
  }

  const ChannelRealization h = generate_channels(cfg, derive_seed(c.seed, {0x48ULL}));
  const FedCsi fed = evaluate_feedback(cfg, prof, h);
  std::vector<FedSubspace> subspaces = fed.subspaces;
  if (c.rc.solve_bits) {
    const auto alloc = allocate_bits(subspaces, *c.rc.solve_bits);
    const QuantizedFedCsi q = quantize(subspaces, alloc, derive_seed(c.seed, {0x51ULL}));
    subspaces = q.subspaces;
    j["total_bits"] = *c.rc.solve_bits;
    j["bits"] = q.bits;
    Json dist = Json::array();
    for (double d : q.distortion) dist.push_back(d);
    j["distortion"] = dist;
  }
  const FedCsi view = transmitter_view(cfg, prof, subspaces);
  SolverOptions so = c.rc.solver;
  so.seed = derive_seed(c.seed, {0x56ULL});
  IASolution sol = reconstruct(cfg, prof, h, view, solve_inner(cfg, prof, view, so));
  const IAReport rep = verify_ia(cfg, h, sol.precoder, sol.decorrelator);

  std::string csv = "# config_hash=" + c.rc.hash + " seed=" + std::to_string(c.seed) + "\nsweep,leakage\n";
  for (std::size_t t = 0; t < sol.leakage_trace.size(); ++t)
    csv += std::to_string(t + 1) + "," + format_double(sol.leakage_trace[t]) + "\n";
  c.write("leakage.csv", csv);

  j["status"] = sol.converged ? "converged" : "not-converged";
  j["sweeps"] = sol.leakage_trace.size();
  j["final_leakage"] = sol.final_leakage();
  j["verify"] = Json{{"max_residual", rep.max_residual}, {"min_direct_sv", rep.min_direct_sv}, {"pass", rep.pass}};
  c.write_json("solve.json", j);
  std::cout << "solve: " << (sol.converged ? "converged" : "not converged") << " after "
            << sol.leakage_trace.size() << " sweeps, residual " << format_double(rep.max_residual) << "\n";
  return sol.converged ? kOk : kNotConverged;
}

inline int cmd_sweep(const Context& c) {
  const NetworkConfig& cfg = c.rc.network;
  SweepSpec spec = c.rc.sweep;
  spec.seed = c.seed;
  spec.workers = c.workers;
  if (c.rc.profile) spec.proposed_profile = c.rc.profile;
  const std::vector<ExperimentResult> results = run_sweep(cfg, spec);

  std::ostringstream csv;
  write_results_csv(csv, results, c.rc.hash, c.seed);
  c.write("sweep.csv", csv.str());
  Json j = c.header();
  j["axis"] = spec.axis == SweepAxis::Bits ? "bits" : "snr_db";
  j["trials"] = spec.trials;
  Json rows = Json::array();
  for (const auto& r : results) rows.push_back(to_json(r));
  j["results"] = rows;
  c.write_json("sweep.json", j);
  std::cout << "sweep: " << results.size() << " points written\n";
  for (const auto& r : results)
    if (r.failures == r.trials) return kInfeasible;
  return kOk;
}

inline int cmd_dims(const Context& c) {
  const NetworkConfig& cfg = c.rc.network;
  Json j = c.header();
  const long b1 = baseline1_dimension(cfg);
  const long b2 = feedback_dimension(cfg, baseline2_profile(cfg));
  const FeasibilityOracle oracle = rank_test_oracle(cfg, c.seed);
  const long b3 = feedback_dimension(cfg, baseline3_profile(cfg, oracle));
  j["baseline1"] = b1;
  j["baseline2"] = b2;
  j["baseline3"] = b3;
  std::cout << "baseline1 " << b1 << "\nbaseline2 " << b2 << "\nbaseline3 " << b3 << "\n";
  try {
    const long p = feedback_dimension(cfg, greedy_design(cfg, oracle).profile);
    j["proposed"] = p;
    std::cout << "proposed " << p << "\n";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InfeasibleAtStart) throw;
    j["proposed"] = Json();
    std::cout << "proposed infeasible-at-start\n";
  }
  if (c.rc.profile) {
    j["config_profile"] = feedback_dimension(cfg, *c.rc.profile);
    std::cout << "config_profile " << feedback_dimension(cfg, *c.rc.profile) << "\n";
  }
  c.write_json("dims.json", j);
  return kOk;
}

inline int run(int argc, char** argv) {
  CLI::App app{"Interference alignment with reduced CSI feedback", "iafb"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Base seed (overrides the config)");
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Output directory");
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Context&);
  };
  const Sub subs[] = {{"design", "Greedy feedback profile design", cmd_design},
                      {"check", "Feasibility verdicts for the config profile", cmd_check},
                      {"solve", "Single IA solve with leakage trace", cmd_solve},
                      {"sweep", "Monte-Carlo throughput sweep", cmd_sweep},
                      {"dims", "Feedback dimensions of all schemes", cmd_dims}};
  for (const Sub& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  try {
    const Context ctx = make_context(o);
    for (const Sub& s : subs)
      if (app.got_subcommand(s.name)) return s.fn(ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InfeasibleAtStart: return kInfeasible;
      default: return kUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace iafb::cli
