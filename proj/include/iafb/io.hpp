#pragma once

// JSON configuration (schema 1) and result serialization. User indices in
// files are 1-based.

#include <cstdint>
#include <cstdio>
#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iafb/designer.hpp"
#include "iafb/error.hpp"
#include "iafb/evaluator.hpp"
#include "iafb/feasibility.hpp"
#include "iafb/netcfg.hpp"
#include "iafb/profile.hpp"
#include "iafb/quantizer.hpp"
#include "iafb/solver.hpp"

namespace iafb {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// FNV-1a over the canonical (sorted-key, compact) dump.
inline std::string config_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

template <class T>
T get_field(const Json& obj, const char* key, const std::string& where) {
  require(obj.is_object() && obj.contains(key), ErrorKind::InvalidInput,
          where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::InvalidInput, where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return get_field<T>(obj, key, where);
}

}  // namespace detail

inline NetworkConfig network_from_json(const Json& j) {
  NetworkConfig cfg{detail::get_field<std::vector<int>>(j, "tx_antennas", "network"),
                    detail::get_field<std::vector<int>>(j, "rx_antennas", "network"),
                    detail::get_field<std::vector<int>>(j, "streams", "network")};
  cfg.validate();
  return cfg;
}

inline Json to_json(const NetworkConfig& cfg) {
  return Json{{"tx_antennas", cfg.tx_antennas}, {"rx_antennas", cfg.rx_antennas}, {"streams", cfg.streams}};
}

inline constexpr const char* kSetNames[4] = {"I", "II", "III", "IV"};

inline FeedbackProfile profile_from_json(const Json& j, const NetworkConfig& cfg) {
  auto rx = detail::get_field<std::vector<int>>(j, "rx_sub", "profile");
  auto tx = detail::get_field<std::vector<int>>(j, "tx_sub", "profile");
  const Json sets = detail::get_field<Json>(j, "sets", "profile");
  require(sets.is_array() && static_cast<int>(sets.size()) == cfg.users(), ErrorKind::InvalidProfile,
          "profile: 'sets' must list one entry per receiver");
  std::vector<std::array<std::vector<int>, 4>> parts(cfg.users());
  for (int r = 0; r < cfg.users(); ++r)
    for (int s = 0; s < 4; ++s) {
      auto one_based = detail::get_or<std::vector<int>>(sets[r], kSetNames[s], {},
                                                        "profile.sets[" + std::to_string(r + 1) + "]");
      for (int u : one_based) parts[r][s].push_back(u - 1);
    }
  FeedbackProfile prof = FeedbackProfile::from_sets(std::move(rx), std::move(tx), parts);
  prof.validate(cfg);
  return prof;
}

inline Json to_json(const FeedbackProfile& prof) {
  Json sets = Json::array();
  for (int j = 0; j < prof.users(); ++j) {
    Json row = Json::object();
    for (int s = 0; s < 4; ++s) {
      std::vector<int> one_based;
      for (int i : prof.links(j, kCrossModes[s])) one_based.push_back(i + 1);
      row[kSetNames[s]] = one_based;
    }
    sets.push_back(row);
  }
  return Json{{"rx_sub", prof.rx_sub}, {"tx_sub", prof.tx_sub}, {"sets", sets}};
}

inline SolverOptions solver_from_json(const Json& j) {
  SolverOptions o;
  o.max_iters = detail::get_or<int>(j, "max_iters", o.max_iters, "solver");
  o.leak_tol = detail::get_or<double>(j, "leak_tol", o.leak_tol, "solver");
  o.restarts = detail::get_or<int>(j, "restarts", o.restarts, "solver");
  o.validate();
  return o;
}

inline SweepSpec sweep_from_json(const Json& j) {
  SweepSpec s;
  s.trials = detail::get_or<int>(j, "trials", s.trials, "sweep");
  s.total_bits = detail::get_or<std::vector<long>>(j, "total_bits", s.total_bits, "sweep");
  s.snr_db = detail::get_or<std::vector<double>>(j, "snr_db", s.snr_db, "sweep");
  const std::string axis = detail::get_or<std::string>(j, "axis", "bits", "sweep");
  require(axis == "bits" || axis == "snr_db", ErrorKind::InvalidInput,
          "sweep: axis must be 'bits' or 'snr_db'");
  s.axis = axis == "bits" ? SweepAxis::Bits : SweepAxis::Snr;
  s.quantizer.explicit_bits_limit =
      detail::get_or<int>(j, "explicit_bits_limit", s.quantizer.explicit_bits_limit, "sweep");
  const Json schemes = detail::get_or<Json>(j, "schemes", Json(), "sweep");
  if (schemes.is_null()) {
    for (Scheme sc : {Scheme::Proposed, Scheme::Baseline1, Scheme::Baseline2, Scheme::Baseline3})
      s.schemes.push_back({sc, true});
  } else {
    require(schemes.is_array(), ErrorKind::InvalidInput, "sweep: 'schemes' must be an array");
    for (const auto& e : schemes)
      s.schemes.push_back({scheme_from_string(detail::get_field<std::string>(e, "scheme", "sweep.schemes")),
                           detail::get_or<bool>(e, "quantized", true, "sweep.schemes")});
  }
  s.validate();
  return s;
}

/// Parsed configuration file.
struct RunConfig {
  Json raw;
  std::string hash;
  NetworkConfig network;
  std::optional<FeedbackProfile> profile;
  std::optional<FeedbackProfile> initial_profile;
  std::uint64_t seed = 0;
  SolverOptions solver;
  SweepSpec sweep;
  std::optional<long> solve_bits;  // quantize before solving when set
  StreamIndexRange stream_range = StreamIndexRange::ReceiverStreams;
};

inline RunConfig config_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::InvalidInput, "config: top level must be an object");
  const int schema = detail::get_field<int>(j, "schema", "config");
  require(schema == kSchemaVersion, ErrorKind::InvalidInput,
          "config: unsupported schema " + std::to_string(schema));
  RunConfig rc;
  rc.raw = j;
  rc.hash = config_hash(j);
  rc.network = network_from_json(detail::get_field<Json>(j, "network", "config"));
  if (j.contains("profile") && !j.at("profile").is_null())
    rc.profile = profile_from_json(j.at("profile"), rc.network);
  const Json design = detail::get_or<Json>(j, "design", Json::object(), "config");
  if (design.contains("initial_profile") && !design.at("initial_profile").is_null())
    rc.initial_profile = profile_from_json(design.at("initial_profile"), rc.network);
  rc.seed = detail::get_or<std::uint64_t>(j, "seed", 0, "config");
  rc.solver = solver_from_json(detail::get_or<Json>(j, "solver", Json::object(), "config"));
  rc.sweep = sweep_from_json(detail::get_or<Json>(j, "sweep", Json::object(), "config"));
  rc.sweep.solver = rc.solver;
  const Json solve = detail::get_or<Json>(j, "solve", Json::object(), "config");
  if (solve.contains("total_bits") && !solve.at("total_bits").is_null())
    rc.solve_bits = detail::get_field<long>(solve, "total_bits", "solve");
  const Json check = detail::get_or<Json>(j, "check", Json::object(), "config");
  const std::string range = detail::get_or<std::string>(check, "stream_index_range", "receiver_streams", "check");
  require(range == "receiver_streams" || range == "literal", ErrorKind::InvalidInput,
          "check: stream_index_range must be 'receiver_streams' or 'literal'");
  rc.stream_range = range == "literal" ? StreamIndexRange::Literal : StreamIndexRange::ReceiverStreams;
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidInput, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::InvalidInput, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline Json to_json(const FeasibilityReport& r) {
  Json j{{"verdict", to_string(r.verdict)}, {"method", to_string(r.method)}};
  j["failed_condition"] = r.failed_condition ? Json(*r.failed_condition) : Json();
  Json pairs = Json::array();
  for (const auto& [rx, tx] : r.violating_pairs) pairs.push_back({rx + 1, tx + 1});
  j["violating_pairs"] = pairs;
  Json cons = Json::array();
  for (const auto& c : r.violating_constraints) cons.push_back({c.rx + 1, c.tx + 1, c.p + 1, c.q + 1});
  j["violating_constraints"] = cons;
  if (r.flow_value >= 0) {
    j["flow_value"] = r.flow_value;
    j["flow_demand"] = r.flow_demand;
  }
  return j;
}

inline Json to_json(const DesignTrace& t) {
  Json accepted = Json::array();
  for (const auto& s : t.accepted)
    accepted.push_back({{"strategy", describe(s.strategy)},
                        {"reduction", s.reduction},
                        {"consumption", s.consumption},
                        {"priority", s.priority},
                        {"dimension", s.dimension}});
  Json rejected = Json::array();
  for (const auto& r : t.rejected)
    rejected.push_back({{"pass", r.pass}, {"strategy", describe(r.strategy)}, {"reason", r.reason}});
  return Json{{"initial_dimension", t.initial_dimension},
              {"accepted", accepted},
              {"rejected", rejected},
              {"oracle_calls", t.oracle_calls},
              {"passes", t.passes}};
}

inline Json to_json(const ExperimentResult& r) {
  return Json{{"scheme", r.scheme},       {"quantized", r.quantized}, {"total_bits", r.total_bits},
              {"snr_db", r.snr_db},       {"mean_tput", r.mean_tput}, {"ci95", r.ci95},
              {"trials", r.trials},       {"failures", r.failures},   {"unconverged", r.unconverged},
              {"feedback_dim", r.feedback_dim}, {"seed", r.seed}};
}

}  // namespace iafb
