#pragma once

// Network configuration and i.i.d. Rayleigh channel generation.
//
// Users are 0-based throughout the C++ API. The JSON layer converts to the
// 1-based indices used in configuration files.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/matproc.hpp"
#include "iafb/rng.hpp"

namespace iafb {

struct NetworkConfig {
  std::vector<int> tx_antennas;  // N_i
  std::vector<int> rx_antennas;  // M_j
  std::vector<int> streams;      // d_i

  int users() const { return static_cast<int>(streams.size()); }
  int total_streams() const { return std::accumulate(streams.begin(), streams.end(), 0); }

  void validate() const {
    const auto k = streams.size();
    require(k >= 1, ErrorKind::InvalidInput, "network: at least one user is required");
    require(tx_antennas.size() == k && rx_antennas.size() == k, ErrorKind::InvalidInput,
            "network: antenna and stream lists must have K entries");
    for (std::size_t i = 0; i < k; ++i) {
      require(streams[i] >= 1, ErrorKind::InvalidInput, "network: d_i must be at least 1");
      require(tx_antennas[i] >= streams[i], ErrorKind::InvalidInput,
              "network: N_i must be at least d_i (user " + std::to_string(i + 1) + ")");
      require(rx_antennas[i] >= streams[i], ErrorKind::InvalidInput,
              "network: M_i must be at least d_i (user " + std::to_string(i + 1) + ")");
    }
  }

  static NetworkConfig symmetric(int users, int rx, int tx, int d) {
    NetworkConfig cfg{std::vector<int>(users, tx), std::vector<int>(users, rx),
                      std::vector<int>(users, d)};
    cfg.validate();
    return cfg;
  }

  bool operator==(const NetworkConfig&) const = default;
};

/// H[j][i] maps Tx i to Rx j and has shape M_j x N_i.
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(int users, std::uint64_t seed)
      : users_(users), seed_(seed), links_(static_cast<std::size_t>(users) * users) {}

  int users() const { return users_; }
  std::uint64_t seed() const { return seed_; }

  const CMatrix& operator()(int rx, int tx) const { return links_[index(rx, tx)]; }
  CMatrix& operator()(int rx, int tx) { return links_[index(rx, tx)]; }

 private:
  std::size_t index(int rx, int tx) const {
    require(rx >= 0 && rx < users_ && tx >= 0 && tx < users_, ErrorKind::InvalidInput,
            "channel index out of range");
    return static_cast<std::size_t>(rx) * users_ + tx;
  }

  int users_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<CMatrix> links_;
};

// Each (j,i) link draws from its own substream keyed by (seed, j, i), so
// adding users leaves the existing links untouched.
inline ChannelRealization generate_channels(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int k = cfg.users();
  ChannelRealization h(k, seed);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      Rng rng = make_rng(seed, {0x48ULL, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i)});
      h(j, i) = complex_gaussian(cfg.rx_antennas[j], cfg.tx_antennas[i], rng);
    }
  return h;
}

}  // namespace iafb
