#include <gtest/gtest.h>

#include <cmath>

#include "iafb/error.hpp"
#include "iafb/netcfg.hpp"
#include "support.hpp"

using namespace iafb;

TEST(NetworkConfig, ValidationRejectsBadShapes) {
  EXPECT_THROW((NetworkConfig{{}, {}, {}}.validate()), Error);
  EXPECT_THROW((NetworkConfig{{2, 2}, {2}, {1, 1}}.validate()), Error);
  EXPECT_THROW((NetworkConfig{{1}, {2}, {2}}.validate()), Error);
  EXPECT_THROW((NetworkConfig{{2}, {1}, {2}}.validate()), Error);
  EXPECT_THROW((NetworkConfig{{2}, {2}, {0}}.validate()), Error);
  EXPECT_NO_THROW(test::mixed_network().validate());
}

TEST(GenerateChannels, SingleUserShape) {
  const NetworkConfig cfg{{2}, {2}, {1}};
  const ChannelRealization h = generate_channels(cfg, 3);
  EXPECT_EQ(h.users(), 1);
  EXPECT_EQ(h(0, 0).rows(), 2);
  EXPECT_EQ(h(0, 0).cols(), 2);
}

TEST(GenerateChannels, ShapesFollowAntennaCounts) {
  const NetworkConfig cfg = test::mixed_network();
  const ChannelRealization h = generate_channels(cfg, 9);
  for (int j = 0; j < cfg.users(); ++j)
    for (int i = 0; i < cfg.users(); ++i) {
      EXPECT_EQ(h(j, i).rows(), cfg.rx_antennas[j]);
      EXPECT_EQ(h(j, i).cols(), cfg.tx_antennas[i]);
      EXPECT_TRUE(all_finite(h(j, i)));
    }
}

TEST(GenerateChannels, SameSeedIsBitIdentical) {
  const NetworkConfig cfg = test::mixed_network();
  const ChannelRealization a = generate_channels(cfg, 77), b = generate_channels(cfg, 77);
  const ChannelRealization c = generate_channels(cfg, 78);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      EXPECT_TRUE(test::bit_equal(a(j, i), b(j, i)));
      EXPECT_FALSE(test::bit_equal(a(j, i), c(j, i)));
    }
}

TEST(GenerateChannels, AddingUsersLeavesExistingLinksUntouched) {
  const ChannelRealization small = generate_channels(NetworkConfig::symmetric(2, 3, 3, 1), 5);
  const ChannelRealization big = generate_channels(NetworkConfig::symmetric(4, 3, 3, 1), 5);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) EXPECT_TRUE(test::bit_equal(small(j, i), big(j, i)));
}

TEST(GenerateChannels, EntryStatisticsWithinThreeSigma) {
  const NetworkConfig cfg{{1}, {1}, {1}};
  const int n = 10000;
  double sum_re = 0, sum_im = 0, sum_sq = 0, sum_4 = 0;
  for (int t = 0; t < n; ++t) {
    const std::complex<double> x = generate_channels(cfg, static_cast<std::uint64_t>(t))(0, 0)(0, 0);
    sum_re += x.real();
    sum_im += x.imag();
    const double p = std::norm(x);
    sum_sq += p;
    sum_4 += p * p;
  }
  // Each real part has variance 1/2; |x|^2 is exponential with mean 1 and variance 1.
  const double mean_sigma = std::sqrt(0.5 / n);
  EXPECT_LT(std::abs(sum_re / n), 3 * mean_sigma);
  EXPECT_LT(std::abs(sum_im / n), 3 * mean_sigma);
  const double var = sum_sq / n;
  EXPECT_LT(std::abs(var - 1.0), 3.0 * std::sqrt(1.0 / n));
  EXPECT_LT(std::abs(var - 1.0), 0.05);
  EXPECT_NEAR(sum_4 / n, 2.0, 0.2);
}
