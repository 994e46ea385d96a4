#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "iafb/error.hpp"
#include "iafb/feasibility.hpp"
#include "support.hpp"

using namespace iafb;

namespace {

NetworkConfig two_by_two(int k) { return NetworkConfig::symmetric(k, 2, 2, 1); }
FeedbackProfile all_aligned(int k) {
  return FeedbackProfile::uniform(std::vector<int>(k, 2), std::vector<int>(k, 2), LinkMode::RowSpace);
}

RankTestOptions no_prefilter(std::uint64_t seed) {
  RankTestOptions o;
  o.seed = seed;
  o.counting_prefilter = false;
  return o;
}

CMatrix vec(const CMatrix& m) { return Eigen::Map<const CMatrix>(m.data(), m.size(), 1); }

}  // namespace

TEST(NecessaryCheck, Examples) {
  const FeasibilityReport ex = necessary_check(test::null_space_network(), test::null_space_profile());
  EXPECT_EQ(ex.verdict, Verdict::Unknown);
  EXPECT_EQ(necessary_check(two_by_two(4), all_aligned(4)).verdict, Verdict::Unknown);

  // Receiver 1 absorbs transmitters 2 and 3: M^e = 3 - 2 - 2 < d0 = 1.
  const NetworkConfig cfg = NetworkConfig::symmetric(3, 3, 3, 1);
  const auto overdrawn = FeedbackProfile::from_sets({3, 3, 3}, {1, 2, 2},
                                                    {{{{}, {1, 2}, {}, {}}}, {{{0, 2}, {}, {}, {}}}, {{{0, 1}, {}, {}, {}}}});
  const FeasibilityReport r = necessary_check(cfg, overdrawn);
  ASSERT_EQ(r.verdict, Verdict::Infeasible);
  ASSERT_TRUE(r.failed_condition.has_value());
  EXPECT_EQ(r.failed_condition->rfind("condition 2", 0), 0u);

  const auto prof = FeedbackProfile::from_sets({3, 3, 3}, {1, 1, 1},
                                               {{{{}, {1, 2}, {}, {}}}, {{{0}, {}, {}, {2}}}, {{{0}, {}, {}, {1}}}});
  EXPECT_EQ(necessary_check(cfg, prof).verdict, Verdict::Unknown);

  // Null-space feedback eats the transmit dimensions: N^e = 1 - 3 < 1.
  const auto starved = FeedbackProfile::from_sets({3, 3, 3}, {1, 3, 3},
                                                  {{{{1, 2}, {}, {}, {}}}, {{{2}, {}, {0}, {}}}, {{{1}, {}, {}, {0}}}});
  const FeasibilityReport s = necessary_check(cfg, starved);
  ASSERT_EQ(s.verdict, Verdict::Infeasible);
  EXPECT_EQ(s.failed_condition->rfind("condition 1", 0), 0u);
}

TEST(BruteSubset, Examples) {
  EXPECT_EQ(brute_subset_check(two_by_two(3), all_aligned(3)).verdict, Verdict::Unknown);
  const FeasibilityReport four = brute_subset_check(two_by_two(4), all_aligned(4));
  EXPECT_EQ(four.verdict, Verdict::Infeasible);
  EXPECT_FALSE(four.violating_pairs.empty());
  EXPECT_EQ(brute_subset_check(test::null_space_network(), test::null_space_profile()).verdict, Verdict::Unknown);
}

TEST(BruteSubset, RefusesTooManyPairs) {
  const NetworkConfig cfg = NetworkConfig::symmetric(5, 2, 2, 1);
  try {
    brute_subset_check(cfg, all_aligned(5), 12);
    FAIL() << "expected unsupported-size";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedSize);
  }
}

TEST(RankTest, Landmarks) {
  EXPECT_EQ(rank_test(two_by_two(3), all_aligned(3), 1).verdict, Verdict::Feasible);
  const FeasibilityReport four = rank_test(two_by_two(4), all_aligned(4), 1);
  EXPECT_EQ(four.verdict, Verdict::Infeasible);
  EXPECT_NE(four.failed_condition->find("12"), std::string::npos);
  EXPECT_EQ(rank_test(test::null_space_network(), test::null_space_profile(), 1).verdict, Verdict::Feasible);
}

TEST(RankTest, DeterminantAloneRejectsOverloadedSubsets) {
  // Totals balance (6 variables, 6 constraints) but receiver 1's two links
  // touch no variables at all.
  const NetworkConfig cfg = NetworkConfig::symmetric(3, 3, 3, 1);
  const auto prof = FeedbackProfile::from_sets({1, 3, 3}, {3, 1, 1},
                                               {{{{}, {}, {}, {1, 2}}}, {{{0}, {}, {}, {2}}}, {{{0}, {}, {}, {1}}}});
  const ChannelRealization h = generate_channels(cfg, 5);
  EXPECT_EQ(rank_test(cfg, prof, h, no_prefilter(5)).verdict, Verdict::Infeasible);
  EXPECT_EQ(rank_test(cfg, prof, h).verdict, Verdict::Infeasible);
}

TEST(RankTest, VerdictStableAcrossRealizations) {
  std::mt19937_64 rng(31);
  std::vector<std::pair<NetworkConfig, FeedbackProfile>> cases{{two_by_two(3), all_aligned(3)},
                                                               {two_by_two(4), all_aligned(4)},
                                                               {test::aggregate_network(), test::aggregate_profile()}};
  for (int t = 0; t < 12; ++t) cases.push_back(test::random_divisible_instance(rng, 3, 4));
  for (const auto& [cfg, prof] : cases) {
    const Verdict first = rank_test(cfg, prof, generate_channels(cfg, 100), no_prefilter(100)).verdict;
    for (std::uint64_t s = 101; s < 111; ++s)
      EXPECT_EQ(rank_test(cfg, prof, generate_channels(cfg, s), no_prefilter(s)).verdict, first);
  }
}

TEST(RankTest, ReceiveTransformsDoNotChangeTheVerdict) {
  std::mt19937_64 pick(32);
  Rng rng = make_rng(32, {});
  for (int t = 0; t < 20; ++t) {
    const auto [cfg, prof] = test::random_divisible_instance(pick, 3, 4);
    if (necessary_check(cfg, prof).verdict == Verdict::Infeasible) continue;
    const ChannelRealization h = generate_channels(cfg, t);
    const Verdict plain = rank_test(cfg, prof, h, no_prefilter(t)).verdict;
    const DerivedProfile dp = derive(cfg, prof);
    std::vector<CMatrix> r;
    for (int j = 0; j < cfg.users(); ++j) r.push_back(test::random_invertible(dp.rx_eff[j], rng));
    RankTestOptions o = no_prefilter(t);
    o.rx_transform = r;
    EXPECT_EQ(rank_test(cfg, prof, h, o).verdict, plain);
  }
}

TEST(ConstraintRows, MatchDirectExpansionOfTheLinearTerms) {
  std::mt19937_64 pick(33);
  Rng rng = make_rng(33, {});
  int checked = 0;
  for (int t = 0; t < 400 && checked < 20; ++t) {
    const auto [cfg, prof] = test::random_divisible_instance(pick, 3, 4);
    if (necessary_check(cfg, prof).verdict == Verdict::Infeasible || !prof.has_row_space_links()) continue;
    const DerivedProfile dp = derive(cfg, prof);
    const FedCsi fed = evaluate_feedback(cfg, prof, generate_channels(cfg, t));
    const int k = cfg.users();
    // W_j stands for U~_j^H (d0 x (M^e - d0)); Y_i for V~_i ((N^e - d) x d).
    std::vector<CMatrix> w(k), y(k);
    std::vector<CMatrix> parts;
    for (int j = 0; j < k; ++j) {
      w[j] = complex_gaussian(dp.rx_streams[j], dp.rx_eff[j] - dp.rx_streams[j], rng);
      parts.push_back(vec(w[j]));
    }
    for (int i = 0; i < k; ++i) {
      y[i] = complex_gaussian(dp.tx_eff[i] - cfg.streams[i], cfg.streams[i], rng);
      parts.push_back(vec(y[i]));
    }
    Eigen::Index n = 0;
    for (const auto& p : parts) n += p.rows();
    CMatrix x(n, 1);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      x.middleRows(at, p.rows()) = p;
      at += p.rows();
    }
    std::vector<CMatrix> expect;
    for (int j = 0; j < k; ++j)
      for (int i : prof.links(j, LinkMode::RowSpace)) {
        const int d0 = dp.rx_streams[j], di = cfg.streams[i];
        const CMatrix& g = fed.G(j, i);
        const CMatrix g2 = g.block(d0, 0, dp.rx_eff[j] - d0, di);
        const CMatrix g3 = g.block(0, di, d0, dp.tx_eff[i] - di);
        expect.push_back(vec(w[j] * g2 + g3 * y[i]));
      }
    const CMatrix lhs = constraint_rows(cfg, prof, dp, fed) * x;
    at = 0;
    for (const auto& e : expect) {
      EXPECT_LT((lhs.middleRows(at, e.rows()) - e).norm(), 1e-10 * (1 + e.norm()));
      at += e.rows();
    }
    EXPECT_EQ(at, lhs.rows());
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(MaxFlow, Landmarks) {
  const FeasibilityReport three = maxflow_check(two_by_two(3), all_aligned(3));
  EXPECT_EQ(three.verdict, Verdict::Feasible);
  EXPECT_EQ(three.flow_value, 6);
  EXPECT_EQ(three.flow_demand, 6);

  const FeasibilityReport four = maxflow_check(two_by_two(4), all_aligned(4));
  EXPECT_EQ(four.verdict, Verdict::Infeasible);
  EXPECT_EQ(four.flow_value, 8);
  EXPECT_EQ(four.flow_demand, 12);

  const NetworkConfig cfg = test::null_space_network();
  EXPECT_EQ(maxflow_check(cfg, test::null_space_profile()).verdict, Verdict::Feasible);
}

TEST(MaxFlow, ViolatingSubsetOnTheFourUserInstance) {
  const FlowAnalysis fa = analyze_flow(two_by_two(4), all_aligned(4));
  const auto subset = violating_subset_from_cut(fa);
  ASSERT_FALSE(subset.empty());
  std::vector<int> rx, tx;
  for (const auto& c : subset) {
    EXPECT_NE(c.rx, c.tx);
    rx.push_back(c.rx);
    tx.push_back(c.tx);
  }
  for (auto* v : {&rx, &tx}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  // Each receiver and transmitter owns one variable here.
  long vars = 0;
  for (int j : rx) vars += fa.rx_capacity[j];
  for (int i : tx) vars += fa.tx_capacity[i];
  EXPECT_GT(static_cast<long>(subset.size()), vars);
}

TEST(MaxFlow, ViolatingSubsetOnFeasibleInstanceIsAnError) {
  const FlowAnalysis fa = analyze_flow(two_by_two(3), all_aligned(3));
  try {
    violating_subset_from_cut(fa);
    FAIL() << "expected invalid-state";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidState);
  }
}

TEST(MaxFlow, ViolatingSubsetIsLocalizedToTheOverloadedReceiver) {
  const NetworkConfig cfg = NetworkConfig::symmetric(3, 3, 3, 1);
  const auto prof = FeedbackProfile::from_sets({1, 3, 3}, {3, 1, 1},
                                               {{{{}, {}, {}, {1, 2}}}, {{{0}, {}, {}, {2}}}, {{{0}, {}, {}, {1}}}});
  const FeasibilityReport r = maxflow_check(cfg, prof);
  ASSERT_EQ(r.verdict, Verdict::Infeasible);
  ASSERT_FALSE(r.violating_constraints.empty());
  for (const auto& c : r.violating_constraints) EXPECT_EQ(c.rx, 0);
}

TEST(MaxFlow, EmptyAlignedSetIsTriviallyFeasible) {
  const NetworkConfig cfg = NetworkConfig::symmetric(2, 2, 2, 1);
  const auto prof = FeedbackProfile::uniform({2, 2}, {2, 2}, LinkMode::NoFeedback);
  const FeasibilityReport r = maxflow_check(cfg, prof);
  EXPECT_EQ(r.verdict, Verdict::Feasible);
  EXPECT_EQ(r.flow_demand, 0);
}

TEST(MaxFlow, NonDivisibleInputIsUnsupported) {
  const NetworkConfig cfg{{3, 3}, {3, 3}, {2, 2}};
  const auto prof = FeedbackProfile::uniform({3, 3}, {3, 3}, LinkMode::RowSpace);
  try {
    maxflow_check(cfg, prof);
    FAIL() << "expected unsupported-case";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedCase);
  }
  EXPECT_THROW(maxflow_check(NetworkConfig{{2, 2}, {2, 2}, {1, 2}},
                             FeedbackProfile::uniform({2, 2}, {2, 2}, LinkMode::RowSpace)),
               Error);
}

TEST(MaxFlow, LiteralStreamRangeOverloadsTheFeasibleLandmark) {
  const FeasibilityReport literal = maxflow_check(two_by_two(3), all_aligned(3), StreamIndexRange::Literal);
  EXPECT_EQ(literal.flow_demand, 12);
  EXPECT_EQ(literal.verdict, Verdict::Infeasible);
}

TEST(CountingCheck, FeasibleOnlyInTheDivisibleCase) {
  EXPECT_EQ(counting_check(two_by_two(3), all_aligned(3)).verdict, Verdict::Feasible);
  EXPECT_EQ(counting_check(two_by_two(4), all_aligned(4)).verdict, Verdict::Infeasible);
  const NetworkConfig cfg{{4, 4}, {4, 4}, {2, 2}};
  EXPECT_EQ(counting_check(cfg, FeedbackProfile::uniform({3, 3}, {3, 3}, LinkMode::RowSpace)).verdict,
            Verdict::Unknown);
}

TEST(CrossValidation, AllCheckersAgreeWithTheLonghandSubsetCount) {
  std::mt19937_64 rng(34);
  int feasible = 0, infeasible = 0;
  for (int t = 0; t < 120; ++t) {
    const auto [cfg, prof] = test::random_divisible_instance(rng, 3, 4);
    const bool expect = test::ref_counting_feasible(cfg, prof);
    (expect ? feasible : infeasible)++;

    const FeasibilityReport flow = maxflow_check(cfg, prof);
    EXPECT_EQ(flow.verdict == Verdict::Feasible, expect) << "case " << t;

    FeasibilityReport counted = necessary_check(cfg, prof);
    if (counted.verdict != Verdict::Infeasible) counted = brute_subset_check(cfg, prof);
    EXPECT_EQ(counted.verdict != Verdict::Infeasible, expect) << "case " << t;

    const Verdict rank = rank_test(cfg, prof, generate_channels(cfg, 500 + t), no_prefilter(t)).verdict;
    EXPECT_EQ(rank == Verdict::Feasible, expect) << "case " << t;
  }
  EXPECT_GT(feasible, 10);
  EXPECT_GT(infeasible, 10);
}

TEST(CrossValidation, ClassicalProfilesMatchCounting) {
  for (int k = 2; k <= 5; ++k)
    for (int m = 2; m <= 4; ++m) {
      const NetworkConfig cfg = NetworkConfig::symmetric(k, m, m, 1);
      const auto prof = FeedbackProfile::uniform(cfg.rx_antennas, cfg.tx_antennas, LinkMode::RowSpace);
      // Full-set count for d = 1: 2K(M - 1) variables against K(K - 1) constraints.
      const bool expect = 2 * (m - 1) >= k - 1;
      EXPECT_EQ(rank_test(cfg, prof, 3).verdict == Verdict::Feasible, expect) << k << " " << m;
      EXPECT_EQ(maxflow_check(cfg, prof).verdict == Verdict::Feasible, expect) << k << " " << m;
    }
}
