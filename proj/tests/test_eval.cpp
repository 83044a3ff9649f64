#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "facelve/eval.hpp"
#include "support.hpp"

using namespace facelve;
using facelve::test::code_of;

TEST(Lineup, FiveCandidatesWithRecordedPermutation) {
  RandomStream rng(1);
  const LatentVector target = sample_standard(rng, 64);
  const Lineup l = generate_lineup(target, 3.0, rng);
  ASSERT_EQ(l.variants.size(), 4u);
  ASSERT_EQ(l.order.size(), 5u);
  EXPECT_EQ(std::set<std::size_t>(l.order.begin(), l.order.end()),
            (std::set<std::size_t>{0, 1, 2, 3, 4}));
  const auto c = l.candidates();
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[l.target_position()], target);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(c[k], l.order[k] == 0 ? target : l.variants[l.order[k] - 1]);
  }
}

TEST(Lineup, TinySigmaFailsScreening) {
  RandomStream rng(2);
  const LatentVector target = sample_standard(rng, 512);
  EXPECT_EQ(code_of([&] { generate_lineup(target, 1e-9, rng); }), ErrorCode::ScreeningFailure);
  EXPECT_EQ(code_of([&] { generate_lineup(target, 0.0, rng); }), ErrorCode::OutOfRange);
}

// The distance is sigma times a chi variable with 512 degrees of freedom:
// mean ≈ 3·sqrt(511.5) ≈ 67.85 and sd ≈ 3/sqrt(2) ≈ 2.12. The ±10% band is
// about 3.2 sd, so a single lineup lands inside it with probability 0.995
// and over many lineups about 0.14% of variants fall outside.
TEST(Lineup, VariantDistancesConcentrate) {
  const double expected = 3.0 * std::sqrt(512.0);
  EXPECT_NEAR(expected, 67.9, 0.05);
  {
    RandomStream rng(1);
    const LatentVector target = sample_standard(rng, 512);
    for (const LatentVector& v : generate_lineup(target, 3.0, rng).variants) {
      EXPECT_NEAR(distance(v, target), expected, 0.1 * expected);
    }
  }
  RandomStream rng(3);
  std::size_t outside = 0, total = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const LatentVector target = sample_standard(rng, 512);
    for (const LatentVector& v : generate_lineup(target, 3.0, rng).variants) {
      const double d = distance(v, target);
      outside += std::abs(d - expected) > 0.1 * expected;
      sum += d;
      sum_sq += d * d;
      ++total;
    }
  }
  const double mean = sum / total;
  EXPECT_NEAR(mean, 3.0 * std::sqrt(511.5), 0.1);
  EXPECT_NEAR(std::sqrt(sum_sq / total - mean * mean), 3.0 / std::sqrt(2.0), 0.1);
  EXPECT_LE(outside, total / 200);
}

TEST(Lineup, Deterministic) {
  RandomStream a(4), b(4);
  const LatentVector t = sample_standard(a, 32);
  b = a;
  const Lineup x = generate_lineup(t, 2.0, a), y = generate_lineup(t, 2.0, b);
  EXPECT_EQ(x.order, y.order);
  EXPECT_EQ(x.variants, y.variants);
}

TEST(Lineup, RankOneFindsClosest) {
  RandomStream rng(5);
  const LatentVector target = sample_standard(rng, 64);
  const Lineup l = generate_lineup(target, 3.0, rng);
  EXPECT_EQ(rank_one_by_distance(l, target), l.target_position());
  const LatentVector near_variant = axpy(l.variants[2], 0.01, target);
  const auto c = l.candidates();
  const std::size_t pos = rank_one_by_distance(l, near_variant);
  EXPECT_EQ(c[pos], l.variants[2]);
}

TEST(Recognition, Formula) {
  EXPECT_EQ(recognition_rate(0, 10), 0.0);
  EXPECT_EQ(recognition_rate(21, 28), 75.0);
  EXPECT_EQ(recognition_rate(7, 7), 100.0);
  EXPECT_EQ(code_of([] { recognition_rate(0, 0); }), ErrorCode::EmptySelection);
  EXPECT_EQ(code_of([] { recognition_rate(std::span<const Vote>{}); }), ErrorCode::EmptySelection);

  std::vector<Vote> votes;
  for (int i = 0; i < 28; ++i) votes.push_back({static_cast<std::size_t>(i < 21 ? 2 : 3), 2});
  EXPECT_EQ(recognition_rate(votes), 75.0);
}

TEST(Recognition, ScaleExact) {
  for (std::size_t n = 1; n <= 300; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      const double r = recognition_rate(k, n);
      ASSERT_GE(r, 0.0);
      ASSERT_LE(r, 100.0);
      ASSERT_LE(std::abs(r * static_cast<double>(n) - 100.0 * static_cast<double>(k)),
                1e-12 * 100.0 * static_cast<double>(n));
    }
  }
}

TEST(Similarity, Summary) {
  const std::vector<double> same(9, 47.51);
  EXPECT_NEAR(similarity_summary(same).mean, 47.51, 1e-12);
  const std::vector<double> ends{0.0, 100.0};
  const SimilaritySummary s = similarity_summary(ends);
  EXPECT_DOUBLE_EQ(s.mean, 50.0);
  EXPECT_EQ(s.histogram[0], 1u);
  EXPECT_EQ(s.histogram[9], 1u);
  EXPECT_EQ(std::accumulate(s.histogram.begin(), s.histogram.end(), std::size_t{0}), 2u);
  EXPECT_EQ(code_of([] { similarity_summary(std::vector<double>{}); }), ErrorCode::EmptySelection);
  EXPECT_EQ(code_of([] { similarity_summary(std::vector<double>{101.0}); }), ErrorCode::Validation);
  EXPECT_EQ(code_of([] { similarity_summary(std::vector<double>{-0.5}); }), ErrorCode::Validation);
}

TEST(Scripted, BudgetMustBePositive) {
  ScriptedConstructorPolicy p;
  p.generations = 0;
  RandomStream rng(6);
  EXPECT_EQ(code_of([&] {
              run_scripted_session(p, LatentVector::zeros(16), synthetic_session_config(16, 1), rng);
            }),
            ErrorCode::Validation);
}

TEST(Scripted, GreedyTraceNonIncreasingWithLocking) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomStream rng(seed);
    const LatentVector target = sample_standard(rng, 16);
    ScriptedConstructorPolicy p;
    p.generations = 30;
    const ScriptedRun run =
        run_scripted_session(p, target, synthetic_session_config(16, 1000 + seed), rng);
    ASSERT_EQ(run.trace.size(), 31u);
    for (std::size_t g = 1; g < run.trace.size(); ++g) ASSERT_LE(run.trace[g], run.trace[g - 1]);
    EXPECT_LT(run.trace.back(), run.trace.front());
    EXPECT_EQ(run.session.status(), SessionStatus::Finished);
    EXPECT_EQ(*run.session.composite(), run.composite);
    EXPECT_NEAR(distance(run.composite, target), run.trace.back(), 1e-12);
    EXPECT_EQ(run.session.config().eval_target, target);
  }
}

TEST(Scripted, RandomPolicyUsesOnlyItsStream) {
  RandomStream a(7), b(7);
  const LatentVector t1 = sample_standard(a, 16);
  const LatentVector t2 = LatentVector(std::vector<double>(16, 5.0));
  b = a;
  ScriptedConstructorPolicy p;
  p.kind = PolicyKind::Random;
  p.generations = 5;
  const ScriptedRun x = run_scripted_session(p, t1, synthetic_session_config(16, 3), a);
  const ScriptedRun y = run_scripted_session(p, t2, synthetic_session_config(16, 3), b);
  // The random policy never looks at the target, so its trajectory is the same.
  EXPECT_EQ(x.session.population(), y.session.population());
}

TEST(Scripted, SessionReplays) {
  RandomStream rng(8);
  const LatentVector target = sample_standard(rng, 16);
  const ScriptedRun run =
      run_scripted_session({}, target, synthetic_session_config(16, 99), rng);
  EXPECT_EQ(run.session.replay(), run.session);
}

TEST(Convergence, ReportFormats) {
  ConvergenceConfig c;
  c.seeds = 3;
  c.policy.generations = 4;
  const ConvergenceReport r = run_convergence(c);
  ASSERT_EQ(r.runs.size(), 3u);
  const std::string csv = convergence_csv(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "policy,seed,generation,best_distance");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) ++rows;
  }
  EXPECT_EQ(rows, 3u * 5u);
  const auto summary = nlohmann::json::parse(convergence_summary_json(r));
  EXPECT_EQ(summary.at("seeds"), 3);
  EXPECT_EQ(summary.at("policy"), "greedy");
  EXPECT_NEAR(summary.at("median_reduction").get<double>(), r.median_reduction(), 1e-12);
}

TEST(Convergence, DeterministicPerSeed) {
  ConvergenceConfig c;
  c.seeds = 2;
  c.policy.generations = 3;
  EXPECT_EQ(convergence_csv(run_convergence(c)), convergence_csv(run_convergence(c)));
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(code_of([] { median({}); }), ErrorCode::EmptySelection);
}
