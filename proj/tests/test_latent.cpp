#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "facelve/error.hpp"
#include "facelve/latent.hpp"
#include "facelve/random.hpp"
#include "support.hpp"

using namespace facelve;

using facelve::test::code_of;

TEST(RandomStream, SameSeedSameSequence) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a, b);
}

TEST(RandomStream, RestoreResumesMidStream) {
  RandomStream a(7);
  for (int i = 0; i < 13; ++i) a.normal();
  a.uniform_index(9);
  RandomStream b = RandomStream::restore(a.seed(), a.position());
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, NormalConsumesTwoWords) {
  RandomStream a(1);
  a.normal();
  EXPECT_EQ(a.position(), 2u);
}

TEST(RandomStream, UniformIndexInRangeAndCoversAll) {
  RandomStream rng(3);
  std::vector<int> hits(9, 0);
  for (int i = 0; i < 9000; ++i) {
    const auto k = rng.uniform_index(9);
    ASSERT_LT(k, 9u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

// Pins the raw mt19937_64 stream so draws are stable across platforms.
TEST(RandomStream, MatchesStandardEngine) {
  RandomStream rng(5489);
  std::mt19937_64 reference(5489);
  for (int i = 0; i < 10; ++i) ASSERT_EQ(rng.next_u64(), reference());
}

TEST(LatentVector, RejectsNonFiniteAndEmpty) {
  EXPECT_EQ(code_of([] { LatentVector v(std::vector<double>{}); }), ErrorCode::InvalidDimension);
  EXPECT_EQ(code_of([] { LatentVector v{1.0, std::numeric_limits<double>::quiet_NaN()}; }),
            ErrorCode::Validation);
  EXPECT_EQ(code_of([] { LatentVector v{std::numeric_limits<double>::infinity()}; }),
            ErrorCode::Validation);
}

TEST(SampleStandard, DeterministicForSeed) {
  RandomStream a(99), b(99);
  EXPECT_EQ(sample_standard(a, 512), sample_standard(b, 512));
}

TEST(SampleStandard, ShapeAndFinite) {
  RandomStream rng(1);
  const LatentVector v = sample_standard(rng, 4);
  ASSERT_EQ(v.dim(), 4u);
  for (double x : v.values()) EXPECT_TRUE(std::isfinite(x));
}

TEST(SampleStandard, ZeroDimIsInvalid) {
  RandomStream rng(1);
  EXPECT_EQ(code_of([&] { sample_standard(rng, 0); }), ErrorCode::InvalidDimension);
}

// Law of large numbers: 100,000 vectors of dimension 512. The mean of 5.12e7
// standard normals has sd 1.4e-4, and each per-component variance estimate
// has sd sqrt(2 / 1e5) = 0.0045, so the bands below are > 10 sigma wide.
TEST(SampleStandard, MomentsOverManyDraws) {
  RandomStream rng(2024);
  constexpr std::size_t kDraws = 100000;
  constexpr std::size_t kDim = 512;
  std::vector<double> sum(kDim, 0.0), sum_sq(kDim, 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < kDraws; ++n) {
    const LatentVector v = sample_standard(rng, kDim);
    for (std::size_t i = 0; i < kDim; ++i) {
      sum[i] += v[i];
      sum_sq[i] += v[i] * v[i];
      total += v[i];
    }
  }
  EXPECT_NEAR(total / (kDraws * kDim), 0.0, 0.02);
  for (std::size_t i = 0; i < kDim; ++i) {
    const double mean = sum[i] / kDraws;
    const double var = sum_sq[i] / kDraws - mean * mean;
    ASSERT_NEAR(var, 1.0, 0.05) << "component " << i;
  }
}

TEST(Average, Arithmetic) {
  const std::vector<LatentVector> vs{{1, 1, 1}, {3, 5, 7}};
  EXPECT_EQ(average(vs), (LatentVector{2, 3, 4}));
}

TEST(Average, SingletonIsIdentity) {
  const std::vector<LatentVector> vs{{0.1, -2.5, 3.25}};
  EXPECT_EQ(average(vs), vs[0]);
}

TEST(Average, PermutationInvariant) {
  RandomStream rng(8);
  std::vector<LatentVector> vs;
  for (int i = 0; i < 5; ++i) vs.push_back(sample_standard(rng, 64));
  const LatentVector ref = average(vs);
  std::vector<int> idx{0, 1, 2, 3, 4};
  while (std::next_permutation(idx.begin(), idx.end())) {
    std::vector<LatentVector> p;
    for (int i : idx) p.push_back(vs[i]);
    const LatentVector got = average(p);
    for (std::size_t k = 0; k < ref.dim(); ++k) ASSERT_NEAR(got[k], ref[k], 1e-12);
  }
}

TEST(Average, IdempotentOnIdenticalInputs) {
  RandomStream rng(9);
  const LatentVector u = sample_standard(rng, 32);
  const std::vector<LatentVector> vs{u, u, u};
  const LatentVector got = average(vs);
  for (std::size_t k = 0; k < u.dim(); ++k) EXPECT_NEAR(got[k], u[k], 1e-15);
}

TEST(Average, Errors) {
  EXPECT_EQ(code_of([] { average(std::vector<LatentVector>{}); }), ErrorCode::EmptySelection);
  EXPECT_EQ(code_of([] { average(std::vector<LatentVector>{{1, 2}, {1, 2, 3}}); }),
            ErrorCode::DimensionMismatch);
}

TEST(WeightedAverage, Examples) {
  const LatentVector u{0.3, -0.7, 2.0};
  const std::vector<LatentVector> uu{u, u};
  const std::vector<double> ones{1, 1};
  const LatentVector same = weighted_average(uu, ones);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(same[k], u[k], 1e-15);

  const std::vector<LatentVector> pts{{0, 0}, {3, 0}};
  const std::vector<double> w{2, 1};
  // (2·0 + 1·3) / 3
  EXPECT_EQ(weighted_average(pts, w), (LatentVector{1, 0}));
}

TEST(WeightedAverage, UniformWeightsEqualAverage) {
  RandomStream rng(10);
  std::vector<LatentVector> vs;
  for (int i = 0; i < 7; ++i) vs.push_back(sample_standard(rng, 100));
  const std::vector<double> w(7, 1.0);
  const LatentVector a = average(vs), b = weighted_average(vs, w);
  for (std::size_t k = 0; k < a.dim(); ++k) {
    EXPECT_LE(std::abs(a[k] - b[k]), 1e-12 * std::max(1.0, std::abs(a[k])));
  }
}

TEST(WeightedAverage, Errors) {
  const std::vector<LatentVector> pts{{0, 0}, {3, 0}};
  EXPECT_EQ(code_of([&] { weighted_average(pts, std::vector<double>{0, 0}); }),
            ErrorCode::DegenerateWeights);
  EXPECT_EQ(code_of([&] { weighted_average(pts, std::vector<double>{1}); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { weighted_average(pts, std::vector<double>{1, -1}); }),
            ErrorCode::OutOfRange);
}

TEST(Interpolate, EndpointsAreExactCopies) {
  RandomStream rng(11);
  const LatentVector a = sample_standard(rng, 512), b = sample_standard(rng, 512);
  EXPECT_EQ(interpolate(a, b, 0.0), a);
  EXPECT_EQ(interpolate(a, b, 1.0), b);
}

TEST(Interpolate, Midpoint) {
  const LatentVector v{2, -4, 6};
  EXPECT_EQ(interpolate(LatentVector::zeros(3), v, 0.5), (LatentVector{1, -2, 3}));
}

TEST(Interpolate, Symmetric) {
  RandomStream rng(12);
  const LatentVector a = sample_standard(rng, 64), b = sample_standard(rng, 64);
  for (double t : {0.1, 0.25, 0.5, 0.9}) {
    const LatentVector x = interpolate(a, b, t), y = interpolate(b, a, 1.0 - t);
    for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(x[k], y[k], 1e-12);
  }
}

TEST(Interpolate, OutOfRange) {
  const LatentVector a{1}, b{2};
  EXPECT_EQ(code_of([&] { interpolate(a, b, -0.01); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { interpolate(a, b, 1.01); }), ErrorCode::OutOfRange);
}

TEST(GaussianNoise, TinySigmaIsNearIdentity) {
  RandomStream rng(13);
  const LatentVector v = sample_standard(rng, 512);
  const LatentVector w = add_gaussian_noise(v, 1e-12, rng);
  for (std::size_t k = 0; k < 512; ++k) EXPECT_LT(std::abs(w[k] - v[k]), 1e-9);
}

// Sample sd of 1e5 normal draws has relative sd 1/sqrt(2e5) = 0.22%; the 2%
// band is about 9 sigma.
TEST(GaussianNoise, EmpiricalStd) {
  RandomStream rng(14);
  const LatentVector zero = LatentVector::zeros(1);
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const double x = add_gaussian_noise(zero, 0.4, rng)[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / kDraws;
  const double sd = std::sqrt(sum_sq / kDraws - mean * mean);
  EXPECT_NEAR(sd, 0.4, 0.4 * 0.02);
}

TEST(GaussianNoise, DeterministicAndValidated) {
  const LatentVector v{1, 2, 3};
  RandomStream a(15), b(15);
  EXPECT_EQ(add_gaussian_noise(v, 0.5, a), add_gaussian_noise(v, 0.5, b));
  EXPECT_EQ(code_of([&] { add_gaussian_noise(v, 0.0, a); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { add_gaussian_noise(v, -1.0, a); }), ErrorCode::OutOfRange);
}

TEST(VectorOps, NormalizedZeroIsDegenerate) {
  EXPECT_EQ(code_of([] { normalized(LatentVector::zeros(3)); }), ErrorCode::DegenerateAxis);
  const LatentVector u = normalized(LatentVector{3, 4});
  EXPECT_DOUBLE_EQ(u[0], 0.6);
  EXPECT_DOUBLE_EQ(u[1], 0.8);
}
