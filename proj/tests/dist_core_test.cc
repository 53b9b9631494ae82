// Copyright 2026 The NIMA Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nima/dist_core.h"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "nima/error.h"
#include "test_util.h"

namespace nima {
namespace {

using testing::FiniteDifference;
using testing::GreedyTransportCost;
using testing::RandomDistribution;
using testing::RelativeError;

TEST(BucketScale, RejectsBadValues) {
  EXPECT_THROW(BucketScale({1.0}), DataError);
  EXPECT_THROW(BucketScale({1.0, 1.0, 2.0}), DataError);
  EXPECT_THROW(BucketScale({2.0, 1.0}), DataError);
  EXPECT_EQ(BucketScale::Ava().front(), 1.0);
  EXPECT_EQ(BucketScale::Ava().back(), 10.0);
  EXPECT_EQ(BucketScale::Tid().front(), 0.0);
  EXPECT_EQ(BucketScale::Tid().back(), 9.0);
}

TEST(ScoreDistribution, RenormalizesWithinTolerance) {
  ScoreDistribution d(BucketScale::Integer(1, 3), {0.2, 0.3, 0.5 + 5e-7});
  EXPECT_NEAR(std::accumulate(d.mass().begin(), d.mass().end(), 0.0), 1.0,
              1e-15);
  EXPECT_THROW(ScoreDistribution(BucketScale::Integer(1, 3), {0.2, 0.3, 0.6}),
               DataError);
  EXPECT_THROW(ScoreDistribution(BucketScale::Integer(1, 3), {-0.1, 0.6, 0.5}),
               DataError);
  EXPECT_THROW(ScoreDistribution(BucketScale::Integer(1, 3), {0.5, 0.5}),
               LengthMismatchError);
  EXPECT_THROW(ScoreDistribution::FromCounts(BucketScale::Integer(1, 2),
                                             std::vector<double>{0, 0}),
               DataError);
}

TEST(Mean, Examples) {
  EXPECT_DOUBLE_EQ(Mean(ScoreDistribution::PointMass(BucketScale::Ava(), 6)),
                   7.0);
  EXPECT_DOUBLE_EQ(Mean(ScoreDistribution::Uniform(BucketScale::Ava())), 5.5);
  const std::vector<double> counts = {0, 1, 5, 17, 38, 36, 15, 6, 5, 1};
  const auto d = ScoreDistribution::FromCounts(BucketScale::Ava(), counts);
  EXPECT_NEAR(Mean(d), 699.0 / 124.0, 1e-12);
}

TEST(StdDev, Examples) {
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_EQ(StdDev(ScoreDistribution::PointMass(BucketScale::Ava(), b)), 0.0);
  }
  ScoreDistribution ends(BucketScale::Ava(),
                         {0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0.5});
  EXPECT_NEAR(StdDev(ends), 4.5, 1e-12);
  EXPECT_NEAR(StdDev(ScoreDistribution::Uniform(BucketScale::Ava())),
              std::sqrt(8.25), 1e-12);
  EXPECT_NEAR(std::sqrt(8.25), 2.872281, 1e-6);
}

TEST(Cdf, Examples) {
  const BucketScale four = BucketScale::Integer(1, 4);
  EXPECT_EQ(Cdf(ScoreDistribution::PointMass(four, 0)),
            (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(Cdf(ScoreDistribution::Uniform(four)),
            (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  const auto c = Cdf(ScoreDistribution(BucketScale::Integer(1, 3),
                                       {0.2, 0.3, 0.5}));
  EXPECT_NEAR(c[0], 0.2, 1e-15);
  EXPECT_NEAR(c[1], 0.5, 1e-15);
  EXPECT_NEAR(c[2], 1.0, 1e-15);
}

TEST(Emd, Examples) {
  const BucketScale ava = BucketScale::Ava();
  std::mt19937_64 rng(1);
  const auto p = RandomDistribution(rng, ava);
  EXPECT_EQ(Emd(p, p, 2.0), 0.0);
  const auto b1 = ScoreDistribution::PointMass(ava, 0);
  const auto b2 = ScoreDistribution::PointMass(ava, 1);
  const auto b10 = ScoreDistribution::PointMass(ava, 9);
  EXPECT_NEAR(Emd(b1, b2, 2.0), std::sqrt(0.1), 1e-15);
  EXPECT_NEAR(Emd(b1, b10, 1.0), 0.9, 1e-15);
}

TEST(Emd, Errors) {
  const auto a = ScoreDistribution::Uniform(BucketScale::Ava());
  const auto t = ScoreDistribution::Uniform(BucketScale::Tid());
  EXPECT_THROW(Emd(a, t, 1.0), ScaleMismatchError);
  EXPECT_THROW(Emd(a, a, 0.0), UsageError);
}

TEST(Emd, IsAMetric) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const BucketScale scale =
        BucketScale::Integer(1, 2 + static_cast<std::size_t>(trial % 9));
    const auto p = RandomDistribution(rng, scale);
    const auto q = RandomDistribution(rng, scale);
    const auto w = RandomDistribution(rng, scale);
    for (double r : {1.0, 2.0, 3.0}) {
      const double pq = Emd(p, q, r);
      EXPECT_GE(pq, 0.0);
      EXPECT_EQ(pq, Emd(q, p, r));
      EXPECT_LE(pq, Emd(p, w, r) + Emd(w, q, r) + 1e-9);
    }
  }
}

TEST(Emd, MatchesGreedyTransportAtROne) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 2; n <= 6; ++n) {
    const BucketScale scale = BucketScale::Integer(1, n);
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = RandomDistribution(rng, scale);
      const auto q = RandomDistribution(rng, scale);
      const double cost =
          GreedyTransportCost({p.mass().begin(), p.mass().end()},
                              {q.mass().begin(), q.mass().end()});
      EXPECT_NEAR(Emd(p, q, 1.0) * static_cast<double>(n), cost, 1e-12);
    }
  }
}

TEST(Softmax, Examples) {
  const auto u = Softmax(Logits(std::vector<double>(10, 0.0)),
                         BucketScale::Ava());
  for (double m : u.mass()) EXPECT_NEAR(m, 0.1, 1e-15);
  const auto big = Softmax(Logits(std::vector<double>(10, 1000.0)),
                           BucketScale::Ava());
  for (double m : big.mass()) EXPECT_NEAR(m, 0.1, 1e-15);
  const auto q = Softmax(Logits({std::log(1.0), std::log(2.0), std::log(3.0)}),
                         BucketScale::Integer(1, 3));
  EXPECT_NEAR(q[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(q[1], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(q[2], 3.0 / 6.0, 1e-15);
  EXPECT_THROW(Softmax(Logits({0.0, NAN}), BucketScale::Integer(1, 2)),
               NumericalError);
  EXPECT_THROW(Softmax(Logits({0.0, INFINITY}), BucketScale::Integer(1, 2)),
               NumericalError);
}

TEST(Softmax, PreservesOrder) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> z(10);
    for (double& v : z) v = g(rng);
    const auto q = Softmax(Logits(z), BucketScale::Ava());
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        if (z[i] > z[j]) EXPECT_GE(q[i], q[j]);
      }
    }
  }
}

TEST(SquaredEmdLoss, Examples) {
  const BucketScale ava = BucketScale::Ava();
  EXPECT_NEAR(SquaredEmdLoss(ScoreDistribution::Uniform(ava),
                             Logits(std::vector<double>(10, 3.0))),
              0.0, 1e-30);
  const BucketScale two = BucketScale::Integer(1, 2);
  EXPECT_NEAR(SquaredEmdLoss(ScoreDistribution::PointMass(two, 0),
                             Logits({0.0, 0.0})),
              0.125, 1e-15);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = RandomDistribution(rng, ava);
    std::vector<double> z(10);
    for (double& v : z) v = g(rng);
    const double emd = Emd(p, Softmax(Logits(z), ava), 2.0);
    EXPECT_NEAR(SquaredEmdLoss(p, Logits(z)), emd * emd, 1e-14);
  }
  EXPECT_THROW(SquaredEmdLoss(ScoreDistribution::Uniform(ava), Logits({0.0})),
               LengthMismatchError);
}

TEST(SquaredEmdGrad, ZeroAtMinimum) {
  const std::vector<double> z = {0.3, -1.0, 2.0, 0.0, 0.5};
  const BucketScale scale = BucketScale::Integer(1, 5);
  const auto p = Softmax(Logits(z), scale);
  for (double g : SquaredEmdGrad(p, Logits(z))) EXPECT_NEAR(g, 0.0, 1e-16);
}

TEST(SquaredEmdGrad, MatchesFiniteDifferences) {
  const BucketScale ava = BucketScale::Ava();
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = RandomDistribution(rng, ava);
    std::vector<double> z(10);
    for (double& v : z) v = g(rng);
    const auto analytic = SquaredEmdGrad(p, Logits(z));
    const auto numeric = FiniteDifference(
        [&](std::span<const double> x) {
          return SquaredEmdLoss(p, Logits({x.begin(), x.end()}));
        },
        z, 1e-5);
    EXPECT_LE(RelativeError(analytic, numeric), 1e-5) << "trial " << trial;
    EXPECT_NEAR(std::accumulate(analytic.begin(), analytic.end(), 0.0), 0.0,
                1e-15);
  }
}

TEST(SquaredEmdGrad, ShiftInvariant) {
  std::mt19937_64 rng(17);
  const auto p = RandomDistribution(rng, BucketScale::Ava());
  std::vector<double> z = {0.1, 0.4, -0.2, 1.0, 0.0, -1.0, 0.7, 0.2, 0.3, -0.5};
  const auto base = SquaredEmdGrad(p, Logits(z));
  for (double& v : z) v += 12.5;
  const auto shifted = SquaredEmdGrad(p, Logits(z));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(base[i], shifted[i], 1e-15);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(19);
  const auto p = RandomDistribution(rng, BucketScale::Ava());
  const std::vector<double> z = {0.1, 0.4, -0.2, 1.0, 0.0,
                                 -1.0, 0.7, 0.2, 0.3, -0.5};
  const auto numeric = FiniteDifference(
      [&](std::span<const double> x) {
        return CrossEntropyLoss(p, Logits({x.begin(), x.end()}));
      },
      z, 1e-5);
  EXPECT_LE(RelativeError(CrossEntropyGrad(p, Logits(z)), numeric), 1e-8);
}

}  // namespace
}  // namespace nima
