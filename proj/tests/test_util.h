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

#ifndef NIMA_TESTS_TEST_UTIL_H_
#define NIMA_TESTS_TEST_UTIL_H_

// Shared generators and independent oracles for the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "nima/dist_core.h"
#include "nima/model.h"

namespace nima::testing {

// Random pmf over `n` buckets; roughly one bucket in five is exactly zero.
inline std::vector<double> RandomMass(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(n);
  double total = 0.0;
  for (double& v : m) {
    v = u(rng) < 0.2 ? 0.0 : u(rng);
    total += v;
  }
  if (total == 0.0) {
    m[0] = 1.0;
    total = 1.0;
  }
  for (double& v : m) v /= total;
  return m;
}

inline ScoreDistribution RandomDistribution(std::mt19937_64& rng,
                                            const BucketScale& scale) {
  return ScoreDistribution(scale, RandomMass(rng, scale.size()));
}

// Minimum cost of moving mass `p` onto `q` along a line of unit-spaced
// buckets, by greedily matching the leftmost unmatched supply with the
// leftmost unmatched demand.
inline double GreedyTransportCost(std::vector<double> supply,
                                  std::vector<double> demand) {
  double cost = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < supply.size() && j < demand.size()) {
    if (supply[i] <= 0.0) {
      ++i;
      continue;
    }
    if (demand[j] <= 0.0) {
      ++j;
      continue;
    }
    const double moved = std::min(supply[i], demand[j]);
    cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
    supply[i] -= moved;
    demand[j] -= moved;
    if (supply[i] <= 0.0) ++i;
    if (demand[j] <= 0.0) ++j;
  }
  return cost;
}

// Central finite-difference gradient of `f` at `x`.
inline std::vector<double> FiniteDifference(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||), or the absolute difference norm when both
// are below `floor`.
inline double RelativeError(std::span<const double> a,
                            std::span<const double> b, double floor = 1e-12) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

// Pearson correlation straight from the textbook definition, with two-pass
// sums in long double.
inline double DefinitionalPearson(std::span<const double> x,
                                  std::span<const double> y) {
  const std::size_t n = x.size();
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

// Average ranks by counting: rank(x_i) = #{x_j < x_i} + (#{x_j == x_i} + 1)/2.
inline std::vector<double> BruteForceRanks(std::span<const double> x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) less += 1;
      if (v == x[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double BruteForceSpearman(std::span<const double> x,
                                 std::span<const double> y) {
  const auto rx = BruteForceRanks(x);
  const auto ry = BruteForceRanks(y);
  return DefinitionalPearson(rx, ry);
}

// Every trainable value in a fixed order, and gradients in the same order.
inline std::vector<double*> Flatten(ModelParams& p) {
  std::vector<double*> out;
  for (auto& layer : p.backbone) {
    for (double& v : layer.weights) out.push_back(&v);
    for (double& v : layer.bias) out.push_back(&v);
  }
  for (double& v : p.head.weights) out.push_back(&v);
  for (double& v : p.head.bias) out.push_back(&v);
  return out;
}

inline std::vector<double> FlattenGrads(const ParamGrads& g) {
  std::vector<double> out;
  for (const auto& layer : g.backbone) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  out.insert(out.end(), g.head.weights.begin(), g.head.weights.end());
  out.insert(out.end(), g.head.bias.begin(), g.head.bias.end());
  return out;
}

}  // namespace nima::testing

#endif  // NIMA_TESTS_TEST_UTIL_H_
