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

#ifndef NIMA_MAXENT_H_
#define NIMA_MAXENT_H_

// Maximum-entropy reconstruction of a bucket distribution from its mean and
// standard deviation, used for datasets that publish only (MOS, std) pairs.

#include <string>

#include "nima/dist_core.h"
#include "nima/error.h"

namespace nima {

struct MomentTarget {
  double mu = 0.0;
  double sigma = 0.0;
  BucketScale scale = BucketScale::Ava();
};

// Which closed form or solver produced a MaxEntSolution.
enum class MaxEntBranch {
  // p_i proportional to exp(lambda1 s_i + lambda2 s_i^2), found by Newton.
  kExponentialFamily,
  // sigma at the upper bound: all mass on s_1 and s_N.
  kTwoPointExtreme,
  // sigma at or below the smallest variance reachable on the grid: mass on
  // the one or two buckets bracketing mu. The std may then miss the target;
  // `residual` reports by how much.
  kAdjacentSplit,
};

struct MaxEntSolution {
  ScoreDistribution dist;
  // Multipliers of the mean and second-moment constraints. NaN for the
  // degenerate branches, which have no exponential-family representative.
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int iterations = 0;
  // max(|mean - mu|, |std - sigma|) of `dist`.
  double residual = 0.0;
  MaxEntBranch branch = MaxEntBranch::kExponentialFamily;
};

inline constexpr double kDefaultMaxEntTolerance = 1e-10;
inline constexpr int kDefaultMaxEntIterations = 200;

class InfeasibleMomentsError : public DataError {
 public:
  explicit InfeasibleMomentsError(const std::string& what) : DataError(what) {}
};

class MaxEntConvergenceError : public NumericalError {
 public:
  MaxEntConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// s_1 <= mu <= s_N, sigma >= 0 and sigma^2 <= (mu - s_1)(s_N - mu), with the
// upper bound itself accepted.
bool Feasible(const MomentTarget& target);

// Smallest variance any distribution on the scale with mean mu can have:
// (mu - lo)(hi - mu) for the buckets lo <= mu <= hi bracketing mu.
double MinimumVariance(const BucketScale& scale, double mu);

// Deterministic: identical targets give bit-identical solutions. Throws
// InfeasibleMomentsError or MaxEntConvergenceError.
MaxEntSolution FitMaxEnt(const MomentTarget& target,
                         double tol = kDefaultMaxEntTolerance,
                         int max_iter = kDefaultMaxEntIterations);

}  // namespace nima

#endif  // NIMA_MAXENT_H_
