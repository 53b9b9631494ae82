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

#ifndef NIMA_DIST_CORE_H_
#define NIMA_DIST_CORE_H_

// Ordered score distributions over N rating buckets, their moments, and the
// CDF-based earth mover's distance family used both as training loss and as
// evaluation metric.

#include <cstddef>
#include <span>
#include <vector>

namespace nima {

// Ordered bucket values s_1 < ... < s_N, N >= 2.
class BucketScale {
 public:
  explicit BucketScale(std::vector<double> values);

  // AVA-style aesthetic ratings 1..10.
  static BucketScale Ava();
  // TID2013-style quality ratings 0..9.
  static BucketScale Tid();
  // Integer buckets first, first+1, ..., first+n-1.
  static BucketScale Integer(int first, std::size_t n);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

  bool operator==(const BucketScale& other) const = default;

 private:
  std::vector<double> values_;
};

// Tolerance on |sum(mass) - 1| accepted (and corrected) at construction.
inline constexpr double kRenormalizeTolerance = 1e-6;

// Probability mass over the buckets of a BucketScale. Always nonnegative and
// summing to one.
class ScoreDistribution {
 public:
  // Throws DataError when a mass is negative/non-finite, the length differs
  // from the scale, or the total is more than kRenormalizeTolerance from one.
  ScoreDistribution(BucketScale scale, std::vector<double> mass);

  // Normalizes nonnegative counts (or unnormalized weights). Throws DataError
  // on a zero total.
  static ScoreDistribution FromCounts(BucketScale scale,
                                      std::span<const double> counts);
  static ScoreDistribution PointMass(BucketScale scale, std::size_t bucket);
  static ScoreDistribution Uniform(BucketScale scale);

  const BucketScale& scale() const { return scale_; }
  std::span<const double> mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }

 private:
  BucketScale scale_;
  std::vector<double> mass_;
};

// Unconstrained pre-softmax activations of the N-way head.
class Logits {
 public:
  explicit Logits(std::vector<double> z) : z_(std::move(z)) {}

  std::size_t size() const { return z_.size(); }
  double operator[](std::size_t i) const { return z_[i]; }
  std::span<const double> values() const { return z_; }

 private:
  std::vector<double> z_;
};

double Mean(const ScoreDistribution& d);
double StdDev(const ScoreDistribution& d);
// Shannon entropy in nats.
double Entropy(const ScoreDistribution& d);

// Running sums of the mass; the last element is one.
std::vector<double> Cdf(const ScoreDistribution& d);

// Normalized EMD between CDFs: ((1/N) sum_k |CDF_p(k) - CDF_q(k)|^r)^(1/r).
// Bucket distance is the index distance, not the score values. Throws
// ScaleMismatchError when the scales differ and UsageError for r <= 0.
double Emd(const ScoreDistribution& p, const ScoreDistribution& q, double r);

// Max-subtracted softmax. Throws NumericalError on non-finite logits.
ScoreDistribution Softmax(const Logits& z, const BucketScale& scale);

// Training objective: Emd(p, softmax(z), 2)^2.
double SquaredEmdLoss(const ScoreDistribution& p, const Logits& z);

// d SquaredEmdLoss / dz. Components sum to zero.
std::vector<double> SquaredEmdGrad(const ScoreDistribution& p,
                                   const Logits& z);

// Softmax cross-entropy -sum p_i log softmax(z)_i and its gradient
// softmax(z) - p, the classification baseline the EMD loss is compared with.
double CrossEntropyLoss(const ScoreDistribution& p, const Logits& z);
std::vector<double> CrossEntropyGrad(const ScoreDistribution& p,
                                     const Logits& z);

}  // namespace nima

#endif  // NIMA_DIST_CORE_H_
