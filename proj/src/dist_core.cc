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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fmt/format.h"
#include "nima/error.h"

namespace nima {

namespace {

void CheckSameScale(const ScoreDistribution& p, const ScoreDistribution& q) {
  if (!(p.scale() == q.scale())) {
    throw ScaleMismatchError(
        fmt::format("bucket scales differ ({} vs {} buckets, or values)",
                    p.size(), q.size()));
  }
}

void CheckLogitsLength(const ScoreDistribution& p, const Logits& z) {
  if (z.size() != p.size()) {
    throw LengthMismatchError(fmt::format(
        "logits have {} entries, distribution has {}", z.size(), p.size()));
  }
}

// Softmax probabilities without wrapping them in a ScoreDistribution.
std::vector<double> SoftmaxValues(std::span<const double> z) {
  double zmax = -INFINITY;
  for (double v : z) {
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite logit");
    }
    zmax = std::max(zmax, v);
  }
  std::vector<double> q(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    q[i] = std::exp(z[i] - zmax);
    total += q[i];
  }
  for (double& v : q) v /= total;
  return q;
}

}  // namespace

BucketScale::BucketScale(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw DataError("a bucket scale needs at least two buckets");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite bucket value");
    }
    if (i > 0 && !(values_[i - 1] < values_[i])) {
      throw DataError(fmt::format(
          "bucket values must be strictly increasing (index {})", i));
    }
  }
}

BucketScale BucketScale::Ava() { return Integer(1, 10); }
BucketScale BucketScale::Tid() { return Integer(0, 10); }

BucketScale BucketScale::Integer(int first, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = first + static_cast<double>(i);
  return BucketScale(std::move(v));
}

ScoreDistribution::ScoreDistribution(BucketScale scale,
                                     std::vector<double> mass)
    : scale_(std::move(scale)), mass_(std::move(mass)) {
  if (mass_.size() != scale_.size()) {
    throw LengthMismatchError(fmt::format(
        "distribution has {} masses for a {}-bucket scale", mass_.size(),
        scale_.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (!std::isfinite(mass_[i]) || mass_[i] < 0.0) {
      throw DataError(fmt::format("invalid probability {} at bucket {}",
                                  mass_[i], i + 1));
    }
    total += mass_[i];
  }
  if (std::abs(total - 1.0) > kRenormalizeTolerance) {
    throw DataError(fmt::format("probabilities sum to {}, not 1", total));
  }
  for (double& m : mass_) m /= total;
}

ScoreDistribution ScoreDistribution::FromCounts(
    BucketScale scale, std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (!std::isfinite(c) || c < 0.0) {
      throw DataError("counts must be finite and nonnegative");
    }
    total += c;
  }
  if (total <= 0.0) {
    throw DataError("counts sum to zero");
  }
  std::vector<double> mass(counts.begin(), counts.end());
  for (double& m : mass) m /= total;
  return ScoreDistribution(std::move(scale), std::move(mass));
}

ScoreDistribution ScoreDistribution::PointMass(BucketScale scale,
                                               std::size_t bucket) {
  if (bucket >= scale.size()) {
    throw DataError(fmt::format("bucket {} outside a {}-bucket scale", bucket,
                                scale.size()));
  }
  std::vector<double> mass(scale.size(), 0.0);
  mass[bucket] = 1.0;
  return ScoreDistribution(std::move(scale), std::move(mass));
}

ScoreDistribution ScoreDistribution::Uniform(BucketScale scale) {
  const std::size_t n = scale.size();
  return ScoreDistribution(std::move(scale),
                           std::vector<double>(n, 1.0 / n));
}

double Mean(const ScoreDistribution& d) {
  double mu = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) mu += d.scale()[i] * d[i];
  return std::clamp(mu, d.scale().front(), d.scale().back());
}

double StdDev(const ScoreDistribution& d) {
  const double mu = Mean(d);
  double var = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dev = d.scale()[i] - mu;
    var += dev * dev * d[i];
  }
  return std::sqrt(var);
}

double Entropy(const ScoreDistribution& d) {
  double h = 0.0;
  for (double m : d.mass()) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

std::vector<double> Cdf(const ScoreDistribution& d) {
  std::vector<double> c(d.size());
  std::partial_sum(d.mass().begin(), d.mass().end(), c.begin());
  return c;
}

double Emd(const ScoreDistribution& p, const ScoreDistribution& q, double r) {
  CheckSameScale(p, q);
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw UsageError(fmt::format("EMD exponent must be positive, got {}", r));
  }
  const std::vector<double> cp = Cdf(p);
  const std::vector<double> cq = Cdf(q);
  double acc = 0.0;
  for (std::size_t k = 0; k < cp.size(); ++k) {
    const double gap = std::abs(cp[k] - cq[k]);
    acc += r == 1.0 ? gap : r == 2.0 ? gap * gap : std::pow(gap, r);
  }
  acc /= static_cast<double>(cp.size());
  return r == 1.0 ? acc : r == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / r);
}

ScoreDistribution Softmax(const Logits& z, const BucketScale& scale) {
  if (z.size() != scale.size()) {
    throw LengthMismatchError(fmt::format(
        "logits have {} entries, scale has {}", z.size(), scale.size()));
  }
  return ScoreDistribution(scale, SoftmaxValues(z.values()));
}

double SquaredEmdLoss(const ScoreDistribution& p, const Logits& z) {
  CheckLogitsLength(p, z);
  const std::vector<double> q = SoftmaxValues(z.values());
  double cp = 0.0;
  double cq = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    cp += p[k];
    cq += q[k];
    acc += (cq - cp) * (cq - cp);
  }
  return acc / static_cast<double>(q.size());
}

std::vector<double> SquaredEmdGrad(const ScoreDistribution& p,
                                   const Logits& z) {
  CheckLogitsLength(p, z);
  const std::size_t n = z.size();
  const std::vector<double> q = SoftmaxValues(z.values());

  // gap[k] = CDF_q(k) - CDF_p(k).
  std::vector<double> gap(n);
  double cp = 0.0;
  double cq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cp += p[k];
    cq += q[k];
    gap[k] = cq - cp;
  }
  // dL/dq_i = (2/N) sum_{k >= i} gap[k].
  std::vector<double> dq(n);
  double tail = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    tail += gap[i];
    dq[i] = 2.0 * tail / static_cast<double>(n);
  }
  // Softmax Jacobian: dL/dz_j = q_j (dq_j - sum_i q_i dq_i).
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) expected += q[i] * dq[i];
  std::vector<double> grad(n);
  for (std::size_t j = 0; j < n; ++j) grad[j] = q[j] * (dq[j] - expected);
  return grad;
}

double CrossEntropyLoss(const ScoreDistribution& p, const Logits& z) {
  CheckLogitsLength(p, z);
  double zmax = -INFINITY;
  for (double v : z.values()) zmax = std::max(zmax, v);
  double lse = 0.0;
  for (double v : z.values()) lse += std::exp(v - zmax);
  lse = zmax + std::log(lse);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) loss -= p[i] * (z[i] - lse);
  }
  return loss;
}

std::vector<double> CrossEntropyGrad(const ScoreDistribution& p,
                                     const Logits& z) {
  CheckLogitsLength(p, z);
  std::vector<double> grad = SoftmaxValues(z.values());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= p[i];
  return grad;
}

}  // namespace nima
