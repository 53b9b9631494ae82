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

#ifndef NIMA_METRICS_H_
#define NIMA_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nima/dist_core.h"

namespace nima {

// Pearson linear correlation. Throws LengthMismatchError, UsageError for
// fewer than two samples, and DegenerateInputError for zero variance.
double Lcc(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> FractionalRanks(std::span<const double> x);

// Spearman rank correlation: Pearson correlation of fractional ranks.
double Srcc(std::span<const double> x, std::span<const double> y);

// Fraction of samples on the same side of `cutoff`. A value equal to the
// cutoff belongs to the low class.
double TwoClassAccuracy(std::span<const double> pred_means,
                        std::span<const double> gt_means, double cutoff);

// Indices ordering `scores` from highest to lowest; equal scores keep their
// input order. Throws DataError on a non-finite score.
std::vector<std::size_t> RankDescending(std::span<const double> scores);

struct EvalReport {
  double accuracy_two_class = 0.0;
  double lcc_mean = 0.0;
  double srcc_mean = 0.0;
  double lcc_std = 0.0;
  double srcc_std = 0.0;
  double mean_emd_r1 = 0.0;
  std::size_t n_examples = 0;

  bool operator==(const EvalReport&) const = default;
};

inline constexpr double kDefaultCutoff = 5.0;

// Correlations over per-image means and std-devs, two-class accuracy over
// means, and the average r=1 EMD. Errors name the offending example.
EvalReport Evaluate(std::span<const ScoreDistribution> pred,
                    std::span<const ScoreDistribution> gt,
                    double cutoff = kDefaultCutoff);

// `key value` lines in a fixed order, 6 decimals.
std::string ToText(const EvalReport& report);
// Flat JSON object, same key order and precision as ToText.
std::string ToJson(const EvalReport& report);

}  // namespace nima

#endif  // NIMA_METRICS_H_
