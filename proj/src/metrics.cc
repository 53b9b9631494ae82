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

#include "nima/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "fmt/format.h"
#include "nima/error.h"

namespace nima {

namespace {

void CheckPair(std::span<const double> x, std::span<const double> y,
               std::size_t min_size) {
  if (x.size() != y.size()) {
    throw LengthMismatchError(
        fmt::format("length mismatch: {} vs {}", x.size(), y.size()));
  }
  if (x.size() < min_size) {
    throw UsageError(fmt::format("need at least {} samples, got {}", min_size,
                                 x.size()));
  }
}

// Rounds to the printed precision so -0.000000 never shows up.
double Printable(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

std::vector<std::pair<const char*, double>> Fields(const EvalReport& r) {
  return {{"accuracy_two_class", r.accuracy_two_class},
          {"lcc_mean", r.lcc_mean},
          {"srcc_mean", r.srcc_mean},
          {"lcc_std", r.lcc_std},
          {"srcc_std", r.srcc_std},
          {"mean_emd_r1", r.mean_emd_r1}};
}

}  // namespace

double Lcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw DegenerateInputError("correlation input has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> FractionalRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double Srcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y, 2);
  const std::vector<double> rx = FractionalRanks(x);
  const std::vector<double> ry = FractionalRanks(y);
  return Lcc(rx, ry);
}

std::vector<std::size_t> RankDescending(std::span<const double> scores) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw DataError(fmt::format("score {} is not finite", i));
    }
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

double TwoClassAccuracy(std::span<const double> pred_means,
                        std::span<const double> gt_means, double cutoff) {
  CheckPair(pred_means, gt_means, 1);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pred_means.size(); ++i) {
    if ((pred_means[i] > cutoff) == (gt_means[i] > cutoff)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(pred_means.size());
}

EvalReport Evaluate(std::span<const ScoreDistribution> pred,
                    std::span<const ScoreDistribution> gt, double cutoff) {
  if (pred.size() != gt.size()) {
    throw LengthMismatchError(fmt::format(
        "{} predictions for {} ground-truth examples", pred.size(),
        gt.size()));
  }
  if (pred.empty()) {
    throw UsageError("nothing to evaluate");
  }
  const std::size_t n = pred.size();
  std::vector<double> pred_mean(n), gt_mean(n), pred_std(n), gt_std(n);
  double emd_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      emd_sum += Emd(pred[i], gt[i], 1.0);
    } catch (const ScaleMismatchError& e) {
      throw ScaleMismatchError(fmt::format("example {}: {}", i, e.what()));
    }
    pred_mean[i] = Mean(pred[i]);
    gt_mean[i] = Mean(gt[i]);
    pred_std[i] = StdDev(pred[i]);
    gt_std[i] = StdDev(gt[i]);
  }

  EvalReport report;
  report.n_examples = n;
  report.accuracy_two_class = TwoClassAccuracy(pred_mean, gt_mean, cutoff);
  report.mean_emd_r1 = emd_sum / static_cast<double>(n);
  const auto correlate = [](const char* what, auto fn,
                            std::span<const double> a,
                            std::span<const double> b) {
    try {
      return fn(a, b);
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError(fmt::format("{}: {}", what, e.what()));
    }
  };
  report.lcc_mean = correlate("LCC of means", Lcc, pred_mean, gt_mean);
  report.srcc_mean = correlate("SRCC of means", Srcc, pred_mean, gt_mean);
  report.lcc_std = correlate("LCC of std-devs", Lcc, pred_std, gt_std);
  report.srcc_std = correlate("SRCC of std-devs", Srcc, pred_std, gt_std);
  return report;
}

std::string ToText(const EvalReport& report) {
  std::string out;
  for (const auto& [key, value] : Fields(report)) {
    out += fmt::format("{} {:.6f}\n", key, Printable(value));
  }
  out += fmt::format("n_examples {}\n", report.n_examples);
  return out;
}

std::string ToJson(const EvalReport& report) {
  std::string out = "{";
  for (const auto& [key, value] : Fields(report)) {
    out += fmt::format("\"{}\": {:.6f}, ", key, Printable(value));
  }
  out += fmt::format("\"n_examples\": {}}}\n", report.n_examples);
  return out;
}

}  // namespace nima
