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

#include "nima/maxent.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "fmt/format.h"

namespace nima {

namespace {

// Targets this close (in variance, relative to the squared range) to either
// variance bound are solved in closed form; the dual diverges on the bound.
constexpr double kBoundaryMargin = 1e-9;

double Residual(const ScoreDistribution& d, const MomentTarget& target) {
  return std::max(std::abs(Mean(d) - target.mu),
                  std::abs(StdDev(d) - target.sigma));
}

MaxEntSolution Degenerate(ScoreDistribution dist, const MomentTarget& target,
                          MaxEntBranch branch) {
  const double residual = Residual(dist, target);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return MaxEntSolution{std::move(dist), nan, nan, 0, residual, branch};
}

MaxEntSolution TwoPointExtreme(const MomentTarget& target) {
  const BucketScale& s = target.scale;
  std::vector<double> mass(s.size(), 0.0);
  const double top = (target.mu - s.front()) / (s.back() - s.front());
  mass.front() = 1.0 - top;
  mass.back() = top;
  return Degenerate(ScoreDistribution(s, std::move(mass)), target,
                    MaxEntBranch::kTwoPointExtreme);
}

MaxEntSolution AdjacentSplit(const MomentTarget& target) {
  const BucketScale& s = target.scale;
  std::vector<double> mass(s.size(), 0.0);
  const auto values = s.values();
  const auto it = std::lower_bound(values.begin(), values.end(), target.mu);
  const std::size_t hi = static_cast<std::size_t>(it - values.begin());
  if (hi < s.size() && s[hi] == target.mu) {
    mass[hi] = 1.0;
  } else {
    const std::size_t lo = hi - 1;
    const double upper = (target.mu - s[lo]) / (s[hi] - s[lo]);
    mass[lo] = 1.0 - upper;
    mass[hi] = upper;
  }
  return Degenerate(ScoreDistribution(s, std::move(mass)), target,
                    MaxEntBranch::kAdjacentSplit);
}

// Dual of the entropy maximization in standardized coordinates
// t = (s - center) / half_range, u = t^2, so the features stay O(1).
class Dual {
 public:
  explicit Dual(const MomentTarget& target)
      : n_(target.scale.size()), t_(n_), u_(n_), logits_(n_), prob_(n_) {
    const BucketScale& s = target.scale;
    center_ = 0.5 * (s.front() + s.back());
    half_range_ = 0.5 * (s.back() - s.front());
    for (std::size_t i = 0; i < n_; ++i) {
      t_[i] = (s[i] - center_) / half_range_;
      u_[i] = t_[i] * t_[i];
    }
    const double shifted = (target.mu - center_) / half_range_;
    target_t_ = shifted;
    target_u_ = (target.sigma * target.sigma) / (half_range_ * half_range_) +
                shifted * shifted;
  }

  // Log-partition minus the linear constraint term; fills prob_.
  double Evaluate(double a, double b) {
    double zmax = -INFINITY;
    for (std::size_t i = 0; i < n_; ++i) {
      logits_[i] = a * t_[i] + b * u_[i];
      zmax = std::max(zmax, logits_[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      prob_[i] = std::exp(logits_[i] - zmax);
      total += prob_[i];
    }
    for (double& p : prob_) p /= total;
    return zmax + std::log(total) - a * target_t_ - b * target_u_;
  }

  // Gradient and Hessian at the point of the last Evaluate.
  void Derivatives(std::array<double, 2>& grad,
                   std::array<double, 3>& hess) const {
    double et = 0.0;
    double eu = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      et += prob_[i] * t_[i];
      eu += prob_[i] * u_[i];
    }
    double vtt = 0.0;
    double vtu = 0.0;
    double vuu = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double dt = t_[i] - et;
      const double du = u_[i] - eu;
      vtt += prob_[i] * dt * dt;
      vtu += prob_[i] * dt * du;
      vuu += prob_[i] * du * du;
    }
    grad = {et - target_t_, eu - target_u_};
    hess = {vtt, vtu, vuu};
  }

  const std::vector<double>& prob() const { return prob_; }

  // Multipliers of s and s^2 in the original units.
  std::array<double, 2> Lambdas(double a, double b) const {
    const double h2 = half_range_ * half_range_;
    return {a / half_range_ - 2.0 * b * center_ / h2, b / h2};
  }

 private:
  std::size_t n_;
  double center_ = 0.0;
  double half_range_ = 1.0;
  double target_t_ = 0.0;
  double target_u_ = 0.0;
  std::vector<double> t_;
  std::vector<double> u_;
  std::vector<double> logits_;
  std::vector<double> prob_;
};

}  // namespace

double MinimumVariance(const BucketScale& scale, double mu) {
  const auto values = scale.values();
  auto it = std::lower_bound(values.begin(), values.end(), mu);
  if (it == values.end()) return 0.0;
  if (*it == mu || it == values.begin()) return 0.0;
  return (mu - *(it - 1)) * (*it - mu);
}

bool Feasible(const MomentTarget& target) {
  const BucketScale& s = target.scale;
  if (!std::isfinite(target.mu) || !std::isfinite(target.sigma)) return false;
  if (target.sigma < 0.0) return false;
  if (target.mu < s.front() || target.mu > s.back()) return false;
  const double range = s.back() - s.front();
  const double bound = (target.mu - s.front()) * (s.back() - target.mu);
  return target.sigma * target.sigma <= bound + kBoundaryMargin * range * range;
}

MaxEntSolution FitMaxEnt(const MomentTarget& target, double tol,
                         int max_iter) {
  if (!(tol > 0.0)) {
    throw UsageError(fmt::format("maxent tolerance must be positive, got {}",
                                 tol));
  }
  if (!Feasible(target)) {
    throw InfeasibleMomentsError(fmt::format(
        "no distribution on [{}, {}] has mean {} and std {}",
        target.scale.front(), target.scale.back(), target.mu, target.sigma));
  }
  const BucketScale& s = target.scale;
  const double range = s.back() - s.front();
  const double var = target.sigma * target.sigma;
  const double upper = (target.mu - s.front()) * (s.back() - target.mu);
  const double margin = kBoundaryMargin * range * range;
  if (var >= upper - margin) return TwoPointExtreme(target);
  if (var <= MinimumVariance(s, target.mu) + margin) {
    return AdjacentSplit(target);
  }

  Dual dual(target);
  double a = 0.0;
  double b = 0.0;
  double phi = dual.Evaluate(a, b);
  std::array<double, 2> grad{};
  std::array<double, 3> hess{};
  double residual = INFINITY;
  int iter = 0;
  for (;; ++iter) {
    ScoreDistribution current(s, dual.prob());
    residual = Residual(current, target);
    if (residual <= tol) break;
    if (iter >= max_iter) {
      throw MaxEntConvergenceError(
          fmt::format("maxent did not converge in {} iterations "
                      "(mean {}, std {}, residual {:.3e})",
                      max_iter, target.mu, target.sigma, residual),
          residual);
    }
    dual.Derivatives(grad, hess);
    const double det = hess[0] * hess[2] - hess[1] * hess[1];
    double da;
    double db;
    if (det > 1e-300 && hess[0] > 0.0) {
      da = -(hess[2] * grad[0] - hess[1] * grad[1]) / det;
      db = -(hess[0] * grad[1] - hess[1] * grad[0]) / det;
    } else {
      da = -grad[0];
      db = -grad[1];
    }
    // Halve the step until the dual objective stops increasing. Close to
    // the optimum the objective is flat to rounding, so a step that shrinks
    // the gradient is accepted as well.
    const double slack = 1e-15 * std::max(1.0, std::abs(phi));
    const double grad_norm = std::hypot(grad[0], grad[1]);
    const auto accept = [&](double value) {
      if (value <= phi + slack) return true;
      if (!std::isfinite(value)) return false;
      std::array<double, 2> g{};
      std::array<double, 3> h{};
      dual.Derivatives(g, h);
      return std::hypot(g[0], g[1]) < 0.5 * grad_norm;
    };
    double step = 1.0;
    double next = dual.Evaluate(a + da, b + db);
    while (!accept(next) && step > 1e-30) {
      step *= 0.5;
      next = dual.Evaluate(a + step * da, b + step * db);
    }
    if (!std::isfinite(next)) {
      throw MaxEntConvergenceError("maxent dual became non-finite", residual);
    }
    a += step * da;
    b += step * db;
    phi = next;
  }
  const auto lambdas = dual.Lambdas(a, b);
  return MaxEntSolution{ScoreDistribution(s, dual.prob()), lambdas[0],
                        lambdas[1], iter, residual,
                        MaxEntBranch::kExponentialFamily};
}

}  // namespace nima
