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

// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit status 1 if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fmt/format.h"
#include "nima/cli.h"
#include "nima/data_io.h"
#include "nima/dist_core.h"
#include "nima/maxent.h"
#include "nima/metrics.h"
#include "nima/model.h"
#include "nima/tuner.h"
#include "test_util.h"

namespace nima {
namespace {

namespace fs = std::filesystem;
using namespace nima::testing;

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double Wall() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         wall_)
        .count();
  }
  double Cpu() const {
    return static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC;
  }

 private:
  std::chrono::steady_clock::time_point wall_ = std::chrono::steady_clock::now();
  std::clock_t cpu_ = std::clock();
};

// Gradient checks for the loss and for every model parameter.
Verdict GradientCorrectness() {
  Stopwatch timer;
  const BucketScale ava = BucketScale::Ava();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.5);
  double worst_logit = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = RandomDistribution(rng, ava);
    std::vector<double> z(10);
    for (double& v : z) v = g(rng);
    const auto numeric = FiniteDifference(
        [&](std::span<const double> x) {
          return SquaredEmdLoss(p, Logits({x.begin(), x.end()}));
        },
        z, 1e-5);
    worst_logit = std::max(
        worst_logit, RelativeError(SquaredEmdGrad(p, Logits(z)), numeric));
  }

  double worst_model = 0.0;
  const auto images = GenerateSynthetic({3, 2, 5, 48});
  for (std::size_t k = 0; k < images.size(); ++k) {
    ModelParams params = InitModel({{64, 64}, 0.0}, ava, 200 + k);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (double* v : Flatten(params)) *v += jitter(rng);
    const auto stats = ImageStatistics(ResolveImage(images[k]));
    const auto& gt = images[k].gt;
    auto [logits, cache] = ForwardStatistics(stats, params, false, nullptr);
    const auto analytic = FlattenGrads(Backward(gt, cache, params));
    std::vector<double> x;
    for (double* v : Flatten(params)) x.push_back(*v);
    ModelParams probe = params;
    const auto slots = Flatten(probe);
    const auto numeric = FiniteDifference(
        [&](std::span<const double> values) {
          for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = values[i];
          return Loss(LossKind::kSquaredEmd, gt,
                      ForwardStatistics(stats, probe, false, nullptr).first);
        },
        x, 1e-4);
    worst_model = std::max(worst_model, RelativeError(analytic, numeric));
  }
  const double seconds = timer.Wall();
  return {worst_logit <= 1e-5 && worst_model <= 1e-4 && seconds < 5.0,
          fmt::format("logit rel err {:.2e} (<= 1e-5), model rel err {:.2e} "
                      "(<= 1e-4), {:.2f}s (< 5s)",
                      worst_logit, worst_model, seconds)};
}

Verdict EmdOracle() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (std::size_t n = 2; n <= 6; ++n) {
    const BucketScale scale = BucketScale::Integer(1, n);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto p = RandomMass(rng, n);
      const auto q = RandomMass(rng, n);
      const double emd =
          Emd(ScoreDistribution(scale, p), ScoreDistribution(scale, q), 1.0);
      worst = std::max(worst, std::abs(emd * static_cast<double>(n) -
                                       GreedyTransportCost(p, q)));
    }
  }
  return {worst <= 1e-12,
          fmt::format("N=2..6 x 1000 pairs, max |N*emd - greedy| {:.2e} "
                      "(<= 1e-12)",
                      worst)};
}

Verdict MaxEntRoundTrip() {
  Stopwatch timer;
  const BucketScale ava = BucketScale::Ava();
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double mu = 1.0 + 9.0 * u(rng);
    const double lo = std::sqrt(MinimumVariance(ava, mu));
    const double hi = std::sqrt((mu - 1.0) * (10.0 - mu));
    const double sigma = lo + (hi - lo) * u(rng);
    try {
      const auto sol = FitMaxEnt({mu, sigma, ava});
      worst = std::max({worst, std::abs(Mean(sol.dist) - mu),
                        std::abs(StdDev(sol.dist) - sigma)});
    } catch (const Error&) {
      ++failures;
    }
  }
  const auto uniform = FitMaxEnt({5.5, std::sqrt(8.25), ava});
  const double lambda =
      std::max(std::abs(uniform.lambda1), std::abs(uniform.lambda2));
  const double seconds = timer.Wall();
  return {failures == 0 && worst <= 1e-6 && lambda <= 1e-8 && seconds < 10.0,
          fmt::format("1000 targets, {} failures, max moment err {:.2e} "
                      "(<= 1e-6); uniform |lambda| {:.2e} (<= 1e-8); {:.2f}s "
                      "(< 10s)",
                      failures, worst, lambda, seconds)};
}

std::vector<double> TiedVector(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(2, 20);
  std::uniform_int_distribution<int> pool(0, 5);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (;;) {
    std::vector<double> v(len(rng));
    for (double& x : v) x = pool(rng) + (pool(rng) < 2 ? jitter(rng) : 0.0);
    if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) !=
        v.end()) {
      return v;
    }
  }
}

Verdict MetricOracles() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> slope(0.05, 4.0);
  double worst_lcc = 0.0;
  double worst_srcc = 0.0;
  double worst_monotone = 0.0;
  int trials = 0;
  while (trials < 1000) {
    const auto x = TiedVector(rng);
    auto y = TiedVector(rng);
    y.resize(x.size(), 2.5);
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) ==
        y.end()) {
      continue;
    }
    ++trials;
    worst_lcc = std::max(worst_lcc, std::abs(Lcc(x, y) - DefinitionalPearson(x, y)));
    worst_srcc =
        std::max(worst_srcc, std::abs(Srcc(x, y) - BruteForceSpearman(x, y)));
    // Strictly increasing piecewise-linear map with random slopes.
    const double a = slope(rng);
    const double b = slope(rng);
    std::vector<double> fx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      fx[i] = x[i] < 2.0 ? a * x[i] : 2.0 * a + b * (x[i] - 2.0);
      fx[i] = std::exp(0.3 * fx[i]);
    }
    worst_monotone = std::max(worst_monotone, std::abs(Srcc(x, fx) - 1.0));
  }
  return {worst_lcc <= 1e-12 && worst_srcc <= 1e-12 && worst_monotone <= 1e-12,
          fmt::format("1000 tied vectors: lcc err {:.2e}, srcc err {:.2e} "
                      "(<= 1e-12); monotone |srcc-1| {:.2e}",
                      worst_lcc, worst_srcc, worst_monotone)};
}

// Shared desk-scale recipe for both losses.
TrainConfig LossComparisonConfig(std::uint64_t seed, LossKind loss) {
  TrainConfig c;
  c.epochs = 60;
  c.lr_head = 1.0;
  c.lr_backbone = 0.1;
  c.momentum = 0.9;
  c.dropout_rate = 0.75;
  c.decay_factor = 0.95;
  c.decay_every_epochs = 10;
  c.batch_size = 32;
  c.resize_to = 64;
  c.crop_to = 56;
  c.hflip = true;
  c.hidden = {64, 64};
  c.seed = seed;
  c.loss = loss;
  return c;
}

Verdict LossExperiment() {
  Stopwatch timer;
  int emd_wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = GenerateSynthetic({200, 5, seed, 64});
    const auto [train, test] = Split(data, {0.2, seed});
    std::vector<ScoreDistribution> gt;
    for (const auto& r : test) gt.push_back(r.gt);
    double emd[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      const LossKind loss = k == 0 ? LossKind::kSquaredEmd : LossKind::kCrossEntropy;
      const auto model = Train(train, LossComparisonConfig(seed, loss)).params;
      std::vector<ScoreDistribution> pred;
      for (const auto& r : test) pred.push_back(Predict(ResolveImage(r), model));
      emd[k] = Evaluate(pred, gt).mean_emd_r1;
    }
    emd_wins += emd[0] < emd[1];
    per_seed += fmt::format("{}{:.4f}/{:.4f}", seed ? " " : "", emd[0], emd[1]);
  }
  const double cpu = timer.Cpu();
  return {emd_wins >= 8 && cpu < 300.0,
          fmt::format("EMD-trained lower in {}/10 seeds (>= 8), {:.0f}s CPU "
                      "(< 300s); test EMD emd/ce per seed: {}",
                      emd_wins, cpu, per_seed)};
}

Verdict LearningSanity() {
  const auto data = GenerateSynthetic({200, 5, 0, 64});
  const auto [train, test] = Split(data, {0.2, 0});
  const auto model =
      Train(train, LossComparisonConfig(0, LossKind::kSquaredEmd)).params;
  std::vector<double> means;
  std::vector<double> quality_rank;
  for (const auto& r : test) {
    means.push_back(Mean(Predict(ResolveImage(r), model)));
    quality_rank.push_back(-r.distortion_level);
  }
  const double srcc = Srcc(means, quality_rank);

  auto single = GenerateSynthetic({1, 2, 9, 32});
  single.erase(single.begin() + 1, single.end());
  TrainConfig oc;
  oc.hidden = {};
  oc.dropout_rate = 0.0;
  oc.resize_to = 32;
  oc.crop_to = 32;
  oc.hflip = false;
  oc.lr_head = 2.0;
  oc.lr_backbone = 0.0;
  oc.epochs = 500;
  oc.batch_size = 1;
  const double overfit = Train(single, oc).loss_trace.back();
  return {srcc >= 0.8 && overfit <= 1e-3,
          fmt::format("held-out SRCC vs distortion rank {:.3f} (>= 0.8); "
                      "single-example loss {:.2e} (<= 1e-3)",
                      srcc, overfit)};
}

ImageTensor Scene(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fx = 0.05 + 0.4 * u(rng);
  const double fy = 0.05 + 0.4 * u(rng);
  const double phase = 6.0 * u(rng);
  std::vector<double> data(size * size * 3);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        data[(y * size + x) * 3 + c] =
            0.5 + 0.35 * std::sin(fx * x + fy * y + phase + c);
      }
    }
  }
  return ImageTensor(size, size, 3, std::move(data));
}

class NegativeMse : public Scorer {
 public:
  explicit NegativeMse(const ImageTensor& clean) : clean_(clean) {}
  double Score(const ImageTensor& crop, const CropWindow& w) const override {
    const ImageTensor ref = Crop(clean_, w.top, w.left, w.size, w.size);
    double sse = 0.0;
    for (std::size_t i = 0; i < ref.data().size(); ++i) {
      const double d = crop.data()[i] - ref.data()[i];
      sse += d * d;
    }
    return -sse / static_cast<double>(ref.data().size());
  }

 private:
  const ImageTensor& clean_;
};

Verdict TunerCorrectness() {
  const OperatorGrid grid = DefaultDenoiseGrid();
  int matches = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto clean = Scene(64, seed);
    const auto noisy = AddAwgn(clean, 30.0, 500 + seed);
    const TuneProtocol protocol{50, 48, seed};
    const NegativeMse oracle(clean);
    const auto result = Tune(noisy, grid, protocol, oracle);
    const auto windows = SampleCropWindows(64, 64, 48, 50, seed);
    std::size_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto out = Denoise(noisy, grid.at(i)[0].second);
      double total = 0.0;
      for (const auto& w : windows) {
        total += oracle.Score(Crop(out, w.top, w.left, w.size, w.size), w);
      }
      const double score = total / static_cast<double>(windows.size());
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    matches += result.best_index == best && result.best_score == best_score;
  }
  const std::size_t tone = DefaultToneGrid().size();
  return {matches == 20 && tone == 726,
          fmt::format("brute-force argmax matched {}/20 images; tone grid {} "
                      "settings (726)",
                      matches, tone)};
}

int Cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::vector<const char*> argv = {"nima"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out != nullptr) *out = o.str() + e.str();
  return code;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Verdict EndToEndDeterminism() {
  const fs::path root =
      fs::temp_directory_path() / fmt::format("nima_accept_{}", ::getpid());
  fs::remove_all(root);
  const fs::path saved = fs::current_path();
  std::string log;
  int failures = 0;
  std::vector<std::string> artifacts[2];
  if (Cli({"gen-synth", "--out", (root / "syn").string(), "--n-base", "20",
           "--image-size", "32", "--seed", "8"},
          &log) != 0) {
    return {false, "gen-synth failed: " + log};
  }
  const std::string labels = (root / "syn" / "labels.txt").string();
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / fmt::format("run{}", run);
    fs::create_directories(dir);
    fs::current_path(dir);
    failures += Cli({"train", "--data", labels, "--out", "model.ckpt",
                     "--epochs", "5", "--resize", "32", "--crop", "28",
                     "--lr-head", "1.0", "--lr-backbone", "0.1", "--seed", "8"},
                    &log) != 0;
    failures += Cli({"eval", "--model", "model.ckpt", "--data", labels,
                     "--seed", "8", "--out", "report"},
                    &log) != 0;
    for (const char* file :
         {"model.ckpt", "model.ckpt.loss.csv", "report.txt", "report.json"}) {
      artifacts[run].push_back(Slurp(dir / file));
    }
  }
  fs::current_path(saved);
  fs::remove_all(root);
  int identical = 0;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < artifacts[0].size(); ++i) {
    identical += !artifacts[0][i].empty() && artifacts[0][i] == artifacts[1][i];
    bytes += artifacts[0][i].size();
  }
  return {failures == 0 && identical == 4,
          fmt::format("{}/4 artifacts byte-identical ({} bytes), {} failed "
                      "commands",
                      identical, bytes, failures)};
}

Verdict ReferenceMoments() {
  const BucketScale ava = BucketScale::Ava();
  const std::pair<double, double> moments[] = {
      {6.36, 1.04}, {7.84, 2.08}, {2.62, 2.15}, {3.12, 1.28}};
  double worst = 0.0;
  std::string shown;
  for (const auto& [mu, sigma] : moments) {
    const auto sol = FitMaxEnt({mu, sigma, ava});
    const double err = std::max(std::abs(Mean(sol.dist) - mu),
                                std::abs(StdDev(sol.dist) - sigma));
    worst = std::max(worst, err);
    shown += fmt::format("{}{}({:.2f})", shown.empty() ? "" : " ", mu, sigma);
  }
  return {worst <= 1e-6,
          fmt::format("{} max moment err {:.2e} (<= 1e-6)", shown, worst)};
}

}  // namespace
}  // namespace nima

// With no arguments every criterion runs; otherwise only the listed ids.
int main(int argc, char** argv) {
  using nima::Verdict;
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"gradient correctness", nima::GradientCorrectness},
      {"emd oracle equivalence", nima::EmdOracle},
      {"maxent round trip", nima::MaxEntRoundTrip},
      {"metric oracles", nima::MetricOracles},
      {"emd vs cross-entropy training", nima::LossExperiment},
      {"learning sanity", nima::LearningSanity},
      {"tuner correctness", nima::TunerCorrectness},
      {"end-to-end determinism", nima::EndToEndDeterminism},
      {"reference moment round trip", nima::ReferenceMoments},
  };
  constexpr int kCount = static_cast<int>(std::size(criteria));
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > kCount) {
      fmt::print(stderr, "unknown criterion '{}'\n", argv[i]);
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty()) {
    for (int id = 1; id <= kCount; ++id) selected.push_back(id);
  }
  int failed = 0;
  for (int id : selected) {
    const Criterion& c = criteria[id - 1];
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    fmt::print("[{}] {} {}: {}\n", v.pass ? "PASS" : "FAIL", id, c.name,
               v.detail);
    std::fflush(stdout);
    failed += !v.pass;
  }
  fmt::print("{} of {} criteria passed\n", selected.size() - failed,
             selected.size());
  return failed == 0 ? 0 : 1;
}
