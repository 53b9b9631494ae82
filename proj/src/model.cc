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

#include "nima/model.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "fmt/format.h"
#include "nima/error.h"

namespace nima {

namespace {

constexpr std::array<double, kGradientBins - 1> kGradientEdges = {
    0.5 / 255.0, 0.01, 0.02, 0.04, 0.08, 0.16, 0.32};

// Sum of f(row[x]) over a row, adding mirrored pairs first.
template <typename F>
double MirrorSum(const ImageTensor& img, std::size_t y, std::size_t c, F f) {
  const std::size_t w = img.width();
  double acc = 0.0;
  for (std::size_t x = 0; x < w / 2; ++x) {
    acc += f(img.at(y, x, c)) + f(img.at(y, w - 1 - x, c));
  }
  if (w % 2 == 1) acc += f(img.at(y, w / 2, c));
  return acc;
}

void Dense(const DenseLayer& layer, std::span<const double> x,
           std::vector<double>& out) {
  out.assign(layer.out, 0.0);
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* row = layer.weights.data() + o * layer.in;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    if (layer.activation == Activation::kRelu && acc < 0.0) acc = 0.0;
    out[o] = acc;
  }
}

DenseLayer MakeLayer(std::size_t in, std::size_t out, Activation act,
                     std::mt19937_64& rng) {
  DenseLayer layer{in, out, std::vector<double>(in * out),
                   std::vector<double>(out, 0.0), act};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& w : layer.weights) w = u(rng);
  return layer;
}

LayerGrad ZeroLike(const DenseLayer& layer) {
  return {std::vector<double>(layer.weights.size(), 0.0),
          std::vector<double>(layer.bias.size(), 0.0)};
}

void CheckShapes(const ModelParams& params) {
  std::size_t width = kStatisticsSize;
  for (std::size_t l = 0; l < params.backbone.size(); ++l) {
    const DenseLayer& layer = params.backbone[l];
    if (layer.in != width || layer.weights.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out) {
      throw ShapeError(fmt::format(
          "backbone layer {} is {}x{}, expected {} inputs", l, layer.out,
          layer.in, width));
    }
    width = layer.out;
  }
  const DenseLayer& head = params.head;
  if (head.in != width || head.weights.size() != head.in * head.out ||
      head.bias.size() != head.out) {
    throw ShapeError(fmt::format("head is {}x{}, expected {} inputs", head.out,
                                 head.in, width));
  }
  if (head.out != params.scale.size()) {
    throw ShapeError(fmt::format("head has {} outputs for a {}-bucket scale",
                                 head.out, params.scale.size()));
  }
  if (params.input_shift.size() != kStatisticsSize ||
      params.input_gain.size() != kStatisticsSize) {
    throw ShapeError("input normalization has the wrong length");
  }
}

// --- checkpoint encoding -------------------------------------------------

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void F64s(std::span<const double> v) {
    U64(v.size());
    for (double x : v) F64(x);
  }
  void Bytes(std::string_view s) {
    U64(s.size());
    bytes_.append(s);
  }
  void Layer(const DenseLayer& layer) {
    U64(layer.in);
    U64(layer.out);
    U8(layer.activation == Activation::kRelu ? 1 : 0);
    F64s(layer.weights);
    F64s(layer.bias);
  }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint8_t U8() {
    Need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t U32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(U8()) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(U8()) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::vector<double> F64s() {
    const std::uint64_t n = U64();
    Need(n * 8);
    std::vector<double> v(n);
    for (double& x : v) x = F64();
    return v;
  }
  std::string Bytes() {
    const std::uint64_t n = U64();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  DenseLayer Layer() {
    DenseLayer layer;
    layer.in = U64();
    layer.out = U64();
    const std::uint8_t act = U8();
    if (act > 1) throw DataError("checkpoint: unknown activation");
    layer.activation = act == 1 ? Activation::kRelu : Activation::kIdentity;
    layer.weights = F64s();
    layer.bias = F64s();
    return layer;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw DataError("checkpoint is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "NIMACKPT";

}  // namespace

std::vector<double> ImageStatistics(const ImageTensor& img) {
  std::vector<double> stats(kStatisticsSize, 0.0);
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const double count = static_cast<double>(h * w);

  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t src = img.channels() == 1 ? 0 : c;
    double sum = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      sum += MirrorSum(img, y, src, [](double v) { return v; });
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      sq += MirrorSum(img, y, src,
                      [mean](double v) { return (v - mean) * (v - mean); });
    }
    stats[kStatMeanOffset + c] = mean;
    stats[kStatVarianceOffset + c] = sq / count;
  }

  const std::vector<double> lum = Luminance(img);
  const auto L = [&](std::size_t y, std::size_t x) { return lum[y * w + x]; };
  std::array<double, kGradientBins> hist{};
  double grad_sum = 0.0;
  std::size_t grad_count = 0;
  for (std::size_t y = 0; y + 1 < h; ++y) {
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double gx = L(y, x + 1) - L(y, x);
      const double gy = L(y + 1, x) - L(y, x);
      const double mag = std::sqrt(gx * gx + gy * gy);
      const auto bin = static_cast<std::size_t>(
          std::upper_bound(kGradientEdges.begin(), kGradientEdges.end(), mag) -
          kGradientEdges.begin());
      hist[bin] += 1.0;
      grad_sum += mag;
      ++grad_count;
    }
  }
  if (grad_count == 0) {
    hist[0] = 1.0;
  } else {
    for (double& v : hist) v /= static_cast<double>(grad_count);
  }
  std::copy(hist.begin(), hist.end(), stats.begin() + kStatGradientOffset);
  std::size_t k = kStatGradientOffset + kGradientBins;
  stats[k++] = grad_count ? grad_sum / grad_count : 0.0;

  double lap_sum = 0.0;
  std::size_t lap_count = 0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      lap_sum += std::abs(L(y - 1, x) + L(y + 1, x) + L(y, x - 1) +
                          L(y, x + 1) - 4.0 * L(y, x));
      ++lap_count;
    }
  }
  stats[k++] = lap_count ? lap_sum / lap_count : 0.0;

  for (std::size_t gy = 0; gy < kGridSide; ++gy) {
    const std::size_t y0 = std::min(gy * h / kGridSide, h - 1);
    const std::size_t y1 = std::max(y0 + 1, (gy + 1) * h / kGridSide);
    for (std::size_t gx = 0; gx < kGridSide; ++gx) {
      const std::size_t x0 = std::min(gx * w / kGridSide, w - 1);
      const std::size_t x1 = std::max(x0 + 1, (gx + 1) * w / kGridSide);
      double acc = 0.0;
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) acc += L(y, x);
      }
      stats[k++] = acc / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }
  return stats;
}

ModelParams InitModel(const ModelSpec& spec, const BucketScale& scale,
                      std::uint64_t seed) {
  if (!(spec.dropout_rate >= 0.0 && spec.dropout_rate < 1.0)) {
    throw UsageError(fmt::format("dropout rate must be in [0, 1), got {}",
                                 spec.dropout_rate));
  }
  std::mt19937_64 rng(seed);
  ModelParams params;
  params.scale = scale;
  std::size_t width = kStatisticsSize;
  for (std::size_t hidden : spec.hidden) {
    if (hidden == 0) throw UsageError("hidden layer width must be positive");
    params.backbone.push_back(MakeLayer(width, hidden, Activation::kRelu, rng));
    width = hidden;
  }
  params.head = MakeLayer(width, scale.size(), Activation::kIdentity, rng);
  params.dropout_rate = spec.dropout_rate;
  params.resize_to = spec.resize_to;
  params.crop_to = spec.crop_to;
  params.seed = seed;
  params.momentum = ZeroGrads(params);
  return params;
}

ParamGrads ZeroGrads(const ModelParams& params) {
  ParamGrads g;
  for (const auto& layer : params.backbone) g.backbone.push_back(ZeroLike(layer));
  g.head = ZeroLike(params.head);
  return g;
}

std::pair<Logits, ForwardCache> ForwardStatistics(
    std::span<const double> statistics, const ModelParams& params,
    bool train_mode, std::mt19937_64* rng) {
  CheckShapes(params);
  if (statistics.size() != kStatisticsSize) {
    throw ShapeError(fmt::format("expected {} statistics, got {}",
                                 kStatisticsSize, statistics.size()));
  }
  if (train_mode && params.dropout_rate > 0.0 && rng == nullptr) {
    throw UsageError("train-mode forward needs a random generator");
  }
  ForwardCache cache;
  cache.train_mode = train_mode;
  cache.revision = params.revision;
  cache.input.resize(kStatisticsSize);
  for (std::size_t i = 0; i < kStatisticsSize; ++i) {
    cache.input[i] =
        (statistics[i] - params.input_shift[i]) * params.input_gain[i];
  }
  std::span<const double> x = cache.input;
  cache.activations.resize(params.backbone.size());
  for (std::size_t l = 0; l < params.backbone.size(); ++l) {
    Dense(params.backbone[l], x, cache.activations[l]);
    x = cache.activations[l];
  }
  cache.head_input.assign(x.begin(), x.end());
  cache.keep.assign(x.size(), 1);
  if (train_mode && params.dropout_rate > 0.0) {
    std::bernoulli_distribution drop(params.dropout_rate);
    const double scale = 1.0 / (1.0 - params.dropout_rate);
    for (std::size_t i = 0; i < cache.head_input.size(); ++i) {
      if (drop(*rng)) {
        cache.keep[i] = 0;
        cache.head_input[i] = 0.0;
      } else {
        cache.head_input[i] *= scale;
      }
    }
  }
  Dense(params.head, cache.head_input, cache.logits);
  for (double v : cache.logits) {
    if (!std::isfinite(v)) throw NumericalError("non-finite logit");
  }
  return {Logits(cache.logits), std::move(cache)};
}

std::pair<Logits, ForwardCache> Forward(const ImageTensor& img,
                                        const ModelParams& params,
                                        bool train_mode, std::mt19937_64* rng) {
  return ForwardStatistics(ImageStatistics(img), params, train_mode, rng);
}

std::vector<double> ExtractFeatures(const ImageTensor& img,
                                    const ModelParams& params) {
  auto [logits, cache] = Forward(img, params, false, nullptr);
  if (cache.activations.empty()) return cache.input;
  return cache.activations.back();
}

double Loss(LossKind kind, const ScoreDistribution& gt, const Logits& z) {
  return kind == LossKind::kSquaredEmd ? SquaredEmdLoss(gt, z)
                                       : CrossEntropyLoss(gt, z);
}

ParamGrads Backward(const ScoreDistribution& gt, const ForwardCache& cache,
                    const ModelParams& params, LossKind loss) {
  CheckShapes(params);
  if (cache.revision != params.revision ||
      cache.activations.size() != params.backbone.size() ||
      cache.logits.size() != params.head.out ||
      cache.head_input.size() != params.head.in) {
    throw StaleCacheError("forward cache does not match these parameters");
  }
  if (!(gt.scale() == params.scale)) {
    throw ScaleMismatchError("ground truth scale differs from the model's");
  }
  const Logits z(cache.logits);
  const std::vector<double> dz = loss == LossKind::kSquaredEmd
                                     ? SquaredEmdGrad(gt, z)
                                     : CrossEntropyGrad(gt, z);

  ParamGrads grads = ZeroGrads(params);
  const DenseLayer& head = params.head;
  for (std::size_t o = 0; o < head.out; ++o) {
    grads.head.bias[o] = dz[o];
    for (std::size_t i = 0; i < head.in; ++i) {
      grads.head.weights[o * head.in + i] = dz[o] * cache.head_input[i];
    }
  }
  std::vector<double> delta(head.in, 0.0);
  for (std::size_t o = 0; o < head.out; ++o) {
    for (std::size_t i = 0; i < head.in; ++i) {
      delta[i] += head.weights[o * head.in + i] * dz[o];
    }
  }
  if (cache.train_mode && params.dropout_rate > 0.0) {
    const double scale = 1.0 / (1.0 - params.dropout_rate);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] = cache.keep[i] ? delta[i] * scale : 0.0;
    }
  }

  for (std::size_t l = params.backbone.size(); l-- > 0;) {
    const DenseLayer& layer = params.backbone[l];
    const std::vector<double>& out = cache.activations[l];
    const std::vector<double>& in = l == 0 ? cache.input : cache.activations[l - 1];
    if (layer.activation == Activation::kRelu) {
      for (std::size_t o = 0; o < layer.out; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    LayerGrad& g = grads.backbone[l];
    std::vector<double> next(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.bias[o] = delta[o];
      if (delta[o] == 0.0) continue;
      const double* row = layer.weights.data() + o * layer.in;
      double* grow = g.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        grow[i] = delta[o] * in[i];
        next[i] += row[i] * delta[o];
      }
    }
    delta = std::move(next);
  }
  return grads;
}

ImageTensor PrepareForInference(const ImageTensor& img,
                                const ModelParams& params) {
  const ImageTensor resized =
      ResizeBilinear(img, params.resize_to, params.resize_to);
  const std::size_t off = (params.resize_to - params.crop_to) / 2;
  return Crop(resized, off, off, params.crop_to, params.crop_to);
}

ScoreDistribution Predict(const ImageTensor& img, const ModelParams& params) {
  auto [logits, cache] =
      Forward(PrepareForInference(img, params), params, false, nullptr);
  return Softmax(logits, params.scale);
}

void Validate(const TrainConfig& c) {
  const auto require = [](bool ok, std::string_view what) {
    if (!ok) throw UsageError(std::string(what));
  };
  require(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0,
          "dropout_rate must be in [0, 1)");
  require(c.decay_factor > 0.0 && c.decay_factor <= 1.0,
          "decay_factor must be in (0, 1]");
  require(c.decay_every_epochs >= 1, "decay_every_epochs must be >= 1");
  require(c.crop_to >= 1 && c.crop_to <= c.resize_to,
          "crop_to must be in [1, resize_to]");
  require(c.epochs >= 0, "epochs must be >= 0");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.lr_backbone >= 0.0 && c.lr_head >= 0.0,
          "learning rates must be >= 0");
  require(c.momentum >= 0.0 && c.momentum < 1.0, "momentum must be in [0, 1)");
}

double EffectiveLearningRate(double base, const TrainConfig& config,
                             int epoch) {
  const int steps = epoch / config.decay_every_epochs;
  double lr = base;
  for (int i = 0; i < steps; ++i) lr *= config.decay_factor;
  return lr;
}

void SgdMomentumStep(std::span<double> weights, std::span<double> velocity,
                     std::span<const double> grad, double lr,
                     double momentum) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i];
    weights[i] -= lr * velocity[i];
  }
}

void ApplyUpdate(ModelParams& params, const ParamGrads& grads,
                 double lr_backbone, double lr_head, double momentum) {
  for (std::size_t l = 0; l < params.backbone.size(); ++l) {
    SgdMomentumStep(params.backbone[l].weights,
                    params.momentum.backbone[l].weights,
                    grads.backbone[l].weights, lr_backbone, momentum);
    SgdMomentumStep(params.backbone[l].bias, params.momentum.backbone[l].bias,
                    grads.backbone[l].bias, lr_backbone, momentum);
  }
  SgdMomentumStep(params.head.weights, params.momentum.head.weights,
                  grads.head.weights, lr_head, momentum);
  SgdMomentumStep(params.head.bias, params.momentum.head.bias,
                  grads.head.bias, lr_head, momentum);
  ++params.revision;
}

AugmentDraw DrawAugmentation(const TrainConfig& config, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> offset(
      0, config.resize_to - config.crop_to);
  AugmentDraw draw;
  draw.top = offset(rng);
  draw.left = offset(rng);
  if (config.hflip) draw.flip = std::bernoulli_distribution(0.5)(rng);
  return draw;
}

ImageTensor Augment(const ImageTensor& img, const TrainConfig& config,
                    const AugmentDraw& draw) {
  ImageTensor out = Crop(ResizeBilinear(img, config.resize_to, config.resize_to),
                         draw.top, draw.left, config.crop_to, config.crop_to);
  return draw.flip ? FlipHorizontal(out) : out;
}

TrainResult Train(const std::vector<DatasetRecord>& dataset,
                  const TrainConfig& config) {
  Validate(config);
  if (dataset.empty()) throw DataError("training set is empty");
  const BucketScale& scale = dataset.front().gt.scale();
  for (const auto& r : dataset) {
    if (!(r.gt.scale() == scale)) {
      throw ScaleMismatchError(fmt::format(
          "record '{}' uses a different bucket scale", r.id));
    }
  }

  ModelSpec spec;
  spec.hidden = config.hidden;
  spec.dropout_rate = config.dropout_rate;
  spec.resize_to = config.resize_to;
  spec.crop_to = config.crop_to;
  TrainResult result{InitModel(spec, scale, config.seed), {}};
  ModelParams& params = result.params;

  // The rescale step of augmentation is deterministic, so do it once.
  std::vector<ImageTensor> images;
  images.reserve(dataset.size());
  for (const auto& r : dataset) {
    images.push_back(
        ResizeBilinear(ResolveImage(r), config.resize_to, config.resize_to));
  }

  // Normalization from the inference view of each training image.
  const std::size_t n = dataset.size();
  std::vector<std::vector<double>> center_stats(n);
  for (std::size_t i = 0; i < n; ++i) {
    center_stats[i] = ImageStatistics(PrepareForInference(images[i], params));
  }
  for (std::size_t k = 0; k < kStatisticsSize; ++k) {
    double mean = 0.0;
    for (const auto& s : center_stats) mean += s[k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& s : center_stats) var += (s[k] - mean) * (s[k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    params.input_shift[k] = mean;
    params.input_gain[k] = sd > 1e-8 ? 1.0 / sd : 1.0;
  }
  const bool fixed_view = config.crop_to == config.resize_to && !config.hflip;

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr_b = EffectiveLearningRate(config.lr_backbone, config, epoch);
    const double lr_h = EffectiveLearningRate(config.lr_head, config, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < n;
         start += config.batch_size, ++batch) {
      const std::size_t end = std::min(n, start + config.batch_size);
      ParamGrads sum = ZeroGrads(params);
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t idx = order[j];
        std::vector<double> stats;
        if (fixed_view) {
          stats = center_stats[idx];
        } else {
          stats = ImageStatistics(
              Augment(images[idx], config, DrawAugmentation(config, rng)));
        }
        auto [logits, cache] = ForwardStatistics(stats, params, true, &rng);
        const double loss = Loss(config.loss, dataset[idx].gt, logits);
        if (!std::isfinite(loss)) {
          throw NumericalError(fmt::format(
              "non-finite loss at epoch {} batch {}", epoch, batch));
        }
        epoch_loss += loss;
        const ParamGrads g = Backward(dataset[idx].gt, cache, params,
                                      config.loss);
        for (std::size_t l = 0; l < g.backbone.size(); ++l) {
          for (std::size_t i = 0; i < g.backbone[l].weights.size(); ++i) {
            sum.backbone[l].weights[i] += g.backbone[l].weights[i];
          }
          for (std::size_t i = 0; i < g.backbone[l].bias.size(); ++i) {
            sum.backbone[l].bias[i] += g.backbone[l].bias[i];
          }
        }
        for (std::size_t i = 0; i < g.head.weights.size(); ++i) {
          sum.head.weights[i] += g.head.weights[i];
        }
        for (std::size_t i = 0; i < g.head.bias.size(); ++i) {
          sum.head.bias[i] += g.head.bias[i];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (auto& lg : sum.backbone) {
        for (double& v : lg.weights) v *= inv;
        for (double& v : lg.bias) v *= inv;
      }
      for (double& v : sum.head.weights) v *= inv;
      for (double& v : sum.head.bias) v *= inv;
      ApplyUpdate(params, sum, lr_b, lr_h, config.momentum);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

void SaveCheckpoint(const ModelParams& params, const std::string& config_echo,
                    const std::filesystem::path& path) {
  CheckShapes(params);
  Writer w;
  for (char c : kMagic) w.U8(static_cast<std::uint8_t>(c));
  w.U32(kCheckpointVersion);
  w.F64s(params.scale.values());
  w.U64(params.resize_to);
  w.U64(params.crop_to);
  w.F64(params.dropout_rate);
  w.U64(params.seed);
  w.F64s(params.input_shift);
  w.F64s(params.input_gain);
  w.U64(params.backbone.size());
  for (const auto& layer : params.backbone) w.Layer(layer);
  w.Layer(params.head);
  w.Bytes(config_echo);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  std::string magic;
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    magic.push_back(static_cast<char>(r.U8()));
  }
  if (magic != kMagic) {
    throw DataError(fmt::format("{} is not a model checkpoint", path.string()));
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw DataError(fmt::format("checkpoint version {} unsupported (want {})",
                                version, kCheckpointVersion));
  }
  LoadedCheckpoint out{ModelParams{}, {}};
  ModelParams& p = out.params;
  p.scale = BucketScale(r.F64s());
  p.resize_to = r.U64();
  p.crop_to = r.U64();
  p.dropout_rate = r.F64();
  p.seed = r.U64();
  p.input_shift = r.F64s();
  p.input_gain = r.F64s();
  const std::uint64_t layers = r.U64();
  if (layers > 1024) throw DataError("checkpoint: implausible layer count");
  for (std::uint64_t l = 0; l < layers; ++l) p.backbone.push_back(r.Layer());
  p.head = r.Layer();
  out.config_echo = r.Bytes();
  if (!r.done()) throw DataError("checkpoint has trailing bytes");
  if (p.crop_to == 0 || p.crop_to > p.resize_to) {
    throw DataError("checkpoint: invalid preprocessing sizes");
  }
  CheckShapes(p);
  p.momentum = ZeroGrads(p);
  return out;
}

}  // namespace nima
