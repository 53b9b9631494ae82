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

#ifndef NIMA_MODEL_H_
#define NIMA_MODEL_H_

// A small trainable scorer: fixed image statistics feed a ReLU multilayer
// perceptron (the "backbone"), followed by an N-way fully-connected head
// whose softmax is the predicted score distribution.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nima/data_io.h"
#include "nima/dist_core.h"
#include "nima/image.h"

namespace nima {

// Length of the fixed statistics vector produced by ImageStatistics.
inline constexpr std::size_t kStatisticsSize = 32;
inline constexpr std::size_t kGradientBins = 8;
inline constexpr std::size_t kGridSide = 4;

// Per-channel mean and variance (single-channel images are treated as three
// identical channels), a luminance gradient-magnitude histogram whose first
// bin collects magnitudes below half an 8-bit step, mean gradient magnitude,
// mean absolute Laplacian, and a kGridSide x kGridSide grid of luminance
// means. Mean and variance are accumulated in mirror-symmetric order, so they
// are bit-identical for an image and its horizontal flip.
std::vector<double> ImageStatistics(const ImageTensor& img);

// Offsets of each block inside the statistics vector.
inline constexpr std::size_t kStatMeanOffset = 0;
inline constexpr std::size_t kStatVarianceOffset = 3;
inline constexpr std::size_t kStatGradientOffset = 6;

enum class Activation { kRelu, kIdentity };

// Fully-connected layer; weights are out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  bool operator==(const DenseLayer&) const = default;
};

// Gradient (or momentum) buffers shaped like a DenseLayer.
struct LayerGrad {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct ParamGrads {
  std::vector<LayerGrad> backbone;
  LayerGrad head;
};

struct ModelParams {
  BucketScale scale = BucketScale::Ava();
  std::vector<DenseLayer> backbone;
  DenseLayer head;
  // Probability of zeroing each head input in train mode.
  double dropout_rate = 0.0;
  // Inference preprocessing: rescale to resize_to square, center crop.
  std::size_t resize_to = 256;
  std::size_t crop_to = 224;
  std::uint64_t seed = 0;
  // Fixed affine normalization of the statistics, (s - shift) * gain, set
  // from the training set before the first update.
  std::vector<double> input_shift = std::vector<double>(kStatisticsSize, 0.0);
  std::vector<double> input_gain = std::vector<double>(kStatisticsSize, 1.0);
  ParamGrads momentum;
  // Bumped on every optimizer step so stale forward caches are detected.
  std::uint64_t revision = 0;
};

struct ModelSpec {
  std::vector<std::size_t> hidden = {64, 64};
  double dropout_rate = 0.75;
  std::size_t resize_to = 256;
  std::size_t crop_to = 224;
};

// Seeded uniform initialization in +-1/sqrt(fan_in); zero biases and
// momentum.
ModelParams InitModel(const ModelSpec& spec, const BucketScale& scale,
                      std::uint64_t seed);

ParamGrads ZeroGrads(const ModelParams& params);

class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError(what) {}
};

// Normalized statistics followed by the backbone layers. Throws ShapeError if
// the first layer does not take kStatisticsSize inputs.
std::vector<double> ExtractFeatures(const ImageTensor& img,
                                    const ModelParams& params);

struct ForwardCache {
  std::vector<double> input;
  // Post-activation output of each backbone layer.
  std::vector<std::vector<double>> activations;
  // Head input after dropout and inverted scaling.
  std::vector<double> head_input;
  // 1 where the head input was kept, 0 where dropped.
  std::vector<unsigned char> keep;
  std::vector<double> logits;
  bool train_mode = false;
  std::uint64_t revision = 0;
};

// Runs the network on precomputed statistics.
std::pair<Logits, ForwardCache> ForwardStatistics(
    std::span<const double> statistics, const ModelParams& params,
    bool train_mode, std::mt19937_64* rng);

// Image -> logits. `rng` is required in train mode (dropout on the head
// input) and ignored otherwise.
std::pair<Logits, ForwardCache> Forward(const ImageTensor& img,
                                        const ModelParams& params,
                                        bool train_mode, std::mt19937_64* rng);

enum class LossKind { kSquaredEmd, kCrossEntropy };

double Loss(LossKind kind, const ScoreDistribution& gt, const Logits& z);

// Gradients of the loss for one example with respect to every weight and
// bias. Throws StaleCacheError if `cache` was produced with other params.
ParamGrads Backward(const ScoreDistribution& gt, const ForwardCache& cache,
                    const ModelParams& params,
                    LossKind loss = LossKind::kSquaredEmd);

class StaleCacheError : public UsageError {
 public:
  explicit StaleCacheError(const std::string& what) : UsageError(what) {}
};

// Rescale to params.resize_to and take the center params.crop_to square.
ImageTensor PrepareForInference(const ImageTensor& img,
                                const ModelParams& params);

// softmax(forward) on the prepared image, train mode off.
ScoreDistribution Predict(const ImageTensor& img, const ModelParams& params);

struct TrainConfig {
  double lr_backbone = 3e-7;
  double lr_head = 3e-6;
  double momentum = 0.9;
  double dropout_rate = 0.75;
  double decay_factor = 0.95;
  int decay_every_epochs = 10;
  int epochs = 1;
  std::size_t batch_size = 32;
  std::size_t resize_to = 256;
  std::size_t crop_to = 224;
  bool hflip = true;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {64, 64};
  LossKind loss = LossKind::kSquaredEmd;
};

// Throws UsageError when a field is out of range.
void Validate(const TrainConfig& config);

// base * decay_factor^floor(epoch / decay_every_epochs), epoch 0-based.
double EffectiveLearningRate(double base, const TrainConfig& config,
                             int epoch);

// velocity = momentum * velocity + grad; weights -= lr * velocity.
void SgdMomentumStep(std::span<double> weights, std::span<double> velocity,
                     std::span<const double> grad, double lr,
                     double momentum);

// Applies one update to every parameter with separate backbone/head rates.
void ApplyUpdate(ModelParams& params, const ParamGrads& grads,
                 double lr_backbone, double lr_head, double momentum);

struct AugmentDraw {
  std::size_t top = 0;
  std::size_t left = 0;
  bool flip = false;
};

// Uniform crop offset over all valid positions and a fair coin for the flip.
AugmentDraw DrawAugmentation(const TrainConfig& config, std::mt19937_64& rng);

// Rescale to resize_to square, crop crop_to at the drawn offset, maybe flip.
ImageTensor Augment(const ImageTensor& img, const TrainConfig& config,
                    const AugmentDraw& draw);

struct TrainResult {
  ModelParams params;
  // Mean training loss of each epoch.
  std::vector<double> loss_trace;
};

// Minibatch SGD with momentum, seeded per-epoch shuffling and augmentation.
// Throws DataError for an empty dataset and NumericalError on a non-finite
// loss.
TrainResult Train(const std::vector<DatasetRecord>& dataset,
                  const TrainConfig& config);

// Binary checkpoint: magic, format version, scale, preprocessing, dropout,
// seed, layer shapes and weights as little-endian IEEE-754 doubles, and a
// free-form config echo.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const ModelParams& params, const std::string& config_echo,
                    const std::filesystem::path& path);

struct LoadedCheckpoint {
  ModelParams params;
  std::string config_echo;
};

// Throws DataError on a bad magic, version or inconsistent layer shapes.
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace nima

#endif  // NIMA_MODEL_H_
