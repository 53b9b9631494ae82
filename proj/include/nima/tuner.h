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

#ifndef NIMA_TUNER_H_
#define NIMA_TUNER_H_

// Quality-guided parameter search for image enhancement operators: every
// setting of an operator grid is applied, scored by a quality model averaged
// over random crops, and the best-scoring setting wins.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nima/image.h"
#include "nima/model.h"

namespace nima {

// Adds N(0, (sigma/255)^2) noise per sample and clamps to [0, 1].
ImageTensor AddAwgn(const ImageTensor& img, double sigma, std::uint64_t seed);

// Gaussian spatial smoothing with std `spatial_sigma` pixels; stand-in for an
// edge-aware denoiser with the same spatial parameter.
ImageTensor Denoise(const ImageTensor& img, double spatial_sigma);

// Stand-in for a multi-layer Laplacian tone operator. Applied in order:
// detail boost img + detail * (img - blur(img, 2)), shadow lift of values
// below mid-gray by the gamma 2^-shadow, additive brightness, then clamp.
// Requires detail >= 0 and shadow, brightness in [-1, 1].
ImageTensor ToneAdjust(const ImageTensor& img, double detail, double shadow,
                       double brightness);

struct GridAxis {
  std::string name;
  std::vector<double> values;  // strictly increasing
};

using Setting = std::vector<std::pair<std::string, double>>;

class OperatorGrid {
 public:
  // Throws UsageError for an empty axis or unordered values.
  OperatorGrid(std::string name, std::vector<GridAxis> axes);

  const std::string& name() const { return name_; }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t size() const;
  // Row-major: the last axis varies fastest.
  Setting at(std::size_t index) const;

 private:
  std::string name_;
  std::vector<GridAxis> axes_;
};

// spatial_sigma in {0.25, 0.5, ..., 10.0}.
OperatorGrid DefaultDenoiseGrid();
// 6 detail x 11 shadow x 11 brightness levels, 726 settings.
OperatorGrid DefaultToneGrid();

// Applies the operator named by `grid.name()` ("denoise" or "tone") with the
// given setting. Throws UsageError for unknown operators or parameters.
ImageTensor ApplyOperator(const std::string& op, const ImageTensor& img,
                          const Setting& setting);

struct CropWindow {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t size = 0;

  bool operator==(const CropWindow&) const = default;
};

// Seeded uniform square crop offsets inside a height x width image. Throws
// DataError when the crop does not fit.
std::vector<CropWindow> SampleCropWindows(std::size_t height, std::size_t width,
                                          std::size_t crop_size,
                                          std::size_t n_crops,
                                          std::uint64_t seed);

// Anything that rates a crop with a scalar where higher is better. The
// window locates the crop inside the full candidate image.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double Score(const ImageTensor& crop,
                       const CropWindow& window) const = 0;
};

// Mean of the predicted score distribution.
class ModelScorer : public Scorer {
 public:
  explicit ModelScorer(const ModelParams& params) : params_(params) {}
  double Score(const ImageTensor& crop, const CropWindow& window) const override;

 private:
  const ModelParams& params_;
};

struct TuneProtocol {
  std::size_t n_crops = 50;
  std::size_t crop_size = 224;
  std::uint64_t seed = 0;
};

// Average Score over protocol.n_crops seeded crops.
double CropAveragedScore(const ImageTensor& img, const TuneProtocol& protocol,
                         const Scorer& scorer);

struct TuneResult {
  Setting best_setting;
  std::size_t best_index = 0;
  double best_score = 0.0;
  // One entry per grid setting in enumeration order.
  std::vector<double> score_table;
};

// Scores every grid setting with the same crop windows and returns the
// argmax, ties going to the lowest enumeration index.
TuneResult Tune(const ImageTensor& img, const OperatorGrid& grid,
                const TuneProtocol& protocol, const Scorer& scorer);

std::string FormatSetting(const Setting& setting);
// `index setting score` table.
std::string ToText(const OperatorGrid& grid, const TuneResult& result);
std::string ToJson(const OperatorGrid& grid, const TuneResult& result);

}  // namespace nima

#endif  // NIMA_TUNER_H_
