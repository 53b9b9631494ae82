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

#include "nima/tuner.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmt/format.h"
#include "json.hpp"
#include "nima/error.h"

namespace nima {

namespace {

constexpr double kDetailBlurSigma = 2.0;

std::vector<double> Steps(double first, double step, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = first + step * i;
  return v;
}

double Param(const Setting& setting, const std::string& name) {
  for (const auto& [key, value] : setting) {
    if (key == name) return value;
  }
  throw UsageError(fmt::format("setting lacks parameter '{}'", name));
}

void CheckParams(const Setting& setting,
                 std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : setting) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError(fmt::format("unknown parameter '{}'", key));
    }
  }
}

}  // namespace

ImageTensor AddAwgn(const ImageTensor& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw UsageError(fmt::format("noise sigma must be >= 0, got {}", sigma));
  }
  if (sigma == 0.0) return img;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma / 255.0);
  std::vector<double> data(img.data().begin(), img.data().end());
  for (double& v : data) v += noise(rng);
  ClampUnit(data);
  return ImageTensor(img.height(), img.width(), img.channels(),
                     std::move(data));
}

ImageTensor Denoise(const ImageTensor& img, double spatial_sigma) {
  return GaussianBlur(img, spatial_sigma);
}

ImageTensor ToneAdjust(const ImageTensor& img, double detail, double shadow,
                       double brightness) {
  if (!(detail >= 0.0) || !std::isfinite(detail)) {
    throw UsageError(fmt::format("detail must be >= 0, got {}", detail));
  }
  if (!(shadow >= -1.0 && shadow <= 1.0)) {
    throw UsageError(fmt::format("shadow must be in [-1, 1], got {}", shadow));
  }
  if (!(brightness >= -1.0 && brightness <= 1.0)) {
    throw UsageError(
        fmt::format("brightness must be in [-1, 1], got {}", brightness));
  }
  std::vector<double> out(img.data().begin(), img.data().end());
  if (detail > 0.0) {
    const ImageTensor smooth = GaussianBlur(img, kDetailBlurSigma);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += detail * (img.data()[i] - smooth.data()[i]);
    }
  }
  if (shadow != 0.0) {
    const double gamma = std::exp2(-shadow);
    for (double& v : out) {
      if (v < 0.5) v = 0.5 * std::pow(std::max(v, 0.0) / 0.5, gamma);
    }
  }
  for (double& v : out) v += brightness;
  ClampUnit(out);
  return ImageTensor(img.height(), img.width(), img.channels(), std::move(out));
}

OperatorGrid::OperatorGrid(std::string name, std::vector<GridAxis> axes)
    : name_(std::move(name)), axes_(std::move(axes)) {
  if (axes_.empty()) throw UsageError("operator grid has no axes");
  for (const auto& axis : axes_) {
    if (axis.values.empty()) {
      throw UsageError(fmt::format("grid axis '{}' is empty", axis.name));
    }
    for (std::size_t i = 1; i < axis.values.size(); ++i) {
      if (!(axis.values[i - 1] < axis.values[i])) {
        throw UsageError(fmt::format(
            "grid axis '{}' values must be strictly increasing", axis.name));
      }
    }
  }
}

std::size_t OperatorGrid::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes_) n *= axis.values.size();
  return n;
}

Setting OperatorGrid::at(std::size_t index) const {
  if (index >= size()) {
    throw UsageError(fmt::format("grid index {} out of range", index));
  }
  Setting setting(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const std::size_t n = axes_[a].values.size();
    setting[a] = {axes_[a].name, axes_[a].values[index % n]};
    index /= n;
  }
  return setting;
}

OperatorGrid DefaultDenoiseGrid() {
  return OperatorGrid("denoise", {{"spatial_sigma", Steps(0.25, 0.25, 40)}});
}

OperatorGrid DefaultToneGrid() {
  return OperatorGrid("tone", {{"detail", Steps(0.0, 0.5, 6)},
                               {"shadow", Steps(-1.0, 0.2, 11)},
                               {"brightness", Steps(-0.25, 0.05, 11)}});
}

ImageTensor ApplyOperator(const std::string& op, const ImageTensor& img,
                          const Setting& setting) {
  if (op == "denoise") {
    CheckParams(setting, {"spatial_sigma"});
    return Denoise(img, Param(setting, "spatial_sigma"));
  }
  if (op == "tone") {
    CheckParams(setting, {"detail", "shadow", "brightness"});
    return ToneAdjust(img, Param(setting, "detail"), Param(setting, "shadow"),
                      Param(setting, "brightness"));
  }
  throw UsageError(fmt::format("unknown operator '{}'", op));
}

std::vector<CropWindow> SampleCropWindows(std::size_t height, std::size_t width,
                                          std::size_t crop_size,
                                          std::size_t n_crops,
                                          std::uint64_t seed) {
  if (crop_size == 0 || crop_size > height || crop_size > width) {
    throw DataError(fmt::format("crop {} does not fit a {}x{} image",
                                crop_size, height, width));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> ty(0, height - crop_size);
  std::uniform_int_distribution<std::size_t> tx(0, width - crop_size);
  std::vector<CropWindow> windows(n_crops);
  for (auto& w : windows) {
    w.top = ty(rng);
    w.left = tx(rng);
    w.size = crop_size;
  }
  return windows;
}

double ModelScorer::Score(const ImageTensor& crop, const CropWindow&) const {
  return Mean(Predict(crop, params_));
}

double CropAveragedScore(const ImageTensor& img, const TuneProtocol& protocol,
                         const Scorer& scorer) {
  if (protocol.n_crops == 0) throw UsageError("need at least one crop");
  const auto windows = SampleCropWindows(img.height(), img.width(),
                                         protocol.crop_size, protocol.n_crops,
                                         protocol.seed);
  double total = 0.0;
  for (const auto& w : windows) {
    total += scorer.Score(Crop(img, w.top, w.left, w.size, w.size), w);
  }
  return total / static_cast<double>(windows.size());
}

TuneResult Tune(const ImageTensor& img, const OperatorGrid& grid,
                const TuneProtocol& protocol, const Scorer& scorer) {
  TuneResult result;
  result.score_table.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Setting setting = grid.at(i);
    double score;
    try {
      score = CropAveragedScore(ApplyOperator(grid.name(), img, setting),
                                protocol, scorer);
    } catch (const Error& e) {
      throw Error(e.category(),
                  fmt::format("{} at {}: {}", grid.name(),
                              FormatSetting(setting), e.what()));
    }
    result.score_table.push_back(score);
    if (i == 0 || score > result.best_score) {
      result.best_score = score;
      result.best_index = i;
    }
  }
  result.best_setting = grid.at(result.best_index);
  return result;
}

std::string FormatSetting(const Setting& setting) {
  std::string out;
  for (const auto& [key, value] : setting) {
    if (!out.empty()) out += ",";
    out += fmt::format("{}={:g}", key, value);
  }
  return out;
}

std::string ToText(const OperatorGrid& grid, const TuneResult& result) {
  std::string out = fmt::format("# operator {} settings {}\n", grid.name(),
                                grid.size());
  for (std::size_t i = 0; i < result.score_table.size(); ++i) {
    out += fmt::format("{} {} {:.6f}\n", i, FormatSetting(grid.at(i)),
                       result.score_table[i]);
  }
  out += fmt::format("best {} {} {:.6f}\n", result.best_index,
                     FormatSetting(result.best_setting), result.best_score);
  return out;
}

std::string ToJson(const OperatorGrid& grid, const TuneResult& result) {
  using nlohmann::ordered_json;
  const auto setting_json = [](const Setting& s) {
    ordered_json j = ordered_json::object();
    for (const auto& [key, value] : s) j[key] = value;
    return j;
  };
  ordered_json doc;
  doc["operator"] = grid.name();
  doc["best_index"] = result.best_index;
  doc["best_setting"] = setting_json(result.best_setting);
  doc["best_score"] = result.best_score;
  ordered_json table = ordered_json::array();
  for (std::size_t i = 0; i < result.score_table.size(); ++i) {
    table.push_back({{"index", i},
                     {"setting", setting_json(grid.at(i))},
                     {"score", result.score_table[i]}});
  }
  doc["score_table"] = std::move(table);
  return doc.dump(2) + "\n";
}

}  // namespace nima
