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

#include "nima/image.h"

#include <algorithm>
#include <cmath>

#include "fmt/format.h"
#include "nima/error.h"

namespace nima {

namespace {

void CheckShape(std::size_t height, std::size_t width, std::size_t channels) {
  if (height == 0 || width == 0) {
    throw DataError(fmt::format("empty image {}x{}", height, width));
  }
  if (channels != 1 && channels != 3) {
    throw DataError(fmt::format("unsupported channel count {}", channels));
  }
}

std::vector<double> GaussianKernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels)
    : height_(height), width_(width), channels_(channels) {
  CheckShape(height, width, channels);
  data_.assign(height * width * channels, 0.0);
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels),
      data_(std::move(data)) {
  CheckShape(height, width, channels);
  if (data_.size() != height * width * channels) {
    throw DataError(fmt::format("image data has {} values, expected {}",
                                data_.size(), height * width * channels));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError(fmt::format("pixel value {} outside [0, 1]", v));
    }
  }
}

ImageTensor ImageTensor::Constant(std::size_t height, std::size_t width,
                                  std::size_t channels, double value) {
  return ImageTensor(height, width, channels,
                     std::vector<double>(height * width * channels, value));
}

ImageTensor ResizeBilinear(const ImageTensor& img, std::size_t height,
                           std::size_t width) {
  if (height == img.height() && width == img.width()) return img;
  ImageTensor out(height, width, img.channels());
  const double sy = static_cast<double>(img.height()) / height;
  const double sx = static_cast<double>(img.width()) / width;
  const double ymax = static_cast<double>(img.height() - 1);
  const double xmax = static_cast<double>(img.width() - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, ymax);
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, xmax);
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const double top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
        const double bot = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = std::clamp(top * (1 - wy) + bot * wy, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageTensor Crop(const ImageTensor& img, std::size_t top, std::size_t left,
                 std::size_t height, std::size_t width) {
  if (top + height > img.height() || left + width > img.width()) {
    throw DataError(fmt::format("crop {}x{}+{}+{} outside {}x{} image", height,
                                width, top, left, img.height(), img.width()));
  }
  ImageTensor out(height, width, img.channels());
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = img.at(top + y, left + x, c);
      }
    }
  }
  return out;
}

ImageTensor FlipHorizontal(const ImageTensor& img) {
  ImageTensor out(img.height(), img.width(), img.channels());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        out.at(y, img.width() - 1 - x, c) = img.at(y, x, c);
      }
    }
  }
  return out;
}

ImageTensor GaussianBlur(const ImageTensor& img, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw UsageError(fmt::format("blur sigma must be >= 0, got {}", sigma));
  }
  if (sigma == 0.0) return img;
  const std::vector<double> k = GaussianKernel(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  const std::size_t ch = img.channels();

  ImageTensor tmp(img.height(), img.width(), ch);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (long i = -radius; i <= radius; ++i) {
          const long xx = std::clamp(x + i, 0L, w - 1);
          acc += k[i + radius] * img.at(y, xx, c);
        }
        tmp.at(y, x, c) = acc;
      }
    }
  }
  ImageTensor out(img.height(), img.width(), ch);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (long i = -radius; i <= radius; ++i) {
          const long yy = std::clamp(y + i, 0L, h - 1);
          acc += k[i + radius] * tmp.at(yy, x, c);
        }
        // Rounding can push a convex combination a hair past the range.
        out.at(y, x, c) = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

void ClampUnit(std::vector<double>& values) {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

std::vector<double> Luminance(const ImageTensor& img) {
  std::vector<double> lum(img.height() * img.width());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      lum[y * img.width() + x] =
          img.channels() == 1
              ? img.at(y, x, 0)
              : 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                    0.114 * img.at(y, x, 2);
    }
  }
  return lum;
}

}  // namespace nima
