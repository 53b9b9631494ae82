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

#ifndef NIMA_IMAGE_H_
#define NIMA_IMAGE_H_

#include <cstddef>
#include <span>
#include <vector>

namespace nima {

// Row-major interleaved image with intensities in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  // Zero-filled. Throws DataError for empty dims or channels not 1 or 3.
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels);
  // Throws DataError on a size mismatch or values outside [0, 1].
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> data);

  static ImageTensor Constant(std::size_t height, std::size_t width,
                              std::size_t channels, double value);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const ImageTensor&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Half-pixel-centered bilinear resampling to height x width.
ImageTensor ResizeBilinear(const ImageTensor& img, std::size_t height,
                           std::size_t width);

// Throws DataError when the window does not fit.
ImageTensor Crop(const ImageTensor& img, std::size_t top, std::size_t left,
                 std::size_t height, std::size_t width);

ImageTensor FlipHorizontal(const ImageTensor& img);

// Separable Gaussian blur with standard deviation `sigma` pixels, kernel
// truncated at ceil(3 sigma) and renormalized, edges replicated. sigma == 0
// returns the input.
ImageTensor GaussianBlur(const ImageTensor& img, double sigma);

// Clamps every value into [0, 1].
void ClampUnit(std::vector<double>& values);

// Rec. 601 luma (or the single channel), row-major.
std::vector<double> Luminance(const ImageTensor& img);

}  // namespace nima

#endif  // NIMA_IMAGE_H_
