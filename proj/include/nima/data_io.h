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

#ifndef NIMA_DATA_IO_H_
#define NIMA_DATA_IO_H_

// Dataset ingestion and generation.
//
// Text formats are one record per line, whitespace separated, with `#`
// starting a comment:
//   counts file        <id> <c_1> ... <c_N>     nonnegative integer counts
//   MOS file           <id> <mean> <std>
//   distribution file  <id> <p_1> ... <p_N>     probabilities
// Images are binary PPM (P6) or PGM (P5) with 8-bit samples.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nima/dist_core.h"
#include "nima/error.h"
#include "nima/image.h"

namespace nima {

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : DataError(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class SourceTag { kNativeCounts, kMaxEntFitted, kSynthetic };

using ImageRef = std::variant<std::filesystem::path, ImageTensor>;

struct DatasetRecord {
  std::string id;
  ImageRef image;
  ScoreDistribution gt;
  SourceTag source = SourceTag::kNativeCounts;
  // Synthetic records only: 1-based distortion level and base image index.
  int distortion_level = 0;
  int base_index = -1;
};

// Returns the embedded tensor or reads the referenced file.
ImageTensor ResolveImage(const DatasetRecord& record);

ImageTensor ReadPnm(const std::filesystem::path& path);
// P6 for three channels, P5 for one; values rounded to 8 bits.
void WritePnm(const ImageTensor& img, const std::filesystem::path& path);

struct LoadOptions {
  BucketScale scale = BucketScale::Ava();
  // When set, every id must resolve to an image under this directory, either
  // as given or with a .ppm/.pgm suffix. When unset, ids are kept as paths
  // relative to the data file's directory and not checked.
  std::optional<std::filesystem::path> image_root;
};

// Maps [from_lo, from_hi] affinely onto [to_lo, to_hi] before fitting; the
// std is scaled by the same factor.
struct AffineRescale {
  double from_lo = 0.0;
  double from_hi = 100.0;
  double to_lo = 1.0;
  double to_hi = 10.0;
};

std::vector<DatasetRecord> LoadCountsFile(const std::filesystem::path& path,
                                          const LoadOptions& options = {});

// Ground truth for each row is the maximum-entropy fit of its moments.
std::vector<DatasetRecord> LoadMosFile(
    const std::filesystem::path& path, const LoadOptions& options = {},
    const std::optional<AffineRescale>& rescale = std::nullopt);

std::vector<DatasetRecord> LoadDistributionFile(
    const std::filesystem::path& path, const LoadOptions& options = {});

enum class DataFormat { kAuto, kCounts, kMos, kDistribution };

// kAuto picks MOS for three-column rows, counts when every value is an
// integer, and distributions otherwise.
std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path,
                                       DataFormat format,
                                       const LoadOptions& options = {});

// Writes `<id> <p_1> ... <p_N>` with round-trip precision.
void WriteDistributionFile(const std::vector<DatasetRecord>& records,
                           const std::filesystem::path& path);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then the first round(n * test_fraction) records (clamped
// to leave both sides nonempty) go to the test side. Returns (train, test).
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> Split(
    const std::vector<DatasetRecord>& records, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t n_base = 200;
  int levels = 5;
  std::uint64_t seed = 0;
  std::size_t image_size = 64;
};

// Ground-truth mean for a distortion level: 8 at level 1 falling linearly to
// 2 at the last level.
double SyntheticLevelMean(int level, int levels);
// 1.4 at the two extreme levels, 1.0 in between.
double SyntheticLevelStd(int level, int levels);

// Procedural base images, each distorted at every level (noise for even base
// indices, blur for odd), with maxent-fitted AVA-scale labels.
std::vector<DatasetRecord> GenerateSynthetic(const SyntheticSpec& spec);

// Writes `<dir>/<id>.ppm` for every record, `<dir>/labels.txt` as a
// distribution file and `<dir>/mos.txt` with the label moments.
void WriteDataset(const std::vector<DatasetRecord>& records,
                  const std::filesystem::path& dir);

}  // namespace nima

#endif  // NIMA_DATA_IO_H_
