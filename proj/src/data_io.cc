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

#include "nima/data_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <string_view>

#include "fmt/format.h"
#include "nima/maxent.h"

namespace nima {

namespace fs = std::filesystem;

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

// Splits a line on spaces/tabs, dropping everything after `#`.
std::vector<Token> Tokenize(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    line = line.substr(0, hash);
  }
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r') {
      ++i;
    }
    if (i > start) tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

struct Row {
  std::size_t line;
  std::vector<Token> tokens;
};

// Reads every non-blank, non-comment row. `storage` keeps the lines alive.
std::vector<Row> ReadRows(const fs::path& path,
                          std::vector<std::string>& storage) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::string line;
  std::vector<std::size_t> numbers;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    storage.push_back(line);
    numbers.push_back(n);
  }
  std::vector<Row> rows;
  for (std::size_t i = 0; i < storage.size(); ++i) {
    auto tokens = Tokenize(storage[i]);
    if (!tokens.empty()) rows.push_back({numbers[i], std::move(tokens)});
  }
  return rows;
}

[[noreturn]] void Fail(const fs::path& path, std::size_t line,
                       std::size_t column, std::string_view what) {
  throw ParseError(
      fmt::format("{}:{}:{}: {}", path.string(), line, column, what), line,
      column);
}

double ParseReal(const fs::path& path, const Row& row, const Token& tok) {
  double v = 0.0;
  const char* end = tok.text.data() + tok.text.size();
  const auto [ptr, ec] = std::from_chars(tok.text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    Fail(path, row.line, tok.column,
         fmt::format("expected a number, got '{}'", tok.text));
  }
  return v;
}

double ParseCount(const fs::path& path, const Row& row, const Token& tok) {
  std::uint64_t v = 0;
  const char* end = tok.text.data() + tok.text.size();
  const auto [ptr, ec] = std::from_chars(tok.text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    Fail(path, row.line, tok.column,
         fmt::format("expected a nonnegative integer count, got '{}'",
                     tok.text));
  }
  return static_cast<double>(v);
}

void ExpectColumns(const fs::path& path, const Row& row, std::size_t n) {
  if (row.tokens.size() != n) {
    const std::size_t column = row.tokens.size() > n
                                   ? row.tokens[n].column
                                   : row.tokens.back().column;
    Fail(path, row.line, column,
         fmt::format("expected {} fields, found {}", n, row.tokens.size()));
  }
}

std::optional<fs::path> FindImage(const fs::path& base) {
  for (const char* suffix : {"", ".ppm", ".pgm"}) {
    fs::path candidate = base;
    candidate += suffix;
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  return std::nullopt;
}

ImageRef ImageFor(const fs::path& data_path, const Row& row,
                  const LoadOptions& options) {
  const std::string id(row.tokens[0].text);
  if (!options.image_root) {
    return data_path.parent_path() / id;
  }
  if (auto found = FindImage(*options.image_root / id)) return *found;
  Fail(data_path, row.line, row.tokens[0].column,
       fmt::format("missing image for '{}' under {}", id,
                   options.image_root->string()));
}

bool IsInteger(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

// Reads one whitespace-delimited header token, skipping `#` comments.
std::string PnmHeaderToken(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

// Procedural base image: smooth color ramp, oriented sinusoidal texture
// patches and one hard-edged disc.
ImageTensor SyntheticBase(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s = static_cast<double>(size);
  double base[3], gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = 0.25 + 0.5 * u(rng);
    gx[c] = (u(rng) - 0.5) * 0.4 / s;
    gy[c] = (u(rng) - 0.5) * 0.4 / s;
  }
  std::vector<double> data(size * size * 3);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) {
        data[(y * size + x) * 3 + c] =
            base[c] + gx[c] * (x - s / 2) + gy[c] * (y - s / 2);
      }
    }
  }
  for (int patch = 0; patch < 3; ++patch) {
    const std::size_t ph = size / 3 + static_cast<std::size_t>(u(rng) * s / 3);
    const std::size_t pw = size / 3 + static_cast<std::size_t>(u(rng) * s / 3);
    const std::size_t top = static_cast<std::size_t>(u(rng) * (s - ph));
    const std::size_t left = static_cast<std::size_t>(u(rng) * (s - pw));
    const double freq = 0.5 + 1.0 * u(rng);
    const double angle = std::numbers::pi * u(rng);
    const double amp = 0.08 + 0.1 * u(rng);
    const double fx = freq * std::cos(angle);
    const double fy = freq * std::sin(angle);
    for (std::size_t y = top; y < top + ph; ++y) {
      for (std::size_t x = left; x < left + pw; ++x) {
        const double t = amp * std::sin(fx * x + fy * y);
        for (int c = 0; c < 3; ++c) data[(y * size + x) * 3 + c] += t;
      }
    }
  }
  const double cy = s * u(rng);
  const double cx = s * u(rng);
  const double radius = s * (0.1 + 0.15 * u(rng));
  double tint[3];
  for (double& t : tint) t = (u(rng) - 0.5) * 0.5;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      if ((y - cy) * (y - cy) + (x - cx) * (x - cx) < radius * radius) {
        for (int c = 0; c < 3; ++c) data[(y * size + x) * 3 + c] += tint[c];
      }
    }
  }
  ClampUnit(data);
  return ImageTensor(size, size, 3, std::move(data));
}

}  // namespace

ImageTensor ResolveImage(const DatasetRecord& record) {
  if (const auto* img = std::get_if<ImageTensor>(&record.image)) return *img;
  const fs::path& path = std::get<fs::path>(record.image);
  const auto found = FindImage(path);
  if (!found) {
    throw DataError(fmt::format("missing image for '{}' ({})", record.id,
                                path.string()));
  }
  return ReadPnm(*found);
}

ImageTensor ReadPnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  const std::string magic = PnmHeaderToken(in);
  std::size_t channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw DataError(fmt::format("{}: not a binary PPM/PGM file",
                                path.string()));
  }
  const std::string w = PnmHeaderToken(in);
  const std::string h = PnmHeaderToken(in);
  const std::string maxval = PnmHeaderToken(in);
  if (!IsInteger(w) || !IsInteger(h) || maxval != "255") {
    throw DataError(fmt::format("{}: unsupported PNM header", path.string()));
  }
  const std::size_t width = std::stoul(w);
  const std::size_t height = std::stoul(h);
  std::vector<unsigned char> raw(width * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError(fmt::format("{}: truncated pixel data", path.string()));
  }
  std::vector<double> data(raw.size());
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [](unsigned char v) { return v / 255.0; });
  return ImageTensor(height, width, channels, std::move(data));
}

void WritePnm(const ImageTensor& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << (img.channels() == 3 ? "P6" : "P5") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.data().size());
  std::transform(img.data().begin(), img.data().end(), raw.begin(),
                 [](double v) {
                   return static_cast<unsigned char>(
                       std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                 });
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
}

std::vector<DatasetRecord> LoadCountsFile(const fs::path& path,
                                          const LoadOptions& options) {
  std::vector<std::string> storage;
  const auto rows = ReadRows(path, storage);
  const std::size_t n = options.scale.size();
  std::vector<DatasetRecord> out;
  for (const Row& row : rows) {
    ExpectColumns(path, row, n + 1);
    std::vector<double> counts(n);
    for (std::size_t i = 0; i < n; ++i) {
      counts[i] = ParseCount(path, row, row.tokens[i + 1]);
    }
    if (std::accumulate(counts.begin(), counts.end(), 0.0) == 0.0) {
      Fail(path, row.line, row.tokens[1].column, "row has zero total count");
    }
    out.push_back({std::string(row.tokens[0].text), ImageFor(path, row, options),
                   ScoreDistribution::FromCounts(options.scale, counts),
                   SourceTag::kNativeCounts});
  }
  return out;
}

std::vector<DatasetRecord> LoadMosFile(
    const fs::path& path, const LoadOptions& options,
    const std::optional<AffineRescale>& rescale) {
  std::vector<std::string> storage;
  const auto rows = ReadRows(path, storage);
  std::vector<DatasetRecord> out;
  for (const Row& row : rows) {
    ExpectColumns(path, row, 3);
    double mu = ParseReal(path, row, row.tokens[1]);
    double sigma = ParseReal(path, row, row.tokens[2]);
    if (rescale) {
      const double gain =
          (rescale->to_hi - rescale->to_lo) / (rescale->from_hi - rescale->from_lo);
      mu = rescale->to_lo + (mu - rescale->from_lo) * gain;
      sigma *= std::abs(gain);
    }
    try {
      auto fit = FitMaxEnt({mu, sigma, options.scale});
      out.push_back({std::string(row.tokens[0].text),
                     ImageFor(path, row, options), std::move(fit.dist),
                     SourceTag::kMaxEntFitted});
    } catch (const InfeasibleMomentsError& e) {
      throw InfeasibleMomentsError(
          fmt::format("{}:{}: {}", path.string(), row.line, e.what()));
    }
  }
  return out;
}

std::vector<DatasetRecord> LoadDistributionFile(const fs::path& path,
                                                const LoadOptions& options) {
  std::vector<std::string> storage;
  const auto rows = ReadRows(path, storage);
  const std::size_t n = options.scale.size();
  std::vector<DatasetRecord> out;
  for (const Row& row : rows) {
    ExpectColumns(path, row, n + 1);
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) {
      mass[i] = ParseReal(path, row, row.tokens[i + 1]);
    }
    try {
      out.push_back({std::string(row.tokens[0].text),
                     ImageFor(path, row, options),
                     ScoreDistribution(options.scale, std::move(mass)),
                     SourceTag::kNativeCounts});
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      Fail(path, row.line, row.tokens[1].column, e.what());
    }
  }
  return out;
}

std::vector<DatasetRecord> LoadDataset(const fs::path& path, DataFormat format,
                                       const LoadOptions& options) {
  if (format == DataFormat::kAuto) {
    std::vector<std::string> storage;
    const auto rows = ReadRows(path, storage);
    if (rows.empty()) {
      throw DataError(fmt::format("{}: no records", path.string()));
    }
    const auto& tokens = rows.front().tokens;
    if (tokens.size() == 3 && options.scale.size() != 2) {
      format = DataFormat::kMos;
    } else if (std::all_of(tokens.begin() + 1, tokens.end(),
                           [](const Token& t) { return IsInteger(t.text); })) {
      format = DataFormat::kCounts;
    } else {
      format = DataFormat::kDistribution;
    }
  }
  switch (format) {
    case DataFormat::kCounts:
      return LoadCountsFile(path, options);
    case DataFormat::kMos:
      return LoadMosFile(path, options);
    default:
      return LoadDistributionFile(path, options);
  }
}

void WriteDistributionFile(const std::vector<DatasetRecord>& records,
                           const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  for (const auto& r : records) {
    out << r.id;
    for (double m : r.gt.mass()) out << fmt::format(" {:.17g}", m);
    out << "\n";
  }
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> Split(
    const std::vector<DatasetRecord>& records, const SplitSpec& spec) {
  if (records.size() < 2) {
    throw DataError(fmt::format("cannot split {} record(s)", records.size()));
  }
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw UsageError(fmt::format("test fraction must be in (0, 1), got {}",
                                 spec.test_fraction));
  }
  const std::size_t n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto rounded =
      static_cast<std::size_t>(std::llround(n * spec.test_fraction));
  const std::size_t n_test = std::clamp<std::size_t>(rounded, 1, n - 1);
  std::vector<DatasetRecord> train, test;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_test ? test : train).push_back(records[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

double SyntheticLevelMean(int level, int levels) {
  return 8.0 - 6.0 * static_cast<double>(level - 1) / (levels - 1);
}

double SyntheticLevelStd(int level, int levels) {
  return level == 1 || level == levels ? 1.4 : 1.0;
}

std::vector<DatasetRecord> GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.levels < 2) {
    throw UsageError(fmt::format("need at least 2 levels, got {}",
                                 spec.levels));
  }
  if (spec.image_size < 8) {
    throw UsageError("synthetic images must be at least 8 pixels wide");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const BucketScale scale = BucketScale::Ava();
  std::vector<ScoreDistribution> labels;
  for (int level = 1; level <= spec.levels; ++level) {
    labels.push_back(FitMaxEnt({SyntheticLevelMean(level, spec.levels),
                                SyntheticLevelStd(level, spec.levels), scale})
                         .dist);
  }
  std::vector<DatasetRecord> out;
  for (std::size_t b = 0; b < spec.n_base; ++b) {
    const ImageTensor base = SyntheticBase(spec.image_size, rng);
    const bool noisy = b % 2 == 0;
    for (int level = 1; level <= spec.levels; ++level) {
      const double strength =
          static_cast<double>(level - 1) / (spec.levels - 1);
      ImageTensor img = base;
      if (noisy) {
        std::vector<double> data(img.data().begin(), img.data().end());
        for (double& v : data) v += 0.12 * strength * gauss(rng);
        ClampUnit(data);
        img = ImageTensor(img.height(), img.width(), img.channels(),
                          std::move(data));
      } else {
        img = GaussianBlur(img, 2.5 * strength);
      }
      out.push_back({fmt::format("syn{:04d}_l{}", b, level), std::move(img),
                     labels[level - 1], SourceTag::kSynthetic, level,
                     static_cast<int>(b)});
    }
  }
  return out;
}

void WriteDataset(const std::vector<DatasetRecord>& records,
                  const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream mos(dir / "mos.txt");
  if (!mos) throw DataError(fmt::format("cannot write {}", dir.string()));
  for (const auto& r : records) {
    WritePnm(ResolveImage(r), dir / (r.id + ".ppm"));
    mos << fmt::format("{} {:.6f} {:.6f}\n", r.id, Mean(r.gt), StdDev(r.gt));
  }
  WriteDistributionFile(records, dir / "labels.txt");
}

}  // namespace nima
