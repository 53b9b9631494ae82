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

#include "nima/cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "fmt/format.h"
#include "json.hpp"
#include "nima/data_io.h"
#include "nima/error.h"
#include "nima/maxent.h"
#include "nima/metrics.h"
#include "nima/model.h"

namespace nima::cli {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kSubcommands = {
    "train", "eval", "score", "rank", "fit-dist", "tune", "cross-eval",
    "gen-synth"};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Escape(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
}

// Everything parsed from the command line, shared across subcommands.
struct Options {
  std::string config;
  std::string data;
  std::string model;
  std::string out;
  std::string pred;
  std::uint64_t seed = 0;
  std::string scale = "ava";
  std::string format = "auto";
  std::string split = "all";
  double test_fraction = 0.2;
  double cutoff = kDefaultCutoff;
  std::string loss_trace;
  std::vector<std::string> images;
  std::vector<std::string> pairs;
  std::string rescale;
  // Training.
  TrainConfig train;
  std::string loss = "emd";
  // Tuning.
  std::string image;
  std::string op = "denoise";
  std::string grid;
  std::size_t crops = 50;
  std::size_t crop_size = 224;
  double awgn = 0.0;
  // Synthetic data.
  SyntheticSpec synth;
};

void AddCommon(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "flat key = value config file");
  sub->add_option("--seed", o.seed, "seed for every random choice");
}

void AddData(CLI::App* sub, Options& o, const std::string& default_split) {
  o.split = default_split;
  sub->add_option("--data", o.data, "dataset file");
  sub->add_option("--format", o.format, "dataset format")
      ->check(CLI::IsMember({"auto", "counts", "mos", "distribution"}));
  sub->add_option("--scale", o.scale, "bucket scale")
      ->check(CLI::IsMember({"ava", "tid"}));
  sub->add_option("--split", o.split, "records to use")
      ->check(CLI::IsMember({"all", "train", "test"}));
  sub->add_option("--test-fraction", o.test_fraction, "held-out share")
      ->check(CLI::Range(0.0, 1.0));
}

void AddTraining(CLI::App* sub, Options& o) {
  TrainConfig& t = o.train;
  sub->add_option("--epochs", t.epochs);
  sub->add_option("--batch-size", t.batch_size);
  sub->add_option("--lr-backbone", t.lr_backbone);
  sub->add_option("--lr-head", t.lr_head);
  sub->add_option("--momentum", t.momentum);
  sub->add_option("--dropout", t.dropout_rate);
  sub->add_option("--decay-factor", t.decay_factor);
  sub->add_option("--decay-every", t.decay_every_epochs);
  sub->add_option("--resize", t.resize_to);
  sub->add_option("--crop", t.crop_to);
  sub->add_option("--hflip", t.hflip);
  sub->add_option("--hidden", t.hidden, "hidden layer widths")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->expected(0, 16);
  sub->add_option("--loss", o.loss)->check(CLI::IsMember({"emd", "ce"}));
}

BucketScale ScaleFromName(const std::string& name) {
  return name == "tid" ? BucketScale::Tid() : BucketScale::Ava();
}

DataFormat FormatFromName(const std::string& name) {
  if (name == "counts") return DataFormat::kCounts;
  if (name == "mos") return DataFormat::kMos;
  if (name == "distribution") return DataFormat::kDistribution;
  return DataFormat::kAuto;
}

std::vector<DatasetRecord> LoadSelected(const Options& o,
                                        const std::string& path) {
  if (path.empty()) throw UsageError("--data is required");
  LoadOptions lo;
  lo.scale = ScaleFromName(o.scale);
  auto records = LoadDataset(path, FormatFromName(o.format), lo);
  if (o.split == "all") return records;
  auto [train, test] = Split(records, {o.test_fraction, o.seed});
  return o.split == "train" ? train : test;
}

TrainConfig ResolvedTrainConfig(const Options& o) {
  TrainConfig c = o.train;
  c.seed = o.seed;
  c.loss = o.loss == "ce" ? LossKind::kCrossEntropy : LossKind::kSquaredEmd;
  return c;
}

ModelParams LoadModel(const Options& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  return LoadCheckpoint(o.model).params;
}

// `key = value` lines for every option of the subcommand, in declaration
// order; unset options show their defaults.
struct Echo {
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;

  std::string Header() const {
    std::string out = fmt::format("# nima {}\n", command);
    for (const auto& [k, v] : entries) out += fmt::format("# {} = {}\n", k, v);
    return out;
  }
  ordered_json Json() const {
    ordered_json j = ordered_json::object();
    j["command"] = command;
    for (const auto& [k, v] : entries) j[k] = v;
    return j;
  }
};

Echo MakeEcho(const CLI::App* sub) {
  Echo echo{sub->get_name(), {}};
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    std::string name = opt->get_single_name();
    std::string value;
    if (opt->count() > 0) {
      const auto results = opt->reduced_results();
      for (std::size_t i = 0; i < results.size(); ++i) {
        value += (i ? "," : "") + results[i];
      }
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
        value = value.substr(1, value.size() - 2);
      }
    }
    echo.entries.emplace_back(name, value);
  }
  return echo;
}

std::string DistributionLine(const std::string& id,
                             const ScoreDistribution& d) {
  std::string line = fmt::format("{} {:.6f} {:.6f}", id, Mean(d), StdDev(d));
  for (double m : d.mass()) line += fmt::format(" {:.6f}", m);
  return line + "\n";
}

// Emits `text` to the output stream and, if `path` is set, to a file.
void Emit(std::ostream& out, const std::string& path, const std::string& text) {
  out << text;
  if (!path.empty()) WriteFile(path, text);
}

std::string LossTraceCsv(const Echo& echo, const std::vector<double>& trace) {
  std::string csv = echo.Header() + "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    csv += fmt::format("{},{:.17g}\n", e, trace[e]);
  }
  return csv;
}

int DoTrain(const Options& o, const Echo& echo, std::ostream& out) {
  if (o.out.empty()) throw UsageError("--out is required");
  const auto records = LoadSelected(o, o.data);
  const TrainConfig config = ResolvedTrainConfig(o);
  const TrainResult result = Train(records, config);
  const std::string header = echo.Header();
  SaveCheckpoint(result.params, header, o.out);
  const std::string trace_path =
      o.loss_trace.empty() ? o.out + ".loss.csv" : o.loss_trace;
  WriteFile(trace_path, LossTraceCsv(echo, result.loss_trace));
  out << header;
  out << fmt::format("examples {}\nepochs {}\n", records.size(),
                     result.loss_trace.size());
  if (!result.loss_trace.empty()) {
    out << fmt::format("final_loss {:.6f}\n", result.loss_trace.back());
  }
  out << fmt::format("checkpoint {}\nloss_trace {}\n", o.out, trace_path);
  return 0;
}

std::vector<ScoreDistribution> PredictAll(
    const ModelParams& params, const std::vector<DatasetRecord>& records) {
  std::vector<ScoreDistribution> pred;
  pred.reserve(records.size());
  for (const auto& r : records) pred.push_back(Predict(ResolveImage(r), params));
  return pred;
}

std::string ReportJson(const Echo& echo, const EvalReport& report) {
  // Config first, then the report's own flat keys.
  const std::string body = ToJson(report);
  return "{\"config\": " + echo.Json().dump() + ", " + body.substr(1);
}

int DoEval(const Options& o, const Echo& echo, std::ostream& out) {
  const auto records = LoadSelected(o, o.data);
  std::vector<ScoreDistribution> gt;
  for (const auto& r : records) gt.push_back(r.gt);
  std::vector<ScoreDistribution> pred;
  if (!o.pred.empty()) {
    LoadOptions lo;
    lo.scale = ScaleFromName(o.scale);
    const auto pred_records = LoadDistributionFile(o.pred, lo);
    std::map<std::string, const DatasetRecord*> by_id;
    for (const auto& r : pred_records) by_id[r.id] = &r;
    for (const auto& r : records) {
      const auto it = by_id.find(r.id);
      if (it == by_id.end()) {
        throw DataError(fmt::format("no prediction for '{}' in {}", r.id,
                                    o.pred));
      }
      pred.push_back(it->second->gt);
    }
  } else {
    pred = PredictAll(LoadModel(o), records);
  }
  const EvalReport report = Evaluate(pred, gt, o.cutoff);
  const std::string text = echo.Header() + ToText(report);
  out << text;
  if (!o.out.empty()) {
    WriteFile(o.out + ".txt", text);
    WriteFile(o.out + ".json", ReportJson(echo, report));
  }
  return 0;
}

struct Scored {
  std::string id;
  ScoreDistribution dist;
};

std::vector<Scored> ScoreInputs(const Options& o) {
  const ModelParams params = LoadModel(o);
  std::vector<Scored> scored;
  if (!o.data.empty()) {
    for (const auto& r : LoadSelected(o, o.data)) {
      scored.push_back({r.id, Predict(ResolveImage(r), params)});
    }
  }
  for (const auto& path : o.images) {
    scored.push_back({path, Predict(ReadPnm(path), params)});
  }
  if (scored.empty()) throw UsageError("no images given");
  return scored;
}

int DoScore(const Options& o, const Echo& echo, std::ostream& out) {
  std::string text = echo.Header() + "# id mean std p_1..p_N\n";
  for (const auto& s : ScoreInputs(o)) text += DistributionLine(s.id, s.dist);
  Emit(out, o.out, text);
  return 0;
}

int DoRank(const Options& o, const Echo& echo, std::ostream& out) {
  const auto scored = ScoreInputs(o);
  std::vector<double> means;
  for (const auto& s : scored) means.push_back(Mean(s.dist));
  std::string text = echo.Header() + "# rank id mean std\n";
  std::size_t rank = 1;
  for (std::size_t i : RankDescending(means)) {
    text += fmt::format("{} {} {:.6f} {:.6f}\n", rank++, scored[i].id,
                        means[i], StdDev(scored[i].dist));
  }
  Emit(out, o.out, text);
  return 0;
}

int DoFitDist(const Options& o, const Echo& echo, std::ostream& out) {
  if (o.data.empty()) throw UsageError("--data is required");
  LoadOptions lo;
  lo.scale = ScaleFromName(o.scale);
  std::optional<AffineRescale> rescale;
  if (!o.rescale.empty()) {
    double lo_v = 0.0;
    double hi_v = 0.0;
    char comma = 0;
    std::istringstream in(o.rescale);
    if (!(in >> lo_v >> comma >> hi_v) || comma != ',' || !(lo_v < hi_v)) {
      throw UsageError(fmt::format(
          "--rescale expects 'lo,hi' with lo < hi, got '{}'", o.rescale));
    }
    rescale = AffineRescale{lo_v, hi_v, lo.scale.front(), lo.scale.back()};
  }
  const auto records = LoadMosFile(o.data, lo, rescale);
  std::string text = echo.Header() + "# id mean std p_1..p_N\n";
  for (const auto& r : records) text += DistributionLine(r.id, r.gt);
  out << text;
  if (!o.out.empty()) WriteDistributionFile(records, o.out);
  return 0;
}

int DoTune(const Options& o, const Echo& echo, std::ostream& out) {
  if (o.image.empty()) throw UsageError("--image is required");
  OperatorGrid base = o.op == "tone" ? DefaultToneGrid() : DefaultDenoiseGrid();
  const OperatorGrid grid = o.grid.empty() ? base : ParseGridSpec(o.grid, base);
  const ModelParams params = LoadModel(o);
  ImageTensor img = ReadPnm(o.image);
  if (o.awgn > 0.0) img = AddAwgn(img, o.awgn, o.seed);
  const TuneProtocol protocol{o.crops, o.crop_size, o.seed};
  const TuneResult result = Tune(img, grid, protocol, ModelScorer(params));
  const std::string text = echo.Header() + ToText(grid, result);
  out << text;
  if (!o.out.empty()) {
    WriteFile(o.out + ".txt", text);
    ordered_json doc;
    doc["config"] = echo.Json();
    const ordered_json body = ordered_json::parse(ToJson(grid, result));
    for (const auto& [k, v] : body.items()) doc[k] = v;
    WriteFile(o.out + ".json", doc.dump(2) + "\n");
  }
  return 0;
}

int DoCrossEval(const Options& o, const Echo& echo, std::ostream& out) {
  if (o.pairs.empty()) throw UsageError("--pair TRAIN:TEST is required");
  std::vector<std::string> trains;
  std::vector<std::string> tests;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  const auto index_of = [](std::vector<std::string>& v, const std::string& s) {
    const auto it = std::find(v.begin(), v.end(), s);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(s);
    return v.size() - 1;
  };
  for (const auto& pair : o.pairs) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size()) {
      throw UsageError(fmt::format("--pair expects TRAIN:TEST, got '{}'", pair));
    }
    cells.emplace_back(index_of(trains, pair.substr(0, colon)),
                       index_of(tests, pair.substr(colon + 1)));
  }
  const std::size_t rows = trains.size();
  const std::size_t cols = tests.size();
  std::vector<std::vector<std::optional<double>>> lcc(
      rows, std::vector<std::optional<double>>(cols));
  auto srcc = lcc;
  const TrainConfig config = ResolvedTrainConfig(o);
  std::vector<std::optional<ModelParams>> models(rows);
  std::vector<std::optional<std::vector<DatasetRecord>>> test_sets(cols);
  for (const auto& [r, c] : cells) {
    if (!models[r]) models[r] = Train(LoadSelected(o, trains[r]), config).params;
    if (!test_sets[c]) test_sets[c] = LoadSelected(o, tests[c]);
    std::vector<ScoreDistribution> gt;
    for (const auto& rec : *test_sets[c]) gt.push_back(rec.gt);
    const auto pred = PredictAll(*models[r], *test_sets[c]);
    const EvalReport report = Evaluate(pred, gt, o.cutoff);
    lcc[r][c] = report.lcc_mean;
    srcc[r][c] = report.srcc_mean;
  }

  std::string text = echo.Header();
  for (std::size_t c = 0; c < cols; ++c) {
    text += fmt::format("# test[{}] = {}\n", c, tests[c]);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    text += fmt::format("# train[{}] = {}\n", r, trains[r]);
  }
  const auto table = [&](const std::string& name, const auto& m) {
    std::string t = name;
    for (std::size_t c = 0; c < cols; ++c) t += fmt::format(" test[{}]", c);
    t += "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      t += fmt::format("train[{}]", r);
      for (std::size_t c = 0; c < cols; ++c) {
        t += m[r][c] ? fmt::format(" {:.6f}", *m[r][c]) : std::string(" -");
      }
      t += "\n";
    }
    return t;
  };
  text += table("lcc", lcc) + table("srcc", srcc);
  out << text;
  if (!o.out.empty()) {
    WriteFile(o.out + ".txt", text);
    const auto matrix = [](const auto& m) {
      ordered_json j = ordered_json::array();
      for (const auto& row : m) {
        ordered_json jr = ordered_json::array();
        for (const auto& v : row) jr.push_back(v ? ordered_json(*v) : nullptr);
        j.push_back(jr);
      }
      return j;
    };
    ordered_json doc;
    doc["config"] = echo.Json();
    doc["train_sets"] = trains;
    doc["test_sets"] = tests;
    doc["lcc"] = matrix(lcc);
    doc["srcc"] = matrix(srcc);
    WriteFile(o.out + ".json", doc.dump(2) + "\n");
  }
  return 0;
}

int DoGenSynth(const Options& o, const Echo& echo, std::ostream& out) {
  if (o.out.empty()) throw UsageError("--out is required");
  SyntheticSpec spec = o.synth;
  spec.seed = o.seed;
  const auto records = GenerateSynthetic(spec);
  WriteDataset(records, o.out);
  out << echo.Header();
  out << fmt::format("records {}\nlabels {}\nmos {}\n", records.size(),
                     (std::filesystem::path(o.out) / "labels.txt").string(),
                     (std::filesystem::path(o.out) / "mos.txt").string());
  return 0;
}

// Inserts config-file entries as `--key=value` right after the subcommand
// name so that later command-line flags take precedence.
std::vector<std::string> InjectConfig(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::size_t at = 0;
  while (at < args.size() &&
         std::find(kSubcommands.begin(), kSubcommands.end(), args[at]) ==
             kSubcommands.end()) {
    ++at;
  }
  if (at == args.size()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : ReadConfigFile(path)) {
    if (key == "config") throw UsageError("config files cannot nest");
    injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + at + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + at + 1, args.end());
  return out;
}

int ExitCode(ErrorCategory category) { return static_cast<int>(category); }

int Fail(std::ostream& err, ErrorCategory category, const std::string& what) {
  err << fmt::format("error: category={} detail=\"{}\"\n",
                     CategoryName(category), Escape(what));
  return ExitCode(category);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config {}", path));
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    std::string key = eq == std::string::npos ? "" : Trim(line.substr(0, eq));
    if (key.empty()) {
      throw UsageError(
          fmt::format("{}:{}: expected 'key = value'", path, n));
    }
    std::string value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    entries.emplace_back(key, value);
  }
  return entries;
}

OperatorGrid ParseGridSpec(const std::string& spec, const OperatorGrid& base) {
  std::vector<GridAxis> axes = base.axes();
  std::stringstream all(spec);
  std::string part;
  while (std::getline(all, part, ';')) {
    part = Trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("grid axis '{}' lacks '='", part));
    }
    const std::string name = Trim(part.substr(0, eq));
    const std::string body = Trim(part.substr(eq + 1));
    const auto axis = std::find_if(axes.begin(), axes.end(),
                                   [&](const GridAxis& a) { return a.name == name; });
    if (axis == axes.end()) {
      throw UsageError(fmt::format("operator '{}' has no parameter '{}'",
                                   base.name(), name));
    }
    const auto number = [&](const std::string& s) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw UsageError(fmt::format("bad grid value '{}' for '{}'", s, name));
      }
      return v;
    };
    std::vector<double> values;
    if (body.find(':') != std::string::npos) {
      std::stringstream range(body);
      std::vector<double> f;
      for (std::string tok; std::getline(range, tok, ':');) {
        f.push_back(number(Trim(tok)));
      }
      if (f.size() != 3 || !(f[1] > 0.0) || f[2] < f[0]) {
        throw UsageError(fmt::format(
            "grid range for '{}' must be start:step:stop with step > 0",
            name));
      }
      const auto count =
          static_cast<std::size_t>(std::floor((f[2] - f[0]) / f[1] + 1e-9)) + 1;
      for (std::size_t i = 0; i < count; ++i) values.push_back(f[0] + f[1] * i);
    } else {
      std::stringstream list(body);
      for (std::string tok; std::getline(list, tok, ',');) {
        values.push_back(number(Trim(tok)));
      }
    }
    axis->values = std::move(values);
  }
  return OperatorGrid(base.name(), std::move(axes));
}

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  Options o;
  CLI::App app{"NIMA-style image quality toolkit", "nima"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train a model on a dataset");
  AddCommon(train, o);
  AddData(train, o, "train");
  AddTraining(train, o);
  train->add_option("--out", o.out, "checkpoint path");
  train->add_option("--loss-trace", o.loss_trace,
                    "loss CSV path (default <out>.loss.csv)");

  auto* eval = app.add_subcommand("eval", "evaluate predictions");
  AddCommon(eval, o);
  AddData(eval, o, "test");
  eval->add_option("--model", o.model, "checkpoint");
  eval->add_option("--pred", o.pred, "predicted distribution file");
  eval->add_option("--cutoff", o.cutoff, "two-class score cutoff");
  eval->add_option("--out", o.out, "report prefix (.txt and .json)");

  auto* score = app.add_subcommand("score", "predict score distributions");
  auto* rank = app.add_subcommand("rank", "rank images by predicted mean");
  for (auto* sub : {score, rank}) {
    AddCommon(sub, o);
    AddData(sub, o, "all");
    sub->add_option("--model", o.model, "checkpoint");
    sub->add_option("--out", o.out, "output file");
    sub->add_option("images", o.images, "PPM/PGM images")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }

  auto* fit = app.add_subcommand("fit-dist", "fit distributions to moments");
  AddCommon(fit, o);
  fit->add_option("--data", o.data, "`<id> <mean> <std>` file");
  fit->add_option("--scale", o.scale)->check(CLI::IsMember({"ava", "tid"}));
  fit->add_option("--rescale", o.rescale,
                  "lo,hi source score range mapped onto the scale");
  fit->add_option("--out", o.out, "distribution file");

  auto* tune = app.add_subcommand("tune", "grid-search an enhancement");
  AddCommon(tune, o);
  tune->add_option("--model", o.model, "checkpoint");
  tune->add_option("--image", o.image, "input image");
  tune->add_option("--op", o.op)->check(CLI::IsMember({"denoise", "tone"}));
  tune->add_option("--grid", o.grid, "axis=v1,v2;axis=start:step:stop");
  tune->add_option("--crops", o.crops)->check(CLI::PositiveNumber);
  tune->add_option("--crop-size", o.crop_size)->check(CLI::PositiveNumber);
  tune->add_option("--awgn", o.awgn, "noise std (8-bit units) added first")
      ->check(CLI::NonNegativeNumber);
  tune->add_option("--out", o.out, "report prefix (.txt and .json)");

  auto* cross = app.add_subcommand("cross-eval", "train/test correlation grid");
  AddCommon(cross, o);
  AddData(cross, o, "all");
  AddTraining(cross, o);
  cross->add_option("--pair", o.pairs, "TRAIN:TEST dataset files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cross->add_option("--cutoff", o.cutoff);
  cross->add_option("--out", o.out, "report prefix (.txt and .json)");

  auto* synth = app.add_subcommand("gen-synth", "write a synthetic dataset");
  AddCommon(synth, o);
  synth->add_option("--n-base", o.synth.n_base)->check(CLI::PositiveNumber);
  synth->add_option("--levels", o.synth.levels)->check(CLI::Range(2, 1000));
  synth->add_option("--image-size", o.synth.image_size)
      ->check(CLI::Range(8, 4096));
  synth->add_option("--out", o.out, "output directory");

  try {
    args = InjectConfig(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return Fail(err, ErrorCategory::kUsage, e.what());
  } catch (const Error& e) {
    return Fail(err, e.category(), e.what());
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    // Subcommands share `o`, so an unset --split takes this subcommand's
    // default rather than whichever was registered last.
    if (const CLI::Option* split = sub->get_option_no_throw("--split");
        split != nullptr && split->count() == 0) {
      o.split = split->get_default_str();
    }
    const Echo echo = MakeEcho(sub);
    const std::string name = sub->get_name();
    if (name == "train") return DoTrain(o, echo, out);
    if (name == "eval") return DoEval(o, echo, out);
    if (name == "score") return DoScore(o, echo, out);
    if (name == "rank") return DoRank(o, echo, out);
    if (name == "fit-dist") return DoFitDist(o, echo, out);
    if (name == "tune") return DoTune(o, echo, out);
    if (name == "cross-eval") return DoCrossEval(o, echo, out);
    return DoGenSynth(o, echo, out);
  } catch (const Error& e) {
    return Fail(err, e.category(), e.what());
  } catch (const std::exception& e) {
    return Fail(err, ErrorCategory::kData, e.what());
  }
}

}  // namespace nima::cli
