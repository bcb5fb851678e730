// Copyright 2026 The sscd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Stage-oriented command-line frontend: synth, train, infer, threshold, eval
// and pipeline. Talks to the library exclusively through the C interface.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sscd/sscd.h"

namespace fs = std::filesystem;

namespace {

// Raised for invalid arguments or configuration values (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a library call or stage contract fails (exit code 1).
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(int status) {
  if (status != SSCD_OK) throw StageError(sscd_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using RasterPtr = std::unique_ptr<sscd_raster, Deleter<sscd_raster, sscd_raster_free>>;
using ArchivePtr = std::unique_ptr<sscd_archive, Deleter<sscd_archive, sscd_archive_free>>;
using CheckpointPtr = std::unique_ptr<sscd_checkpoint, Deleter<sscd_checkpoint, sscd_checkpoint_free>>;
using MapPtr = std::unique_ptr<sscd_map, Deleter<sscd_map, sscd_map_free>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Configuration

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d = {
      {"mode", "homogeneous"},
      {"scales", ""},  // empty: 8,16,24 homogeneous, 8,16 heterogeneous
      {"replicates", "1"},
      {"seed", "0"},
      {"out", "sscd_out"},
      {"archive", ""},  // empty: <out>/archive, generated by the synth stage
      {"encoder", "desk"},
      {"batch_size", "64"},
      {"steps", "500"},
      {"learning_rate", "0.001"},
      {"temperature", "0.1"},
      {"beta", "0.5"},
      {"ema_tau", "0.99"},
      {"patches_per_image", "32"},
      {"modality", "pseudo_optical"},
      {"modality_b", "pseudo_sar"},
      {"stride", "1"},
      {"infer_batch", "256"},
      {"threshold_method", "auto"},
      {"bins", "256"},
      {"synth_scenes", "4"},
      {"synth_dates", "8"},
      {"synth_size", "64"},
      {"synth_objects", "2"},
      {"synth_min_size", "6"},
      {"synth_max_size", "12"},
      {"synth_magnitude", "2.0"},
      {"synth_shape", "square"},
  };
  return d;
}

class Config {
 public:
  Config() : values_(config_defaults()) {}

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw UsageError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(path + ":" + std::to_string(n) + ": expected 'key = value'");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  std::string str(const std::string& key) const { return values_.at(key); }

  long long integer(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("config key '" + key + "' expects an integer, got '" + v + "'");
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      if (!v.empty() && v[0] != '-') {
        const unsigned long long x = std::stoull(v, &pos);
        if (pos == v.size()) return x;
      }
    } catch (const std::exception&) {
    }
    throw UsageError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }

  double real(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  }

  bool heterogeneous() const {
    const std::string m = str("mode");
    if (m == "homogeneous") return false;
    if (m == "heterogeneous") return true;
    throw UsageError("mode must be homogeneous or heterogeneous, got '" + m + "'");
  }

  std::vector<int> scales() const {
    std::string text = str("scales");
    if (trim(text).empty()) return heterogeneous() ? std::vector<int>{8, 16} : std::vector<int>{8, 16, 24};
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t pos = 0;
        const int p = std::stoi(item, &pos);
        if (pos != item.size() || p < 4 || p % 2 != 0) throw std::invalid_argument(item);
        out.push_back(p);
      } catch (const std::exception&) {
        throw UsageError("scales must be even integers >= 4, got '" + item + "'");
      }
    }
    if (out.empty()) throw UsageError("scales list is empty");
    return out;
  }

  fs::path out_dir() const { return str("out"); }

  fs::path archive_dir() const {
    const std::string a = trim(str("archive"));
    return a.empty() ? out_dir() / "archive" : fs::path(a);
  }

  bool archive_is_generated() const { return trim(str("archive")).empty(); }

  std::string modality1() const { return str("modality"); }
  std::string modality2() const { return heterogeneous() ? str("modality_b") : str("modality"); }

 private:
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Artifact layout

fs::path checkpoint_path(const Config& c, int scale, int replicate) {
  return c.out_dir() / "models" / ("p" + std::to_string(scale) + "_r" + std::to_string(replicate) + ".ssck");
}

fs::path loss_log_path(const Config& c, int scale, int replicate) {
  return c.out_dir() / "models" / ("p" + std::to_string(scale) + "_r" + std::to_string(replicate) + ".loss.tsv");
}

fs::path scale_map_path(const Config& c, const std::string& scene, int scale) {
  return c.out_dir() / "maps" / ("scene_" + scene) / ("scale_" + std::to_string(scale) + ".rsrb");
}

fs::path fused_map_path(const Config& c, const std::string& scene) {
  return c.out_dir() / "maps" / ("scene_" + scene) / "fused.rsrb";
}

fs::path mask_path(const Config& c, const std::string& scene) {
  return c.out_dir() / "masks" / ("scene_" + scene + ".rsrb");
}

fs::path scene_metrics_path(const Config& c, const std::string& scene) {
  return c.out_dir() / "metrics" / ("scene_" + scene + ".json");
}

fs::path metrics_path(const Config& c) { return c.out_dir() / "metrics.json"; }

void report(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

int replicates(const Config& c) {
  const long long e = c.integer("replicates");
  if (e < 1 || e > 64) throw UsageError("replicates must lie in [1,64]");
  return static_cast<int>(e);
}

std::uint64_t model_seed(const Config& c, int scale, int replicate) {
  return sscd_mix_seed(c.unsigned_integer("seed"), (static_cast<std::uint64_t>(scale) << 16) |
                                                       static_cast<std::uint64_t>(replicate));
}

struct TestPair {
  std::string scene;
  RasterPtr image1, image2, gt;
};

std::vector<TestPair> load_test_pairs(const sscd_archive* archive, const Config& c) {
  const std::string m1 = c.modality1(), m2 = c.modality2();
  int count = 0;
  check(sscd_archive_test_pair_count(archive, m1.c_str(), m2.c_str(), &count));
  if (count == 0) throw StageError("archive has no held-out test pairs for " + m1 + "/" + m2);
  std::vector<TestPair> out;
  for (int i = 0; i < count; ++i) {
    char id[256];
    sscd_raster *a = nullptr, *b = nullptr, *g = nullptr;
    check(sscd_archive_test_pair(archive, m1.c_str(), m2.c_str(), i, id, sizeof id, nullptr, nullptr, &a, &b, &g));
    out.push_back({id, RasterPtr(a), RasterPtr(b), RasterPtr(g)});
  }
  return out;
}

ArchivePtr open_archive(const Config& c) {
  sscd_archive* a = nullptr;
  check(sscd_archive_open(c.archive_dir().string().c_str(), &a));
  return ArchivePtr(a);
}

// ---------------------------------------------------------------------------
// Stages

void cmd_synth(const Config& c) {
  sscd_synth_params p;
  sscd_synth_params_default(&p);
  p.seed = c.unsigned_integer("seed");
  p.n_scenes = static_cast<int>(c.integer("synth_scenes"));
  p.n_dates = static_cast<int>(c.integer("synth_dates"));
  p.size = static_cast<int>(c.integer("synth_size"));
  const std::string mods = c.heterogeneous() ? c.modality1() + "," + c.modality2() : c.modality1();
  p.modalities = mods.c_str();
  p.n_objects = static_cast<int>(c.integer("synth_objects"));
  p.min_size = static_cast<int>(c.integer("synth_min_size"));
  p.max_size = static_cast<int>(c.integer("synth_max_size"));
  p.magnitude = c.real("synth_magnitude");
  const std::string shape = c.str("synth_shape");
  if (shape != "square" && shape != "rect") throw UsageError("synth_shape must be square or rect");
  p.shape = shape == "rect" ? SSCD_SHAPE_RECT : SSCD_SHAPE_SQUARE;
  const fs::path dir = c.archive_dir();
  check(sscd_synth_archive(&p, dir.string().c_str()));
  report(dir / "manifest.txt");
}

void cmd_train(const Config& c) {
  const ArchivePtr archive = open_archive(c);
  sscd_train_params p;
  sscd_train_params_default(&p);
  p.mode = c.heterogeneous() ? SSCD_MODE_HETEROGENEOUS : SSCD_MODE_HOMOGENEOUS;
  p.batch_size = static_cast<int>(c.integer("batch_size"));
  p.steps = static_cast<int>(c.integer("steps"));
  p.learning_rate = c.real("learning_rate");
  p.temperature = c.real("temperature");
  p.beta = c.real("beta");
  p.ema_tau = c.real("ema_tau");
  p.patches_per_image = static_cast<int>(c.integer("patches_per_image"));
  const std::string m1 = c.modality1(), m2 = c.str("modality_b");
  p.modality = m1.c_str();
  p.modality_b = m2.c_str();
  const std::string enc = c.str("encoder");
  if (enc == "desk") {
    p.encoder_preset = SSCD_ENCODER_DESK;
  } else if (enc == "resnet34_small_input") {
    p.encoder_preset = SSCD_ENCODER_RESNET34_SMALL_INPUT;
  } else {
    throw UsageError("encoder must be desk or resnet34_small_input, got '" + enc + "'");
  }

  const int reps = replicates(c);
  for (int scale : c.scales()) {
    for (int r = 0; r < reps; ++r) {
      p.patch_side = scale;
      p.seed = model_seed(c, scale, r);
      const fs::path log = loss_log_path(c, scale, r);
      const fs::path ckpt = checkpoint_path(c, scale, r);
      sscd_checkpoint* out = nullptr;
      check(sscd_train(archive.get(), &p, log.string().c_str(), &out));
      const CheckpointPtr owned(out);
      check(sscd_checkpoint_save(owned.get(), ckpt.string().c_str()));
      report(log);
      report(ckpt);
    }
  }
}

void cmd_infer(const Config& c) {
  const ArchivePtr archive = open_archive(c);
  const std::vector<TestPair> pairs = load_test_pairs(archive.get(), c);
  const int stride = static_cast<int>(c.integer("stride"));
  const int batch = static_cast<int>(c.integer("infer_batch"));
  const int reps = replicates(c);

  std::vector<std::vector<CheckpointPtr>> models;
  for (int scale : c.scales()) {
    auto& ensemble = models.emplace_back();
    for (int r = 0; r < reps; ++r) {
      const fs::path path = checkpoint_path(c, scale, r);
      if (!fs::exists(path)) throw StageError("missing checkpoint " + path.string());
      sscd_checkpoint* ck = nullptr;
      check(sscd_checkpoint_load(path.string().c_str(), &ck));
      ensemble.emplace_back(ck);
    }
  }

  const std::vector<int> scales = c.scales();
  for (const auto& pair : pairs) {
    std::vector<MapPtr> standardized;
    for (std::size_t s = 0; s < scales.size(); ++s) {
      std::vector<const sscd_checkpoint*> members;
      for (const auto& m : models[s]) members.push_back(m.get());
      sscd_map* raw = nullptr;
      check(sscd_map_compute(members.data(), members.size(), pair.image1.get(), pair.image2.get(), stride, batch, &raw));
      const MapPtr raw_owned(raw);
      sscd_map* st = nullptr;
      check(sscd_map_standardize(raw_owned.get(), &st));
      standardized.emplace_back(st);
      const fs::path path = scale_map_path(c, pair.scene, scales[s]);
      check(sscd_map_save(st, path.string().c_str()));
      report(path);
    }
    std::vector<const sscd_map*> inputs;
    for (const auto& m : standardized) inputs.push_back(m.get());
    sscd_map* fused = nullptr;
    check(sscd_map_fuse(inputs.data(), inputs.size(), &fused));
    const MapPtr fused_owned(fused);
    const fs::path path = fused_map_path(c, pair.scene);
    check(sscd_map_save(fused, path.string().c_str()));
    report(path);
  }
}

int threshold_strategy(const Config& c) {
  const std::string m = c.str("threshold_method");
  if (m == "auto") return SSCD_THRESHOLD_AUTO;
  if (m == "min") return SSCD_THRESHOLD_MIN;
  if (m == "rosin") return SSCD_THRESHOLD_ROSIN;
  throw UsageError("threshold_method must be auto, min or rosin, got '" + m + "'");
}

void cmd_threshold(const Config& c) {
  const ArchivePtr archive = open_archive(c);
  const std::vector<TestPair> pairs = load_test_pairs(archive.get(), c);
  const int strategy = threshold_strategy(c);
  const int bins = static_cast<int>(c.integer("bins"));
  for (const auto& pair : pairs) {
    const fs::path in = fused_map_path(c, pair.scene);
    if (!fs::exists(in)) throw StageError("missing fused map " + in.string());
    sscd_map* map = nullptr;
    check(sscd_map_load(in.string().c_str(), &map));
    const MapPtr owned(map);
    sscd_threshold_decision d;
    check(sscd_threshold_decide(map, strategy, bins, &d));
    sscd_raster* mask = nullptr;
    check(sscd_binarize(map, d.chosen, &mask));
    const RasterPtr mask_owned(mask);
    const fs::path out = mask_path(c, pair.scene);
    check(sscd_mask_save(mask, map, &d, out.string().c_str()));
    std::printf("scene %s threshold %.6g (%s)\n", pair.scene.c_str(), d.chosen,
                d.method == SSCD_METHOD_ROSIN ? "rosin" : "opposite_min");
    report(out);
  }
}

void cmd_eval(const Config& c) {
  const ArchivePtr archive = open_archive(c);
  const std::vector<TestPair> pairs = load_test_pairs(archive.get(), c);
  sscd_confusion total{0, 0, 0, 0};
  for (const auto& pair : pairs) {
    const fs::path in = mask_path(c, pair.scene);
    if (!fs::exists(in)) throw StageError("missing mask " + in.string());
    sscd_raster* mask = nullptr;
    check(sscd_raster_read(in.string().c_str(), &mask));
    const RasterPtr owned(mask);
    sscd_confusion cc;
    check(sscd_confusion_counts(mask, pair.gt.get(), &cc));
    sscd_metrics m;
    check(sscd_compute_metrics(&cc, &m));
    const fs::path out = scene_metrics_path(c, pair.scene);
    check(sscd_metrics_write_json(&m, &cc, out.string().c_str()));
    report(out);
    total.tp += cc.tp;
    total.fp += cc.fp;
    total.fn += cc.fn;
    total.tn += cc.tn;
  }
  sscd_metrics m;
  check(sscd_compute_metrics(&total, &m));
  const fs::path out = metrics_path(c);
  check(sscd_metrics_write_json(&m, &total, out.string().c_str()));
  std::printf("pre %.4f rec %.4f oa %.4f f1 %.4f kappa %.4f\n", m.pre, m.rec, m.oa, m.f1, m.kappa);
  report(out);
}

void cmd_pipeline(const Config& c, const std::function<void(const char*, void (*)(const Config&))>& run) {
  if (c.archive_is_generated()) run("synth", cmd_synth);
  run("train", cmd_train);
  run("infer", cmd_infer);
  run("threshold", cmd_threshold);
  run("eval", cmd_eval);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised multi-scale change detection"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed, out, mode, steps, scales, archive, threshold_method;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "Generate a synthetic multi-date archive"},
      {"train", "Train one model per (scale, replicate)"},
      {"infer", "Compute per-scale and fused change intensity maps"},
      {"threshold", "Binarize fused maps into change masks"},
      {"eval", "Score masks against the ground truth"},
      {"pipeline", "Run every stage in sequence"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "Plain-text 'key = value' config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--set", overrides, "Override a config key (key=value); repeatable");
    sub->add_option("--mode", mode, "homogeneous or heterogeneous");
    sub->add_option("--steps", steps, "Optimizer steps per model");
    sub->add_option("--scales", scales, "Comma-separated patch sides");
    sub->add_option("--archive", archive, "Existing archive directory");
    sub->add_option("--threshold-method", threshold_method, "auto, min or rosin");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Config config;
  try {
    if (!config_file.empty()) config.load_file(config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      config.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    const std::pair<const char*, const std::string*> flags[] = {
        {"seed", &seed},   {"out", &out},         {"mode", &mode},
        {"steps", &steps}, {"scales", &scales},   {"archive", &archive},
        {"threshold_method", &threshold_method},
    };
    for (const auto& [key, value] : flags)
      if (!value->empty()) config.set(key, *value);
    // Validate everything that is parsed lazily so bad values exit with 2.
    config.heterogeneous();
    config.scales();
    config.unsigned_integer("seed");
    replicates(config);
    threshold_strategy(config);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << one_line(e.what()) << "\n";
    return 2;
  }

  std::string stage = command;
  try {
    auto run = [&](const char* name, void (*fn)(const Config&)) {
      stage = name;
      fn(config);
    };
    if (command == "synth") run("synth", cmd_synth);
    if (command == "train") run("train", cmd_train);
    if (command == "infer") run("infer", cmd_infer);
    if (command == "threshold") run("threshold", cmd_threshold);
    if (command == "eval") run("eval", cmd_eval);
    if (command == "pipeline") cmd_pipeline(config, run);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR " << stage << " " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
