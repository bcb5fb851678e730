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

#include "sscd/sscd.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sscd/archive.hpp"
#include "sscd/change_map.hpp"
#include "sscd/encoder.hpp"
#include "sscd/error.hpp"
#include "sscd/metrics.hpp"
#include "sscd/raster.hpp"
#include "sscd/rng.hpp"
#include "sscd/synthgen.hpp"
#include "sscd/threshold.hpp"
#include "sscd/trainer.hpp"

struct sscd_raster {
  sscd::Raster value;
};
struct sscd_archive {
  sscd::Archive value;
};
struct sscd_checkpoint {
  sscd::ModelCheckpoint value;
};
struct sscd_map {
  sscd::IntensityMap value;
};

namespace {

thread_local std::string g_last_error;

struct BadArgument : std::exception {
  std::string message;
  explicit BadArgument(std::string m) : message(std::move(m)) {}
};

void need(const void* p, const char* name) {
  if (p == nullptr) throw BadArgument(std::string(name) + " must not be NULL");
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SSCD_OK;
  } catch (const sscd::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.kind());
  } catch (const BadArgument& e) {
    g_last_error = e.message;
    return SSCD_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SSCD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SSCD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SSCD_ERR_INTERNAL;
  }
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  std::stringstream ss(text ? text : "");
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

sscd::ThresholdStrategy to_strategy(int s) {
  switch (s) {
    case SSCD_THRESHOLD_AUTO: return sscd::ThresholdStrategy::Auto;
    case SSCD_THRESHOLD_MIN: return sscd::ThresholdStrategy::Min;
    case SSCD_THRESHOLD_ROSIN: return sscd::ThresholdStrategy::Rosin;
    default: throw BadArgument("unknown threshold strategy " + std::to_string(s));
  }
}

sscd::ThresholdDecision to_decision(const sscd_threshold_decision& d) {
  sscd::ThresholdDecision out;
  out.t_min = d.t_min;
  out.t_rosin = d.t_rosin;
  out.chosen = d.chosen;
  out.method = d.method == SSCD_METHOD_ROSIN ? sscd::ThresholdMethod::Rosin : sscd::ThresholdMethod::OppositeMin;
  return out;
}

template <typename Handle, typename T>
void emit(Handle** out, T&& value) {
  *out = new Handle{std::forward<T>(value)};
}

}  // namespace

extern "C" {

const char* sscd_version(void) { return "1.0.0"; }

const char* sscd_last_error(void) { return g_last_error.c_str(); }

const char* sscd_status_name(int status) {
  if (status == SSCD_OK) return "ok";
  if (status == SSCD_ERR_INVALID_ARGUMENT) return "invalid_argument";
  if (status >= SSCD_ERR_FORMAT && status <= SSCD_ERR_NUMERIC)
    return sscd::to_string(static_cast<sscd::ErrorKind>(status)).data();
  return "internal";
}

uint64_t sscd_mix_seed(uint64_t seed, uint64_t tag) { return sscd::mix_seed(seed, tag); }

int sscd_raster_read(const char* path, sscd_raster** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, sscd::read_raster(path));
  });
}

int sscd_raster_write(const sscd_raster* raster, const char* path) {
  return guarded([&] {
    need(raster, "raster");
    need(path, "path");
    sscd::write_raster(raster->value, path);
  });
}

int sscd_raster_create_f32(int width, int height, int bands, const float* data, sscd_raster** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(bands);
    emit(out, sscd::Raster::from_f32(width, height, bands, std::vector<float>(data, data + n)));
  });
}

int sscd_raster_create_u8(int width, int height, int bands, const uint8_t* data, sscd_raster** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(bands);
    emit(out, sscd::Raster::from_u8(width, height, bands, std::vector<std::uint8_t>(data, data + n)));
  });
}

int sscd_raster_info(const sscd_raster* raster, int* width, int* height, int* bands, int* dtype) {
  return guarded([&] {
    need(raster, "raster");
    if (width) *width = raster->value.width();
    if (height) *height = raster->value.height();
    if (bands) *bands = raster->value.bands();
    if (dtype) *dtype = static_cast<int>(raster->value.dtype());
  });
}

const float* sscd_raster_data_f32(const sscd_raster* raster) {
  if (!raster || raster->value.dtype() != sscd::DType::Float32) return nullptr;
  return raster->value.f32().data();
}

const uint8_t* sscd_raster_data_u8(const sscd_raster* raster) {
  if (!raster || raster->value.dtype() != sscd::DType::UInt8) return nullptr;
  return raster->value.u8().data();
}

void sscd_raster_free(sscd_raster* raster) { delete raster; }

void sscd_synth_params_default(sscd_synth_params* params) {
  if (!params) return;
  const sscd::SynthParams d;
  params->seed = d.seed;
  params->n_scenes = d.n_scenes;
  params->n_dates = d.n_dates;
  params->size = d.size;
  params->modalities = "pseudo_optical";
  params->n_objects = d.change.n_objects;
  params->min_size = d.change.min_size;
  params->max_size = d.change.max_size;
  params->magnitude = d.change.magnitude;
  params->shape = SSCD_SHAPE_SQUARE;
}

int sscd_synth_archive(const sscd_synth_params* params, const char* dir) {
  return guarded([&] {
    need(params, "params");
    need(dir, "dir");
    sscd::SynthParams p;
    p.seed = params->seed;
    p.n_scenes = params->n_scenes;
    p.n_dates = params->n_dates;
    p.size = params->size;
    p.modalities = split_list(params->modalities);
    p.change.n_objects = params->n_objects;
    p.change.min_size = params->min_size;
    p.change.max_size = params->max_size;
    p.change.magnitude = params->magnitude;
    p.change.shape = params->shape == SSCD_SHAPE_RECT ? sscd::ChangeShape::Rect : sscd::ChangeShape::Square;
    sscd::write_archive(sscd::generate_archive(p).archive, dir);
  });
}

int sscd_archive_open(const char* dir, sscd_archive** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    sscd::Archive a = sscd::read_archive(dir);
    a.validate();
    emit(out, std::move(a));
  });
}

int sscd_archive_test_pair_count(const sscd_archive* archive, const char* modality1, const char* modality2,
                                 int* count) {
  return guarded([&] {
    need(archive, "archive");
    need(modality1, "modality1");
    need(modality2, "modality2");
    need(count, "count");
    *count = static_cast<int>(sscd::test_pairs(archive->value, modality1, modality2).size());
  });
}

int sscd_archive_test_pair(const sscd_archive* archive, const char* modality1, const char* modality2, int index,
                           char* scene_id, size_t scene_id_len, int* date1, int* date2, sscd_raster** image1,
                           sscd_raster** image2, sscd_raster** ground_truth) {
  return guarded([&] {
    need(archive, "archive");
    need(modality1, "modality1");
    need(modality2, "modality2");
    const auto pairs = sscd::test_pairs(archive->value, modality1, modality2);
    if (index < 0 || static_cast<std::size_t>(index) >= pairs.size())
      sscd::fail(sscd::ErrorKind::Bounds, "test pair index " + std::to_string(index) + " out of range (" +
                                              std::to_string(pairs.size()) + " pairs)");
    const auto& p = pairs[static_cast<std::size_t>(index)];
    if (scene_id && scene_id_len > 0) {
      const std::size_t n = std::min(scene_id_len - 1, p.scene_id.size());
      std::memcpy(scene_id, p.scene_id.data(), n);
      scene_id[n] = '\0';
    }
    if (date1) *date1 = p.date1;
    if (date2) *date2 = p.date2;
    if (image1) emit(image1, *p.image1);
    if (image2) emit(image2, *p.image2);
    if (ground_truth) emit(ground_truth, *p.gt);
  });
}

void sscd_archive_free(sscd_archive* archive) { delete archive; }

void sscd_train_params_default(sscd_train_params* params) {
  if (!params) return;
  const sscd::TrainConfig d;
  params->mode = SSCD_MODE_HOMOGENEOUS;
  params->patch_side = d.patch_side;
  params->batch_size = d.batch_size;
  params->steps = d.steps;
  params->learning_rate = d.learning_rate;
  params->temperature = d.temperature;
  params->beta = d.beta;
  params->ema_tau = d.ema_tau;
  params->seed = d.seed;
  params->patches_per_image = d.patches_per_image;
  params->modality = "pseudo_optical";
  params->modality_b = "pseudo_sar";
  params->encoder_preset = SSCD_ENCODER_DESK;
}

int sscd_train(const sscd_archive* archive, const sscd_train_params* params, const char* loss_log_path,
               sscd_checkpoint** out) {
  return guarded([&] {
    need(archive, "archive");
    need(params, "params");
    need(out, "out");
    need(params->modality, "params->modality");
    sscd::TrainConfig c;
    if (params->mode != SSCD_MODE_HOMOGENEOUS && params->mode != SSCD_MODE_HETEROGENEOUS)
      throw BadArgument("unknown training mode " + std::to_string(params->mode));
    c.mode = static_cast<sscd::TrainingMode>(params->mode);
    c.patch_side = params->patch_side;
    c.batch_size = params->batch_size;
    c.steps = params->steps;
    c.learning_rate = params->learning_rate;
    c.temperature = params->temperature;
    c.beta = params->beta;
    c.ema_tau = params->ema_tau;
    c.seed = params->seed;
    c.patches_per_image = params->patches_per_image;
    c.modality = params->modality;
    if (c.mode == sscd::TrainingMode::Heterogeneous) {
      need(params->modality_b, "params->modality_b");
      c.modality_b = params->modality_b;
    }

    const int bands = archive->value.band_count(c.modality);
    sscd::EncoderConfig enc;
    switch (params->encoder_preset) {
      case SSCD_ENCODER_DESK: enc = sscd::EncoderConfig::desk(bands, params->seed); break;
      case SSCD_ENCODER_RESNET34_SMALL_INPUT:
        enc = sscd::EncoderConfig::resnet34_small_input(bands, params->seed);
        break;
      default: throw BadArgument("unknown encoder preset " + std::to_string(params->encoder_preset));
    }
    sscd::TrainResult result = c.mode == sscd::TrainingMode::Homogeneous
                                   ? sscd::train_homogeneous(archive->value, c, enc)
                                   : sscd::train_heterogeneous(archive->value, c, enc);
    if (loss_log_path) sscd::write_loss_log(result.losses, loss_log_path);
    emit(out, std::move(result.checkpoint));
  });
}

int sscd_checkpoint_save(const sscd_checkpoint* checkpoint, const char* path) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(path, "path");
    sscd::save_checkpoint(checkpoint->value, path);
  });
}

int sscd_checkpoint_load(const char* path, sscd_checkpoint** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, sscd::load_checkpoint(path));
  });
}

int sscd_checkpoint_get_info(const sscd_checkpoint* checkpoint, sscd_checkpoint_info* info) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(info, "info");
    const auto& c = checkpoint->value;
    info->mode = static_cast<int>(c.mode);
    info->patch_side = c.patch_side;
    info->in_channels1 = c.branch1.in_channels;
    info->in_channels2 = c.branch2.in_channels;
    info->embed_dim = c.config.embed_dim;
    info->steps = c.meta.steps;
    info->final_loss = c.meta.final_loss;
    info->seed = c.meta.seed;
  });
}

void sscd_checkpoint_free(sscd_checkpoint* checkpoint) { delete checkpoint; }

int sscd_map_compute(const sscd_checkpoint* const* ensemble, size_t count, const sscd_raster* image1,
                     const sscd_raster* image2, int stride, int batch_size, sscd_map** out) {
  return guarded([&] {
    need(ensemble, "ensemble");
    need(image1, "image1");
    need(image2, "image2");
    need(out, "out");
    std::vector<sscd::ModelCheckpoint> members;
    members.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      need(ensemble[i], "ensemble member");
      members.push_back(ensemble[i]->value);
    }
    sscd::InferenceOptions opts;
    opts.stride = stride;
    opts.batch_size = batch_size;
    emit(out, sscd::compute_intensity_map(members, image1->value, image2->value, opts));
  });
}

int sscd_map_standardize(const sscd_map* map, sscd_map** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    emit(out, sscd::standardize_map(map->value));
  });
}

int sscd_map_fuse(const sscd_map* const* maps, size_t count, sscd_map** out) {
  return guarded([&] {
    need(maps, "maps");
    need(out, "out");
    std::vector<sscd::IntensityMap> in;
    in.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      need(maps[i], "map");
      in.push_back(maps[i]->value);
    }
    emit(out, sscd::fuse_scales(in));
  });
}

int sscd_map_save(const sscd_map* map, const char* path) {
  return guarded([&] {
    need(map, "map");
    need(path, "path");
    sscd::save_map(map->value, path);
  });
}

int sscd_map_load(const char* path, sscd_map** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, sscd::load_map(path));
  });
}

int sscd_map_info(const sscd_map* map, int* width, int* height, int* state) {
  return guarded([&] {
    need(map, "map");
    if (width) *width = map->value.width;
    if (height) *height = map->value.height;
    if (state) *state = static_cast<int>(map->value.state);
  });
}

const float* sscd_map_values(const sscd_map* map) { return map ? map->value.values.data() : nullptr; }

void sscd_map_free(sscd_map* map) { delete map; }

int sscd_threshold_decide(const sscd_map* map, int strategy, int bins, sscd_threshold_decision* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    const sscd::ThresholdDecision d = sscd::decide_threshold(map->value, to_strategy(strategy), bins);
    out->t_min = d.t_min;
    out->t_rosin = d.t_rosin;
    out->chosen = d.chosen;
    out->method = d.method == sscd::ThresholdMethod::Rosin ? SSCD_METHOD_ROSIN : SSCD_METHOD_OPPOSITE_MIN;
  });
}

int sscd_binarize(const sscd_map* map, double t, sscd_raster** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    emit(out, sscd::binarize(map->value, t));
  });
}

int sscd_mask_save(const sscd_raster* mask, const sscd_map* source, const sscd_threshold_decision* decision,
                   const char* path) {
  return guarded([&] {
    need(mask, "mask");
    need(path, "path");
    sscd::write_raster(mask->value, path);
    sscd::Sidecar meta;
    if (source) meta = sscd::map_metadata(source->value);
    if (decision) sscd::append_decision(meta, to_decision(*decision));
    sscd::write_sidecar(meta, sscd::sidecar_path(path));
  });
}

int sscd_confusion_counts(const sscd_raster* prediction, const sscd_raster* ground_truth, sscd_confusion* out) {
  return guarded([&] {
    need(prediction, "prediction");
    need(ground_truth, "ground_truth");
    need(out, "out");
    const auto c = sscd::confusion_counts(prediction->value, ground_truth->value);
    *out = {c.tp, c.fp, c.fn, c.tn};
  });
}

int sscd_compute_metrics(const sscd_confusion* counts, sscd_metrics* out) {
  return guarded([&] {
    need(counts, "counts");
    need(out, "out");
    const auto r = sscd::compute_metrics({counts->tp, counts->fp, counts->fn, counts->tn});
    *out = {r.pre, r.rec, r.oa, r.f1, r.kappa, r.pe, r.degenerate ? 1 : 0};
  });
}

int sscd_metrics_write_json(const sscd_metrics* metrics, const sscd_confusion* counts, const char* path) {
  return guarded([&] {
    need(metrics, "metrics");
    need(counts, "counts");
    need(path, "path");
    sscd::MetricReport r{metrics->pre, metrics->rec, metrics->oa, metrics->f1,
                         metrics->kappa, metrics->pe, metrics->degenerate != 0};
    sscd::write_metrics_json(r, {counts->tp, counts->fp, counts->fn, counts->tn}, path);
  });
}

int sscd_roc_auc(const float* scores, const uint8_t* labels, size_t count, double* out) {
  return guarded([&] {
    need(scores, "scores");
    need(labels, "labels");
    need(out, "out");
    *out = sscd::roc_auc({scores, count}, {labels, count});
  });
}

}  // extern "C"
