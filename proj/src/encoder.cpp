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

#include "sscd/encoder.hpp"

#include <cmath>
#include <string>

#include "sscd/error.hpp"
#include "sscd/fileio.hpp"

namespace sscd {
namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

// Seed streams. Online and target share one so a fresh target is an exact
// copy of the online encoder/projector.
constexpr std::uint64_t kStreamShared = 1;
constexpr std::uint64_t kStreamModalityA = 2;
constexpr std::uint64_t kStreamModalityB = 3;
constexpr std::uint64_t kStreamPredictor = 4;

bool finite_group(const nn::ParamGroup& g) {
  for (const auto& e : g.entries())
    for (float v : e.value.data)
      if (!std::isfinite(v)) return false;
  return true;
}

void write_group(io::ByteWriter& w, const nn::ParamGroup& g) {
  w.u32(static_cast<std::uint32_t>(g.size()));
  for (const auto& e : g.entries()) {
    w.str(e.name);
    w.u8(e.trainable ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(e.value.shape.size()));
    for (int d : e.value.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : e.value.data) w.f32(v);
  }
}

nn::ParamGroup read_group(io::ByteReader& r) {
  nn::ParamGroup g;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const bool trainable = r.u8() != 0;
    const std::uint32_t ndim = r.u32();
    require(ndim <= 8, ErrorKind::Corruption, "parameter '" + name + "' has implausible rank");
    std::vector<int> shape(ndim);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = static_cast<int>(r.u32());
      numel *= static_cast<std::size_t>(d);
    }
    require(numel * 4 <= r.remaining(), ErrorKind::Truncation, "parameter '" + name + "' data truncated");
    const int idx = g.add(std::move(name), std::move(shape), trainable);
    for (auto& v : g[idx].value.data) v = r.f32();
  }
  return g;
}

void write_branch(io::ByteWriter& w, const BranchParams& b) {
  w.u32(static_cast<std::uint32_t>(b.in_channels));
  w.u8(b.has_predictor() ? 1 : 0);
  write_group(w, b.encoder);
  write_group(w, b.projector);
  if (b.predictor) write_group(w, *b.predictor);
}

BranchParams read_branch(io::ByteReader& r) {
  BranchParams b;
  b.in_channels = static_cast<int>(r.u32());
  const bool has_pred = r.u8() != 0;
  b.encoder = read_group(r);
  b.projector = read_group(r);
  if (has_pred) b.predictor = read_group(r);
  return b;
}

void write_ints(io::ByteWriter& w, const std::vector<int>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (int x : v) w.u32(static_cast<std::uint32_t>(x));
}

std::vector<int> read_ints(io::ByteReader& r) {
  const std::uint32_t n = r.u32();
  require(n <= 64, ErrorKind::Corruption, "implausible stage count");
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(r.u32());
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

void EncoderConfig::validate() const {
  require(in_channels >= 1, ErrorKind::Config, "in_channels must be >= 1");
  require(embed_dim >= 2, ErrorKind::Config, "embed_dim must be >= 2");
  require(!widths.empty() && widths.size() == blocks_per_stage.size() && widths.size() == stage_strides.size(),
          ErrorKind::Config, "widths, blocks_per_stage and stage_strides must be non-empty and equally long");
  for (std::size_t i = 0; i < widths.size(); ++i)
    require(widths[i] >= 1 && blocks_per_stage[i] >= 1 && stage_strides[i] >= 1, ErrorKind::Config,
            "stage " + std::to_string(i) + " has a non-positive width, block count or stride");
  require(projector_hidden >= 1 && predictor_hidden >= 1, ErrorKind::Config, "head widths must be positive");
}

EncoderConfig EncoderConfig::desk(int in_channels, std::uint64_t seed) {
  EncoderConfig c;
  c.in_channels = in_channels;
  c.seed = seed;
  return c;
}

EncoderConfig EncoderConfig::resnet34_small_input(int in_channels, std::uint64_t seed) {
  EncoderConfig c;
  c.in_channels = in_channels;
  c.widths = {64, 128, 256, 512};
  c.blocks_per_stage = {3, 4, 6, 3};
  c.stage_strides = {1, 2, 1, 1};
  c.embed_dim = 128;
  c.projector_hidden = 512;
  c.predictor_hidden = 512;
  c.seed = seed;
  return c;
}

EncoderConfig EncoderConfig::resnet34(int in_channels, std::uint64_t seed) {
  EncoderConfig c = resnet34_small_input(in_channels, seed);
  c.stage_strides = {1, 2, 2, 2};
  return c;
}

std::size_t BranchParams::trainable_count() const {
  std::size_t n = encoder.trainable_count() + projector.trainable_count();
  if (predictor) n += predictor->trainable_count();
  return n;
}

bool BranchParams::all_finite() const {
  return finite_group(encoder) && finite_group(projector) && (!predictor || finite_group(*predictor));
}

BranchParams BranchParams::zeros_like() const {
  BranchParams z;
  z.in_channels = in_channels;
  z.encoder = encoder.zeros_like();
  z.projector = projector.zeros_like();
  if (predictor) z.predictor = predictor->zeros_like();
  return z;
}

void ModelCheckpoint::validate() const {
  require(branch1.in_channels >= 1 && branch2.in_channels >= 1, ErrorKind::Corruption, "branch without input channels");
  require(patch_side >= 4 && patch_side % 2 == 0, ErrorKind::Corruption, "invalid patch side");
  if (mode == TrainingMode::Homogeneous) {
    require(branch1.has_predictor(), ErrorKind::Corruption, "homogeneous checkpoint: online branch lacks a predictor");
    require(!branch2.has_predictor(), ErrorKind::Corruption, "homogeneous checkpoint: target branch has a predictor");
    require(branch1.in_channels == branch2.in_channels && branch1.encoder.same_layout(branch2.encoder) &&
                branch1.projector.same_layout(branch2.projector),
            ErrorKind::Corruption, "homogeneous checkpoint: online and target shapes differ");
  } else {
    require(!branch1.has_predictor() && !branch2.has_predictor(), ErrorKind::Corruption,
            "heterogeneous checkpoint must not carry predictors");
  }
  // Binding validates every tensor shape against the configuration.
  BranchNet check1(config, branch1);
  BranchNet check2(config, branch2);
}

// ---------------------------------------------------------------------------

PatchBatch PatchBatch::from_patches(const std::vector<Patch>& patches) {
  PatchBatch b;
  require(!patches.empty(), ErrorKind::Shape, "empty patch list");
  b.count = static_cast<int>(patches.size());
  b.bands = patches.front().bands;
  b.side = patches.front().side;
  b.data.reserve(b.sample_size() * patches.size());
  for (const auto& p : patches) {
    require(p.bands == b.bands && p.side == b.side, ErrorKind::Shape, "patches in a batch must share shape");
    b.data.insert(b.data.end(), p.pixels.begin(), p.pixels.end());
  }
  return b;
}

PatchBatch PatchBatch::slice(int first, int n) const {
  PatchBatch b;
  b.count = n;
  b.bands = bands;
  b.side = side;
  const auto begin = data.begin() + static_cast<std::ptrdiff_t>(sample_size() * static_cast<std::size_t>(first));
  b.data.assign(begin, begin + static_cast<std::ptrdiff_t>(sample_size() * static_cast<std::size_t>(n)));
  return b;
}

// ---------------------------------------------------------------------------

void BranchNet::build(const EncoderConfig& config, BranchParams& params, Rng* enc_rng, Rng* pred_rng,
                      bool with_predictor) {
  has_predictor_ = with_predictor;
  nn::Binder enc(params.encoder, enc_rng);
  encoder_.push(nn::make_conv(enc, "stem.conv", params.in_channels, config.widths[0], 3, 1, 1));
  encoder_.push(nn::make_batchnorm(enc, "stem.bn", config.widths[0]));
  encoder_.push(nn::make_relu());
  int channels = config.widths[0];
  for (std::size_t s = 0; s < config.widths.size(); ++s) {
    for (int k = 0; k < config.blocks_per_stage[s]; ++k) {
      const int stride = k == 0 ? config.stage_strides[s] : 1;
      const std::string name = "stage" + std::to_string(s + 1) + ".block" + std::to_string(k + 1);
      encoder_.push(nn::make_basic_block(enc, name, channels, config.widths[s], stride));
      channels = config.widths[s];
    }
  }
  encoder_.push(nn::make_global_avg_pool());
  enc.finish();

  nn::Binder proj(params.projector, enc_rng);
  projector_.push(nn::make_linear(proj, "fc1", channels, config.projector_hidden));
  projector_.push(nn::make_relu());
  projector_.push(nn::make_linear(proj, "fc2", config.projector_hidden, config.embed_dim));
  proj.finish();

  if (with_predictor) {
    nn::Binder pred(*params.predictor, pred_rng);
    predictor_.push(nn::make_linear(pred, "fc1", config.embed_dim, config.predictor_hidden));
    predictor_.push(nn::make_batchnorm(pred, "bn1", config.predictor_hidden));
    predictor_.push(nn::make_relu());
    predictor_.push(nn::make_linear(pred, "fc2", config.predictor_hidden, config.embed_dim));
    pred.finish();
  }
  normalize_.push(nn::make_l2_normalize());
}

BranchNet::BranchNet(const EncoderConfig& config, const BranchParams& params) {
  config.validate();
  // Bind mode never mutates the groups.
  auto& mut = const_cast<BranchParams&>(params);
  build(config, mut, nullptr, nullptr, params.has_predictor());
}

nn::Act BranchNet::forward(const nn::Act& input, BranchParams& params, nn::Mode mode, bool use_predictor, Tape* tape,
                           bool update_stats) const {
  require(input.c == params.in_channels, ErrorKind::Shape,
          "branch expects " + std::to_string(params.in_channels) + " input bands, got " + std::to_string(input.c));
  require(!use_predictor || has_predictor_, ErrorKind::Contract, "use_predictor requested on a branch without predictor");
  nn::Act h = encoder_.forward(input, params.encoder, mode, tape ? &tape->encoder : nullptr,
                               update_stats ? &params.encoder : nullptr);
  h = projector_.forward(std::move(h), params.projector, mode, tape ? &tape->projector : nullptr, nullptr);
  if (use_predictor)
    h = predictor_.forward(std::move(h), *params.predictor, mode, tape ? &tape->predictor : nullptr,
                           update_stats ? &*params.predictor : nullptr);
  if (tape) tape->used_predictor = use_predictor;
  static const nn::ParamGroup kNone;
  return normalize_.forward(std::move(h), kNone, mode, tape ? &tape->normalize : nullptr, nullptr);
}

nn::Act BranchNet::infer(const nn::Act& input, const BranchParams& params, bool use_predictor) const {
  return forward(input, const_cast<BranchParams&>(params), nn::Mode::Eval, use_predictor, nullptr, false);
}

void BranchNet::backward(const nn::Act& grad_out, const BranchParams& params, const Tape& tape,
                         BranchParams& grads) const {
  static nn::ParamGroup none;
  nn::Act g = normalize_.backward(grad_out, none, tape.normalize, none);
  if (tape.used_predictor) g = predictor_.backward(std::move(g), *params.predictor, tape.predictor, *grads.predictor);
  g = projector_.backward(std::move(g), params.projector, tape.projector, grads.projector);
  encoder_.backward(std::move(g), params.encoder, tape.encoder, grads.encoder);
}

BranchParams init_branch(const EncoderConfig& config, BranchRole role) {
  config.validate();
  BranchParams params;
  params.in_channels = config.in_channels;
  std::uint64_t stream = kStreamShared;
  if (role == BranchRole::ModalityA) stream = kStreamModalityA;
  if (role == BranchRole::ModalityB) stream = kStreamModalityB;
  Rng enc_rng(mix_seed(config.seed, stream));
  Rng pred_rng(mix_seed(config.seed, kStreamPredictor));
  const bool with_pred = role == BranchRole::Online;
  if (with_pred) params.predictor.emplace();
  BranchNet net;
  net.build(config, params, &enc_rng, &pred_rng, with_pred);
  return params;
}

std::size_t parameter_count(const EncoderConfig& config) {
  config.validate();
  BranchParams params;
  params.in_channels = config.in_channels;
  Rng rng(0);
  BranchNet net;
  net.build(config, params, &rng, &rng, false);
  return params.encoder.trainable_count() + params.projector.trainable_count();
}

FeatureMatrix encode(const BranchParams& params, const EncoderConfig& config, const PatchBatch& patches,
                     bool use_predictor) {
  require(patches.bands == params.in_channels, ErrorKind::Shape,
          "patches have " + std::to_string(patches.bands) + " bands, branch expects " +
              std::to_string(params.in_channels));
  require(patches.count >= 1 && patches.data.size() == patches.sample_size() * static_cast<std::size_t>(patches.count),
          ErrorKind::Shape, "malformed patch batch");
  require(!use_predictor || params.has_predictor(), ErrorKind::Contract,
          "use_predictor requested on a branch without predictor");
  BranchNet net(config, params);
  const nn::Act in = nn::from_nchw(patches.data.data(), patches.count, patches.bands, patches.side, patches.side);
  const nn::Act out = net.infer(in, params, use_predictor);
  FeatureMatrix f;
  f.rows = patches.count;
  f.cols = out.c;
  f.data = nn::to_rows(out);
  return f;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt) {
  io::ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kVersion);
  const auto& c = ckpt.config;
  w.u32(static_cast<std::uint32_t>(c.in_channels));
  write_ints(w, c.widths);
  write_ints(w, c.blocks_per_stage);
  write_ints(w, c.stage_strides);
  w.u32(static_cast<std::uint32_t>(c.embed_dim));
  w.u32(static_cast<std::uint32_t>(c.projector_hidden));
  w.u32(static_cast<std::uint32_t>(c.predictor_hidden));
  w.u64(c.seed);
  w.u8(static_cast<std::uint8_t>(ckpt.mode));
  w.u32(static_cast<std::uint32_t>(ckpt.patch_side));
  write_branch(w, ckpt.branch1);
  write_branch(w, ckpt.branch2);
  w.u64(ckpt.meta.steps);
  w.f64(ckpt.meta.final_loss);
  w.u64(ckpt.meta.seed);
  return std::move(w.bytes());
}

ModelCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 6 && std::equal(kMagic, kMagic + 4, bytes.begin()), ErrorKind::Format,
          "bad checkpoint magic (expected SSCK)");
  io::ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  const auto version = r.u16();
  require(version == kVersion, ErrorKind::Format, "unsupported checkpoint version " + std::to_string(version));
  ModelCheckpoint ckpt;
  auto& c = ckpt.config;
  c.in_channels = static_cast<int>(r.u32());
  c.widths = read_ints(r);
  c.blocks_per_stage = read_ints(r);
  c.stage_strides = read_ints(r);
  c.embed_dim = static_cast<int>(r.u32());
  c.projector_hidden = static_cast<int>(r.u32());
  c.predictor_hidden = static_cast<int>(r.u32());
  c.seed = r.u64();
  const auto mode = r.u8();
  require(mode <= 1, ErrorKind::Format, "unknown training mode " + std::to_string(mode));
  ckpt.mode = static_cast<TrainingMode>(mode);
  ckpt.patch_side = static_cast<int>(r.u32());
  ckpt.branch1 = read_branch(r);
  ckpt.branch2 = read_branch(r);
  ckpt.meta.steps = r.u64();
  ckpt.meta.final_loss = r.f64();
  ckpt.meta.seed = r.u64();
  require(r.remaining() == 0, ErrorKind::Format, "trailing bytes after checkpoint");
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Corruption, std::string("checkpoint config invalid: ") + e.what());
  }
  ckpt.validate();
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  ckpt.validate();
  io::write_file_atomic(path, encode_checkpoint(ckpt));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(io::read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace sscd
