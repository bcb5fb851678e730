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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sscd/rng.hpp"

// Minimal CPU layers with hand-written backward passes. Activations use a
// channel-major C x N x H x W layout so a convolution is a single GEMM over
// the whole batch and batch normalization reduces over contiguous rows.
namespace sscd::nn {

struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

struct NamedTensor {
  std::string name;
  Tensor value;
  bool trainable = true;
};

/// Ordered collection of named tensors (weights and running statistics).
class ParamGroup {
 public:
  int add(std::string name, std::vector<int> shape, bool trainable);
  int index_of(const std::string& name) const;

  NamedTensor& operator[](int i) { return entries_[static_cast<std::size_t>(i)]; }
  const NamedTensor& operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  float* data(int i) { return entries_[static_cast<std::size_t>(i)].value.data.data(); }
  const float* data(int i) const { return entries_[static_cast<std::size_t>(i)].value.data.data(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<NamedTensor>& entries() { return entries_; }
  const std::vector<NamedTensor>& entries() const { return entries_; }

  std::size_t trainable_count() const;

  /// Same layout, all values zero.
  ParamGroup zeros_like() const;

  bool same_layout(const ParamGroup& other) const;
  bool operator==(const ParamGroup& other) const;

 private:
  std::vector<NamedTensor> entries_;
};

enum class Init { KaimingConv, LinearUniform, Ones, Zeros };

/// Registers parameters during network construction. In create mode the
/// tensors are appended and initialized from the rng; in bind mode they must
/// already exist with the expected shape (ErrorKind::Corruption otherwise).
class Binder {
 public:
  Binder(ParamGroup& group, Rng* init_rng, std::string prefix = "");

  int param(const std::string& name, std::vector<int> shape, Init init, int fan, bool trainable = true);
  Binder scoped(const std::string& sub) const;

  /// Bind mode: all group entries must have been claimed.
  void finish() const;

 private:
  ParamGroup* group_;
  Rng* rng_;
  std::string prefix_;
  std::shared_ptr<int> claimed_;
};

/// Activation block: c x n x h x w, channel-major.
struct Act {
  int c = 0, n = 0, h = 1, w = 1;
  std::vector<float> v;

  Act() = default;
  Act(int c_, int n_, int h_, int w_) : c(c_), n(n_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * n_ * h_ * w_) {}
  std::size_t spatial() const { return static_cast<std::size_t>(n) * h * w; }
};

enum class Mode { Eval, Train };

struct Cache {
  std::vector<float> a, b;
  int ia = 0, ib = 0, ic = 0, id = 0;
  std::vector<Cache> children;
};

class Layer {
 public:
  virtual ~Layer() = default;

  /// `cache` non-null records what backward needs. In Train mode batch
  /// normalization uses batch statistics and, when `stats` is non-null,
  /// updates its running estimates there.
  virtual Act forward(const Act& x, const ParamGroup& p, Mode mode, Cache* cache, ParamGroup* stats) const = 0;

  /// Accumulates parameter gradients into `grads`; returns the input gradient.
  virtual Act backward(const Act& gy, const ParamGroup& p, const Cache& cache, ParamGroup& grads) const = 0;
};

class Sequential {
 public:
  void push(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  bool empty() const { return layers_.empty(); }

  Act forward(Act x, const ParamGroup& p, Mode mode, std::vector<Cache>* tape, ParamGroup* stats) const;
  Act backward(Act gy, const ParamGroup& p, const std::vector<Cache>& tape, ParamGroup& grads) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

std::unique_ptr<Layer> make_conv(Binder& b, const std::string& name, int cin, int cout, int kernel, int stride, int pad);
std::unique_ptr<Layer> make_batchnorm(Binder& b, const std::string& name, int channels);
std::unique_ptr<Layer> make_relu();
std::unique_ptr<Layer> make_linear(Binder& b, const std::string& name, int in, int out);
std::unique_ptr<Layer> make_basic_block(Binder& b, const std::string& name, int cin, int cout, int stride);
std::unique_ptr<Layer> make_global_avg_pool();
/// Column-wise l2 normalization of a (features x batch) block.
std::unique_ptr<Layer> make_l2_normalize();

/// NCHW sample-major buffer to channel-major Act.
Act from_nchw(const float* data, int n, int c, int h, int w);
/// (features x batch) Act to row-per-sample matrix.
std::vector<float> to_rows(const Act& a);
Act from_rows(const std::vector<float>& rows, int n, int features);

}  // namespace sscd::nn
