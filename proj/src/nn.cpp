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

#include "sscd/nn.hpp"

#include <Eigen/Core>
#include <cmath>

#include "gemm.hpp"
#include "sscd/error.hpp"

namespace sscd::nn {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

constexpr float kBnEps = 1e-5f;
constexpr float kBnMomentum = 0.1f;

std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

// ---------------------------------------------------------------------------

class Conv2d final : public Layer {
 public:
  Conv2d(Binder& b, const std::string& name, int cin, int cout, int kernel, int stride, int pad)
      : cin_(cin), cout_(cout), k_(kernel), stride_(stride), pad_(pad) {
    weight_ = b.param(name + ".weight", {cout, cin, kernel, kernel}, Init::KaimingConv, cout * kernel * kernel);
  }

  Act forward(const Act& x, const ParamGroup& p, Mode mode, Cache* cache, ParamGroup*) const override {
    require(x.c == cin_, ErrorKind::Shape,
            "conv expects " + std::to_string(cin_) + " channels, got " + std::to_string(x.c));
    const int ho = (x.h + 2 * pad_ - k_) / stride_ + 1;
    const int wo = (x.w + 2 * pad_ - k_) / stride_ + 1;
    require(ho >= 1 && wo >= 1, ErrorKind::Shape, "conv input too small");
    const int rows = cin_ * k_ * k_;
    const std::size_t cols = static_cast<std::size_t>(x.n) * ho * wo;
    std::vector<float> col(static_cast<std::size_t>(rows) * cols);
    im2col(x, ho, wo, col.data());

    Act y(cout_, x.n, ho, wo);
    if (mode == Mode::Eval) {
      gemm_columnwise(p.data(weight_), cout_, rows, col.data(), cols, y.v.data());
    } else {
      ConstMapMat wmat(p.data(weight_), cout_, rows);
      ConstMapMat cmat(col.data(), rows, static_cast<Eigen::Index>(cols));
      MapMat ymat(y.v.data(), cout_, static_cast<Eigen::Index>(cols));
      ymat.noalias() = wmat * cmat;
    }

    if (cache) {
      cache->a = std::move(col);
      cache->ia = x.n;
      cache->ib = x.h;
      cache->ic = x.w;
    }
    return y;
  }

  Act backward(const Act& gy, const ParamGroup& p, const Cache& cache, ParamGroup& grads) const override {
    const int rows = cin_ * k_ * k_;
    const auto cols = static_cast<Eigen::Index>(gy.spatial());
    ConstMapMat gmat(gy.v.data(), cout_, cols);
    ConstMapMat cmat(cache.a.data(), rows, cols);
    MapMat gw(grads.data(weight_), cout_, rows);
    gw.noalias() += gmat * cmat.transpose();

    ConstMapMat wmat(p.data(weight_), cout_, rows);
    std::vector<float> gcol(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    MapMat gc(gcol.data(), rows, cols);
    gc.noalias() = wmat.transpose() * gmat;

    Act gx(cin_, cache.ia, cache.ib, cache.ic);
    col2im(gcol.data(), gy.h, gy.w, gx);
    return gx;
  }

 private:
  void im2col(const Act& x, int ho, int wo, float* col) const {
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int c = 0; c < cin_; ++c) {
      for (int ki = 0; ki < k_; ++ki) {
        for (int kj = 0; kj < k_; ++kj) {
          for (int n = 0; n < x.n; ++n) {
            const float* src = x.v.data() + (static_cast<std::size_t>(c) * x.n + n) * plane;
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * stride_ - pad_ + ki;
              if (iy < 0 || iy >= x.h) {
                std::fill(col, col + wo, 0.0f);
                col += wo;
                continue;
              }
              const float* row = src + static_cast<std::size_t>(iy) * x.w;
              for (int ox = 0; ox < wo; ++ox) {
                const int ix = ox * stride_ - pad_ + kj;
                *col++ = (ix >= 0 && ix < x.w) ? row[ix] : 0.0f;
              }
            }
          }
        }
      }
    }
  }

  void col2im(const float* col, int ho, int wo, Act& gx) const {
    const std::size_t plane = static_cast<std::size_t>(gx.h) * gx.w;
    for (int c = 0; c < cin_; ++c) {
      for (int ki = 0; ki < k_; ++ki) {
        for (int kj = 0; kj < k_; ++kj) {
          for (int n = 0; n < gx.n; ++n) {
            float* dst = gx.v.data() + (static_cast<std::size_t>(c) * gx.n + n) * plane;
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * stride_ - pad_ + ki;
              if (iy < 0 || iy >= gx.h) {
                col += wo;
                continue;
              }
              float* row = dst + static_cast<std::size_t>(iy) * gx.w;
              for (int ox = 0; ox < wo; ++ox) {
                const int ix = ox * stride_ - pad_ + kj;
                if (ix >= 0 && ix < gx.w) row[ix] += *col;
                ++col;
              }
            }
          }
        }
      }
    }
  }

  int cin_, cout_, k_, stride_, pad_;
  int weight_;
};

// ---------------------------------------------------------------------------

class BatchNorm final : public Layer {
 public:
  BatchNorm(Binder& b, const std::string& name, int channels) : channels_(channels) {
    gamma_ = b.param(name + ".gamma", {channels}, Init::Ones, 0);
    beta_ = b.param(name + ".beta", {channels}, Init::Zeros, 0);
    mean_ = b.param(name + ".running_mean", {channels}, Init::Zeros, 0, false);
    var_ = b.param(name + ".running_var", {channels}, Init::Ones, 0, false);
  }

  Act forward(const Act& x, const ParamGroup& p, Mode mode, Cache* cache, ParamGroup* stats) const override {
    require(x.c == channels_, ErrorKind::Shape, "batch norm channel mismatch");
    const std::size_t m = x.spatial();
    Act y = x;
    const float* gamma = p.data(gamma_);
    const float* beta = p.data(beta_);
    if (cache) {
      cache->a.resize(x.v.size());
      cache->b.resize(static_cast<std::size_t>(channels_));
    }
    for (int c = 0; c < channels_; ++c) {
      const float* xr = x.v.data() + static_cast<std::size_t>(c) * m;
      float* yr = y.v.data() + static_cast<std::size_t>(c) * m;
      float mean, var;
      if (mode == Mode::Train) {
        require(m > 1, ErrorKind::Shape, "batch norm in training mode needs more than one value per channel");
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += xr[i];
        const double mu = s / static_cast<double>(m);
        double sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) sq += (xr[i] - mu) * (xr[i] - mu);
        mean = static_cast<float>(mu);
        var = static_cast<float>(sq / static_cast<double>(m));
        if (stats) {
          float* rm = stats->data(mean_);
          float* rv = stats->data(var_);
          const float unbiased = static_cast<float>(sq / static_cast<double>(m - 1));
          rm[c] = (1.0f - kBnMomentum) * rm[c] + kBnMomentum * mean;
          rv[c] = (1.0f - kBnMomentum) * rv[c] + kBnMomentum * unbiased;
        }
      } else {
        mean = p.data(mean_)[c];
        var = p.data(var_)[c];
      }
      const float inv_std = 1.0f / std::sqrt(var + kBnEps);
      for (std::size_t i = 0; i < m; ++i) {
        const float xh = (xr[i] - mean) * inv_std;
        if (cache) cache->a[static_cast<std::size_t>(c) * m + i] = xh;
        yr[i] = gamma[c] * xh + beta[c];
      }
      if (cache) cache->b[static_cast<std::size_t>(c)] = inv_std;
    }
    return y;
  }

  Act backward(const Act& gy, const ParamGroup& p, const Cache& cache, ParamGroup& grads) const override {
    const std::size_t m = gy.spatial();
    Act gx(gy.c, gy.n, gy.h, gy.w);
    const float* gamma = p.data(gamma_);
    float* ggamma = grads.data(gamma_);
    float* gbeta = grads.data(beta_);
    for (int c = 0; c < channels_; ++c) {
      const float* g = gy.v.data() + static_cast<std::size_t>(c) * m;
      const float* xh = cache.a.data() + static_cast<std::size_t>(c) * m;
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sum_g += g[i];
        sum_gx += static_cast<double>(g[i]) * xh[i];
      }
      ggamma[c] += static_cast<float>(sum_gx);
      gbeta[c] += static_cast<float>(sum_g);
      const float scale = gamma[c] * cache.b[static_cast<std::size_t>(c)] / static_cast<float>(m);
      const auto mf = static_cast<float>(m);
      const auto sg = static_cast<float>(sum_g);
      const auto sgx = static_cast<float>(sum_gx);
      float* out = gx.v.data() + static_cast<std::size_t>(c) * m;
      for (std::size_t i = 0; i < m; ++i) out[i] = scale * (mf * g[i] - sg - xh[i] * sgx);
    }
    return gx;
  }

 private:
  int channels_;
  int gamma_, beta_, mean_, var_;
};

// ---------------------------------------------------------------------------

class Relu final : public Layer {
 public:
  Act forward(const Act& x, const ParamGroup&, Mode, Cache* cache, ParamGroup*) const override {
    Act y = x;
    for (auto& v : y.v) v = v > 0.0f ? v : 0.0f;
    if (cache) cache->a = y.v;
    return y;
  }

  Act backward(const Act& gy, const ParamGroup&, const Cache& cache, ParamGroup&) const override {
    Act gx = gy;
    for (std::size_t i = 0; i < gx.v.size(); ++i)
      if (!(cache.a[i] > 0.0f)) gx.v[i] = 0.0f;
    return gx;
  }
};

// ---------------------------------------------------------------------------

class Linear final : public Layer {
 public:
  Linear(Binder& b, const std::string& name, int in, int out) : in_(in), out_(out) {
    weight_ = b.param(name + ".weight", {out, in}, Init::LinearUniform, in);
    bias_ = b.param(name + ".bias", {out}, Init::LinearUniform, in);
  }

  Act forward(const Act& x, const ParamGroup& p, Mode mode, Cache* cache, ParamGroup*) const override {
    require(x.c == in_ && x.h == 1 && x.w == 1, ErrorKind::Shape,
            "linear layer expects " + std::to_string(in_) + " features, got " + std::to_string(x.c));
    Act y(out_, x.n, 1, 1);
    if (mode == Mode::Eval) {
      gemm_columnwise(p.data(weight_), out_, in_, x.v.data(), static_cast<std::size_t>(x.n), y.v.data());
    } else {
      ConstMapMat wm(p.data(weight_), out_, in_);
      ConstMapMat xm(x.v.data(), in_, x.n);
      MapMat ym(y.v.data(), out_, x.n);
      ym.noalias() = wm * xm;
    }
    const float* bias = p.data(bias_);
    for (int o = 0; o < out_; ++o) {
      float* row = y.v.data() + static_cast<std::size_t>(o) * x.n;
      for (int i = 0; i < x.n; ++i) row[i] += bias[o];
    }
    if (cache) cache->a = x.v;
    return y;
  }

  Act backward(const Act& gy, const ParamGroup& p, const Cache& cache, ParamGroup& grads) const override {
    ConstMapMat gm(gy.v.data(), out_, gy.n);
    ConstMapMat xm(cache.a.data(), in_, gy.n);
    MapMat gw(grads.data(weight_), out_, in_);
    gw.noalias() += gm * xm.transpose();
    float* gb = grads.data(bias_);
    for (int o = 0; o < out_; ++o) {
      const float* row = gy.v.data() + static_cast<std::size_t>(o) * gy.n;
      float acc = 0.0f;
      for (int i = 0; i < gy.n; ++i) acc += row[i];
      gb[o] += acc;
    }
    Act gx(in_, gy.n, 1, 1);
    ConstMapMat wm(p.data(weight_), out_, in_);
    MapMat gxm(gx.v.data(), in_, gy.n);
    gxm.noalias() = wm.transpose() * gm;
    return gx;
  }

 private:
  int in_, out_;
  int weight_, bias_;
};

// ---------------------------------------------------------------------------

// conv3x3-bn-relu-conv3x3-bn plus identity or 1x1 projection shortcut, then relu.
class BasicBlock final : public Layer {
 public:
  BasicBlock(Binder& b, const std::string& name, int cin, int cout, int stride)
      : conv1_(b, name + ".conv1", cin, cout, 3, stride, 1),
        bn1_(b, name + ".bn1", cout),
        conv2_(b, name + ".conv2", cout, cout, 3, 1, 1),
        bn2_(b, name + ".bn2", cout) {
    if (stride != 1 || cin != cout) {
      short_conv_ = std::make_unique<Conv2d>(b, name + ".shortcut.conv", cin, cout, 1, stride, 0);
      short_bn_ = std::make_unique<BatchNorm>(b, name + ".shortcut.bn", cout);
    }
  }

  Act forward(const Act& x, const ParamGroup& p, Mode mode, Cache* cache, ParamGroup* stats) const override {
    Cache* c = nullptr;
    if (cache) {
      cache->children.assign(7, Cache{});
      c = cache->children.data();
    }
    auto at = [&](int i) { return c ? c + i : nullptr; };
    Act h = conv1_.forward(x, p, mode, at(0), stats);
    h = bn1_.forward(h, p, mode, at(1), stats);
    h = relu_.forward(h, p, mode, at(2), stats);
    h = conv2_.forward(h, p, mode, at(3), stats);
    h = bn2_.forward(h, p, mode, at(4), stats);
    if (short_conv_) {
      Act s = short_conv_->forward(x, p, mode, at(5), stats);
      s = short_bn_->forward(s, p, mode, at(6), stats);
      for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] += s.v[i];
    } else {
      for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] += x.v[i];
    }
    for (auto& v : h.v) v = v > 0.0f ? v : 0.0f;
    if (cache) cache->a = h.v;
    return h;
  }

  Act backward(const Act& gy, const ParamGroup& p, const Cache& cache, ParamGroup& grads) const override {
    Act g = gy;
    for (std::size_t i = 0; i < g.v.size(); ++i)
      if (!(cache.a[i] > 0.0f)) g.v[i] = 0.0f;
    const auto& c = cache.children;
    Act gm = bn2_.backward(g, p, c[4], grads);
    gm = conv2_.backward(gm, p, c[3], grads);
    gm = relu_.backward(gm, p, c[2], grads);
    gm = bn1_.backward(gm, p, c[1], grads);
    Act gx = conv1_.backward(gm, p, c[0], grads);
    if (short_conv_) {
      Act gs = short_bn_->backward(g, p, c[6], grads);
      gs = short_conv_->backward(gs, p, c[5], grads);
      for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += gs.v[i];
    } else {
      for (std::size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += g.v[i];
    }
    return gx;
  }

 private:
  Conv2d conv1_;
  BatchNorm bn1_;
  Relu relu_;
  Conv2d conv2_;
  BatchNorm bn2_;
  std::unique_ptr<Conv2d> short_conv_;
  std::unique_ptr<BatchNorm> short_bn_;
};

// ---------------------------------------------------------------------------

class GlobalAvgPool final : public Layer {
 public:
  Act forward(const Act& x, const ParamGroup&, Mode, Cache* cache, ParamGroup*) const override {
    Act y(x.c, x.n, 1, 1);
    const std::size_t hw = static_cast<std::size_t>(x.h) * x.w;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
      const float* src = x.v.data() + i * hw;
      float s = 0.0f;
      for (std::size_t j = 0; j < hw; ++j) s += src[j];
      y.v[i] = s / static_cast<float>(hw);
    }
    if (cache) {
      cache->ia = x.h;
      cache->ib = x.w;
    }
    return y;
  }

  Act backward(const Act& gy, const ParamGroup&, const Cache& cache, ParamGroup&) const override {
    Act gx(gy.c, gy.n, cache.ia, cache.ib);
    const std::size_t hw = static_cast<std::size_t>(cache.ia) * cache.ib;
    const float inv = 1.0f / static_cast<float>(hw);
    for (std::size_t i = 0; i < gy.v.size(); ++i) std::fill_n(gx.v.data() + i * hw, hw, gy.v[i] * inv);
    return gx;
  }
};

// ---------------------------------------------------------------------------

class L2Normalize final : public Layer {
 public:
  Act forward(const Act& x, const ParamGroup&, Mode, Cache* cache, ParamGroup*) const override {
    Act y = x;
    std::vector<float> norms(static_cast<std::size_t>(x.n));
    for (int j = 0; j < x.n; ++j) {
      double s = 0.0;
      for (int i = 0; i < x.c; ++i) {
        const double v = x.v[static_cast<std::size_t>(i) * x.n + j];
        s += v * v;
      }
      const double norm = std::max(std::sqrt(s), 1e-12);
      norms[static_cast<std::size_t>(j)] = static_cast<float>(norm);
      for (int i = 0; i < x.c; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) * x.n + j;
        y.v[k] = static_cast<float>(x.v[k] / norm);
      }
    }
    if (cache) {
      cache->a = y.v;
      cache->b = std::move(norms);
    }
    return y;
  }

  Act backward(const Act& gy, const ParamGroup&, const Cache& cache, ParamGroup&) const override {
    Act gx(gy.c, gy.n, 1, 1);
    for (int j = 0; j < gy.n; ++j) {
      double dot = 0.0;
      for (int i = 0; i < gy.c; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) * gy.n + j;
        dot += static_cast<double>(gy.v[k]) * cache.a[k];
      }
      const float norm = cache.b[static_cast<std::size_t>(j)];
      for (int i = 0; i < gy.c; ++i) {
        const std::size_t k = static_cast<std::size_t>(i) * gy.n + j;
        gx.v[k] = static_cast<float>((gy.v[k] - cache.a[k] * dot) / norm);
      }
    }
    return gx;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

int ParamGroup::add(std::string name, std::vector<int> shape, bool trainable) {
  NamedTensor t;
  t.name = std::move(name);
  t.value.shape = std::move(shape);
  t.value.data.assign(t.value.numel(), 0.0f);
  t.trainable = trainable;
  entries_.push_back(std::move(t));
  return static_cast<int>(entries_.size() - 1);
}

int ParamGroup::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::size_t ParamGroup::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += e.value.numel();
  return n;
}

ParamGroup ParamGroup::zeros_like() const {
  ParamGroup g = *this;
  for (auto& e : g.entries_) std::fill(e.value.data.begin(), e.value.data.end(), 0.0f);
  return g;
}

bool ParamGroup::same_layout(const ParamGroup& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.value.shape != b.value.shape || a.trainable != b.trainable) return false;
  }
  return true;
}

bool ParamGroup::operator==(const ParamGroup& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].value.data != other.entries_[i].value.data) return false;
  return true;
}

Binder::Binder(ParamGroup& group, Rng* init_rng, std::string prefix)
    : group_(&group), rng_(init_rng), prefix_(std::move(prefix)), claimed_(std::make_shared<int>(0)) {}

Binder Binder::scoped(const std::string& sub) const {
  Binder b = *this;
  b.prefix_ = prefix_.empty() ? sub : prefix_ + "." + sub;
  return b;
}

int Binder::param(const std::string& name, std::vector<int> shape, Init init, int fan, bool trainable) {
  const std::string full = prefix_.empty() ? name : prefix_ + "." + name;
  if (!rng_) {
    const int idx = group_->index_of(full);
    require(idx >= 0, ErrorKind::Corruption, "missing parameter '" + full + "'");
    const auto& t = (*group_)[idx];
    require(t.value.shape == shape, ErrorKind::Corruption,
            "parameter '" + full + "' has shape " + shape_str(t.value.shape) + ", expected " + shape_str(shape));
    require(t.trainable == trainable, ErrorKind::Corruption, "parameter '" + full + "' has wrong trainable flag");
    ++*claimed_;
    return idx;
  }
  const int idx = group_->add(full, std::move(shape), trainable);
  auto& data = (*group_)[idx].value.data;
  switch (init) {
    case Init::KaimingConv: {
      const double sd = std::sqrt(2.0 / fan);
      for (auto& v : data) v = static_cast<float>(sd * rng_->normal());
      break;
    }
    case Init::LinearUniform: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan));
      for (auto& v : data) v = static_cast<float>(rng_->uniform(-bound, bound));
      break;
    }
    case Init::Ones:
      std::fill(data.begin(), data.end(), 1.0f);
      break;
    case Init::Zeros:
      break;
  }
  ++*claimed_;
  return idx;
}

void Binder::finish() const {
  if (rng_) return;
  require(static_cast<std::size_t>(*claimed_) == group_->size(), ErrorKind::Corruption,
          "parameter table has " + std::to_string(group_->size()) + " entries, network uses " +
              std::to_string(*claimed_));
}

Act Sequential::forward(Act x, const ParamGroup& p, Mode mode, std::vector<Cache>* tape, ParamGroup* stats) const {
  if (tape) tape->assign(layers_.size(), Cache{});
  for (std::size_t i = 0; i < layers_.size(); ++i)
    x = layers_[i]->forward(x, p, mode, tape ? &(*tape)[i] : nullptr, stats);
  return x;
}

Act Sequential::backward(Act gy, const ParamGroup& p, const std::vector<Cache>& tape, ParamGroup& grads) const {
  for (std::size_t i = layers_.size(); i-- > 0;) gy = layers_[i]->backward(gy, p, tape[i], grads);
  return gy;
}

std::unique_ptr<Layer> make_conv(Binder& b, const std::string& name, int cin, int cout, int kernel, int stride,
                                 int pad) {
  return std::make_unique<Conv2d>(b, name, cin, cout, kernel, stride, pad);
}
std::unique_ptr<Layer> make_batchnorm(Binder& b, const std::string& name, int channels) {
  return std::make_unique<BatchNorm>(b, name, channels);
}
std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }
std::unique_ptr<Layer> make_linear(Binder& b, const std::string& name, int in, int out) {
  return std::make_unique<Linear>(b, name, in, out);
}
std::unique_ptr<Layer> make_basic_block(Binder& b, const std::string& name, int cin, int cout, int stride) {
  return std::make_unique<BasicBlock>(b, name, cin, cout, stride);
}
std::unique_ptr<Layer> make_global_avg_pool() { return std::make_unique<GlobalAvgPool>(); }
std::unique_ptr<Layer> make_l2_normalize() { return std::make_unique<L2Normalize>(); }

Act from_nchw(const float* data, int n, int c, int h, int w) {
  Act a(c, n, h, w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int s = 0; s < n; ++s)
    for (int ch = 0; ch < c; ++ch)
      std::copy_n(data + (static_cast<std::size_t>(s) * c + ch) * plane, plane,
                  a.v.data() + (static_cast<std::size_t>(ch) * n + s) * plane);
  return a;
}

std::vector<float> to_rows(const Act& a) {
  std::vector<float> rows(a.v.size());
  for (int i = 0; i < a.c; ++i)
    for (int j = 0; j < a.n; ++j)
      rows[static_cast<std::size_t>(j) * a.c + i] = a.v[static_cast<std::size_t>(i) * a.n + j];
  return rows;
}

Act from_rows(const std::vector<float>& rows, int n, int features) {
  Act a(features, n, 1, 1);
  for (int i = 0; i < features; ++i)
    for (int j = 0; j < n; ++j)
      a.v[static_cast<std::size_t>(i) * n + j] = rows[static_cast<std::size_t>(j) * features + i];
  return a;
}

}  // namespace sscd::nn
