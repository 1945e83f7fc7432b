// Copyright 2026 The prefiqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prefiqa/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "prefiqa/error.hpp"

namespace prefiqa::nn {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::Param(const Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return {this, it->second};
  }
  Node node;
  node.value = param.value;
  node.value.DropGrad();
  node.requires_grad = record_ && param.trainable;
  nodes_.push_back(std::move(node));
  const int index = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&param, index);
  return {this, index};
}

Var Tape::Record(Tensor value, std::vector<int> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (int i : inputs) node.requires_grad = node.requires_grad || nodes_[i].requires_grad;
    if (node.requires_grad) {
      node.inputs = std::move(inputs);
      node.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

std::span<float> Tape::MutableGrad(int index) {
  Node& n = nodes_[index];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0f);
  return n.grad;
}

std::span<const float> Tape::grad(Var v) const {
  const Node& n = nodes_[v.index];
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (!record_) {
    throw Error(ErrorCode::kInvalidArgument, "backward on a non-recording tape");
  }
  if (loss.value().size() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "backward requires a scalar loss, got shape " +
                    ShapeString(loss.shape()));
  }
  for (auto& n : nodes_) n.grad.clear();
  if (!nodes_[loss.index].requires_grad) return;
  MutableGrad(loss.index)[0] = 1.0f;
  for (int i = loss.index; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

std::span<const float> Tape::ParamGrad(const Parameter& param) const {
  auto it = param_nodes_.find(&param);
  if (it == param_nodes_.end()) return {};
  return nodes_[it->second].grad;
}

void Tape::AccumulateParamGrads(std::span<Parameter* const> params) const {
  for (Parameter* p : params) {
    const auto g = ParamGrad(*p);
    if (g.empty()) continue;
    auto dst = p->value.EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

void RequireSameTape(Var a, Var b) {
  if (a.tape != b.tape) {
    throw Error(ErrorCode::kInvalidArgument, "operands recorded on different tapes");
  }
}

struct ConvGeometry {
  int n, h, w, cin, k, cout, stride, oh, ow, pad_top, pad_left;
  int patch() const { return k * k * cin; }
  int positions() const { return oh * ow; }
};

}  // namespace

int ConvOutputSize(int in, int kernel, int stride, Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  return in >= kernel ? (in - kernel) / stride + 1 : 0;
}

Var Conv2d(Var x, Var weights, Var bias, int stride, Padding padding) {
  RequireSameTape(x, weights);
  RequireSameTape(x, bias);
  const Shape& xs = x.shape();
  const Shape& ws = weights.shape();
  Require(xs.size() == 4, "conv2d: input must be N x H x W x C, got " + ShapeString(xs));
  Require(ws.size() == 4 && ws[0] == ws[1],
          "conv2d: weights must be K x K x Cin x Cout, got " + ShapeString(ws));
  Require(ws[2] == xs[3], "conv2d: input has " + std::to_string(xs[3]) +
                              " channels, weights expect " + std::to_string(ws[2]));
  Require(bias.shape() == Shape{ws[3]}, "conv2d: bias must have Cout elements");
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "conv2d: stride must be >= 1");

  ConvGeometry g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[3], stride, 0, 0, 0, 0};
  g.oh = ConvOutputSize(g.h, g.k, stride, padding);
  g.ow = ConvOutputSize(g.w, g.k, stride, padding);
  Require(g.oh > 0 && g.ow > 0, "conv2d: input " + ShapeString(xs) +
                                    " smaller than kernel with valid padding");
  if (padding == Padding::kSame) {
    g.pad_top = std::max((g.oh - 1) * stride + g.k - g.h, 0) / 2;
    g.pad_left = std::max((g.ow - 1) * stride + g.k - g.w, 0) / 2;
  }

  const size_t patch = g.patch();
  const size_t positions = g.positions();
  // im2col buffer for all images, kept for the weight gradient.
  auto cols = std::make_shared<FloatBuffer>(g.n * positions * patch, 0.0f);
  const auto xd = x.value().data();
  for (int n = 0; n < g.n; ++n) {
    float* col = cols->data() + n * positions * patch;
    for (int oy = 0; oy < g.oh; ++oy) {
      for (int ox = 0; ox < g.ow; ++ox) {
        float* dst = col + (static_cast<size_t>(oy) * g.ow + ox) * patch;
        for (int ky = 0; ky < g.k; ++ky) {
          const int iy = oy * stride + ky - g.pad_top;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < g.k; ++kx) {
            const int ix = ox * stride + kx - g.pad_left;
            if (ix < 0 || ix >= g.w) continue;
            const float* src = &xd[((static_cast<size_t>(n) * g.h + iy) * g.w + ix) * g.cin];
            std::copy(src, src + g.cin, dst + (ky * g.k + kx) * g.cin);
          }
        }
      }
    }
  }

  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const RowMajor>;
  using MutMap = Eigen::Map<RowMajor>;
  const Eigen::Index rows = static_cast<Eigen::Index>(g.n * positions);
  const Eigen::Index depth = static_cast<Eigen::Index>(patch);

  Tensor out({g.n, g.oh, g.ow, g.cout});
  {
    ConstMap c(cols->data(), rows, depth);
    ConstMap w(weights.value().data().data(), depth, g.cout);
    Eigen::Map<const Eigen::RowVectorXf> b(bias.value().data().data(), g.cout);
    MutMap o(out.data().data(), rows, g.cout);
    o.noalias() = c * w;
    o.rowwise() += b;
  }

  const int xi = x.index, wi = weights.index, bi = bias.index;
  return x.tape->Record(
      std::move(out), {xi, wi, bi}, [g, cols, xi, wi, bi, rows, depth](Tape& t, int self) {
        ConstMap dout(t.OutputGrad(self).data(), rows, g.cout);
        if (t.NeedsGrad(bi)) {
          Eigen::Map<Eigen::RowVectorXf> db(t.MutableGrad(bi).data(), g.cout);
          db += dout.colwise().sum();
        }
        if (t.NeedsGrad(wi)) {
          ConstMap c(cols->data(), rows, depth);
          MutMap dw(t.MutableGrad(wi).data(), depth, g.cout);
          dw.noalias() += c.transpose() * dout;
        }
        if (t.NeedsGrad(xi)) {
          ConstMap w(t.value({&t, wi}).data().data(), depth, g.cout);
          RowMajor dcols(rows, depth);
          dcols.noalias() = dout * w.transpose();
          float* dx = t.MutableGrad(xi).data();
          for (int n = 0; n < g.n; ++n) {
            for (int oy = 0; oy < g.oh; ++oy) {
              for (int ox = 0; ox < g.ow; ++ox) {
                const Eigen::Index p = (static_cast<Eigen::Index>(n) * g.oh + oy) * g.ow + ox;
                const float* dcol = dcols.data() + p * depth;
                for (int ky = 0; ky < g.k; ++ky) {
                  const int iy = oy * g.stride + ky - g.pad_top;
                  if (iy < 0 || iy >= g.h) continue;
                  for (int kx = 0; kx < g.k; ++kx) {
                    const int ix = ox * g.stride + kx - g.pad_left;
                    if (ix < 0 || ix >= g.w) continue;
                    float* dst = dx + ((static_cast<size_t>(n) * g.h + iy) * g.w + ix) * g.cin;
                    const float* src = dcol + (ky * g.k + kx) * g.cin;
                    for (int ci = 0; ci < g.cin; ++ci) dst[ci] += src[ci];
                  }
                }
              }
            }
          }
        }
      });
}

Var Relu(Var x) {
  Tensor out = x.value();
  out.DropGrad();
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  const int xi = x.index;
  return x.tape->Record(std::move(out), {xi}, [xi](Tape& t, int self) {
    const auto xv = t.value({&t, xi}).data();
    const auto go = t.OutputGrad(self);
    auto gx = t.MutableGrad(xi);
    for (size_t i = 0; i < go.size(); ++i) {
      if (xv[i] > 0.0f) gx[i] += go[i];
    }
  });
}

Var Sigmoid(Var x) {
  Tensor out = x.value();
  out.DropGrad();
  for (float& v : out.data()) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
  const int xi = x.index;
  return x.tape->Record(std::move(out), {xi}, [xi](Tape& t, int self) {
    const auto s = t.value({&t, self}).data();
    const auto go = t.OutputGrad(self);
    auto gx = t.MutableGrad(xi);
    for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * s[i] * (1.0f - s[i]);
  });
}

Var Affine(Var x, Var weights, Var bias) {
  RequireSameTape(x, weights);
  RequireSameTape(x, bias);
  const Shape& xs = x.shape();
  const Shape& ws = weights.shape();
  Require(xs.size() == 2, "affine: input must be N x F, got " + ShapeString(xs));
  Require(ws.size() == 2 && ws[0] == xs[1],
          "affine: weights " + ShapeString(ws) + " incompatible with input " + ShapeString(xs));
  Require(bias.shape() == Shape{ws[1]}, "affine: bias must have O elements");
  const int n = xs[0], f = xs[1], o = ws[1];
  Tensor out({n, o});
  const auto xd = x.value().data();
  const auto wd = weights.value().data();
  const auto bd = bias.value().data();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < o; ++j) {
      float s = bd[j];
      for (int k = 0; k < f; ++k) s += xd[i * f + k] * wd[k * o + j];
      out[static_cast<size_t>(i) * o + j] = s;
    }
  }
  const int xi = x.index, wi = weights.index, bi = bias.index;
  return x.tape->Record(std::move(out), {xi, wi, bi}, [=](Tape& t, int self) {
    const auto go = t.OutputGrad(self);
    const auto xv = t.value({&t, xi}).data();
    const auto wv = t.value({&t, wi}).data();
    if (t.NeedsGrad(bi)) {
      auto gb = t.MutableGrad(bi);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < o; ++j) gb[j] += go[i * o + j];
    }
    if (t.NeedsGrad(wi)) {
      auto gw = t.MutableGrad(wi);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < f; ++k)
          for (int j = 0; j < o; ++j) gw[k * o + j] += xv[i * f + k] * go[i * o + j];
    }
    if (t.NeedsGrad(xi)) {
      auto gx = t.MutableGrad(xi);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < f; ++k) {
          float s = 0.0f;
          for (int j = 0; j < o; ++j) s += go[i * o + j] * wv[k * o + j];
          gx[i * f + k] += s;
        }
    }
  });
}

Var GlobalAvgPool(Var x) {
  const Shape& xs = x.shape();
  Require(xs.size() == 4, "global_avg_pool: input must be N x H x W x C");
  const int n = xs[0], c = xs[3];
  const size_t hw = static_cast<size_t>(xs[1]) * xs[2];
  Tensor out({n, c});
  const auto xd = x.value().data();
  for (int i = 0; i < n; ++i) {
    std::vector<double> acc(c, 0.0);
    for (size_t p = 0; p < hw; ++p) {
      const float* src = &xd[(i * hw + p) * c];
      for (int ch = 0; ch < c; ++ch) acc[ch] += src[ch];
    }
    for (int ch = 0; ch < c; ++ch) {
      out[static_cast<size_t>(i) * c + ch] = static_cast<float>(acc[ch] / static_cast<double>(hw));
    }
  }
  const int xi = x.index;
  return x.tape->Record(std::move(out), {xi}, [=](Tape& t, int self) {
    const auto go = t.OutputGrad(self);
    auto gx = t.MutableGrad(xi);
    const float inv = static_cast<float>(1.0 / static_cast<double>(hw));
    for (int i = 0; i < n; ++i)
      for (size_t p = 0; p < hw; ++p)
        for (int ch = 0; ch < c; ++ch) gx[(i * hw + p) * c + ch] += go[i * c + ch] * inv;
  });
}

Var ConcatChannels(Var a, Var b) {
  RequireSameTape(a, b);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  Require(as.size() == bs.size() && !as.empty() &&
              std::equal(as.begin(), as.end() - 1, bs.begin()),
          "concat_channels: shapes " + ShapeString(as) + " and " + ShapeString(bs) +
              " differ outside the channel axis");
  const int ca = as.back(), cb = bs.back();
  Shape os = as;
  os.back() = ca + cb;
  Tensor out(os);
  const size_t rows = a.value().size() / ca;
  const auto ad = a.value().data();
  const auto bd = b.value().data();
  for (size_t r = 0; r < rows; ++r) {
    std::copy_n(&ad[r * ca], ca, &out[r * (ca + cb)]);
    std::copy_n(&bd[r * cb], cb, &out[r * (ca + cb) + ca]);
  }
  const int ai = a.index, bi = b.index;
  return a.tape->Record(std::move(out), {ai, bi}, [=](Tape& t, int self) {
    const auto go = t.OutputGrad(self);
    if (t.NeedsGrad(ai)) {
      auto ga = t.MutableGrad(ai);
      for (size_t r = 0; r < rows; ++r)
        for (int ch = 0; ch < ca; ++ch) ga[r * ca + ch] += go[r * (ca + cb) + ch];
    }
    if (t.NeedsGrad(bi)) {
      auto gb = t.MutableGrad(bi);
      for (size_t r = 0; r < rows; ++r)
        for (int ch = 0; ch < cb; ++ch) gb[r * cb + ch] += go[r * (ca + cb) + ca + ch];
    }
  });
}

Var Sum(Var x) {
  double s = 0.0;
  for (float v : x.value().data()) s += v;
  const int xi = x.index;
  return x.tape->Record(Tensor({1}, {static_cast<float>(s)}), {xi}, [xi](Tape& t, int self) {
    const float g = t.OutputGrad(self)[0];
    for (float& v : t.MutableGrad(xi)) v += g;
  });
}

Var Scale(Var x, float factor) {
  Tensor out = x.value();
  out.DropGrad();
  for (float& v : out.data()) v *= factor;
  const int xi = x.index;
  return x.tape->Record(std::move(out), {xi}, [xi, factor](Tape& t, int self) {
    const auto go = t.OutputGrad(self);
    auto gx = t.MutableGrad(xi);
    for (size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * factor;
  });
}

double BceSoft(double p, double t) {
  p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}

double BceSoftGrad(double p, double t) {
  p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return (p - t) / (p * (1.0 - p));
}

Var BceSoftLoss(Var pred, std::span<const float> targets) {
  const auto pd = pred.value().data();
  Require(pd.size() == targets.size(), "bce: prediction/target length mismatch");
  std::vector<float> tgt(targets.begin(), targets.end());
  double loss = 0.0;
  for (size_t i = 0; i < pd.size(); ++i) loss += BceSoft(pd[i], tgt[i]);
  const double inv_n = 1.0 / static_cast<double>(pd.size());
  const int pi = pred.index;
  return pred.tape->Record(
      Tensor({1}, {static_cast<float>(loss * inv_n)}), {pi},
      [pi, tgt = std::move(tgt), inv_n](Tape& t, int self) {
        const double g = t.OutputGrad(self)[0];
        const auto pv = t.value({&t, pi}).data();
        auto gp = t.MutableGrad(pi);
        for (size_t i = 0; i < gp.size(); ++i) {
          gp[i] += static_cast<float>(g * inv_n * BceSoftGrad(pv[i], tgt[i]));
        }
      });
}

}  // namespace prefiqa::nn
