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

// Independent double-precision reference implementations used by the unit
// and acceptance tests. Nothing here calls into the library's numeric code.

#ifndef PREFIQA_TESTS_ORACLES_HPP_
#define PREFIQA_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

// splitmix64, written out from the published constants.
struct SplitMix {
  uint64_t s;
  uint64_t next() {
    uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
};

// ---- SSIM by direct summation over a non-separable 11x11 window ----------

inline std::array<std::array<double, 11>, 11> GaussWindow2d() {
  std::array<std::array<double, 11>, 11> w{};
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      const double r2 = (i - 5) * (i - 5) + (j - 5) * (j - 5);
      w[i][j] = std::exp(-r2 / (2.0 * 1.5 * 1.5));
      total += w[i][j];
    }
  }
  for (auto& row : w) {
    for (double& e : row) e /= total;
  }
  return w;
}

struct SsimParts {
  double l = 0.0;    // mean luminance term
  double cs = 0.0;   // mean contrast-structure term
  double ssim = 0.0; // mean of l * cs
};

inline SsimParts SsimDirect(const Plane& a, const Plane& b) {
  static const auto win = GaussWindow2d();
  const double c1 = std::pow(0.01 * 255.0, 2), c2 = std::pow(0.03 * 255.0, 2);
  SsimParts out;
  long count = 0;
  for (int y = 0; y + 11 <= a.h; ++y) {
    for (int x = 0; x + 11 <= a.w; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
          const double wt = win[i][j];
          const double pa = a.at(x + j, y + i), pb = b.at(x + j, y + i);
          ma += wt * pa;
          mb += wt * pb;
          saa += wt * pa * pa;
          sbb += wt * pb * pb;
          sab += wt * pa * pb;
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      const double l = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      const double cs = (2 * cov + c2) / (va + vb + c2);
      out.l += l;
      out.cs += cs;
      out.ssim += l * cs;
      ++count;
    }
  }
  out.l /= count;
  out.cs /= count;
  out.ssim /= count;
  return out;
}

inline Plane Halve(const Plane& p) {
  Plane q;
  q.w = p.w / 2;
  q.h = p.h / 2;
  q.v.resize(static_cast<size_t>(q.w) * q.h);
  for (int y = 0; y < q.h; ++y) {
    for (int x = 0; x < q.w; ++x) {
      q.v[static_cast<size_t>(y) * q.w + x] =
          0.25 * (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) + p.at(2 * x, 2 * y + 1) +
                  p.at(2 * x + 1, 2 * y + 1));
    }
  }
  return q;
}

// Every scale recomputed from scratch: scale j is obtained by j independent
// halvings of the originals.
inline double MsSsimDirect(const Plane& a, const Plane& b) {
  constexpr double kW[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double result = 1.0;
  for (int j = 0; j < 5; ++j) {
    Plane sa = a, sb = b;
    for (int k = 0; k < j; ++k) {
      sa = Halve(sa);
      sb = Halve(sb);
    }
    const SsimParts s = SsimDirect(sa, sb);
    result *= std::pow(std::max(s.cs, 0.0), kW[j]);
    if (j == 4) result *= std::pow(s.l, kW[j]);
  }
  return result;
}

// ---- JPEG block path ------------------------------------------------------

using Block = std::array<double, 64>;

inline Block Dct(const Block& f) {
  Block out{};
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          s += f[y * 8 + x] * std::cos((2 * x + 1) * u * std::numbers::pi / 16) *
               std::cos((2 * y + 1) * v * std::numbers::pi / 16);
        }
      }
      const double au = u == 0 ? 1 / std::sqrt(2.0) : 1.0;
      const double av = v == 0 ? 1 / std::sqrt(2.0) : 1.0;
      out[v * 8 + u] = 0.25 * au * av * s;
    }
  }
  return out;
}

inline Block Idct(const Block& c) {
  Block out{};
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
          const double au = u == 0 ? 1 / std::sqrt(2.0) : 1.0;
          const double av = v == 0 ? 1 / std::sqrt(2.0) : 1.0;
          s += au * av * c[v * 8 + u] * std::cos((2 * x + 1) * u * std::numbers::pi / 16) *
               std::cos((2 * y + 1) * v * std::numbers::pi / 16);
        }
      }
      out[y * 8 + x] = 0.25 * s;
    }
  }
  return out;
}

// IJG scaling written out from its definition.
inline std::array<int, 64> ScaleTable(const std::array<int, 64>& base, int q) {
  const int s = q < 50 ? 5000 / q : 200 - 2 * q;
  std::array<int, 64> t{};
  for (int i = 0; i < 64; ++i) t[i] = std::clamp((base[i] * s + 50) / 100, 1, 255);
  return t;
}

// Samples in [0, 255] -> level shift, DCT, quantize (half away from zero),
// dequantize, IDCT, unshift.
inline Block BlockRoundTrip(const Block& samples, const std::array<int, 64>& table) {
  Block shifted{};
  for (int i = 0; i < 64; ++i) shifted[i] = samples[i] - 128.0;
  Block c = Dct(shifted);
  for (int i = 0; i < 64; ++i) {
    const double r = c[i] / table[i];
    const double q = r < 0 ? -std::floor(-r + 0.5) : std::floor(r + 0.5);
    c[i] = q * table[i];
  }
  Block out = Idct(c);
  for (double& v : out) v += 128.0;
  return out;
}

// ---- rank statistics ------------------------------------------------------

// Rank of each element by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double e : v) {
      if (e < v[i]) ++less;
      if (e == v[i]) ++equal;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double PearsonTwoPass(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

inline double SpearmanByCounting(const std::vector<double>& x, const std::vector<double>& y) {
  return PearsonTwoPass(Ranks(x), Ranks(y));
}

// ---- network layers in double ---------------------------------------------

// NHWC tensor.
struct T4 {
  int n = 1, h = 1, w = 1, c = 1;
  std::vector<double> v;
  T4() = default;
  T4(int n_, int h_, int w_, int c_) : n(n_), h(h_), w(w_), c(c_), v(size_t(n_) * h_ * w_ * c_) {}
  double& at(int i, int y, int x, int k) { return v[((size_t(i) * h + y) * w + x) * c + k]; }
  double at(int i, int y, int x, int k) const {
    return v[((size_t(i) * h + y) * w + x) * c + k];
  }
};

// Cross-correlation with TensorFlow 'same' (pad bottom/right first) or
// 'valid' padding. weights: K x K x Cin x Cout row-major.
inline T4 Conv(const T4& x, const std::vector<double>& wts, const std::vector<double>& bias,
               int k, int cout, int stride, bool same) {
  int oh, ow, pt = 0, pl = 0;
  if (same) {
    oh = (x.h + stride - 1) / stride;
    ow = (x.w + stride - 1) / stride;
    pt = std::max((oh - 1) * stride + k - x.h, 0) / 2;
    pl = std::max((ow - 1) * stride + k - x.w, 0) / 2;
  } else {
    oh = (x.h - k) / stride + 1;
    ow = (x.w - k) / stride + 1;
  }
  T4 out(x.n, oh, ow, cout);
  for (int i = 0; i < x.n; ++i) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int co = 0; co < cout; ++co) {
          double s = bias[co];
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy * stride + ky - pt, ix = ox * stride + kx - pl;
              if (iy < 0 || ix < 0 || iy >= x.h || ix >= x.w) continue;
              for (int ci = 0; ci < x.c; ++ci) {
                s += x.at(i, iy, ix, ci) * wts[((size_t(ky) * k + kx) * x.c + ci) * cout + co];
              }
            }
          }
          out.at(i, oy, ox, co) = s;
        }
      }
    }
  }
  return out;
}

// Sign pattern of ReLU inputs, to detect finite differences that straddle a
// kink.
struct KinkTrace {
  uint64_t hash = 1469598103934665603ull;
  void add(bool positive) { hash = (hash ^ (positive ? 0x9Bu : 0x3Cu)) * 1099511628211ull; }
};

inline T4 Relu(T4 x, KinkTrace* trace = nullptr) {
  for (double& e : x.v) {
    if (trace) trace->add(e > 0);
    e = e > 0 ? e : 0;
  }
  return x;
}

inline double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline T4 Gap(const T4& x) {
  T4 out(x.n, 1, 1, x.c);
  for (int i = 0; i < x.n; ++i) {
    for (int k = 0; k < x.c; ++k) {
      double s = 0;
      for (int y = 0; y < x.h; ++y) {
        for (int xx = 0; xx < x.w; ++xx) s += x.at(i, y, xx, k);
      }
      out.at(i, 0, 0, k) = s / (x.h * x.w);
    }
  }
  return out;
}

inline T4 Concat(const T4& a, const T4& b) {
  T4 out(a.n, a.h, a.w, a.c + b.c);
  for (int i = 0; i < a.n; ++i) {
    for (int y = 0; y < a.h; ++y) {
      for (int x = 0; x < a.w; ++x) {
        for (int k = 0; k < a.c; ++k) out.at(i, y, x, k) = a.at(i, y, x, k);
        for (int k = 0; k < b.c; ++k) out.at(i, y, x, a.c + k) = b.at(i, y, x, k);
      }
    }
  }
  return out;
}

inline double Bce(double p, double t) {
  const double eps = 1e-7;
  p = std::clamp(p, eps, 1 - eps);
  return -(t * std::log(p) + (1 - t) * std::log(1 - p));
}

// Central difference of f at x[i] with step h.
template <typename F>
double CentralDifference(F&& f, std::vector<double>& x, size_t i, double h = 1e-3) {
  const double keep = x[i];
  x[i] = keep + h;
  const double up = f();
  x[i] = keep - h;
  const double down = f();
  x[i] = keep;
  return (up - down) / (2 * h);
}

}  // namespace oracle

#endif  // PREFIQA_TESTS_ORACLES_HPP_
