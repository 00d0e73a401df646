#pragma once

// Dense 64-bit-float tensors with a reverse-mode gradient tape.
//
// Every differentiable op takes the GradGraph it records on as its first
// argument and appends at most one node. Node order is creation order,
// which is a topological order by construction, so backward() walks the
// tape in strict reverse. Tensors are cheap shared handles; data is
// immutable after construction except for gradient accumulation and
// explicit parameter updates between graphs (single writer).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sce/common.hpp"

namespace sce {

using Shape = std::vector<std::size_t>;

inline std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized like data iff requires_grad
  bool requires_grad = false;
};

class Tensor {
public:
  Tensor() : impl_(std::make_shared<TensorImpl>()) {}

  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false)
      : impl_(std::make_shared<TensorImpl>()) {
    if (shape.empty()) throw DataError("Tensor: shape must have at least one dimension");
    for (std::size_t d : shape) {
      if (d == 0) throw DataError("Tensor: zero-sized dimension in " + shape_str(shape));
    }
    if (numel_of(shape) != data.size()) {
      throw DataError("Tensor: shape " + shape_str(shape) + " expects " +
                      std::to_string(numel_of(shape)) + " values, got " +
                      std::to_string(data.size()));
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
    impl_->requires_grad = requires_grad;
    if (requires_grad) impl_->grad.assign(impl_->data.size(), 0.0);
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), 0.0, requires_grad);
  }

  static Tensor full(Shape shape, double value, bool requires_grad = false) {
    std::vector<double> data(numel_of(shape), value);
    return Tensor(std::move(shape), std::move(data), requires_grad);
  }

  static Tensor scalar(double value, bool requires_grad = false) {
    return Tensor({1}, {value}, requires_grad);
  }

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }
  bool requires_grad() const { return impl_->requires_grad; }

  std::span<const double> data() const { return impl_->data; }
  std::span<double> data_mut() { return impl_->data; }
  std::span<const double> grad() const { return impl_->grad; }
  std::span<double> grad_mut() { return impl_->grad; }

  double value() const {
    if (numel() != 1) throw DataError("Tensor::value: not a scalar, shape " + shape_str(shape()));
    return impl_->data[0];
  }

  void zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

  bool all_finite() const {
    for (double v : impl_->data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool same_impl(const Tensor& other) const { return impl_ == other.impl_; }
  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

private:
  std::shared_ptr<TensorImpl> impl_;
};

// Debug dump: one shape header line, then row-major values one per line.
inline void dump(std::ostream& os, const Tensor& t) {
  const auto& shape = t.shape();
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ' ';
    os << shape[i];
  }
  os << '\n';
  char buf[40];
  for (double v : t.data()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf << '\n';
  }
}

// Reverse-mode tape. Nodes are appended in creation order and replayed in
// strict reverse order by backward(). A graph and the tensors recorded on
// it are confined to one logical thread; independent graphs may run in
// parallel with no shared state.
class GradGraph {
public:
  GradGraph() = default;
  GradGraph(const GradGraph&) = delete;
  GradGraph& operator=(const GradGraph&) = delete;

  // Registers an op output with its backward rule. The closure must
  // accumulate (+=) into the grads of the op's inputs.
  void record(const Tensor& output, std::function<void()> backward_fn) {
    nodes_.push_back(Node{output.impl(), std::move(backward_fn)});
  }

  std::size_t size() const { return nodes_.size(); }

  // Propagates d(root)/d(leaf) into every reachable requires_grad leaf.
  // Grads of intermediate node outputs are reset at the start of each
  // call; leaf grads are not, so repeated calls accumulate.
  void backward(const Tensor& root) {
    if (root.numel() != 1) {
      throw DataError("backward: root must be scalar, got shape " + shape_str(root.shape()));
    }
    for (auto& node : nodes_) {
      if (node.output->requires_grad) {
        std::fill(node.output->grad.begin(), node.output->grad.end(), 0.0);
      }
    }
    if (!root.requires_grad()) return;
    root.impl()->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      it->backward_fn();
    }
  }

private:
  struct Node {
    std::shared_ptr<TensorImpl> output;
    std::function<void()> backward_fn;
  };
  std::vector<Node> nodes_;
};

namespace detail {

inline bool any_grad(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// matmul: a[..,p,q] x b[..,q,r] -> [..,p,r]. Batch dims must match exactly,
// or b may be rank 2 and is then shared across the whole batch.

inline Tensor matmul(GradGraph& g, const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) {
    throw DataError("matmul: operands must have rank >= 2, got " + shape_str(sa) + " and " + shape_str(sb));
  }
  const std::size_t p = sa[sa.size() - 2], q = sa[sa.size() - 1];
  const std::size_t qb = sb[sb.size() - 2], r = sb[sb.size() - 1];
  const bool shared_b = sb.size() == 2 && sa.size() > 2;
  if (!shared_b) {
    if (sa.size() != sb.size()) {
      throw DataError("matmul: rank mismatch between " + shape_str(sa) + " and " + shape_str(sb));
    }
    for (std::size_t i = 0; i + 2 < sa.size(); ++i) {
      if (sa[i] != sb[i]) {
        throw DataError("matmul: batch dims differ between " + shape_str(sa) + " and " + shape_str(sb));
      }
    }
  }
  if (q != qb) {
    throw DataError("matmul: inner dims differ between " + shape_str(sa) + " and " + shape_str(sb));
  }

  Shape out_shape(sa.begin(), sa.end() - 1);
  out_shape.push_back(r);
  const std::size_t batch = numel_of(sa) / (p * q);
  std::vector<double> out(batch * p * r, 0.0);

  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* ab = ad + n * p * q;
    const double* bb = shared_b ? bd : bd + n * q * r;
    double* ob = out.data() + n * p * r;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t k = 0; k < q; ++k) {
        const double aik = ab[i * q + k];
        const double* brow = bb + k * r;
        double* orow = ob + i * r;
        for (std::size_t j = 0; j < r; ++j) orow[j] += aik * brow[j];
      }
    }
  }

  Tensor result(std::move(out_shape), std::move(out), detail::any_grad({&a, &b}));
  if (result.requires_grad()) {
    auto ai = a.impl(), bi = b.impl(), oi = result.impl();
    g.record(result, [ai, bi, oi, batch, p, q, r, shared_b]() {
      const double* gd = oi->grad.data();
      for (std::size_t n = 0; n < batch; ++n) {
        const double* gb = gd + n * p * r;
        const double* ab = ai->data.data() + n * p * q;
        const double* bb = shared_b ? bi->data.data() : bi->data.data() + n * q * r;
        if (ai->requires_grad) {
          double* da = ai->grad.data() + n * p * q;
          for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = 0; k < q; ++k) {
              const double* grow = gb + i * r;
              const double* brow = bb + k * r;
              double acc = 0.0;
              for (std::size_t j = 0; j < r; ++j) acc += grow[j] * brow[j];
              da[i * q + k] += acc;
            }
          }
        }
        if (bi->requires_grad) {
          double* db = shared_b ? bi->grad.data() : bi->grad.data() + n * q * r;
          for (std::size_t i = 0; i < p; ++i) {
            const double* grow = gb + i * r;
            for (std::size_t k = 0; k < q; ++k) {
              const double aik = ab[i * q + k];
              double* drow = db + k * r;
              for (std::size_t j = 0; j < r; ++j) drow[j] += aik * grow[j];
            }
          }
        }
      }
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// softmax along an axis, computed with max subtraction.

inline Tensor softmax(GradGraph& g, const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DataError("softmax: axis " + std::to_string(axis) + " out of range for shape " + shape_str(x.shape()));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];

  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, xd[base + i * inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double e = std::exp(xd[base + i * inner] - mx);
        out[base + i * inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < len; ++i) out[base + i * inner] /= z;
    }
  }

  Tensor result(s, std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, outer, len, inner]() {
      const double* y = oi->data.data();
      const double* gy = oi->grad.data();
      double* gx = xi->grad.data();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * len * inner + in;
          double dot = 0.0;
          for (std::size_t i = 0; i < len; ++i) dot += gy[base + i * inner] * y[base + i * inner];
          for (std::size_t i = 0; i < len; ++i) {
            const std::size_t idx = base + i * inner;
            gx[idx] += y[idx] * (gy[idx] - dot);
          }
        }
      }
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// layer_norm over the last axis: per row, normalize to mean 0 / variance 1
// (population variance, eps inside the sqrt), then gamma * xhat + beta.

inline Tensor layer_norm(GradGraph& g, const Tensor& x, const Tensor& gamma,
                         const Tensor& beta, double eps) {
  if (eps <= 0.0) throw DataError("layer_norm: eps must be positive");
  const std::size_t d = x.shape().back();
  if (gamma.rank() != 1 || gamma.dim(0) != d || beta.rank() != 1 || beta.dim(0) != d) {
    throw DataError("layer_norm: gamma/beta must be [" + std::to_string(d) + "], got " +
                    shape_str(gamma.shape()) + " and " + shape_str(beta.shape()));
  }
  const std::size_t rows = x.numel() / d;

  std::vector<double> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_sigma(rows);
  const double* xd = x.data().data();
  const double* gd = gamma.data().data();
  const double* bd = beta.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += row[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = row[i] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[r] = is;
    for (std::size_t i = 0; i < d; ++i) {
      const double xh = (row[i] - mean) * is;
      xhat[r * d + i] = xh;
      out[r * d + i] = gd[i] * xh + bd[i];
    }
  }

  Tensor result(x.shape(), std::move(out), detail::any_grad({&x, &gamma, &beta}));
  if (result.requires_grad()) {
    auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl(), oi = result.impl();
    g.record(result, [xi, gi, bi, oi, rows, d, xhat = std::move(xhat),
                      inv_sigma = std::move(inv_sigma)]() {
      const double* gy = oi->grad.data();
      const double* gam = gi->data.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* grow = gy + r * d;
        const double* xh = xhat.data() + r * d;
        if (bi->requires_grad) {
          double* db = bi->grad.data();
          for (std::size_t i = 0; i < d; ++i) db[i] += grow[i];
        }
        if (gi->requires_grad) {
          double* dg = gi->grad.data();
          for (std::size_t i = 0; i < d; ++i) dg[i] += grow[i] * xh[i];
        }
        if (xi->requires_grad) {
          double sum_h = 0.0, sum_hx = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const double h = grow[i] * gam[i];
            sum_h += h;
            sum_hx += h * xh[i];
          }
          const double mh = sum_h / static_cast<double>(d);
          const double mhx = sum_hx / static_cast<double>(d);
          double* dx = xi->grad.data() + r * d;
          for (std::size_t i = 0; i < d; ++i) {
            const double h = grow[i] * gam[i];
            dx[i] += inv_sigma[r] * (h - mh - xh[i] * mhx);
          }
        }
      }
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// conv1d: valid (no padding), stride 1.
// out[i,o,j] = b[o] + sum_{c,u} x[i,c,j+u] * w[o,c,u]

inline Tensor conv1d(GradGraph& g, const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 3 || w.rank() != 3 || b.rank() != 1) {
    throw DataError("conv1d: expected x[n,c_in,t], w[c_out,c_in,k], b[c_out], got " +
                    shape_str(x.shape()) + ", " + shape_str(w.shape()) + ", " + shape_str(b.shape()));
  }
  const std::size_t n = x.dim(0), ci = x.dim(1), t = x.dim(2);
  const std::size_t co = w.dim(0), k = w.dim(2);
  if (w.dim(1) != ci) {
    throw DataError("conv1d: input channels differ, x " + shape_str(x.shape()) + " vs w " + shape_str(w.shape()));
  }
  if (b.dim(0) != co) {
    throw DataError("conv1d: bias size " + shape_str(b.shape()) + " vs " + std::to_string(co) + " output channels");
  }
  if (t < k) {
    throw DataError("conv1d: sequence too short, length " + std::to_string(t) +
                    " < kernel " + std::to_string(k));
  }
  const std::size_t to = t - k + 1;

  std::vector<double> out(n * co * to);
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* bd = b.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < co; ++o) {
      double* orow = out.data() + (i * co + o) * to;
      for (std::size_t j = 0; j < to; ++j) orow[j] = bd[o];
      for (std::size_t c = 0; c < ci; ++c) {
        const double* xrow = xd + (i * ci + c) * t;
        const double* wrow = wd + (o * ci + c) * k;
        for (std::size_t u = 0; u < k; ++u) {
          const double wv = wrow[u];
          for (std::size_t j = 0; j < to; ++j) orow[j] += wv * xrow[j + u];
        }
      }
    }
  }

  Tensor result({n, co, to}, std::move(out), detail::any_grad({&x, &w, &b}));
  if (result.requires_grad()) {
    auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = result.impl();
    g.record(result, [xi, wi, bi, oi, n, ci, t, co, k, to]() {
      const double* gy = oi->grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < co; ++o) {
          const double* grow = gy + (i * co + o) * to;
          if (bi->requires_grad) {
            double acc = 0.0;
            for (std::size_t j = 0; j < to; ++j) acc += grow[j];
            bi->grad[o] += acc;
          }
          for (std::size_t c = 0; c < ci; ++c) {
            const double* xrow = xi->data.data() + (i * ci + c) * t;
            const double* wrow = wi->data.data() + (o * ci + c) * k;
            for (std::size_t u = 0; u < k; ++u) {
              if (wi->requires_grad) {
                double acc = 0.0;
                for (std::size_t j = 0; j < to; ++j) acc += grow[j] * xrow[j + u];
                wi->grad[(o * ci + c) * k + u] += acc;
              }
              if (xi->requires_grad) {
                const double wv = wrow[u];
                double* dxrow = xi->grad.data() + (i * ci + c) * t;
                for (std::size_t j = 0; j < to; ++j) dxrow[j + u] += wv * grow[j];
              }
            }
          }
        }
      }
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// global_maxpool1d: max over the time axis of x[n,c,t] -> [n,c,1]. The
// gradient goes to the first maximal position only.

inline Tensor global_maxpool1d(GradGraph& g, const Tensor& x) {
  if (x.rank() != 3) {
    throw DataError("global_maxpool1d: expected x[n,c,t], got " + shape_str(x.shape()));
  }
  const std::size_t n = x.dim(0), c = x.dim(1), t = x.dim(2);
  std::vector<double> out(n * c);
  std::vector<std::size_t> argmax(n * c);
  const double* xd = x.data().data();
  for (std::size_t r = 0; r < n * c; ++r) {
    const double* row = xd + r * t;
    std::size_t best = 0;
    for (std::size_t j = 1; j < t; ++j) {
      if (row[j] > row[best]) best = j;
    }
    out[r] = row[best];
    argmax[r] = best;
  }

  Tensor result({n, c, 1}, std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, t, argmax = std::move(argmax)]() {
      const double* gy = oi->grad.data();
      double* gx = xi->grad.data();
      for (std::size_t r = 0; r < argmax.size(); ++r) {
        gx[r * t + argmax[r]] += gy[r];
      }
    });
  }
  return result;
}

// ---------------------------------------------------------------------------
// Elementwise and structural ops.

inline Tensor relu(GradGraph& g, const Tensor& x) {
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  Tensor result(x.shape(), std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi]() {
      for (std::size_t i = 0; i < xi->grad.size(); ++i) {
        if (xi->data[i] > 0.0) xi->grad[i] += oi->grad[i];
      }
    });
  }
  return result;
}

inline Tensor add(GradGraph& g, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DataError("add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<double> out(a.numel());
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  Tensor result(a.shape(), std::move(out), detail::any_grad({&a, &b}));
  if (result.requires_grad()) {
    auto ai = a.impl(), bi = b.impl(), oi = result.impl();
    g.record(result, [ai, bi, oi]() {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) {
        if (ai->requires_grad) ai->grad[i] += oi->grad[i];
        if (bi->requires_grad) bi->grad[i] += oi->grad[i];
      }
    });
  }
  return result;
}

inline Tensor mul(GradGraph& g, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DataError("mul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<double> out(a.numel());
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  Tensor result(a.shape(), std::move(out), detail::any_grad({&a, &b}));
  if (result.requires_grad()) {
    auto ai = a.impl(), bi = b.impl(), oi = result.impl();
    g.record(result, [ai, bi, oi]() {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) {
        if (ai->requires_grad) ai->grad[i] += oi->grad[i] * bi->data[i];
        if (bi->requires_grad) bi->grad[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return result;
}

inline Tensor scale(GradGraph& g, const Tensor& x, double c) {
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * xd[i];
  Tensor result(x.shape(), std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, c]() {
      for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += c * oi->grad[i];
    });
  }
  return result;
}

inline Tensor transpose_last2(GradGraph& g, const Tensor& x) {
  if (x.rank() < 2) {
    throw DataError("transpose_last2: rank must be >= 2, got " + shape_str(x.shape()));
  }
  const Shape& s = x.shape();
  const std::size_t p = s[s.size() - 2], q = s[s.size() - 1];
  const std::size_t batch = x.numel() / (p * q);
  Shape out_shape = s;
  std::swap(out_shape[out_shape.size() - 2], out_shape[out_shape.size() - 1]);

  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xb = xd + n * p * q;
    double* ob = out.data() + n * p * q;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < q; ++j) ob[j * p + i] = xb[i * q + j];
    }
  }

  Tensor result(std::move(out_shape), std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, batch, p, q]() {
      for (std::size_t n = 0; n < batch; ++n) {
        const double* gb = oi->grad.data() + n * p * q;
        double* db = xi->grad.data() + n * p * q;
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < q; ++j) db[i * q + j] += gb[j * p + i];
        }
      }
    });
  }
  return result;
}

// gather_rows: row lookup table[v,d] by ids; output shape prefix + [d].
inline Tensor gather_rows(GradGraph& g, const Tensor& table,
                          const std::vector<std::int32_t>& ids, Shape prefix) {
  if (table.rank() != 2) {
    throw DataError("gather_rows: table must be [v,d], got " + shape_str(table.shape()));
  }
  if (numel_of(prefix) != ids.size()) {
    throw DataError("gather_rows: prefix shape " + shape_str(prefix) + " does not cover " +
                    std::to_string(ids.size()) + " ids");
  }
  const std::size_t v = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  const double* td = table.data().data();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const std::int32_t id = ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw DataError("gather_rows: id " + std::to_string(id) + " out of range [0," + std::to_string(v) + ")");
    }
    std::copy_n(td + static_cast<std::size_t>(id) * d, d, out.data() + r * d);
  }
  Shape out_shape = std::move(prefix);
  out_shape.push_back(d);

  Tensor result(std::move(out_shape), std::move(out), table.requires_grad());
  if (result.requires_grad()) {
    auto ti = table.impl(), oi = result.impl();
    g.record(result, [ti, oi, d, ids]() {
      for (std::size_t r = 0; r < ids.size(); ++r) {
        const double* grow = oi->grad.data() + r * d;
        double* trow = ti->grad.data() + static_cast<std::size_t>(ids[r]) * d;
        for (std::size_t i = 0; i < d; ++i) trow[i] += grow[i];
      }
    });
  }
  return result;
}

// linear: affine map over the last axis, x[..,in] * W[in,out] + b[out].
inline Tensor linear(GradGraph& g, const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2 || b.rank() != 1) {
    throw DataError("linear: expected W[in,out] and b[out], got " + shape_str(w.shape()) +
                    " and " + shape_str(b.shape()));
  }
  const std::size_t in = w.dim(0), out_dim = w.dim(1);
  if (x.shape().back() != in) {
    throw DataError("linear: input dim " + shape_str(x.shape()) + " vs W " + shape_str(w.shape()));
  }
  if (b.dim(0) != out_dim) {
    throw DataError("linear: bias " + shape_str(b.shape()) + " vs W " + shape_str(w.shape()));
  }
  const std::size_t rows = x.numel() / in;

  std::vector<double> out(rows * out_dim);
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* bd = b.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = out.data() + r * out_dim;
    std::copy_n(bd, out_dim, orow);
    const double* xrow = xd + r * in;
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xrow[k];
      const double* wrow = wd + k * out_dim;
      for (std::size_t o = 0; o < out_dim; ++o) orow[o] += xv * wrow[o];
    }
  }
  Shape out_shape = x.shape();
  out_shape.back() = out_dim;

  Tensor result(std::move(out_shape), std::move(out), detail::any_grad({&x, &w, &b}));
  if (result.requires_grad()) {
    auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = result.impl();
    g.record(result, [xi, wi, bi, oi, rows, in, out_dim]() {
      const double* gy = oi->grad.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* grow = gy + r * out_dim;
        const double* xrow = xi->data.data() + r * in;
        if (bi->requires_grad) {
          for (std::size_t o = 0; o < out_dim; ++o) bi->grad[o] += grow[o];
        }
        if (wi->requires_grad) {
          for (std::size_t k = 0; k < in; ++k) {
            const double xv = xrow[k];
            double* dwrow = wi->grad.data() + k * out_dim;
            for (std::size_t o = 0; o < out_dim; ++o) dwrow[o] += xv * grow[o];
          }
        }
        if (xi->requires_grad) {
          double* dxrow = xi->grad.data() + r * in;
          for (std::size_t k = 0; k < in; ++k) {
            const double* wrow = wi->data.data() + k * out_dim;
            double acc = 0.0;
            for (std::size_t o = 0; o < out_dim; ++o) acc += grow[o] * wrow[o];
            dxrow[k] += acc;
          }
        }
      }
    });
  }
  return result;
}

// Adds m[t,d] to every batch slice of x[n,t,d].
inline Tensor broadcast_add_rows(GradGraph& g, const Tensor& x, const Tensor& m) {
  if (x.rank() != 3 || m.rank() != 2 || x.dim(1) != m.dim(0) || x.dim(2) != m.dim(1)) {
    throw DataError("broadcast_add_rows: expected x[n,t,d] and m[t,d], got " +
                    shape_str(x.shape()) + " and " + shape_str(m.shape()));
  }
  const std::size_t n = x.dim(0), td = m.numel();
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  const double* md = m.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < td; ++j) out[i * td + j] = xd[i * td + j] + md[j];
  }
  Tensor result(x.shape(), std::move(out), detail::any_grad({&x, &m}));
  if (result.requires_grad()) {
    auto xi = x.impl(), mi = m.impl(), oi = result.impl();
    g.record(result, [xi, mi, oi, n, td]() {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < td; ++j) {
          const double gv = oi->grad[i * td + j];
          if (xi->requires_grad) xi->grad[i * td + j] += gv;
          if (mi->requires_grad) mi->grad[j] += gv;
        }
      }
    });
  }
  return result;
}

// Scales each feature vector x[i,j,:] by s[i,j]. Used with a 0/1 mask to
// neutralize padding positions.
inline Tensor row_scale(GradGraph& g, const Tensor& x, const Tensor& s) {
  if (x.rank() != 3 || s.rank() != 2 || x.dim(0) != s.dim(0) || x.dim(1) != s.dim(1)) {
    throw DataError("row_scale: expected x[n,t,d] and s[n,t], got " +
                    shape_str(x.shape()) + " and " + shape_str(s.shape()));
  }
  const std::size_t rows = s.numel(), d = x.dim(2);
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  const double* sd = s.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double sv = sd[r];
    for (std::size_t i = 0; i < d; ++i) out[r * d + i] = sv * xd[r * d + i];
  }
  Tensor result(x.shape(), std::move(out), detail::any_grad({&x, &s}));
  if (result.requires_grad()) {
    auto xi = x.impl(), si = s.impl(), oi = result.impl();
    g.record(result, [xi, si, oi, rows, d]() {
      for (std::size_t r = 0; r < rows; ++r) {
        const double sv = si->data[r];
        for (std::size_t i = 0; i < d; ++i) {
          const double gv = oi->grad[r * d + i];
          if (xi->requires_grad) xi->grad[r * d + i] += sv * gv;
          if (si->requires_grad) si->grad[r] += gv * xi->data[r * d + i];
        }
      }
    });
  }
  return result;
}

// Adds mask[n,tk] to every (head, query) slice of scores[n,h,tq,tk];
// the mask carries -inf at padded key positions.
inline Tensor add_key_mask(GradGraph& g, const Tensor& scores, const Tensor& mask) {
  if (scores.rank() != 4 || mask.rank() != 2 || scores.dim(0) != mask.dim(0) ||
      scores.dim(3) != mask.dim(1)) {
    throw DataError("add_key_mask: expected scores[n,h,tq,tk] and mask[n,tk], got " +
                    shape_str(scores.shape()) + " and " + shape_str(mask.shape()));
  }
  const std::size_t n = scores.dim(0), h = scores.dim(1), tq = scores.dim(2), tk = scores.dim(3);
  std::vector<double> out(scores.numel());
  const double* sd = scores.data().data();
  const double* md = mask.data().data();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* mrow = md + i * tk;
    for (std::size_t a = 0; a < h * tq; ++a) {
      for (std::size_t j = 0; j < tk; ++j, ++idx) out[idx] = sd[idx] + mrow[j];
    }
  }
  Tensor result(scores.shape(), std::move(out), scores.requires_grad());
  if (result.requires_grad()) {
    auto si = scores.impl(), oi = result.impl();
    g.record(result, [si, oi]() {
      for (std::size_t i = 0; i < si->grad.size(); ++i) si->grad[i] += oi->grad[i];
    });
  }
  return result;
}

// [n,t,d] -> [n,h,t,d/h]
inline Tensor split_heads(GradGraph& g, const Tensor& x, std::size_t heads) {
  if (x.rank() != 3) throw DataError("split_heads: expected x[n,t,d], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), t = x.dim(1), d = x.dim(2);
  if (heads == 0 || d % heads != 0) {
    throw DataError("split_heads: hidden dim " + std::to_string(d) + " not divisible by " +
                    std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t j = 0; j < t; ++j) {
        const double* src = xd + (i * t + j) * d + h * dh;
        double* dst = out.data() + ((i * heads + h) * t + j) * dh;
        std::copy_n(src, dh, dst);
      }
    }
  }
  Tensor result({n, heads, t, dh}, std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, n, heads, t, d, dh]() {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t j = 0; j < t; ++j) {
            const double* src = oi->grad.data() + ((i * heads + h) * t + j) * dh;
            double* dst = xi->grad.data() + (i * t + j) * d + h * dh;
            for (std::size_t k = 0; k < dh; ++k) dst[k] += src[k];
          }
        }
      }
    });
  }
  return result;
}

// [n,h,t,dh] -> [n,t,h*dh]
inline Tensor merge_heads(GradGraph& g, const Tensor& x) {
  if (x.rank() != 4) throw DataError("merge_heads: expected x[n,h,t,dh], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), heads = x.dim(1), t = x.dim(2), dh = x.dim(3);
  const std::size_t d = heads * dh;
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t j = 0; j < t; ++j) {
        const double* src = xd + ((i * heads + h) * t + j) * dh;
        double* dst = out.data() + (i * t + j) * d + h * dh;
        std::copy_n(src, dh, dst);
      }
    }
  }
  Tensor result({n, t, d}, std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi, n, heads, t, d, dh]() {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t j = 0; j < t; ++j) {
            const double* src = oi->grad.data() + (i * t + j) * d + h * dh;
            double* dst = xi->grad.data() + ((i * heads + h) * t + j) * dh;
            for (std::size_t k = 0; k < dh; ++k) dst[k] += src[k];
          }
        }
      }
    });
  }
  return result;
}

// Drops a trailing dimension of size 1 ([..,1] -> [..]).
inline Tensor squeeze_last(GradGraph& g, const Tensor& x) {
  if (x.rank() < 2 || x.shape().back() != 1) {
    throw DataError("squeeze_last: last dim must be 1, got " + shape_str(x.shape()));
  }
  Shape out_shape(x.shape().begin(), x.shape().end() - 1);
  std::vector<double> out(x.data().begin(), x.data().end());
  Tensor result(std::move(out_shape), std::move(out), x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi]() {
      for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += oi->grad[i];
    });
  }
  return result;
}

inline Tensor sum_all(GradGraph& g, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result({1}, {total}, x.requires_grad());
  if (result.requires_grad()) {
    auto xi = x.impl(), oi = result.impl();
    g.record(result, [xi, oi]() {
      const double gv = oi->grad[0];
      for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += gv;
    });
  }
  return result;
}

// Mean two-class cross-entropy on logits[n,2] with labels in {0,1},
// stabilized through log-sum-exp. Strictly positive unless the prediction
// is exact.
inline Tensor bce_with_logits(GradGraph& g, const Tensor& logits,
                              const std::vector<int>& labels) {
  if (logits.rank() != 2 || logits.dim(1) != 2) {
    throw DataError("bce_with_logits: expected logits[n,2], got " + shape_str(logits.shape()));
  }
  const std::size_t n = logits.dim(0);
  if (labels.size() != n) {
    throw DataError("bce_with_logits: " + std::to_string(n) + " rows vs " +
                    std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("bce_with_logits: labels must be 0 or 1, got " + std::to_string(y));
  }
  const double* ld = logits.data().data();
  std::vector<double> lse(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l0 = ld[i * 2], l1 = ld[i * 2 + 1];
    const double m = std::max(l0, l1);
    lse[i] = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    total += lse[i] - ld[i * 2 + labels[i]];
  }
  total /= static_cast<double>(n);

  Tensor result({1}, {total}, logits.requires_grad());
  if (result.requires_grad()) {
    auto li = logits.impl(), oi = result.impl();
    g.record(result, [li, oi, n, labels, lse = std::move(lse)]() {
      const double gv = oi->grad[0] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          const double p = std::exp(li->data[i * 2 + j] - lse[i]);
          const double ind = (static_cast<std::size_t>(labels[i]) == j) ? 1.0 : 0.0;
          li->grad[i * 2 + j] += gv * (p - ind);
        }
      }
    });
  }
  return result;
}

}  // namespace sce
