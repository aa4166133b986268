// Copyright 2026 The Facelight Authors
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

#include "facelight/ad.hpp"

#include "facelight/core.hpp"
#include "facelight/numerics.hpp"
#include "facelight/sh.hpp"

#include <algorithm>
#include <sstream>

namespace facelight::ad {

// ---------------------------------------------------------------------------
// Graph

Node Graph::push(Entry e) {
  nodes_.push_back(std::move(e));
  return Node(this, static_cast<int>(nodes_.size()) - 1);
}

Node Graph::constant(Array value) {
  Entry e;
  e.value = std::move(value);
  return push(std::move(e));
}

Node Graph::constant(double value) { return constant(Array::Constant(1, 1, value)); }

Node Graph::variable(Array value) {
  Entry e;
  e.value = std::move(value);
  e.needs_grad = requires_grad_;
  e.keep_grad = true;
  return push(std::move(e));
}

Node Graph::parameter(const ParamTape& tape, ParamSlice slice, Index rows, Index cols) {
  if (rows * cols != slice.size) throw DomainError("Graph::parameter: shape does not match slice");
  Entry e;
  e.value = Eigen::Map<const Array>(tape.values().data() + slice.offset, rows, cols);
  e.param_offset = slice.offset;
  e.needs_grad = requires_grad_;
  return push(std::move(e));
}

Node Graph::make(Array value, std::initializer_list<Node> parents, BackwardFn backward) {
  return make(std::move(value), std::span<const Node>(parents.begin(), parents.size()), std::move(backward));
}

Node Graph::make(Array value, std::span<const Node> parents, BackwardFn backward) {
  Entry e;
  e.value = std::move(value);
  if (requires_grad_) {
    for (const Node& p : parents) {
      if (needs_grad(p.id())) {
        e.needs_grad = true;
        break;
      }
    }
  }
  if (e.needs_grad) e.backward = std::move(backward);
  return push(std::move(e));
}

void Graph::accumulate(int id, const Array& grad) {
  Entry& e = nodes_[static_cast<std::size_t>(id)];
  if (!e.needs_grad) return;
  if (e.grad.size() == 0) {
    e.grad = grad;
  } else {
    e.grad += grad;
  }
}

void Graph::backward(const Node& loss, Eigen::Ref<Eigen::VectorXd> param_grad) {
  if (loss.rows() != 1 || loss.cols() != 1) throw DomainError("Graph::backward: loss must be 1x1");
  for (auto& e : nodes_) e.grad.resize(0, 0);
  if (!needs_grad(loss.id())) return;
  nodes_[static_cast<std::size_t>(loss.id())].grad = Array::Ones(1, 1);
  for (int i = loss.id(); i >= 0; --i) {
    Entry& e = nodes_[static_cast<std::size_t>(i)];
    if (e.grad.size() == 0) continue;
    if (e.param_offset >= 0) {
      if (param_grad.size() > 0) {
        param_grad.segment(e.param_offset, e.grad.size()) += Eigen::Map<const Eigen::VectorXd>(e.grad.data(), e.grad.size());
      }
    } else if (e.backward) {
      e.backward(*this, i, e.grad);
    }
    if (!e.keep_grad) e.grad.resize(0, 0);
  }
}

void Graph::backward(const Node& loss) {
  Eigen::VectorXd none;
  backward(loss, none);
}

// ---------------------------------------------------------------------------
// Broadcasting helpers

namespace {

Index broadcast_dim(Index a, Index b, const char* what) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  std::ostringstream os;
  os << "ad: incompatible " << what << " " << a << " vs " << b;
  throw DomainError(os.str());
}

Array expand(const Array& a, Index r, Index c) {
  if (a.rows() == r && a.cols() == c) return a;
  if (a.rows() == 1 && a.cols() == 1) return Array::Constant(r, c, a(0, 0));
  if (a.rows() == 1) return a.replicate(r, 1);
  return a.replicate(1, c);
}

Array reduce_to(const Array& g, Index r, Index c) {
  if (g.rows() == r && g.cols() == c) return g;
  if (r == 1 && c == 1) return Array::Constant(1, 1, g.sum());
  if (r == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

struct Shape {
  Index r, c;
};
Shape result_shape(const Node& a, const Node& b) {
  return {broadcast_dim(a.rows(), b.rows(), "rows"), broadcast_dim(a.cols(), b.cols(), "cols")};
}

template <typename F>
Node unary(const Node& x, Array value, F dfdx_times_grad) {
  const int xi = x.id();
  return x.graph().make(std::move(value), {x}, [xi, dfdx_times_grad](Graph& g, int self, const Array& grad) {
    g.accumulate(xi, dfdx_times_grad(g.value(xi), g.value(self), grad));
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Arithmetic

Node operator+(const Node& a, const Node& b) {
  const auto [r, c] = result_shape(a, b);
  Array v = expand(a.value(), r, c) + expand(b.value(), r, c);
  const int ai = a.id(), bi = b.id();
  return a.graph().make(std::move(v), {a, b}, [ai, bi](Graph& g, int, const Array& grad) {
    if (g.needs_grad(ai)) g.accumulate(ai, reduce_to(grad, g.value(ai).rows(), g.value(ai).cols()));
    if (g.needs_grad(bi)) g.accumulate(bi, reduce_to(grad, g.value(bi).rows(), g.value(bi).cols()));
  });
}

Node operator-(const Node& a, const Node& b) {
  const auto [r, c] = result_shape(a, b);
  Array v = expand(a.value(), r, c) - expand(b.value(), r, c);
  const int ai = a.id(), bi = b.id();
  return a.graph().make(std::move(v), {a, b}, [ai, bi](Graph& g, int, const Array& grad) {
    if (g.needs_grad(ai)) g.accumulate(ai, reduce_to(grad, g.value(ai).rows(), g.value(ai).cols()));
    if (g.needs_grad(bi)) g.accumulate(bi, reduce_to(-grad, g.value(bi).rows(), g.value(bi).cols()));
  });
}

Node operator*(const Node& a, const Node& b) {
  const auto [r, c] = result_shape(a, b);
  Array v = expand(a.value(), r, c) * expand(b.value(), r, c);
  const int ai = a.id(), bi = b.id();
  return a.graph().make(std::move(v), {a, b}, [ai, bi, r, c](Graph& g, int, const Array& grad) {
    const Array& av = g.value(ai);
    const Array& bv = g.value(bi);
    if (g.needs_grad(ai)) g.accumulate(ai, reduce_to(grad * expand(bv, r, c), av.rows(), av.cols()));
    if (g.needs_grad(bi)) g.accumulate(bi, reduce_to(grad * expand(av, r, c), bv.rows(), bv.cols()));
  });
}

Node operator/(const Node& a, const Node& b) {
  const auto [r, c] = result_shape(a, b);
  Array v = expand(a.value(), r, c) / expand(b.value(), r, c);
  const int ai = a.id(), bi = b.id();
  return a.graph().make(std::move(v), {a, b}, [ai, bi, r, c](Graph& g, int self, const Array& grad) {
    const Array& av = g.value(ai);
    const Array& bv = g.value(bi);
    const Array be = expand(bv, r, c);
    if (g.needs_grad(ai)) g.accumulate(ai, reduce_to(grad / be, av.rows(), av.cols()));
    if (g.needs_grad(bi)) g.accumulate(bi, reduce_to(-grad * g.value(self) / be, bv.rows(), bv.cols()));
  });
}

Node operator-(const Node& a) {
  return unary(a, -a.value(), [](const Array&, const Array&, const Array& grad) -> Array { return -grad; });
}

Node operator+(const Node& a, double b) {
  return unary(a, a.value() + b, [](const Array&, const Array&, const Array& grad) -> Array { return grad; });
}
Node operator+(double a, const Node& b) { return b + a; }
Node operator-(const Node& a, double b) { return a + (-b); }
Node operator-(double a, const Node& b) {
  return unary(b, a - b.value(), [](const Array&, const Array&, const Array& grad) -> Array { return -grad; });
}
Node operator*(const Node& a, double b) {
  return unary(a, a.value() * b, [b](const Array&, const Array&, const Array& grad) -> Array { return grad * b; });
}
Node operator*(double a, const Node& b) { return b * a; }
Node operator/(const Node& a, double b) { return a * (1.0 / b); }
Node operator/(double a, const Node& b) {
  return unary(b, a / b.value(),
               [](const Array& x, const Array& y, const Array& grad) -> Array { return -grad * y / x; });
}

// ---------------------------------------------------------------------------
// Elementwise functions

Node exp(const Node& x) {
  return unary(x, x.value().exp(), [](const Array&, const Array& y, const Array& grad) -> Array { return grad * y; });
}

Node log(const Node& x) {
  return unary(x, x.value().log(), [](const Array& xv, const Array&, const Array& grad) -> Array { return grad / xv; });
}

Node sqrt(const Node& x) {
  return unary(x, x.value().sqrt(), [](const Array&, const Array& y, const Array& grad) -> Array {
    return (y > 0.0).select(grad / (2.0 * y), 0.0);
  });
}

Node square(const Node& x) {
  return unary(x, x.value().square(),
               [](const Array& xv, const Array&, const Array& grad) -> Array { return 2.0 * grad * xv; });
}

Node sin(const Node& x) {
  return unary(x, x.value().sin(), [](const Array& xv, const Array&, const Array& grad) -> Array { return grad * xv.cos(); });
}

Node cos(const Node& x) {
  return unary(x, x.value().cos(), [](const Array& xv, const Array&, const Array& grad) -> Array { return -grad * xv.sin(); });
}

Node tanh(const Node& x) {
  return unary(x, x.value().tanh(),
               [](const Array&, const Array& y, const Array& grad) -> Array { return grad * (1.0 - y.square()); });
}

namespace {
Array logistic(const Array& x) {
  // Split by sign so neither branch overflows.
  return (x >= 0.0).select(1.0 / (1.0 + (-x).exp()), x.exp() / (1.0 + x.exp()));
}
}  // namespace

Node sigmoid(const Node& x) {
  return unary(x, logistic(x.value()),
               [](const Array&, const Array& y, const Array& grad) -> Array { return grad * y * (1.0 - y); });
}

Node softplus(const Node& x, double beta) {
  const Array bx = beta * x.value();
  Array v = (bx.max(0.0) + (-bx.abs()).exp().log1p()) / beta;
  return unary(x, std::move(v), [beta](const Array& xv, const Array&, const Array& grad) -> Array {
    return grad * logistic(beta * xv);
  });
}

Node relu(const Node& x) {
  return unary(x, x.value().max(0.0), [](const Array& xv, const Array&, const Array& grad) -> Array {
    return (xv > 0.0).select(grad, 0.0);
  });
}

Node abs(const Node& x) {
  return unary(x, x.value().abs(), [](const Array& xv, const Array&, const Array& grad) -> Array {
    return (xv > 0.0).select(grad, (xv < 0.0).select(-grad, 0.0));
  });
}

Node min(const Node& a, const Node& b) { return 0.5 * (a + b - abs(a - b)); }
Node max(const Node& a, const Node& b) { return 0.5 * (a + b + abs(a - b)); }

Node step(const Node& x) { return x.graph().constant((x.value() > 0.0).cast<double>()); }

Node sign(const Node& x) {
  const Array& v = x.value();
  return x.graph().constant((v > 0.0).cast<double>() - (v < 0.0).cast<double>());
}

Node detach(const Node& x) { return x.graph().constant(x.value()); }

// ---------------------------------------------------------------------------
// Structural ops

Node matmul(const Node& a, const Node& b) {
  if (a.cols() != b.rows()) throw DomainError("ad::matmul: inner dimensions differ");
  Array v = (a.value().matrix() * b.value().matrix()).array();
  const int ai = a.id(), bi = b.id();
  return a.graph().make(std::move(v), {a, b}, [ai, bi](Graph& g, int, const Array& grad) {
    if (g.needs_grad(ai)) g.accumulate(ai, (grad.matrix() * g.value(bi).matrix().transpose()).array());
    if (g.needs_grad(bi)) g.accumulate(bi, (g.value(ai).matrix().transpose() * grad.matrix()).array());
  });
}

Node rows(const Node& x, Index start, Index count) {
  if (start < 0 || start + count > x.rows()) throw DomainError("ad::rows: range out of bounds");
  const int xi = x.id();
  return x.graph().make(x.value().middleRows(start, count), {x}, [xi, start, count](Graph& g, int, const Array& grad) {
    const Array& xv = g.value(xi);
    Array full = Array::Zero(xv.rows(), xv.cols());
    full.middleRows(start, count) = grad;
    g.accumulate(xi, full);
  });
}

Node vstack(std::span<const Node> parts) {
  if (parts.empty()) throw DomainError("ad::vstack: no inputs");
  Index total = 0;
  const Index cols = parts[0].cols();
  for (const Node& p : parts) {
    if (p.cols() != cols) throw DomainError("ad::vstack: column counts differ");
    total += p.rows();
  }
  Array v(total, cols);
  std::vector<int> ids;
  std::vector<Index> starts;
  Index at = 0;
  for (const Node& p : parts) {
    v.middleRows(at, p.rows()) = p.value();
    ids.push_back(p.id());
    starts.push_back(at);
    at += p.rows();
  }
  return parts[0].graph().make(std::move(v), parts, [ids, starts](Graph& g, int, const Array& grad) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs_grad(ids[k])) g.accumulate(ids[k], grad.middleRows(starts[k], g.value(ids[k]).rows()));
    }
  });
}

Node sum_rows(const Node& x) {
  const int xi = x.id();
  return x.graph().make(x.value().colwise().sum(), {x}, [xi](Graph& g, int, const Array& grad) {
    g.accumulate(xi, grad.replicate(g.value(xi).rows(), 1));
  });
}

Node sum_cols(const Node& x) {
  const int xi = x.id();
  return x.graph().make(x.value().rowwise().sum(), {x}, [xi](Graph& g, int, const Array& grad) {
    g.accumulate(xi, grad.replicate(1, g.value(xi).cols()));
  });
}

Node sum(const Node& x) {
  const int xi = x.id();
  return x.graph().make(Array::Constant(1, 1, x.value().sum()), {x}, [xi](Graph& g, int, const Array& grad) {
    const Array& xv = g.value(xi);
    g.accumulate(xi, Array::Constant(xv.rows(), xv.cols(), grad(0, 0)));
  });
}

Node mean(const Node& x) { return sum(x) / static_cast<double>(x.value().size()); }

Node dot3(const Node& a, const Node& b) { return sum_rows(a * b); }

Node norm(const Node& x, double eps) {
  Node s = sum_rows(square(x));
  return eps > 0.0 ? sqrt(s + eps * eps) : sqrt(s);
}

Node gather_cols(const Node& x, std::vector<Index> index) {
  const Array& xv = x.value();
  Array v(xv.rows(), static_cast<Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) v.col(static_cast<Index>(i)) = xv.col(index[i]);
  const int xi = x.id();
  return x.graph().make(std::move(v), {x}, [xi, index = std::move(index)](Graph& g, int, const Array& grad) {
    const Array& src = g.value(xi);
    Array acc = Array::Zero(src.rows(), src.cols());
    for (std::size_t i = 0; i < index.size(); ++i) acc.col(index[i]) += grad.col(static_cast<Index>(i));
    g.accumulate(xi, acc);
  });
}

Node segment_sum(const Node& x, std::vector<Index> offsets) {
  const Array& xv = x.value();
  const Index segs = static_cast<Index>(offsets.size()) - 1;
  if (segs < 0 || offsets.back() != xv.cols()) throw DomainError("ad::segment_sum: offsets do not cover input");
  Array v = Array::Zero(xv.rows(), segs);
  for (Index s = 0; s < segs; ++s) {
    for (Index j = offsets[s]; j < offsets[s + 1]; ++j) v.col(s) += xv.col(j);
  }
  const int xi = x.id();
  return x.graph().make(std::move(v), {x}, [xi, offsets = std::move(offsets)](Graph& g, int, const Array& grad) {
    const Array& src = g.value(xi);
    Array acc(src.rows(), src.cols());
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      for (Index j = offsets[s]; j < offsets[s + 1]; ++j) acc.col(j) = grad.col(static_cast<Index>(s));
    }
    g.accumulate(xi, acc);
  });
}

Node segment_exclusive_cumsum(const Node& x, std::vector<Index> offsets) {
  const Array& xv = x.value();
  if (xv.rows() != 1) throw DomainError("ad::segment_exclusive_cumsum: expects one row");
  if (offsets.empty() || offsets.back() != xv.cols()) throw DomainError("ad::segment_exclusive_cumsum: bad offsets");
  Array v(1, xv.cols());
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    double run = 0.0;
    for (Index j = offsets[s]; j < offsets[s + 1]; ++j) {
      v(0, j) = run;
      run += xv(0, j);
    }
  }
  const int xi = x.id();
  return x.graph().make(std::move(v), {x}, [xi, offsets = std::move(offsets)](Graph& g, int, const Array& grad) {
    // d out_j / d x_i = 1 for i < j in the same segment: reverse exclusive sum.
    Array acc(1, grad.cols());
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      double run = 0.0;
      for (Index j = offsets[s + 1] - 1; j >= offsets[s]; --j) {
        acc(0, j) = run;
        run += grad(0, j);
      }
    }
    g.accumulate(xi, acc);
  });
}

// ---------------------------------------------------------------------------
// Domain primitives

Node sh_basis(const Node& dirs, int l_max) {
  const Array& d = dirs.value();
  if (d.rows() != 3) throw DomainError("ad::sh_basis: expects 3 x n directions");
  const int k = sh_count(l_max);
  Array v(k, d.cols());
  for (Index j = 0; j < d.cols(); ++j) sh_basis_into(d(0, j), d(1, j), d(2, j), l_max, &v(0, j));
  const int di = dirs.id();
  return dirs.graph().make(std::move(v), {dirs}, [di, l_max, k](Graph& g, int, const Array& grad) {
    const Array& dv = g.value(di);
    Array acc(3, dv.cols());
    std::vector<double> y(static_cast<std::size_t>(k)), jac(static_cast<std::size_t>(3 * k));
    for (Index j = 0; j < dv.cols(); ++j) {
      sh_basis_into(dv(0, j), dv(1, j), dv(2, j), l_max, y.data(), jac.data());
      double gx = 0, gy = 0, gz = 0;
      for (int i = 0; i < k; ++i) {
        const double w = grad(i, j);
        gx += w * jac[3 * i];
        gy += w * jac[3 * i + 1];
        gz += w * jac[3 * i + 2];
      }
      acc(0, j) = gx;
      acc(1, j) = gy;
      acc(2, j) = gz;
    }
    g.accumulate(di, acc);
  });
}

Node laplace_density(const Node& sdf, const Node& beta) {
  if (beta.rows() != 1 || beta.cols() != 1) throw DomainError("ad::laplace_density: beta must be 1x1");
  const double b = beta.scalar();
  if (!(b > 0.0)) throw DomainError("laplace_density: beta must be positive");
  const Array& s = sdf.value();
  // Psi_beta(-s) = 0.5 exp(-s/b) for s >= 0, 1 - 0.5 exp(s/b) otherwise.
  const Array e = (-s.abs() / b).exp();
  Array v = (s >= 0.0).select(0.5 * e, 1.0 - 0.5 * e) / b;
  const int si = sdf.id(), bi = beta.id();
  return sdf.graph().make(std::move(v), {sdf, beta}, [si, bi](Graph& g, int self, const Array& grad) {
    const Array& s = g.value(si);
    const double b = g.value(bi)(0, 0);
    const Array e = (-s.abs() / b).exp();
    // d sigma / d s = -0.5 e / b^2 on both sides.
    if (g.needs_grad(si)) g.accumulate(si, grad * (-0.5 * e / (b * b)));
    if (g.needs_grad(bi)) {
      // Both branches: d Psi / d b = 0.5 e s / b^2; sigma = Psi / b.
      const Array dpsi = 0.5 * e * s / (b * b);
      const Array dsigma = dpsi / b - g.value(self) / b;
      g.accumulate(bi, Array::Constant(1, 1, (grad * dsigma).sum()));
    }
  });
}

Node interpolate(const Node& x, const MonotoneCubic& table) {
  const Array& xv = x.value();
  Array v(xv.rows(), xv.cols());
  for (Index j = 0; j < xv.size(); ++j) v(j) = table(xv(j));
  return unary(x, std::move(v), [table](const Array& xv, const Array&, const Array& grad) -> Array {
    Array d(xv.rows(), xv.cols());
    for (Index j = 0; j < xv.size(); ++j) d(j) = table.derivative(xv(j));
    return grad * d;
  });
}

}  // namespace facelight::ad
