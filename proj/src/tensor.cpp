// SPDX-License-Identifier: Apache-2.0
#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace rsb {

namespace {
constexpr double kGeluC = 0.7978845608028653558799;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

const Shape& Tensor::shape() const { return tape_->node(index_).shape; }

std::size_t Tensor::size() const { return shape_numel(shape()); }

std::span<const double> Tensor::values() const { return tape_->vals(index_); }

std::span<const double> Tensor::grad() const {
  const auto& n = tape_->node(index_);
  return {n.grad.data(), n.grad.size()};
}

double Tensor::scalar() const {
  if (size() != 1) {
    throw ContractError("scalar() on tensor of shape " + shape_str(shape()));
  }
  return values()[0];
}

Tensor Tape::push(Node n) {
  if (n.val_ptr == nullptr) n.val_ptr = n.value.data();
  nodes_.push_back(std::move(n));
  return Tensor(this, nodes_.size() - 1);
}

std::span<const double> Tape::vals(std::size_t i) const {
  const Node& n = nodes_[i];
  return {n.val_ptr, shape_numel(n.shape)};
}

double* Tape::grad_buffer(std::size_t i) {
  Node& n = nodes_[i];
  if (n.grad.empty()) n.grad.assign(shape_numel(n.shape), 0.0);
  return n.grad.data();
}

void Tape::add_to_grad(std::size_t i, std::span<const double> contrib) {
  double* g = grad_buffer(i);
  for (std::size_t k = 0; k < contrib.size(); ++k) g[k] += contrib[k];
}

void Tape::check_finite(const Node& n, const char* op) const {
  const double* v = n.val_ptr != nullptr ? n.val_ptr : n.value.data();
  const std::size_t count = shape_numel(n.shape);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

Tensor Tape::leaf(Shape shape, const double* values, double* grad_sink) {
  Node n;
  n.shape = std::move(shape);
  n.val_ptr = values;
  n.grad_sink = grad_sink;
  n.requires_grad = grad_sink != nullptr;
  return push(std::move(n));
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw ContractError("constant: value count does not match shape " +
                        shape_str(shape));
  }
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  return push(std::move(n));
}

Tensor Tape::constant_scalar(double value) { return constant({1}, {value}); }

Tensor Tape::matmul(Tensor a, Tensor b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.size() != 2 || bs.size() != 2 || as[1] != bs[0]) {
    throw ConfigError("matmul: incompatible shapes " + shape_str(as) + " x " +
                      shape_str(bs));
  }
  const std::size_t M = as[0], K = as[1], N = bs[1];
  const double* av = a.values().data();
  const double* bv = b.values().data();

  Node n;
  n.shape = {M, N};
  n.value.assign(M * N, 0.0);
  // i-k-j loop: per output element the k-sum runs in fixed ascending order,
  // so the forward result is bitwise reproducible.
  for (std::size_t i = 0; i < M; ++i) {
    double* c = n.value.data() + i * N;
    const double* arow = av + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const double aik = arow[k];
      const double* brow = bv + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += aik * brow[j];
    }
  }
  check_finite(n, "matmul");

  const std::size_t ai = a.index_, bi = b.index_;
  n.requires_grad = node(ai).requires_grad || node(bi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [ai, bi, yi, M, K, N](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      const double* av2 = t.vals(ai).data();
      const double* bv2 = t.vals(bi).data();
      if (t.node(ai).requires_grad) {
        // dA = dY * B^T
        double* ga = t.grad_buffer(ai);
        for (std::size_t i = 0; i < M; ++i) {
          for (std::size_t k = 0; k < K; ++k) {
            double acc = 0.0;
            const double* gyrow = gy + i * N;
            const double* brow = bv2 + k * N;
            for (std::size_t j = 0; j < N; ++j) acc += gyrow[j] * brow[j];
            ga[i * K + k] += acc;
          }
        }
      }
      if (t.node(bi).requires_grad) {
        // dB = A^T * dY
        double* gb = t.grad_buffer(bi);
        for (std::size_t i = 0; i < M; ++i) {
          const double* arow = av2 + i * K;
          const double* gyrow = gy + i * N;
          for (std::size_t k = 0; k < K; ++k) {
            const double aik = arow[k];
            double* gbrow = gb + k * N;
            for (std::size_t j = 0; j < N; ++j) gbrow[j] += aik * gyrow[j];
          }
        }
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::elementwise(Tensor a, Tensor b, EwKind kind) {
  if (a.shape() != b.shape()) {
    if (b.size() == 1) return elementwise_scalar(a, b.values()[0], kind);
    throw ConfigError("elementwise: shape mismatch " + shape_str(a.shape()) +
                      " vs " + shape_str(b.shape()));
  }
  const std::size_t count = a.size();
  const double* av = a.values().data();
  const double* bv = b.values().data();

  Node n;
  n.shape = a.shape();
  n.value.resize(count);
  switch (kind) {
    case EwKind::Add:
      for (std::size_t i = 0; i < count; ++i) n.value[i] = av[i] + bv[i];
      break;
    case EwKind::Sub:
      for (std::size_t i = 0; i < count; ++i) n.value[i] = av[i] - bv[i];
      break;
    case EwKind::Mul:
      for (std::size_t i = 0; i < count; ++i) n.value[i] = av[i] * bv[i];
      break;
    case EwKind::Div:
      for (std::size_t i = 0; i < count; ++i) {
        if (bv[i] == 0.0) throw NumericError("elementwise: division by zero");
        n.value[i] = av[i] / bv[i];
      }
      break;
  }
  check_finite(n, "elementwise");

  const std::size_t ai = a.index_, bi = b.index_;
  n.requires_grad = node(ai).requires_grad || node(bi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [ai, bi, yi, count, kind](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      const double* av2 = t.vals(ai).data();
      const double* bv2 = t.vals(bi).data();
      const bool ga = t.node(ai).requires_grad;
      const bool gb = t.node(bi).requires_grad;
      double* pa = ga ? t.grad_buffer(ai) : nullptr;
      double* pb = gb ? t.grad_buffer(bi) : nullptr;
      for (std::size_t i = 0; i < count; ++i) {
        switch (kind) {
          case EwKind::Add:
            if (ga) pa[i] += gy[i];
            if (gb) pb[i] += gy[i];
            break;
          case EwKind::Sub:
            if (ga) pa[i] += gy[i];
            if (gb) pb[i] -= gy[i];
            break;
          case EwKind::Mul:
            if (ga) pa[i] += gy[i] * bv2[i];
            if (gb) pb[i] += gy[i] * av2[i];
            break;
          case EwKind::Div:
            if (ga) pa[i] += gy[i] / bv2[i];
            if (gb) pb[i] -= gy[i] * av2[i] / (bv2[i] * bv2[i]);
            break;
        }
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::elementwise_scalar(Tensor a, double b, EwKind kind) {
  const std::size_t count = a.size();
  const double* av = a.values().data();
  if (kind == EwKind::Div && b == 0.0) {
    throw NumericError("elementwise: division by zero scalar");
  }

  Node n;
  n.shape = a.shape();
  n.value.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (kind) {
      case EwKind::Add: n.value[i] = av[i] + b; break;
      case EwKind::Sub: n.value[i] = av[i] - b; break;
      case EwKind::Mul: n.value[i] = av[i] * b; break;
      case EwKind::Div: n.value[i] = av[i] / b; break;
    }
  }
  check_finite(n, "elementwise_scalar");

  const std::size_t ai = a.index_;
  n.requires_grad = node(ai).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [ai, yi, count, b, kind](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      double* pa = t.grad_buffer(ai);
      double factor = 1.0;
      if (kind == EwKind::Mul) factor = b;
      if (kind == EwKind::Div) factor = 1.0 / b;
      for (std::size_t i = 0; i < count; ++i) pa[i] += gy[i] * factor;
    };
  }
  return push(std::move(n));
}

Tensor Tape::add_rowvec(Tensor m, Tensor v) {
  const auto& ms = m.shape();
  const auto& vs = v.shape();
  if (ms.size() != 2 || vs.size() != 1 || vs[0] != ms[1]) {
    throw ConfigError("add_rowvec: shapes " + shape_str(ms) + " + " +
                      shape_str(vs));
  }
  const std::size_t B = ms[0], N = ms[1];
  const double* mv = m.values().data();
  const double* vv = v.values().data();

  Node n;
  n.shape = ms;
  n.value.resize(B * N);
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < N; ++j) n.value[i * N + j] = mv[i * N + j] + vv[j];
  }
  check_finite(n, "add_rowvec");

  const std::size_t mi = m.index_, vi = v.index_;
  n.requires_grad = node(mi).requires_grad || node(vi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [mi, vi, yi, B, N](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      if (t.node(mi).requires_grad) {
        double* gm = t.grad_buffer(mi);
        for (std::size_t i = 0; i < B * N; ++i) gm[i] += gy[i];
      }
      if (t.node(vi).requires_grad) {
        double* gv = t.grad_buffer(vi);
        for (std::size_t i = 0; i < B; ++i) {
          for (std::size_t j = 0; j < N; ++j) gv[j] += gy[i * N + j];
        }
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::activation(Tensor x, ActKind kind) {
  const std::size_t count = x.size();
  const double* xv = x.values().data();

  Node n;
  n.shape = x.shape();
  n.value.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = xv[i];
    switch (kind) {
      case ActKind::Relu:
        n.value[i] = v > 0.0 ? v : 0.0;
        break;
      case ActKind::Gelu: {
        // tanh approximation: 0.5 x (1 + tanh(c (x + a x^3)))
        const double inner = kGeluC * (v + kGeluA * v * v * v);
        n.value[i] = 0.5 * v * (1.0 + std::tanh(inner));
        break;
      }
      case ActKind::Sigmoid:
        n.value[i] = 1.0 / (1.0 + std::exp(-v));
        break;
    }
  }
  check_finite(n, "activation");

  const std::size_t xi = x.index_;
  n.requires_grad = node(xi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [xi, yi, count, kind](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      const double* xv2 = t.vals(xi).data();
      const double* yv2 = t.vals(yi).data();
      double* gx = t.grad_buffer(xi);
      for (std::size_t i = 0; i < count; ++i) {
        double d = 0.0;
        const double v = xv2[i];
        switch (kind) {
          case ActKind::Relu:
            d = v > 0.0 ? 1.0 : 0.0;
            break;
          case ActKind::Gelu: {
            const double inner = kGeluC * (v + kGeluA * v * v * v);
            const double th = std::tanh(inner);
            const double sech2 = 1.0 - th * th;
            d = 0.5 * (1.0 + th) +
                0.5 * v * sech2 * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
            break;
          }
          case ActKind::Sigmoid: {
            const double s = yv2[i];
            d = s * (1.0 - s);
            break;
          }
        }
        gx[i] += gy[i] * d;
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::reduce_all(Tensor x, ReduceKind kind) {
  const std::size_t count = x.size();
  const double* xv = x.values().data();
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += xv[i];
  const double denom = kind == ReduceKind::Mean ? static_cast<double>(count) : 1.0;

  Node n;
  n.shape = {1};
  n.value = {acc / denom};
  check_finite(n, "reduce");

  const std::size_t xi = x.index_;
  n.requires_grad = node(xi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [xi, yi, count, denom](Tape& t) {
      const double g = t.node(yi).grad[0] / denom;
      double* gx = t.grad_buffer(xi);
      for (std::size_t i = 0; i < count; ++i) gx[i] += g;
    };
  }
  return push(std::move(n));
}

Tensor Tape::reduce(Tensor x, ReduceKind kind,
                    const std::vector<std::size_t>& axes) {
  const Shape& xs = x.shape();
  std::vector<bool> reduced(xs.size(), false);
  for (std::size_t a : axes) {
    if (a >= xs.size()) {
      throw ConfigError("reduce: axis " + std::to_string(a) +
                        " out of range for " + shape_str(xs));
    }
    reduced[a] = true;
  }

  Shape out_shape;
  std::size_t reduce_count = 1;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    if (reduced[a]) {
      reduce_count *= xs[a];
    } else {
      out_shape.push_back(xs[a]);
    }
  }
  if (out_shape.empty()) out_shape = {1};
  const std::size_t out_count = shape_numel(out_shape);
  const std::size_t in_count = shape_numel(xs);

  // Row-major strides and the map from input index -> output index.
  std::vector<std::size_t> strides(xs.size(), 1);
  for (std::size_t a = xs.size(); a-- > 1;) strides[a - 1] = strides[a] * xs[a];
  auto out_index = [dims = xs, strides, reduced](std::size_t flat) {
    std::size_t out = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const std::size_t coord = (flat / strides[a]) % dims[a];
      if (!reduced[a]) out = out * dims[a] + coord;
    }
    return out;
  };

  const double* xv = x.values().data();
  Node n;
  n.shape = out_shape;
  n.value.assign(out_count, 0.0);
  for (std::size_t i = 0; i < in_count; ++i) n.value[out_index(i)] += xv[i];
  const double denom =
      kind == ReduceKind::Mean ? static_cast<double>(reduce_count) : 1.0;
  if (denom != 1.0) {
    for (double& v : n.value) v /= denom;
  }
  check_finite(n, "reduce");

  const std::size_t xi = x.index_;
  n.requires_grad = node(xi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    n.pullback = [xi, yi, in_count, denom, out_index](Tape& t) {
      const double* gy = t.node(yi).grad.data();
      double* gx = t.grad_buffer(xi);
      for (std::size_t i = 0; i < in_count; ++i) {
        gx[i] += gy[out_index(i)] / denom;
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::ce_loss(Tensor logits, std::span<const double> targets) {
  const Shape& zs = logits.shape();
  if (zs.size() != 2) throw ContractError("ce_loss: logits must be rank 2");
  const std::size_t B = zs[0], K = zs[1];
  if (targets.size() != B * K) {
    throw ContractError("ce_loss: target size mismatch");
  }
  const double* zv = logits.values().data();

  Node n;
  n.shape = {1};
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const double* z = zv + b * K;
    const double* t = targets.data() + b * K;
    double zmax = z[0];
    for (std::size_t k = 1; k < K; ++k) zmax = std::max(zmax, z[k]);
    double sum_exp = 0.0, tsum = 0.0, tz = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      sum_exp += std::exp(z[k] - zmax);
      tsum += t[k];
      tz += t[k] * z[k];
    }
    const double lse = zmax + std::log(sum_exp);
    total += lse * tsum - tz;
  }
  n.value = {total / static_cast<double>(B)};
  check_finite(n, "ce_loss");

  const std::size_t zi = logits.index_;
  n.requires_grad = node(zi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    std::vector<double> tcopy(targets.begin(), targets.end());
    n.pullback = [zi, yi, B, K, tcopy = std::move(tcopy)](Tape& t) {
      const double g = t.node(yi).grad[0] / static_cast<double>(B);
      const double* zv2 = t.vals(zi).data();
      double* gz = t.grad_buffer(zi);
      for (std::size_t b = 0; b < B; ++b) {
        const double* z = zv2 + b * K;
        const double* tt = tcopy.data() + b * K;
        double zmax = z[0];
        for (std::size_t k = 1; k < K; ++k) zmax = std::max(zmax, z[k]);
        double sum_exp = 0.0, tsum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          sum_exp += std::exp(z[k] - zmax);
          tsum += tt[k];
        }
        for (std::size_t k = 0; k < K; ++k) {
          const double softmax = std::exp(z[k] - zmax) / sum_exp;
          gz[b * K + k] += g * (softmax * tsum - tt[k]);
        }
      }
    };
  }
  return push(std::move(n));
}

Tensor Tape::bce_loss(Tensor logits, std::span<const double> targets) {
  const std::size_t count = logits.size();
  if (targets.size() != count) {
    throw ContractError("bce_loss: target size mismatch");
  }
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ContractError("bce_loss: target outside [0,1]");
    }
  }
  const double* zv = logits.values().data();

  Node n;
  n.shape = {1};
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double z = zv[i];
    total += std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::abs(z)));
  }
  n.value = {total / static_cast<double>(count)};
  check_finite(n, "bce_loss");

  const std::size_t zi = logits.index_;
  n.requires_grad = node(zi).requires_grad;
  if (n.requires_grad) {
    const std::size_t yi = nodes_.size();
    std::vector<double> tcopy(targets.begin(), targets.end());
    n.pullback = [zi, yi, count, tcopy = std::move(tcopy)](Tape& t) {
      const double g = t.node(yi).grad[0] / static_cast<double>(count);
      const double* zv2 = t.vals(zi).data();
      double* gz = t.grad_buffer(zi);
      for (std::size_t i = 0; i < count; ++i) {
        const double sig = 1.0 / (1.0 + std::exp(-zv2[i]));
        gz[i] += g * (sig - tcopy[i]);
      }
    };
  }
  return push(std::move(n));
}

void Tape::backward(Tensor loss) {
  if (loss.tape_ != this) throw ContractError("backward: loss not on this tape");
  if (backward_done_) {
    throw ContractError("backward: tape already differentiated; build a fresh "
                        "tape per step");
  }
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(loss.shape()));
  }
  backward_done_ = true;
  grad_buffer(loss.index_)[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.pullback) n.pullback(*this);
    if (n.grad_sink != nullptr) {
      for (std::size_t k = 0; k < n.grad.size(); ++k) n.grad_sink[k] += n.grad[k];
    }
  }
}

double grad_check(const std::function<Tensor(Tape&, Tensor)>& f,
                  const Shape& shape, std::vector<double> x, double h) {
  const std::size_t count = shape_numel(shape);
  if (x.size() != count) throw ContractError("grad_check: size mismatch");

  std::vector<double> analytic(count, 0.0);
  {
    Tape tape;
    Tensor xt = tape.leaf(shape, x.data(), analytic.data());
    Tensor y = f(tape, xt);
    tape.backward(y);
  }

  auto eval = [&](const std::vector<double>& pt) {
    Tape tape;
    Tensor xt = tape.leaf(shape, pt.data(), nullptr);
    return f(tape, xt).scalar();
  };

  double max_rel = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = eval(x);
    x[i] = orig - h;
    const double fm = eval(x);
    x[i] = orig;
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
  }
  return max_rel;
}

}  // namespace rsb
