#include "dcpcc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcpcc/errors.hpp"

namespace dcpcc {

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << rows << ", " << cols << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), values_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeError("tensor of shape " + shape_.str() + " given " + std::to_string(values_.size()) +
                     " values");
  }
}

Tensor Tensor::row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

Tensor Tensor::column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n, 1}, std::move(v));
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_.str());
  }
  return values_[0];
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on) {
    grad_.assign(values_.size(), 0.0);
  } else {
    grad_.clear();
  }
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul-elementwise";
    case OpKind::abs: return "abs-elementwise";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::log: return "log";
    case OpKind::square: return "square";
    case OpKind::max_zero: return "max-with-zero";
    case OpKind::scale: return "scalar-scale";
    case OpKind::gather_rows: return "gather-rows";
    case OpKind::concat: return "concat";
  }
  return "unknown";
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sign_or_zero(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::vector<double>& ensure(std::vector<double>& g, std::size_t n) {
  if (g.empty()) {
    g.assign(n, 0.0);
  }
  return g;
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw std::logic_error("use of an unevaluated tape variable");
  }
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

OpKind Tape::kind(Var v) const { return node(v).kind; }

void Tape::check_finite(const Node& n) const {
  if (!n.value.all_finite()) {
    throw NumericError("non-finite output from op '" + std::string(op_name(n.kind)) + "' of shape " +
                       n.value.shape().str());
  }
}

Var Tape::push(Node n) {
  if (n.kind != OpKind::leaf) {
    check_finite(n);
    n.needs_grad = std::any_of(n.inputs.begin(), n.inputs.end(),
                               [this](std::size_t i) { return nodes_[i].needs_grad; });
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor& t) {
  if (auto it = bound_.find(&t); it != bound_.end()) {
    return Var{it->second};
  }
  if (!t.all_finite()) {
    throw NumericError("non-finite parameter bound to tape, shape " + t.shape().str());
  }
  Node n;
  n.value = t;
  n.param = &t;
  n.needs_grad = t.requires_grad();
  Var v = push(std::move(n));
  bound_.emplace(&t, v.id);
  return v;
}

Var Tape::constant(Tensor t) {
  Node n;
  n.value = std::move(t);
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  if (x.cols() != y.rows()) {
    throw ShapeError("matmul: incompatible shapes " + x.shape().str() + " and " + y.shape().str());
  }
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x(i, p);
      if (xv == 0.0) continue;
      const double* yrow = &y.values()[p * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += xv * yrow[j];
    }
  }
  Node nd;
  nd.kind = OpKind::matmul;
  nd.inputs = {a.id, b.id};
  nd.value = std::move(out);
  return push(std::move(nd));
}

Var Tape::elementwise(OpKind kind, Var a, Var b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  bool broadcast = false;
  if (x.shape() != y.shape()) {
    if (y.rows() == 1 && y.cols() == x.cols()) {
      broadcast = true;
    } else {
      throw ShapeError(std::string(op_name(kind)) + ": incompatible shapes " + x.shape().str() + " and " +
                       y.shape().str());
    }
  }
  Tensor out(x.shape());
  const std::size_t cols = x.cols();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yv = broadcast ? y[i % cols] : y[i];
    switch (kind) {
      case OpKind::add: out[i] = x[i] + yv; break;
      case OpKind::sub: out[i] = x[i] - yv; break;
      case OpKind::mul: out[i] = x[i] * yv; break;
      default: throw std::logic_error("not an elementwise binary op");
    }
  }
  Node nd;
  nd.kind = kind;
  nd.inputs = {a.id, b.id};
  nd.row_broadcast = broadcast;
  nd.value = std::move(out);
  return push(std::move(nd));
}

Var Tape::add(Var a, Var b) { return elementwise(OpKind::add, a, b); }
Var Tape::sub(Var a, Var b) { return elementwise(OpKind::sub, a, b); }
Var Tape::mul(Var a, Var b) { return elementwise(OpKind::mul, a, b); }

Var Tape::unary(OpKind kind, Var a, double scalar) {
  const Tensor& x = node(a).value;
  Tensor out;
  switch (kind) {
    case OpKind::sum:
    case OpKind::mean: {
      double acc = 0.0;
      for (double v : x.values()) acc += v;
      if (kind == OpKind::mean) {
        if (x.size() == 0) throw ShapeError("mean: empty input");
        acc /= static_cast<double>(x.size());
      }
      out = Tensor::scalar(acc);
      break;
    }
    default: {
      out = Tensor(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        switch (kind) {
          case OpKind::abs: out[i] = std::abs(v); break;
          case OpKind::relu:
          case OpKind::max_zero: out[i] = v > 0.0 ? v : 0.0; break;
          case OpKind::sigmoid: out[i] = stable_sigmoid(v); break;
          case OpKind::log: out[i] = std::log(scalar > 0.0 ? std::max(v, scalar) : v); break;
          case OpKind::square: out[i] = v * v; break;
          case OpKind::scale: out[i] = v * scalar; break;
          default: throw std::logic_error("not a unary op");
        }
      }
    }
  }
  Node nd;
  nd.kind = kind;
  nd.inputs = {a.id};
  nd.scalar = scalar;
  nd.value = std::move(out);
  return push(std::move(nd));
}

Var Tape::abs(Var a) { return unary(OpKind::abs, a); }
Var Tape::sum(Var a) { return unary(OpKind::sum, a); }
Var Tape::mean(Var a) { return unary(OpKind::mean, a); }
Var Tape::relu(Var a) { return unary(OpKind::relu, a); }
Var Tape::sigmoid(Var a) { return unary(OpKind::sigmoid, a); }
Var Tape::log(Var a, double floor) { return unary(OpKind::log, a, floor); }
Var Tape::square(Var a) { return unary(OpKind::square, a); }
Var Tape::max_zero(Var a) { return unary(OpKind::max_zero, a); }
Var Tape::scale(Var a, double factor) { return unary(OpKind::scale, a, factor); }

Var Tape::gather_rows(Var table, std::span<const std::uint32_t> indices) {
  const Tensor& t = node(table).value;
  const std::size_t cols = t.cols();
  Tensor out({indices.size(), cols});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= t.rows()) {
      throw ShapeError("gather-rows: index " + std::to_string(indices[r]) + " out of bounds for table " +
                       t.shape().str());
    }
    std::copy_n(&t.values()[indices[r] * cols], cols, &out(r, 0));
  }
  Node nd;
  nd.kind = OpKind::gather_rows;
  nd.inputs = {table.id};
  nd.indices.assign(indices.begin(), indices.end());
  nd.value = std::move(out);
  return push(std::move(nd));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const std::size_t rows = node(parts[0]).value.rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    const Tensor& t = node(p).value;
    if (t.rows() != rows) {
      throw ShapeError("concat: row mismatch " + node(parts[0]).value.shape().str() + " and " + t.shape().str());
    }
    cols += t.cols();
  }
  Tensor out({rows, cols});
  std::size_t offset = 0;
  Node nd;
  nd.kind = OpKind::concat;
  for (Var p : parts) {
    const Tensor& t = node(p).value;
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&t.values()[r * t.cols()], t.cols(), &out(r, offset));
    }
    offset += t.cols();
    nd.inputs.push_back(p.id);
  }
  nd.value = std::move(out);
  return push(std::move(nd));
}

std::span<const double> Tape::grad(Var v) const { return node(v).grad; }

void Tape::backprop(const Node& n) {
  const std::vector<double>& g = n.grad;
  auto input = [&](std::size_t k) -> Node& { return nodes_[n.inputs[k]]; };

  switch (n.kind) {
    case OpKind::leaf: return;
    case OpKind::matmul: {
      Node& na = input(0);
      Node& nb = input(1);
      const Tensor& x = na.value;
      const Tensor& y = nb.value;
      const std::size_t m = x.rows(), k = x.cols(), cols = y.cols();
      if (na.needs_grad) {
        auto& ga = ensure(na.grad, x.size());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += g[i * cols + j] * y[p * cols + j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (nb.needs_grad) {
        auto& gb = ensure(nb.grad, y.size());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) gb[p * cols + j] += xv * g[i * cols + j];
          }
        }
      }
      return;
    }
    case OpKind::add:
    case OpKind::sub:
    case OpKind::mul: {
      Node& na = input(0);
      Node& nb = input(1);
      const std::size_t cols = na.value.cols();
      if (na.needs_grad) {
        auto& ga = ensure(na.grad, na.value.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double yv = n.row_broadcast ? nb.value[i % cols] : nb.value[i];
          ga[i] += n.kind == OpKind::mul ? g[i] * yv : g[i];
        }
      }
      if (nb.needs_grad) {
        auto& gb = ensure(nb.grad, nb.value.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          double d = g[i];
          if (n.kind == OpKind::sub) d = -d;
          if (n.kind == OpKind::mul) d *= na.value[i];
          gb[n.row_broadcast ? i % cols : i] += d;
        }
      }
      return;
    }
    case OpKind::concat: {
      const std::size_t rows = n.value.rows();
      const std::size_t total = n.value.cols();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        Node& in = input(k);
        const std::size_t cols = in.value.cols();
        if (in.needs_grad) {
          auto& gi = ensure(in.grad, in.value.size());
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) gi[r * cols + c] += g[r * total + offset + c];
          }
        }
        offset += cols;
      }
      return;
    }
    default: break;
  }

  Node& in = input(0);
  if (!in.needs_grad) return;
  auto& gi = ensure(in.grad, in.value.size());
  const Tensor& x = in.value;
  switch (n.kind) {
    case OpKind::sum:
      for (double& v : gi) v += g[0];
      break;
    case OpKind::mean: {
      const double d = g[0] / static_cast<double>(x.size());
      for (double& v : gi) v += d;
      break;
    }
    case OpKind::abs:
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += sign_or_zero(x[i]) * g[i];
      break;
    case OpKind::relu:
    case OpKind::max_zero:
      for (std::size_t i = 0; i < gi.size(); ++i) {
        if (x[i] > 0.0) gi[i] += g[i];
      }
      break;
    case OpKind::sigmoid:
      for (std::size_t i = 0; i < gi.size(); ++i) {
        const double y = n.value[i];
        gi[i] += g[i] * y * (1.0 - y);
      }
      break;
    case OpKind::log:
      for (std::size_t i = 0; i < gi.size(); ++i) {
        if (n.scalar > 0.0 && x[i] < n.scalar) continue;
        gi[i] += g[i] / x[i];
      }
      break;
    case OpKind::square:
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += 2.0 * x[i] * g[i];
      break;
    case OpKind::scale:
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += n.scalar * g[i];
      break;
    case OpKind::gather_rows: {
      const std::size_t cols = x.cols();
      for (std::size_t r = 0; r < n.indices.size(); ++r) {
        double* dst = &gi[n.indices[r] * cols];
        const double* src = &g[r * cols];
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
      }
      break;
    }
    default: throw std::logic_error("unhandled op in backward");
  }
}

void Tape::backward(Var output) {
  const Node& out = node(output);
  if (out.value.size() != 1) {
    throw ShapeError("backward: output must be a scalar, got shape " + out.value.shape().str());
  }
  for (Node& n : nodes_) n.grad.clear();
  for (auto& [tensor, id] : bound_) {
    (void)tensor;
    if (nodes_[id].param->requires_grad()) nodes_[id].param->zero_grad();
  }
  nodes_[output.id].grad.assign(1, 1.0);
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.kind == OpKind::leaf) {
      if (n.param != nullptr && n.param->requires_grad()) {
        std::copy(n.grad.begin(), n.grad.end(), n.param->grad().begin());
      }
      continue;
    }
    backprop(n);
  }
  for (const Node& n : nodes_) {
    for (double v : n.grad) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite gradient at op '" + std::string(op_name(n.kind)) + "'");
      }
    }
  }
}

double finite_diff_check(const std::function<Var(Tape&)>& build, std::span<Tensor* const> params,
                         double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");
  std::vector<std::vector<double>> analytic;
  {
    for (Tensor* p : params) {
      if (p->requires_grad()) p->zero_grad();
    }
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
    for (Tensor* p : params) {
      if (!p->requires_grad()) throw std::invalid_argument("finite_diff_check: parameter without requires_grad");
      analytic.emplace_back(p->grad().begin(), p->grad().end());
    }
  }
  auto evaluate = [&]() {
    Tape tape;
    const double v = tape.value(build(tape)).item();
    if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite loss during perturbation");
    return v;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + step;
      const double up = evaluate();
      p[i] = orig - step;
      const double down = evaluate();
      p[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      if (std::abs(a) + std::abs(numeric) > 1e-10) {
        worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric)));
      }
    }
  }
  return worst;
}

}  // namespace dcpcc
