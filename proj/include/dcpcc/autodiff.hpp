#pragma once

// Reverse-mode automatic differentiation over dense row-major f64 matrices.
//
// A Tape records operations eagerly: each call evaluates the forward value
// and appends a node. Nodes are stored in creation order, which is a valid
// topological order, so backward is a single reverse sweep.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcpcc {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense matrix with an optional gradient slot. Scalars are 1x1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }
  static Tensor row(std::vector<double> v);
  static Tensor column(std::vector<double> v);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t rows() const { return shape_.rows; }
  [[nodiscard]] std::size_t cols() const { return shape_.cols; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::vector<double>& storage() { return values_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Value of a 1x1 tensor.
  [[nodiscard]] double item() const;

  [[nodiscard]] bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on);
  [[nodiscard]] std::span<double> grad() { return grad_; }
  [[nodiscard]] std::span<const double> grad() const { return grad_; }
  void zero_grad();

  [[nodiscard]] bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> values_;
  bool requires_grad_ = false;
  std::vector<double> grad_;
};

enum class OpKind : std::uint8_t {
  leaf,
  matmul,
  add,
  sub,
  mul,
  abs,
  sum,
  mean,
  relu,
  sigmoid,
  log,
  square,
  max_zero,
  scale,
  gather_rows,
  concat,
};

std::string_view op_name(OpKind kind);

// Handle to a node on a Tape. Default-constructed handles are unevaluated.
struct Var {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t id = npos;
  [[nodiscard]] bool valid() const { return id != npos; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Binds a persistent parameter. Binding the same tensor twice returns the
  // same node. The tensor must outlive the tape.
  Var parameter(Tensor& t);
  // Copies a value into the graph as a non-differentiable leaf.
  Var constant(Tensor t);

  // (m,k) x (k,n).
  Var matmul(Var a, Var b);
  // Elementwise; b may also be a (1, cols) row broadcast over the rows of a.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var abs(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  // log(max(a, floor)); floor = 0 leaves the input unclamped. Clamped
  // entries receive zero gradient.
  Var log(Var a, double floor = 0.0);
  Var square(Var a);
  Var max_zero(Var a);
  Var scale(Var a, double factor);
  // Selects rows of `table` by index; gradient scatters back to those rows.
  Var gather_rows(Var table, std::span<const std::uint32_t> indices);
  // Column-wise concatenation of equally tall inputs.
  Var concat(std::span<const Var> parts);

  [[nodiscard]] const Tensor& value(Var v) const;
  [[nodiscard]] OpKind kind(Var v) const;
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  // Gradient of the scalar `output` w.r.t. every bound parameter with
  // requires_grad, written into the parameter's grad slot (assigned, not
  // accumulated). Parameters unreachable from `output` get zero gradient.
  void backward(Var output);

  // Gradient of the last backward() for an arbitrary node; empty when the
  // node did not participate.
  [[nodiscard]] std::span<const double> grad(Var v) const;

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    std::vector<double> grad;
    Tensor* param = nullptr;
    bool needs_grad = false;
    bool row_broadcast = false;
    double scalar = 0.0;
    std::vector<std::uint32_t> indices;
  };

  const Node& node(Var v) const;
  Var push(Node n);
  void check_finite(const Node& n) const;
  Var elementwise(OpKind kind, Var a, Var b);
  Var unary(OpKind kind, Var a, double scalar = 0.0);
  void backprop(const Node& n);

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> bound_;
};

// Central-difference gradient check. `build` must construct a scalar loss on
// the tape it is given from the current contents of `params`. Returns the
// maximum relative error |a - n| / max(|a|, |n|) over coordinates where
// |a| + |n| > 1e-10; 0 when no coordinate qualifies.
double finite_diff_check(const std::function<Var(Tape&)>& build,
                         std::span<Tensor* const> params, double step);

}  // namespace dcpcc
