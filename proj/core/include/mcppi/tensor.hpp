#pragma once

// Dense reverse-mode autodiff over row-major f64 matrices.
//
// Every tensor is rank 2 (vectors are 1xN rows, scalars 1x1). Binary
// elementwise ops require equal shapes, except that a 1x1 operand is
// broadcast. A Tensor is a cheap handle; the value it points at is not
// modified after construction except through Parameter (see parameter.hpp).

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mcppi {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
  /// Releases the ancestor chain iteratively so deep graphs cannot
  /// overflow the stack.
  ~Node();

  double* grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v);
  static Tensor uniform(Shape shape, double lo, double hi, std::mt19937_64& rng,
                        bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  /// Accumulated gradient; all zeros when nothing has flowed back yet.
  std::vector<double> grad() const;
  bool has_grad() const { return !node_->grad.empty(); }

  /// Seeds d(this)/d(this)=1 and propagates to every reachable node.
  /// Requires a 1x1 tensor.
  void backward() const;

  /// Same as backward() but seeds with an explicit upstream gradient.
  void backward(std::span<const double> seed) const;

  void zero_grad() const;

  /// Detached copy of the values (no graph, no grad).
  Tensor detach() const;

  // Internal hook for op implementations and Parameter.
  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// ---- linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// ---- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Elementwise a^exponent; a must be nonnegative when exponent is not an integer.
Tensor pow(const Tensor& a, double exponent);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// ---- reductions -----------------------------------------------------------

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// n x F -> n x 1
Tensor row_sum(const Tensor& a);
/// n x F -> 1 x F
Tensor col_mean(const Tensor& a);
/// Frobenius / Euclidean norm of the whole tensor, 1x1.
Tensor l2norm(const Tensor& a);
/// Row-wise cosine similarity of two n x F tensors -> n x 1.
/// Throws NumericError if any row of either operand is zero.
Tensor cosine_sim(const Tensor& a, const Tensor& b);

// ---- indexing / structure -------------------------------------------------

/// Row i of the result is the sum of rows of `values` whose segment is i.
Tensor segment_sum(const Tensor& values, std::span<const std::size_t> segments,
                   std::size_t num_segments);
/// Row k of the result is values[indices[k]].
Tensor gather_rows(const Tensor& values, std::span<const std::size_t> indices);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const Tensor& a, const Tensor& b);
/// a (n x F) + bias (1 x F) on every row.
Tensor add_row(const Tensor& a, const Tensor& bias);

// ---- gradient routing -----------------------------------------------------

/// Forward identity, zero backward.
Tensor stop_gradient(const Tensor& a);
/// Forward value is exactly `target`; the backward pass copies the incoming
/// gradient to `input` and sends nothing to `target`. Same semantics as
/// input + sg[target - input] without the rounding in the forward sum.
Tensor straight_through(const Tensor& input, const Tensor& target);

// ---- fused losses ---------------------------------------------------------

/// Mean over all cells of binary cross entropy between sigmoid(logits) and
/// labels, in the log-sum-exp stable form. labels is a constant.
Tensor bce_with_logits(const Tensor& logits, const Tensor& labels);

}  // namespace mcppi
