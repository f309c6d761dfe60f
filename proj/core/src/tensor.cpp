#include "mcppi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "mcppi/errors.hpp"

namespace mcppi {

std::string Shape::str() const { return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]"; }

namespace detail {

Node::~Node() {
  std::vector<std::shared_ptr<Node>> pending = std::move(parents);
  backward = nullptr;
  while (!pending.empty()) {
    std::shared_ptr<Node> n = std::move(pending.back());
    pending.pop_back();
    if (n.use_count() != 1) continue;
    // Sole owner: detach its parents and closure before it is freed.
    for (auto& p : n->parents) pending.push_back(std::move(p));
    n->parents.clear();
    n->backward = nullptr;
  }
}

double* Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad.data();
}

}  // namespace detail

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(Shape shape, std::vector<double> value, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + a.shape().str() + " and " + b.shape().str() +
                         " differ");
  }
}

// Shape of a binary elementwise result, allowing a 1x1 operand.
Shape broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return a.shape();
  if (a.size() == 1) return b.shape();
  if (b.size() == 1) return a.shape();
  throw DimensionError(std::string(op) + ": shapes " + a.shape().str() + " and " + b.shape().str() +
                       " are not compatible (only scalar broadcasting is supported)");
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, DA da, DB db) {
  const Shape out_shape = broadcast_shape(a, b, name);
  const std::size_t n = out_shape.size();
  const bool a_scalar = a.size() == 1 && n != 1;
  const bool b_scalar = b.size() == 1 && n != 1;
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
  NodePtr pa = a.node(), pb = b.node();
  return Tensor(make_node(out_shape, std::move(out), {pa, pb}, [pa, pb, a_scalar, b_scalar, da, db](Node& self) {
    const std::size_t n = self.value.size();
    const auto& g = self.grad;
    if (pa->requires_grad) {
      double* ga = pa->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        const double x = pa->value[a_scalar ? 0 : i], y = pb->value[b_scalar ? 0 : i];
        ga[a_scalar ? 0 : i] += g[i] * da(x, y);
      }
    }
    if (pb->requires_grad) {
      double* gb = pb->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        const double x = pa->value[a_scalar ? 0 : i], y = pb->value[b_scalar ? 0 : i];
        gb[b_scalar ? 0 : i] += g[i] * db(x, y);
      }
    }
  }));
}

template <typename Fwd, typename D>
Tensor unary(const Tensor& a, Fwd fwd, D d) {
  const auto& av = a.node()->value;
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  NodePtr pa = a.node();
  return Tensor(make_node(a.shape(), std::move(out), {pa}, [pa, d](Node& self) {
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < self.value.size(); ++i) ga[i] += self.grad[i] * d(pa->value[i], self.value[i]);
  }));
}

}  // namespace

// ---- Tensor ---------------------------------------------------------------

Tensor::Tensor() : node_(std::make_shared<Node>()) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(shape, 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  return from(shape, std::vector<double>(shape.size(), v), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.size()) {
    throw DimensionError("tensor of shape " + shape.str() + " given " + std::to_string(values.size()) +
                         " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return from({1, 1}, {v}); }

Tensor Tensor::uniform(Shape shape, double lo, double hi, std::mt19937_64& rng, bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape.size());
  for (auto& x : v) x = dist(rng);
  return from(shape, std::move(v), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape().str());
  return node_->value[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() const { node_->grad.clear(); }

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

void Tensor::backward() const {
  if (size() != 1) throw DimensionError("backward() without seed needs a 1x1 tensor, got " + shape().str());
  const double one = 1.0;
  backward(std::span<const double>(&one, 1));
}

void Tensor::backward(std::span<const double> seed) const {
  if (seed.size() != size()) throw DimensionError("backward seed size does not match " + shape().str());
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order; walk it in reverse.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Interior grads describe only the current pass; leaves keep accumulating.
  for (Node* n : order) {
    if (n->backward) n->grad.clear();
  }
  double* g = node_->grad_buffer();
  for (std::size_t i = 0; i < seed.size(); ++i) g[i] += seed[i];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

// ---- linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions of " + a.shape().str() + " and " + b.shape().str() +
                         " disagree");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = &bv[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  NodePtr pa = a.node(), pb = b.node();
  return Tensor(make_node({m, n}, std::move(out), {pa, pb}, [pa, pb, m, k, n](Node& self) {
    const auto& g = self.grad;
    if (pa->requires_grad) {
      // dA = G * B^T
      double* ga = pa->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * pb->value[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (pb->requires_grad) {
      // dB = A^T * G
      double* gb = pb->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double x = pa->value[i * k + p];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * g[i * n + j];
        }
    }
  }));
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.at(i, j);
  NodePtr pa = a.node();
  return Tensor(make_node({c, r}, std::move(out), {pa}, [pa, r, c](Node& self) {
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[j * r + i];
  }));
}

// ---- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor pow(const Tensor& a, double exponent) {
  return unary(
      a, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) {
        if (exponent == 0.0) return 0.0;
        if (exponent == 1.0) return 1.0;
        return exponent * std::pow(x, exponent - 1.0);
      });
}

// ---- reductions -----------------------------------------------------------

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  NodePtr pa = a.node();
  return Tensor(make_node({1, 1}, {s}, {pa}, [pa](Node& self) {
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < pa->value.size(); ++i) ga[i] += self.grad[0];
  }));
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor row_sum(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += a.at(i, j);
  NodePtr pa = a.node();
  return Tensor(make_node({r, 1}, std::move(out), {pa}, [pa, r, c](Node& self) {
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[i];
  }));
}

Tensor col_mean(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  if (r == 0) throw DimensionError("col_mean of tensor with zero rows");
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += a.at(i, j);
  const double inv = 1.0 / static_cast<double>(r);
  for (auto& x : out) x *= inv;
  NodePtr pa = a.node();
  return Tensor(make_node({1, c}, std::move(out), {pa}, [pa, r, c, inv](Node& self) {
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[j] * inv;
  }));
}

Tensor l2norm(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x * x;
  const double norm = std::sqrt(s);
  NodePtr pa = a.node();
  return Tensor(make_node({1, 1}, {norm}, {pa}, [pa, norm](Node& self) {
    if (norm == 0.0) return;  // subgradient 0 at the origin
    double* ga = pa->grad_buffer();
    for (std::size_t i = 0; i < pa->value.size(); ++i) ga[i] += self.grad[0] * pa->value[i] / norm;
  }));
}

Tensor cosine_sim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "cosine_sim");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r), na(r), nb(r);
  for (std::size_t i = 0; i < r; ++i) {
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      dot += a.at(i, j) * b.at(i, j);
      sa += a.at(i, j) * a.at(i, j);
      sb += b.at(i, j) * b.at(i, j);
    }
    if (sa == 0.0 || sb == 0.0) {
      throw NumericError("cosine_sim: row " + std::to_string(i) + " is a zero vector");
    }
    na[i] = std::sqrt(sa);
    nb[i] = std::sqrt(sb);
    out[i] = dot / (na[i] * nb[i]);
  }
  NodePtr pa = a.node(), pb = b.node();
  return Tensor(make_node({r, 1}, out, {pa, pb}, [pa, pb, r, c, na, nb, out](Node& self) {
    // d cos / d a = b / (|a||b|) - cos * a / |a|^2
    for (std::size_t i = 0; i < r; ++i) {
      const double g = self.grad[i];
      if (g == 0.0) continue;
      const double inv = 1.0 / (na[i] * nb[i]);
      if (pa->requires_grad) {
        double* ga = pa->grad_buffer();
        for (std::size_t j = 0; j < c; ++j) {
          const double av = pa->value[i * c + j], bv = pb->value[i * c + j];
          ga[i * c + j] += g * (bv * inv - out[i] * av / (na[i] * na[i]));
        }
      }
      if (pb->requires_grad) {
        double* gb = pb->grad_buffer();
        for (std::size_t j = 0; j < c; ++j) {
          const double av = pa->value[i * c + j], bv = pb->value[i * c + j];
          gb[i * c + j] += g * (av * inv - out[i] * bv / (nb[i] * nb[i]));
        }
      }
    }
  }));
}

// ---- indexing / structure -------------------------------------------------

Tensor segment_sum(const Tensor& values, std::span<const std::size_t> segments, std::size_t num_segments) {
  if (segments.size() != values.rows()) {
    throw DimensionError("segment_sum: " + std::to_string(segments.size()) + " segment ids for " +
                         values.shape().str() + " values");
  }
  const std::size_t f = values.cols();
  std::vector<double> out(num_segments * f, 0.0);
  const auto& v = values.node()->value;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::size_t s = segments[i];
    if (s >= num_segments) {
      throw IndexError("segment_sum: segment id " + std::to_string(s) + " >= " + std::to_string(num_segments));
    }
    for (std::size_t j = 0; j < f; ++j) out[s * f + j] += v[i * f + j];
  }
  NodePtr pv = values.node();
  std::vector<std::size_t> seg(segments.begin(), segments.end());
  return Tensor(make_node({num_segments, f}, std::move(out), {pv}, [pv, seg = std::move(seg), f](Node& self) {
    double* g = pv->grad_buffer();
    for (std::size_t i = 0; i < seg.size(); ++i)
      for (std::size_t j = 0; j < f; ++j) g[i * f + j] += self.grad[seg[i] * f + j];
  }));
}

Tensor gather_rows(const Tensor& values, std::span<const std::size_t> indices) {
  const std::size_t f = values.cols();
  std::vector<double> out(indices.size() * f);
  const auto& v = values.node()->value;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= values.rows()) {
      throw IndexError("gather_rows: row " + std::to_string(indices[k]) + " of " + values.shape().str());
    }
    std::copy_n(&v[indices[k] * f], f, &out[k * f]);
  }
  NodePtr pv = values.node();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return Tensor(make_node({indices.size(), f}, std::move(out), {pv}, [pv, idx = std::move(idx), f](Node& self) {
    double* g = pv->grad_buffer();
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t j = 0; j < f; ++j) g[idx[k] * f + j] += self.grad[k * f + j];
  }));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts of " + a.shape().str() + " and " + b.shape().str() + " differ");
  }
  const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols();
  std::vector<double> out(r * (ca + cb));
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(&a.node()->value[i * ca], ca, &out[i * (ca + cb)]);
    std::copy_n(&b.node()->value[i * cb], cb, &out[i * (ca + cb) + ca]);
  }
  NodePtr pa = a.node(), pb = b.node();
  return Tensor(make_node({r, ca + cb}, std::move(out), {pa, pb}, [pa, pb, r, ca, cb](Node& self) {
    const std::size_t w = ca + cb;
    if (pa->requires_grad) {
      double* g = pa->grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < ca; ++j) g[i * ca + j] += self.grad[i * w + j];
    }
    if (pb->requires_grad) {
      double* g = pb->grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cb; ++j) g[i * cb + j] += self.grad[i * w + ca + j];
    }
  }));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: column counts of " + a.shape().str() + " and " + b.shape().str() +
                         " differ");
  }
  std::vector<double> out(a.node()->value);
  out.insert(out.end(), b.node()->value.begin(), b.node()->value.end());
  NodePtr pa = a.node(), pb = b.node();
  const std::size_t na = a.size();
  return Tensor(make_node({a.rows() + b.rows(), a.cols()}, std::move(out), {pa, pb}, [pa, pb, na](Node& self) {
    if (pa->requires_grad) {
      double* g = pa->grad_buffer();
      for (std::size_t i = 0; i < na; ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      double* g = pb->grad_buffer();
      for (std::size_t i = 0; i < pb->value.size(); ++i) g[i] += self.grad[na + i];
    }
  }));
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw DimensionError("add_row: bias " + bias.shape().str() + " does not match " + a.shape().str());
  }
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.node()->value);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias.node()->value[j];
  NodePtr pa = a.node(), pb = bias.node();
  return Tensor(make_node(a.shape(), std::move(out), {pa, pb}, [pa, pb, r, c](Node& self) {
    if (pa->requires_grad) {
      double* g = pa->grad_buffer();
      for (std::size_t i = 0; i < r * c; ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      double* g = pb->grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += self.grad[i * c + j];
    }
  }));
}

// ---- gradient routing -----------------------------------------------------

Tensor stop_gradient(const Tensor& a) { return a.detach(); }

Tensor straight_through(const Tensor& input, const Tensor& target) {
  require_same_shape(input, target, "straight_through");
  NodePtr pin = input.node();
  return Tensor(make_node(input.shape(), target.node()->value, {pin}, [pin](Node& self) {
    double* g = pin->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  }));
}

// ---- fused losses ---------------------------------------------------------

Tensor bce_with_logits(const Tensor& logits, const Tensor& labels) {
  require_same_shape(logits, labels, "bce_with_logits");
  if (logits.size() == 0) throw DimensionError("bce_with_logits on empty batch");
  const auto& x = logits.node()->value;
  const auto& y = labels.node()->value;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += std::max(x[i], 0.0) - x[i] * y[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const double inv = 1.0 / static_cast<double>(x.size());
  NodePtr px = logits.node();
  std::vector<double> ycopy(y);
  return Tensor(make_node({1, 1}, {s * inv}, {px}, [px, ycopy = std::move(ycopy), inv](Node& self) {
    double* g = px->grad_buffer();
    for (std::size_t i = 0; i < ycopy.size(); ++i) {
      const double z = px->value[i];
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      g[i] += self.grad[0] * (p - ycopy[i]) * inv;
    }
  }));
}

}  // namespace mcppi
