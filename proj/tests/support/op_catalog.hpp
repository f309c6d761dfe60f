#pragma once

// Every differentiable operation paired with a randomized gradient check.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "mcppi/codebook.hpp"
#include "mcppi/hgnn.hpp"
#include "mcppi/nn.hpp"
#include "mcppi/ppi_net.hpp"
#include "mcppi/synth.hpp"
#include "mcppi/tensor.hpp"

namespace mcppi::testing {

struct OpCheck {
  std::string name;
  std::function<GradCheckResult(std::uint64_t seed)> run;
};

/// Scalar reduction with a fixed random weighting so every output cell
/// contributes a distinct amount.
inline Tensor project(const Tensor& t, std::mt19937_64& rng) {
  return sum(mul(t, random_tensor(t.shape(), rng)));
}

inline HeteroProteinGraph small_graph(std::size_t n, std::uint64_t seed) {
  const Protein p = gen_protein("g", {n, n}, seed);
  return build_hetero_graph(p, {2, 6.0, 2});
}

namespace detail {

using Fn = std::function<Tensor(const std::vector<Tensor>&)>;

inline OpCheck unary(std::string name, Shape s, std::function<Tensor(const Tensor&)> op, bool avoid_zero = false,
                     double lo = -1.0, double hi = 1.0) {
  return {name, [=](std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            const Tensor x = avoid_zero ? random_away_from_zero(s, rng) : random_tensor(s, rng, lo, hi);
            const std::uint64_t proj_seed = rng();
            return grad_check(
                [&](const std::vector<Tensor>& in) {
                  std::mt19937_64 prng(proj_seed);
                  return project(op(in[0]), prng);
                },
                {x});
          }};
}

inline OpCheck binary(std::string name, Shape sa, Shape sb, std::function<Tensor(const Tensor&, const Tensor&)> op) {
  return {name, [=](std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            const Tensor a = random_tensor(sa, rng), b = random_tensor(sb, rng);
            const std::uint64_t proj_seed = rng();
            return grad_check(
                [&](const std::vector<Tensor>& in) {
                  std::mt19937_64 prng(proj_seed);
                  return project(op(in[0], in[1]), prng);
                },
                {a, b});
          }};
}

inline GradCheckResult worst_of(std::initializer_list<GradCheckResult> results) {
  GradCheckResult w;
  for (const auto& r : results)
    if (r.max_rel_error > w.max_rel_error) w = r;
  return w;
}

}  // namespace detail

inline std::vector<OpCheck> op_catalog() {
  using detail::binary;
  using detail::unary;
  std::vector<OpCheck> ops;

  ops.push_back(binary("matmul", {3, 4}, {4, 2}, [](auto& a, auto& b) { return matmul(a, b); }));
  ops.push_back(unary("transpose", {3, 2}, [](auto& a) { return transpose(a); }));
  ops.push_back(binary("add", {3, 2}, {3, 2}, [](auto& a, auto& b) { return add(a, b); }));
  ops.push_back(binary("add_scalar_broadcast", {3, 2}, {1, 1}, [](auto& a, auto& b) { return add(a, b); }));
  ops.push_back(binary("sub", {2, 3}, {2, 3}, [](auto& a, auto& b) { return sub(a, b); }));
  ops.push_back(binary("sub_scalar_broadcast", {1, 1}, {2, 3}, [](auto& a, auto& b) { return sub(a, b); }));
  ops.push_back(binary("mul", {3, 3}, {3, 3}, [](auto& a, auto& b) { return mul(a, b); }));
  ops.push_back(binary("mul_scalar_broadcast", {1, 1}, {2, 4}, [](auto& a, auto& b) { return mul(a, b); }));
  ops.push_back(unary("scale", {2, 3}, [](auto& a) { return scale(a, -1.7); }));
  ops.push_back(unary("relu", {3, 4}, [](auto& a) { return relu(a); }, true));
  ops.push_back(unary("sigmoid", {3, 4}, [](auto& a) { return sigmoid(mcppi::scale(a, 3.0)); }));
  ops.push_back(unary("pow_2", {2, 3}, [](auto& a) { return pow(a, 2.0); }));
  ops.push_back(unary("pow_3", {2, 3}, [](auto& a) { return pow(a, 3.0); }));
  ops.push_back(unary("pow_half", {2, 3}, [](auto& a) { return pow(a, 0.5); }, false, 0.2, 2.0));
  ops.push_back(unary("pow_neg", {2, 3}, [](auto& a) { return pow(a, -1.5); }, false, 0.5, 2.0));
  ops.push_back(unary("sum", {3, 2}, [](auto& a) { return mul(sum(a), sum(a)); }));
  ops.push_back(unary("mean", {3, 2}, [](auto& a) { return mul(mean(a), sum(a)); }));
  ops.push_back(unary("row_sum", {4, 3}, [](auto& a) { return row_sum(a); }));
  ops.push_back(unary("col_mean", {4, 3}, [](auto& a) { return col_mean(a); }));
  ops.push_back(unary("l2norm", {3, 3}, [](auto& a) { return l2norm(a); }, true));
  ops.push_back(binary("cosine_sim", {4, 3}, {4, 3}, [](auto& a, auto& b) { return cosine_sim(a, b); }));
  ops.push_back(unary("segment_sum", {5, 2}, [](auto& a) {
    const std::vector<std::size_t> seg = {2, 0, 2, 1, 0};
    return segment_sum(a, seg, 4);
  }));
  ops.push_back(unary("gather_rows", {4, 2}, [](auto& a) {
    const std::vector<std::size_t> idx = {3, 0, 3, 1, 3};
    return gather_rows(a, idx);
  }));
  ops.push_back(binary("concat_cols", {3, 2}, {3, 1}, [](auto& a, auto& b) { return concat_cols(a, b); }));
  ops.push_back(binary("concat_rows", {2, 3}, {1, 3}, [](auto& a, auto& b) { return concat_rows(a, b); }));
  ops.push_back(binary("add_row", {4, 3}, {1, 3}, [](auto& a, auto& b) { return add_row(a, b); }));
  ops.push_back({"stop_gradient", [](std::uint64_t seed) {
                   // a * sg(b) + b: numerically, sg(b) is frozen at its base value.
                   std::mt19937_64 rng(seed);
                   const Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng);
                   const std::uint64_t ps = rng();
                   auto build = [&](const Tensor& x, const Tensor& y, const Tensor& stopped) {
                     std::mt19937_64 prng(ps);
                     return project(add(mul(x, stopped), y), prng);
                   };
                   return grad_check([&](const auto& in) { return build(in[0], in[1], stop_gradient(in[1])); },
                                     [&](const auto& in) { return build(in[0], in[1], b); }, {a, b});
                 }});
  ops.push_back({"straight_through", [](std::uint64_t seed) {
                   // st(a, b)^2 + a * b, with st(a, b) = a + sg(b - a).
                   std::mt19937_64 rng(seed);
                   const Tensor a = random_tensor({3, 2}, rng), b = random_tensor({3, 2}, rng);
                   const Tensor offset = sub(b, a);
                   const std::uint64_t ps = rng();
                   auto build = [&](const Tensor& st, const Tensor& x, const Tensor& y) {
                     std::mt19937_64 prng(ps);
                     return project(add(pow(st, 2.0), mul(x, y)), prng);
                   };
                   return grad_check(
                       [&](const auto& in) { return build(straight_through(in[0], in[1]), in[0], in[1]); },
                       [&](const auto& in) { return build(add(in[0], offset), in[0], in[1]); }, {a, b});
                 }});

  ops.push_back({"bce_with_logits", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const Tensor logits = random_tensor({4, 7}, rng, -4.0, 4.0);
                   std::bernoulli_distribution coin(0.4);
                   std::vector<double> y(28);
                   for (auto& v : y) v = coin(rng) ? 1.0 : 0.0;
                   const Tensor labels = Tensor::from({4, 7}, y);
                   return grad_check([&](const auto& in) { return bce_with_logits(in[0], labels); }, {logits});
                 }});

  ops.push_back({"linear", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   Linear lin("lin", 3, 2, true, rng);
                   const Tensor x = random_tensor({4, 3}, rng);
                   const std::uint64_t ps = rng();
                   auto f = [&](const Tensor& in) {
                     std::mt19937_64 prng(ps);
                     return project(lin.forward(in), prng);
                   };
                   return detail::worst_of(
                       {grad_check([&](const auto& in) { return f(in[0]); }, {x}),
                        param_grad_check([&] { return f(x); }, {&lin.weight(), &lin.bias()})});
                 }});

  ops.push_back({"batch_norm_train", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   BatchNorm bn("bn", 3);
                   for (auto& v : bn.scale().mutable_values()) v = std::uniform_real_distribution(0.5, 1.5)(rng);
                   for (auto& v : bn.shift().mutable_values()) v = std::uniform_real_distribution(-0.5, 0.5)(rng);
                   const Tensor x = random_tensor({5, 3}, rng);
                   const std::uint64_t ps = rng();
                   auto f = [&](const Tensor& in) {
                     std::mt19937_64 prng(ps);
                     return project(batch_norm(in, bn, Mode::kTrain), prng);
                   };
                   return detail::worst_of(
                       {grad_check([&](const auto& in) { return f(in[0]); }, {x}),
                        param_grad_check([&] { return f(x); }, {&bn.scale(), &bn.shift()})});
                 }});

  ops.push_back({"batch_norm_eval", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   BatchNorm bn("bn", 3);
                   for (int i = 0; i < 3; ++i) batch_norm(random_tensor({6, 3}, rng, 0.0, 2.0), bn, Mode::kTrain);
                   const Tensor x = random_tensor({4, 3}, rng);
                   const std::uint64_t ps = rng();
                   return grad_check(
                       [&](const auto& in) {
                         std::mt19937_64 prng(ps);
                         return project(batch_norm(in[0], bn, Mode::kEval), prng);
                       },
                       {x});
                 }});

  ops.push_back({"hgnn_layer", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const auto g = small_graph(6, seed);
                   const auto index = MessageIndex::from_graph(g);
                   HgnnLayer layer("layer", 3, 2, false, rng);
                   const Tensor x = random_tensor({6, 3}, rng);
                   const std::uint64_t ps = rng();
                   auto f = [&](const Tensor& in) {
                     std::mt19937_64 prng(ps);
                     return project(layer.forward(index, in, Mode::kTrain), prng);
                   };
                   ParameterList params;
                   layer.collect(params);
                   return detail::worst_of({grad_check([&](const auto& in) { return f(in[0]); }, {x}),
                                            param_grad_check([&] { return f(x); }, params)});
                 }});

  ops.push_back({"decoder_reconstruction_mse", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const auto g = small_graph(5, seed);
                   HgnnStack decoder("dec", StackDirection::kDecoder, 4, 3, 2, rng);
                   const Tensor z = random_tensor({5, 3}, rng);
                   const Tensor target = random_tensor({5, 4}, rng);
                   ParameterList params;
                   decoder.collect(params);
                   return param_grad_check(
                       [&] { return mean(pow(sub(decoder.forward(g, z, Mode::kTrain), target), 2.0)); }, params);
                 }});

  ops.push_back({"gin_layer", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   GinLayer layer("gin", 3, 2, rng);
                   layer.eps().mutable_values()[0] = std::uniform_real_distribution(-0.5, 0.5)(rng);
                   const std::vector<PpiEdge> edges = {{0, 1, {}}, {1, 2, {}}, {2, 3, {}}, {0, 2, {}}};
                   const auto adj = PpiAdjacency::from_edges(4, edges);
                   const Tensor x = random_tensor({4, 3}, rng);
                   const std::uint64_t ps = rng();
                   auto f = [&](const Tensor& in) {
                     std::mt19937_64 prng(ps);
                     return project(layer.forward(adj, in), prng);
                   };
                   ParameterList params;
                   layer.collect(params);
                   return detail::worst_of({grad_check([&](const auto& in) { return f(in[0]); }, {x}),
                                            param_grad_check([&] { return f(x); }, params)});
                 }});

  ops.push_back({"pair_logits", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   Linear fc("fc", 3, 7, true, rng);
                   const Tensor z = random_tensor({4, 3}, rng);
                   const std::vector<std::size_t> a = {0, 1, 2}, b = {3, 2, 0};
                   const std::uint64_t ps = rng();
                   auto f = [&](const Tensor& in) {
                     std::mt19937_64 prng(ps);
                     return project(pair_logits(in, a, b, fc), prng);
                   };
                   return detail::worst_of(
                       {grad_check([&](const auto& in) { return f(in[0]); }, {z}),
                        param_grad_check([&] { return f(z); }, {&fc.weight(), &fc.bias()})});
                 }});

  ops.push_back(binary("readout", {5, 3}, {5, 3}, [](auto& a, auto& b) { return readout(a, b); }));

  ops.push_back({"ppi_bce_loss", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   const Tensor logits = random_tensor({3, 7}, rng, -3.0, 3.0);
                   std::bernoulli_distribution coin(0.5);
                   std::vector<double> y(21);
                   for (auto& v : y) v = coin(rng) ? 1.0 : 0.0;
                   const Tensor labels = Tensor::from({3, 7}, y);
                   return grad_check([&](const auto& in) { return ppi_bce_loss(in[0], labels); }, {logits});
                 }});

  ops.push_back({"vq_loss", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   Codebook cb("cb", 4, 3, rng);
                   for (auto& v : cb.vectors().mutable_values()) v = std::uniform_real_distribution(-1.0, 1.0)(rng);
                   const Tensor x = random_tensor({5, 3}, rng);
                   const Tensor x_hat = random_tensor({5, 3}, rng);
                   const Tensor h = random_tensor({5, 3}, rng);
                   const auto base = quantize(h, cb);
                   const Tensor e0 = base.quantized.detach();
                   auto analytic = [&](const Tensor& xh, const Tensor& hh) {
                     const auto q = quantize(hh, cb);
                     return vq_loss(x, add(xh, q.straight_through), hh, q, 0.25).total;
                   };
                   // Stopped operands frozen at the base point; codes fixed.
                   auto numeric = [&](const Tensor& xh, const Tensor& hh) {
                     const Tensor e = gather_rows(cb.vectors().tensor(), base.codes);
                     auto msd = [](const Tensor& u, const Tensor& v) {
                       const Tensor d = sub(u, v);
                       return scale(sum(mul(d, d)), 1.0 / static_cast<double>(u.rows()));
                     };
                     const Tensor st = add(hh, sub(e0, h));
                     return add(add(msd(x, add(xh, st)), msd(h, e)), scale(msd(hh, e0), 0.25));
                   };
                   return detail::worst_of(
                       {grad_check([&](const auto& in) { return analytic(in[0], in[1]); },
                                   [&](const auto& in) { return numeric(in[0], in[1]); }, {x_hat, h}),
                        param_grad_check([&] { return analytic(x_hat, h); }, [&] { return numeric(x_hat, h); },
                                         {&cb.vectors()})});
                 }});

  ops.push_back({"masked_lookup", [](std::uint64_t seed) {
                   std::mt19937_64 rng(seed);
                   Codebook cb("cb", 6, 3, rng);
                   for (auto& v : cb.vectors().mutable_values()) v = std::uniform_real_distribution(-1.0, 1.0)(rng);
                   const auto plan = sample_mask(6, 0.5, rng);
                   const std::vector<std::size_t> codes = {0, 1, 2, 3, 4, 5, 2, 0};
                   const std::uint64_t ps = rng();
                   return param_grad_check(
                       [&] {
                         std::mt19937_64 prng(ps);
                         return project(masked_lookup(codes, cb, plan).rows, prng);
                       },
                       {&cb.vectors(), &cb.mask_vector()});
                 }});

  for (double gamma : {1.0, 1.5, 2.0}) {
    ops.push_back({"mcm_loss_gamma_x10_" + std::to_string(static_cast<int>(gamma * 10)), [gamma](std::uint64_t seed) {
                     std::mt19937_64 rng(seed);
                     const Tensor x = random_away_from_zero({6, 4}, rng, 0.2);
                     const Tensor x_tilde = random_tensor({6, 4}, rng);
                     const std::vector<std::size_t> masked = {0, 2, 3, 5};
                     return grad_check([&](const auto& in) { return mcm_loss(x, in[0], masked, gamma); },
                                       {x_tilde});
                   }});
  }

  return ops;
}

}  // namespace mcppi::testing
