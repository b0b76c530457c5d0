#include "adatag/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "adatag/error.hpp"
#include "adatag/kernels.hpp"

namespace adatag::decoder {

namespace {

void check_affine(const char* what, const Tensor& weight, const Tensor& bias,
                  const Tensor& input) {
  if (weight.rank() != 2 || input.rank() != 1 || weight.dim(1) != input.size() ||
      bias.size() != weight.dim(0)) {
    throw ShapeError(std::string(what) + ": weight " + shape_string(weight.shape()) +
                     ", bias " + shape_string(bias.shape()) + ", input " +
                     shape_string(input.shape()));
  }
}

Tensor affine(const Tensor& weight, const Tensor& bias, const Tensor& input) {
  Tensor out(Shape{weight.dim(0)});
  kernels::gemv(weight.data(), weight.dim(0), weight.dim(1), input.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i];
  return out;
}

std::size_t experts_count(const Tensor& experts) {
  if (experts.rank() != 3 || experts.dim(1) != experts.dim(2)) {
    throw ShapeError("moe: experts must be [k, L, L], got " + shape_string(experts.shape()));
  }
  return experts.dim(0);
}

}  // namespace

Linear generate_linear(const Tensor& r, const HyperWeights& hyper) {
  check_affine("hypernetwork (W)", hyper.w_weight, hyper.w_bias, r);
  check_affine("hypernetwork (b)", hyper.b_weight, hyper.b_bias, r);
  const std::size_t rows = hyper.b_bias.size();
  if (hyper.w_bias.size() % rows != 0) {
    throw ShapeError("hypernetwork: " + std::to_string(hyper.w_bias.size()) +
                     " generated weights do not reshape to " + std::to_string(rows) + " rows");
  }
  const std::size_t d_h = hyper.w_bias.size() / rows;
  return Linear{affine(hyper.w_weight, hyper.w_bias, r).reshaped(Shape{rows, d_h}),
                affine(hyper.b_weight, hyper.b_bias, r)};
}

Tensor gate(const Tensor& r, const MoeWeights& moe) {
  check_affine("moe gate", moe.gate_weight, moe.gate_bias, r);
  Tensor logits = affine(moe.gate_weight, moe.gate_bias, r);
  const double mx = *std::max_element(logits.data().begin(), logits.data().end());
  double z = 0.0;
  for (double& v : logits.data()) z += (v = std::exp(v - mx));
  for (double& v : logits.data()) v /= z;
  return logits;
}

Tensor mix_transition(const Tensor& lambda, const Tensor& experts) {
  const std::size_t k = experts_count(experts);
  if (lambda.size() != k) {
    throw ShapeError("mix_transition: " + std::to_string(lambda.size()) +
                     " weights for " + std::to_string(k) + " experts");
  }
  const std::size_t L = experts.dim(1);
  Tensor out(Shape{L, L});
  kernels::gemv_t_acc(experts.data(), k, L * L, lambda.data(), out.data());
  return out;
}

DecoderInstance generate(const Tensor& r, const HyperWeights& hyper, const MoeWeights& moe) {
  Linear lin = generate_linear(r, hyper);
  return DecoderInstance{std::move(lin.weight), std::move(lin.bias),
                         mix_transition(gate(r, moe), moe.experts)};
}

Tensor emissions(const Tensor& hidden, const Tensor& weight, const Tensor& bias) {
  if (hidden.rank() != 2 || weight.rank() != 2 || hidden.dim(1) != weight.dim(1) ||
      bias.size() != weight.dim(0)) {
    throw ShapeError("emissions: hidden " + shape_string(hidden.shape()) + ", weight " +
                     shape_string(weight.shape()) + ", bias " + shape_string(bias.shape()));
  }
  const std::size_t n = hidden.dim(0), L = weight.dim(0), d = weight.dim(1);
  Tensor out(Shape{L, n});
  std::vector<double> col(L);
  for (std::size_t j = 0; j < n; ++j) {
    kernels::gemv(weight.data(), L, d, hidden.row(j), col);
    for (std::size_t t = 0; t < L; ++t) out.at(t, j) = col[t] + bias[t];
  }
  return out;
}

// ---- graph ------------------------------------------------------------------

ad::Var gate(ad::Var r, const MoeVars& moe) {
  return ad::softmax(ad::add(ad::matmul(moe.gate_weight, r), moe.gate_bias));
}

ad::Var mix_transition(ad::Var lambda, ad::Var experts) {
  const std::size_t k = experts_count(experts.value());
  const std::size_t L = experts.value().dim(1);
  ad::Var flat = ad::reshape(experts, Shape{k, L * L});
  return ad::reshape(ad::matmul(lambda, flat), Shape{L, L});
}

DecoderVars generate(ad::Var r, const HyperVars& hyper, const MoeVars& moe) {
  const std::size_t rows = hyper.b_bias.value().size();
  const std::size_t total = hyper.w_bias.value().size();
  if (rows == 0 || total % rows != 0) {
    throw ShapeError("hypernetwork: cannot reshape " + std::to_string(total) + " into " +
                     std::to_string(rows) + " rows");
  }
  ad::Var w = ad::reshape(ad::add(ad::matmul(hyper.w_weight, r), hyper.w_bias),
                          Shape{rows, total / rows});
  ad::Var b = ad::add(ad::matmul(hyper.b_weight, r), hyper.b_bias);
  return DecoderVars{w, b, mix_transition(gate(r, moe), moe.experts)};
}

ad::Var emissions(ad::Var hidden, ad::Var weight, ad::Var bias) {
  return ad::add_column_bias(ad::matmul(weight, ad::transpose(hidden)), bias);
}

}  // namespace adatag::decoder
