#pragma once

#include <cstddef>

#include "adatag/autodiff.hpp"
#include "adatag/tensor.hpp"

// Attribute-conditioned CRF decoder parameters.
//
// A hypernetwork turns the attribute embedding r [d_r] into the emission
// layer:   W = reshape(W_hyper_w r + b_hyper_w) -> [4, d_h] (row-major),
//          b = W_hyper_b r + b_hyper_b          -> [4].
// A mixture of k expert transition matrices gives T:
//          lambda = softmax(W_moe r + b_moe),  T = sum_i lambda_i T_i.
namespace adatag::decoder {

struct HyperWeights {
  const Tensor& w_weight;  // [4 d_h, d_r]
  const Tensor& w_bias;    // [4 d_h]
  const Tensor& b_weight;  // [4, d_r]
  const Tensor& b_bias;    // [4]
};

struct MoeWeights {
  const Tensor& gate_weight;  // [k, d_r]
  const Tensor& gate_bias;    // [k]
  const Tensor& experts;      // [k, 4, 4]
};

struct DecoderInstance {
  Tensor weight;       // [L, d_h]
  Tensor bias;         // [L]
  Tensor transitions;  // [L, L]
};

struct Linear {
  Tensor weight;
  Tensor bias;
};

Linear generate_linear(const Tensor& r, const HyperWeights& hyper);
Tensor gate(const Tensor& r, const MoeWeights& moe);
Tensor mix_transition(const Tensor& lambda, const Tensor& experts);
DecoderInstance generate(const Tensor& r, const HyperWeights& hyper, const MoeWeights& moe);

// P [L, n] with column j = W h_j + b, for H [n, d_h].
Tensor emissions(const Tensor& hidden, const Tensor& weight, const Tensor& bias);

// ---- graph versions ----------------------------------------------------------

struct HyperVars {
  ad::Var w_weight, w_bias, b_weight, b_bias;
};
struct MoeVars {
  ad::Var gate_weight, gate_bias, experts;
};
struct DecoderVars {
  ad::Var weight, bias, transitions;
};

DecoderVars generate(ad::Var r, const HyperVars& hyper, const MoeVars& moe);
ad::Var gate(ad::Var r, const MoeVars& moe);
ad::Var mix_transition(ad::Var lambda, ad::Var experts);
ad::Var emissions(ad::Var hidden, ad::Var weight, ad::Var bias);

}  // namespace adatag::decoder
