#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adatag/autodiff.hpp"
#include "adatag/tensor.hpp"

// Linear-chain CRF over L tags without start/stop states.
//
//   P  [L, n]  emission scores, P(t, j) = score of tag t at token j
//   T  [L, L]  transition scores, T(u, v) = score of tag u followed by v
//   z  n tag indices in [0, L)
//
//   s(z) = sum_{j<n-1} T(z_j, z_{j+1}) + sum_j P(z_j, j)
namespace adatag::crf {

double score(const Tensor& emissions, const Tensor& transitions,
             std::span<const std::size_t> tags);

// log sum_{z in L^n} exp s(z), via the forward recursion in log space.
double log_partition(const Tensor& emissions, const Tensor& transitions);

// log_partition - score; >= 0.
double nll(const Tensor& emissions, const Tensor& transitions,
           std::span<const std::size_t> tags);

struct Path {
  std::vector<std::size_t> tags;
  double score = 0.0;  // s(tags), summed in the same order as score()
};

// Highest-scoring sequence. Ties go to the lowest tag index, both for the
// final tag and for every back-pointer.
Path viterbi(const Tensor& emissions, const Tensor& transitions);

struct Marginals {
  double log_z = 0.0;
  Tensor unary;     // [L, n]   p(z_j = t)
  Tensor pairwise;  // [L, L]   sum_j p(z_j = u, z_{j+1} = v)
};

Marginals marginals(const Tensor& emissions, const Tensor& transitions);

// Differentiable NLL. The backward pass uses the forward-backward marginals:
// dP = p(z_j = t) - [gold_j = t], dT = E[#(u -> v)] - #gold(u -> v).
ad::Var nll(ad::Var emissions, ad::Var transitions, std::vector<std::size_t> tags);

}  // namespace adatag::crf
