#include "adatag/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adatag/error.hpp"

namespace adatag::crf {

namespace {

void check_shapes(const Tensor& p, const Tensor& t) {
  if (p.rank() != 2 || t.rank() != 2 || t.dim(0) != t.dim(1) || t.dim(0) != p.dim(0)) {
    throw ShapeError("crf: emissions " + shape_string(p.shape()) + " and transitions " +
                     shape_string(t.shape()) + " are incompatible");
  }
  if (p.dim(1) == 0) throw ShapeError("crf: empty sequence");
}

void check_tags(const Tensor& p, std::span<const std::size_t> tags) {
  if (tags.size() != p.dim(1)) {
    throw DataError("crf: " + std::to_string(tags.size()) + " tags for " +
                    std::to_string(p.dim(1)) + " tokens");
  }
  for (std::size_t z : tags) {
    if (z >= p.dim(0)) {
      throw DataError("crf: tag index " + std::to_string(z) + " out of range for " +
                      std::to_string(p.dim(0)) + " tags");
    }
  }
}

double lse(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// alpha [n, L]: log-sum of prefix scores ending in each tag.
std::vector<double> forward(const Tensor& p, const Tensor& t) {
  const std::size_t L = p.dim(0), n = p.dim(1);
  std::vector<double> alpha(n * L);
  std::vector<double> buf(L);
  for (std::size_t v = 0; v < L; ++v) alpha[v] = p.at(v, 0);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t v = 0; v < L; ++v) {
      for (std::size_t u = 0; u < L; ++u) buf[u] = alpha[(j - 1) * L + u] + t.at(u, v);
      alpha[j * L + v] = lse(buf) + p.at(v, j);
    }
  }
  return alpha;
}

// beta [n, L]: log-sum of suffix scores after each tag (beta_{n-1} = 0).
std::vector<double> backward(const Tensor& p, const Tensor& t) {
  const std::size_t L = p.dim(0), n = p.dim(1);
  std::vector<double> beta(n * L, 0.0);
  std::vector<double> buf(L);
  for (std::size_t j = n - 1; j-- > 0;) {
    for (std::size_t u = 0; u < L; ++u) {
      for (std::size_t v = 0; v < L; ++v) {
        buf[v] = t.at(u, v) + p.at(v, j + 1) + beta[(j + 1) * L + v];
      }
      beta[j * L + u] = lse(buf);
    }
  }
  return beta;
}

}  // namespace

double score(const Tensor& emissions, const Tensor& transitions,
             std::span<const std::size_t> tags) {
  check_shapes(emissions, transitions);
  check_tags(emissions, tags);
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < tags.size(); ++j) s += transitions.at(tags[j], tags[j + 1]);
  for (std::size_t j = 0; j < tags.size(); ++j) s += emissions.at(tags[j], j);
  return s;
}

double log_partition(const Tensor& emissions, const Tensor& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t L = emissions.dim(0), n = emissions.dim(1);
  const auto alpha = forward(emissions, transitions);
  return lse(std::span<const double>(alpha).subspan((n - 1) * L, L));
}

double nll(const Tensor& emissions, const Tensor& transitions,
           std::span<const std::size_t> tags) {
  return log_partition(emissions, transitions) - score(emissions, transitions, tags);
}

Path viterbi(const Tensor& emissions, const Tensor& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t L = emissions.dim(0), n = emissions.dim(1);
  std::vector<double> delta(L), next(L);
  std::vector<std::size_t> back(n * L, 0);
  for (std::size_t v = 0; v < L; ++v) delta[v] = emissions.at(v, 0);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t v = 0; v < L; ++v) {
      std::size_t best = 0;
      double best_score = delta[0] + transitions.at(0, v);
      for (std::size_t u = 1; u < L; ++u) {
        const double s = delta[u] + transitions.at(u, v);
        if (s > best_score) {
          best_score = s;
          best = u;
        }
      }
      back[j * L + v] = best;
      next[v] = best_score + emissions.at(v, j);
    }
    delta.swap(next);
  }
  Path path;
  path.tags.assign(n, 0);
  std::size_t last = 0;
  for (std::size_t v = 1; v < L; ++v) {
    if (delta[v] > delta[last]) last = v;
  }
  path.tags[n - 1] = last;
  for (std::size_t j = n - 1; j > 0; --j) path.tags[j - 1] = back[j * L + path.tags[j]];
  path.score = score(emissions, transitions, path.tags);
  return path;
}

Marginals marginals(const Tensor& emissions, const Tensor& transitions) {
  check_shapes(emissions, transitions);
  const std::size_t L = emissions.dim(0), n = emissions.dim(1);
  const auto alpha = forward(emissions, transitions);
  const auto beta = backward(emissions, transitions);
  Marginals m;
  m.log_z = lse(std::span<const double>(alpha).subspan((n - 1) * L, L));
  m.unary = Tensor(Shape{L, n});
  m.pairwise = Tensor(Shape{L, L});
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t t = 0; t < L; ++t) {
      m.unary.at(t, j) = std::exp(alpha[j * L + t] + beta[j * L + t] - m.log_z);
    }
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    for (std::size_t u = 0; u < L; ++u) {
      for (std::size_t v = 0; v < L; ++v) {
        m.pairwise.at(u, v) += std::exp(alpha[j * L + u] + transitions.at(u, v) +
                                        emissions.at(v, j + 1) + beta[(j + 1) * L + v] -
                                        m.log_z);
      }
    }
  }
  return m;
}

ad::Var nll(ad::Var emissions, ad::Var transitions, std::vector<std::size_t> tags) {
  const Tensor& p = emissions.value();
  const Tensor& t = transitions.value();
  check_shapes(p, t);
  check_tags(p, tags);
  const double value = nll(p, t, tags);
  const int ip = emissions.id(), it = transitions.id();
  return emissions.graph().record(
      Tensor::scalar(value), {ip, it},
      [ip, it, tags = std::move(tags)](ad::Graph& g, int self) {
        const double gout = g.grad_of(self)[0];
        const Tensor& pv = g.value(ip);
        const Tensor& tv = g.value(it);
        const Marginals m = marginals(pv, tv);
        const std::size_t n = tags.size();
        if (g.requires_grad(ip)) {
          Tensor& d = g.grad_ref(ip);
          for (std::size_t i = 0; i < m.unary.size(); ++i) d[i] += gout * m.unary[i];
          for (std::size_t j = 0; j < n; ++j) d.at(tags[j], j) -= gout;
        }
        if (g.requires_grad(it)) {
          Tensor& d = g.grad_ref(it);
          for (std::size_t i = 0; i < m.pairwise.size(); ++i) d[i] += gout * m.pairwise[i];
          for (std::size_t j = 0; j + 1 < n; ++j) d.at(tags[j], tags[j + 1]) -= gout;
        }
      });
}

}  // namespace adatag::crf
