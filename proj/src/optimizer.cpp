#include "adatag/optimizer.hpp"

#include <cmath>

#include "adatag/error.hpp"

namespace adatag {

Tensor& GradientBuffer::slot(const ad::Parameter& p) {
  if (grads_.size() <= p.id) grads_.resize(p.id + 1);
  Tensor& t = grads_[p.id];
  if (t.empty()) t = Tensor(p.value.shape());
  return t;
}

void GradientBuffer::add(const ad::ParamGrad& g) { g.add_to(slot(*g.param)); }

void GradientBuffer::add(const ad::Parameter& p, const Tensor& grad) {
  Tensor& t = slot(p);
  if (t.shape() != grad.shape()) {
    throw ShapeError("gradient for " + p.name + " has shape " + shape_string(grad.shape()) +
                     ", expected " + shape_string(t.shape()));
  }
  t += grad;
}

void GradientBuffer::scale(double c) {
  for (auto& t : grads_) {
    for (double& v : t.data()) v *= c;
  }
}

void Adam::step(const std::vector<ad::Parameter*>& params, const GradientBuffer& grads) {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (ad::Parameter* p : params) {
    if (p->frozen || !grads.has(p->id)) continue;
    if (state_.size() <= p->id) state_.resize(p->id + 1);
    Moments& s = state_[p->id];
    if (s.m.empty()) {
      s.m = Tensor(p->value.shape());
      s.v = Tensor(p->value.shape());
    }
    auto g = grads.get(p->id).data();
    auto m = s.m.data();
    auto v = s.v.data();
    auto w = p->value.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace adatag
