#pragma once

#include <cstddef>
#include <vector>

#include "adatag/autodiff.hpp"
#include "adatag/tensor.hpp"

namespace adatag {

// Dense gradient accumulator indexed by Parameter::id.
class GradientBuffer {
 public:
  void add(const ad::ParamGrad& g);
  void add(const ad::Parameter& p, const Tensor& grad);
  bool has(std::size_t id) const { return id < grads_.size() && !grads_[id].empty(); }
  const Tensor& get(std::size_t id) const { return grads_.at(id); }
  void scale(double c);
  void clear() { grads_.clear(); }

 private:
  Tensor& slot(const ad::Parameter& p);
  std::vector<Tensor> grads_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Parameters without a gradient in the buffer are
// left untouched and their moments do not decay.
class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  void step(const std::vector<ad::Parameter*>& params, const GradientBuffer& grads);
  std::size_t steps() const { return t_; }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };
  AdamOptions options_;
  std::size_t t_ = 0;
  std::vector<Moments> state_;
};

}  // namespace adatag
