#pragma once

#include <vector>

#include "limix/tensor.hpp"

namespace limix {

// Adam-style adaptive step for gradient ASCENT (objectives are maximised).
// Operates on a fixed list of parameter tensors with matching grad tensors.
class AdamAscent {
 public:
  AdamAscent(std::vector<Tensor*> params, std::vector<const Tensor*> grads,
             double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
             double eps = 1e-8);

  void step();

 private:
  std::vector<Tensor*> params_;
  std::vector<const Tensor*> grads_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

// Convenience: pointers to all tensors of a set, paired with zeros_like grads.
std::vector<Tensor*> tensor_ptrs(ParamSet& ps);
std::vector<const Tensor*> tensor_ptrs(const ParamSet& ps);

}  // namespace limix
