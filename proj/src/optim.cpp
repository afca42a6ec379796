#include "limix/optim.hpp"

#include <cmath>

#include "limix/errors.hpp"

namespace limix {

AdamAscent::AdamAscent(std::vector<Tensor*> params, std::vector<const Tensor*> grads,
                       double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)),
      grads_(std::move(grads)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  if (params_.size() != grads_.size())
    throw StructuralError("AdamAscent: params/grads count mismatch");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->size() != grads_[i]->size())
      throw StructuralError("AdamAscent: size mismatch for " + params_[i]->name);
    m_.emplace_back(params_[i]->size(), 0.0);
    v_.emplace_back(params_[i]->size(), 0.0);
  }
}

void AdamAscent::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    double* p = params_[i]->data.data();
    const double* g = grads_[i]->data.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = params_[i]->size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      p[k] += lr_ * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps_);
    }
  }
}

std::vector<Tensor*> tensor_ptrs(ParamSet& ps) {
  std::vector<Tensor*> out;
  out.reserve(ps.tensors.size());
  for (auto& t : ps.tensors) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> tensor_ptrs(const ParamSet& ps) {
  std::vector<const Tensor*> out;
  out.reserve(ps.tensors.size());
  for (const auto& t : ps.tensors) out.push_back(&t);
  return out;
}

}  // namespace limix
