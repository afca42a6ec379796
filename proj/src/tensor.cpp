#include "limix/tensor.hpp"

#include <cmath>
#include <cstring>

#include "limix/errors.hpp"

namespace limix {

Tensor& ParamSet::add(std::string name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw StructuralError("tensor " + name + ": non-positive dim");
    n *= static_cast<std::size_t>(d);
  }
  Tensor t;
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  tensors.push_back(std::move(t));
  return tensors.back();
}

Tensor& ParamSet::at(std::string_view name) {
  if (Tensor* t = find(name)) return *t;
  throw StructuralError("no tensor named '" + std::string(name) + "'");
}

const Tensor& ParamSet::at(std::string_view name) const {
  if (const Tensor* t = find(name)) return *t;
  throw StructuralError("no tensor named '" + std::string(name) + "'");
}

Tensor* ParamSet::find(std::string_view name) {
  for (auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

const Tensor* ParamSet::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::size_t ParamSet::param_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

bool ParamSet::all_finite(std::string* offender) const {
  for (const auto& t : tensors)
    for (double v : t.data)
      if (!std::isfinite(v)) {
        if (offender) *offender = t.name;
        return false;
      }
  return true;
}

void ParamSet::zero() {
  for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0);
}

std::uint64_t ParamSet::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& t : tensors) {
    mix(t.name.data(), t.name.size());
    for (int d : t.shape) mix(&d, sizeof(d));
    mix(t.data.data(), t.data.size() * sizeof(double));
  }
  return h;
}

ParamSet ParamSet::zeros_like(const ParamSet& other) {
  ParamSet out;
  out.role = other.role;
  out.tensors.reserve(other.tensors.size());
  for (const auto& t : other.tensors) {
    Tensor z;
    z.name = t.name;
    z.shape = t.shape;
    z.data.assign(t.data.size(), 0.0);
    out.tensors.push_back(std::move(z));
  }
  return out;
}

}  // namespace limix
