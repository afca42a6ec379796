#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "limix/rng.hpp"

namespace limix {

// A named dense array of doubles with shape metadata. Weight matrices are
// stored row-major with shape {out, in}; biases have shape {out}.
struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
};

enum class ParamRole { Shared, Individual, Student };

// A flat bag of tensors making up one parameter group (shared trunk,
// per-component individual part, or the Student's individual part).
struct ParamSet {
  ParamRole role = ParamRole::Individual;
  std::vector<Tensor> tensors;

  Tensor& add(std::string name, std::vector<int> shape);
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;

  std::size_t param_count() const;
  // Returns false and sets `offender` to the first non-finite tensor's name.
  bool all_finite(std::string* offender = nullptr) const;
  void zero();
  // FNV-1a over names, shapes and raw payload bytes; used by the isolation
  // tests to prove non-chosen components are untouched.
  std::uint64_t checksum() const;

  static ParamSet zeros_like(const ParamSet& other);
};

inline bool finite(double v) { return v == v && v < 1e300 && v > -1e300; }

}  // namespace limix
