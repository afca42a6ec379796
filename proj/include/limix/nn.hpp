#pragma once

#include <span>
#include <string>
#include <vector>

#include "limix/tensor.hpp"

namespace limix {

enum class Act { Identity, Tanh };

struct MlpSpec {
  std::vector<int> widths;  // e.g. {in, hidden, out}
  int layer_count() const { return static_cast<int>(widths.size()) - 1; }
};

// Creates zero-initialised layer tensors "<prefix>.w<k>" / "<prefix>.b<k>".
void add_mlp_params(ParamSet& ps, const std::string& prefix, const MlpSpec& spec);
// Fills an MLP's weights with N(0, 1/sqrt(fan_in)) draws, biases zero.
void init_mlp_params(ParamSet& ps, const std::string& prefix, const MlpSpec& spec,
                     RngEngine& rng);

// A logical MLP assembled from layers that may live in different ParamSets
// (shared trunk + individual head). Grad sinks are optional per part; a null
// sink freezes that part. Hidden activations are tanh, the output is linear.
class MlpView {
 public:
  struct Layer {
    const Tensor* w = nullptr;  // {out, in}
    const Tensor* b = nullptr;  // {out}
    Tensor* gw = nullptr;       // nullable: frozen
    Tensor* gb = nullptr;
  };

  // Appends all layers "<prefix>.w0..wk" found in params. grads may be null.
  void append(const ParamSet& params, ParamSet* grads, const std::string& prefix);

  int in_dim() const;
  int out_dim() const;
  int layer_count() const { return static_cast<int>(layers_.size()); }

  struct Cache {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> pre;     // pre-activations
  };

  std::vector<double> forward(std::span<const double> in, Cache* cache = nullptr) const;
  // Backpropagates dL/dout, accumulating into grad sinks; returns dL/din.
  std::vector<double> backward(const Cache& cache, std::span<const double> dout) const;

 private:
  Act activation_at(int layer) const;
  std::vector<Layer> layers_;
};

}  // namespace limix
