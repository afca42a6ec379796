#include "limix/nn.hpp"

#include <cmath>

#include "limix/errors.hpp"

namespace limix {

void add_mlp_params(ParamSet& ps, const std::string& prefix, const MlpSpec& spec) {
  for (int l = 0; l < spec.layer_count(); ++l) {
    ps.add(prefix + ".w" + std::to_string(l), {spec.widths[l + 1], spec.widths[l]});
    ps.add(prefix + ".b" + std::to_string(l), {spec.widths[l + 1]});
  }
}

void init_mlp_params(ParamSet& ps, const std::string& prefix, const MlpSpec& spec,
                     RngEngine& rng) {
  for (int l = 0; l < spec.layer_count(); ++l) {
    Tensor& w = ps.at(prefix + ".w" + std::to_string(l));
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
    for (double& v : w.data) v = scale * normal01(rng);
  }
}

void MlpView::append(const ParamSet& params, ParamSet* grads, const std::string& prefix) {
  for (int l = 0;; ++l) {
    const std::string wk = prefix + ".w" + std::to_string(l);
    const std::string bk = prefix + ".b" + std::to_string(l);
    const Tensor* w = params.find(wk);
    if (!w) {
      if (l == 0) throw StructuralError("MlpView: no layers under prefix " + prefix);
      break;
    }
    Layer layer;
    layer.w = w;
    layer.b = &params.at(bk);
    if (grads) {
      layer.gw = &grads->at(wk);
      layer.gb = &grads->at(bk);
    }
    if (!layers_.empty() && layers_.back().w->shape[0] != layer.w->shape[1])
      throw StructuralError("MlpView: width mismatch joining " + wk);
    layers_.push_back(layer);
  }
}

int MlpView::in_dim() const { return layers_.front().w->shape[1]; }
int MlpView::out_dim() const { return layers_.back().w->shape[0]; }

Act MlpView::activation_at(int layer) const {
  return layer + 1 == layer_count() ? Act::Identity : Act::Tanh;
}

std::vector<double> MlpView::forward(std::span<const double> in, Cache* cache) const {
  if (static_cast<int>(in.size()) != in_dim())
    throw StructuralError("MlpView::forward: input size " + std::to_string(in.size()) +
                          " != " + std::to_string(in_dim()));
  std::vector<double> x(in.begin(), in.end());
  if (cache) {
    cache->inputs.assign(layer_count(), {});
    cache->pre.assign(layer_count(), {});
  }
  for (int l = 0; l < layer_count(); ++l) {
    const Layer& layer = layers_[l];
    const int rows = layer.w->shape[0], cols = layer.w->shape[1];
    std::vector<double> pre(rows);
    const double* w = layer.w->data.data();
    for (int r = 0; r < rows; ++r) {
      double acc = layer.b->data[r];
      const double* wr = w + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
      pre[r] = acc;
    }
    if (cache) {
      cache->inputs[l] = x;
      cache->pre[l] = pre;
    }
    if (activation_at(l) == Act::Tanh)
      for (double& v : pre) v = std::tanh(v);
    x = std::move(pre);
  }
  return x;
}

std::vector<double> MlpView::backward(const Cache& cache,
                                      std::span<const double> dout) const {
  std::vector<double> d(dout.begin(), dout.end());
  for (int l = layer_count() - 1; l >= 0; --l) {
    const Layer& layer = layers_[l];
    const int rows = layer.w->shape[0], cols = layer.w->shape[1];
    if (activation_at(l) == Act::Tanh)
      for (int r = 0; r < rows; ++r) {
        const double t = std::tanh(cache.pre[l][r]);
        d[r] *= 1.0 - t * t;
      }
    const std::vector<double>& x = cache.inputs[l];
    if (layer.gw) {
      double* gw = layer.gw->data.data();
      for (int r = 0; r < rows; ++r) {
        double* gr = gw + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) gr[c] += d[r] * x[c];
        layer.gb->data[r] += d[r];
      }
    }
    std::vector<double> dx(cols, 0.0);
    const double* w = layer.w->data.data();
    for (int r = 0; r < rows; ++r) {
      const double* wr = w + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) dx[c] += wr[c] * d[r];
    }
    d = std::move(dx);
  }
  return d;
}

}  // namespace limix
