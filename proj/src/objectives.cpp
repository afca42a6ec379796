#include "limix/objectives.hpp"

#include <cmath>

#include "limix/errors.hpp"

namespace limix {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

struct Posterior {
  std::vector<double> mu, lv, sigma;
  std::vector<bool> active;  // false where the clamp was hit
  MlpView::Cache enc_cache;
};

Posterior run_encoder(const MlpView& enc, std::span<const double> x,
                      std::span<const double> cond, bool with_cache) {
  const auto enc_in = concat(x, cond);
  Posterior p;
  const auto out = enc.forward(enc_in, with_cache ? &p.enc_cache : nullptr);
  const int d_z = static_cast<int>(out.size()) / 2;
  p.mu.assign(out.begin(), out.begin() + d_z);
  p.lv.resize(d_z);
  p.sigma.resize(d_z);
  p.active.resize(d_z);
  for (int k = 0; k < d_z; ++k) {
    const double raw = out[d_z + k];
    p.active[k] = raw > kLogVarMin && raw < kLogVarMax;
    p.lv[k] = std::min(kLogVarMax, std::max(kLogVarMin, raw));
    p.sigma[k] = std::exp(0.5 * p.lv[k]);
  }
  return p;
}

double kl_to_prior(const Posterior& p) {
  double kl = 0;
  for (std::size_t k = 0; k < p.mu.size(); ++k)
    kl += 0.5 * (p.mu[k] * p.mu[k] + std::exp(p.lv[k]) - 1.0 - p.lv[k]);
  return kl;
}

void check_finite(double v, const char* stage) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + stage);
}

LossReport generator_core(const MlpView& enc, const MlpView& dec,
                          std::span<const double> x, std::span<const double> cond,
                          int n_mc, RngEngine& rng, bool with_grad) {
  if (n_mc < 1) throw InputError("n_mc must be >= 1");
  Posterior p = run_encoder(enc, x, cond, with_grad);
  const int d_z = static_cast<int>(p.mu.size());
  const int d_x = static_cast<int>(x.size());
  const double kl = kl_to_prior(p);

  std::vector<double> dmu(d_z, 0.0), dlv(d_z, 0.0);
  double recon = 0;
  std::vector<double> z(d_z), eps(d_z);
  for (int m = 0; m < n_mc; ++m) {
    for (int k = 0; k < d_z; ++k) {
      eps[k] = normal01(rng);
      z[k] = p.mu[k] + p.sigma[k] * eps[k];
    }
    const auto dec_in = concat(z, cond);
    MlpView::Cache dec_cache;
    const auto x_hat = dec.forward(dec_in, with_grad ? &dec_cache : nullptr);
    double sq = 0;
    for (int i = 0; i < d_x; ++i) {
      const double e = x[i] - x_hat[i];
      sq += e * e;
    }
    recon += (-0.5 * d_x * kLog2Pi - 0.5 * sq) / n_mc;
    if (with_grad) {
      std::vector<double> dxhat(d_x);
      for (int i = 0; i < d_x; ++i) dxhat[i] = (x[i] - x_hat[i]) / n_mc;
      const auto ddec_in = dec.backward(dec_cache, dxhat);
      for (int k = 0; k < d_z; ++k) {
        dmu[k] += ddec_in[k];
        if (p.active[k]) dlv[k] += ddec_in[k] * eps[k] * 0.5 * p.sigma[k];
      }
    }
  }
  check_finite(recon, "generator objective reconstruction term");
  check_finite(kl, "generator objective kl term");
  if (with_grad) {
    for (int k = 0; k < d_z; ++k) {
      dmu[k] -= p.mu[k];
      if (p.active[k]) dlv[k] -= 0.5 * (std::exp(p.lv[k]) - 1.0);
    }
    std::vector<double> denc_out(2 * d_z);
    for (int k = 0; k < d_z; ++k) {
      denc_out[k] = dmu[k];
      denc_out[d_z + k] = dlv[k];
    }
    enc.backward(p.enc_cache, denc_out);
  }
  LossReport report;
  report.recon_term = recon;
  report.kl_term = kl;
  report.total = recon - kl;
  return report;
}

LossReport classifier_core(const MlpView& enc, const MlpView& cls,
                           std::span<const double> x, std::span<const double> cond,
                           int label, int n_classes, int n_mc, RngEngine& rng,
                           bool with_grad) {
  if (n_mc < 1) throw InputError("n_mc must be >= 1");
  if (label < 0 || label >= n_classes)
    throw InputError("label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(n_classes) + ")");
  Posterior p = run_encoder(enc, x, cond, with_grad);
  const int d_z = static_cast<int>(p.mu.size());
  const int d_x = static_cast<int>(x.size());
  const double kl = kl_to_prior(p);

  std::vector<double> dmu(d_z, 0.0), dlv(d_z, 0.0);
  double class_term = 0;
  std::vector<double> z(d_z), eps(d_z);
  for (int m = 0; m < n_mc; ++m) {
    for (int k = 0; k < d_z; ++k) {
      eps[k] = normal01(rng);
      z[k] = p.mu[k] + p.sigma[k] * eps[k];
    }
    const auto cls_in = concat(x, z);
    MlpView::Cache cls_cache;
    const auto logits = cls.forward(cls_in, with_grad ? &cls_cache : nullptr);
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0;
    for (double v : logits) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    class_term += (logits[label] - lse) / n_mc;
    if (with_grad) {
      std::vector<double> dlogits(n_classes);
      for (int c = 0; c < n_classes; ++c) {
        const double soft = std::exp(logits[c] - lse);
        dlogits[c] = ((c == label ? 1.0 : 0.0) - soft) / n_mc;
      }
      const auto dcls_in = cls.backward(cls_cache, dlogits);
      for (int k = 0; k < d_z; ++k) {
        dmu[k] += dcls_in[d_x + k];
        if (p.active[k]) dlv[k] += dcls_in[d_x + k] * eps[k] * 0.5 * p.sigma[k];
      }
    }
  }
  check_finite(class_term, "classifier objective class term");
  check_finite(kl, "classifier objective kl term");
  if (with_grad) {
    for (int k = 0; k < d_z; ++k) {
      dmu[k] -= p.mu[k];
      if (p.active[k]) dlv[k] -= 0.5 * (std::exp(p.lv[k]) - 1.0);
    }
    std::vector<double> denc_out(2 * d_z);
    for (int k = 0; k < d_z; ++k) {
      denc_out[k] = dmu[k];
      denc_out[d_z + k] = dlv[k];
    }
    enc.backward(p.enc_cache, denc_out);
  }
  LossReport report;
  report.kl_term = kl;
  report.class_term = class_term;
  report.total = class_term - kl;
  return report;
}

}  // namespace

GaussianPosterior encode(const MlpView& enc, std::span<const double> x,
                         std::span<const double> cond) {
  const Posterior p = run_encoder(enc, x, cond, false);
  return {p.mu, p.lv};
}

LossReport generator_objective(const MlpView& enc, const MlpView& dec,
                               std::span<const double> x, std::span<const double> cond,
                               int n_mc, RngEngine& rng) {
  return generator_core(enc, dec, x, cond, n_mc, rng, false);
}

LossReport generator_objective_backward(const MlpView& enc, const MlpView& dec,
                                        std::span<const double> x,
                                        std::span<const double> cond, int n_mc,
                                        RngEngine& rng) {
  return generator_core(enc, dec, x, cond, n_mc, rng, true);
}

LossReport classifier_objective(const MlpView& enc, const MlpView& cls,
                                std::span<const double> x, std::span<const double> cond,
                                int label, int n_classes, int n_mc, RngEngine& rng) {
  return classifier_core(enc, cls, x, cond, label, n_classes, n_mc, rng, false);
}

LossReport classifier_objective_backward(const MlpView& enc, const MlpView& cls,
                                         std::span<const double> x,
                                         std::span<const double> cond, int label,
                                         int n_classes, int n_mc, RngEngine& rng) {
  return classifier_core(enc, cls, x, cond, label, n_classes, n_mc, rng, true);
}

std::vector<double> decode_mean(const MlpView& dec, std::span<const double> z,
                                std::span<const double> cond) {
  return dec.forward(concat(z, cond));
}

std::vector<std::vector<double>> sample_generator(const MlpView& dec, int n,
                                                  std::span<const double> cond,
                                                  int d_z, RngEngine& rng) {
  if (n < 1) throw InputError("sample_generator: n must be >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(n);
  std::vector<double> z(d_z);
  for (int i = 0; i < n; ++i) {
    for (double& v : z) v = normal01(rng);
    out.push_back(decode_mean(dec, z, cond));
  }
  return out;
}

std::vector<double> class_probs(const MlpView& cls, std::span<const double> x,
                                int n_classes, int n_mc, RngEngine& rng) {
  const int d_z = cls.in_dim() - static_cast<int>(x.size());
  std::vector<double> probs(n_classes, 0.0);
  std::vector<double> z(d_z);
  for (int m = 0; m < n_mc; ++m) {
    for (double& v : z) v = normal01(rng);
    const auto logits = cls.forward(concat(x, z));
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0;
    for (double v : logits) sum += std::exp(v - mx);
    for (int c = 0; c < n_classes; ++c) probs[c] += std::exp(logits[c] - mx) / sum / n_mc;
  }
  return probs;
}

std::pair<std::vector<double>, double> reconstruct_mean(const MlpView& enc,
                                                        const MlpView& dec,
                                                        std::span<const double> x,
                                                        std::span<const double> cond) {
  const auto q = encode(enc, x, cond);
  auto x_hat = decode_mean(dec, q.mean, cond);
  const double err = mse_of(x, x_hat);
  return {std::move(x_hat), err};
}

double mse_of(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StructuralError("mse_of: length mismatch");
  double sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    sq += e * e;
  }
  return sq / static_cast<double>(a.size());
}

}  // namespace limix
