#pragma once

#include <optional>
#include <span>
#include <vector>

#include "limix/nn.hpp"
#include "limix/rng.hpp"

namespace limix {

// log-variance clamp; keeps the KL term finite on degenerate batches.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct LossReport {
  double total = 0.0;
  double recon_term = 0.0;
  double kl_term = 0.0;
  std::optional<double> class_term;
};

struct GaussianPosterior {
  std::vector<double> mean;
  std::vector<double> log_var;  // clamped
  int dim() const { return static_cast<int>(mean.size()); }
};

// q(z | x, cond) from the encoder head; log-variances clamped.
GaussianPosterior encode(const MlpView& enc, std::span<const double> x,
                         std::span<const double> cond);

// Conditional generator objective (the unsupervised ELBO when cond is empty):
//   E_q[log N(x; dec(z, cond), I)] - KL(q(z|x, cond) || N(0, I))
// The reconstruction expectation is Monte-Carlo averaged over n_mc
// reparameterised draws from rng.
LossReport generator_objective(const MlpView& enc, const MlpView& dec,
                               std::span<const double> x, std::span<const double> cond,
                               int n_mc, RngEngine& rng);
// Same computation with reverse-mode gradients (same noise draws) accumulated
// into the views' grad sinks.
LossReport generator_objective_backward(const MlpView& enc, const MlpView& dec,
                                        std::span<const double> x,
                                        std::span<const double> cond, int n_mc,
                                        RngEngine& rng);

// Classifier objective:
//   E_q[log p(y | x, z)] - KL(q(z|x, cond) || N(0, I))
// with the classifier head fed [x, z] and a softmax over n_classes.
LossReport classifier_objective(const MlpView& enc, const MlpView& cls,
                                std::span<const double> x, std::span<const double> cond,
                                int label, int n_classes, int n_mc, RngEngine& rng);
LossReport classifier_objective_backward(const MlpView& enc, const MlpView& cls,
                                         std::span<const double> x,
                                         std::span<const double> cond, int label,
                                         int n_classes, int n_mc, RngEngine& rng);

// Decoder mean at a given latent/conditioning; replay samples are decoder
// means, not draws from p(x|z).
std::vector<double> decode_mean(const MlpView& dec, std::span<const double> z,
                                std::span<const double> cond);

// Draws n generator samples x = dec(z, cond), z ~ N(0, I). Throws InputError
// for n < 1.
std::vector<std::vector<double>> sample_generator(const MlpView& dec, int n,
                                                  std::span<const double> cond,
                                                  int d_z, RngEngine& rng);

// Mean softmax of the classifier head over n_mc prior draws z ~ N(0, I).
std::vector<double> class_probs(const MlpView& cls, std::span<const double> x,
                                int n_classes, int n_mc, RngEngine& rng);

// Encode with the posterior mean, decode, and return (x_hat, mean squared
// error per dimension).
std::pair<std::vector<double>, double> reconstruct_mean(const MlpView& enc,
                                                        const MlpView& dec,
                                                        std::span<const double> x,
                                                        std::span<const double> cond);

double mse_of(std::span<const double> a, std::span<const double> b);

}  // namespace limix
