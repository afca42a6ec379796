#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "limix/checkpoint.hpp"
#include "limix/errors.hpp"
#include "limix/nn.hpp"
#include "limix/objectives.hpp"
#include "limix/optim.hpp"
#include "testutil.hpp"

using namespace limix;
using testutil::make_nets;
using testutil::one_hot;
using testutil::random_vec;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

TEST_CASE("mlp forward: zero weights give zero pre-activation output") {
  ParamSet ps;
  add_mlp_params(ps, "net", MlpSpec{{3, 4, 2}});
  MlpView v;
  v.append(ps, nullptr, "net");
  const auto out = v.forward(std::vector<double>{1.0, -2.0, 3.0});
  for (double o : out) CHECK(o == 0.0);
}

TEST_CASE("mlp forward: identity-initialised linear layer is the identity") {
  ParamSet ps;
  add_mlp_params(ps, "net", MlpSpec{{3, 3}});
  Tensor& w = ps.at("net.w0");
  for (int i = 0; i < 3; ++i) w.data[i * 3 + i] = 1.0;
  MlpView v;
  v.append(ps, nullptr, "net");
  const std::vector<double> x{0.5, -1.25, 2.0};
  const auto out = v.forward(x);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("mlp forward matches a straight-line re-implementation") {
  RngEngine rng(11);
  ParamSet ps;
  const MlpSpec spec{{4, 5, 3}};
  add_mlp_params(ps, "net", spec);
  init_mlp_params(ps, "net", spec, rng);
  const auto x = random_vec(4, rng);
  MlpView v;
  v.append(ps, nullptr, "net");
  const auto out = v.forward(x);

  // Independent re-implementation of the same arithmetic.
  const Tensor& w0 = ps.at("net.w0");
  const Tensor& b0 = ps.at("net.b0");
  const Tensor& w1 = ps.at("net.w1");
  const Tensor& b1 = ps.at("net.b1");
  std::vector<double> h(5);
  for (int r = 0; r < 5; ++r) {
    double acc = b0.data[r];
    for (int c = 0; c < 4; ++c) acc += w0.data[r * 4 + c] * x[c];
    h[r] = std::tanh(acc);
  }
  for (int r = 0; r < 3; ++r) {
    double acc = b1.data[r];
    for (int c = 0; c < 5; ++c) acc += w1.data[r * 5 + c] * h[c];
    CHECK(out[r] == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("mlp forward rejects shape mismatches") {
  ParamSet ps;
  add_mlp_params(ps, "net", MlpSpec{{3, 2}});
  MlpView v;
  v.append(ps, nullptr, "net");
  CHECK_THROWS_AS(v.forward(std::vector<double>{1.0, 2.0}), StructuralError);
}

TEST_CASE("elbo closed forms") {
  RngEngine rng(3);

  SUBCASE("posterior equal to prior gives zero kl") {
    auto nets = make_nets(2, 3, 4, 0, 2, rng);
    nets.enc.zero();  // mu = 0, log_var = 0
    RngEngine r(7);
    const auto rep = generator_objective(nets.enc_view(), nets.dec_view(),
                                         std::vector<double>{0.3, -0.1}, {}, 4, r);
    CHECK(rep.kl_term == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("q = N(1, 1) in one latent dim gives kl = 0.5") {
    ParamSet enc;
    add_mlp_params(enc, "enc", MlpSpec{{1, 2}});
    enc.at("enc.b0").data = {1.0, 0.0};  // mu = 1, log_var = 0
    ParamSet dec;
    add_mlp_params(dec, "dec", MlpSpec{{1, 1}});
    MlpView ev, dv;
    ev.append(enc, nullptr, "enc");
    dv.append(dec, nullptr, "dec");
    RngEngine r(7);
    const auto rep = generator_objective(ev, dv, std::vector<double>{0.0}, {}, 1, r);
    CHECK(rep.kl_term == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("exact reconstruction at unit variance gives recon = -0.5 ln 2pi") {
    ParamSet enc;
    add_mlp_params(enc, "enc", MlpSpec{{1, 2}});
    ParamSet dec;
    add_mlp_params(dec, "dec", MlpSpec{{1, 1}});
    dec.at("dec.b0").data = {0.7};  // constant decoder output = x
    MlpView ev, dv;
    ev.append(enc, nullptr, "enc");
    dv.append(dec, nullptr, "dec");
    RngEngine r(7);
    const auto rep = generator_objective(ev, dv, std::vector<double>{0.7}, {}, 3, r);
    CHECK(rep.recon_term == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-12));
  }
}

TEST_CASE("classifier objective closed forms") {
  RngEngine rng(5);
  auto nets = make_nets(3, 2, 4, 4, 4, rng);
  nets.cls.zero();  // uniform probabilities
  nets.enc.zero();  // q = prior
  RngEngine r(9);
  const auto rep = classifier_objective(nets.enc_view(), nets.cls_view(),
                                        std::vector<double>{0.1, 0.2, 0.3},
                                        one_hot(1, 4), 1, 4, 2, r);
  CHECK(*rep.class_term == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
  CHECK(rep.kl_term == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rep.total == doctest::Approx(*rep.class_term).epsilon(1e-12));
}

TEST_CASE("classifier objective rejects out-of-range labels") {
  RngEngine rng(5);
  auto nets = make_nets(3, 2, 4, 4, 4, rng);
  RngEngine r(9);
  CHECK_THROWS_AS(classifier_objective(nets.enc_view(), nets.cls_view(),
                                       std::vector<double>{0.1, 0.2, 0.3},
                                       one_hot(1, 4), 7, 4, 1, r),
                  InputError);
}

TEST_CASE("conditional generator: severed conditioning gives identical loss per class") {
  RngEngine rng(13);
  const int c_n = 3;
  auto nets = make_nets(4, 2, 6, c_n, c_n, rng);
  // Zero the conditioning columns of the first layers of encoder and decoder.
  auto zero_cond_cols = [](Tensor& w, int in_dim, int cond_dim) {
    const int cols = in_dim + cond_dim;
    for (int r = 0; r < w.shape[0]; ++r)
      for (int c = in_dim; c < cols; ++c) w.data[r * cols + c] = 0.0;
  };
  zero_cond_cols(nets.enc.at("enc.w0"), 4, c_n);
  zero_cond_cols(nets.dec.at("dec.w0"), 2, c_n);
  const auto x = random_vec(4, rng);
  double first = 0;
  for (int y = 0; y < c_n; ++y) {
    RngEngine r(21);  // same noise draws for every conditioning
    const auto rep =
        generator_objective(nets.enc_view(), nets.dec_view(), x, one_hot(y, c_n), 2, r);
    if (y == 0)
      first = rep.total;
    else
      CHECK(rep.total == doctest::Approx(first).epsilon(1e-12));
  }
}

TEST_CASE("conditional generator: perfect reconstruction at prior gives -(d_x/2) ln 2pi") {
  const int d_x = 3, c_n = 2;
  ParamSet enc, dec;
  add_mlp_params(enc, "enc", MlpSpec{{d_x + c_n, 4}});  // zero: q = prior
  add_mlp_params(dec, "dec", MlpSpec{{2 + c_n, d_x}});
  dec.at("dec.b0").data = {0.4, -0.2, 1.1};
  MlpView ev, dv;
  ev.append(enc, nullptr, "enc");
  dv.append(dec, nullptr, "dec");
  RngEngine r(33);
  const auto rep = generator_objective(ev, dv, std::vector<double>{0.4, -0.2, 1.1},
                                       one_hot(1, c_n), 2, r);
  CHECK(rep.total == doctest::Approx(-0.5 * d_x * kLog2Pi).epsilon(1e-12));
}

TEST_CASE("backward: critical point yields all-zero gradients") {
  // Zero-weight nets at x = 0: reconstruction error, posterior moments and
  // their gradients all vanish.
  RngEngine rng(5);
  auto nets = make_nets(2, 2, 3, 0, 2, rng);
  nets.enc.zero();
  nets.dec.zero();
  RngEngine r(4);
  generator_objective_backward(nets.enc_view(), nets.dec_view(),
                               std::vector<double>{0.0, 0.0}, {}, 2, r);
  for (const auto* g : {&nets.genc, &nets.gdec})
    for (const auto& t : g->tensors)
      for (double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("backward: single linear layer squared error matches closed form") {
  // loss = -0.5 ||t - W x||^2 has dW = (t - Wx) x^T; check via MlpView.
  ParamSet ps;
  add_mlp_params(ps, "net", MlpSpec{{2, 2}});
  ps.at("net.w0").data = {0.5, -0.3, 0.8, 0.1};
  ParamSet gs = ParamSet::zeros_like(ps);
  MlpView v;
  v.append(ps, &gs, "net");
  const std::vector<double> x{1.5, -2.0}, t{0.3, 0.9};
  MlpView::Cache cache;
  const auto y = v.forward(x, &cache);
  std::vector<double> dy(2);
  for (int i = 0; i < 2; ++i) dy[i] = t[i] - y[i];
  v.backward(cache, dy);
  const Tensor& gw = gs.at("net.w0");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(gw.data[r * 2 + c] == doctest::Approx((t[r] - y[r]) * x[c]).epsilon(1e-12));
}

TEST_CASE("gradients match central finite differences on both objectives") {
  for (std::uint64_t draw = 0; draw < 5; ++draw) {
    RngEngine rng(derive_seed(100, {draw}));
    const int c_n = 3;
    auto nets = make_nets(4, 2, 5, c_n + 2, c_n, rng);
    const auto x = random_vec(4, rng);
    std::vector<double> cond = one_hot(static_cast<int>(draw % c_n), c_n);
    const auto task_code = one_hot(static_cast<int>(draw % 2), 2);
    cond.insert(cond.end(), task_code.begin(), task_code.end());
    const int label = static_cast<int>(draw % c_n);
    const std::uint64_t noise_seed = derive_seed(7, {draw});

    {
      auto fwd = [&] {
        RngEngine r(noise_seed);
        return generator_objective(nets.enc_view(), nets.dec_view(), x, cond, 2, r).total;
      };
      auto bwd = [&] {
        nets.zero_grads();
        RngEngine r(noise_seed);
        generator_objective_backward(nets.enc_view(), nets.dec_view(), x, cond, 2, r);
      };
      std::vector<Tensor*> params, grads;
      for (auto* t : nets.all_params())
        if (t->name.rfind("cls", 0) != 0) params.push_back(t);
      for (auto* t : nets.all_grads())
        if (t->name.rfind("cls", 0) != 0) grads.push_back(t);
      const auto rep = testutil::fd_check(params, grads, fwd, bwd);
      INFO("generator objective, worst at ", rep.worst);
      CHECK(rep.max_rel_err < 1e-3);
    }
    {
      auto fwd = [&] {
        RngEngine r(noise_seed);
        return classifier_objective(nets.enc_view(), nets.cls_view(), x, cond, label,
                                    c_n, 2, r)
            .total;
      };
      auto bwd = [&] {
        nets.zero_grads();
        RngEngine r(noise_seed);
        classifier_objective_backward(nets.enc_view(), nets.cls_view(), x, cond, label,
                                      c_n, 2, r);
      };
      std::vector<Tensor*> params, grads;
      for (auto* t : nets.all_params())
        if (t->name.rfind("dec", 0) != 0) params.push_back(t);
      for (auto* t : nets.all_grads())
        if (t->name.rfind("dec", 0) != 0) grads.push_back(t);
      const auto rep = testutil::fd_check(params, grads, fwd, bwd);
      INFO("classifier objective, worst at ", rep.worst);
      CHECK(rep.max_rel_err < 1e-3);
    }
  }
}

TEST_CASE("kl is nonnegative and zero only at the prior") {
  RngEngine rng(17);
  for (int i = 0; i < 20; ++i) {
    auto nets = make_nets(3, 2, 4, 0, 2, rng);
    const auto x = random_vec(3, rng);
    RngEngine r(derive_seed(31, {static_cast<std::uint64_t>(i)}));
    const auto rep = generator_objective(nets.enc_view(), nets.dec_view(), x, {}, 1, r);
    CHECK(rep.kl_term >= 0.0);
    const auto q = encode(nets.enc_view(), x, {});
    double dist = 0;
    for (int k = 0; k < q.dim(); ++k)
      dist += q.mean[k] * q.mean[k] + q.log_var[k] * q.log_var[k];
    if (dist > 1e-6) CHECK(rep.kl_term > 0.0);
  }
}

namespace {

// Exact log p(x) for a linear decoder x = W z + b + noise with N(0,I) prior:
// p(x) = N(b, W W^T + I). Small-dimension Cholesky oracle.
double exact_log_marginal(const Tensor& w, const std::vector<double>& b,
                          const std::vector<double>& x) {
  const int d = static_cast<int>(b.size());
  const int dz = w.shape[1];
  std::vector<double> cov(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double acc = i == j ? 1.0 : 0.0;
      for (int k = 0; k < dz; ++k) acc += w.data[i * dz + k] * w.data[j * dz + k];
      cov[i * d + j] = acc;
    }
  std::vector<double> l(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      double acc = cov[i * d + j];
      for (int k = 0; k < j; ++k) acc -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = i == j ? std::sqrt(acc) : acc / l[j * d + j];
    }
  double logdet = 0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(l[i * d + i]);
  std::vector<double> y(d);
  for (int i = 0; i < d; ++i) {
    double acc = x[i] - b[i];
    for (int k = 0; k < i; ++k) acc -= l[i * d + k] * y[k];
    y[i] = acc / l[i * d + i];
  }
  double quad = 0;
  for (int i = 0; i < d; ++i) quad += y[i] * y[i];
  return -0.5 * d * kLog2Pi - 0.5 * logdet - 0.5 * quad;
}

}  // namespace

TEST_CASE("elbo lower-bounds the exact log marginal on linear-Gaussian pairs") {
  int tested = 0;
  for (std::uint64_t inst = 0; tested < 100; ++inst) {
    REQUIRE(inst < 1000);
    RngEngine rng(derive_seed(500, {inst}));
    const int d_x = 3, d_z = 2;
    ParamSet enc, dec;
    add_mlp_params(enc, "enc", MlpSpec{{d_x, 2 * d_z}});
    add_mlp_params(dec, "dec", MlpSpec{{d_z, d_x}});
    init_mlp_params(enc, "enc", MlpSpec{{d_x, 2 * d_z}}, rng);
    init_mlp_params(dec, "dec", MlpSpec{{d_z, d_x}}, rng);
    // Narrow posteriors: keeps the per-draw reconstruction variance small
    // while widening the Jensen gap.
    for (int k = 0; k < d_z; ++k) {
      enc.at("enc.b0").data[k] = 0.3 * normal01(rng);
      enc.at("enc.b0").data[d_z + k] = -4.0 + 0.3 * normal01(rng);
    }
    for (double& v : dec.at("dec.b0").data) v = 0.5 * normal01(rng);
    const auto x = random_vec(d_x, rng);

    MlpView ev, dv;
    ev.append(enc, nullptr, "enc");
    dv.append(dec, nullptr, "dec");

    const double logp = exact_log_marginal(dec.at("dec.w0"), dec.at("dec.b0").data, x);
    // Exact ELBO for the linear pair (independent of the MC path).
    const auto q = encode(ev, x, {});
    const Tensor& w = dec.at("dec.w0");
    const auto& b = dec.at("dec.b0").data;
    double mean_err = 0, trace_term = 0, kl = 0;
    for (int i = 0; i < d_x; ++i) {
      double mu_x = b[i];
      for (int k = 0; k < d_z; ++k) mu_x += w.data[i * d_z + k] * q.mean[k];
      mean_err += (x[i] - mu_x) * (x[i] - mu_x);
    }
    for (int k = 0; k < d_z; ++k) {
      double col = 0;
      for (int i = 0; i < d_x; ++i) col += w.data[i * d_z + k] * w.data[i * d_z + k];
      trace_term += std::exp(q.log_var[k]) * col;
      kl += 0.5 * (q.mean[k] * q.mean[k] + std::exp(q.log_var[k]) - 1.0 - q.log_var[k]);
    }
    const double exact_elbo = -0.5 * d_x * kLog2Pi - 0.5 * (mean_err + trace_term) - kl;
    const double gap = logp - exact_elbo;
    REQUIRE(gap >= -1e-9);  // Jensen, exactly
    if (gap < 0.3) continue;  // keep MC noise well inside the gap
    ++tested;

    RngEngine r(derive_seed(501, {inst}));
    const auto rep = generator_objective(ev, dv, x, {}, 512, r);
    CHECK(rep.total <= logp + 1e-9);
    // MC estimate agrees with the closed-form value.
    CHECK(std::abs(rep.total - exact_elbo) < 0.25);
  }
}

TEST_CASE("sample_generator") {
  SUBCASE("zero-weight decoder puts every sample at the bias") {
    ParamSet dec;
    add_mlp_params(dec, "dec", MlpSpec{{2, 3}});
    dec.at("dec.b0").data = {1.0, -2.0, 0.5};
    MlpView dv;
    dv.append(dec, nullptr, "dec");
    RngEngine rng(1);
    for (const auto& s : sample_generator(dv, 5, {}, 2, rng)) {
      CHECK(s[0] == 1.0);
      CHECK(s[1] == -2.0);
      CHECK(s[2] == 0.5);
    }
  }
  SUBCASE("n = 0 is rejected") {
    ParamSet dec;
    add_mlp_params(dec, "dec", MlpSpec{{2, 3}});
    MlpView dv;
    dv.append(dec, nullptr, "dec");
    RngEngine rng(1);
    CHECK_THROWS_AS(sample_generator(dv, 0, {}, 2, rng), InputError);
  }
  SUBCASE("sample mean of a linear decoder matches decoder(0) within 3 sigma") {
    RngEngine rng(9);
    ParamSet dec;
    const MlpSpec spec{{3, 4}};
    add_mlp_params(dec, "dec", spec);
    init_mlp_params(dec, "dec", spec, rng);
    for (double& v : dec.at("dec.b0").data) v = normal01(rng);
    MlpView dv;
    dv.append(dec, nullptr, "dec");
    const int n = 10000;
    RngEngine draw_rng(77);
    const auto samples = sample_generator(dv, n, {}, 3, draw_rng);
    const auto center = decode_mean(dv, std::vector<double>{0, 0, 0}, {});
    const Tensor& w = dec.at("dec.w0");
    for (int i = 0; i < 4; ++i) {
      double mean = 0;
      for (const auto& s : samples) mean += s[i] / n;
      double var = 0;
      for (int k = 0; k < 3; ++k) var += w.data[i * 3 + k] * w.data[i * 3 + k];
      CHECK(std::abs(mean - center[i]) <= 3.0 * std::sqrt(var / n) + 1e-12);
    }
  }
}

TEST_CASE("class_probs is invariant to a constant logit shift") {
  RngEngine rng(23);
  auto nets = make_nets(3, 2, 4, 0, 3, rng);
  const auto x = random_vec(3, rng);
  RngEngine r1(5), r2(5);
  const auto before = class_probs(nets.cls_view(), x, 3, 4, r1);
  for (double& v : nets.cls.at("cls.b1").data) v += 7.5;
  const auto after = class_probs(nets.cls_view(), x, 3, 4, r2);
  for (int c = 0; c < 3; ++c)
    CHECK(after[c] == doctest::Approx(before[c]).epsilon(1e-9));
}

TEST_CASE("reconstruction helpers") {
  SUBCASE("mse of identical vectors is zero") {
    const std::vector<double> x{1.0, 2.0, -3.0};
    CHECK(mse_of(x, x) == 0.0);
  }
  SUBCASE("linear identity encoder/decoder pair reconstructs exactly") {
    const int d = 3;
    ParamSet enc, dec;
    add_mlp_params(enc, "enc", MlpSpec{{d, 2 * d}});
    add_mlp_params(dec, "dec", MlpSpec{{d, d}});
    Tensor& we = enc.at("enc.w0");
    for (int i = 0; i < d; ++i) we.data[i * d + i] = 1.0;  // mu = x, log_var = 0
    Tensor& wd = dec.at("dec.w0");
    for (int i = 0; i < d; ++i) wd.data[i * d + i] = 1.0;  // x_hat = z = mu
    MlpView ev, dv;
    ev.append(enc, nullptr, "enc");
    dv.append(dec, nullptr, "dec");
    const std::vector<double> x{0.2, -1.4, 0.9};
    const auto [xh, err] = reconstruct_mean(ev, dv, x, {});
    CHECK(err == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("gradient ascent strictly improves every objective on a fixed batch") {
  int ok_gen = 0, ok_cls = 0;
  const int trials = 20;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    RngEngine rng(derive_seed(900, {trial}));
    const int c_n = 3;
    auto nets = make_nets(4, 2, 8, c_n, c_n, rng);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (int i = 0; i < 16; ++i) {
      xs.push_back(random_vec(4, rng));
      ys.push_back(uniform_int(rng, c_n));
    }
    auto batch_total = [&](bool classifier, std::uint64_t seed) {
      double total = 0;
      RngEngine r(seed);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto cond = one_hot(ys[i], c_n);
        total += classifier
                     ? classifier_objective(nets.enc_view(), nets.cls_view(), xs[i],
                                            cond, ys[i], c_n, 1, r)
                           .total
                     : generator_objective(nets.enc_view(), nets.dec_view(), xs[i],
                                           cond, 1, r)
                           .total;
      }
      return total / static_cast<double>(xs.size());
    };
    for (const bool classifier : {false, true}) {
      std::vector<Tensor*> params, grads;
      const char* skip = classifier ? "dec" : "cls";
      for (auto* t : nets.all_params())
        if (t->name.rfind(skip, 0) != 0) params.push_back(t);
      for (auto* t : nets.all_grads())
        if (t->name.rfind(skip, 0) != 0) grads.push_back(t);
      std::vector<const Tensor*> cgrads(grads.begin(), grads.end());
      AdamAscent opt(params, cgrads, 1e-2);
      const double before = batch_total(classifier, 1234);
      for (int step = 0; step < 200; ++step) {
        nets.zero_grads();
        RngEngine r(derive_seed(1234, {static_cast<std::uint64_t>(step)}));
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const auto cond = one_hot(ys[i], c_n);
          if (classifier)
            classifier_objective_backward(nets.enc_view(), nets.cls_view(), xs[i], cond,
                                          ys[i], c_n, 1, r);
          else
            generator_objective_backward(nets.enc_view(), nets.dec_view(), xs[i], cond,
                                         1, r);
        }
        opt.step();
      }
      const double after = batch_total(classifier, 1234);
      if (after > before) (classifier ? ok_cls : ok_gen)++;
    }
  }
  CHECK(ok_gen >= trials * 0.95);
  CHECK(ok_cls >= trials * 0.95);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  RngEngine rng(41);
  auto nets = make_nets(3, 2, 4, 0, 2, rng);
  write_tensor_file("roundtrip_test.limx", {&nets.enc, &nets.dec});
  const auto back = read_tensor_file("roundtrip_test.limx");
  std::size_t idx = 0;
  for (const auto* ps : {&nets.enc, &nets.dec})
    for (const auto& t : ps->tensors) {
      const Tensor& r = back.tensors.at(idx++);
      CHECK(r.name == t.name);
      CHECK(r.shape == t.shape);
      for (std::size_t i = 0; i < t.data.size(); ++i) CHECK(r.data[i] == t.data[i]);
    }
  std::remove("roundtrip_test.limx");
}
