#include <doctest.h>

#include <cmath>
#include <vector>

#include "gigan/errors.hpp"
#include "gigan/objectives.hpp"
#include "gigan/oracle.hpp"
#include "support.hpp"

using namespace gigan;
using gigan::testing::central_difference;
using gigan::testing::normal_matrix;
using gigan::testing::relative_error;

namespace {

const double kLog2 = std::log(2.0);

/// sup_t s t - scale * f(t) over a dense logarithmic grid of t > 0.
double grid_conjugate(FKind f, double s, double scale) {
  double best = -HUGE_VAL;
  for (double lt = -18.0; lt <= 18.0; lt += 2e-4) {
    const double t = std::exp(lt);
    best = std::max(best, s * t - scale * f_value(f, t));
  }
  return std::max(best, -scale * f_value(f, 0.0));
}

/// Replicates each support point by its integer count.
std::vector<double> replicate(const std::vector<double>& values, const std::vector<int>& counts) {
  std::vector<double> out;
  for (std::size_t k = 0; k < values.size(); ++k) out.insert(out.end(), counts[k], values[k]);
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_SUITE("objectives") {
  TEST_CASE("conjugate values") {
    CHECK(f_star(FKind::KL, 1.0) == doctest::Approx(1.0));
    CHECK(f_star(FKind::JS, 0.0) == doctest::Approx(0.0));
    CHECK(f_star(FKind::KL, 0.0) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK_THROWS_AS(f_star(FKind::JS, kLog2), DomainError);
    CHECK_THROWS_AS(f_star(FKind::JS, 1.0), DomainError);
  }

  TEST_CASE("conjugates agree with a grid supremum") {
    for (double s : {-2.0, 0.0, 1.0, 2.0}) {
      CHECK(std::abs(f_star(FKind::KL, s) - grid_conjugate(FKind::KL, s, 1.0)) < 1e-6);
    }
    // The f-GAN JS conjugate belongs to 2 f_JS, the oracle conjugate to f_JS.
    for (double s : {-2.0, -0.5, 0.0, 0.3, 0.6}) {
      CHECK(std::abs(f_star(FKind::JS, s) - grid_conjugate(FKind::JS, s, 2.0)) < 1e-6);
    }
    for (double s : {-1.0, 0.0, 0.2, 0.3}) {
      CHECK(std::abs(oracle_conjugate(FKind::JS, s) - grid_conjugate(FKind::JS, s, 1.0)) < 1e-6);
    }
    for (auto f : {FKind::KL, FKind::JS}) {
      for (double s : {-1.0, 0.1, 0.5}) {
        const double h = 1e-6;
        const double fd = (f_star(f, s + h) - f_star(f, s - h)) / (2 * h);
        CHECK(std::abs(f_star_derivative(f, s) - fd) < 1e-6);
      }
    }
  }

  TEST_CASE("js domain activation") {
    CHECK(js_domain_activation(0.0) == doctest::Approx(0.0));
    CHECK(js_domain_activation(50.0) == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(js_domain_activation(20.0) < kLog2);
    CHECK(std::isfinite(js_domain_activation(-800.0)));
    Rng rng(3);
    for (int k = 0; k < 10000; ++k) {
      const double a = 10 * rng.normal(), b = 10 * rng.normal();
      if (a == b) continue;
      CHECK((a < b) == (js_domain_activation(a) < js_domain_activation(b)));
    }
    for (double v : {-3.0, 0.0, 2.0}) {
      const double h = 1e-6;
      CHECK(js_domain_derivative(v) ==
            doctest::Approx((js_domain_activation(v + h) - js_domain_activation(v - h)) / (2 * h)).epsilon(1e-8));
    }
  }

  TEST_CASE("DV objective examples") {
    std::vector<double> c(4, 0.7);
    CHECK(std::abs(dv_kl_objective(c, c).value) < 1e-15);
    CHECK(dv_kl_objective(std::vector<double>{1, 1}, std::vector<double>{0, 0}).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(dv_kl_objective(std::vector<double>{}, c), ShapeMismatch);
    CHECK(std::isfinite(dv_kl_objective(std::vector<double>{0}, std::vector<double>{1000, -1000}).value));
  }

  TEST_CASE("DV objective is shift invariant") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> r(7), f(9);
      for (auto& v : r) v = rng.normal();
      for (auto& v : f) v = 3 * rng.normal();
      const double shift = 10 * rng.normal();
      std::vector<double> rs = r, fs = f;
      for (auto& v : rs) v += shift;
      for (auto& v : fs) v += shift;
      CHECK(std::abs(dv_kl_objective(r, f).value - dv_kl_objective(rs, fs).value) < 1e-12);
    }
  }

  TEST_CASE("DV with the log-likelihood ratio scorer equals KL") {
    // Q = (1/4, 1/2, 1/4), P = (1/2, 1/4, 1/4) as equally weighted replicated samples.
    const Vector q = (Vector(3) << 0.25, 0.5, 0.25).finished();
    const Vector p = (Vector(3) << 0.5, 0.25, 0.25).finished();
    std::vector<double> gamma(3);
    for (int x = 0; x < 3; ++x) gamma[x] = std::log(q[x] / p[x]);
    const auto real = replicate(gamma, {1, 2, 1});
    const auto fake = replicate(gamma, {2, 1, 1});
    CHECK(std::abs(dv_kl_objective(real, fake).value - f_divergence(q, p, FKind::KL)) < 1e-12);
  }

  TEST_CASE("f-GAN examples") {
    std::vector<double> z(3, 0.0);
    CHECK(std::abs(fgan_objective(FKind::JS, z, z).value) < 1e-15);
    CHECK(std::abs(fgan_objective(FKind::KL, std::vector<double>{1}, std::vector<double>{1}).value) < 1e-15);
    CHECK_THROWS_AS(fgan_objective(FKind::JS, z, std::vector<double>{1.0}), DomainError);
  }

  TEST_CASE("fused JS form equals the activated form") {
    Rng rng(9);
    std::vector<double> r(6), f(5), ra(6), fa(5);
    for (int k = 0; k < 6; ++k) ra[k] = js_domain_activation(r[k] = 4 * rng.normal());
    for (int k = 0; k < 5; ++k) fa[k] = js_domain_activation(f[k] = 4 * rng.normal());
    CHECK(std::abs(fgan_js_logit_objective(r, f).value - fgan_objective(FKind::JS, ra, fa).value) < 1e-12);
    CHECK(std::isfinite(fgan_js_logit_objective(std::vector<double>{-900}, std::vector<double>{900}).value));
  }

  TEST_CASE("pointwise-optimal f-GAN scorer attains the divergence") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector q = gigan::testing::dirichlet(rng, 5);
      const Vector p = gigan::testing::dirichlet(rng, 5);
      // KL: s = 1 + log(q / p). JS (unhalved generator): e^s = 2q / (q + p).
      double kl = 0.0, js = 0.0;
      std::vector<double> s_js(5);
      for (int x = 0; x < 5; ++x) {
        const double sk = 1.0 + std::log(q[x] / p[x]);
        kl += q[x] * sk - p[x] * f_star(FKind::KL, sk);
        s_js[x] = std::log(2 * q[x] / (q[x] + p[x]));
        js += q[x] * s_js[x] - p[x] * f_star(FKind::JS, s_js[x]);
      }
      CHECK(std::abs(kl - f_divergence(q, p, FKind::KL)) < 1e-3);
      CHECK(std::abs(js - 2.0 * f_divergence(q, p, FKind::JS)) < 1e-3);
      CHECK(js <= 2.0 * kLog2);
      // Local maximality: perturbed scorers in the domain do no better.
      for (int k = 0; k < 20; ++k) {
        double other = 0.0;
        for (int x = 0; x < 5; ++x) {
          const double s = std::min(s_js[x] + 0.3 * rng.normal(), kLog2 - 1e-3);
          other += q[x] * s - p[x] * f_star(FKind::JS, s);
        }
        CHECK(other <= js + 1e-12);
      }
    }
  }

  TEST_CASE("objective gradients match central differences") {
    Rng rng(17);
    std::vector<double> r(6), f(8);
    for (auto& v : r) v = rng.normal();
    for (auto& v : f) v = rng.normal() - 1.0;
    using Fn = std::function<ObjectiveResult(std::span<const double>, std::span<const double>)>;
    const std::vector<Fn> forms = {
        [](auto a, auto b) { return dv_kl_objective(a, b); },
        [](auto a, auto b) { return fgan_objective(FKind::KL, a, b); },
        [](auto a, auto b) { return fgan_js_logit_objective(a, b); },
    };
    for (const auto& form : forms) {
      const auto res = form(r, f);
      auto by_real = [&](const std::vector<double>& v) { return form(v, f).value; };
      auto by_fake = [&](const std::vector<double>& v) { return form(r, v).value; };
      CHECK(relative_error(to_std(res.grad_real), central_difference(by_real, r)) < 1e-6);
      CHECK(relative_error(to_std(res.grad_fake), central_difference(by_fake, f)) < 1e-6);
    }
    std::vector<double> fa(8);
    for (int k = 0; k < 8; ++k) fa[k] = js_domain_activation(f[k]);
    const auto js = fgan_objective(FKind::JS, r, fa);
    auto js_fake = [&](const std::vector<double>& v) { return fgan_objective(FKind::JS, r, v).value; };
    CHECK(relative_error(to_std(js.grad_fake), central_difference(js_fake, fa)) < 1e-6);
  }

  TEST_CASE("graph-informed objective") {
    Rng rng(23);
    const int d = 4;
    const FamilySpec fam = child_parent_families(Dag(d, {{0, 1}, {1, 2}, {0, 3}, {2, 3}}));
    const auto cols = family_columns(fam);
    const Matrix real = normal_matrix(12, d, rng);
    const Matrix fake = normal_matrix(10, d, rng);

    for (auto form : {ObjectiveForm::DvKl, ObjectiveForm::FganJs, ObjectiveForm::FganKl}) {
      std::vector<Mlp> critics;
      for (std::size_t i = 0; i < fam.size(); ++i) {
        MlpSpec s;
        s.input_dim = static_cast<int>(cols[i].size());
        s.hidden_widths = {8, 8};
        s.init_seed = 100 + i;
        if (form == ObjectiveForm::FganJs && i % 2 == 0) s.output_activation = OutputActivation::JsDomain;
        critics.emplace_back(s);
      }
      const auto res = graph_informed_objective(form, fam, cols, critics, real, fake);

      double total = 0.0;
      for (std::size_t i = 0; i < fam.size(); ++i) {
        Matrix rs(real.rows(), cols[i].size()), fs(fake.rows(), cols[i].size());
        for (std::size_t c = 0; c < cols[i].size(); ++c) {
          rs.col(c) = real.col(cols[i][c]);
          fs.col(c) = fake.col(cols[i][c]);
        }
        const Vector sr = critics[i].forward(rs).col(0), sf = critics[i].forward(fs).col(0);
        const double j = evaluate_objective(form, critics[i].spec().output_activation, to_std(sr), to_std(sf)).value;
        CHECK(std::abs(j - res.per_family[i]) < 1e-12);
        total += fam.weights[i] * j;
      }
      CHECK(std::abs(total - res.value) < 1e-12);

      for (std::size_t i = 0; i < fam.size(); ++i) {
        const std::vector<double> p0(critics[i].params().begin(), critics[i].params().end());
        auto f = [&](const std::vector<double>& p) {
          auto copy = critics;
          std::copy(p.begin(), p.end(), copy[i].params().begin());
          return graph_informed_objective(form, fam, cols, copy, real, fake).value;
        };
        CHECK(relative_error(res.critic_grads[i], central_difference(f, p0)) < 1e-5);
      }
      std::vector<double> x0(fake.data(), fake.data() + fake.size());
      auto by_fake = [&](const std::vector<double>& v) {
        Matrix fv = Eigen::Map<const Matrix>(v.data(), fake.rows(), fake.cols());
        return graph_informed_objective(form, fam, cols, critics, real, fv).value;
      };
      std::vector<double> g(res.fake_grad.data(), res.fake_grad.data() + res.fake_grad.size());
      CHECK(relative_error(g, central_difference(by_fake, x0)) < 1e-5);
    }
  }

  TEST_CASE("monolithic family equals the plain objective") {
    Rng rng(31);
    const Matrix real = normal_matrix(9, 3, rng), fake = normal_matrix(9, 3, rng);
    const FamilySpec mono = monolithic_family(3);
    MlpSpec s;
    s.input_dim = 3;
    s.hidden_widths = {5};
    s.init_seed = 4;
    std::vector<Mlp> critic = {Mlp(s)};
    const auto res = graph_informed_objective(ObjectiveForm::DvKl, mono, family_columns(mono), critic, real, fake);
    const Vector sr = critic[0].forward(real).col(0), sf = critic[0].forward(fake).col(0);
    CHECK(std::abs(res.value - dv_kl_objective(to_std(sr), to_std(sf)).value) < 1e-12);

    MlpSpec zero = s;
    zero.output_activation = OutputActivation::JsDomain;
    std::vector<Mlp> flat = {Mlp(zero)};
    std::fill(flat[0].params().begin(), flat[0].params().end(), 0.0);
    CHECK(std::abs(graph_informed_objective(ObjectiveForm::FganJs, mono, family_columns(mono), flat, real, fake)
                       .value) < 1e-15);

    std::vector<Mlp> two = {Mlp(s), Mlp(s)};
    CHECK_THROWS_AS(graph_informed_objective(ObjectiveForm::DvKl, mono, family_columns(mono), two, real, fake),
                    ShapeMismatch);
  }

  TEST_CASE("names parse") {
    CHECK(parse_objective("dv_kl") == ObjectiveForm::DvKl);
    CHECK(parse_objective("fgan_js") == ObjectiveForm::FganJs);
    CHECK(parse_objective("fgan_kl") == ObjectiveForm::FganKl);
    CHECK_THROWS_AS(parse_objective("wgan"), ParseError);
  }
}
