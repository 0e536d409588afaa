// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "codesign/policy.hpp"

using namespace codesign;

namespace {

// Reduced network: proprio 2 + latent 4 = obs 6, hidden 8.
PolicyParams small_policy(std::uint64_t seed) {
  Rng rng(seed);
  PolicyParams p = policy_init(6, 3, 2, rng, 8, 4);
  std::normal_distribution<double> n(0.0, 0.3);
  for (Eigen::Index i = 0; i < p.data.size(); ++i) p.data[i] += n(rng);
  p.log_std() = Eigen::Vector3d(-0.3, 0.1, -0.6);
  return p;
}

MiniBatch random_batch(const PolicyParams& p, int size, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 4.0), shift(-0.4, 0.4);
  MiniBatch b;
  const auto& s = p.shape;
  b.designs.resize(s.design_dim, size);
  b.proprio.resize(s.proprio_dim, size);
  b.actions.resize(s.action_dim, size);
  b.old_log_prob.resize(size);
  b.advantages.resize(size);
  b.returns.resize(size);
  for (int k = 0; k < size; ++k) {
    for (int i = 0; i < s.design_dim; ++i) b.designs(i, k) = u(rng);
    for (int i = 0; i < s.proprio_dim; ++i) b.proprio(i, k) = n(rng);
    DesignVector d{b.designs.col(k)};
    const auto out = policy_forward(p, d, b.proprio.col(k));
    auto [a, lp] = sample_action(out.dist, rng);
    b.actions.col(k) = a;
    // Spread ratios across both sides of the clip range.
    b.old_log_prob[k] = lp + shift(rng);
    b.advantages[k] = n(rng);
    b.returns[k] = n(rng);
  }
  return b;
}

// Loss written out sample by sample.
double reference_loss(const PolicyParams& p, const MiniBatch& b, const PpoConfig& cfg) {
  double policy = 0.0, value = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const auto out = policy_forward(p, DesignVector{b.designs.col(k)}, b.proprio.col(k));
    double lp = 0.0;
    for (Eigen::Index i = 0; i < b.actions.rows(); ++i) {
      const double sd = std::exp(out.dist.log_std[i]);
      const double z = (b.actions(i, k) - out.dist.mean[i]) / sd;
      lp += -0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * std::numbers::pi);
    }
    const double r = std::exp(lp - b.old_log_prob[k]);
    const double a = b.advantages[k];
    policy += -std::min(r * a, std::clamp(r, 1 - cfg.clip, 1 + cfg.clip) * a);
    value += std::pow(out.value - b.returns[k], 2);
  }
  const double n = double(b.size());
  double ent = 0.0;
  for (Eigen::Index i = 0; i < p.log_std().size(); ++i)
    ent += 0.5 + 0.5 * std::log(2 * std::numbers::pi) + p.log_std()[i];
  return policy / n + cfg.value_coef * value / n - cfg.entropy_coef * ent;
}

}  // namespace

TEST_CASE("parameter count of the full network") {
  PolicyShape s;
  CHECK(s.obs_dim() == 14);
  // 4*2+4 + 64*14+64 + 64*64+64 + 4*64+4 + 4 + 64+1
  CHECK(s.param_count() == 5461);
  const ParamLayout l = ParamLayout::of(s);
  CHECK(l.encoder_w == 0);
  CHECK(l.total == 5461);
  CHECK(l.critic_b == 5460);
}

TEST_CASE("init") {
  Rng a(1), b(1), c(2);
  const PolicyParams p = policy_init(14, 4, 2, a);
  const PolicyParams q = policy_init(14, 4, 2, b);
  const PolicyParams r = policy_init(14, 4, 2, c);
  CHECK(p.data == q.data);
  CHECK(p.data != r.data);
  CHECK(p.data.size() == 5461);
  CHECK(p.log_std() == Eigen::VectorXd::Constant(4, -0.5));
  CHECK(p.trunk1_b().isZero());
  // Orthogonal rows: W W^T = I for the square trunk layer.
  const Eigen::MatrixXd w = p.trunk2_w();
  CHECK((w * w.transpose() - Eigen::MatrixXd::Identity(64, 64)).norm() < 1e-10);
  const Eigen::MatrixXd actor = p.actor_w();
  CHECK((actor * actor.transpose() - 1e-4 * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  CHECK_THROWS_AS(policy_init(4, 4, 2, a), DimensionError);
}

TEST_CASE("forward matches a hand evaluation") {
  const PolicyParams p = small_policy(3);
  const DesignVector d{Eigen::Vector2d(1.3, 0.7)};
  const Eigen::Vector2d prop(0.2, -0.4);
  const auto out = policy_forward(p, d, prop);

  const Eigen::VectorXd latent =
      (p.encoder_w() * d.factors + p.encoder_b()).array().tanh().matrix();
  Eigen::VectorXd obs(6);
  obs << prop, latent;
  const Eigen::VectorXd h1 = (p.trunk1_w() * obs + p.trunk1_b()).array().tanh().matrix();
  const Eigen::VectorXd h2 = (p.trunk2_w() * h1 + p.trunk2_b()).array().tanh().matrix();
  CHECK((out.observation - obs).norm() < 1e-14);
  CHECK((out.dist.mean - (p.actor_w() * h2 + p.actor_b())).norm() < 1e-14);
  CHECK(out.value == doctest::Approx((p.critic_w() * h2)(0) + p.critic_b()[0]));
  CHECK(out.dist.log_std == p.log_std());
}

TEST_CASE("forward rejects bad shapes and reports the failing layer") {
  PolicyParams p = small_policy(3);
  CHECK_THROWS_AS(policy_forward(p, DesignVector{Eigen::Vector3d(1, 1, 1)}, Eigen::Vector2d(0, 0)),
                  DimensionError);
  p.trunk2_b()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    policy_forward(p, DesignVector{Eigen::Vector2d(1, 1)}, Eigen::Vector2d(0, 0));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("gaussian log prob and entropy") {
  ActionDistribution d{Eigen::Vector2d(0.5, -1.0), Eigen::Vector2d(std::log(2.0), 0.0)};
  const double lp = log_prob(d, Eigen::Vector2d(1.5, -1.0));
  const double ref = -0.5 * 0.25 - std::log(2.0) - std::log(2 * std::numbers::pi);
  CHECK(lp == doctest::Approx(ref).epsilon(1e-14));
  CHECK(entropy(Eigen::Vector2d(0.0, 0.0)) ==
        doctest::Approx(1.0 + std::log(2 * std::numbers::pi)).epsilon(1e-14));

  Rng rng(4);
  const ActionDistribution wide{Eigen::Vector2d(1.0, -2.0), Eigen::Vector2d(-1.0, 0.5)};
  Eigen::Vector2d m = Eigen::Vector2d::Zero(), v = Eigen::Vector2d::Zero();
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto [a, l] = sample_action(wide, rng);
    CHECK(l == doctest::Approx(log_prob(wide, a)));
    m += a;
    v += a.cwiseProduct(a);
  }
  m /= n;
  v = v / n - m.cwiseProduct(m);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::sqrt(v[0]) == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
  CHECK(std::sqrt(v[1]) == doctest::Approx(std::exp(0.5)).epsilon(0.03));
}

TEST_CASE("loss matches the per-sample reference") {
  const PolicyParams p = small_policy(5);
  const MiniBatch b = random_batch(p, 16, 6);
  PpoConfig cfg;
  const LossTerms l = evaluate_loss(p, b, cfg);
  CHECK(l.total == doctest::Approx(reference_loss(p, b, cfg)).epsilon(1e-12));
  CHECK(l.clip_fraction >= 0.0);
  CHECK(l.clip_fraction <= 1.0);
  CHECK(l.approx_kl >= 0.0);
  CHECK(loss_and_grads(p, b, cfg).loss.total == l.total);
}

TEST_CASE("analytic gradients match central differences") {
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const PolicyParams p = small_policy(seed);
    const MiniBatch b = random_batch(p, 10, seed + 100);
    const LossAndGrads lg = loss_and_grads(p, b, cfg);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.data.size(); ++i) {
      const double h = 1e-6;
      PolicyParams plus = p, minus = p;
      plus.data[i] += h;
      minus.data[i] -= h;
      const double fd =
          (evaluate_loss(plus, b, cfg).total - evaluate_loss(minus, b, cfg).total) / (2 * h);
      const double g = lg.grads.data[i];
      const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-3});
      worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("adam first step moves each weight by about the learning rate") {
  PolicyParams p = small_policy(7);
  PolicyParams g = PolicyParams::zeros(p.shape);
  for (Eigen::Index i = 0; i < g.data.size(); ++i) g.data[i] = (i % 3 == 0 ? -1.0 : 0.5) * (1 + i % 5);
  g.log_std().setZero();
  const AdamState opt = adam_init(p, 1e-3);
  CHECK(opt.m.isZero());
  auto [next, state] = adam_step(p, g, opt);
  CHECK(state.step == 1);
  for (Eigen::Index i = 0; i < p.data.size(); ++i) {
    const double gi = g.data[i];
    const double expect = gi == 0.0 ? 0.0 : -1e-3 * gi / (std::abs(gi) + 1e-8);
    CHECK(next.data[i] - p.data[i] == doctest::Approx(expect).epsilon(1e-6));
  }
  CHECK((state.m - 0.1 * g.data).norm() < 1e-14);
  CHECK((state.v - 0.001 * g.data.cwiseProduct(g.data)).norm() < 1e-15);
}

TEST_CASE("adam keeps log std within bounds") {
  PolicyParams p = small_policy(7);
  p.log_std().setConstant(1.9999);
  PolicyParams g = PolicyParams::zeros(p.shape);
  g.log_std().setConstant(-100.0);
  AdamState opt = adam_init(p, 0.5);
  for (int i = 0; i < 5; ++i) std::tie(p, opt) = adam_step(p, g, opt);
  CHECK((p.log_std().array() <= kLogStdMax).all());
  g.log_std().setConstant(100.0);
  for (int i = 0; i < 200; ++i) std::tie(p, opt) = adam_step(p, g, opt);
  CHECK((p.log_std().array() >= kLogStdMin).all());
}

TEST_CASE("adam descends a quadratic") {
  PolicyParams p = small_policy(8);
  const Eigen::VectorXd target = Eigen::VectorXd::LinSpaced(p.data.size(), -0.5, 0.5);
  AdamState opt = adam_init(p, 0.05);
  for (int it = 0; it < 500; ++it) {
    PolicyParams g = PolicyParams::zeros(p.shape);
    g.data = 2.0 * (p.data - target);
    std::tie(p, opt) = adam_step(p, g, opt);
  }
  CHECK((p.data - target).norm() < 1e-2);
}

TEST_CASE("checkpoint round trip") {
  PolicyParams p = small_policy(9);
  p.snapshot_id = 17;
  p.seed = 99;
  const std::string bytes = serialize_policy(p);
  const PolicyParams back = deserialize_policy(bytes, "mem");
  CHECK(back.data == p.data);
  CHECK(back.shape == p.shape);
  CHECK(back.snapshot_id == 17);
  CHECK(back.seed == 99);

  const auto dir = std::filesystem::temp_directory_path() / "codesign_policy_test";
  std::filesystem::remove_all(dir);
  save_policy(dir / "sub" / "p.ckpt", p);
  CHECK(load_policy(dir / "sub" / "p.ckpt").data == p.data);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(deserialize_policy(bytes.substr(0, 40), "mem"), IntegrityError);
  std::string bad = bytes;
  bad[1] = '?';
  CHECK_THROWS_AS(deserialize_policy(bad, "mem"), IntegrityError);
  CHECK_THROWS_AS(deserialize_policy(bytes + "x", "mem"), IntegrityError);
}
