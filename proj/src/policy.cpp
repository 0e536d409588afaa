// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "codesign/binary_io.hpp"
#include "codesign/error.hpp"

namespace codesign {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr char kPolicyMagic[8] = {'C', 'D', 'S', 'G', 'P', 'O', 'L', '\0'};
constexpr std::uint32_t kPolicyVersion = 1;

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd g(big, small);
  for (int c = 0; c < small; ++c)
    for (int r = 0; r < big; ++r) g(r, c) = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int c = 0; c < small; ++c)
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  if (rows < cols) q.transposeInPlace();
  return gain * q;
}

void check_finite(const Eigen::MatrixXd& m, int layer, const char* name) {
  if (!m.allFinite())
    throw NumericError("policy layer " + std::to_string(layer) + " (" + name +
                       ") produced a non-finite activation");
}

Eigen::MatrixXd dtanh(const Eigen::MatrixXd& activated) {
  return (1.0 - activated.array().square()).matrix();
}

}  // namespace

Eigen::Index PolicyShape::param_count() const { return ParamLayout::of(*this).total; }

ParamLayout ParamLayout::of(const PolicyShape& s) {
  ParamLayout l{};
  Eigen::Index at = 0;
  auto take = [&at](Eigen::Index n) {
    const Eigen::Index start = at;
    at += n;
    return start;
  };
  l.encoder_w = take(Eigen::Index(s.latent_dim) * s.design_dim);
  l.encoder_b = take(s.latent_dim);
  l.trunk1_w = take(Eigen::Index(s.hidden_dim) * s.obs_dim());
  l.trunk1_b = take(s.hidden_dim);
  l.trunk2_w = take(Eigen::Index(s.hidden_dim) * s.hidden_dim);
  l.trunk2_b = take(s.hidden_dim);
  l.actor_w = take(Eigen::Index(s.action_dim) * s.hidden_dim);
  l.actor_b = take(s.action_dim);
  l.log_std = take(s.action_dim);
  l.critic_w = take(s.hidden_dim);
  l.critic_b = take(1);
  l.total = at;
  return l;
}

#define CODESIGN_PARAM_BLOCKS(X)                                         \
  X(encoder_w, Matrix, shape.latent_dim, shape.design_dim)               \
  X(encoder_b, Vector, shape.latent_dim, 1)                              \
  X(trunk1_w, Matrix, shape.hidden_dim, shape.obs_dim())                 \
  X(trunk1_b, Vector, shape.hidden_dim, 1)                               \
  X(trunk2_w, Matrix, shape.hidden_dim, shape.hidden_dim)                \
  X(trunk2_b, Vector, shape.hidden_dim, 1)                               \
  X(actor_w, Matrix, shape.action_dim, shape.hidden_dim)                 \
  X(actor_b, Vector, shape.action_dim, 1)                                \
  X(log_std, Vector, shape.action_dim, 1)                                \
  X(critic_w, Matrix, 1, shape.hidden_dim)                               \
  X(critic_b, Vector, 1, 1)

#define CODESIGN_DEFINE_MatrixACCESSORS(name, rows, cols)                        \
  PolicyParams::MatrixMap PolicyParams::name() {                                 \
    return MatrixMap(data.data() + ParamLayout::of(shape).name, rows, cols);     \
  }                                                                              \
  PolicyParams::ConstMatrixMap PolicyParams::name() const {                      \
    return ConstMatrixMap(data.data() + ParamLayout::of(shape).name, rows, cols); \
  }
#define CODESIGN_DEFINE_VectorACCESSORS(name, rows, cols)                     \
  PolicyParams::VectorMap PolicyParams::name() {                              \
    return VectorMap(data.data() + ParamLayout::of(shape).name, rows);        \
  }                                                                           \
  PolicyParams::ConstVectorMap PolicyParams::name() const {                   \
    return ConstVectorMap(data.data() + ParamLayout::of(shape).name, rows);   \
  }
#define CODESIGN_DEFINE_ACCESSORS(name, kind, rows, cols) \
  CODESIGN_DEFINE_##kind##ACCESSORS(name, rows, cols)

CODESIGN_PARAM_BLOCKS(CODESIGN_DEFINE_ACCESSORS)

#undef CODESIGN_DEFINE_ACCESSORS
#undef CODESIGN_DEFINE_VectorACCESSORS
#undef CODESIGN_DEFINE_MatrixACCESSORS
#undef CODESIGN_PARAM_BLOCKS

PolicyParams PolicyParams::zeros(const PolicyShape& shape) {
  PolicyParams p;
  p.shape = shape;
  p.data = Eigen::VectorXd::Zero(shape.param_count());
  return p;
}

PolicyParams policy_init(int obs_dim, int action_dim, int design_dim, Rng& rng,
                         int hidden_dim, int latent_dim) {
  if (obs_dim <= latent_dim || action_dim <= 0 || design_dim <= 0 || hidden_dim <= 0 ||
      latent_dim <= 0)
    throw DimensionError("policy_init: dimensions must be positive and obs_dim > latent_dim");
  PolicyShape shape;
  shape.design_dim = design_dim;
  shape.proprio_dim = obs_dim - latent_dim;
  shape.latent_dim = latent_dim;
  shape.hidden_dim = hidden_dim;
  shape.action_dim = action_dim;

  PolicyParams p = PolicyParams::zeros(shape);
  p.encoder_w() = orthogonal(latent_dim, design_dim, 1.0, rng);
  p.trunk1_w() = orthogonal(hidden_dim, shape.obs_dim(), 1.0, rng);
  p.trunk2_w() = orthogonal(hidden_dim, hidden_dim, 1.0, rng);
  p.actor_w() = orthogonal(action_dim, hidden_dim, 0.01, rng);
  p.critic_w() = orthogonal(1, hidden_dim, 1.0, rng);
  p.log_std().setConstant(-0.5);
  return p;
}

BatchForward forward_batch(const PolicyParams& params, const Eigen::MatrixXd& designs,
                           const Eigen::MatrixXd& proprio) {
  const PolicyShape& s = params.shape;
  if (designs.rows() != s.design_dim || proprio.rows() != s.proprio_dim ||
      designs.cols() != proprio.cols())
    throw DimensionError("forward_batch: input shapes do not match the policy");
  BatchForward f;
  f.latent = ((params.encoder_w() * designs).colwise() + params.encoder_b()).array().tanh();
  check_finite(f.latent, 0, "design encoder");
  f.obs.resize(s.obs_dim(), proprio.cols());
  f.obs.topRows(s.proprio_dim) = proprio;
  f.obs.bottomRows(s.latent_dim) = f.latent;
  f.hidden1 = ((params.trunk1_w() * f.obs).colwise() + params.trunk1_b()).array().tanh();
  check_finite(f.hidden1, 1, "trunk 1");
  f.hidden2 = ((params.trunk2_w() * f.hidden1).colwise() + params.trunk2_b()).array().tanh();
  check_finite(f.hidden2, 2, "trunk 2");
  f.mean = (params.actor_w() * f.hidden2).colwise() + params.actor_b();
  check_finite(f.mean, 3, "actor head");
  f.value = (params.critic_w() * f.hidden2).array() + params.critic_b()[0];
  check_finite(f.value, 4, "critic head");
  return f;
}

PolicyOutput policy_forward(const PolicyParams& params, const DesignVector& design,
                            const Eigen::VectorXd& proprio) {
  const BatchForward f = forward_batch(params, design.factors, proprio);
  PolicyOutput out;
  out.dist.mean = f.mean.col(0);
  out.dist.log_std = params.log_std();
  out.value = f.value[0];
  out.observation = f.obs.col(0);
  return out;
}

std::pair<Eigen::VectorXd, double> sample_action(const ActionDistribution& dist, Rng& rng) {
  Eigen::VectorXd action(dist.mean.size());
  for (Eigen::Index i = 0; i < action.size(); ++i)
    action[i] = dist.mean[i] + std::exp(dist.log_std[i]) * standard_normal(rng);
  return {action, log_prob(dist, action)};
}

double log_prob(const ActionDistribution& dist, const Eigen::VectorXd& action) {
  const Eigen::ArrayXd z =
      (action - dist.mean).array() * (-dist.log_std.array()).exp();
  return -0.5 * z.square().sum() - dist.log_std.sum() -
         kHalfLog2Pi * static_cast<double>(action.size());
}

double entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() + static_cast<double>(log_std.size()) * (0.5 + kHalfLog2Pi);
}

namespace {

struct Surrogate {
  LossTerms loss;
  Eigen::VectorXd dloss_dlogp;  // per sample
  Eigen::RowVectorXd dloss_dvalue;
  Eigen::MatrixXd scaled_err;   // (a - mu) / sigma^2
  Eigen::MatrixXd z2;           // ((a - mu) / sigma)^2
};

Surrogate surrogate(const PolicyParams& params, const BatchForward& f, const MiniBatch& b,
                    const PpoConfig& cfg) {
  const Eigen::Index n = b.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd log_std = params.log_std();
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();

  Surrogate s;
  const Eigen::MatrixXd err = b.actions - f.mean;
  s.scaled_err = (err.array().colwise() * inv_var).matrix();
  s.z2 = (err.array().square().colwise() * inv_var).matrix();
  const double log_norm =
      log_std.sum() + kHalfLog2Pi * static_cast<double>(params.shape.action_dim);

  s.dloss_dlogp.resize(n);
  double surr_sum = 0.0, clipped = 0.0, kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double logp = -0.5 * s.z2.col(i).sum() - log_norm;
    const double ratio = std::exp(logp - b.old_log_prob[i]);
    const double adv = b.advantages[i];
    const double unclipped = ratio * adv;
    const double clipped_term = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
    const bool take_unclipped = unclipped <= clipped_term;
    surr_sum += take_unclipped ? unclipped : clipped_term;
    s.dloss_dlogp[i] = take_unclipped ? -inv_n * unclipped : 0.0;
    if (std::abs(ratio - 1.0) > cfg.clip) clipped += 1.0;
    kl += (ratio - 1.0) - std::log(ratio);
  }
  const Eigen::RowVectorXd value_err = f.value - b.returns.transpose();

  s.loss.policy_loss = -surr_sum * inv_n;
  s.loss.value_loss = value_err.squaredNorm() * inv_n;
  s.loss.entropy = entropy(log_std);
  s.loss.total = s.loss.policy_loss + cfg.value_coef * s.loss.value_loss -
                 cfg.entropy_coef * s.loss.entropy;
  s.loss.clip_fraction = clipped * inv_n;
  s.loss.approx_kl = kl * inv_n;
  s.dloss_dvalue = (2.0 * cfg.value_coef * inv_n) * value_err;
  if (!std::isfinite(s.loss.total))
    throw NumericError("PPO loss is not finite");
  return s;
}

void check_minibatch(const PolicyParams& params, const MiniBatch& b) {
  const Eigen::Index n = b.size();
  if (n == 0) throw ContractError("loss_and_grads: empty minibatch");
  if (b.actions.rows() != params.shape.action_dim || b.old_log_prob.size() != n ||
      b.advantages.size() != n || b.returns.size() != n || b.designs.cols() != n ||
      b.proprio.cols() != n)
    throw DimensionError("loss_and_grads: minibatch shapes are inconsistent");
}

}  // namespace

LossTerms evaluate_loss(const PolicyParams& params, const MiniBatch& batch,
                        const PpoConfig& cfg) {
  check_minibatch(params, batch);
  return surrogate(params, forward_batch(params, batch.designs, batch.proprio), batch, cfg)
      .loss;
}

LossAndGrads loss_and_grads(const PolicyParams& params, const MiniBatch& batch,
                            const PpoConfig& cfg) {
  check_minibatch(params, batch);
  const PolicyShape& shape = params.shape;
  const BatchForward f = forward_batch(params, batch.designs, batch.proprio);
  const Surrogate s = surrogate(params, f, batch, cfg);

  LossAndGrads out{s.loss, PolicyParams::zeros(shape)};
  PolicyParams& g = out.grads;
  g.snapshot_id = params.snapshot_id;
  g.seed = params.seed;

  // d logp / d mu = (a - mu) / sigma^2; d logp / d log_std = z^2 - 1.
  const Eigen::MatrixXd d_mean = s.scaled_err * s.dloss_dlogp.asDiagonal();
  g.log_std() = (s.z2.array() - 1.0).matrix() * s.dloss_dlogp;
  g.log_std().array() -= cfg.entropy_coef;

  g.actor_w() = d_mean * f.hidden2.transpose();
  g.actor_b() = d_mean.rowwise().sum();
  g.critic_w() = s.dloss_dvalue * f.hidden2.transpose();
  g.critic_b()[0] = s.dloss_dvalue.sum();

  Eigen::MatrixXd d_pre2 = params.actor_w().transpose() * d_mean +
                           params.critic_w().transpose() * s.dloss_dvalue;
  d_pre2.array() *= dtanh(f.hidden2).array();
  g.trunk2_w() = d_pre2 * f.hidden1.transpose();
  g.trunk2_b() = d_pre2.rowwise().sum();

  Eigen::MatrixXd d_pre1 = params.trunk2_w().transpose() * d_pre2;
  d_pre1.array() *= dtanh(f.hidden1).array();
  g.trunk1_w() = d_pre1 * f.obs.transpose();
  g.trunk1_b() = d_pre1.rowwise().sum();

  Eigen::MatrixXd d_latent =
      (params.trunk1_w().transpose() * d_pre1).bottomRows(shape.latent_dim);
  d_latent.array() *= dtanh(f.latent).array();
  g.encoder_w() = d_latent * batch.designs.transpose();
  g.encoder_b() = d_latent.rowwise().sum();

  if (!g.data.allFinite()) throw NumericError("PPO gradients are not finite");
  return out;
}

AdamState adam_init(const PolicyParams& params, double learning_rate) {
  AdamState opt;
  opt.m = Eigen::VectorXd::Zero(params.data.size());
  opt.v = Eigen::VectorXd::Zero(params.data.size());
  opt.learning_rate = learning_rate;
  return opt;
}

std::pair<PolicyParams, AdamState> adam_step(const PolicyParams& params,
                                             const PolicyParams& grads,
                                             const AdamState& opt) {
  if (grads.data.size() != params.data.size() || opt.m.size() != params.data.size() ||
      opt.v.size() != params.data.size())
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  AdamState next = opt;
  next.step = opt.step + 1;
  next.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grads.data;
  next.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grads.data.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(next.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(next.step));

  PolicyParams out = params;
  out.data.array() -= opt.learning_rate * (next.m.array() / c1) /
                      ((next.v.array() / c2).sqrt() + opt.epsilon);
  out.log_std() = out.log_std().cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return {std::move(out), std::move(next)};
}

std::string serialize_policy(const PolicyParams& params) {
  const PolicyShape& s = params.shape;
  if (params.data.size() != s.param_count())
    throw DimensionError("serialize_policy: parameter vector does not match shape");
  ByteWriter w;
  w.raw(std::string_view(kPolicyMagic, sizeof(kPolicyMagic)));
  w.u32(kPolicyVersion);
  w.u32(static_cast<std::uint32_t>(s.design_dim));
  w.u32(static_cast<std::uint32_t>(s.proprio_dim));
  w.u32(static_cast<std::uint32_t>(s.latent_dim));
  w.u32(static_cast<std::uint32_t>(s.hidden_dim));
  w.u32(static_cast<std::uint32_t>(s.action_dim));
  w.u64(params.snapshot_id);
  w.u64(params.seed);
  w.u64(static_cast<std::uint64_t>(params.data.size()));
  w.vec(params.data);
  return w.bytes();
}

PolicyParams deserialize_policy(const std::string& bytes, const std::string& origin) {
  ByteReader r(bytes, origin);
  if (r.raw(sizeof(kPolicyMagic)) != std::string_view(kPolicyMagic, sizeof(kPolicyMagic)))
    throw IntegrityError(origin, "not a policy checkpoint (bad magic)");
  if (r.u32() != kPolicyVersion) throw IntegrityError(origin, "unsupported policy version");
  PolicyShape s;
  s.design_dim = static_cast<int>(r.u32());
  s.proprio_dim = static_cast<int>(r.u32());
  s.latent_dim = static_cast<int>(r.u32());
  s.hidden_dim = static_cast<int>(r.u32());
  s.action_dim = static_cast<int>(r.u32());
  PolicyParams p;
  p.shape = s;
  p.snapshot_id = r.u64();
  p.seed = r.u64();
  const std::uint64_t count = r.u64();
  if (count != static_cast<std::uint64_t>(s.param_count()))
    throw IntegrityError(origin, "parameter count does not match the header dims");
  p.data = r.vec(static_cast<Eigen::Index>(count));
  r.expect_end();
  return p;
}

void save_policy(const std::filesystem::path& path, const PolicyParams& params) {
  write_file_atomic(path, serialize_policy(params));
}

PolicyParams load_policy(const std::filesystem::path& path) {
  return deserialize_policy(read_file(path), path.string());
}

}  // namespace codesign
