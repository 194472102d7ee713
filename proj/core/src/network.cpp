// SPDX-License-Identifier: Apache-2.0
#include "raqr/urformer/network.hpp"

#include <cmath>

#include "raqr/diff/adam.hpp"
#include "raqr/linops/bessel.hpp"
#include "raqr/linops/pinv.hpp"

namespace raqr::urformer {

using diff::CVar;
using diff::Shape;
using diff::Tape;
using diff::Var;

diff::Var filternet_forward(Tape& tape, const FilterNetVars& psi, const Var& kappa) {
  (void)tape;
  const Shape s = kappa.shape();
  // log1p compresses the many-decade dynamic range of kappa (~ 1/sigma^2)
  // into a range the MLP can resolve.
  Var x = diff::reshape(diff::log1p(kappa), {s.count(), 1});
  x = diff::gelu(diff::add_rowvec(diff::matmul(x, psi.w1), psi.b1));
  x = diff::gelu(diff::add_rowvec(diff::matmul(x, psi.w2), psi.b2));
  x = diff::sigmoid(diff::add_rowvec(diff::matmul(x, psi.w3), psi.b3));
  return diff::reshape(x, s);
}

namespace {

FilterNetVars filternet_vars(const ParamLeaves& leaves, const std::string& prefix) {
  return FilterNetVars{leaves.at(prefix + "filternet.w1"), leaves.at(prefix + "filternet.b1"),
                       leaves.at(prefix + "filternet.w2"), leaves.at(prefix + "filternet.b2"),
                       leaves.at(prefix + "filternet.w3"), leaves.at(prefix + "filternet.b3")};
}

// Pre-norm transformer encoder block over the K x d token matrix.
Var encoder_block(Tape& tape, const Var& x, const ParamLeaves& leaves,
                  const std::string& e, const URformerConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = d / heads;

  // MHSA(LN(x)) + x
  Var xn = diff::add_rowvec(
      diff::mul_rowvec(diff::layer_norm_rows(x), leaves.at(e + "ln1.gain")),
      leaves.at(e + "ln1.bias"));
  Var q = diff::add_rowvec(diff::matmul(xn, leaves.at(e + "attn.wq")),
                           leaves.at(e + "attn.bq"));
  Var k = diff::add_rowvec(diff::matmul(xn, leaves.at(e + "attn.wk")),
                           leaves.at(e + "attn.bk"));
  Var v = diff::add_rowvec(diff::matmul(xn, leaves.at(e + "attn.wv")),
                           leaves.at(e + "attn.bv"));
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Var ctx;  // concatenated head outputs
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const std::size_t c0 = hd * dh;
    Var qh = diff::slice(q, 0, c0, q.shape().rows, dh);
    Var kh = diff::slice(k, 0, c0, k.shape().rows, dh);
    Var vh = diff::slice(v, 0, c0, v.shape().rows, dh);
    Var scores = diff::scale_const(diff::matmul(qh, diff::transpose(kh)), inv_sqrt_dh);
    Var attn = diff::softmax_rows(scores);
    Var oh = diff::matmul(attn, vh);
    ctx = hd == 0 ? oh : diff::concat_cols(ctx, oh);
  }
  Var mhsa = diff::add_rowvec(diff::matmul(ctx, leaves.at(e + "attn.wo")),
                              leaves.at(e + "attn.bo"));
  Var a = diff::add(mhsa, x);

  // FFN(LN(a)) + a
  Var an = diff::add_rowvec(
      diff::mul_rowvec(diff::layer_norm_rows(a), leaves.at(e + "ln2.gain")),
      leaves.at(e + "ln2.bias"));
  Var f = diff::gelu(diff::add_rowvec(diff::matmul(an, leaves.at(e + "ffn.w1")),
                                      leaves.at(e + "ffn.b1")));
  Var ffn = diff::add_rowvec(diff::matmul(f, leaves.at(e + "ffn.w2")),
                             leaves.at(e + "ffn.b2"));
  (void)tape;
  return diff::add(ffn, a);
}

// Residual correction: tokenize H_linear into K tokens of dimension 2M,
// embed, run the encoder stack, project back and reassemble.
CVar former_graph(Tape& tape, const CVar& h_linear, const ParamLeaves& leaves,
                  const std::string& p, const URformerConfig& cfg) {
  const std::size_t m = h_linear.shape().rows;
  const std::size_t k = h_linear.shape().cols;
  // token row k = [Re(h_k)^T, Im(h_k)^T]
  Var tokens = diff::concat_cols(diff::transpose(h_linear.re),
                                 diff::transpose(h_linear.im));  // K x 2M
  Var z = diff::add(diff::matmul(tokens, leaves.at(p + "former.w_proj")),
                    leaves.at(p + "former.p_pos"));
  for (std::size_t l = 0; l < cfg.num_encoders; ++l)
    z = encoder_block(tape, z, leaves, p + "former.enc" + std::to_string(l) + ".", cfg);
  Var out = diff::add_rowvec(diff::matmul(z, leaves.at(p + "former.out.w")),
                             leaves.at(p + "former.out.b"));  // K x 2M
  CVar res;
  res.re = diff::transpose(diff::slice(out, 0, 0, k, m));
  res.im = diff::transpose(diff::slice(out, 0, m, k, m));
  return res;
}

struct MeasConsts {
  CVar st;      // S^T, K x P
  CVar b;       // M x P
  Var z;        // M x P
  CVar st_pinv; // P x K
  double sigma2 = 0.0;
};

MeasConsts meas_constants(Tape& tape, const channel::MeasurementSet& meas,
                          const ComplexMatrix& st_pinv) {
  MeasConsts c;
  c.st = diff::constant_cmatrix(tape, linops::transpose(meas.S));
  c.b = diff::constant_cmatrix(tape, meas.B);
  c.z = tape.constant_matrix(meas.Z);
  c.st_pinv = diff::constant_cmatrix(tape, st_pinv);
  c.sigma2 = meas.sigma2;
  return c;
}

// One unrolled layer on the graph.
CVar layer_graph(Tape& tape, const CVar& h_prev, const MeasConsts& mc,
                 const ParamLeaves& leaves, const URformerParams& params,
                 std::size_t t, const ForwardOptions& opts) {
  const std::string p = params.layer_prefix(t);
  if (opts.gated_filter_evals) ++*opts.gated_filter_evals;

  CVar y = diff::cadd(diff::cmatmul(h_prev, mc.st), mc.b);
  CVar y_direct = diff::complex_phase_apply(mc.z, y);
  if (!(mc.sigma2 > 0.0))
    throw DomainError("urformer: sigma2 must be > 0 (kappa divides by sigma2)");
  Var kappa = diff::scale_const(diff::hadamard(mc.z, diff::cmagnitude(y)),
                                2.0 / mc.sigma2);
  Var r_learned = opts.use_exact_bessel
                      ? diff::bessel_ratio(kappa)
                      : filternet_forward(tape, filternet_vars(leaves, p), kappa);
  CVar y_filtered = diff::chadamard_real(y_direct, r_learned);

  Var gate_logit = opts.force_gate_logit
                       ? tape.constant_scalar(*opts.force_gate_logit)
                       : leaves.at(p + "gate_logit");
  Var alpha = diff::sigmoid(gate_logit);
  Var one_minus = diff::sub(tape.constant_scalar(1.0), alpha);
  CVar y_rec = diff::cadd(diff::cscalar_mul(y_filtered, alpha),
                          diff::cscalar_mul(y_direct, one_minus));

  CVar h_linear = diff::cmatmul(diff::csub(y_rec, mc.b), mc.st_pinv);
  if (opts.zero_former) return h_linear;
  return diff::cadd(h_linear, former_graph(tape, h_linear, leaves, p, params.config()));
}

ComplexMatrix checked_st_pinv(const ComplexMatrix& S) {
  const ComplexMatrix st = linops::transpose(S);
  if (linops::numerical_rank(st) < st.rows())
    throw ConfigError("urformer: pilot matrix S^T is rank-deficient");
  return linops::pseudo_inverse(st);
}

}  // namespace

CVar build_urformer(Tape& tape, const channel::MeasurementSet& meas,
                    const ParamLeaves& leaves, const URformerParams& params,
                    const ComplexMatrix& st_pinv, const ForwardOptions& opts) {
  if (meas.num_antennas() != params.num_antennas() ||
      meas.num_users() != params.num_users())
    throw ConfigError("urformer: measurement is " +
                      shape_str(meas.num_antennas(), meas.num_users()) +
                      " (M x K) but params were built for " +
                      shape_str(params.num_antennas(), params.num_users()));
  const std::size_t m = meas.num_antennas(), k = meas.num_users();
  MeasConsts mc = meas_constants(tape, meas, st_pinv);
  CVar h{tape.leaf({m, k}, std::vector<double>(m * k, 0.0), false),
         tape.leaf({m, k}, std::vector<double>(m * k, 0.0), false)};
  for (std::size_t t = 0; t < params.config().num_layers; ++t)
    h = layer_graph(tape, h, mc, leaves, params, t, opts);
  return h;
}

RealMatrix filternet_eval(const RealMatrix& kappa, const URformerParams& params,
                          std::size_t layer) {
  if (!linops::all_finite(kappa))
    throw DomainError("filternet_eval: kappa contains non-finite entries");
  for (double v : kappa.data())
    if (v < 0.0) throw DomainError("filternet_eval: kappa must be >= 0");
  Tape tape;
  ParamLeaves leaves(tape, params, false);
  Var k = tape.constant_matrix(kappa);
  Var r = filternet_forward(tape, filternet_vars(leaves, params.layer_prefix(layer)), k);
  return diff::to_real_matrix(r);
}

ComplexMatrix gated_filter_step(const ComplexMatrix& h_prev,
                                const channel::MeasurementSet& meas,
                                const URformerParams& params, std::size_t layer,
                                const ForwardOptions& opts) {
  Tape tape;
  ParamLeaves leaves(tape, params, false);
  MeasConsts mc = meas_constants(tape, meas, ComplexMatrix(meas.num_pilots(),
                                                           meas.num_users()));
  const std::string p = params.layer_prefix(layer);
  if (opts.gated_filter_evals) ++*opts.gated_filter_evals;

  CVar h = diff::constant_cmatrix(tape, h_prev);
  CVar y = diff::cadd(diff::cmatmul(h, mc.st), mc.b);
  CVar y_direct = diff::complex_phase_apply(mc.z, y);
  if (!(mc.sigma2 > 0.0))
    throw DomainError("gated_filter_step: sigma2 must be > 0");
  Var kappa = diff::scale_const(diff::hadamard(mc.z, diff::cmagnitude(y)),
                                2.0 / mc.sigma2);
  Var r_learned = opts.use_exact_bessel
                      ? diff::bessel_ratio(kappa)
                      : filternet_forward(tape, filternet_vars(leaves, p), kappa);
  CVar y_filtered = diff::chadamard_real(y_direct, r_learned);
  Var gate_logit = opts.force_gate_logit ? tape.constant_scalar(*opts.force_gate_logit)
                                         : leaves.at(p + "gate_logit");
  Var alpha = diff::sigmoid(gate_logit);
  Var one_minus = diff::sub(tape.constant_scalar(1.0), alpha);
  CVar y_rec = diff::cadd(diff::cscalar_mul(y_filtered, alpha),
                          diff::cscalar_mul(y_direct, one_minus));
  return diff::to_complex_matrix(y_rec);
}

ComplexMatrix linear_estimate(const ComplexMatrix& y_rec, const ComplexMatrix& B,
                              const ComplexMatrix& S) {
  if (S.rows() < S.cols())
    throw ConfigError("linear_estimate: P=" + std::to_string(S.rows()) +
                      " < K=" + std::to_string(S.cols()));
  return linops::matmul(linops::subtract(y_rec, B), checked_st_pinv(S));
}

ComplexMatrix former_forward(const ComplexMatrix& h_linear,
                             const URformerParams& params, std::size_t layer) {
  Tape tape;
  ParamLeaves leaves(tape, params, false);
  CVar h = diff::constant_cmatrix(tape, h_linear);
  CVar res = former_graph(tape, h, leaves, params.layer_prefix(layer), params.config());
  return diff::to_complex_matrix(res);
}

ComplexMatrix urformer_forward(const channel::MeasurementSet& meas,
                               const URformerParams& params,
                               const ForwardOptions& opts) {
  Tape tape;
  ParamLeaves leaves(tape, params, false);
  CVar h = build_urformer(tape, meas, leaves, params, checked_st_pinv(meas.S), opts);
  return diff::to_complex_matrix(h);
}

double fit_filternet_to_bessel(URformerParams& params, std::size_t layer,
                               std::uint64_t seed, std::size_t iters,
                               double grid_max) {
  // Training grid: dense at small kappa (where R bends), log-spaced tail.
  std::vector<double> grid;
  for (double k = 0.0; k <= 10.0; k += 0.0625) grid.push_back(k);
  for (double k = 10.0; k <= grid_max; k *= 1.04)
    grid.push_back(std::min(k, grid_max));
  grid.push_back(grid_max);
  const std::size_t n = grid.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = linops::bessel_ratio(grid[i]);

  const std::string p = params.layer_prefix(layer);
  const char* names[6] = {"filternet.w1", "filternet.b1", "filternet.w2",
                          "filternet.b2", "filternet.w3", "filternet.b3"};

  // Re-initialize this layer's FilterNet from the fit seed so the result does
  // not depend on whatever the tensors held before.
  Rng rng = substream(seed, StreamId::filternet_fit);
  for (const char* name : names) {
    auto& v = params.values(p + name);
    const auto& shape = params.spec()[params.index_of(p + name)].shape;
    const bool is_bias = shape.rows == 1 && std::string(name).find(".b") != std::string::npos;
    if (is_bias) {
      std::fill(v.begin(), v.end(), 0.0);
    } else {
      const double std_dev = std::sqrt(2.0 / static_cast<double>(shape.rows + shape.cols));
      for (auto& x : v) x = std_dev * rng.normal();
    }
  }

  diff::AdamConfig adam{.lr = 5e-3};
  std::vector<diff::AdamState> states(6);

  for (std::size_t it = 0; it < iters; ++it) {
    Tape tape;
    ParamLeaves leaves(tape, params, true);
    FilterNetVars psi = filternet_vars(leaves, p);
    Var kap = tape.leaf({n, 1}, grid, false);
    Var out = filternet_forward(tape, psi, kap);
    Var tgt = tape.leaf({n, 1}, target, false);
    Var loss = diff::mean(diff::square(diff::sub(out, tgt)));
    tape.backward(loss);
    for (int j = 0; j < 6; ++j) {
      auto& vals = params.values(p + names[j]);
      adam_step(vals, leaves.at(p + names[j]).grad(), states[j], adam);
    }
  }

  // Max deviation on the grid after fitting.
  RealMatrix kap(n, 1, grid);
  const RealMatrix fitted = filternet_eval(kap, params, layer);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(fitted.data()[i] - target[i]));
  return worst;
}

}  // namespace raqr::urformer
