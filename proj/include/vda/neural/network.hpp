#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/mechanism.hpp"
#include "vda/core/rng.hpp"
#include "vda/core/types.hpp"
#include "vda/neural/tape.hpp"

namespace vda::neural {

enum class Activation { Tanh, Identity };
enum class HeadKind { SoftmaxScaled, SigmoidPlusOne };

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  Activation activation = Activation::Tanh;
  HeadKind head = HeadKind::SoftmaxScaled;

  void validate() const {
    if (input_dim < 1 || output_dim < 1)
      throw std::invalid_argument("MlpSpec: dimensions must be positive");
    for (const int h : hidden)
      if (h < 1) throw std::invalid_argument("MlpSpec: hidden widths must be positive");
  }

  int layers() const { return static_cast<int>(hidden.size()) + 1; }

  int layer_in(int l) const { return l == 0 ? input_dim : hidden[static_cast<std::size_t>(l - 1)]; }
  int layer_out(int l) const {
    return l == layers() - 1 ? output_dim : hidden[static_cast<std::size_t>(l)];
  }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (int l = 0; l < layers(); ++l)
      total += static_cast<std::size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
    return total;
  }
};

// Dense parameters stored flat, one [W | b] block per layer.
struct Mlp {
  MlpSpec spec;
  std::vector<double> params;

  explicit Mlp(MlpSpec s = {}) : spec(std::move(s)) {
    if (spec.input_dim > 0) params.assign(spec.param_count(), 0.0);
  }

  std::size_t weight_offset(int l) const {
    std::size_t off = 0;
    for (int i = 0; i < l; ++i)
      off += static_cast<std::size_t>(spec.layer_out(i)) * spec.layer_in(i) + spec.layer_out(i);
    return off;
  }
  std::size_t bias_offset(int l) const {
    return weight_offset(l) + static_cast<std::size_t>(spec.layer_out(l)) * spec.layer_in(l);
  }

  double* W(int l) { return params.data() + weight_offset(l); }
  const double* W(int l) const { return params.data() + weight_offset(l); }
  double* b(int l) { return params.data() + bias_offset(l); }
  const double* b(int l) const { return params.data() + bias_offset(l); }
};

inline void init_xavier_uniform(Mlp& net, Rng& rng) {
  for (int l = 0; l < net.spec.layers(); ++l) {
    const int in = net.spec.layer_in(l);
    const int out = net.spec.layer_out(l);
    const double limit = std::sqrt(6.0 / (in + out));
    double* w = net.W(l);
    for (int i = 0; i < out * in; ++i) w[i] = rng.uniform(-limit, limit);
    double* bias = net.b(l);
    for (int i = 0; i < out; ++i) bias[i] = 0.0;
  }
}

// Raw network output (logits); heads are applied by the mechanism.
inline std::vector<double> mlp_logits(const Mlp& net, std::span<const double> input) {
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (int l = 0; l < net.spec.layers(); ++l) {
    const int in = net.spec.layer_in(l);
    const int out = net.spec.layer_out(l);
    next.assign(static_cast<std::size_t>(out), 0.0);
    const double* W = net.W(l);
    const double* b = net.b(l);
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = W + static_cast<std::size_t>(o) * in;
      for (int j = 0; j < in; ++j) s += row[j] * cur[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(o)] = s;
    }
    if (l + 1 < net.spec.layers() && net.spec.activation == Activation::Tanh)
      for (double& v : next) v = std::tanh(v);
    cur.swap(next);
  }
  return cur;
}

// Tape-recorded forward through an MLP. `gparams` (same layout as
// Mlp::params) receives weight gradients during backward; pass null to track
// only input gradients.
inline Tape::NodeId mlp_forward(Tape& tape, const Mlp& net, Tape::NodeId input, double* gparams) {
  Tape::NodeId cur = input;
  for (int l = 0; l < net.spec.layers(); ++l) {
    double* gW = gparams == nullptr ? nullptr : gparams + net.weight_offset(l);
    double* gb = gparams == nullptr ? nullptr : gparams + net.bias_offset(l);
    cur = tape.affine(net.spec.layer_out(l), net.spec.layer_in(l), net.W(l), net.b(l), gW, gb, cur);
    if (l + 1 < net.spec.layers() && net.spec.activation == Activation::Tanh)
      cur = tape.tanh_act(cur);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// The two-network mechanism: an allocation net whose soft-max output is
// scaled to m units, and a payment net whose sigmoid-plus-one multipliers
// mark payments up from the reported WTS of the award, which yields ex-post
// IR by construction.
// ---------------------------------------------------------------------------

struct MechanismSpec {
  MlpSpec alloc;
  MlpSpec pay;
  double input_scale = 1.0;

  static MechanismSpec standard(const AuctionConfig& cfg, const std::vector<int>& hidden,
                                double input_scale) {
    MechanismSpec spec;
    spec.alloc.input_dim = cfg.n * cfg.k;
    spec.alloc.hidden = hidden;
    spec.alloc.output_dim = cfg.n;
    spec.alloc.head = HeadKind::SoftmaxScaled;
    spec.pay = spec.alloc;
    spec.pay.head = HeadKind::SigmoidPlusOne;
    spec.input_scale = input_scale;
    spec.alloc.validate();
    spec.pay.validate();
    if (!(input_scale > 0)) throw std::invalid_argument("MechanismSpec: input_scale must be > 0");
    return spec;
  }
};

// Everything the trainer updates: both networks plus the Lagrange
// multipliers for the regret and envy constraints.
struct MechanismParams {
  MechanismSpec spec;
  Mlp alloc;
  Mlp pay;
  std::vector<double> lambda_regret;
  std::vector<double> lambda_envy;

  static MechanismParams init(const MechanismSpec& spec, const AuctionConfig& cfg,
                              std::uint64_t seed) {
    MechanismParams p;
    p.spec = spec;
    p.alloc = Mlp(spec.alloc);
    p.pay = Mlp(spec.pay);
    Rng rng(derive_seed(seed, "mechanism-init"));
    init_xavier_uniform(p.alloc, rng);
    init_xavier_uniform(p.pay, rng);
    p.lambda_regret.assign(static_cast<std::size_t>(cfg.n), 0.0);
    p.lambda_envy.assign(static_cast<std::size_t>(cfg.n), 0.0);
    return p;
  }
};

inline std::vector<double> flatten_profile(const BidProfile& profile) {
  std::vector<double> raw;
  for (const auto& c : profile.curves) raw.insert(raw.end(), c.prices.begin(), c.prices.end());
  return raw;
}

inline void check_finite_input(std::span<const double> raw) {
  for (const double v : raw)
    if (!std::isfinite(v)) throw std::invalid_argument("mechanism input is not finite");
}

// Allocation head: m * softmax(logits); sums to m up to rounding.
inline Allocation alloc_forward(const MechanismParams& params, const BidProfile& profile,
                                const AuctionConfig& cfg) {
  const std::vector<double> raw = flatten_profile(profile);
  check_finite_input(raw);
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = raw[i] / params.spec.input_scale;
  std::vector<double> logits = mlp_logits(params.alloc, scaled);
  double mx = logits[0];
  for (const double v : logits) mx = std::max(mx, v);
  double denom = 0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    denom += v;
  }
  Allocation a;
  a.units.resize(logits.size());
  const double f = static_cast<double>(cfg.m) / denom;
  for (std::size_t i = 0; i < logits.size(); ++i) a.units[i] = logits[i] * f;
  return a;
}

inline std::vector<double> payment_multipliers(const MechanismParams& params,
                                               const BidProfile& profile) {
  const std::vector<double> raw = flatten_profile(profile);
  check_finite_input(raw);
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = raw[i] / params.spec.input_scale;
  std::vector<double> z = mlp_logits(params.pay, scaled);
  for (double& v : z) v = 1.0 + 1.0 / (1.0 + std::exp(-v));
  return z;
}

// p_i = phat_i * wts(reported curve i, a_i); zero award pays zero.
inline PaymentVector pay_forward(const MechanismParams& params, const BidProfile& profile,
                                 const Allocation& allocation, const AuctionConfig& cfg) {
  const std::vector<double> phat = payment_multipliers(params, profile);
  PaymentVector p;
  p.amounts.resize(phat.size());
  for (std::size_t i = 0; i < phat.size(); ++i)
    p.amounts[i] = phat[i] * wts_eval(profile.curves[i], allocation.units[i], cfg);
  return p;
}

inline Outcome mechanism_outcome(const MechanismParams& params, const BidProfile& profile,
                                 const AuctionConfig& cfg) {
  Outcome o;
  o.allocation = alloc_forward(params, profile, cfg);
  o.payments = pay_forward(params, profile, o.allocation, cfg);
  return o;
}

// Handles into one tape-recorded mechanism evaluation.
struct MechanismNodes {
  Tape::NodeId raw = -1;    // the flattened bid matrix (gradient target for misreports)
  Tape::NodeId alloc = -1;  // allocation vector
  Tape::NodeId phat = -1;   // payment multipliers
  std::vector<Tape::ScalarRef> wts;       // reported WTS of each award
  std::vector<Tape::ScalarRef> payments;  // phat_i * wts_i
};

struct MechanismGrads {
  std::vector<double> alloc;
  std::vector<double> pay;

  explicit MechanismGrads(const MechanismSpec& spec)
      : alloc(spec.alloc.param_count(), 0.0), pay(spec.pay.param_count(), 0.0) {}

  void clear() {
    std::fill(alloc.begin(), alloc.end(), 0.0);
    std::fill(pay.begin(), pay.end(), 0.0);
  }
};

inline MechanismNodes mechanism_graph(Tape& tape, const MechanismParams& params,
                                      std::span<const double> raw, const AuctionConfig& cfg,
                                      MechanismGrads* grads) {
  check_finite_input(raw);
  MechanismNodes nodes;
  nodes.raw = tape.input(raw);
  const Tape::NodeId scaled = tape.scale(nodes.raw, 1.0 / params.spec.input_scale);
  const Tape::NodeId alloc_logits =
      mlp_forward(tape, params.alloc, scaled, grads ? grads->alloc.data() : nullptr);
  nodes.alloc = tape.softmax_scale(alloc_logits, static_cast<double>(cfg.m));
  const Tape::NodeId pay_logits =
      mlp_forward(tape, params.pay, scaled, grads ? grads->pay.data() : nullptr);
  nodes.phat = tape.sigmoid_plus_one(pay_logits);
  nodes.wts.reserve(static_cast<std::size_t>(cfg.n));
  nodes.payments.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    const Tape::ScalarRef award{nodes.alloc, i};
    const Tape::ScalarRef w = tape.wts_reported(nodes.raw, i * cfg.k, award);
    nodes.wts.push_back(w);
    nodes.payments.push_back(tape.mul(Tape::ScalarRef{nodes.phat, i}, w));
  }
  return nodes;
}

// Mechanism-interface wrapper so the harness can evaluate trained models
// alongside the exact VCG solvers.
class NeuralMechanism final : public Mechanism {
 public:
  NeuralMechanism(MechanismParams params, AuctionConfig cfg)
      : params_(std::move(params)), cfg_(std::move(cfg)) {}

  Outcome run(const BidProfile& bids) const override {
    return mechanism_outcome(params_, bids, cfg_);
  }

  const MechanismParams& params() const { return params_; }
  const AuctionConfig& config() const { return cfg_; }

 private:
  MechanismParams params_;
  AuctionConfig cfg_;
};

}  // namespace vda::neural
