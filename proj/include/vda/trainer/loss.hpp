#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/types.hpp"
#include "vda/neural/network.hpp"
#include "vda/neural/tape.hpp"
#include "vda/trainer/regret.hpp"

namespace vda::trainer {

// Which constraint terms are active, mirroring auction variants 3-6.
enum class ConstraintSet { None, Envy, Business, EnvyBusiness };

inline bool envy_active(ConstraintSet s) {
  return s == ConstraintSet::Envy || s == ConstraintSet::EnvyBusiness;
}
inline bool business_active(ConstraintSet s) {
  return s == ConstraintSet::Business || s == ConstraintSet::EnvyBusiness;
}

struct LossConfig {
  double rho_regret = 5.0;
  double rho_envy = 5.0;
  InnerOptConfig inner;
};

struct LossBreakdown {
  double total = 0;
  double mean_cost = 0;
  double penalty_regret = 0;
  double lagr_regret = 0;
  double penalty_envy = 0;
  double lagr_envy = 0;
  double penalty_business = 0;
  std::vector<double> regret;     // r~_i, batch mean per supplier
  std::vector<double> mean_envy;  // e-bar_i, batch mean per supplier
  double business_violation_rate = 0;
};

struct LossResult {
  LossBreakdown terms;
  neural::MechanismGrads grads;
};

// Utility of supplier i on the taped outcome, against a fixed valuation.
inline neural::Tape::ScalarRef utility_node(neural::Tape& tape,
                                            const neural::MechanismNodes& nodes,
                                            const SupplyCurve& valuation, int i) {
  const neural::Tape::ScalarRef w = tape.wts_fixed(valuation.prices.data(), {nodes.alloc, i});
  return tape.sub(nodes.payments[static_cast<std::size_t>(i)], w);
}

// Envy of supplier i: max over h of (p_h - wts_i(a_h)) minus own utility.
inline neural::Tape::ScalarRef envy_node(neural::Tape& tape, const neural::MechanismNodes& nodes,
                                         const SupplyCurve& valuation, int i,
                                         neural::Tape::ScalarRef own_utility, int n) {
  std::vector<neural::Tape::ScalarRef> swapped;
  swapped.reserve(static_cast<std::size_t>(n));
  for (int h = 0; h < n; ++h) {
    const neural::Tape::ScalarRef w = tape.wts_fixed(valuation.prices.data(), {nodes.alloc, h});
    swapped.push_back(tape.sub(nodes.payments[static_cast<std::size_t>(h)], w));
  }
  return tape.sub(tape.max_n(swapped), own_utility);
}

// Composite training loss over one batch, with gradients for both networks.
//
// Regret enters through the empirical estimate r~_i (batch mean of the best
// misreport gains); the outer gradient treats the maximizing misreports as
// constants and differentiates both the misreported and truthful passes.
// Envy and the business penalty are per-sample terms averaged over the batch.
inline LossResult compute_loss(const neural::MechanismParams& params,
                               const std::vector<BidProfile>& batch, ConstraintSet constraints,
                               const LossConfig& lcfg, const AuctionConfig& cfg,
                               neural::Tape& tape) {
  if (batch.empty()) throw std::invalid_argument("compute_loss: empty batch");
  if (business_active(constraints) && !cfg.business)
    throw std::invalid_argument("compute_loss: business constraints active but none configured");

  const int n = cfg.n;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  LossResult result{LossBreakdown{}, neural::MechanismGrads(params.spec)};
  LossBreakdown& terms = result.terms;
  terms.regret.assign(static_cast<std::size_t>(n), 0.0);
  terms.mean_envy.assign(static_cast<std::size_t>(n), 0.0);

  // Phase A: per-supplier misreport search (parameters frozen).
  std::vector<RegretEstimate> estimates;
  estimates.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    estimates.push_back(empirical_regret(params, batch, i, cfg, lcfg.inner, tape));
    terms.regret[static_cast<std::size_t>(i)] = estimates.back().mean_gain;
  }

  // Outer-gradient weight on (u_i^mis - u_i^tru) for each supplier.
  std::vector<double> regret_weight(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    regret_weight[si] =
        (params.lambda_regret[si] + 2.0 * lcfg.rho_regret * terms.regret[si]) * inv_b;
  }

  // Phase B: one truthful pass per sample (cost, envy, business and the
  // truthful side of regret), plus one pass per profitable misreport.
  int violations = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const BidProfile& profile = batch[s];
    const std::vector<double> raw = neural::flatten_profile(profile);

    tape.begin(cfg);
    const neural::MechanismNodes nodes =
        neural::mechanism_graph(tape, params, raw, cfg, &result.grads);
    const neural::Tape::ScalarRef cost = tape.add_n(nodes.payments);
    terms.mean_cost += inv_b * tape.value(cost);
    tape.seed(cost, inv_b);

    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      if (estimates[si].gains[s] > 0 && regret_weight[si] != 0.0) {
        const neural::Tape::ScalarRef u_tru =
            utility_node(tape, nodes, profile.curves[si], i);
        tape.seed(u_tru, -regret_weight[si]);
      }
    }

    if (envy_active(constraints)) {
      for (int i = 0; i < n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const neural::Tape::ScalarRef u = utility_node(tape, nodes, profile.curves[si], i);
        const neural::Tape::ScalarRef e = envy_node(tape, nodes, profile.curves[si], i, u, n);
        const double ev = tape.value(e);
        terms.mean_envy[si] += inv_b * ev;
        terms.penalty_envy += lcfg.rho_envy * inv_b * ev * ev;
        tape.seed(e, (params.lambda_envy[si] + 2.0 * lcfg.rho_envy * ev) * inv_b);
      }
    }

    if (business_active(constraints)) {
      const auto& bc = *cfg.business;
      const neural::Tape::ScalarRef a_s = tape.kth_largest(nodes.alloc, bc.min_winners);
      const double as_val = tape.value(a_s);
      if (as_val < bc.min_units) {
        ++violations;
        const double denom = std::max(as_val, cfg.eps_div);
        terms.penalty_business += inv_b * cfg.rho_business / denom;
        if (as_val > cfg.eps_div)
          tape.seed(a_s, -inv_b * cfg.rho_business / (as_val * as_val));
      }
    }

    tape.backward();

    // Misreported passes: gradient +w_i on u_i(v_i; (b'_i, b_-i)).
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      if (estimates[si].gains[s] <= 0 || regret_weight[si] == 0.0) continue;
      std::vector<double> misraw = raw;
      const SupplyCurve& mis = estimates[si].misreports[s];
      std::copy(mis.prices.begin(), mis.prices.end(),
                misraw.begin() + static_cast<std::ptrdiff_t>(si * static_cast<std::size_t>(cfg.k)));
      tape.begin(cfg);
      const neural::MechanismNodes mnodes =
          neural::mechanism_graph(tape, params, misraw, cfg, &result.grads);
      const neural::Tape::ScalarRef u_mis = utility_node(tape, mnodes, profile.curves[si], i);
      tape.seed(u_mis, regret_weight[si]);
      tape.backward();
    }
  }

  for (int i = 0; i < n; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    terms.penalty_regret += lcfg.rho_regret * terms.regret[si] * terms.regret[si];
    terms.lagr_regret += params.lambda_regret[si] * terms.regret[si];
    if (envy_active(constraints)) terms.lagr_envy += params.lambda_envy[si] * terms.mean_envy[si];
  }
  terms.business_violation_rate =
      business_active(constraints) ? violations * inv_b : 0.0;
  terms.total = terms.mean_cost + terms.penalty_regret + terms.lagr_regret + terms.penalty_envy +
                terms.lagr_envy + terms.penalty_business;
  return result;
}

inline LossResult loss_cost_min(const neural::MechanismParams& params,
                                const std::vector<BidProfile>& batch, const LossConfig& lcfg,
                                const AuctionConfig& cfg, neural::Tape& tape) {
  return compute_loss(params, batch, ConstraintSet::None, lcfg, cfg, tape);
}

inline LossResult loss_with_envy(const neural::MechanismParams& params,
                                 const std::vector<BidProfile>& batch, const LossConfig& lcfg,
                                 const AuctionConfig& cfg, neural::Tape& tape) {
  return compute_loss(params, batch, ConstraintSet::Envy, lcfg, cfg, tape);
}

inline LossResult loss_with_business(const neural::MechanismParams& params,
                                     const std::vector<BidProfile>& batch, const LossConfig& lcfg,
                                     const AuctionConfig& cfg, neural::Tape& tape) {
  return compute_loss(params, batch, ConstraintSet::Business, lcfg, cfg, tape);
}

inline LossResult loss_full(const neural::MechanismParams& params,
                            const std::vector<BidProfile>& batch, const LossConfig& lcfg,
                            const AuctionConfig& cfg, neural::Tape& tape) {
  return compute_loss(params, batch, ConstraintSet::EnvyBusiness, lcfg, cfg, tape);
}

}  // namespace vda::trainer
