#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/mechanism.hpp"
#include "vda/core/types.hpp"
#include "vda/neural/network.hpp"
#include "vda/neural/tape.hpp"

namespace vda::trainer {

// Misreport search settings: R ascent steps with a fixed learning rate,
// projecting each step into the box spanned by the valuation distribution's
// per-lot support.
struct InnerOptConfig {
  int steps = 25;
  double lr = 2e-4;
  Money box_lo = 0;
  Money box_hi = 0;
};

// Empirical regret for one supplier over a batch: the mean best utility gain
// from unilateral misreporting, never negative because the truthful report is
// the search's starting candidate.
struct RegretEstimate {
  double mean_gain = 0;
  std::vector<double> gains;
  std::vector<SupplyCurve> misreports;
  std::vector<Money> truthful_utility;
};

// Gradient-ascent misreport search against the neural mechanism. Gradients
// flow to supplier i's bid entries both through the networks' inputs and
// through the reported-WTS factor of the payment.
inline RegretEstimate empirical_regret(const neural::MechanismParams& params,
                                       const std::vector<BidProfile>& batch, int i,
                                       const AuctionConfig& cfg, const InnerOptConfig& opt,
                                       neural::Tape& tape) {
  if (opt.steps > 0 && !(opt.box_hi > opt.box_lo))
    throw std::invalid_argument("empirical_regret: misreport box is empty");
  RegretEstimate est;
  est.gains.reserve(batch.size());
  est.misreports.reserve(batch.size());
  const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg.k);

  for (const BidProfile& profile : batch) {
    std::vector<double> raw = neural::flatten_profile(profile);
    const SupplyCurve& valuation = profile.curves[static_cast<std::size_t>(i)];
    std::vector<double> current(raw.begin() + static_cast<std::ptrdiff_t>(row),
                                raw.begin() + static_cast<std::ptrdiff_t>(row + cfg.k));
    std::vector<double> best = current;
    double truthful = 0;
    double best_gain = 0;

    for (int step = 0; step <= opt.steps; ++step) {
      std::copy(current.begin(), current.end(), raw.begin() + static_cast<std::ptrdiff_t>(row));
      tape.begin(cfg);
      const neural::MechanismNodes nodes = neural::mechanism_graph(tape, params, raw, cfg, nullptr);
      const neural::Tape::ScalarRef wts_true =
          tape.wts_fixed(valuation.prices.data(), {nodes.alloc, i});
      const neural::Tape::ScalarRef u =
          tape.sub(nodes.payments[static_cast<std::size_t>(i)], wts_true);
      const double u_val = tape.value(u);
      if (!std::isfinite(u_val)) break;  // leave divergence to the loss guard
      if (step == 0) truthful = u_val;
      const double gain = u_val - truthful;
      if (gain > best_gain) {
        best_gain = gain;
        best = current;
      }
      if (step == opt.steps) break;
      tape.seed(u, 1.0);
      tape.backward();
      const std::span<const double> g = tape.grad(nodes.raw);
      for (int t = 0; t < cfg.k; ++t) {
        const std::size_t idx = static_cast<std::size_t>(t);
        current[idx] = std::clamp(current[idx] + opt.lr * g[row + idx],
                                  static_cast<double>(opt.box_lo),
                                  static_cast<double>(opt.box_hi));
      }
    }
    est.gains.push_back(best_gain);
    est.truthful_utility.push_back(truthful);
    SupplyCurve mis;
    mis.prices = best;
    est.misreports.push_back(std::move(mis));
  }

  double sum = 0;
  for (const double g : est.gains) sum += g;
  est.mean_gain = est.gains.empty() ? 0.0 : sum / static_cast<double>(est.gains.size());
  return est;
}

// Candidate-grid regret estimate. Works for any mechanism, differentiable or
// not; candidates are whole-curve scalings plus optional single-lot bumps,
// clamped into (0, price_cap].
struct MisreportGrid {
  std::vector<double> scales = {0.5, 0.75, 0.9, 0.95, 1.05, 1.1, 1.25, 1.5};
  std::vector<double> per_lot_scales = {0.7, 1.3};
  bool per_lot = true;
};

inline RegretEstimate grid_regret(const Mechanism& mech, const std::vector<BidProfile>& batch,
                                  int i, const AuctionConfig& cfg, const MisreportGrid& grid) {
  RegretEstimate est;
  const std::size_t si = static_cast<std::size_t>(i);

  auto utility_of = [&](const BidProfile& reported, const SupplyCurve& valuation) -> Money {
    const Outcome o = mech.run(reported);
    return utility(valuation, o.allocation.units[si], o.payments.amounts[si], cfg);
  };

  for (const BidProfile& profile : batch) {
    const SupplyCurve& valuation = profile.curves[si];
    const Money truthful = utility_of(profile, valuation);
    double best_gain = 0;

    auto try_candidate = [&](const SupplyCurve& candidate) {
      BidProfile reported = profile;
      reported.curves[si] = candidate;
      try {
        best_gain = std::max(best_gain, utility_of(reported, valuation) - truthful);
      } catch (const std::runtime_error&) {
        // a misreport that breaks solver feasibility is simply not a
        // profitable deviation
      }
    };

    for (const double scale : grid.scales) {
      SupplyCurve c = valuation;
      for (Money& p : c.prices) p = std::clamp(p * scale, 1e-9, cfg.price_cap);
      try_candidate(c);
    }
    if (grid.per_lot) {
      for (const double scale : grid.per_lot_scales) {
        for (int t = 0; t < cfg.k; ++t) {
          SupplyCurve c = valuation;
          c.prices[static_cast<std::size_t>(t)] =
              std::clamp(c.prices[static_cast<std::size_t>(t)] * scale, 1e-9, cfg.price_cap);
          try_candidate(c);
        }
      }
    }
    est.gains.push_back(best_gain);
    est.truthful_utility.push_back(truthful);
  }

  double sum = 0;
  for (const double g : est.gains) sum += g;
  est.mean_gain = est.gains.empty() ? 0.0 : sum / static_cast<double>(est.gains.size());
  return est;
}

}  // namespace vda::trainer
