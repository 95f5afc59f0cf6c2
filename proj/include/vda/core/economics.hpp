#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vda/core/types.hpp"

namespace vda {

// Willingness-to-sell of `x` units under a per-lot step curve, extended to
// continuous x: full lots are charged at their lot price, a fractional final
// lot pro-rata at its lot price. Piecewise linear and non-decreasing in x,
// with breakpoints only at lot boundaries.
inline Money wts_eval(const SupplyCurve& curve, Units x, const AuctionConfig& cfg) {
  if (!(x >= 0) || x > static_cast<double>(cfg.m))
    throw std::domain_error("wts_eval: units outside [0, m]");
  Money total = 0;
  double covered = 0;
  for (int t = 0; t < cfg.k; ++t) {
    const double size = static_cast<double>(cfg.lot_units(t));
    const double take = std::min(x - covered, size);
    if (take <= 0) break;
    total += curve.prices[static_cast<std::size_t>(t)] * take;
    covered += size;
  }
  return total;
}

// Lot containing x, with the completed lot kept at exact boundaries
// (left-derivative convention for the piecewise-linear kink).
inline int lot_of(Units x, const AuctionConfig& cfg) {
  if (x <= 0) return 0;
  const double ell = static_cast<double>(cfg.lot_size());
  const int t = static_cast<int>(std::ceil(x / ell)) - 1;
  return std::clamp(t, 0, cfg.k - 1);
}

// d wts_eval / d x  (subgradient at lot boundaries: the completed lot's price).
inline double wts_deriv_units(const SupplyCurve& curve, Units x, const AuctionConfig& cfg) {
  return curve.prices[static_cast<std::size_t>(lot_of(x, cfg))];
}

// d wts_eval / d prices[t]: units of lot t covered by an allocation of x.
inline Units lot_overlap(Units x, int t, const AuctionConfig& cfg) {
  const double start = static_cast<double>(cfg.lot_start(t));
  const double size = static_cast<double>(cfg.lot_units(t));
  return std::clamp(x - start, 0.0, size);
}

// Supplier utility: payment received minus the true willingness-to-sell of
// the units handed over.
inline Money utility(const SupplyCurve& true_curve, Units units, Money payment,
                     const AuctionConfig& cfg) {
  return payment - wts_eval(true_curve, units, cfg);
}

// Total cost incurred by the buyer.
inline Money total_cost(const PaymentVector& payments) {
  return std::accumulate(payments.amounts.begin(), payments.amounts.end(), Money{0});
}

// Envy of supplier i: the most it could gain by swapping outcome with any
// supplier (including itself, so the result is never negative). Valuations
// are taken from `true_curves`; the outcome comes from the reported bids.
inline Money envy(const BidProfile& true_curves, const Outcome& outcome, int i,
                  const AuctionConfig& cfg) {
  const SupplyCurve& v = true_curves.curves[static_cast<std::size_t>(i)];
  Money best = -std::numeric_limits<Money>::infinity();
  for (int h = 0; h < cfg.n; ++h) {
    const Money swapped = outcome.payments.amounts[static_cast<std::size_t>(h)] -
                          wts_eval(v, outcome.allocation.units[static_cast<std::size_t>(h)], cfg);
    best = std::max(best, swapped);
  }
  const Money own = outcome.payments.amounts[static_cast<std::size_t>(i)] -
                    wts_eval(v, outcome.allocation.units[static_cast<std::size_t>(i)], cfg);
  return best - own;
}

inline std::vector<Money> envy_all(const BidProfile& true_curves, const Outcome& outcome,
                                   const AuctionConfig& cfg) {
  std::vector<Money> e(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) e[static_cast<std::size_t>(i)] = envy(true_curves, outcome, i, cfg);
  return e;
}

// Ex-post individual rationality check, one flag per supplier.
inline std::vector<bool> ir_satisfied(const BidProfile& true_curves, const Outcome& outcome,
                                      const AuctionConfig& cfg) {
  std::vector<bool> ok(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    ok[s] = utility(true_curves.curves[s], outcome.allocation.units[s],
                    outcome.payments.amounts[s], cfg) >= 0;
  }
  return ok;
}

// s-th highest allocation entry, s in [1, n].
inline Units kth_highest_allocation(const Allocation& a, int s) {
  const int n = static_cast<int>(a.units.size());
  if (s < 1 || s > n) throw std::invalid_argument("kth_highest_allocation: s out of range");
  std::vector<Units> sorted = a.units;
  std::nth_element(sorted.begin(), sorted.begin() + (s - 1), sorted.end(), std::greater<>());
  return sorted[static_cast<std::size_t>(s - 1)];
}

// Penalty for violating the minimum-winners constraint: zero once the s-th
// highest allocation reaches min_units, otherwise rho / a^(s) with the
// denominator clamped at eps_div.
inline double business_penalty(const Allocation& a, const AuctionConfig& cfg) {
  if (!cfg.business) return 0.0;
  const auto& b = *cfg.business;
  const Units as = kth_highest_allocation(a, b.min_winners);
  if (as >= b.min_units) return 0.0;
  return cfg.rho_business / std::max(as, cfg.eps_div);
}

}  // namespace vda
