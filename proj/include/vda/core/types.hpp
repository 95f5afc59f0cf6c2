#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vda {

using Money = double;
using Units = double;

// Side conditions on the allocation: at least `min_winners` suppliers must
// each receive `min_units` or more, and optionally no supplier may take more
// than `max_share` of the total demand.
struct BusinessConstraint {
  int min_winners = 1;
  Units min_units = 0.0;
  std::optional<double> max_share;
};

// Static description of one auction instance family: n suppliers, m
// homogeneous units, k lots per curve. Lots 1..k-1 have floor(m/k) units;
// the last lot absorbs the remainder.
struct AuctionConfig {
  int n = 0;
  std::int64_t m = 0;
  int k = 0;
  std::optional<BusinessConstraint> business;

  double rho_regret = 5.0;
  double rho_envy = 5.0;
  double rho_business = 0.0;

  // Finite stand-in for "cannot supply this lot"; keeps gradients finite.
  Money price_cap = 1e6;
  // Divisor clamp for the business penalty when the s-th allocation is ~0.
  Units eps_div = 1.0;

  std::int64_t lot_size() const { return m / k; }

  // Units in lot t (0-based). Only the final lot can differ from lot_size().
  std::int64_t lot_units(int t) const {
    const std::int64_t ell = lot_size();
    return t + 1 < k ? ell : m - static_cast<std::int64_t>(k - 1) * ell;
  }

  // Lower unit boundary of lot t: lot t covers units (start, start + size].
  std::int64_t lot_start(int t) const { return static_cast<std::int64_t>(t) * lot_size(); }

  void validate() const {
    if (n < 1) throw std::invalid_argument("AuctionConfig: n must be >= 1");
    if (m < 1) throw std::invalid_argument("AuctionConfig: m must be >= 1");
    if (k < 1 || k > m) throw std::invalid_argument("AuctionConfig: need 1 <= k <= m");
    if (!(price_cap > 0)) throw std::invalid_argument("AuctionConfig: price_cap must be positive");
    if (!(eps_div > 0)) throw std::invalid_argument("AuctionConfig: eps_div must be positive");
    if (rho_regret < 0 || rho_envy < 0 || rho_business < 0)
      throw std::invalid_argument("AuctionConfig: penalty weights must be non-negative");
    if (business) {
      const auto& b = *business;
      if (b.min_winners < 1 || b.min_winners > n)
        throw std::invalid_argument("BusinessConstraint: need 1 <= min_winners <= n");
      if (b.min_units < 0)
        throw std::invalid_argument("BusinessConstraint: min_units must be >= 0");
      if (b.min_units > 0 && b.min_units * b.min_winners > static_cast<double>(m))
        throw std::invalid_argument("BusinessConstraint: min_winners * min_units exceeds demand");
      if (b.max_share) {
        if (*b.max_share <= 0 || *b.max_share > 1)
          throw std::invalid_argument("BusinessConstraint: max_share must be in (0, 1]");
        if (*b.max_share * static_cast<double>(m) < b.min_units)
          throw std::invalid_argument("BusinessConstraint: max_share cap below min_units");
      }
    }
  }
};

// A supplier's per-lot unit prices. prices[t] applies to every unit in lot t.
// Prices at or above the config's price_cap mark lots the supplier cannot
// serve. No monotonicity is imposed on reported curves.
struct SupplyCurve {
  std::vector<Money> prices;

  int lots() const { return static_cast<int>(prices.size()); }
};

// All suppliers' curves, row i being supplier i's report (or, when used as a
// valuation profile, supplier i's private willingness-to-sell).
struct BidProfile {
  std::vector<SupplyCurve> curves;

  int suppliers() const { return static_cast<int>(curves.size()); }
};

struct Allocation {
  std::vector<Units> units;
};

struct PaymentVector {
  std::vector<Money> amounts;
};

struct Outcome {
  Allocation allocation;
  PaymentVector payments;
};

inline void validate_curve(const SupplyCurve& curve, const AuctionConfig& cfg) {
  if (curve.lots() != cfg.k)
    throw std::invalid_argument("SupplyCurve: expected " + std::to_string(cfg.k) + " lots, got " +
                                std::to_string(curve.lots()));
  for (const Money p : curve.prices)
    if (!(p > 0) || p > cfg.price_cap)
      throw std::invalid_argument("SupplyCurve: prices must lie in (0, price_cap]");
}

inline void validate_profile(const BidProfile& profile, const AuctionConfig& cfg) {
  if (profile.suppliers() != cfg.n)
    throw std::invalid_argument("BidProfile: expected " + std::to_string(cfg.n) + " curves, got " +
                                std::to_string(profile.suppliers()));
  for (const auto& c : profile.curves) validate_curve(c, cfg);
}

// VCG allocations are integral and must hit m exactly; learned allocations
// are continuous and allowed float slack proportional to m.
inline void validate_allocation(const Allocation& a, const AuctionConfig& cfg, double tol_frac) {
  if (static_cast<int>(a.units.size()) != cfg.n)
    throw std::invalid_argument("Allocation: wrong length");
  double sum = 0;
  for (const Units u : a.units) {
    if (u < 0) throw std::invalid_argument("Allocation: negative entry");
    sum += u;
  }
  const double tol = tol_frac * static_cast<double>(cfg.m);
  if (std::abs(sum - static_cast<double>(cfg.m)) > tol)
    throw std::invalid_argument("Allocation: entries sum to " + std::to_string(sum) +
                                ", expected " + std::to_string(cfg.m));
}

inline void validate_outcome(const Outcome& o, const AuctionConfig& cfg, double tol_frac) {
  validate_allocation(o.allocation, cfg, tol_frac);
  if (static_cast<int>(o.payments.amounts.size()) != cfg.n)
    throw std::invalid_argument("PaymentVector: wrong length");
  for (int i = 0; i < cfg.n; ++i) {
    const Money p = o.payments.amounts[i];
    if (p < 0) throw std::invalid_argument("PaymentVector: negative payment");
    if (o.allocation.units[i] == 0 && p != 0)
      throw std::invalid_argument("PaymentVector: nonzero payment for zero allocation");
  }
}

}  // namespace vda
