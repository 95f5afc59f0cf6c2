#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/mechanism.hpp"
#include "vda/core/types.hpp"
#include "vda/vcg/winner_determination.hpp"

namespace vda::vcg {

namespace detail {

// Profile/config with supplier i removed, for the C*_{-i} reruns.
inline std::pair<BidProfile, AuctionConfig> drop_supplier(const BidProfile& profile,
                                                          const AuctionConfig& cfg, int i) {
  BidProfile reduced;
  for (int j = 0; j < cfg.n; ++j)
    if (j != i) reduced.curves.push_back(profile.curves[static_cast<std::size_t>(j)]);
  AuctionConfig rcfg = cfg;
  rcfg.n = cfg.n - 1;
  return {std::move(reduced), rcfg};
}

}  // namespace detail

// Classic VCG payments for a procurement auction: each winner is paid the
// cost increase their absence would impose on everyone else,
//   p_i = C*_{-i} - (C* - wts_i(a_i*)).
// Losers are paid nothing (removing them leaves the optimum untouched).
// Removal runs allow capped lots: a displaced allocation priced at price_cap
// is the finite encoding of "no alternative supply".
inline PaymentVector vcg_payments(const BidProfile& profile, const AuctionConfig& cfg,
                                  const WinnerDeterminationResult& wd, std::int64_t g,
                                  bool constrained = false) {
  PaymentVector payments;
  payments.amounts.assign(static_cast<std::size_t>(cfg.n), 0);
  for (int i = 0; i < cfg.n; ++i) {
    const std::int64_t award = wd.units[static_cast<std::size_t>(i)];
    if (award == 0) continue;
    auto [reduced, rcfg] = detail::drop_supplier(profile, cfg, i);
    if (rcfg.n == 0 || (constrained && rcfg.business &&
                        rcfg.business->min_winners > rcfg.n))
      throw InfeasibleError(
          "vcg_payments: removing supplier " + std::to_string(i) +
          " leaves no feasible problem; pad the profile with price_cap suppliers");
    WinnerDeterminationResult without;
    try {
      without = constrained ? solve_wd_constrained(reduced, rcfg, g, /*allow_capped=*/true)
                            : solve_wd(reduced, rcfg, g, /*allow_capped=*/true);
    } catch (const InfeasibleError&) {
      throw InfeasibleError(
          "vcg_payments: removing supplier " + std::to_string(i) +
          " leaves no feasible problem; pad the profile with price_cap suppliers");
    }
    const Money own_wts =
        wts_eval(profile.curves[static_cast<std::size_t>(i)], static_cast<Units>(award), cfg);
    payments.amounts[static_cast<std::size_t>(i)] = without.objective - (wd.objective - own_wts);
  }
  return payments;
}

// Mechanism wrapper around the exact solver, for use in the evaluation
// harness and as a DSIC reference in regret tests.
class VcgMechanism final : public Mechanism {
 public:
  VcgMechanism(AuctionConfig cfg, std::int64_t granularity, bool constrained)
      : cfg_(std::move(cfg)), g_(granularity), constrained_(constrained) {
    cfg_.validate();
    if (constrained_ && !cfg_.business)
      throw std::invalid_argument("VcgMechanism: constrained variant needs a business constraint");
  }

  Outcome run(const BidProfile& bids) const override {
    const WinnerDeterminationResult wd =
        constrained_ ? solve_wd_constrained(bids, cfg_, g_) : solve_wd(bids, cfg_, g_);
    Outcome o;
    o.allocation.units.assign(wd.units.begin(), wd.units.end());
    o.payments = vcg_payments(bids, cfg_, wd, g_, constrained_);
    return o;
  }

  const AuctionConfig& config() const { return cfg_; }
  std::int64_t granularity() const { return g_; }

 private:
  AuctionConfig cfg_;
  std::int64_t g_;
  bool constrained_;
};

}  // namespace vda::vcg
