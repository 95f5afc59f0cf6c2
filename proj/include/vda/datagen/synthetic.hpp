#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vda/core/rng.hpp"
#include "vda/core/types.hpp"

namespace vda::datagen {

// Valuation distribution for synthetic experiments. Each supplier draws a
// profit margin uniformly from [margin_lo, margin_hi]; the undiscounted price
// is base_price * (1 + margin). Lots are grouped into contiguous discount
// tiers and each tier's discount is taken off the undiscounted price.
//
// Two tier modes:
//  - fixed_segments > 0: the unit range [1, m] is cut into that many equal
//    segments with the discounts listed in `segment_discounts` (the chili
//    case studies). A lot belongs to the segment containing its last unit.
//  - fixed_segments == 0: tier boundaries are drawn uniformly among
//    partitions of the k lots aligned to min_interval_units. The first tier
//    is undiscounted; later tiers interpolate linearly from discount_first
//    to discount_top.
struct SyntheticSpec {
  Money base_price = 5.0;
  double margin_lo = 0.10;
  double margin_hi = 0.30;
  double discount_first = 0.01;
  double discount_top = 0.25;
  std::int64_t min_interval_units = 500;
  int fixed_segments = 0;
  std::vector<double> segment_discounts;
  int n = 5;
  std::int64_t m = 5000;
  int k = 10;

  void validate() const {
    if (!(base_price > 0)) throw std::invalid_argument("SyntheticSpec: base_price must be > 0");
    if (margin_lo < 0 || margin_hi < margin_lo)
      throw std::invalid_argument("SyntheticSpec: need 0 <= margin_lo <= margin_hi");
    if (n < 1 || m < 1 || k < 1 || k > m)
      throw std::invalid_argument("SyntheticSpec: bad n/m/k");
    const std::int64_t ell = m / k;
    if (fixed_segments > 0) {
      if (static_cast<int>(segment_discounts.size()) != fixed_segments)
        throw std::invalid_argument("SyntheticSpec: one discount per fixed segment required");
      for (std::size_t i = 0; i < segment_discounts.size(); ++i) {
        if (segment_discounts[i] < 0 || segment_discounts[i] >= 1)
          throw std::invalid_argument("SyntheticSpec: segment discounts must be in [0, 1)");
        if (i > 0 && segment_discounts[i] < segment_discounts[i - 1])
          throw std::invalid_argument("SyntheticSpec: discounts must be non-decreasing");
      }
    } else {
      if (discount_first < 0 || discount_top < discount_first || discount_top >= 1)
        throw std::invalid_argument("SyntheticSpec: need 0 <= discount_first <= discount_top < 1");
      if (min_interval_units < ell || min_interval_units % ell != 0)
        throw std::invalid_argument(
            "SyntheticSpec: min_interval_units must be a positive multiple of the lot size");
    }
  }

  AuctionConfig auction_config() const {
    AuctionConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.k = k;
    return cfg;
  }

  double max_discount() const {
    if (fixed_segments > 0)
      return segment_discounts.empty() ? 0.0 : segment_discounts.back();
    return discount_top;
  }

  // Support of the per-lot price marginals; the projection box for
  // misreport search.
  Money price_lo() const { return base_price * (1 + margin_lo) * (1 - max_discount()); }
  Money price_hi() const {
    const double first = fixed_segments > 0 ? segment_discounts.front() : 0.0;
    return base_price * (1 + margin_hi) * (1 - first);
  }
};

namespace detail {

// Per-lot discount for the sampled-tier mode. `tier` is 0-based among
// `tiers` total; tier 0 carries no discount, the rest ramp linearly from
// discount_first up to discount_top (a lone discounted tier stays at
// discount_first, the anchored end of the paper's range).
inline double tier_discount(const SyntheticSpec& spec, int tier, int tiers) {
  if (tier == 0) return 0.0;
  const int discounted = tiers - 1;
  if (discounted == 1) return spec.discount_first;
  const double f = static_cast<double>(tier - 1) / static_cast<double>(discounted - 1);
  return spec.discount_first + (spec.discount_top - spec.discount_first) * f;
}

inline int segment_of_lot(const SyntheticSpec& spec, int lot) {
  // segment containing the lot's last unit
  const std::int64_t ell = spec.m / spec.k;
  const std::int64_t last_unit = (lot + 1 < spec.k) ? (lot + 1) * ell : spec.m;
  const std::int64_t seg_size = spec.m / spec.fixed_segments;
  const std::int64_t seg = (last_unit + seg_size - 1) / seg_size;
  return static_cast<int>(std::clamp<std::int64_t>(seg, 1, spec.fixed_segments)) - 1;
}

}  // namespace detail

inline SupplyCurve sample_curve(const SyntheticSpec& spec, Rng& rng) {
  const double margin = rng.uniform(spec.margin_lo, spec.margin_hi);
  const Money undiscounted = spec.base_price * (1 + margin);
  SupplyCurve curve;
  curve.prices.resize(static_cast<std::size_t>(spec.k));

  if (spec.fixed_segments > 0) {
    for (int t = 0; t < spec.k; ++t)
      curve.prices[static_cast<std::size_t>(t)] =
          undiscounted * (1 - spec.segment_discounts[static_cast<std::size_t>(
                                  detail::segment_of_lot(spec, t))]);
    return curve;
  }

  // Draw tier boundaries uniformly among the min-interval-aligned cut points.
  const std::int64_t ell = spec.m / spec.k;
  const int q = static_cast<int>(spec.min_interval_units / ell);  // lots per quantum
  const int slots = spec.k / q;                                   // quanta in the curve
  std::vector<int> tier_of_slot(static_cast<std::size_t>(slots), 0);
  int tiers = 1;
  for (int sl = 1; sl < slots; ++sl) {
    if (rng.coin()) ++tiers;
    tier_of_slot[static_cast<std::size_t>(sl)] = tiers - 1;
  }
  for (int t = 0; t < spec.k; ++t) {
    const int slot = std::min(t / q, slots - 1);
    const double disc =
        detail::tier_discount(spec, tier_of_slot[static_cast<std::size_t>(slot)], tiers);
    curve.prices[static_cast<std::size_t>(t)] = undiscounted * (1 - disc);
  }
  return curve;
}

inline BidProfile sample_profile(const SyntheticSpec& spec, Rng& rng) {
  BidProfile p;
  p.curves.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) p.curves.push_back(sample_curve(spec, rng));
  return p;
}

// Chili pepper seed case study: 10 suppliers, lot size 100, four equal
// discount segments of 2.5/5/7.5/10 percent, margins uniform on [8%, 12%].
// Variant A: 2000 packets at base $17.11; variant B: 1000 at $14.47.
inline SyntheticSpec chili_spec(char variant) {
  SyntheticSpec spec;
  spec.margin_lo = 0.08;
  spec.margin_hi = 0.12;
  spec.n = 10;
  spec.fixed_segments = 4;
  spec.segment_discounts = {0.025, 0.05, 0.075, 0.10};
  if (variant == 'A' || variant == 'a') {
    spec.base_price = 17.11;
    spec.m = 2000;
  } else if (variant == 'B' || variant == 'b') {
    spec.base_price = 14.47;
    spec.m = 1000;
  } else {
    throw std::invalid_argument("chili_spec: variant must be A or B");
  }
  spec.k = static_cast<int>(spec.m / 100);  // lot size 100
  spec.min_interval_units = 100;
  spec.validate();
  return spec;
}

}  // namespace vda::datagen
