#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/types.hpp"

namespace vda::vcg {

struct WinnerDeterminationResult {
  std::vector<std::int64_t> units;  // integer allocation per supplier
  Money objective = 0;              // minimal total reported WTS
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

constexpr Money kInf = std::numeric_limits<Money>::infinity();

// Per-supplier WTS sampled on the unit grid {0, g, 2g, ..., m}. Entries past
// the supplier's capacity (units reaching a lot priced at price_cap) are
// infinite unless capped lots are explicitly allowed, as in the removal runs
// behind VCG payments.
inline std::vector<Money> wts_grid(const SupplyCurve& curve, const AuctionConfig& cfg,
                                   std::int64_t g, bool allow_capped) {
  const std::int64_t grid = cfg.m / g;
  std::int64_t capacity = cfg.m;
  if (!allow_capped) {
    for (int t = 0; t < cfg.k; ++t) {
      if (curve.prices[static_cast<std::size_t>(t)] >= cfg.price_cap) {
        capacity = cfg.lot_start(t);
        break;
      }
    }
  }
  std::vector<Money> w(static_cast<std::size_t>(grid) + 1, kInf);
  for (std::int64_t u = 0; u <= grid; ++u) {
    const std::int64_t units = u * g;
    if (units <= capacity) w[static_cast<std::size_t>(u)] = wts_eval(curve, static_cast<Units>(units), cfg);
  }
  return w;
}

inline void check_granularity(const AuctionConfig& cfg, std::int64_t g) {
  if (g < 1 || cfg.m % g != 0)
    throw std::invalid_argument("winner determination: granularity must be >= 1 and divide m");
}

}  // namespace detail

// Exact minimum-total-WTS allocation over the unit grid of step g, by dynamic
// programming over (supplier, remaining units). Ties go to the allocation
// reached by scanning suppliers in index order with the smallest grid choice,
// which hands ties to lower-index suppliers deterministically.
inline WinnerDeterminationResult solve_wd(const BidProfile& profile, const AuctionConfig& cfg,
                                          std::int64_t g, bool allow_capped = false) {
  validate_profile(profile, cfg);
  detail::check_granularity(cfg, g);
  const std::int64_t grid = cfg.m / g;
  const std::size_t cols = static_cast<std::size_t>(grid) + 1;

  std::vector<Money> prev(cols, detail::kInf), cur(cols, detail::kInf);
  prev[0] = 0;
  std::vector<std::vector<std::int32_t>> choice(
      static_cast<std::size_t>(cfg.n), std::vector<std::int32_t>(cols, 0));

  for (int i = 0; i < cfg.n; ++i) {
    const std::vector<Money> w =
        detail::wts_grid(profile.curves[static_cast<std::size_t>(i)], cfg, g, allow_capped);
    for (std::int64_t u = 0; u <= grid; ++u) {
      Money best = detail::kInf;
      std::int32_t best_x = 0;
      for (std::int64_t x = 0; x <= u; ++x) {
        const Money c = prev[static_cast<std::size_t>(u - x)] + w[static_cast<std::size_t>(x)];
        if (c < best) {
          best = c;
          best_x = static_cast<std::int32_t>(x);
        }
      }
      cur[static_cast<std::size_t>(u)] = best;
      choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)] = best_x;
    }
    std::swap(prev, cur);
  }

  if (!(prev[static_cast<std::size_t>(grid)] < detail::kInf))
    throw InfeasibleError("winner determination infeasible: total supplier capacity below demand");

  WinnerDeterminationResult result;
  result.objective = prev[static_cast<std::size_t>(grid)];
  result.units.assign(static_cast<std::size_t>(cfg.n), 0);
  std::int64_t u = grid;
  for (int i = cfg.n - 1; i >= 0; --i) {
    const std::int64_t x = choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)];
    result.units[static_cast<std::size_t>(i)] = x * g;
    u -= x;
  }
  return result;
}

// Winner determination with the business constraint: at least s suppliers
// must each receive min_units, and max_share (if set) caps any single award.
// DP state carries the count of suppliers already meeting min_units, capped
// at s.
inline WinnerDeterminationResult solve_wd_constrained(const BidProfile& profile,
                                                      const AuctionConfig& cfg, std::int64_t g,
                                                      bool allow_capped = false) {
  if (!cfg.business)
    throw std::invalid_argument("solve_wd_constrained: config has no business constraint");
  validate_profile(profile, cfg);
  detail::check_granularity(cfg, g);
  const auto& bc = *cfg.business;
  const int s = bc.min_winners;
  const std::int64_t grid = cfg.m / g;
  const std::size_t cols = static_cast<std::size_t>(grid) + 1;
  const std::size_t states = static_cast<std::size_t>(s) + 1;

  std::int64_t max_units = cfg.m;
  if (bc.max_share)
    max_units = static_cast<std::int64_t>(*bc.max_share * static_cast<double>(cfg.m));

  // f[u][c]; choices store (grid units, previous count).
  auto idx = [&](std::int64_t u, int c) {
    return static_cast<std::size_t>(u) * states + static_cast<std::size_t>(c);
  };
  std::vector<Money> prev(cols * states, detail::kInf), cur(cols * states, detail::kInf);
  prev[idx(0, 0)] = 0;
  struct Step {
    std::int32_t x = 0;
    std::int8_t prev_count = 0;
  };
  std::vector<std::vector<Step>> choice(static_cast<std::size_t>(cfg.n),
                                        std::vector<Step>(cols * states));

  for (int i = 0; i < cfg.n; ++i) {
    const std::vector<Money> w =
        detail::wts_grid(profile.curves[static_cast<std::size_t>(i)], cfg, g, allow_capped);
    std::fill(cur.begin(), cur.end(), detail::kInf);
    for (std::int64_t u = 0; u <= grid; ++u) {
      for (int c = 0; c <= s; ++c) {
        Money best = detail::kInf;
        Step best_step;
        for (std::int64_t x = 0; x <= u; ++x) {
          const std::int64_t units = x * g;
          if (units > max_units) break;
          const Money wx = w[static_cast<std::size_t>(x)];
          const bool counts = static_cast<double>(units) >= bc.min_units;
          // Predecessor counts that land on c after this award.
          if (counts) {
            if (c >= 1) {
              const Money cand = prev[idx(u - x, c - 1)] + wx;
              if (cand < best) best = cand, best_step = {static_cast<std::int32_t>(x),
                                                         static_cast<std::int8_t>(c - 1)};
            }
            if (c == s) {
              const Money cand = prev[idx(u - x, s)] + wx;
              if (cand < best) best = cand, best_step = {static_cast<std::int32_t>(x),
                                                         static_cast<std::int8_t>(s)};
            }
          } else {
            const Money cand = prev[idx(u - x, c)] + wx;
            if (cand < best) best = cand, best_step = {static_cast<std::int32_t>(x),
                                                       static_cast<std::int8_t>(c)};
          }
        }
        cur[idx(u, c)] = best;
        choice[static_cast<std::size_t>(i)][idx(u, c)] = best_step;
      }
    }
    std::swap(prev, cur);
  }

  if (!(prev[idx(grid, s)] < detail::kInf))
    throw InfeasibleError("constrained winner determination infeasible for this profile");

  WinnerDeterminationResult result;
  result.objective = prev[idx(grid, s)];
  result.units.assign(static_cast<std::size_t>(cfg.n), 0);
  std::int64_t u = grid;
  int c = s;
  for (int i = cfg.n - 1; i >= 0; --i) {
    const Step st = choice[static_cast<std::size_t>(i)][idx(u, c)];
    result.units[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(st.x) * g;
    u -= st.x;
    c = st.prev_count;
  }
  return result;
}

}  // namespace vda::vcg
