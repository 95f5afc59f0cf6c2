#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "vda/core/economics.hpp"
#include "vda/core/rng.hpp"
#include "vda/core/types.hpp"

using namespace vda;

namespace {

AuctionConfig make_cfg(int n, std::int64_t m, int k) {
  AuctionConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.k = k;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("wts_eval golden values") {
  // n is irrelevant for curve evaluation; m = 2500, k = 5, lot size 500.
  const AuctionConfig cfg = make_cfg(2, 2500, 5);
  const SupplyCurve first{{20, 18, 18, 16, 16}};

  CHECK(wts_eval(first, 1800, cfg) == 32800.0);
  CHECK(wts_eval(first, 0, cfg) == 0.0);
  CHECK(wts_eval(first, 250, cfg) == 5000.0);  // pro-rata inside the first lot

  const SupplyCurve capped{{18, 17, 17, cfg.price_cap, cfg.price_cap}};
  CHECK(wts_eval(capped, 700, cfg) == 12400.0);
}

TEST_CASE("wts_eval rejects units outside [0, m]") {
  const AuctionConfig cfg = make_cfg(1, 100, 2);
  const SupplyCurve c{{5, 4}};
  CHECK_THROWS_AS(wts_eval(c, -1, cfg), std::domain_error);
  CHECK_THROWS_AS(wts_eval(c, 101, cfg), std::domain_error);
}

TEST_CASE("wts_eval remainder lot takes m - (k-1)*lot_size units") {
  // m = 7, k = 3: lots of 2, 2, 3.
  const AuctionConfig cfg = make_cfg(1, 7, 3);
  REQUIRE(cfg.lot_size() == 2);
  REQUIRE(cfg.lot_units(2) == 3);
  const SupplyCurve c{{10, 8, 5}};
  CHECK(wts_eval(c, 7, cfg) == 2 * 10 + 2 * 8 + 3 * 5);
  CHECK(wts_eval(c, 5, cfg) == 2 * 10 + 2 * 8 + 1 * 5);
  CHECK(wts_eval(c, 6.5, cfg) == Catch::Approx(2 * 10 + 2 * 8 + 2.5 * 5));
}

TEST_CASE("wts_eval agrees with the unit-by-unit sum at every integer") {
  Rng rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = static_cast<int>(rng.uniform_int(1, 6));
    const std::int64_t m = rng.uniform_int(k, 40);
    const AuctionConfig cfg = make_cfg(1, m, k);
    SupplyCurve c;
    for (int t = 0; t < k; ++t) c.prices.push_back(rng.uniform(0.5, 30.0));
    for (std::int64_t x = 0; x <= m; ++x) {
      CHECK(wts_eval(c, static_cast<Units>(x), cfg) ==
            Catch::Approx(oracle::wts_unit_sum(c, x, cfg)).margin(1e-9));
    }
  }
}

TEST_CASE("wts_eval is non-decreasing and Lipschitz in the max lot price") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = static_cast<int>(rng.uniform_int(1, 5));
    const std::int64_t m = rng.uniform_int(k, 60);
    const AuctionConfig cfg = make_cfg(1, m, k);
    SupplyCurve c;
    double max_price = 0;
    for (int t = 0; t < k; ++t) {
      c.prices.push_back(rng.uniform(0.5, 30.0));
      max_price = std::max(max_price, c.prices.back());
    }
    double x1 = rng.uniform(0, static_cast<double>(m));
    double x2 = rng.uniform(0, static_cast<double>(m));
    if (x1 > x2) std::swap(x1, x2);
    const Money w1 = wts_eval(c, x1, cfg);
    const Money w2 = wts_eval(c, x2, cfg);
    CHECK(w1 <= w2 + 1e-9);
    CHECK(w2 - w1 <= max_price * (x2 - x1) + 1e-9);
  }
}

TEST_CASE("utility is payment minus true WTS") {
  const AuctionConfig cfg = make_cfg(2, 2500, 5);
  const SupplyCurve v{{20, 18, 18, 16, 16}};
  CHECK(utility(v, 1800, 35000, cfg) == 2200.0);
  CHECK(utility(v, 0, 0, cfg) == 0.0);
  CHECK(utility(v, 1200, wts_eval(v, 1200, cfg), cfg) == 0.0);  // break-even
}

TEST_CASE("total_cost sums payments") {
  CHECK(total_cost(PaymentVector{{8626, 5931, 0, 0, 0}}) == 14557.0);
  CHECK(total_cost(PaymentVector{{8299, 5731, 274, 0, 0}}) == 14304.0);
  CHECK(total_cost(PaymentVector{{0, 0, 0}}) == 0.0);
}

TEST_CASE("total_cost is permutation invariant") {
  Rng rng(7);
  std::vector<Money> p;
  for (int i = 0; i < 8; ++i) p.push_back(rng.uniform(0, 100));
  std::vector<Money> q = p;
  std::sort(q.begin(), q.end());
  CHECK(total_cost(PaymentVector{p}) == Catch::Approx(total_cost(PaymentVector{q})).margin(1e-9));
}

TEST_CASE("envy hand instance") {
  // Two suppliers with identical flat valuations; supplier 1 takes everything.
  const AuctionConfig cfg = make_cfg(2, 2, 2);
  REQUIRE(cfg.lot_size() == 1);
  BidProfile valuations;
  valuations.curves = {SupplyCurve{{10, 10}}, SupplyCurve{{10, 10}}};
  Outcome o;
  o.allocation.units = {2, 0};
  o.payments.amounts = {30, 0};
  CHECK(envy(valuations, o, 1, cfg) == 10.0);  // max(30-20, 0-0) - 0
  CHECK(envy(valuations, o, 0, cfg) == 0.0);   // own outcome is the argmax
}

TEST_CASE("envy is zero under identical outcomes and for a single supplier") {
  const AuctionConfig cfg = make_cfg(2, 10, 2);
  BidProfile valuations;
  valuations.curves = {SupplyCurve{{4, 3}}, SupplyCurve{{4, 3}}};
  Outcome o;
  o.allocation.units = {5, 5};
  o.payments.amounts = {21, 21};
  CHECK(envy(valuations, o, 0, cfg) == 0.0);
  CHECK(envy(valuations, o, 1, cfg) == 0.0);

  const AuctionConfig solo = make_cfg(1, 10, 2);
  BidProfile one;
  one.curves = {SupplyCurve{{4, 3}}};
  Outcome oo;
  oo.allocation.units = {10};
  oo.payments.amounts = {40};
  CHECK(envy(one, oo, 0, solo) == 0.0);
}

TEST_CASE("envy is never negative") {
  Rng rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    const AuctionConfig cfg = make_cfg(n, 12, 3);
    BidProfile valuations;
    Outcome o;
    double left = 12;
    for (int i = 0; i < n; ++i) {
      SupplyCurve c;
      for (int t = 0; t < 3; ++t) c.prices.push_back(rng.uniform(1, 9));
      valuations.curves.push_back(c);
      const double a = (i == n - 1) ? left : rng.uniform(0, left);
      left -= a;
      o.allocation.units.push_back(a);
      o.payments.amounts.push_back(a > 0 ? rng.uniform(0, 15 * a) : 0.0);
    }
    for (int i = 0; i < n; ++i) CHECK(envy(valuations, o, i, cfg) >= -1e-12);
  }
}

TEST_CASE("ir_satisfied per supplier") {
  const AuctionConfig cfg = make_cfg(2, 10, 2);
  BidProfile valuations;
  valuations.curves = {SupplyCurve{{4, 3}}, SupplyCurve{{5, 5}}};
  Outcome o;
  o.allocation.units = {6, 4};
  o.payments.amounts = {1.1 * wts_eval(valuations.curves[0], 6, cfg),
                        1.1 * wts_eval(valuations.curves[1], 4, cfg)};
  auto ok = ir_satisfied(valuations, o, cfg);
  CHECK(ok == std::vector<bool>{true, true});

  o.payments.amounts[1] = 0.9 * wts_eval(valuations.curves[1], 4, cfg);
  ok = ir_satisfied(valuations, o, cfg);
  CHECK(ok == std::vector<bool>{true, false});

  o.allocation.units = {10, 0};
  o.payments.amounts = {wts_eval(valuations.curves[0], 10, cfg), 0};
  ok = ir_satisfied(valuations, o, cfg);
  CHECK(ok == std::vector<bool>{true, true});
}

TEST_CASE("business penalty golden values") {
  AuctionConfig cfg = make_cfg(5, 5000, 10);
  cfg.rho_business = 1e6;
  cfg.business = BusinessConstraint{3, 1000.0, std::nullopt};
  cfg.validate();

  CHECK(business_penalty(Allocation{{3000, 2000, 0, 0, 0}}, cfg) == 1e6);  // a^(3)=0 -> eps clamp
  CHECK(business_penalty(Allocation{{4500, 500, 0, 0, 0}}, cfg) == 1e6);
  CHECK(business_penalty(Allocation{{2000, 2000, 1000, 0, 0}}, cfg) == 0.0);

  AuctionConfig three = make_cfg(3, 3000, 3);
  three.business = BusinessConstraint{3, 1000.0, std::nullopt};
  CHECK(business_penalty(Allocation{{2000, 2000, 1000}}, three) == 0.0);
  CHECK(kth_highest_allocation(Allocation{{2000, 2000, 1000}}, 3) == 1000.0);
}

TEST_CASE("business penalty is zero iff s entries reach min_units") {
  Rng rng(31);
  AuctionConfig cfg = make_cfg(5, 5000, 10);
  cfg.rho_business = 1e4;
  cfg.business = BusinessConstraint{3, 800.0, std::nullopt};
  for (int trial = 0; trial < 200; ++trial) {
    Allocation a;
    double left = 5000;
    for (int i = 0; i < 5; ++i) {
      const double x = (i == 4) ? left : std::floor(rng.uniform(0, left));
      a.units.push_back(x);
      left -= x;
    }
    int count = 0;
    for (const double u : a.units)
      if (u >= 800.0) ++count;
    const bool zero = business_penalty(a, cfg) == 0.0;
    CHECK(zero == (count >= 3));
  }
}

TEST_CASE("config validation catches bad inputs") {
  CHECK_THROWS_AS(make_cfg(0, 10, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_cfg(2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_cfg(2, 10, 11), std::invalid_argument);

  AuctionConfig cfg = make_cfg(3, 10, 2);
  cfg.business = BusinessConstraint{4, 1.0, std::nullopt};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg.business = BusinessConstraint{2, 6.0, std::nullopt};  // 2*6 > 10
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg.business = BusinessConstraint{2, 4.0, 0.2};  // cap below min_units
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg.business = BusinessConstraint{2, 4.0, 0.5};
  cfg.validate();
}

TEST_CASE("allocation and outcome validation") {
  const AuctionConfig cfg = make_cfg(2, 10, 2);
  validate_allocation(Allocation{{6, 4}}, cfg, 0.0);
  CHECK_THROWS_AS(validate_allocation(Allocation{{6, 5}}, cfg, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(validate_allocation(Allocation{{-1, 11}}, cfg, 1e-6), std::invalid_argument);

  Outcome o;
  o.allocation.units = {10, 0};
  o.payments.amounts = {50, 1};  // paying a loser
  CHECK_THROWS_AS(validate_outcome(o, cfg, 1e-6), std::invalid_argument);
  o.payments.amounts = {50, 0};
  validate_outcome(o, cfg, 1e-6);
}
