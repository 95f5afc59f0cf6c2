#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vda/core/economics.hpp"
#include "vda/core/rng.hpp"
#include "vda/datagen/fixtures.hpp"
#include "vda/vcg/payments.hpp"
#include "vda/vcg/winner_determination.hpp"

using namespace vda;

TEST_CASE("winner determination matches brute force on random small instances") {
  Rng rng(20240601);
  int checked = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const auto inst = oracle::random_small_instance(rng, false);
    const auto brute = oracle::brute_force_wd(inst.profile, inst.cfg, false);
    if (!brute.feasible) {
      CHECK_THROWS_AS(vcg::solve_wd(inst.profile, inst.cfg, 1), vcg::InfeasibleError);
      continue;
    }
    const auto dp = vcg::solve_wd(inst.profile, inst.cfg, 1);
    REQUIRE(std::abs(dp.objective - brute.objective) < 1e-9);
    // the DP's allocation must itself attain the optimum
    Money total = 0;
    std::int64_t sum = 0;
    for (int i = 0; i < inst.cfg.n; ++i) {
      total += wts_eval(inst.profile.curves[static_cast<std::size_t>(i)],
                        static_cast<Units>(dp.units[static_cast<std::size_t>(i)]), inst.cfg);
      sum += dp.units[static_cast<std::size_t>(i)];
    }
    CHECK(sum == inst.cfg.m);
    CHECK(std::abs(total - dp.objective) < 1e-9);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("constrained winner determination matches filtered brute force") {
  Rng rng(77001);
  int checked = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const auto inst = oracle::random_small_instance(rng, true);
    const auto brute = oracle::brute_force_wd(inst.profile, inst.cfg, true);
    if (!brute.feasible) {
      CHECK_THROWS_AS(vcg::solve_wd_constrained(inst.profile, inst.cfg, 1),
                      vcg::InfeasibleError);
      continue;
    }
    const auto dp = vcg::solve_wd_constrained(inst.profile, inst.cfg, 1);
    REQUIRE(std::abs(dp.objective - brute.objective) < 1e-9);
    const auto& bc = *inst.cfg.business;
    int count = 0;
    std::int64_t sum = 0;
    for (const std::int64_t a : dp.units) {
      if (static_cast<double>(a) >= bc.min_units) ++count;
      if (bc.max_share)
        CHECK(static_cast<double>(a) <= *bc.max_share * static_cast<double>(inst.cfg.m) + 1e-9);
      sum += a;
    }
    CHECK(sum == inst.cfg.m);
    CHECK(count >= bc.min_winners);
    ++checked;
  }
  CHECK(checked > 80);
}

TEST_CASE("single supplier receives all units") {
  AuctionConfig cfg;
  cfg.n = 1;
  cfg.m = 100;
  cfg.k = 4;
  BidProfile p;
  p.curves = {SupplyCurve{{5, 4, 3, 2}}};
  const auto wd = vcg::solve_wd(p, cfg, 1);
  CHECK(wd.units == std::vector<std::int64_t>{100});
}

TEST_CASE("equal-cost ties go to lower-index suppliers") {
  AuctionConfig cfg;
  cfg.n = 3;
  cfg.m = 6;
  cfg.k = 2;
  BidProfile p;
  p.curves = {SupplyCurve{{2, 2}}, SupplyCurve{{2, 2}}, SupplyCurve{{2, 2}}};
  const auto wd = vcg::solve_wd(p, cfg, 1);
  CHECK(wd.units == std::vector<std::int64_t>{6, 0, 0});
}

TEST_CASE("vacuous business constraint reproduces the plain solution") {
  Rng rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = oracle::random_small_instance(rng, false);
    inst.cfg.business = BusinessConstraint{1, 1.0, std::nullopt};
    bool feasible = true;
    vcg::WinnerDeterminationResult plain;
    try {
      plain = vcg::solve_wd(inst.profile, inst.cfg, 1);
    } catch (const vcg::InfeasibleError&) {
      feasible = false;
    }
    if (!feasible) continue;
    const auto constrained = vcg::solve_wd_constrained(inst.profile, inst.cfg, 1);
    CHECK(std::abs(constrained.objective - plain.objective) < 1e-9);
  }
}

TEST_CASE("forced equal split under s = n with identical curves") {
  AuctionConfig cfg;
  cfg.n = 3;
  cfg.m = 9;
  cfg.k = 3;
  cfg.business = BusinessConstraint{3, 3.0, std::nullopt};
  BidProfile p;
  p.curves = {SupplyCurve{{4, 4, 4}}, SupplyCurve{{4, 4, 4}}, SupplyCurve{{4, 4, 4}}};
  const auto wd = vcg::solve_wd_constrained(p, cfg, 1);
  CHECK(wd.units == std::vector<std::int64_t>{3, 3, 3});
}

TEST_CASE("pesticide fixture: winner determination and VCG payments") {
  const auto [profile, cfg] = datagen::pesticide_fixture();
  const auto t0 = std::chrono::steady_clock::now();
  const auto wd = vcg::solve_wd(profile, cfg, 1);
  CHECK(wd.units == std::vector<std::int64_t>{3000, 2000, 0, 0, 0});
  CHECK(wd.objective == Catch::Approx(13533.0).margin(1e-6));

  const auto payments = vcg::vcg_payments(profile, cfg, wd, 1);
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(payments.amounts[2] == 0.0);
  CHECK(payments.amounts[3] == 0.0);
  CHECK(payments.amounts[4] == 0.0);
  // ex-post IR: winners are paid at least their reported WTS
  for (int i = 0; i < cfg.n; ++i) {
    const Money w = wts_eval(profile.curves[static_cast<std::size_t>(i)],
                             static_cast<Units>(wd.units[static_cast<std::size_t>(i)]), cfg);
    CHECK(payments.amounts[static_cast<std::size_t>(i)] >= w);
  }
  const Money total = total_cost(payments);
  CHECK(std::abs(total - 14557.0) / 14557.0 < 0.005);
  CHECK(elapsed < 10.0);

  // determinism across repeated solves
  const auto wd2 = vcg::solve_wd(profile, cfg, 1);
  CHECK(wd2.units == wd.units);
}

TEST_CASE("infeasible when all curves cap out below demand") {
  AuctionConfig cfg;
  cfg.n = 2;
  cfg.m = 10;
  cfg.k = 2;
  BidProfile p;  // capacities 5 + 0 < 10
  p.curves = {SupplyCurve{{3, cfg.price_cap}}, SupplyCurve{{cfg.price_cap, cfg.price_cap}}};
  CHECK_THROWS_AS(vcg::solve_wd(p, cfg, 1), vcg::InfeasibleError);
}

TEST_CASE("winner displaced onto a cap-priced rival is paid the displaced cost") {
  AuctionConfig cfg;
  cfg.n = 2;
  cfg.m = 4;
  cfg.k = 2;
  BidProfile p;
  p.curves = {SupplyCurve{{10, 8}}, SupplyCurve{{cfg.price_cap, cfg.price_cap}}};
  const auto wd = vcg::solve_wd(p, cfg, 1);
  REQUIRE(wd.units == std::vector<std::int64_t>{4, 0});
  const auto payments = vcg::vcg_payments(p, cfg, wd, 1);
  // C*_{-1} = 4 * price_cap, own WTS = 2*10 + 2*8 = 36 = C*.
  CHECK(payments.amounts[0] == Catch::Approx(4 * cfg.price_cap).margin(1e-6));
  CHECK(payments.amounts[1] == 0.0);
}

TEST_CASE("removing the only supplier reports the price_cap padding remedy") {
  AuctionConfig cfg;
  cfg.n = 1;
  cfg.m = 4;
  cfg.k = 1;
  BidProfile p;
  p.curves = {SupplyCurve{{3}}};
  const auto wd = vcg::solve_wd(p, cfg, 1);
  try {
    vcg::vcg_payments(p, cfg, wd, 1);
    FAIL("expected InfeasibleError");
  } catch (const vcg::InfeasibleError& e) {
    CHECK(std::string(e.what()).find("price_cap") != std::string::npos);
  }
}

TEST_CASE("VCG is DSIC on a misreport grid") {
  Rng rng(38);
  const std::vector<double> scales = {0.5, 0.75, 0.9, 0.95, 1.05, 1.1, 1.25, 1.5};
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = oracle::random_small_instance(rng, false);
    vcg::WinnerDeterminationResult truth_wd;
    try {
      truth_wd = vcg::solve_wd(inst.profile, inst.cfg, 1);
    } catch (const vcg::InfeasibleError&) {
      continue;
    }
    PaymentVector truth_pay;
    try {
      truth_pay = vcg::vcg_payments(inst.profile, inst.cfg, truth_wd, 1);
    } catch (const vcg::InfeasibleError&) {
      continue;
    }
    for (int i = 0; i < inst.cfg.n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const Money truthful_utility =
          utility(inst.profile.curves[si], static_cast<Units>(truth_wd.units[si]),
                  truth_pay.amounts[si], inst.cfg);
      for (const double scale : scales) {
        BidProfile misreported = inst.profile;
        for (auto& price : misreported.curves[si].prices)
          price = std::min(std::max(price * scale, 1e-6), inst.cfg.price_cap);
        vcg::WinnerDeterminationResult wd;
        PaymentVector pay;
        try {
          wd = vcg::solve_wd(misreported, inst.cfg, 1);
          pay = vcg::vcg_payments(misreported, inst.cfg, wd, 1);
        } catch (const vcg::InfeasibleError&) {
          continue;
        }
        const Money lied_utility = utility(
            inst.profile.curves[si], static_cast<Units>(wd.units[si]), pay.amounts[si], inst.cfg);
        CHECK(truthful_utility >= lied_utility - 1e-9);
      }
    }
  }
}

TEST_CASE("VCG payments are ex-post IR on random instances") {
  Rng rng(8080);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_small_instance(rng, false);
    try {
      const auto wd = vcg::solve_wd(inst.profile, inst.cfg, 1);
      const auto pay = vcg::vcg_payments(inst.profile, inst.cfg, wd, 1);
      for (int i = 0; i < inst.cfg.n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const Money w = wts_eval(inst.profile.curves[si],
                                 static_cast<Units>(wd.units[si]), inst.cfg);
        CHECK(pay.amounts[si] - w >= -1e-9);
      }
    } catch (const vcg::InfeasibleError&) {
      continue;
    }
  }
}

TEST_CASE("finer granularity never worsens the objective") {
  Rng rng(606);
  AuctionConfig cfg;
  cfg.n = 3;
  cfg.m = 1000;
  cfg.k = 10;
  for (int trial = 0; trial < 20; ++trial) {
    BidProfile p;
    for (int i = 0; i < cfg.n; ++i) {
      SupplyCurve c;
      double price = rng.uniform(5, 10);
      for (int t = 0; t < cfg.k; ++t) {
        c.prices.push_back(price);
        price *= rng.uniform(0.85, 1.0);  // non-increasing
      }
      p.curves.push_back(std::move(c));
    }
    const auto coarse = vcg::solve_wd(p, cfg, 100);
    const auto mid = vcg::solve_wd(p, cfg, 50);
    const auto fine = vcg::solve_wd(p, cfg, 25);
    CHECK(fine.objective <= mid.objective + 1e-9);
    CHECK(mid.objective <= coarse.objective + 1e-9);
  }
}

TEST_CASE("VcgMechanism produces a valid outcome") {
  const auto [profile, cfg] = datagen::pesticide_fixture();
  const vcg::VcgMechanism mech(cfg, 100, false);
  const Outcome o = mech.run(profile);
  validate_outcome(o, cfg, 0.0);
  CHECK(total_cost(o.payments) == Catch::Approx(14546.0).epsilon(0.01));
}
