#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vda/core/rng.hpp"
#include "vda/harness/experiment.hpp"
#include "vda/harness/report.hpp"

using namespace vda;
using harness::AuctionType;
using harness::EvalReport;
using harness::ExperimentConfig;

namespace {

json pesticide_config_json(int auction_type) {
  return json{{"name", "pesticide-vcg"},
              {"scenario", "pesticide"},
              {"auction_type", auction_type},
              {"data", {{"kind", "pesticide"}}},
              {"eval", {{"samples", 1}, {"seed", 7}, {"granularity", 1}}}};
}

}  // namespace

TEST_CASE("round_allocation: integers pass through, fractions go to largest remainders") {
  CHECK(harness::round_allocation(Allocation{{3000, 2000, 0}}, 5000) ==
        std::vector<std::int64_t>{3000, 2000, 0});
  CHECK(harness::round_allocation(Allocation{{2936.6, 1980.1, 83.3}}, 5000) ==
        std::vector<std::int64_t>{2937, 1980, 83});
}

TEST_CASE("round_allocation sums to m on random vectors") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    const std::int64_t m = rng.uniform_int(1, 10000);
    // random point on the simplex scaled to m
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0;
    for (double& v : w) {
      v = rng.uniform(1e-9, 1.0);
      sum += v;
    }
    Allocation a;
    for (const double v : w) a.units.push_back(v / sum * static_cast<double>(m));
    const auto rounded = harness::round_allocation(a, m);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < rounded.size(); ++i) {
      total += rounded[i];
      CHECK(std::abs(static_cast<double>(rounded[i]) - a.units[i]) < 1.0 + 1e-9);
    }
    CHECK(total == m);
  }
}

TEST_CASE("experiment config parses and validates") {
  const json j = {
      {"name", "synthetic-5000-auction5"},
      {"scenario", "synthetic-5000"},
      {"auction_type", 5},
      {"data",
       {{"kind", "synthetic"}, {"n", 5}, {"m", 5000}, {"k", 10}, {"base_price", 5.0}}},
      {"auction",
       {{"rho_business", 1e6},
        {"business", {{"min_winners", 3}, {"min_units", 1000.0}}}}},
      {"train", {{"epochs", 10}, {"seed", 42}}},
      {"eval", {{"samples", 100}, {"seed", 1}}}};
  const ExperimentConfig cfg = harness::experiment_from_json(j);
  CHECK(cfg.auction_type == AuctionType::CostMinBusiness);
  CHECK(cfg.auction.n == 5);
  CHECK(cfg.auction.business->min_winners == 3);
  CHECK(cfg.train.constraints == trainer::ConstraintSet::Business);
  CHECK(cfg.train.misreport_lo == Catch::Approx(4.125));
  CHECK(cfg.train.misreport_hi == Catch::Approx(6.5));
  CHECK(cfg.train.input_scale == 5.0);
  CHECK(harness::effective_granularity(cfg) == 100);

  json bad = j;
  bad["auction_type"] = 9;
  CHECK_THROWS_AS(harness::experiment_from_json(bad), std::invalid_argument);
}

TEST_CASE("learned auctions refuse to run without a checkpoint") {
  json j = pesticide_config_json(3);
  const ExperimentConfig cfg = harness::experiment_from_json(j);
  CHECK_THROWS_AS(harness::run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("auction 1 on the pesticide fixture reproduces the golden totals") {
  const ExperimentConfig cfg = harness::experiment_from_json(pesticide_config_json(1));
  const EvalReport report = harness::run_experiment(cfg);
  CHECK(report.samples == 1);
  CHECK(std::abs(report.mean_cost - 14557.0) / 14557.0 < 0.005);
  CHECK(report.mean_regret <= 1e-6 * report.mean_cost / cfg.auction.n);
  CHECK(report.business_satisfaction_rate == 1.0);
}

TEST_CASE("a vacuous business constraint reproduces the plain VCG report") {
  json j1 = {{"name", "synthetic-vcg"},
             {"scenario", "synthetic-small"},
             {"auction_type", 1},
             {"data",
              {{"kind", "synthetic"}, {"n", 3}, {"m", 1000}, {"k", 4},
               {"min_interval_units", 250}}},
             {"eval", {{"samples", 40}, {"seed", 31}, {"regret_samples", 4}}}};
  json j2 = j1;
  j2["name"] = "synthetic-vcg-vacuous";
  j2["auction_type"] = 2;
  j2["auction"] = {{"business", {{"min_winners", 1}, {"min_units", 1.0}}}};

  const EvalReport r1 = harness::run_experiment(harness::experiment_from_json(j1));
  const EvalReport r2 = harness::run_experiment(harness::experiment_from_json(j2));
  CHECK(r1.mean_cost == Catch::Approx(r2.mean_cost).margin(1e-9));
  CHECK(r2.business_satisfaction_rate == 1.0);
}

TEST_CASE("evaluation reports are byte-identical across runs") {
  const ExperimentConfig cfg = harness::experiment_from_json(pesticide_config_json(2).patch(
      json::parse(R"([{"op":"add","path":"/auction","value":
        {"business":{"min_winners":2,"min_units":500.0}}}])")));
  const EvalReport a = harness::run_experiment(cfg);
  const EvalReport b = harness::run_experiment(cfg);
  CHECK(harness::eval_report_to_json(a, cfg.eval.rounding).dump() ==
        harness::eval_report_to_json(b, cfg.eval.rounding).dump());
}

TEST_CASE("report table renders stable CSV") {
  harness::ReportTable table;
  CHECK(table.csv() == "auction_type,label\n");  // header-only when empty

  EvalReport r;
  r.auction_type = 1;
  r.scenario = "5000-units";
  r.mean_cost = 27935.4;
  table.add(r);
  CHECK(table.rows() == 1);
  CHECK(table.cols() == 1);
  CHECK(table.csv() == "auction_type,label,5000-units\n1,vcg,27935\n");

  EvalReport r2 = r;
  r2.auction_type = 3;
  r2.mean_cost = 27550.2;
  table.add(r2);
  EvalReport r3 = r;
  r3.scenario = "10000-units";
  r3.mean_cost = 52930.0;
  table.add(r3);
  const std::string csv = table.csv();
  CHECK(csv ==
        "auction_type,label,5000-units,10000-units\n"
        "1,vcg,27935,52930\n"
        "3,cost-min,27550,\n");
  CHECK(table.csv() == csv);  // stable across renders

  const std::string text = table.text();
  CHECK(text.find("cost-min") != std::string::npos);
}

TEST_CASE("rounded outcome recomputes payments from the rounded award") {
  AuctionConfig cfg;
  cfg.n = 3;
  cfg.m = 1000;
  cfg.k = 4;
  const neural::MechanismSpec spec = neural::MechanismSpec::standard(cfg, {8}, 5.0);
  const neural::MechanismParams params = neural::MechanismParams::init(spec, cfg, 6);
  Rng rng(12);
  BidProfile profile;
  for (int i = 0; i < 3; ++i) {
    SupplyCurve c;
    for (int t = 0; t < 4; ++t) c.prices.push_back(rng.uniform(4, 7));
    profile.curves.push_back(std::move(c));
  }
  const auto [raw, rounded] = harness::rounded_outcome(params, profile, cfg);
  std::int64_t total = 0;
  const std::vector<double> phat = neural::payment_multipliers(params, profile);
  for (int i = 0; i < 3; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    total += static_cast<std::int64_t>(rounded.allocation.units[si]);
    CHECK(rounded.payments.amounts[si] ==
          Catch::Approx(phat[si] *
                        wts_eval(profile.curves[si], rounded.allocation.units[si], cfg)));
  }
  CHECK(total == 1000);
  validate_outcome(rounded, cfg, 0.0);
}
