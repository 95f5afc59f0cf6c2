#include <catch2/catch_amalgamated.hpp>

#include "vda/core/rng.hpp"
#include "vda/core/serialize.hpp"
#include "vda/datagen/fixtures.hpp"

using namespace vda;

TEST_CASE("curve JSON round trip") {
  AuctionConfig cfg;
  cfg.n = 1;
  cfg.m = 1000;
  cfg.k = 4;
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    SupplyCurve c;
    for (int t = 0; t < cfg.k; ++t) c.prices.push_back(rng.uniform(1, 9));
    const json j = curve_to_json(c, cfg.lot_size());
    const SupplyCurve back = curve_from_json(j, cfg.lot_size());
    CHECK(back.prices == c.prices);
  }
}

TEST_CASE("curve JSON rejects mismatched lot size") {
  const json j = {{"lot_size", 250}, {"prices", {1.0, 2.0}}};
  CHECK_THROWS_AS(curve_from_json(j, 500), std::invalid_argument);
}

TEST_CASE("profile JSON round trip and shape checks") {
  AuctionConfig cfg;
  cfg.n = 3;
  cfg.m = 600;
  cfg.k = 3;
  BidProfile p;
  for (int i = 0; i < 3; ++i) p.curves.push_back(SupplyCurve{{6.0 - i, 5.0 - i, 4.0 - i}});
  const json j = profile_to_json(p, cfg);
  const BidProfile back = profile_from_json(j, cfg.lot_size());
  REQUIRE(back.suppliers() == 3);
  for (int i = 0; i < 3; ++i) CHECK(back.curves[i].prices == p.curves[i].prices);

  json ragged = j;
  ragged[1]["prices"] = {1.0, 2.0};
  CHECK_THROWS_AS(profile_from_json(ragged, cfg.lot_size()), std::invalid_argument);
}

TEST_CASE("outcome JSON carries the total") {
  Outcome o;
  o.allocation.units = {3000, 2000, 0};
  o.payments.amounts = {8626, 5931, 0};
  const json j = outcome_to_json(o);
  CHECK(j.at("total_cost").get<double>() == 14557.0);
  CHECK(j.at("allocation").size() == 3);
}

TEST_CASE("interval curves parse the quoted pesticide syntax") {
  AuctionConfig cfg;
  cfg.n = 1;
  cfg.m = 5000;
  cfg.k = 50;
  // both ';' and ':' appear between range and price in the source data
  const SupplyCurve s1 = curve_from_interval_text(
      "S1: [1-500; 2.75];[501-1000; 2.69];[1001-2000; 2.62];[2001-3000; 2.56]", cfg);
  CHECK(s1.prices[0] == 2.75);
  CHECK(s1.prices[4] == 2.75);   // units 401-500
  CHECK(s1.prices[5] == 2.69);   // units 501-600
  CHECK(s1.prices[19] == 2.62);  // units 1901-2000
  CHECK(s1.prices[20] == 2.56);  // units 2001-2100
  CHECK(s1.prices[29] == 2.56);  // units 2901-3000
  for (int t = 30; t < 50; ++t) CHECK(s1.prices[static_cast<std::size_t>(t)] == cfg.price_cap);

  const SupplyCurve colon = curve_from_interval_text("[1-1000: 3.30];[1001-5000: 2.87]", cfg);
  CHECK(colon.prices[9] == 3.30);
  CHECK(colon.prices[10] == 2.87);
}

TEST_CASE("interval curves reject misaligned and malformed ranges") {
  AuctionConfig cfg;
  cfg.n = 1;
  cfg.m = 1000;
  cfg.k = 10;
  CHECK_THROWS_AS(curve_from_interval_text("[1-250; 3.0];[251-1000; 2.5]", cfg),
                  std::invalid_argument);  // 250 is not a lot boundary
  CHECK_THROWS_AS(curve_from_interval_text("[1-400; 3.0];[501-1000; 2.5]", cfg),
                  std::invalid_argument);  // gap
  CHECK_THROWS_AS(curve_from_interval_text("[100-200; 3.0]", cfg),
                  std::invalid_argument);  // must start at unit 1
  CHECK_THROWS_AS(curve_from_interval_text("no ranges here", cfg), std::invalid_argument);
  CHECK_THROWS_AS(curve_from_interval_text("[1-1000 3.0]", cfg), std::invalid_argument);
}

TEST_CASE("interval profile loader handles continuation lines and comments") {
  AuctionConfig cfg;
  cfg.n = 2;
  cfg.m = 400;
  cfg.k = 4;
  const std::string text =
      "# two suppliers\n"
      "[1-200; 4.0];\n"
      "  [201-400; 3.5]\n"
      "[1-400; 5.0]\n";
  const BidProfile p = profile_from_interval_text(text, cfg);
  REQUIRE(p.suppliers() == 2);
  CHECK(p.curves[0].prices == std::vector<Money>{4.0, 4.0, 3.5, 3.5});
  CHECK(p.curves[1].prices == std::vector<Money>{5.0, 5.0, 5.0, 5.0});
}

TEST_CASE("pesticide fixture spot values") {
  const auto [profile, cfg] = datagen::pesticide_fixture();
  REQUIRE(profile.suppliers() == 5);
  // S5 is flat 3.00 over the whole range
  for (int t = 0; t < 50; ++t) CHECK(profile.curves[4].prices[static_cast<std::size_t>(t)] == 3.0);
  // S2's second line continues the first
  CHECK(profile.curves[1].prices[0] == 3.02);
  CHECK(profile.curves[1].prices[10] == 2.77);  // units 1001-1100
  CHECK(profile.curves[1].prices[29] == 2.69);  // units 2901-3000
  CHECK(profile.curves[1].prices[30] == cfg.price_cap);
}
