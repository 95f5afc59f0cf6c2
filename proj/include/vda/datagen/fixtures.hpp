#pragma once

#include <string>
#include <utility>

#include "vda/core/serialize.hpp"
#include "vda/core/types.hpp"

namespace vda::datagen {

// Supply curves of the five pesticide suppliers, in the interval notation the
// curves were quoted in. Suppliers whose curves stop short of 5000 units are
// capacity-limited; the loader pads the remaining lots with price_cap.
inline const char* pesticide_interval_text() {
  return
      "S1: [1-500; 2.75];[501-1000; 2.69];[1001-2000; 2.62];[2001-3000; 2.56]\n"
      "S2: [1-100; 3.02];[101-300; 2.94];[301-700; 2.87];[701-1000; 2.81];\n"
      "    [1001-1400: 2.77];[1401-1800; 2.75];[1801-2200: 2.72];[2201-3000; 2.69]\n"
      "S3: [1-500: 3.30];[501-1500; 2.87];[1501-3000: 2.81];[3001-4000; 2.77]\n"
      "S4: [1-500: 3.74];[501-1000; 3.25];[1001-2000; 3.00];[2001-4000; 2.87]\n"
      "S5: [1-5000; 3.00]\n";
}

// n=5 suppliers, m=5000 packets, lot size 100 (divides every curve
// breakpoint), k=50.
inline std::pair<BidProfile, AuctionConfig> pesticide_fixture() {
  AuctionConfig cfg;
  cfg.n = 5;
  cfg.m = 5000;
  cfg.k = 50;
  cfg.validate();
  BidProfile profile = profile_from_interval_text(pesticide_interval_text(), cfg);
  validate_profile(profile, cfg);
  return {std::move(profile), cfg};
}

}  // namespace vda::datagen
