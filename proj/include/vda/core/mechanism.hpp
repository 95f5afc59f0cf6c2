#pragma once

#include "vda/core/types.hpp"

namespace vda {

// Anything that maps a bid profile to an allocation and payments.
struct Mechanism {
  virtual ~Mechanism() = default;
  virtual Outcome run(const BidProfile& bids) const = 0;
};

}  // namespace vda
