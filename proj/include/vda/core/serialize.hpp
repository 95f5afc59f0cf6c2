#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vda/core/types.hpp"

namespace vda {

using json = nlohmann::json;

inline json curve_to_json(const SupplyCurve& curve, std::int64_t lot_size) {
  return json{{"lot_size", lot_size}, {"prices", curve.prices}};
}

inline json profile_to_json(const BidProfile& profile, const AuctionConfig& cfg) {
  json arr = json::array();
  for (const auto& c : profile.curves) arr.push_back(curve_to_json(c, cfg.lot_size()));
  return arr;
}

inline SupplyCurve curve_from_json(const json& j, std::int64_t expected_lot_size) {
  if (!j.is_object() || !j.contains("prices"))
    throw std::invalid_argument("curve JSON: expected {\"lot_size\":L, \"prices\":[...]}");
  const auto ls = j.value("lot_size", expected_lot_size);
  if (expected_lot_size > 0 && ls != expected_lot_size)
    throw std::invalid_argument("curve JSON: lot_size " + std::to_string(ls) +
                                " does not match expected " + std::to_string(expected_lot_size));
  SupplyCurve c;
  c.prices = j.at("prices").get<std::vector<Money>>();
  return c;
}

inline BidProfile profile_from_json(const json& j, std::int64_t expected_lot_size = 0) {
  if (!j.is_array()) throw std::invalid_argument("profile JSON: expected an array of curves");
  BidProfile p;
  std::int64_t ls = expected_lot_size;
  for (const auto& cj : j) {
    if (ls == 0 && cj.is_object() && cj.contains("lot_size"))
      ls = cj.at("lot_size").get<std::int64_t>();
    p.curves.push_back(curve_from_json(cj, ls));
  }
  for (const auto& c : p.curves)
    if (c.lots() != p.curves.front().lots())
      throw std::invalid_argument("profile JSON: curves disagree on lot count");
  return p;
}

inline json outcome_to_json(const Outcome& o) {
  Money total = 0;
  for (Money p : o.payments.amounts) total += p;
  return json{{"allocation", o.allocation.units},
              {"payments", o.payments.amounts},
              {"total_cost", total}};
}

// ---------------------------------------------------------------------------
// Interval-form curves: "[1-500; 2.75];[501-1000; 2.69]...". Ranges must tile
// [1, N] contiguously; both ';' and ':' are accepted between range and price.
// A leading "name:" label is skipped. Boundaries must align with lot
// boundaries; units past the last range are filled with price_cap.
// ---------------------------------------------------------------------------

struct PriceInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  Money price = 0;
};

inline std::vector<PriceInterval> parse_intervals(std::string_view text) {
  std::vector<PriceInterval> out;
  std::size_t pos = text.find('[');
  if (pos == std::string_view::npos)
    throw std::invalid_argument("interval curve: no '[' found in \"" + std::string(text) + "\"");
  while (pos < text.size()) {
    const std::size_t open = text.find('[', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = text.find(']', open);
    if (close == std::string_view::npos)
      throw std::invalid_argument("interval curve: unterminated range");
    std::string body(text.substr(open + 1, close - open - 1));
    // "lo-hi" then ';' or ':' then price
    const std::size_t dash = body.find('-');
    std::size_t sep = body.find_first_of(";:", dash == std::string::npos ? 0 : dash);
    if (dash == std::string::npos || sep == std::string::npos)
      throw std::invalid_argument("interval curve: expected [lo-hi; price], got [" + body + "]");
    PriceInterval iv;
    try {
      iv.lo = std::stoll(body.substr(0, dash));
      iv.hi = std::stoll(body.substr(dash + 1, sep - dash - 1));
      iv.price = std::stod(body.substr(sep + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("interval curve: malformed range [" + body + "]");
    }
    out.push_back(iv);
    pos = close + 1;
  }
  if (out.empty()) throw std::invalid_argument("interval curve: no ranges found");
  return out;
}

inline SupplyCurve curve_from_intervals(const std::vector<PriceInterval>& ranges,
                                        const AuctionConfig& cfg) {
  const std::int64_t ell = cfg.lot_size();
  std::int64_t expect_lo = 1;
  SupplyCurve curve;
  curve.prices.assign(static_cast<std::size_t>(cfg.k), cfg.price_cap);
  for (const auto& iv : ranges) {
    if (iv.lo != expect_lo)
      throw std::invalid_argument("interval curve: ranges must tile [1, N] contiguously");
    if (iv.hi < iv.lo || iv.hi > cfg.m)
      throw std::invalid_argument("interval curve: range end out of bounds");
    if (iv.hi != cfg.m && iv.hi % ell != 0)
      throw std::invalid_argument("interval curve: boundary " + std::to_string(iv.hi) +
                                  " not aligned to lot size " + std::to_string(ell));
    if (!(iv.price > 0))
      throw std::invalid_argument("interval curve: prices must be positive");
    for (int t = 0; t < cfg.k; ++t) {
      const std::int64_t lot_lo = cfg.lot_start(t) + 1;
      if (lot_lo >= iv.lo && lot_lo <= iv.hi)
        curve.prices[static_cast<std::size_t>(t)] = std::min(iv.price, cfg.price_cap);
    }
    expect_lo = iv.hi + 1;
  }
  return curve;
}

inline SupplyCurve curve_from_interval_text(std::string_view text, const AuctionConfig& cfg) {
  return curve_from_intervals(parse_intervals(text), cfg);
}

// One curve per line; indented lines continue the previous curve; '#' lines
// and blank lines are skipped.
inline BidProfile profile_from_interval_text(const std::string& text, const AuctionConfig& cfg) {
  std::vector<std::string> records;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    if (first > 0 && !records.empty())
      records.back() += " " + line.substr(first);
    else
      records.push_back(line.substr(first));
  }
  BidProfile p;
  for (const auto& rec : records) p.curves.push_back(curve_from_interval_text(rec, cfg));
  return p;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace vda
