#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vda/harness/experiment.hpp"

namespace vda::harness {

// Cost table over auction types (rows) and scenarios (columns), assembled
// from evaluation reports. Rendering is byte-stable for identical inputs.
class ReportTable {
 public:
  void add(const EvalReport& report, int rounding = 1) {
    if (std::find(scenarios_.begin(), scenarios_.end(), report.scenario) == scenarios_.end())
      scenarios_.push_back(report.scenario);
    if (std::find(types_.begin(), types_.end(), report.auction_type) == types_.end()) {
      types_.push_back(report.auction_type);
      std::sort(types_.begin(), types_.end());
    }
    const double value =
        rounding > 0 ? std::round(report.mean_cost / rounding) * rounding : report.mean_cost;
    cells_[{report.auction_type, report.scenario}] = value;
  }

  std::string csv() const {
    std::ostringstream out;
    out << "auction_type,label";
    for (const std::string& s : scenarios_) out << "," << s;
    out << "\n";
    for (const int t : types_) {
      out << t << "," << auction_label(static_cast<AuctionType>(t));
      for (const std::string& s : scenarios_) {
        out << ",";
        const auto it = cells_.find({t, s});
        if (it != cells_.end()) out << format_cost(it->second);
      }
      out << "\n";
    }
    return out.str();
  }

  std::string text() const {
    std::ostringstream out;
    out << pad("auction", 24);
    for (const std::string& s : scenarios_) out << pad(s, 18);
    out << "\n";
    for (const int t : types_) {
      out << pad(std::to_string(t) + " " + auction_label(static_cast<AuctionType>(t)), 24);
      for (const std::string& s : scenarios_) {
        const auto it = cells_.find({t, s});
        out << pad(it != cells_.end() ? format_cost(it->second) : "-", 18);
      }
      out << "\n";
    }
    return out.str();
  }

  int rows() const { return static_cast<int>(types_.size()); }
  int cols() const { return static_cast<int>(scenarios_.size()); }

 private:
  static std::string format_cost(double v) {
    std::ostringstream ss;
    if (v == std::floor(v))
      ss << static_cast<long long>(v);
    else
      ss << v;
    return ss.str();
  }

  static std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  }

  std::vector<std::string> scenarios_;  // column order: first seen
  std::vector<int> types_;              // row order: ascending auction type
  std::map<std::pair<int, std::string>, double> cells_;
};

}  // namespace vda::harness
