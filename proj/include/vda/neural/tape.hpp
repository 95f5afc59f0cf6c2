#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "vda/core/economics.hpp"
#include "vda/core/types.hpp"

namespace vda::neural {

// Define-by-run reverse-mode tape over vector-valued nodes. One forward
// evaluation records its graph here; backward() replays it in reverse and
// accumulates gradients for every recorded input, including raw bid entries
// (needed by the misreport ascent) and network parameters (when gradient
// sinks are attached to affine ops).
//
// Storage is arena-style and reused across passes via begin().
class Tape {
 public:
  using NodeId = std::int32_t;

  // One element of a node's value vector.
  struct ScalarRef {
    NodeId node = -1;
    std::int32_t index = 0;
  };

  void begin(const AuctionConfig& cfg) {
    cfg_ = &cfg;
    nodes_.clear();
    values_.clear();
    grads_.clear();
    refs_.clear();
  }

  NodeId input(std::span<const double> v) {
    const NodeId id = push(Op::Input, static_cast<std::int32_t>(v.size()));
    std::copy(v.begin(), v.end(), values_.begin() + node(id).off);
    return id;
  }

  NodeId scale(NodeId a, double factor) {
    const NodeId id = push(Op::Scale, size(a));
    Node& n = node(id);
    n.a = a;
    n.scalar = factor;
    const double* x = vals(a);
    double* y = vals(id);
    for (std::int32_t j = 0; j < n.size; ++j) y[j] = x[j] * factor;
    return id;
  }

  // y = W x + b with W row-major (out x in). gW/gb may be null to skip
  // parameter-gradient accumulation (the inner misreport ascent does).
  NodeId affine(std::int32_t out, std::int32_t in, const double* W, const double* b, double* gW,
                double* gb, NodeId x) {
    if (size(x) != in) throw std::invalid_argument("Tape::affine: input size mismatch");
    const NodeId id = push(Op::Affine, out);
    Node& n = node(id);
    n.a = x;
    n.aux = in;
    n.W = W;
    n.bias = b;
    n.gW = gW;
    n.gb = gb;
    const double* xv = vals(x);
    double* y = vals(id);
    for (std::int32_t o = 0; o < out; ++o) {
      const double* row = W + static_cast<std::size_t>(o) * in;
      // four-lane dot so the reduction vectorizes without -ffast-math
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      std::int32_t j = 0;
      for (; j + 4 <= in; j += 4) {
        s0 += row[j] * xv[j];
        s1 += row[j + 1] * xv[j + 1];
        s2 += row[j + 2] * xv[j + 2];
        s3 += row[j + 3] * xv[j + 3];
      }
      for (; j < in; ++j) s0 += row[j] * xv[j];
      y[o] = b[o] + ((s0 + s1) + (s2 + s3));
    }
    return id;
  }

  NodeId tanh_act(NodeId a) {
    const NodeId id = push(Op::Tanh, size(a));
    const double* x = vals(a);
    double* y = vals(id);
    node(id).a = a;
    for (std::int32_t j = 0; j < size(a); ++j) y[j] = std::tanh(x[j]);
    return id;
  }

  // y = total * softmax(x); entries are positive and sum to total.
  NodeId softmax_scale(NodeId a, double total) {
    const NodeId id = push(Op::SoftmaxScale, size(a));
    Node& n = node(id);
    n.a = a;
    n.scalar = total;
    const double* x = vals(a);
    double* y = vals(id);
    const std::int32_t sz = n.size;
    double mx = x[0];
    for (std::int32_t j = 1; j < sz; ++j) mx = std::max(mx, x[j]);
    double denom = 0;
    for (std::int32_t j = 0; j < sz; ++j) {
      y[j] = std::exp(x[j] - mx);
      denom += y[j];
    }
    const double f = total / denom;
    for (std::int32_t j = 0; j < sz; ++j) y[j] *= f;
    return id;
  }

  // y = 1 + sigmoid(x), elementwise in (1, 2).
  NodeId sigmoid_plus_one(NodeId a) {
    const NodeId id = push(Op::SigmoidPlusOne, size(a));
    node(id).a = a;
    const double* x = vals(a);
    double* y = vals(id);
    for (std::int32_t j = 0; j < size(a); ++j) y[j] = 1.0 + 1.0 / (1.0 + std::exp(-x[j]));
    return id;
  }

  // WTS of `units` against k prices stored inside another node (reported
  // bids); gradients flow to both the units and the price entries.
  ScalarRef wts_reported(NodeId prices_node, std::int32_t price_offset, ScalarRef units) {
    const NodeId id = push(Op::WtsReported, 1);
    Node& n = node(id);
    n.a = prices_node;
    n.aux = price_offset;
    n.b = units.node;
    n.b_index = units.index;
    values_[static_cast<std::size_t>(n.off)] =
        wts_value(vals(prices_node) + price_offset, value(units));
    return {id, 0};
  }

  // WTS of `units` against constant prices (true valuations); gradient flows
  // only to the units.
  ScalarRef wts_fixed(const double* prices, ScalarRef units) {
    const NodeId id = push(Op::WtsFixed, 1);
    Node& n = node(id);
    n.W = prices;
    n.b = units.node;
    n.b_index = units.index;
    values_[static_cast<std::size_t>(n.off)] = wts_value(prices, value(units));
    return {id, 0};
  }

  ScalarRef mul(ScalarRef a, ScalarRef b) {
    const NodeId id = push(Op::Mul, 1);
    Node& n = node(id);
    n.a = a.node;
    n.a_index = a.index;
    n.b = b.node;
    n.b_index = b.index;
    values_[static_cast<std::size_t>(n.off)] = value(a) * value(b);
    return {id, 0};
  }

  ScalarRef sub(ScalarRef a, ScalarRef b) {
    const NodeId id = push(Op::Sub, 1);
    Node& n = node(id);
    n.a = a.node;
    n.a_index = a.index;
    n.b = b.node;
    n.b_index = b.index;
    values_[static_cast<std::size_t>(n.off)] = value(a) - value(b);
    return {id, 0};
  }

  ScalarRef add_n(std::span<const ScalarRef> terms) {
    const NodeId id = push(Op::AddN, 1);
    Node& n = node(id);
    n.aux = static_cast<std::int32_t>(refs_.size());
    n.aux2 = static_cast<std::int32_t>(terms.size());
    double s = 0;
    for (const ScalarRef r : terms) {
      refs_.push_back(r);
      s += value(r);
    }
    values_[static_cast<std::size_t>(n.off)] = s;
    return {id, 0};
  }

  // max over scalars; backward routes to the first argmax.
  ScalarRef max_n(std::span<const ScalarRef> terms) {
    if (terms.empty()) throw std::invalid_argument("Tape::max_n: empty");
    const NodeId id = push(Op::MaxN, 1);
    Node& n = node(id);
    n.aux = static_cast<std::int32_t>(refs_.size());
    n.aux2 = static_cast<std::int32_t>(terms.size());
    double best = value(terms[0]);
    std::int32_t arg = 0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      refs_.push_back(terms[j]);
      if (value(terms[j]) > best) {
        best = value(terms[j]);
        arg = static_cast<std::int32_t>(j);
      }
    }
    n.b_index = arg;
    values_[static_cast<std::size_t>(n.off)] = best;
    return {id, 0};
  }

  // Value of the s-th largest entry (1-based) of a vector node; ties pick the
  // lowest index so replays are deterministic.
  ScalarRef kth_largest(NodeId vec, int s) {
    const std::int32_t sz = size(vec);
    if (s < 1 || s > sz) throw std::invalid_argument("Tape::kth_largest: s out of range");
    const NodeId id = push(Op::KthLargest, 1);
    Node& n = node(id);
    n.a = vec;
    const double* x = vals(vec);
    scratch_idx_.resize(static_cast<std::size_t>(sz));
    for (std::int32_t j = 0; j < sz; ++j) scratch_idx_[static_cast<std::size_t>(j)] = j;
    std::stable_sort(scratch_idx_.begin(), scratch_idx_.end(),
                     [&](std::int32_t lhs, std::int32_t rhs) { return x[lhs] > x[rhs]; });
    n.b_index = scratch_idx_[static_cast<std::size_t>(s - 1)];
    values_[static_cast<std::size_t>(n.off)] = x[n.b_index];
    return {id, 0};
  }

  double value(ScalarRef r) const {
    return values_[static_cast<std::size_t>(node(r.node).off + r.index)];
  }
  std::span<const double> values(NodeId id) const {
    const Node& n = node(id);
    return {values_.data() + n.off, static_cast<std::size_t>(n.size)};
  }
  std::int32_t size(NodeId id) const { return node(id).size; }

  // Accumulate a loss-gradient seed before calling backward().
  void seed(ScalarRef r, double delta) {
    grads_[static_cast<std::size_t>(node(r.node).off + r.index)] += delta;
  }

  double grad(ScalarRef r) const {
    return grads_[static_cast<std::size_t>(node(r.node).off + r.index)];
  }
  std::span<const double> grad(NodeId id) const {
    const Node& n = node(id);
    return {grads_.data() + n.off, static_cast<std::size_t>(n.size)};
  }

  void backward() {
    for (std::int32_t i = static_cast<std::int32_t>(nodes_.size()) - 1; i >= 0; --i)
      backward_node(nodes_[static_cast<std::size_t>(i)]);
  }

 private:
  enum class Op : std::uint8_t {
    Input,
    Scale,
    Affine,
    Tanh,
    SoftmaxScale,
    SigmoidPlusOne,
    WtsReported,
    WtsFixed,
    Mul,
    Sub,
    AddN,
    MaxN,
    KthLargest,
  };

  struct Node {
    Op op;
    std::int32_t off = 0;
    std::int32_t size = 0;
    NodeId a = -1;
    std::int32_t a_index = 0;
    NodeId b = -1;
    std::int32_t b_index = 0;   // scalar operand index / argmax / selected index
    std::int32_t aux = 0;       // affine input dim / ref-list offset / price offset
    std::int32_t aux2 = 0;      // ref-list length
    double scalar = 0;          // scale factor / softmax total
    const double* W = nullptr;  // affine weights / fixed prices
    const double* bias = nullptr;
    double* gW = nullptr;
    double* gb = nullptr;
  };

  NodeId push(Op op, std::int32_t sz) {
    Node n;
    n.op = op;
    n.off = static_cast<std::int32_t>(values_.size());
    n.size = sz;
    values_.resize(values_.size() + static_cast<std::size_t>(sz), 0.0);
    grads_.resize(values_.size(), 0.0);
    nodes_.push_back(n);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  double* vals(NodeId id) { return values_.data() + node(id).off; }
  const double* vals(NodeId id) const { return values_.data() + node(id).off; }
  double* gr(NodeId id) { return grads_.data() + node(id).off; }

  double wts_value(const double* prices, double x) const {
    const AuctionConfig& cfg = *cfg_;
    if (!(x >= 0) || x > static_cast<double>(cfg.m))
      throw std::domain_error("Tape::wts: units outside [0, m]");
    double total = 0;
    double covered = 0;
    for (int t = 0; t < cfg.k; ++t) {
      const double sz = static_cast<double>(cfg.lot_units(t));
      const double take = std::min(x - covered, sz);
      if (take <= 0) break;
      total += prices[t] * take;
      covered += sz;
    }
    return total;
  }

  void backward_node(Node& n) {
    const double* g = grads_.data() + n.off;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Scale: {
        double* ga = gr(n.a);
        for (std::int32_t j = 0; j < n.size; ++j) ga[j] += g[j] * n.scalar;
        break;
      }
      case Op::Affine: {
        const std::int32_t in = n.aux;
        double* gx = gr(n.a);
        const double* xv = vals(n.a);
        for (std::int32_t o = 0; o < n.size; ++o) {
          const double gz = g[o];
          if (gz == 0.0) continue;
          const double* row = n.W + static_cast<std::size_t>(o) * in;
          for (std::int32_t j = 0; j < in; ++j) gx[j] += gz * row[j];
          if (n.gW != nullptr) {
            double* grow = n.gW + static_cast<std::size_t>(o) * in;
            for (std::int32_t j = 0; j < in; ++j) grow[j] += gz * xv[j];
            n.gb[o] += gz;
          }
        }
        break;
      }
      case Op::Tanh: {
        double* ga = gr(n.a);
        const double* y = values_.data() + n.off;
        for (std::int32_t j = 0; j < n.size; ++j) ga[j] += g[j] * (1.0 - y[j] * y[j]);
        break;
      }
      case Op::SoftmaxScale: {
        double* ga = gr(n.a);
        const double* y = values_.data() + n.off;
        const double total = n.scalar;
        double dot = 0;
        for (std::int32_t j = 0; j < n.size; ++j) dot += g[j] * (y[j] / total);
        for (std::int32_t j = 0; j < n.size; ++j) ga[j] += y[j] * (g[j] - dot);
        break;
      }
      case Op::SigmoidPlusOne: {
        double* ga = gr(n.a);
        const double* y = values_.data() + n.off;
        for (std::int32_t j = 0; j < n.size; ++j) {
          const double s = y[j] - 1.0;
          ga[j] += g[j] * s * (1.0 - s);
        }
        break;
      }
      case Op::WtsReported: {
        const double gz = g[0];
        if (gz == 0.0) break;
        const double x = values_[static_cast<std::size_t>(node(n.b).off + n.b_index)];
        const double* prices = vals(n.a) + n.aux;
        double* gprices = gr(n.a) + n.aux;
        wts_backward(prices, x, gz, gprices,
                     gr(n.b) + n.b_index);
        break;
      }
      case Op::WtsFixed: {
        const double gz = g[0];
        if (gz == 0.0) break;
        const double x = values_[static_cast<std::size_t>(node(n.b).off + n.b_index)];
        wts_backward(n.W, x, gz, nullptr, gr(n.b) + n.b_index);
        break;
      }
      case Op::Mul: {
        const double gz = g[0];
        const double va = values_[static_cast<std::size_t>(node(n.a).off + n.a_index)];
        const double vb = values_[static_cast<std::size_t>(node(n.b).off + n.b_index)];
        gr(n.a)[n.a_index] += gz * vb;
        gr(n.b)[n.b_index] += gz * va;
        break;
      }
      case Op::Sub: {
        const double gz = g[0];
        gr(n.a)[n.a_index] += gz;
        gr(n.b)[n.b_index] -= gz;
        break;
      }
      case Op::AddN: {
        const double gz = g[0];
        if (gz == 0.0) break;
        for (std::int32_t j = 0; j < n.aux2; ++j) {
          const ScalarRef r = refs_[static_cast<std::size_t>(n.aux + j)];
          gr(r.node)[r.index] += gz;
        }
        break;
      }
      case Op::MaxN: {
        const double gz = g[0];
        if (gz == 0.0) break;
        const ScalarRef r = refs_[static_cast<std::size_t>(n.aux + n.b_index)];
        gr(r.node)[r.index] += gz;
        break;
      }
      case Op::KthLargest: {
        gr(n.a)[n.b_index] += g[0];
        break;
      }
    }
  }

  // Shared piecewise-linear backward: d/dx is the price of the lot containing
  // x (the completed lot at exact boundaries); d/dprice[t] is lot t's overlap.
  void wts_backward(const double* prices, double x, double gz, double* gprices, double* gx) {
    const AuctionConfig& cfg = *cfg_;
    *gx += gz * prices[lot_of(x, cfg)];
    if (gprices != nullptr) {
      double covered = 0;
      for (int t = 0; t < cfg.k; ++t) {
        const double sz = static_cast<double>(cfg.lot_units(t));
        const double take = std::min(x - covered, sz);
        if (take <= 0) break;
        gprices[t] += gz * take;
        covered += sz;
      }
    }
  }

  const AuctionConfig* cfg_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<ScalarRef> refs_;
  std::vector<std::int32_t> scratch_idx_;
};

}  // namespace vda::neural
