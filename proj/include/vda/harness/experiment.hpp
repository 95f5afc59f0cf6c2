#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vda/core/economics.hpp"
#include "vda/core/mechanism.hpp"
#include "vda/core/rng.hpp"
#include "vda/core/serialize.hpp"
#include "vda/datagen/fixtures.hpp"
#include "vda/datagen/synthetic.hpp"
#include "vda/neural/checkpoint.hpp"
#include "vda/neural/network.hpp"
#include "vda/trainer/regret.hpp"
#include "vda/trainer/train.hpp"
#include "vda/vcg/payments.hpp"

namespace vda::harness {

// The six auction variants: exact VCG (1), VCG with the minimum-winners
// constraint (2), and the learned cost-minimizing mechanism with none/envy/
// business/both constraint sets (3-6).
enum class AuctionType : int {
  Vcg = 1,
  VcgBusiness = 2,
  CostMin = 3,
  CostMinEnvy = 4,
  CostMinBusiness = 5,
  CostMinEnvyBusiness = 6,
};

inline bool is_learned(AuctionType t) { return static_cast<int>(t) >= 3; }

inline trainer::ConstraintSet constraint_set(AuctionType t) {
  switch (t) {
    case AuctionType::CostMinEnvy:
      return trainer::ConstraintSet::Envy;
    case AuctionType::CostMinBusiness:
      return trainer::ConstraintSet::Business;
    case AuctionType::CostMinEnvyBusiness:
      return trainer::ConstraintSet::EnvyBusiness;
    default:
      return trainer::ConstraintSet::None;
  }
}

inline const char* auction_label(AuctionType t) {
  switch (t) {
    case AuctionType::Vcg:
      return "vcg";
    case AuctionType::VcgBusiness:
      return "vcg+business";
    case AuctionType::CostMin:
      return "cost-min";
    case AuctionType::CostMinEnvy:
      return "cost-min+envy";
    case AuctionType::CostMinBusiness:
      return "cost-min+business";
    case AuctionType::CostMinEnvyBusiness:
      return "cost-min+envy+business";
  }
  return "unknown";
}

struct DataSource {
  // "synthetic" uses the inline spec; "chili_a"/"chili_b"/"pesticide" use the
  // built-in case studies; "profile" reads a fixed profile from a file.
  std::string kind = "synthetic";
  datagen::SyntheticSpec spec;
  std::string profile_path;
};

struct EvalConfig {
  int samples = 12000;
  std::uint64_t seed = 9001;
  int regret_samples = 256;  // misreport-search subsample for exact solvers
  std::int64_t granularity = 0;  // 0: lot_size/5 for sampled data, 1 for fixtures
  int rounding = 1;              // report costs to the nearest `rounding` dollars
};

struct ExperimentConfig {
  std::string name;
  std::string scenario;
  AuctionType auction_type = AuctionType::Vcg;
  DataSource data;
  AuctionConfig auction;
  trainer::TrainConfig train;
  EvalConfig eval;
};

// ---------------------------------------------------------------------------
// JSON wire format for experiment configs.
// ---------------------------------------------------------------------------

inline json synthetic_spec_to_json(const datagen::SyntheticSpec& s) {
  return json{{"base_price", s.base_price},
              {"margin_lo", s.margin_lo},
              {"margin_hi", s.margin_hi},
              {"discount_first", s.discount_first},
              {"discount_top", s.discount_top},
              {"min_interval_units", s.min_interval_units},
              {"fixed_segments", s.fixed_segments},
              {"segment_discounts", s.segment_discounts},
              {"n", s.n},
              {"m", s.m},
              {"k", s.k}};
}

inline datagen::SyntheticSpec synthetic_spec_from_json(const json& j) {
  datagen::SyntheticSpec s;
  s.base_price = j.value("base_price", s.base_price);
  s.margin_lo = j.value("margin_lo", s.margin_lo);
  s.margin_hi = j.value("margin_hi", s.margin_hi);
  s.discount_first = j.value("discount_first", s.discount_first);
  s.discount_top = j.value("discount_top", s.discount_top);
  s.min_interval_units = j.value("min_interval_units", s.min_interval_units);
  s.fixed_segments = j.value("fixed_segments", s.fixed_segments);
  s.segment_discounts = j.value("segment_discounts", s.segment_discounts);
  s.n = j.value("n", s.n);
  s.m = j.value("m", s.m);
  s.k = j.value("k", s.k);
  return s;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.name = j.value("name", "experiment");
  cfg.scenario = j.value("scenario", cfg.name);
  const int type = j.at("auction_type").get<int>();
  if (type < 1 || type > 6)
    throw std::invalid_argument("experiment: auction_type must be in 1..6");
  cfg.auction_type = static_cast<AuctionType>(type);

  const json& data = j.at("data");
  cfg.data.kind = data.value("kind", "synthetic");
  if (cfg.data.kind == "synthetic") {
    cfg.data.spec = synthetic_spec_from_json(data);
    cfg.data.spec.validate();
  } else if (cfg.data.kind == "chili_a") {
    cfg.data.spec = datagen::chili_spec('A');
  } else if (cfg.data.kind == "chili_b") {
    cfg.data.spec = datagen::chili_spec('B');
  } else if (cfg.data.kind == "pesticide") {
    // fixed fixture; spec unused
  } else if (cfg.data.kind == "profile") {
    cfg.data.profile_path = data.at("path").get<std::string>();
  } else {
    throw std::invalid_argument("experiment: unknown data kind " + cfg.data.kind);
  }

  // auction geometry comes from the data source
  if (cfg.data.kind == "pesticide") {
    cfg.auction = datagen::pesticide_fixture().second;
  } else if (cfg.data.kind == "profile") {
    cfg.auction.n = j.at("auction").at("n").get<int>();
    cfg.auction.m = j.at("auction").at("m").get<std::int64_t>();
    cfg.auction.k = j.at("auction").at("k").get<int>();
  } else {
    cfg.auction = cfg.data.spec.auction_config();
  }
  if (j.contains("auction")) {
    const json& a = j.at("auction");
    cfg.auction.price_cap = a.value("price_cap", cfg.auction.price_cap);
    cfg.auction.eps_div = a.value("eps_div", cfg.auction.eps_div);
    cfg.auction.rho_regret = a.value("rho_regret", cfg.auction.rho_regret);
    cfg.auction.rho_envy = a.value("rho_envy", cfg.auction.rho_envy);
    cfg.auction.rho_business = a.value("rho_business", cfg.auction.rho_business);
    if (a.contains("business")) {
      BusinessConstraint bc;
      bc.min_winners = a.at("business").at("min_winners").get<int>();
      bc.min_units = a.at("business").at("min_units").get<double>();
      if (a.at("business").contains("max_share"))
        bc.max_share = a.at("business").at("max_share").get<double>();
      cfg.auction.business = bc;
    }
  }
  cfg.auction.validate();

  if (j.contains("train")) {
    const json& t = j.at("train");
    trainer::TrainConfig& tc = cfg.train;
    tc.batch_size = t.value("batch_size", tc.batch_size);
    tc.epochs = t.value("epochs", tc.epochs);
    tc.batches_per_epoch = t.value("batches_per_epoch", tc.batches_per_epoch);
    tc.outer_lr = t.value("outer_lr", tc.outer_lr);
    tc.inner_steps = t.value("inner_steps", tc.inner_steps);
    tc.inner_lr = t.value("inner_lr", tc.inner_lr);
    tc.multiplier_period = t.value("multiplier_period", tc.multiplier_period);
    tc.lambda_lr_initial = t.value("lambda_lr_initial", tc.lambda_lr_initial);
    tc.lambda_lr_growth = t.value("lambda_lr_growth", tc.lambda_lr_growth);
    tc.rho_regret = t.value("rho_regret", tc.rho_regret);
    tc.rho_envy = t.value("rho_envy", tc.rho_envy);
    tc.seed = t.value("seed", tc.seed);
    tc.hidden = t.value("hidden", tc.hidden);
    tc.input_scale = t.value("input_scale", tc.input_scale);
  }
  cfg.train.constraints = constraint_set(cfg.auction_type);

  // derive misreport box and input scale from the sampling distribution
  if (cfg.data.kind != "pesticide" && cfg.data.kind != "profile") {
    if (cfg.train.misreport_lo == 0 && cfg.train.misreport_hi == 0) {
      cfg.train.misreport_lo = cfg.data.spec.price_lo();
      cfg.train.misreport_hi = cfg.data.spec.price_hi();
    }
    if (cfg.train.input_scale == 1.0) cfg.train.input_scale = cfg.data.spec.base_price;
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    cfg.eval.samples = e.value("samples", cfg.eval.samples);
    cfg.eval.seed = e.value("seed", cfg.eval.seed);
    cfg.eval.regret_samples = e.value("regret_samples", cfg.eval.regret_samples);
    cfg.eval.granularity = e.value("granularity", cfg.eval.granularity);
    cfg.eval.rounding = e.value("rounding", cfg.eval.rounding);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Sample streams. Training and evaluation use distinct derived seeds, so the
// two never share a draw.
// ---------------------------------------------------------------------------

struct SampleStream {
  trainer::SampleFn sample;
  bool fixed = false;  // single deterministic instance (case-study fixtures)
};

inline SampleStream make_stream(const ExperimentConfig& cfg) {
  SampleStream stream;
  if (cfg.data.kind == "pesticide") {
    const BidProfile profile = datagen::pesticide_fixture().first;
    stream.sample = [profile](Rng&) { return profile; };
    stream.fixed = true;
  } else if (cfg.data.kind == "profile") {
    const BidProfile profile =
        profile_from_json(json::parse(read_file(cfg.data.profile_path)),
                          cfg.auction.lot_size());
    validate_profile(profile, cfg.auction);
    stream.sample = [profile](Rng&) { return profile; };
    stream.fixed = true;
  } else {
    const datagen::SyntheticSpec spec = cfg.data.spec;
    stream.sample = [spec](Rng& rng) { return datagen::sample_profile(spec, rng); };
  }
  return stream;
}

// Largest divisor of m not exceeding `desired`.
inline std::int64_t pick_granularity(std::int64_t m, std::int64_t desired) {
  for (std::int64_t g = std::max<std::int64_t>(1, std::min(desired, m)); g > 1; --g)
    if (m % g == 0) return g;
  return 1;
}

inline std::int64_t effective_granularity(const ExperimentConfig& cfg) {
  if (cfg.eval.granularity > 0) return cfg.eval.granularity;
  if (cfg.data.kind == "pesticide" || cfg.data.kind == "profile") return 1;
  return pick_granularity(cfg.auction.m, cfg.auction.lot_size() / 5);
}

// The misreport search re-solves the auction for every candidate, so it runs
// on a lot-size grid; with per-lot non-increasing curves the optimum sits on
// lot boundaries anyway.
inline std::int64_t regret_granularity(const ExperimentConfig& cfg) {
  return std::max(effective_granularity(cfg),
                  pick_granularity(cfg.auction.m, cfg.auction.lot_size()));
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

struct EvalReport {
  std::string name;
  std::string scenario;
  int auction_type = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double mean_cost = 0;
  double mean_regret = 0;  // mean over suppliers and samples of the best gain
  double mean_envy = 0;
  double business_satisfaction_rate = 1.0;
  double regret_to_payment_ratio = 0;
  int invariant_violations = 0;
};

inline json eval_report_to_json(const EvalReport& r, int rounding) {
  const double rounded =
      rounding > 0 ? std::round(r.mean_cost / rounding) * rounding : r.mean_cost;
  return json{{"name", r.name},
              {"scenario", r.scenario},
              {"auction_type", r.auction_type},
              {"auction_label", auction_label(static_cast<AuctionType>(r.auction_type))},
              {"samples", r.samples},
              {"seed", r.seed},
              {"mean_cost", r.mean_cost},
              {"mean_cost_rounded", rounded},
              {"mean_regret", r.mean_regret},
              {"mean_envy", r.mean_envy},
              {"business_satisfaction_rate", r.business_satisfaction_rate},
              {"regret_to_payment_ratio", r.regret_to_payment_ratio},
              {"invariant_violations", r.invariant_violations}};
}

// Largest-remainder rounding to integers that sum to m exactly.
inline std::vector<std::int64_t> round_allocation(const Allocation& a, std::int64_t m) {
  const std::size_t n = a.units.size();
  std::vector<std::int64_t> rounded(n);
  std::vector<std::pair<double, std::size_t>> fractions(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rounded[i] = static_cast<std::int64_t>(std::floor(a.units[i]));
    assigned += rounded[i];
    fractions[i] = {a.units[i] - static_cast<double>(rounded[i]), i};
  }
  std::stable_sort(fractions.begin(), fractions.end(),
                   [](const auto& lhs, const auto& rhs) { return lhs.first > rhs.first; });
  for (std::int64_t r = 0; r < m - assigned; ++r)
    rounded[fractions[static_cast<std::size_t>(r) % n].second] += 1;
  return rounded;
}

// Raw and integer-rounded outcome of a learned mechanism on one instance;
// rounded payments reuse the multipliers on the rounded award.
inline std::pair<Outcome, Outcome> rounded_outcome(const neural::MechanismParams& params,
                                                   const BidProfile& profile,
                                                   const AuctionConfig& cfg) {
  Outcome raw = neural::mechanism_outcome(params, profile, cfg);
  const std::vector<double> phat = neural::payment_multipliers(params, profile);
  Outcome rounded;
  const std::vector<std::int64_t> units = round_allocation(raw.allocation, cfg.m);
  rounded.allocation.units.assign(units.begin(), units.end());
  rounded.payments.amounts.resize(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    rounded.payments.amounts[i] =
        phat[i] * wts_eval(profile.curves[i], static_cast<Units>(units[i]), cfg);
  return {std::move(raw), std::move(rounded)};
}

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluate an exact VCG variant over freshly drawn samples.
inline EvalReport evaluate_vcg(const ExperimentConfig& cfg) {
  const bool constrained = cfg.auction_type == AuctionType::VcgBusiness;
  const vcg::VcgMechanism mech(cfg.auction, effective_granularity(cfg), constrained);
  const SampleStream stream = make_stream(cfg);
  Rng rng(derive_seed(cfg.eval.seed, "eval-data"));

  EvalReport report;
  report.name = cfg.name;
  report.scenario = cfg.scenario;
  report.auction_type = static_cast<int>(cfg.auction_type);
  report.samples = stream.fixed ? 1 : cfg.eval.samples;
  report.seed = cfg.eval.seed;

  std::vector<BidProfile> regret_batch;
  const int regret_cap = std::min(cfg.eval.regret_samples, report.samples);
  int satisfied = 0;
  for (int s = 0; s < report.samples; ++s) {
    const BidProfile profile = stream.sample(rng);
    const Outcome o = mech.run(profile);
    validate_outcome(o, cfg.auction, 0.0);
    report.mean_cost += total_cost(o.payments);
    const std::vector<Money> e = envy_all(profile, o, cfg.auction);
    for (const Money v : e) report.mean_envy += v;
    if (cfg.auction.business) {
      const Units as = kth_highest_allocation(o.allocation, cfg.auction.business->min_winners);
      if (as >= cfg.auction.business->min_units) ++satisfied;
    } else {
      ++satisfied;
    }
    if (static_cast<int>(regret_batch.size()) < regret_cap) regret_batch.push_back(profile);
  }
  report.mean_cost /= report.samples;
  report.mean_envy /= static_cast<double>(report.samples) * cfg.auction.n;
  report.business_satisfaction_rate = static_cast<double>(satisfied) / report.samples;

  double regret_sum = 0;
  trainer::MisreportGrid grid;
  grid.per_lot = cfg.auction.k <= 12;
  const vcg::VcgMechanism regret_mech(cfg.auction, regret_granularity(cfg), constrained);
  for (int i = 0; i < cfg.auction.n; ++i)
    regret_sum += trainer::grid_regret(regret_mech, regret_batch, i, cfg.auction, grid).mean_gain;
  report.mean_regret = regret_sum / cfg.auction.n;
  const double mean_payment = report.mean_cost / cfg.auction.n;
  report.regret_to_payment_ratio = mean_payment > 0 ? report.mean_regret / mean_payment : 0;
  return report;
}

// Evaluate a trained mechanism over freshly drawn samples, enforcing the
// architecture invariants on every single one.
inline EvalReport evaluate_learned(const ExperimentConfig& cfg,
                                   const neural::MechanismParams& params) {
  const SampleStream stream = make_stream(cfg);
  Rng rng(derive_seed(cfg.eval.seed, "eval-data"));

  EvalReport report;
  report.name = cfg.name;
  report.scenario = cfg.scenario;
  report.auction_type = static_cast<int>(cfg.auction_type);
  report.samples = stream.fixed ? 1 : cfg.eval.samples;
  report.seed = cfg.eval.seed;

  std::vector<BidProfile> batch;
  batch.reserve(static_cast<std::size_t>(report.samples));
  int satisfied = 0;
  for (int s = 0; s < report.samples; ++s) {
    batch.push_back(stream.sample(rng));
    const BidProfile& profile = batch.back();
    const Outcome o = neural::mechanism_outcome(params, profile, cfg.auction);

    // architecture invariants, checked sample by sample
    double sum = 0;
    for (const double u : o.allocation.units) sum += u;
    if (std::abs(sum - static_cast<double>(cfg.auction.m)) >
        1e-6 * static_cast<double>(cfg.auction.m))
      throw InvariantError("allocation sum violates conservation");
    const std::vector<double> phat = neural::payment_multipliers(params, profile);
    for (const double v : phat)
      if (!(v > 1.0 && v < 2.0)) throw InvariantError("payment multiplier left (1,2)");
    for (int i = 0; i < cfg.auction.n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const Money w = wts_eval(profile.curves[si], o.allocation.units[si], cfg.auction);
      if (o.payments.amounts[si] < w) throw InvariantError("payment below reported WTS");
    }

    report.mean_cost += total_cost(o.payments);
    const std::vector<Money> e = envy_all(profile, o, cfg.auction);
    for (const Money v : e) report.mean_envy += v;
    if (cfg.auction.business) {
      const Units as = kth_highest_allocation(o.allocation, cfg.auction.business->min_winners);
      if (as >= cfg.auction.business->min_units) ++satisfied;
    } else {
      ++satisfied;
    }
  }
  report.mean_cost /= report.samples;
  report.mean_envy /= static_cast<double>(report.samples) * cfg.auction.n;
  report.business_satisfaction_rate = static_cast<double>(satisfied) / report.samples;

  neural::Tape tape;
  const trainer::InnerOptConfig inner = cfg.train.loss_config().inner;
  double regret_sum = 0;
  for (int i = 0; i < cfg.auction.n; ++i)
    regret_sum +=
        trainer::empirical_regret(params, batch, i, cfg.auction, inner, tape).mean_gain;
  report.mean_regret = regret_sum / cfg.auction.n;
  const double mean_payment = report.mean_cost / cfg.auction.n;
  report.regret_to_payment_ratio = mean_payment > 0 ? report.mean_regret / mean_payment : 0;
  return report;
}

// Train the learned variant described by the config.
inline trainer::TrainResult train_experiment(const ExperimentConfig& cfg,
                                             std::ostream* log_sink = nullptr,
                                             const trainer::CheckpointFn& on_epoch = nullptr) {
  if (!is_learned(cfg.auction_type))
    throw std::invalid_argument("train_experiment: auction types 1-2 need no training");
  const SampleStream stream = make_stream(cfg);
  return trainer::train(stream.sample, cfg.train, cfg.auction, log_sink, nullptr, on_epoch);
}

// One-call experiment runner; learned auctions need trained parameters.
inline EvalReport run_experiment(const ExperimentConfig& cfg,
                                 const neural::MechanismParams* params = nullptr) {
  if (is_learned(cfg.auction_type)) {
    if (params == nullptr)
      throw std::invalid_argument(
          "run_experiment: auction type " + std::to_string(static_cast<int>(cfg.auction_type)) +
          " needs a trained checkpoint");
    return evaluate_learned(cfg, *params);
  }
  return evaluate_vcg(cfg);
}

}  // namespace vda::harness
