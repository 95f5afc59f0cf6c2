#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vda/core/rng.hpp"
#include "vda/core/types.hpp"
#include "vda/neural/adam.hpp"
#include "vda/neural/network.hpp"
#include "vda/neural/tape.hpp"
#include "vda/trainer/loss.hpp"
#include "vda/trainer/regret.hpp"

namespace vda::trainer {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 200;
  int batches_per_epoch = 8;
  double outer_lr = 1e-3;
  int inner_steps = 25;
  double inner_lr = 2e-4;

  // Lagrange multiplier ascent: every `multiplier_period` epochs with a
  // linearly ramping learning rate.
  int multiplier_period = 3;
  double lambda_lr_initial = 0.01;
  double lambda_lr_growth = 0.25;

  double rho_regret = 5.0;
  double rho_envy = 5.0;

  ConstraintSet constraints = ConstraintSet::None;
  std::uint64_t seed = 1;
  Money misreport_lo = 0;
  Money misreport_hi = 0;

  std::vector<int> hidden = {64, 64, 64, 64};
  double input_scale = 1.0;

  void validate() const {
    if (batch_size < 1 || epochs < 1 || batches_per_epoch < 1)
      throw std::invalid_argument("TrainConfig: batch/epoch counts must be positive");
    if (inner_steps < 1) throw std::invalid_argument("TrainConfig: inner_steps must be >= 1");
    if (multiplier_period < 2 || multiplier_period > 4)
      throw std::invalid_argument("TrainConfig: multiplier_period must be 2, 3 or 4");
    if (!(outer_lr > 0) || !(inner_lr > 0) || !(lambda_lr_initial > 0))
      throw std::invalid_argument("TrainConfig: learning rates must be positive");
    if (lambda_lr_growth < 0)
      throw std::invalid_argument("TrainConfig: lambda_lr_growth must be >= 0");
    if (!(misreport_hi > misreport_lo))
      throw std::invalid_argument("TrainConfig: misreport box is empty");
    if (rho_regret < 0 || rho_envy < 0)
      throw std::invalid_argument("TrainConfig: penalty weights must be >= 0");
  }

  LossConfig loss_config() const {
    LossConfig lc;
    lc.rho_regret = rho_regret;
    lc.rho_envy = rho_envy;
    lc.inner = InnerOptConfig{inner_steps, inner_lr, misreport_lo, misreport_hi};
    return lc;
  }
};

// Ramping multiplier step size for the u-th ascent (0-based); non-decreasing
// in u by construction.
inline double lambda_lr_at(const TrainConfig& tc, int ascent_index) {
  return tc.lambda_lr_initial * (1.0 + tc.lambda_lr_growth * ascent_index);
}

// Differential-multiplier ascent: each multiplier climbs proportionally to
// its constraint's current violation and never drops below zero.
inline void multiplier_ascent(neural::MechanismParams& params, std::span<const double> mean_regret,
                              std::span<const double> mean_envy, double lr_lambda) {
  for (std::size_t i = 0; i < params.lambda_regret.size(); ++i)
    params.lambda_regret[i] = std::max(0.0, params.lambda_regret[i] + lr_lambda * mean_regret[i]);
  for (std::size_t i = 0; i < params.lambda_envy.size(); ++i)
    params.lambda_envy[i] = std::max(0.0, params.lambda_envy[i] + lr_lambda * mean_envy[i]);
}

struct EpochRecord {
  int epoch = 0;
  double loss = 0;
  double mean_cost = 0;
  double mean_regret = 0;  // mean over suppliers of r~_i
  double mean_envy = 0;
  double business_violation_rate = 0;
  double lambda_regret_norm = 0;
  double lambda_envy_norm = 0;
  double lambda_lr = 0;

  bool operator==(const EpochRecord&) const = default;
};

inline nlohmann::json epoch_record_to_json(const EpochRecord& r) {
  return nlohmann::json{{"epoch", r.epoch},
                        {"loss", r.loss},
                        {"mean_cost", r.mean_cost},
                        {"mean_regret", r.mean_regret},
                        {"mean_envy", r.mean_envy},
                        {"business_violation_rate", r.business_violation_rate},
                        {"lambda_regret_norm", r.lambda_regret_norm},
                        {"lambda_envy_norm", r.lambda_envy_norm},
                        {"lambda_lr", r.lambda_lr}};
}

using SampleFn = std::function<BidProfile(Rng&)>;
using CheckpointFn =
    std::function<void(int epoch, const neural::MechanismParams&, const neural::AdamState&,
                       const neural::AdamState&)>;

struct TrainResult {
  neural::MechanismParams params;
  std::vector<EpochRecord> log;
  neural::AdamState adam_alloc;
  neural::AdamState adam_pay;
  std::vector<std::uint64_t> sample_hashes;  // every training draw, in order
};

// Nested training loop: one Adam step on the network weights per batch (with
// R misreport-ascent steps per supplier inside the loss), and periodic ascent
// on the Lagrange multipliers. Deterministic for a fixed config and seed.
inline TrainResult train(const SampleFn& sample, const TrainConfig& tc, const AuctionConfig& cfg,
                         std::ostream* log_sink = nullptr,
                         const neural::MechanismParams* warm_start = nullptr,
                         const CheckpointFn& on_epoch_end = nullptr) {
  tc.validate();
  cfg.validate();
  if (business_active(tc.constraints) && !cfg.business)
    throw std::invalid_argument("train: business constraints enabled without a constraint");

  const neural::MechanismSpec spec = neural::MechanismSpec::standard(cfg, tc.hidden, tc.input_scale);
  TrainResult result;
  result.params = warm_start != nullptr ? *warm_start
                                        : neural::MechanismParams::init(spec, cfg, tc.seed);
  result.adam_alloc = neural::AdamState(result.params.alloc.params.size());
  result.adam_pay = neural::AdamState(result.params.pay.params.size());

  Rng data_rng(derive_seed(tc.seed, "train-data"));
  neural::Tape tape;
  const LossConfig lcfg = tc.loss_config();

  // Violation means accumulated since the last multiplier update.
  std::vector<double> window_regret(static_cast<std::size_t>(cfg.n), 0.0);
  std::vector<double> window_envy(static_cast<std::size_t>(cfg.n), 0.0);
  int window_batches = 0;
  int ascents = 0;

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    for (int b = 0; b < tc.batches_per_epoch; ++b) {
      std::vector<BidProfile> batch;
      batch.reserve(static_cast<std::size_t>(tc.batch_size));
      for (int s = 0; s < tc.batch_size; ++s) {
        batch.push_back(sample(data_rng));
        result.sample_hashes.push_back(hash_profile(batch.back()));
      }
      const LossResult loss =
          compute_loss(result.params, batch, tc.constraints, lcfg, cfg, tape);
      if (!std::isfinite(loss.terms.total))
        throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                 std::to_string(epoch));

      neural::adam_step(result.params.alloc.params, loss.grads.alloc, result.adam_alloc,
                        tc.outer_lr);
      neural::adam_step(result.params.pay.params, loss.grads.pay, result.adam_pay, tc.outer_lr);

      record.loss += loss.terms.total;
      record.mean_cost += loss.terms.mean_cost;
      record.business_violation_rate += loss.terms.business_violation_rate;
      double r = 0, e = 0;
      for (int i = 0; i < cfg.n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        r += loss.terms.regret[si];
        e += loss.terms.mean_envy[si];
        window_regret[si] += loss.terms.regret[si];
        window_envy[si] += loss.terms.mean_envy[si];
      }
      record.mean_regret += r / cfg.n;
      record.mean_envy += e / cfg.n;
      ++window_batches;
    }

    const double inv = 1.0 / tc.batches_per_epoch;
    record.loss *= inv;
    record.mean_cost *= inv;
    record.mean_regret *= inv;
    record.mean_envy *= inv;
    record.business_violation_rate *= inv;
    record.lambda_lr = lambda_lr_at(tc, ascents);

    if (epoch % tc.multiplier_period == 0 && window_batches > 0) {
      std::vector<double> mean_r(window_regret), mean_e(window_envy);
      for (double& v : mean_r) v /= window_batches;
      for (double& v : mean_e) v /= window_batches;
      multiplier_ascent(result.params, mean_r, mean_e, lambda_lr_at(tc, ascents));
      ++ascents;
      std::fill(window_regret.begin(), window_regret.end(), 0.0);
      std::fill(window_envy.begin(), window_envy.end(), 0.0);
      window_batches = 0;
    }

    for (const double l : result.params.lambda_regret)
      record.lambda_regret_norm += l * l;
    record.lambda_regret_norm = std::sqrt(record.lambda_regret_norm);
    for (const double l : result.params.lambda_envy) record.lambda_envy_norm += l * l;
    record.lambda_envy_norm = std::sqrt(record.lambda_envy_norm);

    result.log.push_back(record);
    if (log_sink != nullptr) *log_sink << epoch_record_to_json(record).dump() << "\n";
    if (on_epoch_end) on_epoch_end(epoch, result.params, result.adam_alloc, result.adam_pay);
  }
  return result;
}

}  // namespace vda::trainer
