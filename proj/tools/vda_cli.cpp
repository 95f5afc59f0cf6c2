// Command-line front end: sample generation, exact VCG solving, training,
// evaluation and cost-table reporting for volume-discount procurement
// auctions. Exits nonzero on any error or invariant violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vda/core/serialize.hpp"
#include "vda/harness/experiment.hpp"
#include "vda/harness/report.hpp"
#include "vda/neural/checkpoint.hpp"
#include "vda/vcg/payments.hpp"

using vda::json;

namespace {

vda::harness::ExperimentConfig load_config(const std::string& path) {
  return vda::harness::experiment_from_json(json::parse(vda::read_file(path)));
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    vda::write_file(out_path, j.dump(2) + "\n");
}

int cmd_generate(const std::string& config_path, int samples, std::uint64_t seed,
                 const std::string& out_path) {
  const vda::harness::ExperimentConfig cfg = load_config(config_path);
  const vda::harness::SampleStream stream = vda::harness::make_stream(cfg);
  vda::Rng rng(vda::derive_seed(seed, "generate"));
  json profiles = json::array();
  for (int s = 0; s < samples; ++s)
    profiles.push_back(vda::profile_to_json(stream.sample(rng), cfg.auction));
  emit(json{{"scenario", cfg.scenario}, {"seed", seed}, {"profiles", profiles}}, out_path);
  return 0;
}

int cmd_vcg(const std::string& profile_path, std::int64_t m, std::int64_t lot_size,
            std::int64_t granularity, std::optional<int> min_winners,
            std::optional<double> min_units, std::optional<double> max_share, double price_cap,
            const std::string& out_path) {
  vda::BidProfile profile;
  vda::AuctionConfig cfg;
  cfg.m = m;
  cfg.price_cap = price_cap;

  const bool interval_text = profile_path.ends_with(".txt") || profile_path.ends_with(".intervals");
  if (interval_text) {
    if (lot_size <= 0)
      throw std::invalid_argument("--lot-size is required for interval-form profiles");
    cfg.k = static_cast<int>(m / lot_size);
    cfg.n = 1;  // provisional; fixed below
    vda::AuctionConfig parse_cfg = cfg;
    parse_cfg.validate();
    profile = vda::profile_from_interval_text(vda::read_file(profile_path), parse_cfg);
  } else {
    const json j = json::parse(vda::read_file(profile_path));
    profile = vda::profile_from_json(j.is_array() ? j : j.at("profiles").at(0));
    if (profile.curves.empty()) throw std::invalid_argument("profile file holds no curves");
    cfg.k = profile.curves.front().lots();
    const std::int64_t file_lot = j.is_array() && j.at(0).contains("lot_size")
                                      ? j.at(0).at("lot_size").get<std::int64_t>()
                                      : m / cfg.k;
    if (file_lot != m / cfg.k)
      throw std::invalid_argument("profile lot_size disagrees with --m and the curve length");
  }
  cfg.n = profile.suppliers();
  if (min_winners || min_units) {
    vda::BusinessConstraint bc;
    bc.min_winners = min_winners.value_or(1);
    bc.min_units = min_units.value_or(0.0);
    bc.max_share = max_share;
    cfg.business = bc;
  }
  cfg.validate();
  vda::validate_profile(profile, cfg);

  const std::int64_t g = granularity > 0 ? granularity : 1;
  const bool constrained = cfg.business.has_value();
  const vda::vcg::WinnerDeterminationResult wd =
      constrained ? vda::vcg::solve_wd_constrained(profile, cfg, g)
                  : vda::vcg::solve_wd(profile, cfg, g);
  vda::Outcome outcome;
  outcome.allocation.units.assign(wd.units.begin(), wd.units.end());
  outcome.payments = vda::vcg::vcg_payments(profile, cfg, wd, g, constrained);
  vda::validate_outcome(outcome, cfg, 0.0);

  json j = vda::outcome_to_json(outcome);
  j["objective"] = wd.objective;
  j["granularity"] = g;
  emit(j, out_path);
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& checkpoint_path,
              const std::string& log_path, std::optional<std::uint64_t> seed_override,
              std::optional<int> epochs_override, int checkpoint_period) {
  vda::harness::ExperimentConfig cfg = load_config(config_path);
  if (!vda::harness::is_learned(cfg.auction_type))
    throw std::invalid_argument("auction types 1-2 are exact solvers; nothing to train");
  if (seed_override) cfg.train.seed = *seed_override;
  if (epochs_override) cfg.train.epochs = *epochs_override;

  std::ofstream log_stream;
  std::ostream* sink = nullptr;
  if (!log_path.empty()) {
    log_stream.open(log_path, std::ios::binary);
    if (!log_stream) throw std::runtime_error("cannot open log file " + log_path);
    sink = &log_stream;
  }

  vda::trainer::CheckpointFn periodic;
  if (checkpoint_period > 0 && !checkpoint_path.empty()) {
    periodic = [&](int epoch, const vda::neural::MechanismParams& params,
                   const vda::neural::AdamState& a, const vda::neural::AdamState& p) {
      if (epoch % checkpoint_period != 0) return;
      vda::neural::Checkpoint ck{params, a, p, cfg.train.seed};
      vda::neural::save_checkpoint(checkpoint_path + ".epoch" + std::to_string(epoch), ck,
                                   cfg.auction);
    };
  }

  const vda::trainer::TrainResult result =
      vda::harness::train_experiment(cfg, sink, periodic);
  if (!checkpoint_path.empty()) {
    vda::neural::Checkpoint ck{result.params, result.adam_alloc, result.adam_pay, cfg.train.seed};
    vda::neural::save_checkpoint(checkpoint_path, ck, cfg.auction);
  }
  const vda::trainer::EpochRecord& last = result.log.back();
  std::cerr << "trained " << cfg.name << ": mean_cost=" << last.mean_cost
            << " mean_regret=" << last.mean_regret << " mean_envy=" << last.mean_envy << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_path,
                 std::optional<int> samples, std::optional<std::uint64_t> seed,
                 const std::string& out_path, bool show_rounded) {
  vda::harness::ExperimentConfig cfg = load_config(config_path);
  if (samples) cfg.eval.samples = *samples;
  if (seed) cfg.eval.seed = *seed;

  vda::harness::EvalReport report;
  std::optional<vda::neural::MechanismParams> params;
  if (vda::harness::is_learned(cfg.auction_type)) {
    if (checkpoint_path.empty())
      throw std::invalid_argument("auction type " +
                                  std::to_string(static_cast<int>(cfg.auction_type)) +
                                  " needs --checkpoint");
    params = vda::neural::load_checkpoint(checkpoint_path, cfg.auction).params;
    report = vda::harness::evaluate_learned(cfg, *params);
  } else {
    report = vda::harness::evaluate_vcg(cfg);
  }

  json j = vda::harness::eval_report_to_json(report, cfg.eval.rounding);
  if (show_rounded && params) {
    const vda::harness::SampleStream stream = vda::harness::make_stream(cfg);
    vda::Rng rng(vda::derive_seed(cfg.eval.seed, "eval-data"));
    const vda::BidProfile profile = stream.sample(rng);
    const auto [raw, rounded] = vda::harness::rounded_outcome(*params, profile, cfg.auction);
    j["example_outcome"] = {{"raw", vda::outcome_to_json(raw)},
                            {"rounded", vda::outcome_to_json(rounded)}};
  }
  emit(j, out_path);
  return 0;
}

int cmd_report(const std::vector<std::string>& result_paths, int rounding,
               const std::string& out_path) {
  vda::harness::ReportTable table;
  for (const std::string& path : result_paths) {
    const json j = json::parse(vda::read_file(path));
    vda::harness::EvalReport r;
    r.name = j.value("name", "");
    r.scenario = j.value("scenario", "");
    r.auction_type = j.at("auction_type").get<int>();
    r.mean_cost = j.at("mean_cost").get<double>();
    table.add(r, rounding);
  }
  if (out_path.empty())
    std::cout << table.text();
  else
    vda::write_file(out_path, table.csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volume-discount procurement auction toolkit"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "sample bid profiles from a scenario");
  std::string gen_config, gen_out;
  int gen_samples = 10;
  std::uint64_t gen_seed = 1;
  generate->add_option("--config", gen_config, "experiment config JSON")->required();
  generate->add_option("--samples", gen_samples, "number of profiles");
  generate->add_option("--seed", gen_seed, "rng seed");
  generate->add_option("--out", gen_out, "output file (stdout if omitted)");

  auto* vcg = app.add_subcommand("vcg", "exact VCG outcome for a bid profile");
  std::string vcg_profile, vcg_out;
  std::int64_t vcg_m = 0, vcg_lot = 0, vcg_g = 0;
  std::optional<int> vcg_s;
  std::optional<double> vcg_amin, vcg_share;
  double vcg_cap = 1e6;
  vcg->add_option("--profile", vcg_profile, "profile JSON or interval-form text")->required();
  vcg->add_option("--m", vcg_m, "units demanded")->required();
  vcg->add_option("--lot-size", vcg_lot, "lot size (interval-form profiles)");
  vcg->add_option("--granularity", vcg_g, "allocation grid step (default 1)");
  vcg->add_option("--min-winners", vcg_s, "business constraint: minimum winners");
  vcg->add_option("--min-units", vcg_amin, "business constraint: units per counted winner");
  vcg->add_option("--max-share", vcg_share, "business constraint: max fraction per supplier");
  vcg->add_option("--price-cap", vcg_cap, "finite stand-in for unavailable lots");
  vcg->add_option("--out", vcg_out, "output file (stdout if omitted)");

  auto* train = app.add_subcommand("train", "train a learned auction variant");
  std::string train_config, train_ck, train_log;
  std::optional<std::uint64_t> train_seed;
  std::optional<int> train_epochs;
  int train_ck_period = 0;
  train->add_option("--config", train_config, "experiment config JSON")->required();
  train->add_option("--checkpoint", train_ck, "checkpoint output path")->required();
  train->add_option("--log", train_log, "training log (newline-delimited JSON)");
  train->add_option("--seed", train_seed, "override the training seed");
  train->add_option("--epochs", train_epochs, "override the epoch count");
  train->add_option("--checkpoint-period", train_ck_period,
                    "also write a checkpoint every N epochs");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate an auction over fresh samples");
  std::string eval_config, eval_ck, eval_out;
  std::optional<int> eval_samples;
  std::optional<std::uint64_t> eval_seed;
  bool eval_rounded = false;
  evaluate->add_option("--config", eval_config, "experiment config JSON")->required();
  evaluate->add_option("--checkpoint", eval_ck, "trained checkpoint (auction types 3-6)");
  evaluate->add_option("--samples", eval_samples, "evaluation sample count");
  evaluate->add_option("--seed", eval_seed, "evaluation seed");
  evaluate->add_option("--out", eval_out, "output file (stdout if omitted)");
  evaluate->add_flag("--rounded", eval_rounded,
                     "include an integer-rounded example outcome");

  auto* report = app.add_subcommand("report", "assemble a cost table from result files");
  std::vector<std::string> report_inputs;
  std::string report_out;
  int report_rounding = 1;
  report->add_option("results", report_inputs, "evaluation result JSON files")->required();
  report->add_option("--out", report_out, "CSV output (stdout table if omitted)");
  report->add_option("--rounding", report_rounding, "round costs to the nearest amount");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(gen_config, gen_samples, gen_seed, gen_out);
    if (vcg->parsed())
      return cmd_vcg(vcg_profile, vcg_m, vcg_lot, vcg_g, vcg_s, vcg_amin, vcg_share, vcg_cap,
                     vcg_out);
    if (train->parsed())
      return cmd_train(train_config, train_ck, train_log, train_seed, train_epochs,
                       train_ck_period);
    if (evaluate->parsed())
      return cmd_evaluate(eval_config, eval_ck, eval_samples, eval_seed, eval_out, eval_rounded);
    if (report->parsed()) return cmd_report(report_inputs, report_rounding, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
