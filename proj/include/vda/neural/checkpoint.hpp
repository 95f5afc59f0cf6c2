#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "vda/core/rng.hpp"
#include "vda/core/serialize.hpp"
#include "vda/core/types.hpp"
#include "vda/neural/adam.hpp"
#include "vda/neural/network.hpp"

namespace vda::neural {

// Hash binding a checkpoint to the auction geometry and network shapes it was
// trained for; loading against anything else is an error.
inline std::uint64_t config_hash(const AuctionConfig& cfg, const MechanismSpec& spec) {
  std::ostringstream ss;
  ss << "n=" << cfg.n << ";m=" << cfg.m << ";k=" << cfg.k << ";cap=" << cfg.price_cap;
  if (cfg.business) {
    ss << ";s=" << cfg.business->min_winners << ";amin=" << cfg.business->min_units;
    if (cfg.business->max_share) ss << ";share=" << *cfg.business->max_share;
  }
  auto net = [&ss](const MlpSpec& m) {
    ss << "|" << m.input_dim;
    for (const int h : m.hidden) ss << "," << h;
    ss << "," << m.output_dim << ",a" << static_cast<int>(m.activation) << ",h"
       << static_cast<int>(m.head);
  };
  net(spec.alloc);
  net(spec.pay);
  ss << "|scale=" << spec.input_scale;
  const std::string s = ss.str();
  return fnv1a(s.data(), s.size());
}

namespace detail {

inline json mlp_spec_to_json(const MlpSpec& spec) {
  return json{{"input_dim", spec.input_dim},
              {"hidden", spec.hidden},
              {"output_dim", spec.output_dim},
              {"activation", spec.activation == Activation::Tanh ? "tanh" : "identity"},
              {"head", spec.head == HeadKind::SoftmaxScaled ? "softmax_scaled"
                                                            : "sigmoid_plus_one"}};
}

inline MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.output_dim = j.at("output_dim").get<int>();
  const std::string act = j.at("activation").get<std::string>();
  if (act == "tanh")
    spec.activation = Activation::Tanh;
  else if (act == "identity")
    spec.activation = Activation::Identity;
  else
    throw std::invalid_argument("checkpoint: unknown activation " + act);
  const std::string head = j.at("head").get<std::string>();
  if (head == "softmax_scaled")
    spec.head = HeadKind::SoftmaxScaled;
  else if (head == "sigmoid_plus_one")
    spec.head = HeadKind::SigmoidPlusOne;
  else
    throw std::invalid_argument("checkpoint: unknown head " + head);
  spec.validate();
  return spec;
}

inline json adam_to_json(const AdamState& a) {
  return json{{"m", a.m}, {"v", a.v}, {"t", a.t}};
}

inline AdamState adam_from_json(const json& j) {
  AdamState a;
  a.m = j.at("m").get<std::vector<double>>();
  a.v = j.at("v").get<std::vector<double>>();
  a.t = j.at("t").get<std::int64_t>();
  return a;
}

}  // namespace detail

struct Checkpoint {
  MechanismParams params;
  AdamState adam_alloc;
  AdamState adam_pay;
  std::uint64_t rng_seed = 0;
};

inline json checkpoint_to_json(const Checkpoint& ck, const AuctionConfig& cfg) {
  json j;
  j["format"] = "vda-checkpoint-v1";
  j["config_hash"] = config_hash(cfg, ck.params.spec);
  j["spec"] = {{"alloc", detail::mlp_spec_to_json(ck.params.spec.alloc)},
               {"pay", detail::mlp_spec_to_json(ck.params.spec.pay)},
               {"input_scale", ck.params.spec.input_scale}};
  j["alloc_params"] = ck.params.alloc.params;  // row-major [W | b] per layer
  j["pay_params"] = ck.params.pay.params;
  j["lambda_regret"] = ck.params.lambda_regret;
  j["lambda_envy"] = ck.params.lambda_envy;
  j["adam"] = {{"alloc", detail::adam_to_json(ck.adam_alloc)},
               {"pay", detail::adam_to_json(ck.adam_pay)}};
  j["rng_seed"] = ck.rng_seed;
  return j;
}

inline Checkpoint checkpoint_from_json(const json& j, const AuctionConfig& cfg) {
  if (j.value("format", "") != std::string("vda-checkpoint-v1"))
    throw std::invalid_argument("checkpoint: unknown format");
  Checkpoint ck;
  ck.params.spec.alloc = detail::mlp_spec_from_json(j.at("spec").at("alloc"));
  ck.params.spec.pay = detail::mlp_spec_from_json(j.at("spec").at("pay"));
  ck.params.spec.input_scale = j.at("spec").at("input_scale").get<double>();
  const std::uint64_t expected = config_hash(cfg, ck.params.spec);
  const std::uint64_t stored = j.at("config_hash").get<std::uint64_t>();
  if (stored != expected)
    throw std::invalid_argument(
        "checkpoint: config hash mismatch (checkpoint was trained for a different setup)");
  ck.params.alloc = Mlp(ck.params.spec.alloc);
  ck.params.pay = Mlp(ck.params.spec.pay);
  ck.params.alloc.params = j.at("alloc_params").get<std::vector<double>>();
  ck.params.pay.params = j.at("pay_params").get<std::vector<double>>();
  if (ck.params.alloc.params.size() != ck.params.spec.alloc.param_count() ||
      ck.params.pay.params.size() != ck.params.spec.pay.param_count())
    throw std::invalid_argument("checkpoint: parameter blob size mismatch");
  ck.params.lambda_regret = j.at("lambda_regret").get<std::vector<double>>();
  ck.params.lambda_envy = j.at("lambda_envy").get<std::vector<double>>();
  ck.adam_alloc = detail::adam_from_json(j.at("adam").at("alloc"));
  ck.adam_pay = detail::adam_from_json(j.at("adam").at("pay"));
  ck.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck,
                            const AuctionConfig& cfg) {
  write_file(path, checkpoint_to_json(ck, cfg).dump(2));
}

inline Checkpoint load_checkpoint(const std::string& path, const AuctionConfig& cfg) {
  return checkpoint_from_json(json::parse(read_file(path)), cfg);
}

}  // namespace vda::neural
