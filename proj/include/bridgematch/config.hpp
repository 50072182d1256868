// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text and JSON forms of TrainConfig.
//
// The config file is line-oriented `key = value` text; `#` starts a comment.
// Keys (all optional, defaults materialized otherwise):
//
//   data.source / data.target            gaussian | moons | mixture | checkerboard
//   data.<side>.mean, data.<side>.std    "x, y"            (gaussian)
//   data.<side>.noise                    real              (moons)
//   data.<side>.means                    "x, y; x, y; ..." (mixture)
//   data.<side>.component_std            real              (mixture)
//   data.<side>.scale                    real              (checkerboard)
//   target.kind                          cfm_linear | cfm_diffusion | cbm_linear |
//                                        cbm_diffusion | mbm_linear | mbm_diffusion
//   target.beta_impl, target.sigma_min, target.t_eps
//   target.kde_bandwidth                 median | <real>
//   schedule.kind                        vp | trig   (diffusion kinds)
//   schedule.beta_min, schedule.beta_max
//   train.batch_size, train.iterations, train.hidden, train.lambda_d, train.seed,
//   train.log_interval, train.lr, train.beta1, train.beta2, train.eps,
//   train.weight_decay
//
// Setting target.kind resets beta_impl and sigma_min to that kind's defaults
// unless the same map also sets them.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bridgematch/training.hpp"

namespace bm {

using Json = nlohmann::ordered_json;
using ConfigMap = std::map<std::string, std::string>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ConfigMap parse_config(std::string_view text);
ConfigMap read_config_file(const std::filesystem::path& path);
/// Parses "key=value"; throws ConfigError without an '='.
std::pair<std::string, std::string> parse_assignment(std::string_view text);

/// Applies `values` on top of `cfg`. Unknown keys and bad values throw ConfigError.
void apply_config(TrainConfig& cfg, const ConfigMap& values);
TrainConfig load_train_config(const std::filesystem::path& path);
/// Every key, fully materialized; parse_config + apply_config restores `cfg` exactly.
std::string to_config_text(const TrainConfig& cfg);

Json to_json(const DatasetSpec& spec);
Json to_json(const TargetSpec& spec);
Json to_json(const TrainConfig& cfg);
DatasetSpec dataset_spec_from_json(const Json& j);
TargetSpec target_spec_from_json(const Json& j);
TrainConfig train_config_from_json(const Json& j);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace bm
