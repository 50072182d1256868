// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace bm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t parse_u64(std::string_view text, const std::string& key) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

double parse_real(std::string_view text, const std::string& key) {
  try {
    return parse_double(text);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a real number, got '" + std::string(text) + "'");
  }
}

std::array<double, 2> parse_pair(std::string_view text, const std::string& key) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError(key + ": expected 'x, y'");
  return {parse_real(parts[0], key), parse_real(parts[1], key)};
}

std::string format_pair(const std::array<double, 2>& p) {
  return format_double(p[0]) + ", " + format_double(p[1]);
}

std::string format_means(const std::vector<std::array<double, 2>>& means) {
  std::string out;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (i) out += "; ";
    out += format_pair(means[i]);
  }
  return out;
}

/// Applies one data.<side>.* sub-key. Returns false if the sub-key is unknown.
bool apply_dataset_key(DatasetSpec& spec, std::string_view sub, const std::string& value,
                       const std::string& key) {
  if (sub == "mean") {
    spec.mean = parse_pair(value, key);
  } else if (sub == "std") {
    spec.std = parse_pair(value, key);
  } else if (sub == "noise") {
    spec.noise = parse_real(value, key);
  } else if (sub == "means") {
    spec.component_means.clear();
    for (auto part : split(value, ';')) {
      if (!part.empty()) spec.component_means.push_back(parse_pair(part, key));
    }
  } else if (sub == "component_std") {
    spec.component_std = parse_real(value, key);
  } else if (sub == "scale") {
    spec.scale = parse_real(value, key);
  } else {
    return false;
  }
  return true;
}

void dataset_lines(std::ostringstream& os, const std::string& side, const DatasetSpec& s) {
  os << "data." << side << " = " << to_string(s.kind) << "\n";
  os << "data." << side << ".mean = " << format_pair(s.mean) << "\n";
  os << "data." << side << ".std = " << format_pair(s.std) << "\n";
  os << "data." << side << ".noise = " << format_double(s.noise) << "\n";
  os << "data." << side << ".means = " << format_means(s.component_means) << "\n";
  os << "data." << side << ".component_std = " << format_double(s.component_std) << "\n";
  os << "data." << side << ".scale = " << format_double(s.scale) << "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::pair<std::string, std::string> parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(text) + "'");
  }
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

void apply_config(TrainConfig& cfg, const ConfigMap& values) {
  if (const auto it = values.find("target.kind"); it != values.end()) {
    const TargetSpec defaults = TargetSpec::defaults(parse_target_kind(it->second));
    cfg.target_spec.kind = defaults.kind;
    cfg.target_spec.beta_impl = defaults.beta_impl;
    cfg.target_spec.sigma_min = defaults.sigma_min;
  }
  for (const auto& [key, value] : values) {
    try {
      if (key == "target.kind") continue;
      if (key == "data.source" || key == "data.target") {
        DatasetSpec& spec = key == "data.source" ? cfg.source : cfg.target;
        spec.kind = parse_dataset_kind(value);
        continue;
      }
      if (key.starts_with("data.source.") || key.starts_with("data.target.")) {
        const bool source = key.starts_with("data.source.");
        DatasetSpec& spec = source ? cfg.source : cfg.target;
        const std::string_view sub = std::string_view(key).substr(12);
        if (!apply_dataset_key(spec, sub, value, key)) throw ConfigError("unknown key " + key);
        continue;
      }
      if (key == "target.beta_impl") {
        cfg.target_spec.beta_impl = parse_real(value, key);
      } else if (key == "target.sigma_min") {
        cfg.target_spec.sigma_min = parse_real(value, key);
      } else if (key == "target.t_eps") {
        cfg.target_spec.t_eps = parse_real(value, key);
      } else if (key == "target.kde_bandwidth") {
        cfg.target_spec.kde_bandwidth = trim(value) == "median"
                                            ? KdeBandwidth::median_rule()
                                            : KdeBandwidth::constant(parse_real(value, key));
      } else if (key == "schedule.kind") {
        cfg.target_spec.diffusion_schedule = parse_schedule_kind(value);
      } else if (key == "schedule.beta_min") {
        cfg.target_spec.beta_min = parse_real(value, key);
      } else if (key == "schedule.beta_max") {
        cfg.target_spec.beta_max = parse_real(value, key);
      } else if (key == "train.batch_size") {
        cfg.batch_size = parse_u64(value, key);
      } else if (key == "train.iterations") {
        cfg.iterations = parse_u64(value, key);
      } else if (key == "train.hidden") {
        cfg.hidden = parse_u64(value, key);
      } else if (key == "train.lambda_d") {
        cfg.lambda_d = parse_real(value, key);
      } else if (key == "train.seed") {
        cfg.seed = parse_u64(value, key);
      } else if (key == "train.log_interval") {
        cfg.log_interval = parse_u64(value, key);
      } else if (key == "train.lr") {
        cfg.optimizer.lr = parse_real(value, key);
      } else if (key == "train.beta1") {
        cfg.optimizer.beta1 = parse_real(value, key);
      } else if (key == "train.beta2") {
        cfg.optimizer.beta2 = parse_real(value, key);
      } else if (key == "train.eps") {
        cfg.optimizer.eps = parse_real(value, key);
      } else if (key == "train.weight_decay") {
        cfg.optimizer.weight_decay = parse_real(value, key);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  TrainConfig cfg;
  apply_config(cfg, read_config_file(path));
  return cfg;
}

std::string to_config_text(const TrainConfig& cfg) {
  std::ostringstream os;
  dataset_lines(os, "source", cfg.source);
  dataset_lines(os, "target", cfg.target);
  const TargetSpec& t = cfg.target_spec;
  os << "target.kind = " << to_string(t.kind) << "\n";
  os << "target.beta_impl = " << format_double(t.beta_impl) << "\n";
  os << "target.sigma_min = " << format_double(t.sigma_min) << "\n";
  os << "target.t_eps = " << format_double(t.t_eps) << "\n";
  os << "target.kde_bandwidth = "
     << (t.kde_bandwidth.median ? std::string("median") : format_double(t.kde_bandwidth.fixed))
     << "\n";
  os << "schedule.kind = " << to_string(t.diffusion_schedule) << "\n";
  os << "schedule.beta_min = " << format_double(t.beta_min) << "\n";
  os << "schedule.beta_max = " << format_double(t.beta_max) << "\n";
  os << "train.batch_size = " << cfg.batch_size << "\n";
  os << "train.iterations = " << cfg.iterations << "\n";
  os << "train.hidden = " << cfg.hidden << "\n";
  os << "train.lambda_d = " << format_double(cfg.lambda_d) << "\n";
  os << "train.seed = " << cfg.seed << "\n";
  os << "train.log_interval = " << cfg.log_interval << "\n";
  os << "train.lr = " << format_double(cfg.optimizer.lr) << "\n";
  os << "train.beta1 = " << format_double(cfg.optimizer.beta1) << "\n";
  os << "train.beta2 = " << format_double(cfg.optimizer.beta2) << "\n";
  os << "train.eps = " << format_double(cfg.optimizer.eps) << "\n";
  os << "train.weight_decay = " << format_double(cfg.optimizer.weight_decay) << "\n";
  return os.str();
}

Json to_json(const DatasetSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["mean"] = spec.mean;
  j["std"] = spec.std;
  j["noise"] = spec.noise;
  j["component_means"] = spec.component_means;
  j["component_std"] = spec.component_std;
  j["scale"] = spec.scale;
  return j;
}

Json to_json(const TargetSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["beta_impl"] = spec.beta_impl;
  j["sigma_min"] = spec.sigma_min;
  j["t_eps"] = spec.t_eps;
  if (spec.kde_bandwidth.median) {
    j["kde_bandwidth"] = "median";
  } else {
    j["kde_bandwidth"] = spec.kde_bandwidth.fixed;
  }
  j["schedule"] = std::string(to_string(spec.diffusion_schedule));
  j["beta_min"] = spec.beta_min;
  j["beta_max"] = spec.beta_max;
  return j;
}

Json to_json(const TrainConfig& cfg) {
  Json j;
  j["source"] = to_json(cfg.source);
  j["target"] = to_json(cfg.target);
  j["target_spec"] = to_json(cfg.target_spec);
  j["batch_size"] = cfg.batch_size;
  j["iterations"] = cfg.iterations;
  j["hidden"] = cfg.hidden;
  j["lambda_d"] = cfg.lambda_d;
  j["seed"] = cfg.seed;
  j["log_interval"] = cfg.log_interval;
  j["optimizer"] = {{"lr", cfg.optimizer.lr},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"eps", cfg.optimizer.eps},
                    {"weight_decay", cfg.optimizer.weight_decay}};
  return j;
}

DatasetSpec dataset_spec_from_json(const Json& j) {
  DatasetSpec s;
  s.kind = parse_dataset_kind(j.at("kind").get<std::string>());
  s.mean = j.at("mean").get<std::array<double, 2>>();
  s.std = j.at("std").get<std::array<double, 2>>();
  s.noise = j.at("noise").get<double>();
  s.component_means = j.at("component_means").get<std::vector<std::array<double, 2>>>();
  s.component_std = j.at("component_std").get<double>();
  s.scale = j.at("scale").get<double>();
  return s;
}

TargetSpec target_spec_from_json(const Json& j) {
  TargetSpec s;
  s.kind = parse_target_kind(j.at("kind").get<std::string>());
  s.beta_impl = j.at("beta_impl").get<double>();
  s.sigma_min = j.at("sigma_min").get<double>();
  s.t_eps = j.at("t_eps").get<double>();
  const Json& bw = j.at("kde_bandwidth");
  s.kde_bandwidth = bw.is_string() ? KdeBandwidth::median_rule()
                                   : KdeBandwidth::constant(bw.get<double>());
  s.diffusion_schedule = parse_schedule_kind(j.at("schedule").get<std::string>());
  s.beta_min = j.at("beta_min").get<double>();
  s.beta_max = j.at("beta_max").get<double>();
  return s;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig cfg;
  cfg.source = dataset_spec_from_json(j.at("source"));
  cfg.target = dataset_spec_from_json(j.at("target"));
  cfg.target_spec = target_spec_from_json(j.at("target_spec"));
  cfg.batch_size = j.at("batch_size").get<std::size_t>();
  cfg.iterations = j.at("iterations").get<std::size_t>();
  cfg.hidden = j.at("hidden").get<std::size_t>();
  cfg.lambda_d = j.at("lambda_d").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.log_interval = j.at("log_interval").get<std::size_t>();
  const Json& o = j.at("optimizer");
  cfg.optimizer.lr = o.at("lr").get<double>();
  cfg.optimizer.beta1 = o.at("beta1").get<double>();
  cfg.optimizer.beta2 = o.at("beta2").get<double>();
  cfg.optimizer.eps = o.at("eps").get<double>();
  cfg.optimizer.weight_decay = o.at("weight_decay").get<double>();
  return cfg;
}

}  // namespace bm
