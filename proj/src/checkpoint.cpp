// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bridgematch/config.hpp"

namespace bm {

namespace {

constexpr char kMagic[8] = {'B', 'M', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(const std::string& in, std::size_t pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

std::string tensor_name(char net, std::size_t layer, const char* part) {
  return std::string(1, net) + "." + std::to_string(layer) + "." + part;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.u.validate();
  ckpt.d.validate();
  Json header;
  header["format"] = "bridgematch-checkpoint";
  header["version"] = 1;
  header["iteration"] = ckpt.iteration;
  header["config"] = to_json(ckpt.config);
  Json tensors = Json::array();
  std::string payload;
  std::uint64_t offset = 0;
  for (const auto& [net, params] : {std::pair<char, const MlpParams*>{'u', &ckpt.u},
                                   std::pair<char, const MlpParams*>{'d', &ckpt.d}}) {
    for (std::size_t l = 0; l < kMlpLayers; ++l) {
      const Dense& layer = params->layers[l];
      Json w;
      w["name"] = tensor_name(net, l, "weight");
      w["shape"] = {layer.weight.rows(), layer.weight.cols()};
      w["order"] = "row-major";
      w["offset"] = offset;
      tensors.push_back(w);
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) put_f64(payload, layer.weight(i, j));
      }
      offset += static_cast<std::uint64_t>(layer.weight.size());
      Json b;
      b["name"] = tensor_name(net, l, "bias");
      b["shape"] = {layer.bias.size()};
      b["order"] = "row-major";
      b["offset"] = offset;
      tensors.push_back(b);
      for (Eigen::Index j = 0; j < layer.bias.size(); ++j) put_f64(payload, layer.bias(j));
      offset += static_cast<std::uint64_t>(layer.bias.size());
    }
  }
  header["tensors"] = tensors;
  const std::string text = header.dump(2);
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a bridgematch checkpoint (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (header_len > bytes.size() - 16) throw CheckpointError("truncated checkpoint header");
  Json header;
  try {
    header = Json::parse(bytes.substr(16, header_len));
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != "bridgematch-checkpoint" || header.value("version", 0) != 1) {
    throw CheckpointError("unsupported checkpoint format/version");
  }
  const std::size_t payload_start = 16 + header_len;
  const std::size_t payload_doubles = (bytes.size() - payload_start) / 8;

  Checkpoint ckpt;
  try {
    ckpt.config = train_config_from_json(header.at("config"));
    ckpt.iteration = header.at("iteration").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }
  ckpt.u = MlpParams::zeros(ckpt.config.hidden);
  ckpt.d = MlpParams::zeros(ckpt.config.hidden);

  std::size_t seen = 0;
  for (const Json& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    if (name.size() < 5 || (name[0] != 'u' && name[0] != 'd') || name[1] != '.' ||
        name[3] != '.') {
      throw CheckpointError("unexpected tensor name " + name);
    }
    MlpParams& net = name[0] == 'u' ? ckpt.u : ckpt.d;
    const std::size_t layer = static_cast<std::size_t>(name[2] - '0');
    if (layer >= kMlpLayers) throw CheckpointError("bad layer index in " + name);
    const std::string part = name.substr(4);
    auto shape = t.at("shape").get<std::vector<std::size_t>>();
    auto read_at = [&](std::uint64_t k) {
      if (offset + k >= payload_doubles) throw CheckpointError("tensor " + name + " out of range");
      return get_f64(bytes, payload_start + 8 * (offset + k));
    };
    if (part == "weight") {
      Eigen::MatrixXd& w = net.layers[layer].weight;
      if (shape.size() != 2 || shape[0] != static_cast<std::size_t>(w.rows()) ||
          shape[1] != static_cast<std::size_t>(w.cols())) {
        throw CheckpointError("shape mismatch for " + name);
      }
      std::uint64_t k = 0;
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_at(k++);
      }
    } else if (part == "bias") {
      Eigen::RowVectorXd& b = net.layers[layer].bias;
      if (shape.size() != 1 || shape[0] != static_cast<std::size_t>(b.size())) {
        throw CheckpointError("shape mismatch for " + name);
      }
      for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = read_at(static_cast<std::uint64_t>(j));
    } else {
      throw CheckpointError("unexpected tensor name " + name);
    }
    ++seen;
  }
  if (seen != 2 * 2 * kMlpLayers) throw CheckpointError("checkpoint is missing tensors");
  if (!ckpt.u.all_finite() || !ckpt.d.all_finite()) {
    throw CheckpointError("checkpoint holds non-finite parameters");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace bm
