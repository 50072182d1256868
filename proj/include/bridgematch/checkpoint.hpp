// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint file layout (all integers little-endian):
//
//   bytes 0..7    magic "BMCKPT01"
//   bytes 8..15   uint64 header length H
//   next H bytes  UTF-8 JSON header:
//                   {"format": "bridgematch-checkpoint", "version": 1,
//                    "iteration": N, "config": {...TrainConfig...},
//                    "tensors": [{"name": "u.0.weight", "shape": [3, 512],
//                                 "order": "row-major", "offset": 0}, ...]}
//   payload       IEEE-754 float64 values, little-endian, in tensor order;
//                 "offset" counts doubles from the payload start.
//
// Tensor names are "<net>.<layer>.<weight|bias>" with net in {u, d} and layer
// 0..3. Weights are fan_in x fan_out.

#pragma once

#include <filesystem>
#include <string>

#include "bridgematch/training.hpp"

namespace bm {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bm
