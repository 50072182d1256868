// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bridgematch/checkpoint.hpp"
#include "bridgematch/cli.hpp"
#include "bridgematch/export.hpp"

using namespace bm;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path root;
  Workspace() : root(fs::temp_directory_path() / "bridgematch_unit_cli") {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }

  int bmatch(std::vector<std::string> args) const {
    args.insert(args.begin(), {"bmatch", "--quiet", "--out", root.string()});
    return run(args);
  }

  // Newest file with this name anywhere under the root.
  fs::path find(const std::string& name) const {
    fs::path best;
    fs::file_time_type when{};
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.path().filename() == name && (best.empty() || e.last_write_time() >= when)) {
        best = e.path();
        when = e.last_write_time();
      }
    }
    return best;
  }
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("train, sample, eval, sweep and fields from the command line") {
  Workspace ws;
  REQUIRE(ws.bmatch({"train", "--source", "gaussian", "--target", "gaussian", "--kind", "cbm_linear",
                     "--iterations", "30", "--set", "train.hidden=16", "--set", "train.batch_size=64",
                     "--set", "data.target.mean=2,0"}) == 0);
  const fs::path ckpt_path = ws.find("checkpoint.bin");
  REQUIRE(!ckpt_path.empty());
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  CHECK(ckpt.iteration == 30);
  CHECK(ckpt.config.hidden == 16);
  CHECK(ckpt.config.target.mean[0] == 2.0);
  CHECK(ckpt.config.target_spec.kind == TargetKind::kCbmLinear);
  CHECK(fs::exists(ckpt_path.parent_path() / "manifest.json"));

  CHECK(ws.bmatch({"sample", "--checkpoint", ckpt_path.string(), "--n", "200", "--record", "3"}) == 0);
  const Batch samples = read_samples(ws.find("samples.csv"));
  CHECK(samples.rows() == 200);
  CHECK(samples.all_finite());
  CHECK(read_trajectory(ws.find("traj.csv")).states.size() == 3);

  CHECK(ws.bmatch({"eval", "--checkpoint", ckpt_path.string(), "--n", "300"}) == 0);
  const auto metrics = read_json(ws.find("metrics.json"));
  CHECK(metrics.contains("mmd2"));
  CHECK(metrics.contains("fid2d"));

  CHECK(ws.bmatch({"sweep", "--checkpoint", ckpt_path.string(), "--n", "200"}) == 0);
  std::ifstream sweep(ws.find("sweep.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(sweep, line);
  while (std::getline(sweep, line)) rows += !line.empty();
  CHECK(rows == 4);

  CHECK(ws.bmatch({"fields", "--checkpoint", ckpt_path.string(), "--grid", "6"}) == 0);
  CHECK(!ws.find("u_4.csv").empty());
  CHECK(!ws.find("d_0.svg").empty());
}

TEST_CASE("sampling a zero model with lambda_d = 0 returns the source draw") {
  Workspace ws;
  TrainConfig cfg;
  cfg.hidden = 8;
  Checkpoint c = initial_checkpoint(cfg);
  c.u = MlpParams::zeros(8);
  c.d = MlpParams::zeros(8);
  const fs::path p = ws.root / "zero.bin";
  save_checkpoint(c, p);
  REQUIRE(ws.bmatch({"sample", "--checkpoint", p.string(), "--n", "50", "--lambda-d", "0", "--seed", "7"}) == 0);
  Rng rng(7, Stream::kEvalSource);
  CHECK(read_samples(ws.find("samples.csv")) == sample(cfg.source, rng, 50));
}

TEST_CASE("eval of a file against itself") {
  Workspace ws;
  Rng rng(3);
  write_samples(ws.root / "a.csv", rng_standard_normal(rng, 400, 2));
  REQUIRE(ws.bmatch({"eval", "--real", (ws.root / "a.csv").string(), "--generated",
                     (ws.root / "a.csv").string()}) == 0);
  const auto m = read_json(ws.find("metrics.json"));
  CHECK(std::abs(m["fid2d"].get<double>()) < 1e-10);
}

TEST_CASE("usage errors") {
  Workspace ws;
  CHECK(ws.bmatch({"train", "--no-such-flag"}) == 1);
  CHECK(ws.bmatch({}) == 1);
  CHECK(ws.bmatch({"train", "--set", "train.bogus=1", "--iterations", "0"}) == 1);
  CHECK(ws.bmatch({"eval", "--real", (ws.root / "missing.csv").string()}) == 1);
}

TEST_CASE("oracle-check exit code agrees with its report") {
  Workspace ws;
  const int code = ws.bmatch({"oracle-check", "--skip-monte-carlo"});
  const auto report = read_json(ws.find("oracle.json"));
  bool all = true;
  for (const auto& c : report) all = all && c["pass"].get<bool>();
  CHECK(code == (all ? 0 : 3));
}

TEST_CASE("run ids are stable") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("train x") == fnv1a_hex("train x"));
}
