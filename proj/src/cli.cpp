// Copyright 2026 The bridgematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "bridgematch/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bridgematch/checkpoint.hpp"
#include "bridgematch/config.hpp"
#include "bridgematch/export.hpp"
#include "bridgematch/oracle.hpp"

namespace bm {

namespace fs = std::filesystem;

EvalOutcome evaluate_checkpoint(const Checkpoint& ckpt, double lambda_u, double lambda_d,
                                const EvalSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("eval: n must be >= 2");
  Rng source_rng(spec.seed, Stream::kEvalSource);
  Rng target_rng(spec.seed, Stream::kEvalTarget);
  const Batch x0 = sample(ckpt.config.source, source_rng, spec.n);
  const Batch real = sample(ckpt.config.target, target_rng, spec.n);

  SampleOptions opt;
  opt.lambda_u = lambda_u;
  opt.lambda_d = lambda_d;
  opt.method = spec.method;
  opt.step = spec.step;
  opt.record = 2;
  EvalOutcome out;
  out.generated = generate_trajectory(ckpt, x0, opt).final_state();
  out.report = evaluate(real, out.generated, spec.mmd);

  if (lambda_d != 0.0) {
    const std::size_t np = std::min<std::size_t>(spec.n, 1000);
    const Batch probe(np, 2, std::vector<double>(x0.data(), x0.data() + 2 * np));
    double acc = 0.0;
    const std::vector<double> times = default_field_times();
    for (const double t : times) acc += mean_row_norm(mlp_forward(ckpt.d, probe, t));
    out.mean_d_contribution = std::abs(lambda_d) * acc / static_cast<double>(times.size());
  }
  return out;
}

std::vector<SweepRow> lambda_sweep(const Checkpoint& ckpt, const std::vector<double>& lambda_d,
                                   const EvalSpec& spec) {
  std::vector<SweepRow> rows;
  for (const double ld : lambda_d) {
    const EvalOutcome o = evaluate_checkpoint(ckpt, 1.0, ld, spec);
    rows.push_back(SweepRow{ld, o.report, o.mean_d_contribution});
  }
  return rows;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream s;
  s << "lambda_u,lambda_d,mmd2,fid2d,sigma2,n_real,n_gen,mean_d_contribution\n";
  for (const SweepRow& r : rows) {
    s << "1," << format_exact(r.lambda_d) << ',' << format_exact(r.report.mmd2) << ','
      << format_exact(r.report.fid2d) << ',' << format_exact(r.report.sigma2) << ',' << r.report.n_real
      << ',' << r.report.n_gen << ',' << format_exact(r.mean_d_contribution) << '\n';
  }
  return s.str();
}

double self_noise_floor(const DatasetSpec& spec, std::size_t n, std::size_t seeds,
                        std::uint64_t base_seed, const MmdOptions& opt) {
  if (seeds == 0) throw std::invalid_argument("self_noise_floor: need at least one seed");
  double acc = 0.0;
  for (std::size_t k = 0; k < seeds; ++k) {
    Rng a(base_seed + k, Stream::kEvalTarget);
    Rng b(base_seed + k, Stream::kEvalReference);
    acc += std::abs(mmd2_rbf(sample(spec, a, n), sample(spec, b, n), opt).value);
  }
  return acc / static_cast<double>(seeds);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const MetricsReport& r) {
  Json j;
  j["mmd2"] = r.mmd2;
  j["fid2d"] = r.fid2d;
  j["n_real"] = r.n_real;
  j["n_gen"] = r.n_gen;
  j["sigma2"] = r.sigma2;
  j["bandwidth_convention"] = std::string(to_string(r.convention));
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct RunContext {
  std::string command;
  std::vector<std::string> args;
  std::string out_root;
  bool quiet = false;

  fs::path root() const {
    if (!out_root.empty()) return out_root;
    if (const char* env = std::getenv("BMATCH_OUT"); env != nullptr && *env != '\0') return env;
    return "out";
  }
};

class Run {
 public:
  Run(const RunContext& ctx, const std::string& identity) : ctx_(ctx) {
    id_ = fnv1a_hex(ctx.command + "\n" + identity);
    dir_ = ctx.root() / id_;
    fs::create_directories(dir_);
    manifest_["command"] = ctx.command;
    manifest_["run_id"] = id_;
    manifest_["args"] = ctx.args;
    manifest_["outputs"] = Json::array();
  }

  const fs::path& dir() const { return dir_; }
  Json& manifest() { return manifest_; }

  fs::path output(const std::string& rel) {
    manifest_["outputs"].push_back(rel);
    return dir_ / rel;
  }

  void finish() {
    write_text(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    if (!ctx_.quiet) std::cerr << "wrote " << (dir_ / "manifest.json").string() << "\n";
  }

 private:
  const RunContext& ctx_;
  std::string id_;
  fs::path dir_;
  Json manifest_;
};

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TrainFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string source;
  std::string target;
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> iterations;
};

TrainConfig resolve_train_config(const TrainFlags& f) {
  TrainConfig cfg;
  if (!f.config_path.empty()) apply_config(cfg, read_config_file(f.config_path));
  ConfigMap named;
  if (!f.source.empty()) named["data.source"] = f.source;
  if (!f.target.empty()) named["data.target"] = f.target;
  if (!f.kind.empty()) named["target.kind"] = f.kind;
  if (f.seed) named["train.seed"] = std::to_string(*f.seed);
  if (f.iterations) named["train.iterations"] = std::to_string(*f.iterations);
  apply_config(cfg, named);
  ConfigMap overrides;
  for (const std::string& s : f.sets) {
    auto [k, v] = parse_assignment(s);
    overrides[k] = v;
  }
  apply_config(cfg, overrides);
  cfg.validate();
  return cfg;
}

int cmd_train(const RunContext& ctx, const TrainFlags& flags) {
  const TrainConfig cfg = resolve_train_config(flags);
  const std::string text = to_config_text(cfg);
  Run run(ctx, text);
  write_text(run.output("config.cfg"), text);
  run.manifest()["config"] = to_json(cfg);
  const fs::path log_path = run.output("train_log.jsonl");
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  const Checkpoint ckpt = train(cfg, [&](const LogRecord& r) {
    const std::string line = to_json_line(r);
    log << line << '\n' << std::flush;
    if (!ctx.quiet) std::cerr << line << '\n';
  });
  save_checkpoint(ckpt, run.output("checkpoint.bin"));
  run.finish();
  std::cout << (run.dir() / "checkpoint.bin").string() << '\n';
  return 0;
}

struct SampleFlags {
  std::string checkpoint;
  std::size_t n = 10'000;
  double lambda_u = 1.0;
  double lambda_d = 1.0;
  std::string method = "midpoint";
  double step = 0.01;
  std::string direction = "forward";
  std::size_t record = 0;
  std::size_t frames = 5;
  std::uint64_t seed = 42;
};

int cmd_sample(const RunContext& ctx, const SampleFlags& f) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  if (f.n == 0) throw UsageError("--n must be >= 1");
  SampleOptions opt;
  opt.lambda_u = f.lambda_u;
  opt.lambda_d = f.lambda_d;
  opt.method = parse_method(f.method);
  opt.step = f.step;
  opt.record = f.record >= 2 ? f.record : 2;
  const Direction dir = parse_direction(f.direction);

  std::ostringstream id;
  id << fnv1a_hex(serialize_checkpoint(ckpt)) << ' ' << f.n << ' ' << format_exact(f.lambda_u) << ' '
     << format_exact(f.lambda_d) << ' ' << f.method << ' ' << format_exact(f.step) << ' '
     << f.direction << ' ' << opt.record << ' ' << f.seed;
  Run run(ctx, id.str());

  // Forward runs start from the source, backward runs from the target.
  Rng rng(f.seed, Stream::kEvalSource);
  const Batch x0 = sample(dir == Direction::kForward ? ckpt.config.source : ckpt.config.target, rng, f.n);
  const Trajectory traj = generate_trajectory(ckpt, x0, opt, dir);

  write_samples(run.output("samples.csv"), traj.final_state());
  const PlotRange range = plot_range(traj.states);
  render_scatter(traj.final_state(), range, run.output("plots/samples.svg"));
  if (f.record >= 2) {
    export_trajectory(traj, run.output("traj.csv"));
    const std::size_t frames = std::min(std::max<std::size_t>(f.frames, 2), traj.states.size());
    for (std::size_t k = 0; k < frames; ++k) {
      const std::size_t j = k * (traj.states.size() - 1) / (frames - 1);
      render_scatter(traj.states[j], range, run.output("plots/frame_" + std::to_string(k) + ".svg"));
    }
  }
  Json& m = run.manifest();
  m["checkpoint"] = f.checkpoint;
  m["config"] = to_json(ckpt.config);
  m["sampling"] = {{"n", f.n},
                   {"lambda_u", f.lambda_u},
                   {"lambda_d", f.lambda_d},
                   {"method", f.method},
                   {"step", f.step},
                   {"direction", f.direction},
                   {"record", opt.record},
                   {"seed", f.seed}};
  run.finish();
  std::cout << (run.dir() / "samples.csv").string() << '\n';
  return 0;
}

struct EvalFlags {
  std::string real;
  std::string generated;
  std::string checkpoint;
  double lambda_u = 1.0;
  double lambda_d = 1.0;
  std::size_t n = 10'000;
  std::string method = "midpoint";
  double step = 0.01;
  std::uint64_t seed = 42;
  std::string convention = "half_median_squared";
  std::vector<double> lambdas;
};

EvalSpec eval_spec(const EvalFlags& f) {
  EvalSpec spec;
  spec.n = f.n;
  spec.method = parse_method(f.method);
  spec.step = f.step;
  spec.seed = f.seed;
  spec.mmd.convention = parse_median_convention(f.convention);
  return spec;
}

int cmd_eval(const RunContext& ctx, const EvalFlags& f) {
  const EvalSpec spec = eval_spec(f);
  Json report;
  std::string identity;
  if (!f.checkpoint.empty()) {
    if (!f.real.empty() || !f.generated.empty()) {
      throw UsageError("eval: use either --checkpoint or --real/--generated");
    }
    const Checkpoint ckpt = load_checkpoint(f.checkpoint);
    identity = fnv1a_hex(serialize_checkpoint(ckpt));
    std::ostringstream id;
    id << identity << ' ' << format_exact(f.lambda_u) << ' ' << format_exact(f.lambda_d) << ' ' << f.n
       << ' ' << f.method << ' ' << format_exact(f.step) << ' ' << f.seed << ' ' << f.convention;
    Run run(ctx, id.str());
    const EvalOutcome o = evaluate_checkpoint(ckpt, f.lambda_u, f.lambda_d, spec);
    report = to_json(o.report);
    report["lambda_u"] = f.lambda_u;
    report["lambda_d"] = f.lambda_d;
    report["mean_d_contribution"] = o.mean_d_contribution;
    write_samples(run.output("samples.csv"), o.generated);
    write_text(run.output("metrics.json"), report.dump(2) + "\n");
    run.manifest()["checkpoint"] = f.checkpoint;
    run.manifest()["metrics"] = report;
    run.finish();
  } else {
    if (f.real.empty() || f.generated.empty()) {
      throw UsageError("eval: need --checkpoint, or both --real and --generated");
    }
    const std::string real_bytes = file_bytes(f.real);
    const std::string gen_bytes = file_bytes(f.generated);
    Run run(ctx, fnv1a_hex(real_bytes) + fnv1a_hex(gen_bytes) + f.convention);
    report = to_json(evaluate(read_samples(f.real), read_samples(f.generated), spec.mmd));
    write_text(run.output("metrics.json"), report.dump(2) + "\n");
    run.manifest()["real"] = f.real;
    run.manifest()["generated"] = f.generated;
    run.manifest()["metrics"] = report;
    run.finish();
  }
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_sweep(const RunContext& ctx, const EvalFlags& f) {
  if (f.checkpoint.empty()) throw UsageError("sweep: --checkpoint is required");
  const EvalSpec spec = eval_spec(f);
  const std::vector<double> lambdas = f.lambdas.empty() ? std::vector<double>{0.0, 0.5, 1.0, 1.5} : f.lambdas;
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  std::ostringstream id;
  id << fnv1a_hex(serialize_checkpoint(ckpt)) << ' ' << f.n << ' ' << f.method << ' '
     << format_exact(f.step) << ' ' << f.seed << ' ' << f.convention;
  for (const double l : lambdas) id << ' ' << format_exact(l);
  Run run(ctx, id.str());
  const std::vector<SweepRow> rows = lambda_sweep(ckpt, lambdas, spec);
  const std::string table = format_sweep_table(rows);
  write_text(run.output("sweep.csv"), table);
  Json jrows = Json::array();
  for (const SweepRow& r : rows) {
    Json j = to_json(r.report);
    j["lambda_u"] = 1.0;
    j["lambda_d"] = r.lambda_d;
    j["mean_d_contribution"] = r.mean_d_contribution;
    jrows.push_back(j);
  }
  run.manifest()["checkpoint"] = f.checkpoint;
  run.manifest()["sweep"] = jrows;
  run.finish();
  std::cout << table;
  return 0;
}

struct FieldFlags {
  std::string checkpoint;
  std::size_t grid = 45;
  std::vector<double> times;
  std::optional<double> range;
  std::uint64_t seed = 42;
};

int cmd_fields(const RunContext& ctx, const FieldFlags& f) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const std::vector<double> times = f.times.empty() ? default_field_times() : f.times;
  PlotRange range;
  if (f.range) {
    if (!(*f.range > 0.0)) throw UsageError("--range must be > 0");
    range = {-*f.range, *f.range};
  } else {
    // Frame the lattice around both endpoint distributions.
    Rng a(f.seed, Stream::kEvalSource);
    Rng b(f.seed, Stream::kEvalTarget);
    const std::vector<Batch> pts{sample(ckpt.config.source, a, 4096), sample(ckpt.config.target, b, 4096)};
    range = plot_range(pts);
  }
  std::ostringstream id;
  id << fnv1a_hex(serialize_checkpoint(ckpt)) << ' ' << f.grid << ' ' << format_exact(range.first)
     << ' ' << format_exact(range.second);
  for (const double t : times) id << ' ' << format_exact(t);
  Run run(ctx, id.str());
  const FieldGrid grid = evaluate_field_grid(ckpt, range, f.grid, times);
  for (const fs::path& p : write_field_grid(grid, run.dir() / "fields")) {
    run.manifest()["outputs"].push_back(fs::relative(p, run.dir()).generic_string());
  }
  run.manifest()["checkpoint"] = f.checkpoint;
  run.manifest()["grid"] = {{"g", f.grid}, {"lo", range.first}, {"hi", range.second}, {"times", times}};
  run.finish();
  std::cout << (run.dir() / "fields").string() << '\n';
  return 0;
}

struct OracleFlags {
  std::size_t draws = 10'000'000;
  bool skip_mc = false;
  std::uint64_t seed = 42;
  double beta = 0.2;
};

int cmd_oracle(const RunContext& ctx, const OracleFlags& f) {
  OracleSuiteOptions opt;
  opt.endpoints = default_oracle_endpoints();
  opt.beta = f.beta;
  opt.mc_draws = f.draws;
  opt.seed = f.seed;
  opt.skip_monte_carlo = f.skip_mc;
  std::ostringstream id;
  id << f.draws << ' ' << f.skip_mc << ' ' << f.seed << ' ' << format_exact(f.beta);
  Run run(ctx, id.str());
  const std::vector<OracleCheck> checks = run_oracle_suite(opt);
  Json j = Json::array();
  bool all = true;
  for (const OracleCheck& c : checks) {
    j.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_exact(c.value)
              << " threshold=" << format_exact(c.threshold) << '\n';
    all = all && c.pass;
  }
  write_text(run.output("oracle.json"), j.dump(2) + "\n");
  run.manifest()["checks"] = j;
  run.manifest()["pass"] = all;
  run.finish();
  if (!all) throw CheckFailed("oracle-check: at least one identity failed");
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bmatch: bridge and flow matching on 2D toy distributions"};
  app.require_subcommand(1);
  RunContext ctx;
  app.add_option("--out", ctx.out_root, "Output root (default $BMATCH_OUT or ./out)");
  app.add_flag("--quiet", ctx.quiet, "Suppress progress output");

  TrainFlags tf;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the u and d networks");
  train_cmd->add_option("--config", tf.config_path, "key = value config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--set", tf.sets, "Override one key, e.g. --set train.lr=5e-4");
  train_cmd->add_option("--source", tf.source, "Source dataset");
  train_cmd->add_option("--target", tf.target, "Target dataset");
  train_cmd->add_option("--kind", tf.kind, "Target construction");
  train_cmd->add_option("--seed", tf.seed, "Seed");
  train_cmd->add_option("--iterations", tf.iterations, "Training iterations");

  SampleFlags sf;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Integrate the recombined field");
  sample_cmd->add_option("--checkpoint", sf.checkpoint)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--n", sf.n, "Number of particles");
  sample_cmd->add_option("--lambda-u", sf.lambda_u);
  sample_cmd->add_option("--lambda-d", sf.lambda_d);
  sample_cmd->add_option("--method", sf.method, "euler | midpoint | heun2");
  sample_cmd->add_option("--step", sf.step);
  sample_cmd->add_option("--direction", sf.direction, "forward | backward");
  sample_cmd->add_option("--record", sf.record, "Record this many states into traj.csv (>= 2)");
  sample_cmd->add_option("--frames", sf.frames, "Scatter frames rendered from the trajectory");
  sample_cmd->add_option("--seed", sf.seed);

  EvalFlags ef;
  CLI::App* eval_cmd = app.add_subcommand("eval", "MMD^2 and FID_2D against target samples");
  eval_cmd->add_option("--real", ef.real)->check(CLI::ExistingFile);
  eval_cmd->add_option("--generated", ef.generated)->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", ef.checkpoint)->check(CLI::ExistingFile);
  eval_cmd->add_option("--lambda-u", ef.lambda_u);
  eval_cmd->add_option("--lambda-d", ef.lambda_d);
  eval_cmd->add_option("--n", ef.n);
  eval_cmd->add_option("--method", ef.method);
  eval_cmd->add_option("--step", ef.step);
  eval_cmd->add_option("--seed", ef.seed);
  eval_cmd->add_option("--bandwidth", ef.convention, "half_median_squared | median_distance");

  EvalFlags wf;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Evaluate over a list of lambda_d values");
  sweep_cmd->add_option("--checkpoint", wf.checkpoint)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--lambda-d", wf.lambdas, "lambda_d values (default 0 0.5 1 1.5)");
  sweep_cmd->add_option("--n", wf.n);
  sweep_cmd->add_option("--method", wf.method);
  sweep_cmd->add_option("--step", wf.step);
  sweep_cmd->add_option("--seed", wf.seed);
  sweep_cmd->add_option("--bandwidth", wf.convention);

  FieldFlags ff;
  CLI::App* fields_cmd = app.add_subcommand("fields", "Dump u and d on a regular grid");
  fields_cmd->add_option("--checkpoint", ff.checkpoint)->required()->check(CLI::ExistingFile);
  fields_cmd->add_option("--grid", ff.grid, "Nodes per axis");
  fields_cmd->add_option("--times", ff.times, "Times (default 0 0.25 0.5 0.75 1)");
  fields_cmd->add_option("--range", ff.range, "Half-width of the square region");
  fields_cmd->add_option("--seed", ff.seed);

  OracleFlags of;
  CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "Closed-form Gaussian identity suite");
  oracle_cmd->add_option("--draws", of.draws, "Monte-Carlo draws per time");
  oracle_cmd->add_flag("--skip-monte-carlo", of.skip_mc);
  oracle_cmd->add_option("--seed", of.seed);
  oracle_cmd->add_option("--beta", of.beta);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  for (CLI::App* sub : app.get_subcommands()) ctx.command = sub->get_name();
  ctx.args = args;
  try {
    if (ctx.command == "train") return cmd_train(ctx, tf);
    if (ctx.command == "sample") return cmd_sample(ctx, sf);
    if (ctx.command == "eval") return cmd_eval(ctx, ef);
    if (ctx.command == "sweep") return cmd_sweep(ctx, wf);
    if (ctx.command == "fields") return cmd_fields(ctx, ff);
    if (ctx.command == "oracle-check") return cmd_oracle(ctx, of);
  } catch (const CheckFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: unknown command\n";
  return 1;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace bm
