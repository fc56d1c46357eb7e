// Command-line front end: train, solve, bench, oracle, ball, sample.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cayley/config.hpp"
#include "cayley/diffusion.hpp"
#include "cayley/error.hpp"
#include "cayley/model.hpp"
#include "cayley/oracle.hpp"
#include "cayley/search.hpp"
#include "cayley/training.hpp"
#include "manifest.hpp"

namespace cayley::cli {
namespace {

using Clock = std::chrono::system_clock;

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

/// Graph selection flags shared by every subcommand.
struct SpecFlags {
  std::string family = "sl2p";
  int p = 0;
  int n = 0;
  std::string generators;
  std::string goals;

  void add(CLI::App& app) {
    app.add_option("--spec", family, "Graph family: cube3, cube2, sl2p, generic-perm")
        ->capture_default_str();
    app.add_option("--p", p, "Prime modulus for sl2p");
    app.add_option("--n", n, "Order of the built-in cyclic group (generic-perm without a file)");
    app.add_option("--generators", generators, "Generator file for generic-perm");
    app.add_option("--goals", goals, "Goal-set file (one state per line)");
  }
  KeyValueConfig config() const {
    KeyValueConfig kv;
    kv.set("spec", family);
    if (p) kv.set("p", std::to_string(p));
    if (n) kv.set("n", std::to_string(n));
    if (!generators.empty()) kv.set("generators", generators);
    if (!goals.empty()) kv.set("goals", goals);
    return kv;
  }
  GraphSpecPtr build() const { return make_spec(spec_options_from(config())); }
};

std::string path_names(const GraphSpec& spec, const std::vector<Move>& path) {
  std::string out;
  for (Move a : path) {
    if (!out.empty()) out += ' ';
    out += spec.generators().name(a);
  }
  return out;
}

std::string solve_record(const GraphSpec& spec, const SolveResult& r) {
  std::ostringstream out;
  out << (r.solved ? "solved" : "unsolved") << ',' << r.length() << ',' << r.nodes_expanded << ','
      << std::fixed << std::setprecision(6) << r.seconds << ',' << path_names(spec, r.path);
  return out.str();
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + " expects comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

/// Start-state selection for solve/bench.
struct StartFlags {
  std::string state;
  int scramble = -1;
  bool uniform = false;
  int count = 1;

  std::vector<State> draw(const GraphSpec& spec, Rng& rng) const {
    const int modes = !state.empty() + (scramble >= 0) + uniform;
    if (modes != 1) throw UsageError("choose exactly one of --state, --scramble, --uniform");
    std::vector<State> starts;
    if (!state.empty()) {
      auto x = parse_state(state);
      spec.validate(x);
      starts.push_back(std::move(x));
      return starts;
    }
    for (int i = 0; i < count; ++i) {
      if (uniform) {
        starts.push_back(uniform_state(spec, rng));
      } else {
        // Exactly `scramble` random moves.
        State x = spec.goals()[std::uniform_int_distribution<std::size_t>(0, spec.goals().size() - 1)(rng)];
        std::uniform_int_distribution<int> move(0, static_cast<int>(spec.num_generators()) - 1);
        for (int k = 0; k < scramble; ++k) x = spec.apply(x, move(rng));
        starts.push_back(std::move(x));
      }
    }
    return starts;
  }
};

struct Loaded {
  GraphSpecPtr spec;
  Checkpoint checkpoint;
};

Loaded load_model_for(const SpecFlags& flags, const std::string& checkpoint_path) {
  Loaded l{flags.build(), load_checkpoint(checkpoint_path)};
  check_model_fits(l.checkpoint.model.config, *l.spec);
  return l;
}

std::optional<BallTable> ball_from(const GraphSpec& spec, int radius, const std::string& file) {
  if (!file.empty()) return load_ball(file, spec);
  if (radius >= 0) return build_ball(spec, radius);
  return std::nullopt;
}

int run_train(const std::string& config_path, const std::map<std::string, std::string>& overrides,
              int threads) {
  const auto started = Clock::now();
  KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  for (const auto& [k, v] : overrides) kv.set(k, v);
  if (!kv.contains("threads")) kv.set("threads", std::to_string(threads));
  if (!kv.contains("out")) kv.set("out", "run");
  auto config = train_config_from(kv);
  std::cerr << "training " << config.spec->label() << " T=" << config.horizon << " for "
            << config.total_trajectories << " trajectories\n";
  const auto result = train(config, [](const MetricsRow& row) {
    std::cerr << format_metrics_row(row) << '\n';
    return true;
  });
  RunManifest m;
  m.command = "train";
  m.config = kv.entries();
  m.seed = config.seed;
  m.started = started;
  m.finished = Clock::now();
  m.artifacts = {config.output_dir / "checkpoint.cdsm", config.output_dir / "metrics.csv"};
  m.checkpoint = config.output_dir / "checkpoint.cdsm";
  m.write();
  std::cout << "checkpoint " << m.checkpoint.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-model pathfinding on Cayley graphs"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: machine parallelism)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a score model (alg1 or alg3)");
  std::string config_path;
  train_cmd->add_option("--config", config_path, "key=value config file");
  std::map<std::string, std::string> train_overrides;
  for (const auto& key : train_config_keys()) {
    if (key == "threads") continue;
    train_cmd->add_option_function<std::string>(
        "--" + key, [&train_overrides, key](const std::string& v) { train_overrides[key] = v; },
        "Override config key '" + key + "'");
  }

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve start states with a trained model");
  SpecFlags solve_spec;
  solve_spec.add(*solve_cmd);
  StartFlags solve_start;
  std::string solve_checkpoint, solve_ball_file, solve_output;
  int solve_beam = 1, solve_radius = -1, solve_horizon = 0;
  std::uint64_t solve_seed = 0;
  bool solve_calibrate = false, solve_walk = false;
  solve_cmd->add_option("--checkpoint", solve_checkpoint, "Model checkpoint")->required();
  solve_cmd->add_option("--state", solve_start.state, "Explicit start state (comma-separated)");
  solve_cmd->add_option("--scramble", solve_start.scramble, "Start k random moves from a goal");
  solve_cmd->add_flag("--uniform", solve_start.uniform, "Uniform random start state");
  solve_cmd->add_option("--count", solve_start.count, "Number of random starts")->capture_default_str();
  solve_cmd->add_option("--seed", solve_seed, "Seed for start states and sampled walks");
  solve_cmd->add_option("--beam", solve_beam, "Beam width")->capture_default_str();
  solve_cmd->add_option("--ball", solve_radius, "Build a goal ball of this radius");
  solve_cmd->add_option("--ball-file", solve_ball_file, "Load a ball table instead");
  solve_cmd->add_flag("--calibrate", solve_calibrate, "Repeat with T-calibration until no gain");
  solve_cmd->add_flag("--walk", solve_walk, "Single sampled backward walk instead of beam search");
  solve_cmd->add_option("--horizon", solve_horizon, "Starting time T_b (default: model horizon)");
  solve_cmd->add_option("--output", solve_output, "Also write records to this file (+ manifest)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Beam-width x ball-radius sweep as CSV");
  SpecFlags bench_spec;
  bench_spec.add(*bench_cmd);
  std::string bench_checkpoint, bench_beams = "1", bench_radii = "0", bench_oracle, bench_output;
  int bench_instances = 100, bench_horizon = 0, bench_calibrate = 0, bench_scramble = -1;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--checkpoint", bench_checkpoint, "Model checkpoint")->required();
  bench_cmd->add_option("--beams", bench_beams, "Beam widths, comma-separated")->capture_default_str();
  bench_cmd->add_option("--radii", bench_radii, "Ball radii, comma-separated")->capture_default_str();
  bench_cmd->add_option("--instances", bench_instances, "Random start states")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Seed for start states");
  bench_cmd->add_option("--scramble", bench_scramble,
                        "Start k random moves from a goal instead of uniform states");
  bench_cmd->add_option("--horizon", bench_horizon, "Starting time T_b (default: model horizon)");
  bench_cmd->add_option("--calibrate-rounds", bench_calibrate, "T-calibration rounds per instance");
  bench_cmd->add_option("--oracle", bench_oracle, "Distance table for optimality columns");
  bench_cmd->add_option("--output", bench_output, "Also write the CSV here (+ manifest)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact BFS distance table");
  SpecFlags oracle_spec;
  oracle_spec.add(*oracle_cmd);
  std::string oracle_output;
  std::uint64_t oracle_budget = 1ULL << 31;
  oracle_cmd->add_option("--output", oracle_output, "Table file");
  oracle_cmd->add_option("--max-states", oracle_budget, "Rank-space budget")->capture_default_str();

  // ball
  auto* ball_cmd = app.add_subcommand("ball", "Exact ball of radius R around the goals");
  SpecFlags ball_spec;
  ball_spec.add(*ball_cmd);
  std::string ball_output;
  int ball_radius = 0;
  std::size_t ball_budget = 20'000'000;
  ball_cmd->add_option("--radius", ball_radius, "Radius R")->required();
  ball_cmd->add_option("--output", ball_output, "Ball file");
  ball_cmd->add_option("--max-entries", ball_budget, "State budget")->capture_default_str();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Dump forward-process trajectories");
  SpecFlags sample_spec;
  sample_spec.add(*sample_cmd);
  int sample_T = 0, sample_count = 1, sample_scramble = -1;
  std::uint64_t sample_seed = 0;
  std::string sample_checkpoint;
  sample_cmd->add_option("--T", sample_T, "Horizon")->required();
  sample_cmd->add_option("--count", sample_count, "Trajectories")->capture_default_str();
  sample_cmd->add_option("--seed", sample_seed, "Seed");
  sample_cmd->add_option("--scramble", sample_scramble, "Scramble-ball start, n_max");
  sample_cmd->add_option("--checkpoint", sample_checkpoint, "Use the reversed-score process");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::kUsage);
  }

  try {
    const auto started = Clock::now();
    if (*train_cmd) return run_train(config_path, train_overrides, threads);

    if (*solve_cmd) {
      auto l = load_model_for(solve_spec, solve_checkpoint);
      const auto& spec = *l.spec;
      ModelScore score(l.spec, l.checkpoint.model);
      Rng rng(solve_seed);
      const auto starts = solve_start.draw(spec, rng);
      const auto ball = ball_from(spec, solve_radius, solve_ball_file);
      const BallTable* ball_ptr = ball ? &*ball : nullptr;
      int horizon = solve_horizon > 0 ? solve_horizon : static_cast<int>(l.checkpoint.model.config.horizon);
      if (horizon < 1) throw UsageError("checkpoint has no horizon; pass --horizon");
      std::ofstream file;
      if (!solve_output.empty()) file.open(solve_output);
      for (const auto& x : starts) {
        const Solver solver = [&](int T) {
          if (solve_walk) return backward_walk(spec, score, x, T, rng, ball_ptr);
          BeamOptions o;
          o.width = solve_beam;
          return beam_search(spec, score, x, T, o, ball_ptr);
        };
        auto r = solve_calibrate ? t_calibrate(solver, horizon) : solver(horizon);
        if (r.solved && !verify_solution(spec, x, r)) {
          throw DomainError("internal error: solver produced a path that does not reach a goal");
        }
        const auto line = solve_record(spec, r);
        std::cout << line << '\n';
        if (file.is_open()) file << line << '\n';
      }
      if (file.is_open()) {
        file.close();
        RunManifest m{"solve", solve_spec.config().entries(), solve_seed, started, Clock::now(),
                      {solve_output}, solve_checkpoint};
        m.write();
      }
      return 0;
    }

    if (*bench_cmd) {
      auto l = load_model_for(bench_spec, bench_checkpoint);
      const auto& spec = *l.spec;
      ModelScore score(l.spec, l.checkpoint.model);
      Rng rng(bench_seed);
      StartFlags sf;
      sf.count = bench_instances;
      if (bench_scramble >= 0) {
        sf.scramble = bench_scramble;
      } else {
        sf.uniform = true;
      }
      const auto starts = sf.draw(spec, rng);
      std::vector<int> optimal;
      if (!bench_oracle.empty() || spec.rank_space_size()) {
        const auto table = bench_oracle.empty() ? bfs_distances(spec) : load_distance_table(bench_oracle);
        for (const auto& x : starts) optimal.push_back(table.distance(spec, x));
      }
      const int horizon = bench_horizon > 0 ? bench_horizon : static_cast<int>(l.checkpoint.model.config.horizon);
      if (horizon < 1) throw UsageError("checkpoint has no horizon; pass --horizon");
      std::ostringstream csv;
      csv << bench_csv_header() << '\n';
      std::cout << bench_csv_header() << '\n';
      for (int radius : parse_int_list(bench_radii, "--radii")) {
        const auto ball = build_ball(spec, radius);
        for (int width : parse_int_list(bench_beams, "--beams")) {
          BenchOptions o;
          o.beam_width = width;
          o.ball = &ball;
          o.horizon = horizon;
          o.calibrate_rounds = bench_calibrate;
          o.threads = threads;
          const auto row = format_bench_row(run_benchmark(spec, score, starts, optimal, o));
          std::cout << row << '\n' << std::flush;
          csv << row << '\n';
        }
      }
      if (!bench_output.empty()) {
        std::ofstream(bench_output) << csv.str();
        auto cfg = bench_spec.config().entries();
        cfg["beams"] = bench_beams;
        cfg["radii"] = bench_radii;
        cfg["instances"] = std::to_string(bench_instances);
        RunManifest m{"bench", cfg, bench_seed, started, Clock::now(), {bench_output}, bench_checkpoint};
        m.write();
      }
      return 0;
    }

    if (*oracle_cmd) {
      const auto spec = oracle_spec.build();
      const auto table = bfs_distances(*spec, oracle_budget);
      std::cout << spec->label() << " count=" << table.count() << " diameter=" << table.diameter()
                << " mean=" << std::setprecision(6) << table.mean() << '\n';
      for (std::size_t d = 0; d < table.histogram().size(); ++d) {
        std::cout << "  distance " << d << ": " << table.histogram()[d] << '\n';
      }
      if (!oracle_output.empty()) {
        save_distance_table(oracle_output, table);
        RunManifest m{"oracle", oracle_spec.config().entries(), 0, started, Clock::now(),
                      {oracle_output}, {}};
        m.write();
      }
      return 0;
    }

    if (*ball_cmd) {
      const auto spec = ball_spec.build();
      const auto ball = build_ball(*spec, ball_radius, ball_budget);
      std::cout << spec->label() << " radius=" << ball.radius() << " count=" << ball.size() << '\n';
      if (!ball_output.empty()) {
        save_ball(ball_output, *spec, ball);
        auto cfg = ball_spec.config().entries();
        cfg["radius"] = std::to_string(ball_radius);
        RunManifest m{"ball", cfg, 0, started, Clock::now(), {ball_output}, {}};
        m.write();
      }
      return 0;
    }

    if (*sample_cmd) {
      const auto spec = sample_spec.build();
      Rng rng(sample_seed);
      SamplingOptions so;
      if (sample_scramble >= 0) so.scramble_n_max = sample_scramble;
      std::optional<Checkpoint> ck;
      std::optional<ModelScore> score;
      if (!sample_checkpoint.empty()) {
        ck = load_checkpoint(sample_checkpoint);
        score.emplace(spec, ck->model);
      }
      const auto process = score ? ForwardProcess::reversed_score(*score) : ForwardProcess::uniform();
      for (const auto& t : sample_trajectories(*spec, sample_T, sample_count, process, rng, so)) {
        std::cout << format_trajectory(t) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(exit_status_for(e));
  }
  return 0;
}

}  // namespace cayley::cli

int main(int argc, char** argv) { return cayley::cli::main(argc, argv); }
