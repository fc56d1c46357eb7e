#include "cayley/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cayley/error.hpp"

namespace cayley {
namespace {

constexpr const char* kCheckpointName = "checkpoint.cdsm";
constexpr const char* kMetricsName = "metrics.csv";

double scheduled_lr(const TrainConfig& c, std::uint64_t step, std::uint64_t n_steps) {
  if (c.lr == c.lr_final || n_steps <= 1) return c.lr;
  const double frac = static_cast<double>(step) / static_cast<double>(n_steps - 1);
  return c.lr_final + 0.5 * (c.lr - c.lr_final) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace

std::vector<std::string> train_config_keys() {
  auto keys = spec_keys();
  for (const char* k : {"T", "alg", "batch_size", "trajectories", "lr", "lr_final", "scramble",
                        "seed", "checkpoint_every", "log_every", "out", "hidden", "blocks",
                        "time_embed", "threads", "resume"}) {
    keys.emplace_back(k);
  }
  return keys;
}

TrainConfig train_config_from(const KeyValueConfig& kv) {
  kv.require_known(train_config_keys());
  TrainConfig c;
  c.spec = make_spec(spec_options_from(kv));
  if (c.spec->family() == Family::kCube2 && !kv.contains("T")) {
    c.horizon = 20;
  } else {
    c.horizon = static_cast<int>(kv.require_int("T"));
  }
  const auto alg = kv.get_string("alg", "alg1");
  if (alg == "alg1") {
    c.algorithm = Algorithm::kUniform;
  } else if (alg == "alg3") {
    c.algorithm = Algorithm::kReversedScore;
  } else {
    throw UsageError("alg must be alg1 or alg3, got '" + alg + "'");
  }
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  const auto total = kv.get_int("trajectories", static_cast<long long>(c.total_trajectories));
  const auto every = kv.get_int("checkpoint_every", static_cast<long long>(c.checkpoint_every));
  if (total < 1 || every < 1) throw UsageError("trajectories and checkpoint_every must be positive");
  c.total_trajectories = static_cast<std::uint64_t>(total);
  c.checkpoint_every = static_cast<std::uint64_t>(every);
  c.lr = kv.get_double("lr", c.lr);
  c.lr_final = kv.get_double("lr_final", c.lr);
  if (kv.contains("scramble")) c.scramble_n_max = static_cast<int>(kv.get_int("scramble", 1));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  c.log_every = static_cast<int>(kv.get_int("log_every", c.log_every));
  c.output_dir = kv.get_string("out", "");
  c.hidden_dim = static_cast<std::uint32_t>(kv.get_int("hidden", c.hidden_dim));
  c.n_blocks = static_cast<std::uint32_t>(kv.get_int("blocks", c.n_blocks));
  c.time_embed_dim = static_cast<std::uint32_t>(kv.get_int("time_embed", c.time_embed_dim));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  if (auto r = kv.get("resume")) c.resume = *r;
  validate(c);
  return c;
}

void validate(const TrainConfig& c) {
  if (!c.spec) throw UsageError("training needs a graph");
  if (c.horizon < 1) throw UsageError("T must be >= 1");
  if (c.batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (c.total_trajectories < 1) throw UsageError("trajectories must be >= 1");
  if (!(c.lr > 0) || !(c.lr_final > 0)) throw UsageError("learning rates must be positive");
  if (c.scramble_n_max && *c.scramble_n_max < 0) throw UsageError("scramble must be >= 0");
  if (c.log_every < 1) throw UsageError("log_every must be >= 1");
  if (c.threads < 1) throw UsageError("threads must be >= 1");
  if (c.hidden_dim < 1 || c.n_blocks < 1) throw UsageError("hidden and blocks must be >= 1");
  if (c.time_embed_dim % 2 != 0) throw UsageError("time_embed must be even");
}

std::string metrics_csv_header() { return "step,trajectories,loss,seconds"; }

std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream out;
  out.precision(10);
  out << r.step << ',' << r.trajectories << ',' << r.loss << ',';
  out.precision(4);
  out << std::fixed << r.seconds;
  return out.str();
}

TrainResult train(const TrainConfig& c, const TrainObserver& observer) {
  validate(c);
  const auto& spec = *c.spec;
  const auto t0 = std::chrono::steady_clock::now();

  ModelConfig mc;
  mc.input_dim = static_cast<std::uint32_t>(spec.feature_dim());
  mc.output_dim = static_cast<std::uint32_t>(spec.num_generators());
  mc.hidden_dim = c.hidden_dim;
  mc.n_blocks = c.n_blocks;
  mc.time_embed_dim = c.time_embed_dim;
  mc.horizon = static_cast<std::uint32_t>(c.horizon);

  TrainResult result{init_model(mc, c.seed), {}, {}, {}};
  if (c.resume) {
    auto ck = load_checkpoint(*c.resume);
    check_model_fits(ck.model.config, spec);
    if (ck.model.config.horizon != 0 && ck.model.config.horizon < mc.horizon) {
      throw UsageError("resumed checkpoint was trained with a shorter horizon");
    }
    result.model = std::move(ck.model);
    result.optimizer = ck.optimizer ? std::move(*ck.optimizer)
                                    : AdamState<float>::for_model(result.model);
  } else {
    result.optimizer = AdamState<float>::for_model(result.model);
  }
  auto& model = result.model;
  auto& opt = result.optimizer;

  const auto batch = static_cast<std::uint64_t>(c.batch_size);
  const std::uint64_t n_steps = (c.total_trajectories + batch - 1) / batch;
  const std::uint64_t first_step = c.resume ? opt.step : 0;
  Rng rng(c.seed + first_step * 0x9E3779B97F4A7C15ULL);

  std::ofstream metrics_out;
  std::filesystem::path checkpoint_path;
  if (!c.output_dir.empty()) {
    std::filesystem::create_directories(c.output_dir);
    checkpoint_path = c.output_dir / kCheckpointName;
    const auto metrics_path = c.output_dir / kMetricsName;
    const bool fresh = !c.resume || !std::filesystem::exists(metrics_path);
    metrics_out.open(metrics_path, fresh ? std::ios::trunc : std::ios::app);
    if (!metrics_out) throw ResourceError("cannot write " + metrics_path.string());
    if (fresh) metrics_out << metrics_csv_header() << '\n';
  }
  const auto write_checkpoint = [&] {
    if (checkpoint_path.empty()) return;
    save_checkpoint(checkpoint_path, model, &opt);
    if (result.checkpoints.empty() || result.checkpoints.back() != checkpoint_path) {
      result.checkpoints.push_back(checkpoint_path);
    }
  };

  // Alg3 samples from a frozen copy refreshed at every epoch boundary; the
  // first epoch has no trained sampler and uses the uniform process.
  std::optional<ModelParameters> sampler_model;
  std::optional<ModelScore> sampler;
  if (c.algorithm == Algorithm::kReversedScore && first_step > 0) {
    sampler_model = model;
    sampler.emplace(c.spec, *sampler_model);
  }

  SamplingOptions sampling;
  sampling.scramble_n_max = c.scramble_n_max;
  LossOptions loss_options;
  loss_options.shards = c.threads;

  double interval_loss = 0.0;
  int interval_count = 0;
  std::uint64_t seen = first_step * batch;
  for (std::uint64_t step = first_step; step < n_steps; ++step) {
    const auto count = static_cast<int>(std::min<std::uint64_t>(batch, c.total_trajectories - seen));
    const auto process =
        sampler ? ForwardProcess::reversed_score(*sampler) : ForwardProcess::uniform();
    const auto trajectories = sample_trajectories(spec, c.horizon, count, process, rng, sampling);
    auto lg = loss_and_grad(model, std::span<const Trajectory>(trajectories), spec, loss_options);
    optimizer_step(model, lg.grad, opt, scheduled_lr(c, step, n_steps));
    const std::uint64_t before = seen;
    seen += static_cast<std::uint64_t>(count);
    interval_loss += lg.loss;
    ++interval_count;

    const bool last = step + 1 == n_steps;
    if (interval_count == c.log_every || last) {
      MetricsRow row;
      row.step = step + 1;
      row.trajectories = seen;
      row.loss = interval_loss / interval_count;
      row.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.metrics.push_back(row);
      if (metrics_out.is_open()) metrics_out << format_metrics_row(row) << '\n' << std::flush;
      interval_loss = 0.0;
      interval_count = 0;
      if (observer && !observer(row)) {
        write_checkpoint();
        break;
      }
    }
    if (before / c.checkpoint_every != seen / c.checkpoint_every || last) {
      write_checkpoint();
      if (c.algorithm == Algorithm::kReversedScore) {
        sampler.reset();
        sampler_model = model;
        sampler.emplace(c.spec, *sampler_model);
      }
    }
  }
  return result;
}

double evaluate_loss(const ModelParameters& model, const GraphSpec& spec, int T, int n_eval,
                     std::uint64_t seed) {
  if (n_eval < 1) throw DomainError("evaluate_loss: n_eval must be >= 1");
  Rng rng(seed);
  const auto batch = sample_trajectories(spec, T, n_eval, ForwardProcess::uniform(), rng);
  LossOptions o;
  o.compute_gradient = false;
  return loss_and_grad(model, std::span<const Trajectory>(batch), spec, o).loss;
}

}  // namespace cayley
