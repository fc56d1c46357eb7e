#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cayley/config.hpp"
#include "cayley/model.hpp"

namespace cayley {

enum class Algorithm { kUniform, kReversedScore };  // alg1, alg3

struct TrainConfig {
  GraphSpecPtr spec;
  int horizon = 0;  ///< T; no default, the caller must choose
  Algorithm algorithm = Algorithm::kUniform;
  int batch_size = 100;
  std::uint64_t total_trajectories = 100000;
  double lr = 1e-3;
  /// Cosine decay from lr to lr_final over the run; equal values keep lr fixed.
  double lr_final = 1e-3;
  std::optional<int> scramble_n_max;
  std::uint64_t seed = 0;
  /// Trajectories between checkpoints. For alg3 this is also the epoch
  /// length after which the sampling model is refreshed.
  std::uint64_t checkpoint_every = 100000;
  /// Optimizer steps per metrics row.
  int log_every = 10;
  std::filesystem::path output_dir;  ///< empty: keep everything in memory
  std::uint32_t hidden_dim = 256;
  std::uint32_t n_blocks = 4;
  std::uint32_t time_embed_dim = 16;
  int threads = 1;
  std::optional<std::filesystem::path> resume;
};

/// Every key accepted by train_config_from.
std::vector<std::string> train_config_keys();
/// Builds a TrainConfig (and its graph) from key=value settings. Throws
/// UsageError on unknown keys, a missing T or out-of-range values.
TrainConfig train_config_from(const KeyValueConfig& config);
void validate(const TrainConfig& config);

struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t trajectories = 0;
  double loss = 0.0;  ///< mean training-batch loss since the previous row
  double seconds = 0.0;
};

struct TrainResult {
  ModelParameters model;
  AdamState<float> optimizer;
  std::vector<MetricsRow> metrics;
  std::vector<std::filesystem::path> checkpoints;
};

/// Called after every logged metrics row; return false to stop early.
using TrainObserver = std::function<bool(const MetricsRow&)>;

/// alg1 (uniform forward walks) or alg3 (reversed-score
/// forward walks driven by the previous epoch's model; the first epoch is
/// uniform). Writes `metrics.csv` and `checkpoint.cdsm` to output_dir when
/// set. On a NumericError the last good checkpoint is left in place and the
/// error is rethrown.
TrainResult train(const TrainConfig& config, const TrainObserver& observer = {});

/// Loss on n_eval fresh uniform-process trajectories drawn with `seed`.
double evaluate_loss(const ModelParameters& model, const GraphSpec& spec, int T, int n_eval,
                     std::uint64_t seed);

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);

}  // namespace cayley
