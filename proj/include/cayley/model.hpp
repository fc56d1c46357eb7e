#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cayley/diffusion.hpp"
#include "cayley/group.hpp"
#include "cayley/score_function.hpp"

namespace cayley {

struct ModelConfig {
  std::uint32_t input_dim = 0;        ///< feature_dim of the graph
  std::uint32_t time_embed_dim = 16;  ///< even
  std::uint32_t hidden_dim = 256;
  std::uint32_t n_blocks = 4;
  std::uint32_t output_dim = 0;       ///< |S|
  std::uint32_t horizon = 0;          ///< training T; 0 when unknown

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Residual MLP producing log-scores:
///
///   h = [features, embed(t)] W_in + b_in
///   h += W2 silu(W1 LN(h) + b1) + b2          (n_blocks times)
///   logits = LN_out(h) W_out + b_out,  score = exp(logits)
///
/// Weight matrices are stored (fan_in x fan_out) so a batch is one product.
/// The same structure doubles as the gradient container.
template <typename Scalar>
struct ResidualMlp {
  struct Block {
    RowVector<Scalar> ln_gain, ln_bias;
    RowMatrix<Scalar> w1;
    RowVector<Scalar> b1;
    RowMatrix<Scalar> w2;
    RowVector<Scalar> b2;
  };

  ModelConfig config;
  RowMatrix<Scalar> w_in;
  RowVector<Scalar> b_in;
  std::vector<Block> blocks;
  RowVector<Scalar> ln_out_gain, ln_out_bias;
  RowMatrix<Scalar> w_out;
  RowVector<Scalar> b_out;

  /// All-zero tensors with the shapes implied by `config`.
  static ResidualMlp zeros(const ModelConfig& config);

  std::size_t parameter_count() const;

  /// Visits every tensor in declaration order (the checkpoint order).
  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

  /// Flat view over parameter `index` in declaration order.
  Scalar& at(std::size_t index);

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f("w_in", self.w_in.data(), static_cast<std::size_t>(self.w_in.size()));
    f("b_in", self.b_in.data(), static_cast<std::size_t>(self.b_in.size()));
    for (auto& b : self.blocks) {
      f("ln_gain", b.ln_gain.data(), static_cast<std::size_t>(b.ln_gain.size()));
      f("ln_bias", b.ln_bias.data(), static_cast<std::size_t>(b.ln_bias.size()));
      f("w1", b.w1.data(), static_cast<std::size_t>(b.w1.size()));
      f("b1", b.b1.data(), static_cast<std::size_t>(b.b1.size()));
      f("w2", b.w2.data(), static_cast<std::size_t>(b.w2.size()));
      f("b2", b.b2.data(), static_cast<std::size_t>(b.b2.size()));
    }
    f("ln_out_gain", self.ln_out_gain.data(), static_cast<std::size_t>(self.ln_out_gain.size()));
    f("ln_out_bias", self.ln_out_bias.data(), static_cast<std::size_t>(self.ln_out_bias.size()));
    f("w_out", self.w_out.data(), static_cast<std::size_t>(self.w_out.size()));
    f("b_out", self.b_out.data(), static_cast<std::size_t>(self.b_out.size()));
  }
};

using ModelParameters = ResidualMlp<float>;
template <typename Scalar>
using GradientSet = ResidualMlp<Scalar>;

template <typename To, typename From>
ResidualMlp<To> cast_model(const ResidualMlp<From>& m);

/// Deterministic in `seed`. Linear weights ~ N(0, 1/fan_in); the output
/// layer is scaled down by 10 so a fresh model starts near sigma ≡ 1.
ModelParameters init_model(const ModelConfig& config, std::uint64_t seed);

/// Sinusoidal embedding [sin(t w_0), .., sin(t w_{k-1}), cos(t w_0), ..]
/// with w_i = 10000^{-i/k}, k = dim/2.
void time_embedding(int t, std::span<float> out);

/// Activations kept for the backward pass.
template <typename Scalar>
struct ForwardCache {
  RowMatrix<Scalar> input;
  struct BlockCache {
    RowMatrix<Scalar> xhat, normed, pre, act;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rstd;
  };
  std::vector<BlockCache> blocks;
  RowMatrix<Scalar> h_last, out_xhat, out_normed;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out_rstd;
};

/// Logits for a batch. `input` rows are [features, embed(t)] already
/// assembled (see assemble_inputs). Throws NumericError naming the first
/// layer that produced a non-finite value.
template <typename Scalar>
RowMatrix<Scalar> forward_logits(const ResidualMlp<Scalar>& model, const RowMatrix<Scalar>& input,
                                 ForwardCache<Scalar>* cache = nullptr);

/// Accumulates parameter gradients of sum(d_logits ⊙ logits) into `grads`.
template <typename Scalar>
void backward_logits(const ResidualMlp<Scalar>& model, const ForwardCache<Scalar>& cache,
                     const RowMatrix<Scalar>& d_logits, ResidualMlp<Scalar>& grads);

/// Builds input rows: features of states[i] followed by embed(times[i]).
template <typename Scalar>
RowMatrix<Scalar> assemble_inputs(const GraphSpec& spec, const ModelConfig& config,
                                  std::span<const State> states, std::span<const int> times);

/// Strictly positive scores exp(logits) for one feature vector at time t.
std::vector<float> score_forward(const ModelParameters& model, std::span<const float> features,
                                 int t);

/// Batched scores; row i corresponds to features.row(i) at times[i].
RowMatrix<float> score_forward_batch(const ModelParameters& model,
                                     const RowMatrix<float>& features,
                                     std::span<const int> times);

/// The learned score behind the ScoreFunction interface.
class ModelScore final : public ScoreFunction {
 public:
  /// Throws FormatError when the model dimensions do not fit `spec`.
  ModelScore(GraphSpecPtr spec, const ModelParameters& model);

  std::size_t num_generators() const override { return spec_->num_generators(); }
  void scores(std::span<const State> states, int t, std::span<double> out) const override;

 private:
  GraphSpecPtr spec_;
  const ModelParameters& model_;
};

/// Throws FormatError unless input/output widths match the graph.
void check_model_fits(const ModelConfig& config, const GraphSpec& spec);

template <typename Scalar>
struct LossResult {
  double loss = 0.0;
  GradientSet<Scalar> grad;
};

struct LossOptions {
  bool compute_gradient = true;
  /// Rows (neighbour evaluations) per forward/backward chunk.
  std::size_t chunk_rows = 4096;
  /// Worker threads; chunks are split into this many contiguous shards and
  /// their gradients reduced in shard order.
  int shards = 1;
};

/// Cayley-graph score-entropy loss over a batch of equal-horizon trajectories:
///
///   L = sum_t [ mean_b sum_a sigma_t(x_t^b)_a - mean_b sum_a log sigma_t(x_{t-1}^b a)_{a^-1} ]
///
/// with the exact reverse-mode gradient.
template <typename Scalar>
LossResult<Scalar> loss_and_grad(const ResidualMlp<Scalar>& model, std::span<const Trajectory> batch,
                                 const GraphSpec& spec, const LossOptions& options = {});

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  ResidualMlp<Scalar> m;
  ResidualMlp<Scalar> v;
  std::uint64_t step = 0;
  AdamOptions options;

  static AdamState for_model(const ResidualMlp<Scalar>& model, AdamOptions options = {});
};

/// Bias-corrected adaptive-moment update; advances state.step by one.
template <typename Scalar>
void optimizer_step(ResidualMlp<Scalar>& model, const GradientSet<Scalar>& grads,
                    AdamState<Scalar>& state, double lr);

struct Checkpoint {
  ModelParameters model;
  std::optional<AdamState<float>> optimizer;
};

/// Binary layout documented in docs/formats.md. Writes to a temporary file
/// and renames so a crash never leaves a partial checkpoint behind.
void save_checkpoint(const std::filesystem::path& path, const ModelParameters& model,
                     const AdamState<float>* optimizer = nullptr);
/// Throws FormatError on bad magic, version, dimensions or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cayley
