#include <cmath>
#include <thread>

#include "cayley/error.hpp"
#include "cayley/model.hpp"

namespace cayley {
namespace {

template <typename Scalar>
void add_into(ResidualMlp<Scalar>& acc, const ResidualMlp<Scalar>& g) {
  std::vector<const Scalar*> src;
  g.for_each_tensor([&](const char*, const Scalar* d, std::size_t) { src.push_back(d); });
  std::size_t i = 0;
  acc.for_each_tensor([&](const char*, Scalar* d, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) d[k] += src[i][k];
    ++i;
  });
}

// Row r enumerates (trajectory b, time t in 1..T, generator a) as
// ((b * T) + (t - 1)) * |S| + a; its state is x_{t-1}^b · a evaluated at t.
template <typename Scalar>
double process_rows(const ResidualMlp<Scalar>& model, std::span<const Trajectory> batch,
                    const GraphSpec& spec, std::size_t row_begin, std::size_t row_end,
                    const LossOptions& options, ResidualMlp<Scalar>* grad) {
  const auto n_gen = spec.num_generators();
  const auto T = static_cast<std::size_t>(batch.front().horizon());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<State> states;
  std::vector<int> times;
  std::vector<std::size_t> traj_of, time_of, gen_of;
  ForwardCache<Scalar> cache;
  for (std::size_t begin = row_begin; begin < row_end; begin += options.chunk_rows) {
    const std::size_t end = std::min(row_end, begin + options.chunk_rows);
    const std::size_t rows = end - begin;
    states.resize(rows);
    times.resize(rows);
    gen_of.resize(rows);
    traj_of.resize(rows);
    time_of.resize(rows);
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t a = r % n_gen;
      const std::size_t bt = r / n_gen;
      const std::size_t b = bt / T;
      const std::size_t t = bt % T + 1;
      spec.apply_into(batch[b].states[t - 1], static_cast<Move>(a), states[r - begin]);
      times[r - begin] = static_cast<int>(t);
      gen_of[r - begin] = a;
      traj_of[r - begin] = b;
      time_of[r - begin] = t;
    }
    const auto input = assemble_inputs<Scalar>(spec, model.config, states, times);
    const RowMatrix<Scalar> logits = forward_logits(model, input, grad ? &cache : nullptr);
    RowMatrix<Scalar> d_logits;
    if (grad) d_logits = RowMatrix<Scalar>::Zero(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const std::size_t a = gen_of[i];
      const auto inv = static_cast<Eigen::Index>(spec.generators().inverse(static_cast<Move>(a)));
      // Second term: -log sigma_t(x_{t-1} a)_{a^{-1}} = -logit.
      loss -= inv_b * static_cast<double>(logits(row, inv));
      if (grad) d_logits(row, inv) -= static_cast<Scalar>(inv_b);
      // First term: the neighbour reached by the recorded move is x_t.
      const auto& traj = batch[traj_of[i]];
      if (static_cast<std::size_t>(traj.moves[time_of[i] - 1]) == a) {
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
          const double s = std::exp(static_cast<double>(logits(row, c)));
          loss += inv_b * s;
          if (grad) d_logits(row, c) += static_cast<Scalar>(inv_b * s);
        }
      }
    }
    if (grad) backward_logits(model, cache, d_logits, *grad);
  }
  return loss;
}

}  // namespace

template <typename Scalar>
LossResult<Scalar> loss_and_grad(const ResidualMlp<Scalar>& model, std::span<const Trajectory> batch,
                                 const GraphSpec& spec, const LossOptions& options) {
  if (batch.empty()) throw DomainError("loss_and_grad: empty batch");
  check_model_fits(model.config, spec);
  const int T = batch.front().horizon();
  if (T < 1) throw DomainError("loss_and_grad: trajectories must have at least one move");
  for (const auto& traj : batch) {
    if (traj.horizon() != T || traj.states.size() != traj.moves.size() + 1) {
      throw DomainError("loss_and_grad: trajectories must share one horizon");
    }
  }
  if (model.config.horizon > 0 && static_cast<std::uint32_t>(T) > model.config.horizon) {
    throw DomainError("loss_and_grad: trajectory horizon exceeds model horizon");
  }
  const std::size_t total_rows =
      batch.size() * static_cast<std::size_t>(T) * spec.num_generators();
  LossOptions opts = options;
  if (opts.chunk_rows == 0) opts.chunk_rows = 4096;
  const std::size_t n_chunks = (total_rows + opts.chunk_rows - 1) / opts.chunk_rows;
  const std::size_t shards = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, opts.shards)), 1, n_chunks);

  LossResult<Scalar> result;
  result.grad = ResidualMlp<Scalar>::zeros(model.config);
  std::vector<double> shard_loss(shards, 0.0);
  std::vector<ResidualMlp<Scalar>> shard_grad;
  if (shards > 1 && opts.compute_gradient) {
    shard_grad.assign(shards, ResidualMlp<Scalar>::zeros(model.config));
  }
  const auto shard_rows = [&](std::size_t s) {
    const std::size_t c0 = n_chunks * s / shards, c1 = n_chunks * (s + 1) / shards;
    return std::pair{c0 * opts.chunk_rows, std::min(total_rows, c1 * opts.chunk_rows)};
  };
  if (shards == 1) {
    shard_loss[0] = process_rows(model, batch, spec, 0, total_rows, opts,
                                 opts.compute_gradient ? &result.grad : nullptr);
  } else {
    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> workers;
    for (std::size_t s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        try {
          const auto [r0, r1] = shard_rows(s);
          shard_loss[s] = process_rows(model, batch, spec, r0, r1, opts,
                                       opts.compute_gradient ? &shard_grad[s] : nullptr);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    if (opts.compute_gradient) {
      for (const auto& g : shard_grad) add_into(result.grad, g);
    }
  }
  for (double l : shard_loss) result.loss += l;
  if (!std::isfinite(result.loss)) throw NumericError("loss_and_grad: non-finite loss");
  return result;
}

template LossResult<float> loss_and_grad(const ResidualMlp<float>&, std::span<const Trajectory>,
                                         const GraphSpec&, const LossOptions&);
template LossResult<double> loss_and_grad(const ResidualMlp<double>&, std::span<const Trajectory>,
                                          const GraphSpec&, const LossOptions&);

}  // namespace cayley
