#include <cmath>
#include <random>

#include "cayley/error.hpp"
#include "cayley/model.hpp"

namespace cayley {
namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
void layer_norm(const RowMatrix<Scalar>& x, const RowVector<Scalar>& gain,
                const RowVector<Scalar>& bias, RowMatrix<Scalar>& xhat, ColVector<Scalar>& rstd,
                RowMatrix<Scalar>& y) {
  const auto cols = static_cast<Scalar>(x.cols());
  const ColVector<Scalar> mean = x.rowwise().sum() / cols;
  xhat = x.colwise() - mean;
  const ColVector<Scalar> var = xhat.array().square().rowwise().sum() / cols;
  rstd = (var.array() + static_cast<Scalar>(kLayerNormEps)).rsqrt();
  xhat.array().colwise() *= rstd.array();
  y = (xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
}

// Gradient wrt the normalized input given dy; accumulates dgain/dbias.
template <typename Scalar>
RowMatrix<Scalar> layer_norm_backward(const RowMatrix<Scalar>& dy, const RowMatrix<Scalar>& xhat,
                                      const ColVector<Scalar>& rstd, const RowVector<Scalar>& gain,
                                      RowVector<Scalar>& dgain, RowVector<Scalar>& dbias) {
  dgain += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  const auto cols = static_cast<Scalar>(dy.cols());
  RowMatrix<Scalar> dxhat = dy.array().rowwise() * gain.array();
  const ColVector<Scalar> m1 = dxhat.rowwise().sum() / cols;
  const ColVector<Scalar> m2 = (dxhat.array() * xhat.array()).rowwise().sum().matrix() / cols;
  RowMatrix<Scalar> dx = dxhat.colwise() - m1;
  dx.array() -= xhat.array().colwise() * m2.array();
  dx.array().colwise() *= rstd.array();
  return dx;
}

template <typename Scalar>
void check_finite(const RowMatrix<Scalar>& m, const std::string& layer) {
  if (!m.allFinite()) throw NumericError("non-finite activation in layer " + layer);
}

template <typename Scalar>
void fill_normal(RowMatrix<Scalar>& w, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
}

}  // namespace

template <typename Scalar>
ResidualMlp<Scalar> ResidualMlp<Scalar>::zeros(const ModelConfig& c) {
  if (c.input_dim == 0 || c.hidden_dim == 0 || c.output_dim == 0 || c.n_blocks == 0) {
    throw DomainError("model dimensions must be positive");
  }
  if (c.time_embed_dim % 2 != 0) throw DomainError("time embedding dimension must be even");
  const Eigen::Index in = c.input_dim + c.time_embed_dim, h = c.hidden_dim, out = c.output_dim;
  ResidualMlp m;
  m.config = c;
  m.w_in = RowMatrix<Scalar>::Zero(in, h);
  m.b_in = RowVector<Scalar>::Zero(h);
  m.blocks.resize(c.n_blocks);
  for (auto& b : m.blocks) {
    b.ln_gain = RowVector<Scalar>::Zero(h);
    b.ln_bias = RowVector<Scalar>::Zero(h);
    b.w1 = RowMatrix<Scalar>::Zero(h, h);
    b.b1 = RowVector<Scalar>::Zero(h);
    b.w2 = RowMatrix<Scalar>::Zero(h, h);
    b.b2 = RowVector<Scalar>::Zero(h);
  }
  m.ln_out_gain = RowVector<Scalar>::Zero(h);
  m.ln_out_bias = RowVector<Scalar>::Zero(h);
  m.w_out = RowMatrix<Scalar>::Zero(h, out);
  m.b_out = RowVector<Scalar>::Zero(out);
  return m;
}

template <typename Scalar>
std::size_t ResidualMlp<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const char*, const Scalar*, std::size_t size) { n += size; });
  return n;
}

template <typename Scalar>
Scalar& ResidualMlp<Scalar>::at(std::size_t index) {
  Scalar* found = nullptr;
  std::size_t offset = 0;
  for_each_tensor([&](const char*, Scalar* data, std::size_t size) {
    if (!found && index < offset + size) found = data + (index - offset);
    offset += size;
  });
  if (!found) throw DomainError("parameter index out of range");
  return *found;
}

template <typename To, typename From>
ResidualMlp<To> cast_model(const ResidualMlp<From>& m) {
  auto out = ResidualMlp<To>::zeros(m.config);
  std::vector<const From*> src;
  m.for_each_tensor([&](const char*, const From* data, std::size_t) { src.push_back(data); });
  std::size_t i = 0;
  out.for_each_tensor([&](const char*, To* data, std::size_t size) {
    for (std::size_t k = 0; k < size; ++k) data[k] = static_cast<To>(src[i][k]);
    ++i;
  });
  return out;
}

ModelParameters init_model(const ModelConfig& config, std::uint64_t seed) {
  auto m = ModelParameters::zeros(config);
  Rng rng(seed);
  const auto fan = [](const RowMatrix<float>& w) { return 1.0 / std::sqrt(static_cast<double>(w.rows())); };
  fill_normal(m.w_in, fan(m.w_in), rng);
  for (auto& b : m.blocks) {
    b.ln_gain.setOnes();
    fill_normal(b.w1, fan(b.w1), rng);
    fill_normal(b.w2, fan(b.w2), rng);
  }
  m.ln_out_gain.setOnes();
  fill_normal(m.w_out, 0.1 * fan(m.w_out), rng);
  return m;
}

void time_embedding(int t, std::span<float> out) {
  const std::size_t half = out.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
    out[i] = static_cast<float>(std::sin(t * freq));
    out[half + i] = static_cast<float>(std::cos(t * freq));
  }
}

template <typename Scalar>
RowMatrix<Scalar> assemble_inputs(const GraphSpec& spec, const ModelConfig& config,
                                  std::span<const State> states, std::span<const int> times) {
  const auto fdim = static_cast<std::size_t>(config.input_dim);
  const auto edim = static_cast<std::size_t>(config.time_embed_dim);
  RowMatrix<Scalar> input(static_cast<Eigen::Index>(states.size()),
                          static_cast<Eigen::Index>(fdim + edim));
  std::vector<float> buf(fdim + edim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    spec.encode_features_into(states[i], std::span<float>(buf).first(fdim));
    time_embedding(times[i], std::span<float>(buf).subspan(fdim));
    for (std::size_t k = 0; k < buf.size(); ++k) {
      input(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<Scalar>(buf[k]);
    }
  }
  return input;
}

template <typename Scalar>
RowMatrix<Scalar> forward_logits(const ResidualMlp<Scalar>& model, const RowMatrix<Scalar>& input,
                                 ForwardCache<Scalar>* cache) {
  if (input.cols() != static_cast<Eigen::Index>(model.config.input_dim + model.config.time_embed_dim)) {
    throw DomainError("forward_logits: input width does not match model");
  }
  RowMatrix<Scalar> h = input * model.w_in;
  h.rowwise() += model.b_in;
  check_finite(h, "input");

  ForwardCache<Scalar> local;
  auto& c = cache ? *cache : local;
  c.blocks.resize(model.blocks.size());
  if (cache) c.input = input;

  for (std::size_t k = 0; k < model.blocks.size(); ++k) {
    const auto& b = model.blocks[k];
    auto& bc = c.blocks[k];
    layer_norm(h, b.ln_gain, b.ln_bias, bc.xhat, bc.rstd, bc.normed);
    bc.pre = bc.normed * b.w1;
    bc.pre.rowwise() += b.b1;
    bc.act = bc.pre.array() / (Scalar(1) + (-bc.pre.array()).exp());
    h.noalias() += bc.act * b.w2;
    h.rowwise() += b.b2;
    check_finite(h, "block " + std::to_string(k));
  }
  c.h_last = h;
  layer_norm(h, model.ln_out_gain, model.ln_out_bias, c.out_xhat, c.out_rstd, c.out_normed);
  RowMatrix<Scalar> logits = c.out_normed * model.w_out;
  logits.rowwise() += model.b_out;
  check_finite(logits, "output");
  return logits;
}

template <typename Scalar>
void backward_logits(const ResidualMlp<Scalar>& model, const ForwardCache<Scalar>& c,
                     const RowMatrix<Scalar>& d_logits, ResidualMlp<Scalar>& g) {
  g.w_out.noalias() += c.out_normed.transpose() * d_logits;
  g.b_out += d_logits.colwise().sum();
  RowMatrix<Scalar> d_normed = d_logits * model.w_out.transpose();
  RowMatrix<Scalar> dh = layer_norm_backward<Scalar>(d_normed, c.out_xhat, c.out_rstd,
                                                     model.ln_out_gain, g.ln_out_gain,
                                                     g.ln_out_bias);
  for (std::size_t k = model.blocks.size(); k-- > 0;) {
    const auto& b = model.blocks[k];
    const auto& bc = c.blocks[k];
    auto& gb = g.blocks[k];
    gb.w2.noalias() += bc.act.transpose() * dh;
    gb.b2 += dh.colwise().sum();
    RowMatrix<Scalar> d_pre = dh * b.w2.transpose();
    {
      const auto sig = (Scalar(1) / (Scalar(1) + (-bc.pre.array()).exp())).eval();
      d_pre.array() *= sig * (Scalar(1) + bc.pre.array() * (Scalar(1) - sig));
    }
    gb.w1.noalias() += bc.normed.transpose() * d_pre;
    gb.b1 += d_pre.colwise().sum();
    const RowMatrix<Scalar> d_normed_k = d_pre * b.w1.transpose();
    dh += layer_norm_backward<Scalar>(d_normed_k, bc.xhat, bc.rstd, b.ln_gain, gb.ln_gain,
                                      gb.ln_bias);
  }
  g.w_in.noalias() += c.input.transpose() * dh;
  g.b_in += dh.colwise().sum();
}

void check_model_fits(const ModelConfig& config, const GraphSpec& spec) {
  if (config.input_dim != spec.feature_dim() || config.output_dim != spec.num_generators()) {
    throw FormatError("model dimensions (input " + std::to_string(config.input_dim) + ", output " +
                      std::to_string(config.output_dim) + ") do not match " + spec.label() +
                      " (features " + std::to_string(spec.feature_dim()) + ", generators " +
                      std::to_string(spec.num_generators()) + ")");
  }
}

std::vector<float> score_forward(const ModelParameters& model, std::span<const float> features,
                                 int t) {
  if (features.size() != model.config.input_dim) {
    throw DomainError("score_forward: feature vector has wrong length");
  }
  RowMatrix<float> f(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) f(0, static_cast<Eigen::Index>(i)) = features[i];
  const int times[1] = {t};
  const auto s = score_forward_batch(model, f, times);
  return {s.data(), s.data() + s.size()};
}

RowMatrix<float> score_forward_batch(const ModelParameters& model, const RowMatrix<float>& features,
                                     std::span<const int> times) {
  const auto& cfg = model.config;
  if (features.cols() != static_cast<Eigen::Index>(cfg.input_dim) ||
      static_cast<std::size_t>(features.rows()) != times.size()) {
    throw DomainError("score_forward_batch: shape mismatch");
  }
  RowMatrix<float> input(features.rows(), cfg.input_dim + cfg.time_embed_dim);
  input.leftCols(cfg.input_dim) = features;
  std::vector<float> emb(cfg.time_embed_dim);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 1 || (cfg.horizon > 0 && static_cast<std::uint32_t>(times[i]) > cfg.horizon)) {
      throw DomainError("score_forward: time " + std::to_string(times[i]) + " outside [1, T]");
    }
    time_embedding(times[i], emb);
    for (std::size_t k = 0; k < emb.size(); ++k) {
      input(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cfg.input_dim + k)) = emb[k];
    }
  }
  RowMatrix<float> s = forward_logits(model, input).array().exp();
  if (!s.allFinite()) throw NumericError("score overflow in exponential head");
  return s;
}

ModelScore::ModelScore(GraphSpecPtr spec, const ModelParameters& model)
    : spec_(std::move(spec)), model_(model) {
  check_model_fits(model_.config, *spec_);
}

void ModelScore::scores(std::span<const State> states, int t, std::span<double> out) const {
  const auto& cfg = model_.config;
  if (t < 1 || (cfg.horizon > 0 && static_cast<std::uint32_t>(t) > cfg.horizon)) {
    throw DomainError("score time " + std::to_string(t) + " outside [1, T]");
  }
  constexpr std::size_t kChunk = 2048;
  const std::size_t n = spec_->num_generators();
  std::vector<int> times;
  for (std::size_t begin = 0; begin < states.size(); begin += kChunk) {
    const std::size_t end = std::min(states.size(), begin + kChunk);
    times.assign(end - begin, t);
    const auto input = assemble_inputs<float>(*spec_, cfg, states.subspan(begin, end - begin), times);
    const RowMatrix<float> s = forward_logits(model_, input).array().exp();
    if (!s.allFinite()) throw NumericError("score overflow in exponential head");
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (std::size_t a = 0; a < n; ++a) {
        out[(begin + static_cast<std::size_t>(i)) * n + a] = s(i, static_cast<Eigen::Index>(a));
      }
    }
  }
}

template struct ResidualMlp<float>;
template struct ResidualMlp<double>;
template ResidualMlp<double> cast_model(const ResidualMlp<float>&);
template ResidualMlp<float> cast_model(const ResidualMlp<double>&);
template ResidualMlp<float> cast_model(const ResidualMlp<float>&);
template RowMatrix<float> assemble_inputs<float>(const GraphSpec&, const ModelConfig&,
                                                 std::span<const State>, std::span<const int>);
template RowMatrix<double> assemble_inputs<double>(const GraphSpec&, const ModelConfig&,
                                                   std::span<const State>, std::span<const int>);
template RowMatrix<float> forward_logits(const ResidualMlp<float>&, const RowMatrix<float>&,
                                         ForwardCache<float>*);
template RowMatrix<double> forward_logits(const ResidualMlp<double>&, const RowMatrix<double>&,
                                          ForwardCache<double>*);
template void backward_logits(const ResidualMlp<float>&, const ForwardCache<float>&,
                              const RowMatrix<float>&, ResidualMlp<float>&);
template void backward_logits(const ResidualMlp<double>&, const ForwardCache<double>&,
                              const RowMatrix<double>&, ResidualMlp<double>&);

}  // namespace cayley
