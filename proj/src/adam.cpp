#include <cmath>

#include "cayley/error.hpp"
#include "cayley/model.hpp"

namespace cayley {

template <typename Scalar>
AdamState<Scalar> AdamState<Scalar>::for_model(const ResidualMlp<Scalar>& model, AdamOptions options) {
  AdamState s;
  s.m = ResidualMlp<Scalar>::zeros(model.config);
  s.v = ResidualMlp<Scalar>::zeros(model.config);
  s.options = options;
  return s;
}

template <typename Scalar>
void optimizer_step(ResidualMlp<Scalar>& model, const GradientSet<Scalar>& grads,
                    AdamState<Scalar>& state, double lr) {
  if (!(model.config == grads.config) || !(model.config == state.m.config)) {
    throw DomainError("optimizer_step: parameter, gradient and state shapes differ");
  }
  state.step += 1;
  const auto& o = state.options;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));

  std::vector<std::pair<const Scalar*, std::size_t>> g;
  grads.for_each_tensor([&](const char*, const Scalar* d, std::size_t n) { g.emplace_back(d, n); });
  std::vector<Scalar*> m, v;
  state.m.for_each_tensor([&](const char*, Scalar* d, std::size_t) { m.push_back(d); });
  state.v.for_each_tensor([&](const char*, Scalar* d, std::size_t) { v.push_back(d); });

  std::size_t i = 0;
  model.for_each_tensor([&](const char*, Scalar* p, std::size_t n) {
    const Scalar* gi = g[i].first;
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = gi[k];
      const double mk = o.beta1 * m[i][k] + (1.0 - o.beta1) * gk;
      const double vk = o.beta2 * v[i][k] + (1.0 - o.beta2) * gk * gk;
      m[i][k] = static_cast<Scalar>(mk);
      v[i][k] = static_cast<Scalar>(vk);
      const double update = lr * (mk / bc1) / (std::sqrt(vk / bc2) + o.epsilon);
      p[k] = static_cast<Scalar>(p[k] - update);
    }
    ++i;
  });
}

template struct AdamState<float>;
template struct AdamState<double>;
template void optimizer_step(ResidualMlp<float>&, const GradientSet<float>&, AdamState<float>&,
                             double);
template void optimizer_step(ResidualMlp<double>&, const GradientSet<double>&, AdamState<double>&,
                             double);

}  // namespace cayley
