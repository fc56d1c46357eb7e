#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cayley/diffusion.hpp"
#include "cayley/error.hpp"
#include "cayley/training.hpp"
#include "fidelity.hpp"

using namespace cayley;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cayley_training_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TrainConfig small_config(GraphSpecPtr spec, int T) {
  TrainConfig c;
  c.spec = std::move(spec);
  c.horizon = T;
  c.batch_size = 32;
  c.total_trajectories = 3200;
  c.lr = 3e-3;
  c.lr_final = 3e-4;
  c.hidden_dim = 24;
  c.n_blocks = 2;
  c.time_embed_dim = 8;
  c.log_every = 10;
  c.checkpoint_every = 1600;
  c.seed = 5;
  return c;
}

/// A model whose exponential head is exactly one everywhere.
ModelParameters unit_model(const GraphSpec& spec, int T) {
  ModelConfig mc;
  mc.input_dim = static_cast<std::uint32_t>(spec.feature_dim());
  mc.output_dim = static_cast<std::uint32_t>(spec.num_generators());
  mc.hidden_dim = 16;
  mc.n_blocks = 1;
  mc.horizon = static_cast<std::uint32_t>(T);
  auto m = init_model(mc, 1);
  m.w_out.setZero();
  m.b_out.setZero();
  return m;
}

std::vector<std::string> without_seconds(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

// First implementation measured 120.1 -> 91.8 (23.5%). The exact loss
// floor for this graph and horizon is 82.83 against 120 at sigma = 1.
constexpr double kSmokeDrop = 0.20;

}  // namespace

TEST_CASE("evaluate_loss") {
  auto spec = make_sl2p(7);
  const auto m = init_model(ModelConfig{static_cast<std::uint32_t>(spec->feature_dim()), 8, 16, 1, 4, 6}, 2);
  CHECK(evaluate_loss(m, *spec, 6, 200, 3) == evaluate_loss(m, *spec, 6, 200, 3));
  CHECK(evaluate_loss(m, *spec, 6, 200, 3) != evaluate_loss(m, *spec, 6, 200, 4));
  CHECK(evaluate_loss(unit_model(*spec, 6), *spec, 6, 100, 1) == doctest::Approx(6 * 4));
  CHECK(evaluate_loss(unit_model(*spec, 9), *spec, 9, 100, 1) == doctest::Approx(9 * 4));
}

TEST_CASE("training is deterministic and writes its artifacts") {
  auto spec = make_sl2p(7);
  auto a = small_config(spec, 6), b = small_config(spec, 6);
  a.output_dir = fresh_dir("det_a");
  b.output_dir = fresh_dir("det_b");
  const auto ra = train(a);
  const auto rb = train(b);
  REQUIRE(ra.metrics.size() == rb.metrics.size());
  CHECK(ra.metrics.size() == 10);
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    CHECK(ra.metrics[i].step == rb.metrics[i].step);
    CHECK(ra.metrics[i].trajectories == rb.metrics[i].trajectories);
    CHECK(ra.metrics[i].loss == rb.metrics[i].loss);
    CHECK(std::isfinite(ra.metrics[i].loss));
  }
  CHECK(without_seconds(a.output_dir / "metrics.csv") == without_seconds(b.output_dir / "metrics.csv"));
  CHECK(without_seconds(a.output_dir / "metrics.csv").front() == "step,trajectories,loss");
  CHECK(std::filesystem::exists(a.output_dir / "checkpoint.cdsm"));
  CHECK(ra.checkpoints.size() == 1);
  const auto ck = load_checkpoint(a.output_dir / "checkpoint.cdsm");
  CHECK(ck.optimizer.has_value());
  CHECK(ck.optimizer->step == 100);
  CHECK(ck.model.config.horizon == 6);

  auto c = small_config(spec, 6);
  c.seed = 6;
  CHECK(train(c).metrics.front().loss != ra.metrics.front().loss);
}

TEST_CASE("resuming with no further steps reproduces the checkpointed model") {
  auto spec = make_sl2p(5);
  auto c = small_config(spec, 5);
  c.output_dir = fresh_dir("resume");
  const auto first = train(c);
  const double before = evaluate_loss(first.model, *spec, 5, 300, 9);

  auto again = c;
  again.resume = c.output_dir / "checkpoint.cdsm";
  again.output_dir = fresh_dir("resume_again");
  const auto second = train(again);
  CHECK(second.optimizer.step == first.optimizer.step);
  CHECK(evaluate_loss(second.model, *spec, 5, 300, 9) == before);

  // Resuming a shorter budget's checkpoint continues where it stopped.
  auto half = c;
  half.total_trajectories = 1600;
  half.output_dir = fresh_dir("resume_half");
  train(half);
  auto rest = c;
  rest.resume = half.output_dir / "checkpoint.cdsm";
  rest.output_dir = fresh_dir("resume_rest");
  const auto continued = train(rest);
  CHECK(continued.optimizer.step == first.optimizer.step);
}

TEST_CASE("alg3 runs to completion with a valid reversed-score kernel") {
  auto spec = make_sl2p(7);
  auto c = small_config(spec, 6);
  c.algorithm = Algorithm::kReversedScore;
  c.checkpoint_every = 800;
  c.output_dir = fresh_dir("alg3");
  const auto r = train(c);
  for (const auto& row : r.metrics) CHECK(std::isfinite(row.loss));
  const auto ck = load_checkpoint(c.output_dir / "checkpoint.cdsm");
  ModelScore score(spec, ck.model);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto x = uniform_state(*spec, rng);
    const int t = i % 6;
    const auto q = reversed_score_probabilities(*spec, x, t, score);
    double total = 0.0;
    for (double v : q) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("training on Z4 recovers the exact score") {
  auto spec = make_cyclic(4);
  const int T = 4;
  auto c = small_config(spec, T);
  c.batch_size = 128;
  c.total_trajectories = 128 * 1500;
  c.lr = 3e-3;
  c.lr_final = 1e-5;
  c.hidden_dim = 32;
  c.checkpoint_every = c.total_trajectories;
  c.log_every = 100;
  const auto init = init_model(
      ModelConfig{static_cast<std::uint32_t>(spec->feature_dim()), 8, 32, 2, 2, T}, c.seed);
  const auto r = train(c);
  CHECK(evaluate_loss(r.model, *spec, T, 2000, 1) < evaluate_loss(init, *spec, T, 2000, 1));
  const auto tables = exact_probabilities(*spec, T);
  const auto report = cayley::testing::score_fidelity(spec, tables, r.model);
  CAPTURE(report.max_relative_error);
  CAPTURE(report.max_zero_fraction);
  CHECK(report.within(0.10));
}

TEST_CASE("sl2p(31) alg1 smoke run lowers the loss") {
  auto spec = make_sl2p(31);
  const int T = 30;
  TrainConfig c;
  c.spec = spec;
  c.horizon = T;
  c.batch_size = 100;
  c.total_trajectories = 30000;
  c.lr = 2e-3;
  c.lr_final = 1e-4;
  c.hidden_dim = 64;
  c.n_blocks = 2;
  c.log_every = 50;
  c.checkpoint_every = c.total_trajectories;
  c.seed = 1;
  const auto init = init_model(
      ModelConfig{static_cast<std::uint32_t>(spec->feature_dim()), 16, 64, 2, 4, T}, c.seed);
  const auto r = train(c);
  const double before = evaluate_loss(init, *spec, T, 1000, 2);
  const double after = evaluate_loss(r.model, *spec, T, 1000, 2);
  MESSAGE("initial " << before << " final " << after);
  CHECK(after < before * (1.0 - kSmokeDrop));
}

TEST_CASE("train config parsing") {
  auto kv = KeyValueConfig::parse("spec=sl2p\np=7\nT=6\nalg=alg3\nbatch_size=10\n");
  const auto c = train_config_from(kv);
  CHECK(c.horizon == 6);
  CHECK(c.algorithm == Algorithm::kReversedScore);
  CHECK(c.batch_size == 10);
  CHECK_THROWS_AS(train_config_from(KeyValueConfig::parse("spec=sl2p\np=7\n")), UsageError);
  CHECK_THROWS_AS(train_config_from(KeyValueConfig::parse("spec=sl2p\np=7\nT=3\nbogus=1\n")), UsageError);
  CHECK_THROWS_AS(train_config_from(KeyValueConfig::parse("spec=sl2p\np=7\nT=3\nalg=alg2\n")), UsageError);
  CHECK(train_config_from(KeyValueConfig::parse("spec=cube2\n")).horizon == 20);
}
