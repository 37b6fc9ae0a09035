#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "ecosim/predictor.hpp"
#include "test_util.hpp"

using namespace ecosim;
using testutil::TempDir;

namespace {

PredictorConfig small_config() {
  PredictorConfig cfg;
  cfg.window = 16;
  cfg.embed_dim = 8;
  cfg.heads = 2;
  cfg.ffn_dim = 16;
  cfg.epochs = 10;
  cfg.seed = 1;
  return cfg;
}

PredictorConfig train_config() {
  PredictorConfig cfg;
  cfg.window = 32;
  cfg.embed_dim = 32;
  cfg.heads = 4;
  cfg.ffn_dim = 64;
  cfg.epochs = 30;
  cfg.seed = 1;
  return cfg;
}

std::vector<double> sine_series(int n, double mean, double amp, double period) {
  std::vector<double> s(n);
  for (int t = 0; t < n; ++t) s[t] = mean + amp * std::sin(2 * M_PI * t / period);
  return s;
}

SeriesSample one_sample(int window) {
  SeriesSample s;
  s.input.resize(window);
  for (int i = 0; i < window; ++i) s.input[i] = std::sin(i * 0.4);
  s.target = 0.3;
  return s;
}

}  // namespace

TEST_CASE("positional encoding") {
  auto pe = positional_encode(50, 8);
  REQUIRE(pe.rows() == 50);
  REQUIRE(pe.cols() == 8);

  SUBCASE("position zero alternates 0 and 1") {
    for (int j = 0; j < 8; j += 2) {
      CHECK(pe(0, j) == doctest::Approx(0.0));
      CHECK(pe(0, j + 1) == doctest::Approx(1.0));
    }
  }

  SUBCASE("first sine column at position one") {
    CHECK(pe(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-9));
    CHECK(pe(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  }

  SUBCASE("all entries within [-1, 1]") {
    CHECK(pe.maxCoeff() <= 1.0 + 1e-12);
    CHECK(pe.minCoeff() >= -1.0 - 1e-12);
  }
}

TEST_CASE("make_samples builds chronological windows") {
  std::vector<double> series = {1, 2, 3, 4, 5, 6};
  auto samples = make_samples(series, 3);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].input == std::vector<double>{1, 2, 3});
  CHECK(samples[0].target == doctest::Approx(4.0));
  CHECK(samples[2].input == std::vector<double>{3, 4, 5});
  CHECK(samples[2].target == doctest::Approx(6.0));
}

TEST_CASE("model structure properties") {
  auto cfg = small_config();
  PredictorModel m(cfg);

  SUBCASE("zeroed decoder outputs zero for any input") {
    auto& p = m.params();
    int off = m.decoder_weight_offset();
    for (int i = 0; i < cfg.embed_dim; ++i) p[off + i] = 0.0;
    p[m.decoder_bias_offset()] = 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Random(cfg.window);
    CHECK(m.forward(x) == doctest::Approx(0.0));
  }

  SUBCASE("attention rows sum to one") {
    Eigen::VectorXd x = Eigen::VectorXd::Random(cfg.window);
    PredictorModel::Cache cache;
    m.forward_cached(x, cache);
    REQUIRE(cache.attn.size() == static_cast<size_t>(cfg.heads));
    for (const auto& a : cache.attn)
      for (int r = 0; r < a.rows(); ++r)
        CHECK(a.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("positional encoding makes the model order-sensitive") {
    Eigen::VectorXd x(cfg.window);
    for (int i = 0; i < cfg.window; ++i) x[i] = std::sin(i * 0.7);
    Eigen::VectorXd y = x;
    std::swap(y[2], y[11]);
    CHECK(m.forward(x) != doctest::Approx(m.forward(y)));
  }
}

TEST_CASE("gradients") {
  auto cfg = small_config();
  PredictorModel m(cfg);
  auto sample = one_sample(cfg.window);

  SUBCASE("analytic gradient matches central differences") {
    CHECK(m.gradient_check(sample) < 1e-4);
  }

  SUBCASE("decoder-weight gradient equals the closed form") {
    Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(sample.input.data(), cfg.window);
    PredictorModel::Cache cache;
    double yhat = m.forward_cached(x, cache);
    std::vector<double> grad(m.param_count(), 0.0);
    m.backward(x, sample.target, grad);
    int off = m.decoder_weight_offset();
    for (int i = 0; i < cfg.embed_dim; ++i) {
      double expect = 2.0 * (yhat - sample.target) * cache.pooled[i];
      CHECK(grad[off + i] == doctest::Approx(expect).epsilon(1e-8));
    }
    CHECK(grad[m.decoder_bias_offset()] ==
          doctest::Approx(2.0 * (yhat - sample.target)).epsilon(1e-8));
  }

  SUBCASE("zero-loss sample has zero gradients") {
    Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(sample.input.data(), cfg.window);
    double yhat = m.forward(x);
    std::vector<double> grad(m.param_count(), 0.0);
    m.backward(x, yhat, grad);
    for (double g : grad) CHECK(std::abs(g) < 1e-10);
  }
}

TEST_CASE("training") {
  SUBCASE("zero learning rate changes nothing") {
    auto cfg = small_config();
    cfg.lr = 0.0;
    cfg.epochs = 3;
    PredictorModel m(cfg);
    auto before = m.params();
    auto rep = m.train(make_samples(sine_series(120, 3, 1, 25), cfg.window));
    CHECK(m.params() == before);
    REQUIRE(rep.epoch_loss.size() == 3);
    CHECK(rep.epoch_loss[1] == doctest::Approx(rep.epoch_loss[0]));
    CHECK(rep.epoch_loss[2] == doctest::Approx(rep.epoch_loss[0]));
  }

  SUBCASE("constant series is fit within 1%") {
    auto cfg = train_config();
    cfg.epochs = 10;
    PredictorModel m(cfg);
    m.train(make_samples(std::vector<double>(300, 5.0), cfg.window));
    double pred = m.predict(std::vector<double>(cfg.window, 5.0));
    CHECK(pred == doctest::Approx(5.0).epsilon(0.01));
  }

  SUBCASE("sine fixture beats persistence and 10% of amplitude") {
    auto cfg = train_config();
    PredictorModel m(cfg);
    auto rep = m.train(make_samples(sine_series(600, 3.0, 2.0, 50.0), cfg.window));
    CHECK(rep.test_rmse < rep.persistence_rmse);
    CHECK(rep.test_rmse < 0.1 * 2.0);
  }
}

TEST_CASE("checkpoint round trip") {
  TempDir tmp("pred_ckpt");
  auto cfg = small_config();
  cfg.epochs = 4;
  PredictorModel m(cfg);
  auto series = sine_series(120, 2.0, 0.5, 20.0);
  m.train(make_samples(series, cfg.window));
  auto path = tmp.path("model.json");
  m.save(path);
  auto loaded = PredictorModel::load(path);
  CHECK(loaded.trained());
  CHECK(loaded.param_count() == m.param_count());
  std::vector<double> window(series.end() - cfg.window, series.end());
  CHECK(loaded.predict(window) == doctest::Approx(m.predict(window)).epsilon(1e-12));
}

TEST_CASE("channel prediction fallback and clamping") {
  SUBCASE("missing model falls back to the last value") {
    auto out = predict_channel(nullptr, {1.0, 4.0, 8.0}, 0.0, 100.0);
    CHECK(out.value == doctest::Approx(8.0));
    CHECK(out.fallback);
    CHECK_FALSE(out.clamped);
  }

  SUBCASE("negative values clamp to the lower bound with a flag") {
    auto out = predict_channel(nullptr, {1.0, -0.3}, 0.0, 100.0);
    CHECK(out.value == doctest::Approx(0.0));
    CHECK(out.clamped);
  }

  SUBCASE("untrained model also falls back") {
    PredictorModel m(small_config());
    auto out = predict_channel(&m, std::vector<double>(16, 2.5), 0.0, 10.0);
    CHECK(out.value == doctest::Approx(2.5));
    CHECK(out.fallback);
  }
}
