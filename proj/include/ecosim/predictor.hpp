#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ecosim/simulation.hpp"

namespace ecosim {

struct PredictorConfig {
  int window = 250;
  int embed_dim = 250;
  int heads = 10;
  int encoder_layers = 1;  // single-layer encoder
  int ffn_dim = 1000;
  double lr = 1e-3;
  double lr_decay = 0.95;
  int epochs = 20;
  int batch_size = 32;
  double train_fraction = 0.8;
  bool mean_pool = false;  // default: last-position pooling
  uint64_t seed = 1;

  void validate() const;
};

struct SeriesSample {
  std::vector<double> input;  // window scalars, oldest first
  double target = 0.0;
};

// sinusoidal table, window x embed_dim
Eigen::MatrixXd positional_encode(int window, int embed_dim);

struct TrainReport {
  std::vector<double> epoch_loss;  // mean normalized MSE per epoch
  double train_rmse = 0.0;         // denormalized
  double test_rmse = 0.0;
  double persistence_rmse = 0.0;   // last-value baseline on the test split
};

// One-layer encoder regressor: scalar embedding + positional encoding,
// multi-head self-attention and FFN with post-residual layer norm, pooled
// representation through a linear decoder.
class PredictorModel {
 public:
  explicit PredictorModel(const PredictorConfig& cfg);

  const PredictorConfig& config() const { return cfg_; }

  // raw (unnormalized) scalar prediction for the next step
  double predict(const std::vector<double>& window) const;

  // normalized-space forward pass (used internally and by the tests)
  double forward(const Eigen::VectorXd& x) const;

  // forward keeping intermediates; attention rows exposed for verification
  struct Cache;
  double forward_cached(const Eigen::VectorXd& x, Cache& cache) const;

  // squared-error backward pass; accumulates into grad (same layout as params)
  double backward(const Eigen::VectorXd& x, double target,
                  std::vector<double>& grad) const;

  TrainReport train(const std::vector<SeriesSample>& dataset);

  // max relative error of analytic vs central-difference gradients on
  // n_params randomly chosen parameters
  double gradient_check(const SeriesSample& sample, int n_params = 120,
                        uint64_t seed = 7, double h = 1e-5);

  size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  bool trained() const { return trained_; }
  double norm_mean() const { return norm_mean_; }
  double norm_std() const { return norm_std_; }
  double normalize(double v) const { return (v - norm_mean_) / norm_std_; }
  double denormalize(double v) const { return v * norm_std_ + norm_mean_; }

  void save(const std::string& path) const;
  static PredictorModel load(const std::string& path);

  // parameter block offsets, exposed for the hand-derived gradient test
  int decoder_weight_offset() const;
  int decoder_bias_offset() const;

 private:
  void init_params(uint64_t seed);

  PredictorConfig cfg_;
  std::vector<double> params_;
  Eigen::MatrixXd pe_;
  double norm_mean_ = 0.0;
  double norm_std_ = 1.0;
  bool trained_ = false;
};

struct PredictorModel::Cache {
  Eigen::MatrixXd x0, q, k, v, h, o, r1, x1, f1, g, f2, r2, x2;
  Eigen::MatrixXd xhat1, xhat2;       // layer-norm internals
  Eigen::VectorXd inv1, inv2;         // per-row inverse std
  std::vector<Eigen::MatrixXd> attn;  // per head, rows sum to 1
  Eigen::VectorXd pooled;
  double y = 0.0;
};

struct ChannelPrediction {
  double value = 0.0;
  bool fallback = false;  // untrained model, persistence used
  bool clamped = false;
};

// Per-channel next-interval prediction with persistence fallback and
// non-negativity / free-flow clamps applied by the caller's bounds.
ChannelPrediction predict_channel(const PredictorModel* model,
                                  const std::vector<double>& series, double lo,
                                  double hi);

// LinkForecaster backed by three channel models; null models fall back to
// persistence for that channel.
class TransformerForecaster : public LinkForecaster {
 public:
  TransformerForecaster(std::shared_ptr<PredictorModel> ghg,
                        std::shared_ptr<PredictorModel> nox,
                        std::shared_ptr<PredictorModel> speed)
      : ghg_(std::move(ghg)), nox_(std::move(nox)), speed_(std::move(speed)) {}

  void forecast(const LinkStateStore& store, int now, std::vector<double>& speed,
                std::vector<double>& ghg_er, std::vector<double>& nox_er) override;
  const char* name() const override { return "transformer"; }

 private:
  std::shared_ptr<PredictorModel> ghg_, nox_, speed_;
};

// chronological (input window, next value) samples from a scalar series
std::vector<SeriesSample> make_samples(const std::vector<double>& series, int window);

}  // namespace ecosim
