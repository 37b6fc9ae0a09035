#include "ecosim/predictor.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ecosim/rng.hpp"

namespace ecosim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {
constexpr double kLnEps = 1e-5;
}

void PredictorConfig::validate() const {
  if (window <= 0 || embed_dim <= 0 || heads <= 0 || ffn_dim <= 0)
    throw std::runtime_error("predictor dims must be positive");
  if (embed_dim % heads != 0)
    throw std::runtime_error("embed_dim must be divisible by heads");
  if (encoder_layers != 1)
    throw std::runtime_error("only a single encoder layer is supported");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::runtime_error("train_fraction must be in (0,1)");
  if (!(lr >= 0.0) || !(lr_decay > 0.0 && lr_decay <= 1.0))
    throw std::runtime_error("invalid learning-rate settings");
}

Eigen::MatrixXd positional_encode(int window, int embed_dim) {
  MatrixXd pe(window, embed_dim);
  for (int pos = 0; pos < window; ++pos) {
    for (int j = 0; j < embed_dim; ++j) {
      int two_i = j - (j % 2);
      double angle = pos / std::pow(10000.0, static_cast<double>(two_i) / embed_dim);
      pe(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

// -------------------------------------------------------------------------
// flat parameter layout

namespace {

struct Layout {
  int d, ff;
  int w_embed, b_embed;
  int wq, bq, wk, bk, wv, bv, wo, bo;
  int ln1_g, ln1_b;
  int w1, b1, w2, b2;
  int ln2_g, ln2_b;
  int w_dec, b_dec;
  int total;

  Layout(int d_, int ff_) : d(d_), ff(ff_) {
    int at = 0;
    auto take = [&at](int n) { int o = at; at += n; return o; };
    w_embed = take(d);
    b_embed = take(d);
    wq = take(d * d); bq = take(d);
    wk = take(d * d); bk = take(d);
    wv = take(d * d); bv = take(d);
    wo = take(d * d); bo = take(d);
    ln1_g = take(d); ln1_b = take(d);
    w1 = take(d * ff); b1 = take(ff);
    w2 = take(ff * d); b2 = take(d);
    ln2_g = take(d); ln2_b = take(d);
    w_dec = take(d); b_dec = take(1);
    total = at;
  }
};

using MatMap = Eigen::Map<MatrixXd>;
using CMatMap = Eigen::Map<const MatrixXd>;
using VecMap = Eigen::Map<VectorXd>;
using CVecMap = Eigen::Map<const VectorXd>;

struct Views {
  CMatMap wq, wk, wv, wo, w1, w2;
  CVecMap w_embed, b_embed, bq, bk, bv, bo, ln1_g, ln1_b, b1, b2, ln2_g, ln2_b, w_dec;
  double b_dec;

  Views(const double* p, const Layout& L)
      : wq(p + L.wq, L.d, L.d), wk(p + L.wk, L.d, L.d), wv(p + L.wv, L.d, L.d),
        wo(p + L.wo, L.d, L.d), w1(p + L.w1, L.d, L.ff), w2(p + L.w2, L.ff, L.d),
        w_embed(p + L.w_embed, L.d), b_embed(p + L.b_embed, L.d), bq(p + L.bq, L.d),
        bk(p + L.bk, L.d), bv(p + L.bv, L.d), bo(p + L.bo, L.d),
        ln1_g(p + L.ln1_g, L.d), ln1_b(p + L.ln1_b, L.d), b1(p + L.b1, L.ff),
        b2(p + L.b2, L.d), ln2_g(p + L.ln2_g, L.d), ln2_b(p + L.ln2_b, L.d),
        w_dec(p + L.w_dec, L.d), b_dec(p[L.b_dec]) {}
};

// row-wise layer norm; keeps xhat and inverse std for the backward pass
void layer_norm(const MatrixXd& x, const CVecMap& g, const CVecMap& b, MatrixXd& out,
                MatrixXd& xhat, VectorXd& inv_std) {
  int rows = static_cast<int>(x.rows());
  out.resize(x.rows(), x.cols());
  xhat.resize(x.rows(), x.cols());
  inv_std.resize(rows);
  for (int r = 0; r < rows; ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    double inv = 1.0 / std::sqrt(var + kLnEps);
    inv_std(r) = inv;
    xhat.row(r) = (x.row(r).array() - mu) * inv;
    out.row(r) = xhat.row(r).cwiseProduct(g.transpose()) + b.transpose();
  }
}

// gradient of layer norm w.r.t. its input; accumulates dgamma/dbeta
void layer_norm_backward(const MatrixXd& dout, const MatrixXd& xhat,
                         const VectorXd& inv_std, const CVecMap& g, MatrixXd& dx,
                         VecMap dgamma, VecMap dbeta) {
  int rows = static_cast<int>(dout.rows());
  int d = static_cast<int>(dout.cols());
  dx.resize(rows, d);
  for (int r = 0; r < rows; ++r) {
    dgamma += dout.row(r).cwiseProduct(xhat.row(r)).transpose();
    dbeta += dout.row(r).transpose();
    Eigen::RowVectorXd dxhat = dout.row(r).cwiseProduct(g.transpose());
    double s1 = dxhat.sum();
    double s2 = dxhat.cwiseProduct(xhat.row(r)).sum();
    dx.row(r) =
        (inv_std(r) / d) * (d * dxhat.array() - s1 - xhat.row(r).array() * s2);
  }
}

}  // namespace

// -------------------------------------------------------------------------

PredictorModel::PredictorModel(const PredictorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Layout L(cfg_.embed_dim, cfg_.ffn_dim);
  params_.assign(L.total, 0.0);
  pe_ = positional_encode(cfg_.window, cfg_.embed_dim);
  init_params(cfg_.seed);
}

void PredictorModel::init_params(uint64_t seed) {
  Layout L(cfg_.embed_dim, cfg_.ffn_dim);
  Rng rng(seed ^ 0x7472616e73ULL);
  auto fill = [&](int off, int n, double r) {
    for (int i = 0; i < n; ++i) params_[off + i] = rng.uniform(-r, r);
  };
  int d = L.d, ff = L.ff;
  double r_dd = std::sqrt(6.0 / (d + d));
  double r_dff = std::sqrt(6.0 / (d + ff));
  fill(L.w_embed, d, std::sqrt(6.0 / (1 + d)));
  fill(L.wq, d * d, r_dd);
  fill(L.wk, d * d, r_dd);
  fill(L.wv, d * d, r_dd);
  fill(L.wo, d * d, r_dd);
  fill(L.w1, d * ff, r_dff);
  fill(L.w2, ff * d, r_dff);
  fill(L.w_dec, d, std::sqrt(6.0 / (d + 1)));
  for (int i = 0; i < d; ++i) params_[L.ln1_g + i] = 1.0;
  for (int i = 0; i < d; ++i) params_[L.ln2_g + i] = 1.0;
}

int PredictorModel::decoder_weight_offset() const {
  return Layout(cfg_.embed_dim, cfg_.ffn_dim).w_dec;
}

int PredictorModel::decoder_bias_offset() const {
  return Layout(cfg_.embed_dim, cfg_.ffn_dim).b_dec;
}

double PredictorModel::forward_cached(const VectorXd& x, Cache& c) const {
  if (static_cast<int>(x.size()) != cfg_.window)
    throw std::invalid_argument("input length must equal the window");
  if (!x.allFinite()) throw std::invalid_argument("non-finite predictor input");

  Layout L(cfg_.embed_dim, cfg_.ffn_dim);
  Views p(params_.data(), L);
  int T = cfg_.window, d = cfg_.embed_dim, H = cfg_.heads, dh = d / H;

  c.x0 = x * p.w_embed.transpose();  // (T x d)
  c.x0.rowwise() += p.b_embed.transpose();
  c.x0 += pe_;

  c.q = c.x0 * p.wq;
  c.q.rowwise() += p.bq.transpose();
  c.k = c.x0 * p.wk;
  c.k.rowwise() += p.bk.transpose();
  c.v = c.x0 * p.wv;
  c.v.rowwise() += p.bv.transpose();

  c.h.resize(T, d);
  c.attn.assign(H, MatrixXd());
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int hd = 0; hd < H; ++hd) {
    auto qh = c.q.middleCols(hd * dh, dh);
    auto kh = c.k.middleCols(hd * dh, dh);
    auto vh = c.v.middleCols(hd * dh, dh);
    MatrixXd s = qh * kh.transpose() * scale;
    MatrixXd& a = c.attn[hd];
    a.resize(T, T);
    for (int r = 0; r < T; ++r) {
      double m = s.row(r).maxCoeff();
      Eigen::ArrayXd e = (s.row(r).array() - m).exp();
      a.row(r) = (e / e.sum()).matrix();
    }
    c.h.middleCols(hd * dh, dh) = a * vh;
  }

  c.o = c.h * p.wo;
  c.o.rowwise() += p.bo.transpose();
  c.r1 = c.x0 + c.o;
  layer_norm(c.r1, p.ln1_g, p.ln1_b, c.x1, c.xhat1, c.inv1);

  c.f1 = c.x1 * p.w1;
  c.f1.rowwise() += p.b1.transpose();
  c.g = c.f1.cwiseMax(0.0);
  c.f2 = c.g * p.w2;
  c.f2.rowwise() += p.b2.transpose();
  c.r2 = c.x1 + c.f2;
  layer_norm(c.r2, p.ln2_g, p.ln2_b, c.x2, c.xhat2, c.inv2);

  if (cfg_.mean_pool)
    c.pooled = c.x2.colwise().mean().transpose();
  else
    c.pooled = c.x2.row(T - 1).transpose();
  c.y = c.pooled.dot(p.w_dec) + p.b_dec;
  return c.y;
}

double PredictorModel::forward(const VectorXd& x) const {
  Cache c;
  return forward_cached(x, c);
}

double PredictorModel::predict(const std::vector<double>& window) const {
  if (static_cast<int>(window.size()) != cfg_.window)
    throw std::invalid_argument("window length mismatch");
  VectorXd x(cfg_.window);
  for (int i = 0; i < cfg_.window; ++i) x(i) = normalize(window[i]);
  return denormalize(forward(x));
}

double PredictorModel::backward(const VectorXd& x, double target,
                                std::vector<double>& grad) const {
  Layout L(cfg_.embed_dim, cfg_.ffn_dim);
  Views p(params_.data(), L);
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  double* g = grad.data();
  int T = cfg_.window, d = cfg_.embed_dim, H = cfg_.heads, dh = d / H;

  Cache c;
  double y = forward_cached(x, c);
  double diff = y - target;
  double loss = diff * diff;
  double dy = 2.0 * diff;

  // decoder
  VecMap(g + L.w_dec, d) += dy * c.pooled;
  g[L.b_dec] += dy;
  VectorXd d_pooled = dy * p.w_dec;

  MatrixXd dx2 = MatrixXd::Zero(T, d);
  if (cfg_.mean_pool)
    dx2.rowwise() = (d_pooled / T).transpose();
  else
    dx2.row(T - 1) = d_pooled.transpose();

  MatrixXd dr2;
  layer_norm_backward(dx2, c.xhat2, c.inv2, p.ln2_g, dr2, VecMap(g + L.ln2_g, d),
                      VecMap(g + L.ln2_b, d));

  MatrixXd dx1 = dr2;           // residual
  const MatrixXd& df2 = dr2;    // FFN branch

  // FFN
  MatrixXd dg = df2 * p.w2.transpose();
  MatMap(g + L.w2, cfg_.ffn_dim, d) += c.g.transpose() * df2;
  VecMap(g + L.b2, d) += df2.colwise().sum().transpose();
  MatrixXd df1 = dg.cwiseProduct((c.f1.array() > 0.0).cast<double>().matrix());
  MatMap(g + L.w1, d, cfg_.ffn_dim) += c.x1.transpose() * df1;
  VecMap(g + L.b1, cfg_.ffn_dim) += df1.colwise().sum().transpose();
  dx1 += df1 * p.w1.transpose();

  MatrixXd dr1;
  layer_norm_backward(dx1, c.xhat1, c.inv1, p.ln1_g, dr1, VecMap(g + L.ln1_g, d),
                      VecMap(g + L.ln1_b, d));

  MatrixXd dx0 = dr1;          // residual
  const MatrixXd& dout = dr1;  // attention branch

  MatrixXd dh_mat = dout * p.wo.transpose();
  MatMap(g + L.wo, d, d) += c.h.transpose() * dout;
  VecMap(g + L.bo, d) += dout.colwise().sum().transpose();

  MatrixXd dq = MatrixXd::Zero(T, d), dk = MatrixXd::Zero(T, d),
           dv = MatrixXd::Zero(T, d);
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int hd = 0; hd < H; ++hd) {
    auto qh = c.q.middleCols(hd * dh, dh);
    auto kh = c.k.middleCols(hd * dh, dh);
    auto vh = c.v.middleCols(hd * dh, dh);
    auto dhh = dh_mat.middleCols(hd * dh, dh);
    const MatrixXd& a = c.attn[hd];

    MatrixXd da = dhh * vh.transpose();
    dv.middleCols(hd * dh, dh) = a.transpose() * dhh;

    MatrixXd ds(T, T);
    for (int r = 0; r < T; ++r) {
      double rowdot = da.row(r).cwiseProduct(a.row(r)).sum();
      ds.row(r) = (da.row(r).array() - rowdot) * a.row(r).array();
    }
    ds *= scale;
    dq.middleCols(hd * dh, dh) = ds * kh;
    dk.middleCols(hd * dh, dh) = ds.transpose() * qh;
  }

  MatMap(g + L.wq, d, d) += c.x0.transpose() * dq;
  VecMap(g + L.bq, d) += dq.colwise().sum().transpose();
  MatMap(g + L.wk, d, d) += c.x0.transpose() * dk;
  VecMap(g + L.bk, d) += dk.colwise().sum().transpose();
  MatMap(g + L.wv, d, d) += c.x0.transpose() * dv;
  VecMap(g + L.bv, d) += dv.colwise().sum().transpose();

  dx0 += dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();

  VecMap(g + L.w_embed, d) += dx0.transpose() * x;
  VecMap(g + L.b_embed, d) += dx0.colwise().sum().transpose();

  return loss;
}

TrainReport PredictorModel::train(const std::vector<SeriesSample>& dataset) {
  if (dataset.size() < 2) throw std::runtime_error("need at least 2 samples to train");
  size_t n_train = static_cast<size_t>(dataset.size() * cfg_.train_fraction);
  n_train = std::max<size_t>(1, std::min(n_train, dataset.size() - 1));

  // normalization stats from the training split only
  double sum = 0.0, sq = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < n_train; ++i) {
    for (double v : dataset[i].input) { sum += v; sq += v * v; ++count; }
    sum += dataset[i].target;
    sq += dataset[i].target * dataset[i].target;
    ++count;
  }
  norm_mean_ = sum / count;
  double var = std::max(0.0, sq / count - norm_mean_ * norm_mean_);
  norm_std_ = std::max(std::sqrt(var), 1e-9);

  auto norm_x = [this](const SeriesSample& s) {
    VectorXd x(cfg_.window);
    for (int i = 0; i < cfg_.window; ++i) x(i) = normalize(s.input[i]);
    return x;
  };

  std::vector<double> m(params_.size(), 0.0), v2(params_.size(), 0.0);
  std::vector<double> grad(params_.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  TrainReport report;
  Rng shuffle_rng(cfg_.seed ^ 0x736875ULL);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    double lr = cfg_.lr * std::pow(cfg_.lr_decay, epoch);
    auto order = shuffle_rng.permutation(n_train);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < n_train) {
      size_t bs = std::min<size_t>(cfg_.batch_size, n_train - done);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t b = 0; b < bs; ++b) {
        const SeriesSample& s = dataset[order[done + b]];
        batch_loss += backward(norm_x(s), normalize(s.target), grad);
      }
      epoch_loss += batch_loss;
      done += bs;
      if (lr > 0.0) {
        ++step;
        double bc1 = 1.0 - std::pow(beta1, step);
        double bc2 = 1.0 - std::pow(beta2, step);
        for (size_t i = 0; i < params_.size(); ++i) {
          double gi = grad[i] / bs;
          m[i] = beta1 * m[i] + (1 - beta1) * gi;
          v2[i] = beta2 * v2[i] + (1 - beta2) * gi * gi;
          params_[i] -= lr * (m[i] / bc1) / (std::sqrt(v2[i] / bc2) + adam_eps);
        }
      }
    }
    epoch_loss /= n_train;
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    report.epoch_loss.push_back(epoch_loss);
  }
  trained_ = true;

  auto rmse_on = [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      double pred = denormalize(forward(norm_x(dataset[i])));
      double e = pred - dataset[i].target;
      acc += e * e;
    }
    return std::sqrt(acc / std::max<size_t>(1, hi - lo));
  };
  report.train_rmse = rmse_on(0, n_train);
  report.test_rmse = rmse_on(n_train, dataset.size());
  double acc = 0.0;
  for (size_t i = n_train; i < dataset.size(); ++i) {
    double e = dataset[i].input.back() - dataset[i].target;
    acc += e * e;
  }
  report.persistence_rmse =
      std::sqrt(acc / std::max<size_t>(1, dataset.size() - n_train));
  return report;
}

double PredictorModel::gradient_check(const SeriesSample& sample, int n_params,
                                      uint64_t seed, double h) {
  VectorXd x(cfg_.window);
  for (int i = 0; i < cfg_.window; ++i) x(i) = normalize(sample.input[i]);
  double target = normalize(sample.target);

  std::vector<double> grad(params_.size(), 0.0);
  backward(x, target, grad);

  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_params; ++k) {
    size_t idx = rng.below(params_.size());
    double keep = params_[idx];
    params_[idx] = keep + h;
    double yp = forward(x);
    double lp = (yp - target) * (yp - target);
    params_[idx] = keep - h;
    double ym = forward(x);
    double lm = (ym - target) * (ym - target);
    params_[idx] = keep;
    double numeric = (lp - lm) / (2 * h);
    double denom = std::max(1e-6, std::abs(grad[idx]) + std::abs(numeric));
    worst = std::max(worst, std::abs(grad[idx] - numeric) / denom);
  }
  return worst;
}

void PredictorModel::save(const std::string& path) const {
  json j;
  j["format"] = "ecosim-predictor-v1";
  j["config"] = {{"window", cfg_.window},       {"embed_dim", cfg_.embed_dim},
                 {"heads", cfg_.heads},         {"encoder_layers", cfg_.encoder_layers},
                 {"ffn_dim", cfg_.ffn_dim},     {"lr", cfg_.lr},
                 {"lr_decay", cfg_.lr_decay},   {"epochs", cfg_.epochs},
                 {"batch_size", cfg_.batch_size}, {"train_fraction", cfg_.train_fraction},
                 {"mean_pool", cfg_.mean_pool}, {"seed", cfg_.seed}};
  j["norm_mean"] = norm_mean_;
  j["norm_std"] = norm_std_;
  j["trained"] = trained_;
  j["params"] = params_;
  // config hash ties a checkpoint to its architecture
  uint64_t hash = 14695981039346656037ULL;
  std::string cs = j["config"].dump();
  for (char ch : cs) { hash ^= static_cast<unsigned char>(ch); hash *= 1099511628211ULL; }
  j["config_hash"] = hash;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

PredictorModel PredictorModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j = json::parse(in);
  if (j.at("format").get<std::string>() != "ecosim-predictor-v1")
    throw std::runtime_error("unknown checkpoint format in " + path);
  PredictorConfig cfg;
  const auto& cj = j.at("config");
  cfg.window = cj.at("window").get<int>();
  cfg.embed_dim = cj.at("embed_dim").get<int>();
  cfg.heads = cj.at("heads").get<int>();
  cfg.encoder_layers = cj.at("encoder_layers").get<int>();
  cfg.ffn_dim = cj.at("ffn_dim").get<int>();
  cfg.lr = cj.at("lr").get<double>();
  cfg.lr_decay = cj.at("lr_decay").get<double>();
  cfg.epochs = cj.at("epochs").get<int>();
  cfg.batch_size = cj.at("batch_size").get<int>();
  cfg.train_fraction = cj.at("train_fraction").get<double>();
  cfg.mean_pool = cj.at("mean_pool").get<bool>();
  cfg.seed = cj.at("seed").get<uint64_t>();
  PredictorModel m(cfg);
  m.params_ = j.at("params").get<std::vector<double>>();
  if (m.params_.size() != Layout(cfg.embed_dim, cfg.ffn_dim).total)
    throw std::runtime_error("checkpoint parameter count mismatch");
  m.norm_mean_ = j.at("norm_mean").get<double>();
  m.norm_std_ = j.at("norm_std").get<double>();
  m.trained_ = j.at("trained").get<bool>();
  return m;
}

ChannelPrediction predict_channel(const PredictorModel* model,
                                  const std::vector<double>& series, double lo,
                                  double hi) {
  ChannelPrediction out;
  if (!model || !model->trained()) {
    out.value = series.back();
    out.fallback = true;
  } else {
    out.value = model->predict(series);
  }
  double clamped = std::clamp(out.value, lo, hi);
  out.clamped = clamped != out.value;
  out.value = clamped;
  return out;
}

void TransformerForecaster::forecast(const LinkStateStore& store, int now,
                                     std::vector<double>& speed,
                                     std::vector<double>& ghg_er,
                                     std::vector<double>& nox_er) {
  size_t n = store.graph().link_count();
  speed.resize(n);
  ghg_er.resize(n);
  nox_er.resize(n);
  double inf = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    int li = static_cast<int>(i);
    int w_ghg = ghg_ ? ghg_->config().window : 250;
    int w_nox = nox_ ? nox_->config().window : 250;
    int w_spd = speed_ ? speed_->config().window : 250;
    double ffs_cap = store.graph().link(li).free_flow_speed * 1.05;
    ghg_er[i] = predict_channel(ghg_.get(),
                                store.state_series(li, StateChannel::GhgEr, now, w_ghg),
                                0.0, inf).value;
    nox_er[i] = predict_channel(nox_.get(),
                                store.state_series(li, StateChannel::NoxEr, now, w_nox),
                                0.0, inf).value;
    speed[i] = predict_channel(speed_.get(),
                               store.state_series(li, StateChannel::Speed, now, w_spd),
                               0.0, ffs_cap).value;
  }
}

std::vector<SeriesSample> make_samples(const std::vector<double>& series, int window) {
  std::vector<SeriesSample> out;
  for (size_t t = window; t < series.size(); ++t) {
    SeriesSample s;
    s.input.assign(series.begin() + (t - window), series.begin() + t);
    s.target = series[t];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ecosim
