#include "samro/energy.hpp"

#include <cmath>

namespace samro {

EnergyModel EnergyModel::make(int input_dim, const EnergyConfig& cfg, Rng& rng) {
  EnergyModel model;
  model.cfg_ = cfg;
  std::vector<int> widths;
  widths.push_back(input_dim);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  model.net_ = MlpModel::make(widths, Activation::Softplus, Activation::Linear, rng);
  model.opt_ = Adam::make(model.net_, cfg.lr);
  return model;
}

EnergyModel EnergyModel::load(const std::string& path, const EnergyConfig& cfg) {
  EnergyModel model;
  model.cfg_ = cfg;
  model.net_ = MlpModel::load(path);
  model.opt_ = Adam::make(model.net_, cfg.lr);
  return model;
}

Vec EnergyModel::energies(const Mat& x) const {
  const Mat out = net_.forward(x);
  return out.row(0).transpose();
}

double EnergyModel::loss_and_grads(const Mat& x, Rng& rng, MlpGrads* grads) const {
  if (x.cols() == 0) throw std::invalid_argument("energy training: empty batch");
  // One corruption scale per sample, drawn from {sigma_d} and the coarse
  // ladder. Losses are weighted by 1/sigma^2 so every scale contributes with
  // comparable magnitude; for a single scale this is the plain denoising
  // objective up to a constant factor.
  std::vector<double> scales{cfg_.noise_scale};
  for (double mult : cfg_.coarse_multipliers) scales.push_back(mult * cfg_.noise_scale);
  std::uniform_int_distribution<size_t> pick_scale(0, scales.size() - 1);
  Vec sigma(x.cols());
  for (int i = 0; i < x.cols(); ++i) sigma(i) = scales[pick_scale(rng)];

  std::normal_distribution<double> normal(0.0, 1.0);
  Mat eps(x.rows(), x.cols());
  for (int c = 0; c < x.cols(); ++c) {
    for (int r = 0; r < x.rows(); ++r) eps(r, c) = sigma(c) * normal(rng);
  }
  Mat xx = x;
  if (cfg_.antithetic) {
    // Mirror every corruption: the noise-linear part of the gradient cancels
    // within each pair, which cuts the estimator variance sharply.
    Mat x2(x.rows(), 2 * x.cols());
    x2 << x, x;
    Mat e2(x.rows(), 2 * x.cols());
    e2 << eps, -eps;
    xx = std::move(x2);
    eps = std::move(e2);
    Vec s2v(2 * sigma.size());
    s2v << sigma, sigma;
    sigma = std::move(s2v);
  }
  const int m = static_cast<int>(xx.cols());
  const Mat y = xx + eps;
  const Mat g = net_.input_gradient(y);
  // Denoising objective per sample: x - y + sigma^2 grad_y E(y); the scaled
  // energy gradient regresses onto the corruption noise, and the minimizer
  // is the smoothed negative log-density (grad E(y) -> y for unit-normal
  // data at a single small scale).
  // The reported value keeps the plain (unweighted) definition; the training
  // gradient weights each sample by 1/sigma^2 so coarse and fine scales pull
  // with comparable strength.
  double loss = 0.0;
  Mat v(x.rows(), m);
  for (int c = 0; c < m; ++c) {
    const double s2 = sigma(c) * sigma(c);
    const Vec residual = s2 * g.col(c) - eps.col(c);
    loss += residual.squaredNorm();
    v.col(c) = residual * (2.0 / m);
  }
  loss /= m;
  if (grads) {
    net_.grad_through_input_gradient(y, v, *grads);
  }
  return loss;
}

double EnergyModel::train_batch(const Mat& x, Rng& rng) {
  MlpGrads grads = net_.grads_like();
  const double loss = loss_and_grads(x, rng, &grads);
  clip_grad_norm(grads, cfg_.grad_clip);
  opt_.update(net_, grads);
  return loss;
}

double EnergyModel::loss(const Mat& x, Rng& rng) const {
  return loss_and_grads(x, rng, nullptr);
}

double regularize_reward(double reward, double energy, double alpha) {
  return reward - alpha * energy;
}

void EnergyStandardizer::observe(double e) {
  ++n_;
  const double delta = e - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (e - mean_);
}

double EnergyStandardizer::standardize(double e) const {
  if (n_ < 2) return 0.0;
  const double var = m2_ / static_cast<double>(n_ - 1);
  if (var <= 0.0) return 0.0;
  return (e - mean_) / std::sqrt(var);
}

double EnergyStandardizer::center(double e) const {
  if (n_ < 1) return 0.0;
  return e - mean_;
}

double EnergyStandardizer::apply(double e, EnergyNorm mode) const {
  switch (mode) {
    case EnergyNorm::Center:
      return center(e);
    case EnergyNorm::Standardize:
      return standardize(e);
    case EnergyNorm::Raw:
      return e;
  }
  return e;
}

}  // namespace samro
