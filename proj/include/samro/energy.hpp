#pragma once

#include <string>

#include "samro/mlp.hpp"
#include "samro/types.hpp"

namespace samro {

struct EnergyConfig {
  std::vector<int> hidden{256, 64, 32};
  double noise_scale = 0.1;  // sigma_d
  int batch_size = 32;
  double lr = 1e-3;
  double grad_clip = 10.0;
  bool antithetic = true;  // pair every corruption with its mirror
  // Coarse corruption scales trained alongside sigma_d (multipliers of it).
  // A lone small scale leaves the energy unsupervised away from the data, so
  // its extrapolation there is arbitrary; the coarse scales pin the global
  // shape while sigma_d keeps the local structure. Empty = single scale.
  std::vector<double> coarse_multipliers{3.0, 9.0};
  // Conditioning of the (state, action) input: with the whole operating box
  // compressed to this scale, the corruption noise sweeps a useful fraction
  // of it, so the score field is supervised well beyond the data cloud. The
  // state block is damped further so the learned density concentrates on
  // action structure, where the regularizer has to discriminate.
  double input_scale = 1.0;
  double state_weight = 0.25;
};

/// Unnormalized negative log-density over normalized state-action inputs,
/// trained by denoising score matching: corrupt each sample with Gaussian
/// noise and regress the scaled input gradient of the energy onto the noise.
class EnergyModel {
 public:
  EnergyModel() = default;
  static EnergyModel make(int input_dim, const EnergyConfig& cfg, Rng& rng);

  double energy(const Vec& x) const { return net_.forward_one(x)(0); }
  Vec energies(const Mat& x) const;

  /// One denoising-score-matching step over a batch (columns = samples);
  /// returns the loss. Gradients flow through the input gradient of the net.
  double train_batch(const Mat& x, Rng& rng);

  /// Loss only, no update (diagnostics and tests).
  double loss(const Mat& x, Rng& rng) const;

  const MlpModel& net() const { return net_; }
  MlpModel& net() { return net_; }
  double noise_scale() const { return cfg_.noise_scale; }
  const EnergyConfig& config() const { return cfg_; }
  void set_learning_rate(double lr) { opt_.lr = lr; }

  void save(const std::string& path) const { net_.save(path); }
  static EnergyModel load(const std::string& path, const EnergyConfig& cfg);

 private:
  EnergyConfig cfg_;
  MlpModel net_;
  Adam opt_;

  double loss_and_grads(const Mat& x, Rng& rng, MlpGrads* grads) const;
};

/// r' = r - alpha * E(s, a); the raw reward in storage is never modified.
double regularize_reward(double reward, double energy, double alpha);

/// Running normalization of energies before they enter the reward penalty.
/// Centering removes the arbitrary constant a learned energy carries while
/// keeping its slopes intact; full standardization also divides by the
/// running standard deviation, which makes the penalty scale-free but far
/// weaker when the data energies are widely spread.
enum class EnergyNorm { Center, Standardize, Raw };

class EnergyStandardizer {
 public:
  void observe(double e);
  double standardize(double e) const;  // (e - mean) / std
  double center(double e) const;       // e - mean
  double apply(double e, EnergyNorm mode) const;
  long count() const { return n_; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace samro
