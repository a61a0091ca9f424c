#pragma once

#include <string>
#include <vector>

#include "samro/types.hpp"

namespace samro {

enum class Activation { Linear, Relu, Tanh, Softplus };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

/// Parameter-shaped gradient (or moment) accumulator.
struct MlpGrads {
  std::vector<Mat> w;
  std::vector<Vec> b;

  void set_zero();
  void add_scaled(const MlpGrads& other, double scale);
  double squared_norm() const;
};

double grad_norm(const MlpGrads& g);
void clip_grad_norm(MlpGrads& g, double max_norm);

/// Activations cached by a forward pass, consumed by the backward passes.
/// Batches are stored columnwise: one sample per column.
struct MlpCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // post-activation per layer
};

/// Plain fully connected network. w[l] maps widths[l] -> widths[l+1].
struct MlpModel {
  std::vector<int> widths;
  Activation hidden_act = Activation::Relu;
  Activation output_act = Activation::Linear;
  std::vector<Mat> w;
  std::vector<Vec> b;

  static MlpModel make(const std::vector<int>& widths, Activation hidden,
                       Activation output, Rng& rng);

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int layer_count() const { return static_cast<int>(w.size()); }
  Activation layer_activation(int layer) const {
    return layer + 1 == layer_count() ? output_act : hidden_act;
  }

  Mat forward(const Mat& x) const;
  Mat forward(const Mat& x, MlpCache& cache) const;
  Vec forward_one(const Vec& x) const;

  /// Backprop of a scalar loss with d(loss)/d(output) = dout.
  /// Accumulates parameter gradients into grads and returns d(loss)/d(input).
  Mat backward(const MlpCache& cache, const Mat& dout, MlpGrads& grads) const;
  void backward_params(const MlpCache& cache, const Mat& dout, MlpGrads& grads) const;

  /// Gradient of the scalar output with respect to the input, per column.
  Mat input_gradient(const Mat& x) const;
  Vec input_gradient_one(const Vec& x) const;

  /// Accumulates d/dparams of sum_cols v_col . grad_x f(x_col) into grads.
  /// Requires smooth activations throughout (no relu).
  void grad_through_input_gradient(const Mat& x, const Mat& v, MlpGrads& grads) const;

  MlpGrads grads_like() const;

  void save(const std::string& path) const;
  static MlpModel load(const std::string& path);
};

/// Adam with bias correction, one state per model.
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  MlpGrads m;
  MlpGrads v;

  static Adam make(const MlpModel& model, double lr);
  void update(MlpModel& model, const MlpGrads& grads);
};

void save_adam(const std::string& path, const Adam& adam);
Adam load_adam(const std::string& path, const MlpModel& model);

/// target <- tau * source + (1 - tau) * target
void soft_update(MlpModel& target, const MlpModel& source, double tau);

double parameter_distance(const MlpModel& a, const MlpModel& b);

}  // namespace samro
