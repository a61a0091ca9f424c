#include "samro/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace samro {

namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mat apply_act(Activation act, const Mat& a) {
  switch (act) {
    case Activation::Linear:
      return a;
    case Activation::Relu:
      return a.cwiseMax(0.0);
    case Activation::Tanh:
      return a.array().tanh().matrix();
    case Activation::Softplus:
      return a.unaryExpr([](double x) { return softplus(x); });
  }
  throw std::logic_error("unknown activation");
}

// First derivative evaluated at the pre-activation.
Mat act_prime(Activation act, const Mat& a) {
  switch (act) {
    case Activation::Linear:
      return Mat::Ones(a.rows(), a.cols());
    case Activation::Relu:
      return a.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case Activation::Tanh: {
      Mat t = a.array().tanh().matrix();
      return (1.0 - t.array().square()).matrix();
    }
    case Activation::Softplus:
      return a.unaryExpr([](double x) { return sigmoid(x); });
  }
  throw std::logic_error("unknown activation");
}

Mat act_second(Activation act, const Mat& a) {
  switch (act) {
    case Activation::Linear:
      return Mat::Zero(a.rows(), a.cols());
    case Activation::Relu:
      throw std::invalid_argument("relu is not twice differentiable; use softplus or tanh");
    case Activation::Tanh: {
      Mat t = a.array().tanh().matrix();
      return (-2.0 * t.array() * (1.0 - t.array().square())).matrix();
    }
    case Activation::Softplus:
      return a.unaryExpr([](double x) {
        const double s = sigmoid(x);
        return s * (1.0 - s);
      });
  }
  throw std::logic_error("unknown activation");
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "softplus") return Activation::Softplus;
  throw std::invalid_argument("unknown activation name: " + name);
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Linear:
      return "linear";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Softplus:
      return "softplus";
  }
  throw std::logic_error("unknown activation");
}

void MlpGrads::set_zero() {
  for (auto& m : w) m.setZero();
  for (auto& v : b) v.setZero();
}

void MlpGrads::add_scaled(const MlpGrads& other, double scale) {
  for (size_t l = 0; l < w.size(); ++l) {
    w[l] += scale * other.w[l];
    b[l] += scale * other.b[l];
  }
}

double MlpGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& m : w) s += m.squaredNorm();
  for (const auto& v : b) s += v.squaredNorm();
  return s;
}

double grad_norm(const MlpGrads& g) { return std::sqrt(g.squared_norm()); }

void clip_grad_norm(MlpGrads& g, double max_norm) {
  const double n = grad_norm(g);
  if (n > max_norm && n > 0.0) {
    const double scale = max_norm / n;
    for (auto& m : g.w) m *= scale;
    for (auto& v : g.b) v *= scale;
  }
}

MlpModel MlpModel::make(const std::vector<int>& widths, Activation hidden,
                        Activation output, Rng& rng) {
  if (widths.size() < 2) {
    throw std::invalid_argument("mlp needs at least input and output widths");
  }
  for (int wd : widths) {
    if (wd <= 0) throw std::invalid_argument("mlp widths must be positive");
  }
  MlpModel model;
  model.widths = widths;
  model.hidden_act = hidden;
  model.output_act = output;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat wm(widths[l + 1], widths[l]);
    for (int i = 0; i < wm.rows(); ++i) {
      for (int j = 0; j < wm.cols(); ++j) wm(i, j) = dist(rng);
    }
    Vec bv(widths[l + 1]);
    for (int i = 0; i < bv.size(); ++i) bv(i) = dist(rng);
    model.w.push_back(std::move(wm));
    model.b.push_back(std::move(bv));
  }
  return model;
}

Mat MlpModel::forward(const Mat& x) const {
  MlpCache cache;
  return forward(x, cache);
}

Mat MlpModel::forward(const Mat& x, MlpCache& cache) const {
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("mlp forward: input dimension mismatch");
  }
  cache.input = x;
  cache.pre.resize(layer_count());
  cache.post.resize(layer_count());
  const Mat* z = &cache.input;
  for (int l = 0; l < layer_count(); ++l) {
    cache.pre[l] = (w[l] * (*z)).colwise() + b[l];
    cache.post[l] = apply_act(layer_activation(l), cache.pre[l]);
    z = &cache.post[l];
  }
  return cache.post.back();
}

Vec MlpModel::forward_one(const Vec& x) const {
  return forward(Mat(x)).col(0);
}

Mat MlpModel::backward(const MlpCache& cache, const Mat& dout, MlpGrads& grads) const {
  Mat delta = dout;
  for (int l = layer_count() - 1; l >= 0; --l) {
    Mat da = delta.cwiseProduct(act_prime(layer_activation(l), cache.pre[l]));
    const Mat& z = (l == 0) ? cache.input : cache.post[l - 1];
    grads.w[l] += da * z.transpose();
    grads.b[l] += da.rowwise().sum();
    delta = w[l].transpose() * da;
  }
  return delta;
}

void MlpModel::backward_params(const MlpCache& cache, const Mat& dout,
                               MlpGrads& grads) const {
  backward(cache, dout, grads);
}

Mat MlpModel::input_gradient(const Mat& x) const {
  if (output_dim() != 1) {
    throw std::invalid_argument("input_gradient requires a scalar-output model");
  }
  MlpCache cache;
  forward(x, cache);
  Mat delta = Mat::Ones(1, x.cols());
  for (int l = layer_count() - 1; l >= 0; --l) {
    Mat da = delta.cwiseProduct(act_prime(layer_activation(l), cache.pre[l]));
    delta = w[l].transpose() * da;
  }
  return delta;
}

Vec MlpModel::input_gradient_one(const Vec& x) const {
  return input_gradient(Mat(x)).col(0);
}

void MlpModel::grad_through_input_gradient(const Mat& x, const Mat& v,
                                           MlpGrads& grads) const {
  if (output_dim() != 1) {
    throw std::invalid_argument("grad_through_input_gradient requires a scalar output");
  }
  if (v.rows() != input_dim() || v.cols() != x.cols()) {
    throw std::invalid_argument("grad_through_input_gradient: direction shape mismatch");
  }
  const int L = layer_count();

  // Forward pass with a tangent stream seeded by v. The tangent of the scalar
  // output equals v . grad_x f columnwise; differentiating that sum wrt the
  // parameters requires the second derivative of every activation.
  MlpCache cache;
  forward(x, cache);
  std::vector<Mat> prime(L), second(L), adot(L), zdot(L + 1);
  zdot[0] = v;
  for (int l = 0; l < L; ++l) {
    prime[l] = act_prime(layer_activation(l), cache.pre[l]);
    second[l] = act_second(layer_activation(l), cache.pre[l]);
    adot[l] = w[l] * zdot[l];
    zdot[l + 1] = prime[l].cwiseProduct(adot[l]);
  }

  // Reverse pass over both the primal and the tangent chain.
  Mat d_zdot = Mat::Ones(1, x.cols());
  Mat d_z = Mat::Zero(1, x.cols());
  for (int l = L - 1; l >= 0; --l) {
    Mat d_adot = d_zdot.cwiseProduct(prime[l]);
    Mat d_a = d_zdot.cwiseProduct(second[l]).cwiseProduct(adot[l]) +
              d_z.cwiseProduct(prime[l]);
    const Mat& z_in = (l == 0) ? cache.input : cache.post[l - 1];
    grads.w[l] += d_adot * zdot[l].transpose() + d_a * z_in.transpose();
    grads.b[l] += d_a.rowwise().sum();
    d_zdot = w[l].transpose() * d_adot;
    d_z = w[l].transpose() * d_a;
  }
}

MlpGrads MlpModel::grads_like() const {
  MlpGrads g;
  for (size_t l = 0; l < w.size(); ++l) {
    g.w.push_back(Mat::Zero(w[l].rows(), w[l].cols()));
    g.b.push_back(Vec::Zero(b[l].size()));
  }
  return g;
}

void MlpModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << "samro-mlp 1\n";
  out << "widths";
  for (int wd : widths) out << ' ' << wd;
  out << '\n';
  out << "hidden " << activation_name(hidden_act) << '\n';
  out << "output " << activation_name(output_act) << '\n';
  out << "data\n";
  for (size_t l = 0; l < w.size(); ++l) {
    // Row-major parameter order, weights then bias per layer.
    for (int i = 0; i < w[l].rows(); ++i) {
      for (int j = 0; j < w[l].cols(); ++j) {
        const double value = w[l](i, j);
        out.write(reinterpret_cast<const char*>(&value), sizeof(double));
      }
    }
    for (int i = 0; i < b[l].size(); ++i) {
      const double value = b[l](i);
      out.write(reinterpret_cast<const char*>(&value), sizeof(double));
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

MlpModel MlpModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "samro-mlp 1") throw std::runtime_error("bad checkpoint header: " + path);
  MlpModel model;
  std::string hidden_name, output_name;
  while (std::getline(in, line)) {
    if (line == "data") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "widths") {
      int wd;
      while (ls >> wd) model.widths.push_back(wd);
    } else if (key == "hidden") {
      ls >> hidden_name;
    } else if (key == "output") {
      ls >> output_name;
    } else {
      throw std::runtime_error("unknown checkpoint field: " + key);
    }
  }
  if (model.widths.size() < 2 || hidden_name.empty() || output_name.empty()) {
    throw std::runtime_error("incomplete checkpoint header: " + path);
  }
  model.hidden_act = activation_from_name(hidden_name);
  model.output_act = activation_from_name(output_name);
  for (size_t l = 0; l + 1 < model.widths.size(); ++l) {
    Mat wm(model.widths[l + 1], model.widths[l]);
    for (int i = 0; i < wm.rows(); ++i) {
      for (int j = 0; j < wm.cols(); ++j) {
        double value;
        in.read(reinterpret_cast<char*>(&value), sizeof(double));
        wm(i, j) = value;
      }
    }
    Vec bv(model.widths[l + 1]);
    for (int i = 0; i < bv.size(); ++i) {
      double value;
      in.read(reinterpret_cast<char*>(&value), sizeof(double));
      bv(i) = value;
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    model.w.push_back(std::move(wm));
    model.b.push_back(std::move(bv));
  }
  return model;
}

Adam Adam::make(const MlpModel& model, double lr) {
  Adam adam;
  adam.lr = lr;
  adam.m = model.grads_like();
  adam.v = model.grads_like();
  return adam;
}

void Adam::update(MlpModel& model, const MlpGrads& grads) {
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (size_t l = 0; l < model.w.size(); ++l) {
    m.w[l] = beta1 * m.w[l] + (1.0 - beta1) * grads.w[l];
    v.w[l] = beta2 * v.w[l] + (1.0 - beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    model.w[l].array() -=
        lr * (m.w[l].array() / c1) / ((v.w[l].array() / c2).sqrt() + eps);
    m.b[l] = beta1 * m.b[l] + (1.0 - beta1) * grads.b[l];
    v.b[l] = beta2 * v.b[l] + (1.0 - beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    model.b[l].array() -=
        lr * (m.b[l].array() / c1) / ((v.b[l].array() / c2).sqrt() + eps);
  }
}

namespace {

void write_grads(std::ofstream& out, const MlpGrads& g) {
  for (size_t l = 0; l < g.w.size(); ++l) {
    for (int i = 0; i < g.w[l].rows(); ++i) {
      for (int j = 0; j < g.w[l].cols(); ++j) {
        const double value = g.w[l](i, j);
        out.write(reinterpret_cast<const char*>(&value), sizeof(double));
      }
    }
    for (int i = 0; i < g.b[l].size(); ++i) {
      const double value = g.b[l](i);
      out.write(reinterpret_cast<const char*>(&value), sizeof(double));
    }
  }
}

void read_grads(std::ifstream& in, MlpGrads& g) {
  for (size_t l = 0; l < g.w.size(); ++l) {
    for (int i = 0; i < g.w[l].rows(); ++i) {
      for (int j = 0; j < g.w[l].cols(); ++j) {
        double value;
        in.read(reinterpret_cast<char*>(&value), sizeof(double));
        g.w[l](i, j) = value;
      }
    }
    for (int i = 0; i < g.b[l].size(); ++i) {
      double value;
      in.read(reinterpret_cast<char*>(&value), sizeof(double));
      g.b[l](i) = value;
    }
  }
}

}  // namespace

void save_adam(const std::string& path, const Adam& adam) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open optimizer checkpoint: " + path);
  out << "samro-adam 1\n";
  out << "lr " << adam.lr << "\nbeta1 " << adam.beta1 << "\nbeta2 " << adam.beta2
      << "\neps " << adam.eps << "\nstep " << adam.step << "\n";
  out << "data\n";
  write_grads(out, adam.m);
  write_grads(out, adam.v);
  if (!out) throw std::runtime_error("optimizer checkpoint write failed: " + path);
}

Adam load_adam(const std::string& path, const MlpModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open optimizer checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "samro-adam 1") throw std::runtime_error("bad optimizer header: " + path);
  Adam adam = Adam::make(model, 1e-3);
  while (std::getline(in, line)) {
    if (line == "data") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "lr") ls >> adam.lr;
    else if (key == "beta1") ls >> adam.beta1;
    else if (key == "beta2") ls >> adam.beta2;
    else if (key == "eps") ls >> adam.eps;
    else if (key == "step") ls >> adam.step;
    else throw std::runtime_error("unknown optimizer field: " + key);
  }
  read_grads(in, adam.m);
  read_grads(in, adam.v);
  if (!in) throw std::runtime_error("truncated optimizer checkpoint: " + path);
  return adam;
}

void soft_update(MlpModel& target, const MlpModel& source, double tau) {
  for (size_t l = 0; l < target.w.size(); ++l) {
    target.w[l] = tau * source.w[l] + (1.0 - tau) * target.w[l];
    target.b[l] = tau * source.b[l] + (1.0 - tau) * target.b[l];
  }
}

double parameter_distance(const MlpModel& a, const MlpModel& b) {
  double s = 0.0;
  for (size_t l = 0; l < a.w.size(); ++l) {
    s += (a.w[l] - b.w[l]).squaredNorm();
    s += (a.b[l] - b.b[l]).squaredNorm();
  }
  return std::sqrt(s);
}

}  // namespace samro
