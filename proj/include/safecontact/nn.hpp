#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safecontact/types.hpp"

namespace safecontact::nn {

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1 };

/// Layer widths plus the hidden activation; the output layer is linear.
struct Architecture {
  std::vector<int> sizes;  // input, hidden..., output
  Activation hidden = Activation::kRelu;

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      n += static_cast<std::size_t>(sizes[i + 1]) * sizes[i] + sizes[i + 1];
    }
    return n;
  }
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int layers() const { return static_cast<int>(sizes.size()) - 1; }

  bool operator==(const Architecture&) const = default;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Fully connected network over column-major batches (one sample per
/// column). Parameters live in one flat vector laid out per layer as the
/// column-major weight matrix (out x in) followed by the bias.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  struct Cache {
    std::vector<Mat> acts;  // acts[0] is the input, acts[L] the output
    std::vector<Mat> grads;
  };

  Mlp() = default;
  explicit Mlp(Architecture arch) : arch_(std::move(arch)), params_(Vec::Zero(arch_.param_count())) {
    if (arch_.sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    offsets_.reserve(arch_.layers());
    std::size_t off = 0;
    for (int l = 0; l < arch_.layers(); ++l) {
      offsets_.push_back(off);
      off += static_cast<std::size_t>(arch_.sizes[l + 1]) * arch_.sizes[l] + arch_.sizes[l + 1];
    }
  }

  /// PyTorch's nn.Linear default: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  /// weights and biases.
  void init_uniform(Rng& rng) {
    for (int l = 0; l < arch_.layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(arch_.sizes[l]));
      std::uniform_real_distribution<double> u(-bound, bound);
      auto w = weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(u(rng));
      auto b = bias(l);
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = static_cast<Scalar>(u(rng));
    }
  }

  const Architecture& arch() const { return arch_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<Mat> weight(int l) {
    return {params_.data() + offsets_[l], arch_.sizes[l + 1], arch_.sizes[l]};
  }
  Eigen::Map<const Mat> weight(int l) const {
    return {params_.data() + offsets_[l], arch_.sizes[l + 1], arch_.sizes[l]};
  }
  Eigen::Map<Vec> bias(int l) {
    return {params_.data() + offsets_[l] + static_cast<std::size_t>(arch_.sizes[l + 1]) * arch_.sizes[l],
            arch_.sizes[l + 1]};
  }
  Eigen::Map<const Vec> bias(int l) const {
    return {params_.data() + offsets_[l] + static_cast<std::size_t>(arch_.sizes[l + 1]) * arch_.sizes[l],
            arch_.sizes[l + 1]};
  }

  template <typename Derived>
  const Mat& forward(const Eigen::MatrixBase<Derived>& x, Cache& cache) const {
    const int L = arch_.layers();
    cache.acts.resize(L + 1);
    cache.acts[0] = x;
    for (int l = 0; l < L; ++l) {
      Mat& out = cache.acts[l + 1];
      out.noalias() = weight(l) * cache.acts[l];
      out.colwise() += bias(l);
      if (l + 1 < L && arch_.hidden == Activation::kRelu) out = out.cwiseMax(Scalar(0));
    }
    return cache.acts[L];
  }

  /// Accumulates dLoss/dparams into `grad` (if non-null) and writes
  /// dLoss/dinput into `d_input` (if non-null).
  void backward(Cache& cache, const Mat& d_out, Vec* grad, Mat* d_input) const {
    const int L = arch_.layers();
    cache.grads.resize(L + 1);
    cache.grads[L] = d_out;
    for (int l = L - 1; l >= 0; --l) {
      Mat& dz = cache.grads[l + 1];
      if (l + 1 < L && arch_.hidden == Activation::kRelu) {
        dz = (cache.acts[l + 1].array() > Scalar(0)).select(dz, Scalar(0));
      }
      if (grad != nullptr) {
        Eigen::Map<Mat> gw(grad->data() + offsets_[l], arch_.sizes[l + 1], arch_.sizes[l]);
        Eigen::Map<Vec> gb(grad->data() + offsets_[l] + static_cast<std::size_t>(arch_.sizes[l + 1]) * arch_.sizes[l],
                           arch_.sizes[l + 1]);
        gw.noalias() += dz * cache.acts[l].transpose();
        gb += dz.rowwise().sum();
      }
      if (l > 0 || d_input != nullptr) {
        Mat& dx = (l > 0) ? cache.grads[l] : *d_input;
        dx.noalias() = weight(l).transpose() * dz;
      }
    }
  }

 private:
  Architecture arch_;
  Vec params_;
  std::vector<std::size_t> offsets_;
};

/// Adam with PyTorch's bias-correction form.
template <typename Scalar>
class Adam {
 public:
  using Vec = Vector<Scalar>;

  Adam() = default;
  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  void step(Vec& params, const Vec& grad) {
    ++t_;
    m_ = Scalar(beta1_) * m_ + Scalar(1.0 - beta1_) * grad;
    v_ = Scalar(beta2_) * v_ + Scalar(1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const Scalar step_size = Scalar(lr_ / bc1);
    const Scalar root_bc2 = Scalar(std::sqrt(bc2));
    params.array() -= step_size * m_.array() / (v_.array().sqrt() / root_bc2 + Scalar(eps_));
  }

  std::int64_t steps() const { return t_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  Vec m_;
  Vec v_;
};

}  // namespace safecontact::nn
