#pragma once

#include <Eigen/Dense>

namespace qhist {

/// Neumaier-compensated running sum of complex vectors, applied
/// component-wise to the real and imaginary parts.
class CompensatedSum {
 public:
  explicit CompensatedSum(Eigen::Index dim = 0)
      : sum_(Eigen::VectorXd::Zero(2 * dim)), carry_(Eigen::VectorXd::Zero(2 * dim)) {}

  Eigen::Index dim() const noexcept { return sum_.size() / 2; }

  void add(Eigen::Index i, std::complex<double> x) {
    add_scalar(2 * i, x.real());
    add_scalar(2 * i + 1, x.imag());
  }

  void add(const Eigen::VectorXcd& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) add(i, x(i));
  }

  Eigen::VectorXcd value() const {
    Eigen::VectorXcd out(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      out(i) = {sum_(2 * i) + carry_(2 * i), sum_(2 * i + 1) + carry_(2 * i + 1)};
    }
    return out;
  }

 private:
  void add_scalar(Eigen::Index i, double x) {
    const double s = sum_(i);
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      carry_(i) += (s - t) + x;
    } else {
      carry_(i) += (x - t) + s;
    }
    sum_(i) = t;
  }

  Eigen::VectorXd sum_;
  Eigen::VectorXd carry_;
};

}  // namespace qhist
