#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>

#include "qhist/error.hpp"

namespace qhist {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kDefaultDegeneracyTol = 1e-9;

/// Dense complex matrix that passed the hermiticity check
/// ||M - M^dagger||_max <= 1e-12 * ||M||_max at construction.
class HermitianOperator {
 public:
  explicit HermitianOperator(Operator matrix);

  static HermitianOperator diagonal(std::span<const double> values);
  static HermitianOperator zero(Eigen::Index dim);
  /// [[e1, v], [conj(v), e2]]
  static HermitianOperator qubit(double e1, double e2, Complex v);

  const Operator& matrix() const noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator scaled(double factor) const;

 private:
  Operator matrix_;
};

/// Ascending eigenvalues with column-orthonormal eigenvectors.  Each
/// eigenvector's largest-magnitude component is real and positive.
struct SpectralDecomposition {
  RealVector eigenvalues;
  Operator eigenvectors;
  /// Set when some adjacent eigenvalue gap falls below the degeneracy
  /// tolerance.  Not fatal by itself; eigenpath labeling rejects it.
  bool degenerate = false;

  Eigen::Index dim() const noexcept { return eigenvalues.size(); }
  Operator projector(Eigen::Index k) const;
  Operator reconstruct() const;
  /// F(A) = sum_k F(a_k) |a_k><a_k|
  template <typename F>
  Operator apply_function(F&& f) const {
    Eigen::VectorXcd values(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) values(k) = f(eigenvalues(k));
    return eigenvectors * values.asDiagonal() * eigenvectors.adjoint();
  }
  /// Throws DegenerateSpectrum when the flag is set.
  void require_nondegenerate() const;
};

SpectralDecomposition spectral_decompose(const HermitianOperator& op,
                                         double degeneracy_tol = kDefaultDegeneracyTol);

/// exp(-i H t) through the spectral decomposition.
Operator exact_propagator(const HermitianOperator& hamiltonian, double duration);

enum class Splitting { FirstOrder, Symmetric };

/// (exp(-i H1 eps) exp(-i H2 eps))^N with eps = T/N.  The symmetric variant
/// is (exp(-i H2 eps/2) exp(-i H1 eps) exp(-i H2 eps/2))^N.
Operator trotter_propagator(const HermitianOperator& h1, const HermitianOperator& h2,
                            double duration, int slices,
                            Splitting splitting = Splitting::FirstOrder);

double max_abs(const Operator& m);
double unitarity_residual(const Operator& u);
void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what);

}  // namespace qhist
