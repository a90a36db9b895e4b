#include "qhist/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace qhist {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ImpulseOutOfRange: return "ImpulseOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::AllZeroSubstates: return "AllZeroSubstates";
    case ErrorCode::NyquistViolation: return "NyquistViolation";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::FineFieldNotNormalizable: return "FineFieldNotNormalizable";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::ImpulseNotSquareIntegrable: return "ImpulseNotSquareIntegrable";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double max_abs(const Operator& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double unitarity_residual(const Operator& u) {
  return max_abs(u.adjoint() * u - Operator::Identity(u.rows(), u.cols()));
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

HermitianOperator::HermitianOperator(Operator matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "operator must be square and non-empty");
  }
  if (!matrix_.allFinite()) {
    throw Error(ErrorCode::NotHermitian, "operator has non-finite entries");
  }
  const double scale = max_abs(matrix_);
  const double asym = max_abs(matrix_ - matrix_.adjoint());
  if (asym > kHermiticityTol * scale) {
    throw Error(ErrorCode::NotHermitian,
                "||M - M^dagger||_max = " + std::to_string(asym));
  }
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> values) {
  Operator m = Operator::Zero(static_cast<Eigen::Index>(values.size()),
                              static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = values[k];
  }
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  return HermitianOperator(Operator::Zero(dim, dim));
}

HermitianOperator HermitianOperator::qubit(double e1, double e2, Complex v) {
  Operator m(2, 2);
  m << e1, v, std::conj(v), e2;
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  require_same_dim(dim(), other.dim(), "operator sum");
  return HermitianOperator(matrix_ + other.matrix_);
}

HermitianOperator HermitianOperator::scaled(double factor) const {
  return HermitianOperator(matrix_ * factor);
}

Operator SpectralDecomposition::projector(Eigen::Index k) const {
  return eigenvectors.col(k) * eigenvectors.col(k).adjoint();
}

Operator SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

void SpectralDecomposition::require_nondegenerate() const {
  if (degenerate) {
    throw Error(ErrorCode::DegenerateSpectrum,
                "eigenpath labeling needs a non-degenerate observable; bin with a function of it instead");
  }
}

SpectralDecomposition spectral_decompose(const HermitianOperator& op, double degeneracy_tol) {
  Eigen::SelfAdjointEigenSolver<Operator> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotHermitian, "eigensolver did not converge");
  }
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();

  const Eigen::Index n = out.dim();
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = out.eigenvectors.col(k);
    const double peak = col.cwiseAbs().maxCoeff();
    // First component within rounding of the peak wins, so ties such as
    // (1, -1)/sqrt(2) resolve to the lowest index.
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) >= peak * (1.0 - 1e-12)) {
        pivot = i;
        break;
      }
    }
    const Complex phase = std::conj(col(pivot)) / std::abs(col(pivot));
    col *= phase;
    col(pivot) = Complex(col(pivot).real(), 0.0);
  }

  const double radius = out.eigenvalues.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 1; k < n; ++k) {
    if (out.eigenvalues(k) - out.eigenvalues(k - 1) <= degeneracy_tol * radius) {
      out.degenerate = true;
    }
  }
  return out;
}

Operator exact_propagator(const HermitianOperator& hamiltonian, double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::InvalidArgument, "propagation time must be finite and >= 0");
  }
  const auto decomp = spectral_decompose(hamiltonian);
  Eigen::VectorXcd phases(decomp.dim());
  for (Eigen::Index k = 0; k < decomp.dim(); ++k) {
    phases(k) = std::exp(Complex(0.0, -decomp.eigenvalues(k) * duration));
  }
  return decomp.eigenvectors * phases.asDiagonal() * decomp.eigenvectors.adjoint();
}

Operator trotter_propagator(const HermitianOperator& h1, const HermitianOperator& h2,
                            double duration, int slices, Splitting splitting) {
  require_same_dim(h1.dim(), h2.dim(), "trotter_propagator");
  if (slices < 1) throw Error(ErrorCode::InvalidArgument, "slice count must be >= 1");
  const double eps = duration / slices;
  Operator step;
  if (splitting == Splitting::FirstOrder) {
    step = exact_propagator(h1, eps) * exact_propagator(h2, eps);
  } else {
    const Operator half = exact_propagator(h2, 0.5 * eps);
    step = half * exact_propagator(h1, eps) * half;
  }
  Operator out = Operator::Identity(h1.dim(), h1.dim());
  for (int j = 0; j < slices; ++j) out = step * out;
  return out;
}

}  // namespace qhist
