#pragma once

#include <variant>
#include <vector>

#include "qhist/hilbert.hpp"
#include "qhist/pathsum.hpp"
#include "qhist/timegrid.hpp"

namespace qhist {

/// One pointer axis: L coupling strengths lambda_l = (l - L/2) dlambda and
/// the conjugate pointer readouts f_m = f_origin + m df, df = 2 pi / (L dlambda).
struct LambdaAxis {
  int points = 0;
  double dlambda = 0.0;
  double f_origin = 0.0;

  double df() const noexcept;
  double lambda(int l) const noexcept { return (l - points / 2) * dlambda; }
  double f(int m) const noexcept { return f_origin + m * df(); }
  int nearest_node(double f) const noexcept;

  /// Readout grid with spacing df whose node L/2 sits at f_center.
  static LambdaAxis centered(int points, double df, double f_center);

  bool operator==(const LambdaAxis&) const = default;
};

/// Product grid over 1..3 meter axes.  Flat indices are row-major with the
/// first axis slowest.
class LambdaGrid {
 public:
  explicit LambdaGrid(std::vector<LambdaAxis> axes);

  int meters() const noexcept { return static_cast<int>(axes_.size()); }
  const LambdaAxis& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
  const std::vector<LambdaAxis>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return size_; }
  /// Quadrature weight of one readout cell, prod_i df_i.
  double cell() const noexcept;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(std::span<const int> index) const;
  std::vector<double> lambdas(std::size_t flat) const;
  std::vector<double> readouts(std::size_t flat) const;

  bool operator==(const LambdaGrid&) const = default;

 private:
  std::vector<LambdaAxis> axes_;
  std::size_t size_ = 1;
};

enum class FieldKind { Fine, Coarse };

/// Pointer-resolved substates |Phi(T|f)>, one column per readout node.
struct AmplitudeField {
  LambdaGrid grid;
  Eigen::MatrixXcd states;  // dim x grid.size()
  FieldKind kind = FieldKind::Fine;

  /// sum_f |Phi(f)> df^M
  StateVector marginal() const;
  /// sum_f <Phi(f)|Phi(f)> df^M
  double total_weight() const;
};

/// (lambda-space states, one column per lambda node) -> readout field.
/// |Phi(f)> = (2 pi)^{-M} sum_lambda exp(+i lambda f) |Phi(lambda)> dlambda^M.
AmplitudeField field_from_lambda_states(const LambdaGrid& grid, Eigen::MatrixXcd lambda_states,
                                        FieldKind kind);
/// Exact inverse of field_from_lambda_states.
Eigen::MatrixXcd lambda_states_from_field(const AmplitudeField& field);

/// Evaluates prod_j exp(-i (sum_i lambda_i w_ij) A) exp(-i H eps) |psi0>
/// in the eigenbasis of A, reusing the diagonalization across lambdas.
class LambdaEvolver {
 public:
  LambdaEvolver(const HermitianOperator& h, const HermitianOperator& a, const TimeGrid& grid,
                std::vector<SwitchingFunction> betas);

  StateVector evolve(std::span<const double> lambdas, const StateVector& psi0) const;
  const PathFunctionalSpec& spec() const noexcept { return spec_; }
  const SpectralDecomposition& observable() const noexcept { return decomp_; }

 private:
  PathFunctionalSpec spec_;
  SpectralDecomposition decomp_;
  Operator transition_;  // V^dagger exp(-i H eps) V
};

StateVector lambda_evolve(const HermitianOperator& h, const HermitianOperator& a,
                          const TimeGrid& grid, const std::vector<SwitchingFunction>& betas,
                          std::span<const double> lambdas, const StateVector& psi0);

/// prod_j exp(-i c_j A) exp(-i H eps) |psi0> for an explicit per-slice
/// coupling profile c_j, by dense matrix products in the original basis.
StateVector evolve_with_coupling(const HermitianOperator& h, const HermitianOperator& a,
                                 const TimeGrid& grid, std::span<const double> coupling,
                                 const StateVector& psi0);

/// Throws NyquistViolation / GridTooSmall when the grid cannot represent
/// every attainable functional value of the spectrum.
void validate_lambda_grid(const PathFunctionalSpec& spec, const RealVector& spectrum,
                          const LambdaGrid& grid);

AmplitudeField amplitude_field(const HermitianOperator& h, const HermitianOperator& a,
                               const TimeGrid& grid, const std::vector<SwitchingFunction>& betas,
                               const LambdaGrid& lgrid, const StateVector& psi0);

/// Largest || field(node) df^M - (sum of bins whose f rounds to node) || over
/// all nodes.  Bins outside the grid raise GridTooSmall.
double field_vs_bins_residual(const AmplitudeField& field, const BinnedAmplitudes& bins);

/// G(f) = exp(-sum_j f_j^2 / width_j^2)
struct GaussianKernel {
  std::vector<double> widths;
};
/// G(f) = delta(f - offset); lambda symbol exp(-i offset lambda)
struct ShiftKernel {
  std::vector<double> offsets;
};
/// lambda symbol exp(-i sum_j b_j lambda_j^2)
struct QuadraticPhaseKernel {
  std::vector<double> b;
};
/// G sampled on the circular difference lattice, same flat layout as the grid;
/// entry s along an axis stands for displacement s df (s < L/2) or (s - L) df.
struct SampledKernel {
  Eigen::VectorXcd values;
};

using CoarseGrainKernel =
    std::variant<GaussianKernel, ShiftKernel, QuadraticPhaseKernel, SampledKernel>;

/// G(lambda) = sum_d exp(-i lambda d) G(d) df^M at every lambda node.
Eigen::VectorXcd kernel_symbol(const CoarseGrainKernel& kernel, const LambdaGrid& grid);
/// sum_d |G(d)|^2 df^M, evaluated through Parseval from the symbol.
double kernel_mass(const CoarseGrainKernel& kernel, const LambdaGrid& grid);

/// Circular convolution of the field with G along every pointer axis.
AmplitudeField coarse_grain(const AmplitudeField& field, const CoarseGrainKernel& kernel);

/// G(f) -> G(alpha f); Gaussian kernels only.
CoarseGrainKernel resolution_rescale(const CoarseGrainKernel& kernel, double alpha);

struct ProbabilityTable {
  LambdaGrid grid;
  RealVector w;  // W(f) per node
  double cell = 0.0;

  double total_mass() const { return w.sum() * cell; }
};

ProbabilityTable probabilities(const AmplitudeField& field);

/// Forward-transforms a fine field and compares every lambda node with the
/// evolution under the combined profile lambda(t) = sum_i lambda_i beta_i(t).
double fourier_consistency_check(const AmplitudeField& field, const HermitianOperator& h,
                                 const HermitianOperator& a, const TimeGrid& grid,
                                 const std::vector<SwitchingFunction>& betas,
                                 const StateVector& psi0);

}  // namespace qhist
