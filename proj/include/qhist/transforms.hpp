#pragma once

#include <cstdint>
#include <vector>

#include "qhist/hilbert.hpp"
#include "qhist/meters.hpp"
#include "qhist/pathsum.hpp"
#include "qhist/timegrid.hpp"

namespace qhist {

/// Operator-valued kernel U(d) on the circular difference lattice of a
/// single readout axis: samples[s] holds U(s df) for s < L/2 and
/// U((s - L) df) otherwise.
struct OperatorKernel {
  LambdaAxis axis;
  std::vector<Operator> samples;

  const Operator& at_offset(int shift) const;
};

/// U(d) = sum_lambda exp(i lambda d) U_B(lambda) U_A(lambda)^dagger dlambda / 2pi,
/// where U_Z(lambda) is the sliced evolution with coupling lambda beta_Z(t) Z.
OperatorKernel finite_time_kernel(const HermitianOperator& h, const HermitianOperator& a,
                                  const HermitianOperator& b, const TimeGrid& grid,
                                  const SwitchingFunction& beta_a,
                                  const SwitchingFunction& beta_b, const LambdaAxis& axis);

/// |Phi_B(f)> = sum_f' U(f - f') |Phi_A(f')> df (circular in f - f').
AmplitudeField apply_kernel(const OperatorKernel& kernel, const AmplitudeField& field);

/// max over (f, f') of || sum_f'' U^dagger(f''-f) U(f''-f') df - delta_ff' / df || df.
double kernel_unitarity_residual(const OperatorKernel& kernel);

struct BasisChange {
  Eigen::VectorXcd amplitudes;  // <b_j|psi>
  double residual = 0.0;        // against direct projection onto |b_j>
};

/// <b|psi> = sum_a <b|a><a|psi>.
BasisChange von_neumann_basis_change(const StateVector& psi, const SpectralDecomposition& a,
                                     const SpectralDecomposition& b);

/// || sum_[a] U_T[a]^dagger U_T[a] - 1 ||_max with explicit operator products.
double completeness_identity_check(const HermitianOperator& h, const SpectralDecomposition& a,
                                   const TimeGrid& grid, std::uint64_t cap = kDefaultPathCap);

}  // namespace qhist
