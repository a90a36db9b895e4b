#pragma once

#include "qhist/hilbert.hpp"
#include "qhist/meters.hpp"
#include "qhist/pathsum.hpp"
#include "qhist/timegrid.hpp"

namespace qhist {

/// Periodic lattice x_i = x_min + i dx, i < points.
struct XGrid {
  double x_min = 0.0;
  double dx = 1.0;
  int points = 0;

  XGrid(double x_min, double dx, int points);
  double x(int i) const noexcept { return x_min + i * dx; }
  double x_max() const noexcept { return x(points - 1); }
  RealVector coordinates() const;
  /// Angular wavenumbers in DFT order.
  RealVector wavenumbers() const;
  bool operator==(const XGrid&) const = default;
};

struct LatticeWavefunction {
  XGrid grid;
  StateVector values;
  double mass = 1.0;

  LatticeWavefunction(XGrid grid, StateVector values, double mass);
  double norm_squared() const { return values.squaredNorm() * grid.dx; }
  double mean_position() const;
  double mean_momentum() const;
  /// Probability within `cells` lattice cells of either edge.
  double boundary_mass(int cells) const;
};

LatticeWavefunction gaussian_packet(const XGrid& grid, double x0, double sigma, double p0,
                                    double mass);

/// Coordinate function F(x) on the lattice and the meter profile beta(t).
struct CoordinateFunctional {
  RealVector values;
  SwitchingFunction beta;

  static CoordinateFunctional indicator(const XGrid& grid, double lo, double hi,
                                        SwitchingFunction beta);
  static CoordinateFunctional position(const XGrid& grid, SwitchingFunction beta);
};

/// N steps of H = p^2/2m + V + lambda beta(t) F.  First order applies the
/// kinetic factor, then the potential, then the meter phase exp(-i lambda w_j F).
LatticeWavefunction split_step_evolve(const LatticeWavefunction& psi, const RealVector& v,
                                      const TimeGrid& grid, double lambda,
                                      const CoordinateFunctional& cf,
                                      Splitting splitting = Splitting::FirstOrder);

AmplitudeField coordinate_amplitude_field(const LatticeWavefunction& psi0, const RealVector& v,
                                          const TimeGrid& grid, const CoordinateFunctional& cf,
                                          const LambdaAxis& axis,
                                          Splitting splitting = Splitting::FirstOrder);

enum class KineticTerm { FiniteDifference, Spectral };

HermitianOperator lattice_hamiltonian(const XGrid& grid, double mass, const RealVector& v,
                                      KineticTerm kinetic);

/// exp(-i V eps) exp(-i K eps) as a dense matrix, the one-slice factor of
/// split_step_evolve with lambda = 0.
Operator dense_split_propagator(const XGrid& grid, double mass, const RealVector& v, double eps,
                                KineticTerm kinetic);

/// Sum over all position eigenpaths of prod_j <x_{k_{j+1}}| exp(-i H eps) |x_{k_j}>
/// psi0(x_{k_1}) with the finite-difference Hamiltonian.
StateVector tiny_lattice_feynman_sum(const LatticeWavefunction& psi0, const RealVector& v,
                                     const TimeGrid& grid, std::uint64_t cap = kDefaultPathCap);

/// Position eigenpaths binned by sum_j w_j F(x_j), each slice advanced by
/// slice_propagator.  Bins carry lattice vectors (no dx^{1/2} scaling).
BinnedAmplitudes tiny_lattice_binned(const LatticeWavefunction& psi0,
                                     const Operator& slice_propagator, const TimeGrid& grid,
                                     const CoordinateFunctional& cf,
                                     std::uint64_t cap = kDefaultPathCap);

}  // namespace qhist
