#pragma once

#include <vector>

#include "qhist/hilbert.hpp"
#include "qhist/meters.hpp"
#include "qhist/timegrid.hpp"

namespace qhist {

/// Pointer record phi(t_j), one sample per slice, in units of the observable.
struct ReadoutRecord {
  TimeGrid grid;
  std::vector<double> phi;

  ReadoutRecord(TimeGrid grid, std::vector<double> phi);
  static ReadoutRecord constant(const TimeGrid& grid, double value);
};

/// Tube width sigma of the quadratic record functional g(phi) = -i phi^2 / sigma^2.
struct MenskyConfig {
  double sigma;

  explicit MenskyConfig(double sigma);
};

/// prod_j exp(-(phi_j - A)^2 eps / sigma^2) exp(-i H eps) |psi0>, with the
/// damping factor exponentiated as a matrix function of (phi_j - A)^2.
StateVector record_evolve(const HermitianOperator& h, const HermitianOperator& a,
                          const ReadoutRecord& record, const MenskyConfig& cfg,
                          const StateVector& psi0);

/// The same state built as one von Neumann meter per slice whose fine
/// readout comb sum_k delta(f - a_k) P_k is coarse grained by a Gaussian of
/// width sigma / eps^{1/2} evaluated at f = phi_j.
StateVector weak_meter_array(const HermitianOperator& h, const HermitianOperator& a,
                             const ReadoutRecord& record, double sigma, const StateVector& psi0);

/// <Psi_phi(T)|Psi_phi(T)> for every record, in input order.  These are raw
/// weights; no normalization over record space is implied.
std::vector<double> record_probability_scan(const HermitianOperator& h,
                                            const HermitianOperator& a, const MenskyConfig& cfg,
                                            const StateVector& psi0,
                                            const std::vector<ReadoutRecord>& records);

/// For each sigma, the largest || Phi_sigma(lambda) - Phi(lambda) || over the
/// lambda grid, where Phi_sigma carries the per-slice factors
/// exp(-(lambda beta_j)^2 sigma^2 eps / 4).
std::vector<double> weak_limit_check(const HermitianOperator& h, const HermitianOperator& a,
                                     const TimeGrid& grid, const SwitchingFunction& beta,
                                     const std::vector<double>& sigmas, const StateVector& psi0,
                                     const LambdaAxis& axis);

}  // namespace qhist
