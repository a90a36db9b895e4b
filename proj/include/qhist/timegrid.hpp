#pragma once

#include <variant>
#include <vector>

#include "qhist/hilbert.hpp"

namespace qhist {

/// Uniform slicing of [0, T] into N slices of width eps = T/N.  Path values
/// are sampled at the left node t_j = j * eps of each slice (0-based).
class TimeGrid {
 public:
  TimeGrid(double duration, int slices);

  double duration() const noexcept { return duration_; }
  int slices() const noexcept { return slices_; }
  double step() const noexcept { return duration_ / slices_; }
  double node(int j) const noexcept { return j * step(); }

  bool operator==(const TimeGrid&) const = default;

 private:
  double duration_;
  int slices_;
};

/// beta(t) = delta(t - t0): von Neumann meter.
struct Impulse {
  double t0;
};
/// beta(t) = c: finite-time meter.
struct ConstantCoupling {
  double c;
};
/// beta(t_j) = values[j]: arbitrary per-slice profile.
struct SampledCoupling {
  std::vector<double> values;
};

using SwitchingFunction = std::variant<Impulse, ConstantCoupling, SampledCoupling>;

/// Riemann weights w_j with F[phi] = sum_j w_j phi(t_j).  An impulse puts
/// weight exactly 1 on the slice containing t0.
std::vector<double> slice_weights(const SwitchingFunction& beta, const TimeGrid& grid);

/// Integral of beta over [0, T] (sum of the slice weights).
double coupling_integral(const SwitchingFunction& beta, const TimeGrid& grid);
/// Integral of beta^2 over [0, T]; impulses are rejected.
double coupling_square_integral(const SwitchingFunction& beta, const TimeGrid& grid);

SwitchingFunction scaled(const SwitchingFunction& beta, double factor);

/// A set of M meters sharing one time grid.  Slice weights are cached.
class PathFunctionalSpec {
 public:
  PathFunctionalSpec(TimeGrid grid, std::vector<SwitchingFunction> betas);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<SwitchingFunction>& betas() const noexcept { return betas_; }
  int meters() const noexcept { return static_cast<int>(betas_.size()); }
  /// weights()[i][j]: weight of slice j for meter i.
  const std::vector<std::vector<double>>& weights() const noexcept { return weights_; }
  /// Largest |w_j| over all meters and slices (eps * beta_max).
  double max_weight() const noexcept { return max_weight_; }
  /// Quantization step used to decide that two functional values coincide.
  double bin_tol() const noexcept { return 1e-6 * max_weight_; }

  /// Smallest and largest attainable F_i over all eigenpaths of a spectrum.
  std::pair<double, double> functional_range(int meter, const RealVector& spectrum) const;

 private:
  TimeGrid grid_;
  std::vector<SwitchingFunction> betas_;
  std::vector<std::vector<double>> weights_;
  double max_weight_ = 0.0;
};

/// A history restricted to eigenvalues: one eigen-index per slice.
struct EigenPath {
  std::vector<int> indices;

  int jump_count() const;
  bool operator==(const EigenPath&) const = default;
};

/// F_i[a] = sum_j w_{i,j} a_{k_j} for every meter i.
std::vector<double> functional_value(const PathFunctionalSpec& spec, const EigenPath& path,
                                     const SpectralDecomposition& decomp);

}  // namespace qhist
