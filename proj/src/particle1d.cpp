#include "qhist/particle1d.hpp"

#include <cmath>
#include <numbers>

#include "qhist/dft.hpp"
#include "qhist/parallel.hpp"

namespace qhist {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

void require_grid(const LatticeWavefunction& psi, const RealVector& v, const RealVector& f) {
  const auto n = static_cast<Eigen::Index>(psi.grid.points);
  if (psi.values.size() != n || v.size() != n || f.size() != n) {
    throw Error(ErrorCode::GridMismatch, "wavefunction, potential and F must share the x grid");
  }
}

class KineticStep {
 public:
  KineticStep(const XGrid& grid, double mass, double tau) {
    const RealVector k = grid.wavenumbers();
    phase_.resize(k.size());
    const double norm = 1.0 / grid.points;
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      phase_(i) = std::polar(norm, -tau * k(i) * k(i) / (2.0 * mass));
    }
  }

  void apply(StateVector& psi) const {
    std::span<Complex> data(psi.data(), static_cast<std::size_t>(psi.size()));
    dft::transform(data, dft::Direction::Forward);
    psi.array() *= phase_.array();
    dft::transform(data, dft::Direction::Backward);
  }

 private:
  Eigen::VectorXcd phase_;
};

Eigen::VectorXcd phase_vector(const RealVector& values, double scale) {
  Eigen::VectorXcd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out(i) = std::polar(1.0, -scale * values(i));
  return out;
}

SpectralDecomposition position_basis(const XGrid& grid) {
  const RealVector x = grid.coordinates();
  return spectral_decompose(
      HermitianOperator::diagonal({x.data(), static_cast<std::size_t>(x.size())}));
}

}  // namespace

XGrid::XGrid(double x_min_, double dx_, int points_) : x_min(x_min_), dx(dx_), points(points_) {
  if (!is_power_of_two(points)) {
    throw Error(ErrorCode::InvalidArgument, "x grid size must be a power of two");
  }
  if (!(dx > 0.0)) throw Error(ErrorCode::InvalidArgument, "x grid spacing must be positive");
}

RealVector XGrid::coordinates() const {
  RealVector out(points);
  for (int i = 0; i < points; ++i) out(i) = x(i);
  return out;
}

RealVector XGrid::wavenumbers() const {
  RealVector k(points);
  const double dk = 2.0 * kPi / (points * dx);
  for (int i = 0; i < points; ++i) k(i) = dk * (i < points / 2 ? i : i - points);
  return k;
}

LatticeWavefunction::LatticeWavefunction(XGrid grid_, StateVector values_, double mass_)
    : grid(grid_), values(std::move(values_)), mass(mass_) {
  if (values.size() != grid.points) {
    throw Error(ErrorCode::GridMismatch, "wavefunction length differs from the x grid");
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
}

double LatticeWavefunction::mean_position() const {
  return (values.cwiseAbs2().cwiseProduct(grid.coordinates())).sum() * grid.dx / norm_squared();
}

double LatticeWavefunction::mean_momentum() const {
  StateVector tmp = values;
  dft::transform({tmp.data(), static_cast<std::size_t>(tmp.size())}, dft::Direction::Forward);
  const RealVector k = grid.wavenumbers();
  return tmp.cwiseAbs2().cwiseProduct(k).sum() / tmp.squaredNorm();
}

double LatticeWavefunction::boundary_mass(int cells) const {
  const int n = grid.points;
  cells = std::min(cells, n / 2);
  return (values.head(cells).squaredNorm() + values.tail(cells).squaredNorm()) * grid.dx;
}

LatticeWavefunction gaussian_packet(const XGrid& grid, double x0, double sigma, double p0,
                                    double mass) {
  StateVector psi(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    const double u = (grid.x(i) - x0) / sigma;
    psi(i) = std::polar(std::exp(-0.25 * u * u), p0 * grid.x(i));
  }
  psi /= std::sqrt(psi.squaredNorm() * grid.dx);
  return LatticeWavefunction(grid, std::move(psi), mass);
}

CoordinateFunctional CoordinateFunctional::indicator(const XGrid& grid, double lo, double hi,
                                                     SwitchingFunction beta) {
  RealVector f(grid.points);
  for (int i = 0; i < grid.points; ++i) f(i) = (grid.x(i) >= lo && grid.x(i) <= hi) ? 1.0 : 0.0;
  return {std::move(f), std::move(beta)};
}

CoordinateFunctional CoordinateFunctional::position(const XGrid& grid, SwitchingFunction beta) {
  return {grid.coordinates(), std::move(beta)};
}

LatticeWavefunction split_step_evolve(const LatticeWavefunction& psi, const RealVector& v,
                                      const TimeGrid& grid, double lambda,
                                      const CoordinateFunctional& cf, Splitting splitting) {
  require_grid(psi, v, cf.values);
  const double eps = grid.step();
  const std::vector<double> w = slice_weights(cf.beta, grid);
  const KineticStep kinetic(psi.grid, psi.mass, eps);
  const bool symmetric = splitting == Splitting::Symmetric;
  const Eigen::VectorXcd potential = phase_vector(v, symmetric ? 0.5 * eps : eps);

  StateVector state = psi.values;
  for (int j = 0; j < grid.slices(); ++j) {
    if (symmetric) state.array() *= potential.array();
    kinetic.apply(state);
    state.array() *= potential.array();
    const double c = lambda * w[static_cast<std::size_t>(j)];
    if (c != 0.0) state.array() *= phase_vector(cf.values, c).array();
  }
  return LatticeWavefunction(psi.grid, std::move(state), psi.mass);
}

AmplitudeField coordinate_amplitude_field(const LatticeWavefunction& psi0, const RealVector& v,
                                          const TimeGrid& grid, const CoordinateFunctional& cf,
                                          const LambdaAxis& axis, Splitting splitting) {
  require_grid(psi0, v, cf.values);
  const LambdaGrid lgrid({axis});
  validate_lambda_grid(PathFunctionalSpec(grid, {cf.beta}), cf.values, lgrid);

  Eigen::MatrixXcd states(psi0.grid.points, static_cast<Eigen::Index>(lgrid.size()));
  parallel_for(lgrid.size(), [&](std::size_t l) {
    const double lambda = axis.lambda(static_cast<int>(l));
    states.col(static_cast<Eigen::Index>(l)) =
        split_step_evolve(psi0, v, grid, lambda, cf, splitting).values;
  });
  return field_from_lambda_states(lgrid, std::move(states), FieldKind::Fine);
}

HermitianOperator lattice_hamiltonian(const XGrid& grid, double mass, const RealVector& v,
                                      KineticTerm kinetic) {
  const int n = grid.points;
  if (v.size() != n) throw Error(ErrorCode::GridMismatch, "potential length differs from the x grid");
  Operator h = Operator::Zero(n, n);
  if (kinetic == KineticTerm::FiniteDifference) {
    const double t = 1.0 / (2.0 * mass * grid.dx * grid.dx);
    for (int i = 0; i < n; ++i) {
      h(i, i) += 2.0 * t;
      h(i, (i + 1) % n) -= t;
      h((i + 1) % n, i) -= t;
    }
  } else {
    const RealVector k = grid.wavenumbers();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        Complex sum = 0.0;
        for (int m = 0; m < n; ++m) {
          sum += std::polar(k(m) * k(m) / (2.0 * mass), 2.0 * kPi * m * (a - b) / n);
        }
        h(a, b) = sum / static_cast<double>(n);
      }
    }
    h = 0.5 * (h + h.adjoint()).eval();
  }
  h.diagonal() += v.cast<Complex>();
  return HermitianOperator(h);
}

Operator dense_split_propagator(const XGrid& grid, double mass, const RealVector& v, double eps,
                                KineticTerm kinetic) {
  const RealVector zero = RealVector::Zero(grid.points);
  const Operator k = exact_propagator(lattice_hamiltonian(grid, mass, zero, kinetic), eps);
  return phase_vector(v, eps).asDiagonal() * k;
}

StateVector tiny_lattice_feynman_sum(const LatticeWavefunction& psi0, const RealVector& v,
                                     const TimeGrid& grid, std::uint64_t cap) {
  const XGrid& xg = psi0.grid;
  const auto h = lattice_hamiltonian(xg, psi0.mass, v, KineticTerm::FiniteDifference);
  const auto position = position_basis(xg);
  return EigenpathSum(h, position, grid, psi0.values, cap).total();
}

BinnedAmplitudes tiny_lattice_binned(const LatticeWavefunction& psi0,
                                     const Operator& slice_propagator, const TimeGrid& grid,
                                     const CoordinateFunctional& cf, std::uint64_t cap) {
  const XGrid& xg = psi0.grid;
  if (cf.values.size() != xg.points) {
    throw Error(ErrorCode::GridMismatch, "F length differs from the x grid");
  }
  const auto position = position_basis(xg);
  const EigenpathSum sum(slice_propagator, position, grid.slices(), psi0.values, cap);
  const RealVector f = cf.values;
  return sum.binned(PathFunctionalSpec(grid, {cf.beta}), [&xg, f](double x) {
    return f(static_cast<Eigen::Index>(std::lround((x - xg.x_min) / xg.dx)));
  });
}

}  // namespace qhist
