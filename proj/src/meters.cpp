#include "qhist/meters.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qhist/dft.hpp"
#include "qhist/parallel.hpp"

namespace qhist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

double sign_alternation(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

// Applies op to every line of `states` running along `axis`, one state
// component at a time.
template <typename LineOp>
void for_each_line(const LambdaGrid& grid, int axis, Eigen::MatrixXcd& states, LineOp&& op) {
  const auto length = static_cast<std::size_t>(grid.axis(axis).points);
  std::size_t stride = 1;
  for (int b = axis + 1; b < grid.meters(); ++b) stride *= static_cast<std::size_t>(grid.axis(b).points);
  const std::size_t outer = grid.size() / (length * stride);
  std::vector<Complex> line(length);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < stride; ++i) {
      const std::size_t base = o * length * stride + i;
      for (Eigen::Index r = 0; r < states.rows(); ++r) {
        for (std::size_t l = 0; l < length; ++l) {
          line[l] = states(r, static_cast<Eigen::Index>(base + l * stride));
        }
        op(std::span<Complex>(line));
        for (std::size_t l = 0; l < length; ++l) {
          states(r, static_cast<Eigen::Index>(base + l * stride)) = line[l];
        }
      }
    }
  }
}

// lambda -> f along one axis.
void inverse_axis(const LambdaAxis& ax, std::span<Complex> line) {
  for (int l = 0; l < ax.points; ++l) {
    line[static_cast<std::size_t>(l)] *= std::polar(1.0, ax.lambda(l) * ax.f_origin);
  }
  dft::transform(line, dft::Direction::Backward);
  const double scale = ax.dlambda / kTwoPi;
  for (int m = 0; m < ax.points; ++m) line[static_cast<std::size_t>(m)] *= scale * sign_alternation(m);
}

// f -> lambda along one axis.
void forward_axis(const LambdaAxis& ax, std::span<Complex> line) {
  for (int m = 0; m < ax.points; ++m) line[static_cast<std::size_t>(m)] *= sign_alternation(m);
  dft::transform(line, dft::Direction::Forward);
  const double df = ax.df();
  for (int l = 0; l < ax.points; ++l) {
    line[static_cast<std::size_t>(l)] *= df * std::polar(1.0, -ax.lambda(l) * ax.f_origin);
  }
}

// Difference-lattice samples -> lambda symbol along one axis.
void symbol_axis(const LambdaAxis& ax, std::span<Complex> line) {
  for (int s = 0; s < ax.points; ++s) line[static_cast<std::size_t>(s)] *= sign_alternation(s);
  dft::transform(line, dft::Direction::Forward);
  for (auto& x : line) x *= ax.df();
}

double displacement(const LambdaAxis& ax, int s) {
  return (s < ax.points / 2 ? s : s - ax.points) * ax.df();
}

void require_meter_count(std::size_t given, const LambdaGrid& grid, const char* what) {
  if (given != static_cast<std::size_t>(grid.meters())) {
    throw Error(ErrorCode::GridMismatch, std::string(what) + " has " + std::to_string(given) +
                                             " axes, grid has " + std::to_string(grid.meters()));
  }
}

}  // namespace

double LambdaAxis::df() const noexcept { return kTwoPi / (points * dlambda); }

int LambdaAxis::nearest_node(double value) const noexcept {
  const double pos = (value - f_origin) / df();
  const long long m = std::llround(pos);
  return (m < 0 || m >= points) ? -1 : static_cast<int>(m);
}

LambdaAxis LambdaAxis::centered(int points, double df, double f_center) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "readout spacing must be positive");
  return LambdaAxis{points, kTwoPi / (points * df), f_center - (points / 2) * df};
}

LambdaGrid::LambdaGrid(std::vector<LambdaAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "between one and three meter axes are supported");
  }
  for (const auto& ax : axes_) {
    if (!is_power_of_two(ax.points)) {
      throw Error(ErrorCode::InvalidArgument, "lambda grid size must be a power of two, got " +
                                                  std::to_string(ax.points));
    }
    if (!(ax.dlambda > 0.0) || !std::isfinite(ax.dlambda) || !std::isfinite(ax.f_origin)) {
      throw Error(ErrorCode::InvalidArgument, "lambda spacing must be finite and positive");
    }
    size_ *= static_cast<std::size_t>(ax.points);
  }
}

double LambdaGrid::cell() const noexcept {
  double c = 1.0;
  for (const auto& ax : axes_) c *= ax.df();
  return c;
}

std::vector<int> LambdaGrid::unflatten(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const auto n = static_cast<std::size_t>(axes_[a].points);
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t LambdaGrid::flatten(std::span<const int> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    flat = flat * static_cast<std::size_t>(axes_[a].points) + static_cast<std::size_t>(index[a]);
  }
  return flat;
}

std::vector<double> LambdaGrid::lambdas(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<double> out(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) out[a] = axes_[a].lambda(idx[a]);
  return out;
}

std::vector<double> LambdaGrid::readouts(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<double> out(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) out[a] = axes_[a].f(idx[a]);
  return out;
}

StateVector AmplitudeField::marginal() const { return states.rowwise().sum() * grid.cell(); }

double AmplitudeField::total_weight() const { return states.colwise().squaredNorm().sum() * grid.cell(); }

AmplitudeField field_from_lambda_states(const LambdaGrid& grid, Eigen::MatrixXcd lambda_states,
                                        FieldKind kind) {
  if (static_cast<std::size_t>(lambda_states.cols()) != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "lambda state count does not match the grid");
  }
  for (int a = 0; a < grid.meters(); ++a) {
    for_each_line(grid, a, lambda_states,
                  [&](std::span<Complex> line) { inverse_axis(grid.axis(a), line); });
  }
  return AmplitudeField{grid, std::move(lambda_states), kind};
}

Eigen::MatrixXcd lambda_states_from_field(const AmplitudeField& field) {
  Eigen::MatrixXcd out = field.states;
  for (int a = 0; a < field.grid.meters(); ++a) {
    for_each_line(field.grid, a, out,
                  [&](std::span<Complex> line) { forward_axis(field.grid.axis(a), line); });
  }
  return out;
}

LambdaEvolver::LambdaEvolver(const HermitianOperator& h, const HermitianOperator& a,
                             const TimeGrid& grid, std::vector<SwitchingFunction> betas)
    : spec_(grid, std::move(betas)), decomp_(spectral_decompose(a)) {
  require_same_dim(h.dim(), a.dim(), "H vs observable");
  transition_ = decomp_.eigenvectors.adjoint() * exact_propagator(h, grid.step()) *
                decomp_.eigenvectors;
}

StateVector LambdaEvolver::evolve(std::span<const double> lambdas,
                                  const StateVector& psi0) const {
  require_same_dim(psi0.size(), decomp_.dim(), "psi0 vs observable");
  if (lambdas.size() != static_cast<std::size_t>(spec_.meters())) {
    throw Error(ErrorCode::DimensionMismatch, "one lambda per meter is required");
  }
  const auto& w = spec_.weights();
  Eigen::VectorXcd c = decomp_.eigenvectors.adjoint() * psi0;
  for (int j = 0; j < spec_.grid().slices(); ++j) {
    double coupling = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      coupling += lambdas[i] * w[i][static_cast<std::size_t>(j)];
    }
    c = transition_ * c;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      c(k) *= std::polar(1.0, -coupling * decomp_.eigenvalues(k));
    }
  }
  return decomp_.eigenvectors * c;
}

StateVector lambda_evolve(const HermitianOperator& h, const HermitianOperator& a,
                          const TimeGrid& grid, const std::vector<SwitchingFunction>& betas,
                          std::span<const double> lambdas, const StateVector& psi0) {
  return LambdaEvolver(h, a, grid, betas).evolve(lambdas, psi0);
}

StateVector evolve_with_coupling(const HermitianOperator& h, const HermitianOperator& a,
                                 const TimeGrid& grid, std::span<const double> coupling,
                                 const StateVector& psi0) {
  require_same_dim(h.dim(), a.dim(), "H vs observable");
  require_same_dim(h.dim(), psi0.size(), "H vs psi0");
  if (coupling.size() != static_cast<std::size_t>(grid.slices())) {
    throw Error(ErrorCode::LengthMismatch, "coupling profile needs one value per slice");
  }
  const Operator step = (Complex(0.0, -grid.step()) * h.matrix()).exp();
  StateVector state = psi0;
  for (double c : coupling) {
    const Operator kick = (Complex(0.0, -c) * a.matrix()).exp();
    state = kick * (step * state);
  }
  return state;
}

void validate_lambda_grid(const PathFunctionalSpec& spec, const RealVector& spectrum,
                          const LambdaGrid& grid) {
  require_meter_count(static_cast<std::size_t>(spec.meters()), grid, "meter set");
  const double a_max = spectrum.cwiseAbs().maxCoeff();
  for (int i = 0; i < spec.meters(); ++i) {
    const auto& ax = grid.axis(i);
    double w_max = 0.0;
    for (double w : spec.weights()[static_cast<std::size_t>(i)]) w_max = std::max(w_max, std::abs(w));
    if (ax.dlambda * w_max * a_max > std::numbers::pi * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "meter " << i << ": dlambda = " << ax.dlambda << " exceeds pi/(eps beta a_max) = "
          << std::numbers::pi / (w_max * a_max) << "; use df >= " << 2.0 * w_max * a_max / ax.points;
      throw Error(ErrorCode::NyquistViolation, msg.str());
    }
    const auto [fmin, fmax] = spec.functional_range(i, spectrum);
    const double slack = 1e-9 * ax.df();
    if (fmin < ax.f(0) - slack || fmax > ax.f(ax.points - 1) + slack) {
      std::ostringstream msg;
      msg << "meter " << i << ": attainable f in [" << fmin << ", " << fmax
          << "] but the grid covers [" << ax.f(0) << ", " << ax.f(ax.points - 1)
          << "]; suggested centre " << 0.5 * (fmin + fmax) << " with L*df > " << (fmax - fmin);
      throw Error(ErrorCode::GridTooSmall, msg.str());
    }
  }
}

AmplitudeField amplitude_field(const HermitianOperator& h, const HermitianOperator& a,
                               const TimeGrid& grid, const std::vector<SwitchingFunction>& betas,
                               const LambdaGrid& lgrid, const StateVector& psi0) {
  const LambdaEvolver evolver(h, a, grid, betas);
  validate_lambda_grid(evolver.spec(), evolver.observable().eigenvalues, lgrid);
  Eigen::MatrixXcd states(psi0.size(), static_cast<Eigen::Index>(lgrid.size()));
  parallel_for(lgrid.size(), [&](std::size_t p) {
    const auto lambdas = lgrid.lambdas(p);
    states.col(static_cast<Eigen::Index>(p)) = evolver.evolve(lambdas, psi0);
  });
  return field_from_lambda_states(lgrid, std::move(states), FieldKind::Fine);
}

double field_vs_bins_residual(const AmplitudeField& field, const BinnedAmplitudes& bins) {
  const auto& grid = field.grid;
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(field.states.rows(), field.states.cols());
  std::vector<int> node(static_cast<std::size_t>(grid.meters()));
  for (const auto& [key, bin] : bins.bins) {
    require_meter_count(bin.f.size(), grid, "bin key");
    for (int a = 0; a < grid.meters(); ++a) {
      const int m = grid.axis(a).nearest_node(bin.f[static_cast<std::size_t>(a)]);
      if (m < 0) throw Error(ErrorCode::GridTooSmall, "bin lies outside the readout grid");
      node[static_cast<std::size_t>(a)] = m;
    }
    expected.col(static_cast<Eigen::Index>(grid.flatten(node))) += bin.state;
  }
  double worst = 0.0;
  for (Eigen::Index p = 0; p < field.states.cols(); ++p) {
    worst = std::max(worst, (field.states.col(p) * grid.cell() - expected.col(p)).norm());
  }
  return worst;
}

namespace {

struct SymbolVisitor {
  const LambdaGrid& grid;

  // Separable kernels: product of per-axis symbols.
  Eigen::VectorXcd separable(const std::vector<std::vector<Complex>>& per_axis) const {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto idx = grid.unflatten(p);
      Complex v = 1.0;
      for (std::size_t a = 0; a < idx.size(); ++a) v *= per_axis[a][static_cast<std::size_t>(idx[a])];
      out(static_cast<Eigen::Index>(p)) = v;
    }
    return out;
  }

  Eigen::VectorXcd operator()(const GaussianKernel& k) const {
    require_meter_count(k.widths.size(), grid, "gaussian kernel");
    std::vector<std::vector<Complex>> per_axis;
    for (int a = 0; a < grid.meters(); ++a) {
      const auto& ax = grid.axis(a);
      const double width = k.widths[static_cast<std::size_t>(a)];
      if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian width must be positive");
      std::vector<Complex> line(static_cast<std::size_t>(ax.points));
      for (int s = 0; s < ax.points; ++s) {
        const double d = displacement(ax, s);
        line[static_cast<std::size_t>(s)] = std::exp(-d * d / (width * width));
      }
      symbol_axis(ax, line);
      per_axis.push_back(std::move(line));
    }
    return separable(per_axis);
  }

  Eigen::VectorXcd operator()(const ShiftKernel& k) const {
    require_meter_count(k.offsets.size(), grid, "shift kernel");
    std::vector<std::vector<Complex>> per_axis;
    for (int a = 0; a < grid.meters(); ++a) {
      const auto& ax = grid.axis(a);
      std::vector<Complex> line(static_cast<std::size_t>(ax.points));
      for (int l = 0; l < ax.points; ++l) {
        line[static_cast<std::size_t>(l)] = std::polar(1.0, -k.offsets[static_cast<std::size_t>(a)] * ax.lambda(l));
      }
      per_axis.push_back(std::move(line));
    }
    return separable(per_axis);
  }

  Eigen::VectorXcd operator()(const QuadraticPhaseKernel& k) const {
    require_meter_count(k.b.size(), grid, "quadratic phase kernel");
    std::vector<std::vector<Complex>> per_axis;
    for (int a = 0; a < grid.meters(); ++a) {
      const auto& ax = grid.axis(a);
      std::vector<Complex> line(static_cast<std::size_t>(ax.points));
      for (int l = 0; l < ax.points; ++l) {
        const double lam = ax.lambda(l);
        line[static_cast<std::size_t>(l)] = std::polar(1.0, -k.b[static_cast<std::size_t>(a)] * lam * lam);
      }
      per_axis.push_back(std::move(line));
    }
    return separable(per_axis);
  }

  Eigen::VectorXcd operator()(const SampledKernel& k) const {
    if (static_cast<std::size_t>(k.values.size()) != grid.size()) {
      throw Error(ErrorCode::GridMismatch, "sampled kernel size does not match the grid");
    }
    Eigen::MatrixXcd work = k.values.transpose();
    for (int a = 0; a < grid.meters(); ++a) {
      for_each_line(grid, a, work, [&](std::span<Complex> line) { symbol_axis(grid.axis(a), line); });
    }
    return work.transpose();
  }
};

}  // namespace

Eigen::VectorXcd kernel_symbol(const CoarseGrainKernel& kernel, const LambdaGrid& grid) {
  return std::visit(SymbolVisitor{grid}, kernel);
}

double kernel_mass(const CoarseGrainKernel& kernel, const LambdaGrid& grid) {
  double scale = 1.0;
  for (const auto& ax : grid.axes()) scale *= ax.dlambda / kTwoPi;
  return kernel_symbol(kernel, grid).squaredNorm() * scale;
}

AmplitudeField coarse_grain(const AmplitudeField& field, const CoarseGrainKernel& kernel) {
  const Eigen::VectorXcd symbol = kernel_symbol(kernel, field.grid);
  Eigen::MatrixXcd lambda_states = lambda_states_from_field(field);
  for (Eigen::Index p = 0; p < lambda_states.cols(); ++p) lambda_states.col(p) *= symbol(p);
  return field_from_lambda_states(field.grid, std::move(lambda_states), FieldKind::Coarse);
}

CoarseGrainKernel resolution_rescale(const CoarseGrainKernel& kernel, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
  const auto* g = std::get_if<GaussianKernel>(&kernel);
  if (!g) throw Error(ErrorCode::InvalidArgument, "resolution rescaling applies to gaussian kernels");
  GaussianKernel out = *g;
  for (double& w : out.widths) w /= alpha;
  return out;
}

ProbabilityTable probabilities(const AmplitudeField& field) {
  if (field.kind == FieldKind::Fine) {
    throw Error(ErrorCode::FineFieldNotNormalizable,
                "coarse-grain the field with a square-integrable kernel first");
  }
  return ProbabilityTable{field.grid, field.states.colwise().squaredNorm().transpose(),
                          field.grid.cell()};
}

double fourier_consistency_check(const AmplitudeField& field, const HermitianOperator& h,
                                 const HermitianOperator& a, const TimeGrid& grid,
                                 const std::vector<SwitchingFunction>& betas,
                                 const StateVector& psi0) {
  const PathFunctionalSpec spec(grid, betas);
  require_meter_count(static_cast<std::size_t>(spec.meters()), field.grid, "meter set");
  const Eigen::MatrixXcd lambda_states = lambda_states_from_field(field);
  std::vector<double> residual(field.grid.size(), 0.0);
  parallel_for(field.grid.size(), [&](std::size_t p) {
    const auto lambdas = field.grid.lambdas(p);
    std::vector<double> profile(static_cast<std::size_t>(grid.slices()), 0.0);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      for (std::size_t j = 0; j < profile.size(); ++j) profile[j] += lambdas[i] * spec.weights()[i][j];
    }
    const StateVector direct = evolve_with_coupling(h, a, grid, profile, psi0);
    residual[p] = (lambda_states.col(static_cast<Eigen::Index>(p)) - direct).norm();
  });
  double worst = 0.0;
  for (double r : residual) worst = std::max(worst, r);
  return worst;
}

}  // namespace qhist
