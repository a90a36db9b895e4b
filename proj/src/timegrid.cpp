#include "qhist/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qhist {

TimeGrid::TimeGrid(double duration, int slices) : duration_(duration), slices_(slices) {
  if (slices < 1) throw Error(ErrorCode::InvalidArgument, "time grid needs N >= 1");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::InvalidArgument, "time grid needs a finite T > 0");
  }
}

namespace {

struct WeightVisitor {
  const TimeGrid& grid;

  std::vector<double> operator()(const Impulse& impulse) const {
    const double T = grid.duration();
    if (!(impulse.t0 >= 0.0 && impulse.t0 <= T)) {
      throw Error(ErrorCode::ImpulseOutOfRange,
                  "t0 = " + std::to_string(impulse.t0) + " outside [0, " + std::to_string(T) + "]");
    }
    const int n = grid.slices();
    int slice = static_cast<int>(std::floor(impulse.t0 * n / T));
    slice = std::clamp(slice, 0, n - 1);
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w[static_cast<std::size_t>(slice)] = 1.0;
    return w;
  }

  std::vector<double> operator()(const ConstantCoupling& constant) const {
    return std::vector<double>(static_cast<std::size_t>(grid.slices()), constant.c * grid.step());
  }

  std::vector<double> operator()(const SampledCoupling& sampled) const {
    if (sampled.values.size() != static_cast<std::size_t>(grid.slices())) {
      throw Error(ErrorCode::LengthMismatch, "sampled switching function has " +
                                                 std::to_string(sampled.values.size()) +
                                                 " values for " + std::to_string(grid.slices()) +
                                                 " slices");
    }
    std::vector<double> w(sampled.values);
    for (double& x : w) x *= grid.step();
    return w;
  }
};

}  // namespace

std::vector<double> slice_weights(const SwitchingFunction& beta, const TimeGrid& grid) {
  return std::visit(WeightVisitor{grid}, beta);
}

double coupling_integral(const SwitchingFunction& beta, const TimeGrid& grid) {
  double sum = 0.0;
  for (double w : slice_weights(beta, grid)) sum += w;
  return sum;
}

double coupling_square_integral(const SwitchingFunction& beta, const TimeGrid& grid) {
  if (std::holds_alternative<Impulse>(beta)) {
    throw Error(ErrorCode::ImpulseNotSquareIntegrable, "integral of delta(t)^2 is undefined");
  }
  double sum = 0.0;
  for (double w : slice_weights(beta, grid)) sum += w * w;
  return sum / grid.step();
}

SwitchingFunction scaled(const SwitchingFunction& beta, double factor) {
  if (const auto* c = std::get_if<ConstantCoupling>(&beta)) return ConstantCoupling{c->c * factor};
  if (const auto* s = std::get_if<SampledCoupling>(&beta)) {
    SampledCoupling out = *s;
    for (double& v : out.values) v *= factor;
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "impulse couplings cannot be rescaled");
}

PathFunctionalSpec::PathFunctionalSpec(TimeGrid grid, std::vector<SwitchingFunction> betas)
    : grid_(grid), betas_(std::move(betas)) {
  if (betas_.empty()) throw Error(ErrorCode::InvalidArgument, "at least one meter is required");
  weights_.reserve(betas_.size());
  for (const auto& beta : betas_) {
    weights_.push_back(slice_weights(beta, grid_));
    for (double w : weights_.back()) max_weight_ = std::max(max_weight_, std::abs(w));
  }
  if (max_weight_ == 0.0) max_weight_ = grid_.step();
}

std::pair<double, double> PathFunctionalSpec::functional_range(int meter,
                                                               const RealVector& spectrum) const {
  const double lo = spectrum.minCoeff();
  const double hi = spectrum.maxCoeff();
  double fmin = 0.0;
  double fmax = 0.0;
  for (double w : weights_.at(static_cast<std::size_t>(meter))) {
    fmin += std::min(w * lo, w * hi);
    fmax += std::max(w * lo, w * hi);
  }
  return {fmin, fmax};
}

int EigenPath::jump_count() const {
  int jumps = 0;
  for (std::size_t j = 1; j < indices.size(); ++j) jumps += indices[j] != indices[j - 1];
  return jumps;
}

std::vector<double> functional_value(const PathFunctionalSpec& spec, const EigenPath& path,
                                     const SpectralDecomposition& decomp) {
  if (path.indices.size() != static_cast<std::size_t>(spec.grid().slices())) {
    throw Error(ErrorCode::LengthMismatch, "path length " + std::to_string(path.indices.size()) +
                                               " does not match N = " +
                                               std::to_string(spec.grid().slices()));
  }
  std::vector<double> out;
  out.reserve(spec.weights().size());
  for (const auto& w : spec.weights()) {
    double f = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const int k = path.indices[j];
      if (k < 0 || k >= decomp.dim()) throw Error(ErrorCode::InvalidArgument, "eigen-index out of range");
      f += w[j] * decomp.eigenvalues(k);
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace qhist
