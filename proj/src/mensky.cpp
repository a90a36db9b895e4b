#include "qhist/mensky.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace qhist {

ReadoutRecord::ReadoutRecord(TimeGrid grid_, std::vector<double> phi_)
    : grid(grid_), phi(std::move(phi_)) {
  if (phi.size() != static_cast<std::size_t>(grid.slices())) {
    throw Error(ErrorCode::LengthMismatch, "record has " + std::to_string(phi.size()) +
                                               " samples for " + std::to_string(grid.slices()) +
                                               " slices");
  }
  for (double x : phi) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "record samples must be finite");
  }
}

ReadoutRecord ReadoutRecord::constant(const TimeGrid& grid, double value) {
  return ReadoutRecord(grid, std::vector<double>(static_cast<std::size_t>(grid.slices()), value));
}

MenskyConfig::MenskyConfig(double sigma_) : sigma(sigma_) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
}

StateVector record_evolve(const HermitianOperator& h, const HermitianOperator& a,
                          const ReadoutRecord& record, const MenskyConfig& cfg,
                          const StateVector& psi0) {
  require_same_dim(h.dim(), a.dim(), "H vs observable");
  require_same_dim(h.dim(), psi0.size(), "H vs psi0");
  const double eps = record.grid.step();
  const Operator step = exact_propagator(h, eps);
  const Operator identity = Operator::Identity(a.dim(), a.dim());
  StateVector state = psi0;
  for (double phi : record.phi) {
    const Operator offset = phi * identity - a.matrix();
    const Operator damping = (-(eps / (cfg.sigma * cfg.sigma)) * (offset * offset)).exp();
    state = damping * (step * state);
  }
  return state;
}

StateVector weak_meter_array(const HermitianOperator& h, const HermitianOperator& a,
                             const ReadoutRecord& record, double sigma, const StateVector& psi0) {
  require_same_dim(h.dim(), a.dim(), "H vs observable");
  require_same_dim(h.dim(), psi0.size(), "H vs psi0");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be > 0");
  const double eps = record.grid.step();
  const double width = sigma / std::sqrt(eps);
  const auto decomp = spectral_decompose(a);
  std::vector<Operator> projectors;
  for (Eigen::Index k = 0; k < decomp.dim(); ++k) projectors.push_back(decomp.projector(k));
  const Operator step = exact_propagator(h, eps);

  StateVector state = psi0;
  for (double phi : record.phi) {
    const StateVector moved = step * state;
    // Fine pointer amplitude of an impulse meter: weight P_k at f = a_k.
    // The Gaussian initial pointer state read at f = phi picks G(phi - a_k).
    StateVector next = StateVector::Zero(state.size());
    for (Eigen::Index k = 0; k < decomp.dim(); ++k) {
      const double d = (phi - decomp.eigenvalues(k)) / width;
      next += std::exp(-d * d) * (projectors[static_cast<std::size_t>(k)] * moved);
    }
    state = std::move(next);
  }
  return state;
}

std::vector<double> record_probability_scan(const HermitianOperator& h,
                                            const HermitianOperator& a, const MenskyConfig& cfg,
                                            const StateVector& psi0,
                                            const std::vector<ReadoutRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecordSet, "no records to scan");
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(record_evolve(h, a, r, cfg, psi0).squaredNorm());
  return out;
}

std::vector<double> weak_limit_check(const HermitianOperator& h, const HermitianOperator& a,
                                     const TimeGrid& grid, const SwitchingFunction& beta,
                                     const std::vector<double>& sigmas, const StateVector& psi0,
                                     const LambdaAxis& axis) {
  if (std::holds_alternative<Impulse>(beta)) {
    throw Error(ErrorCode::ImpulseNotSquareIntegrable,
                "the weak-limit factor needs a square-integrable switching function");
  }
  const LambdaEvolver evolver(h, a, grid, {beta});
  const auto& weights = evolver.spec().weights().front();
  const double eps = grid.step();

  std::vector<StateVector> bare;
  for (int l = 0; l < axis.points; ++l) {
    const double lambda = axis.lambda(l);
    bare.push_back(evolver.evolve(std::span<const double>(&lambda, 1), psi0));
  }

  std::vector<double> out;
  for (double sigma : sigmas) {
    if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
    double worst = 0.0;
    for (int l = 0; l < axis.points; ++l) {
      const double lambda = axis.lambda(l);
      double factor = 1.0;
      for (double w : weights) {
        const double local = lambda * w / eps;  // lambda beta(t_j)
        factor *= std::exp(-local * local * sigma * sigma * eps / 4.0);
      }
      const StateVector& b = bare[static_cast<std::size_t>(l)];
      worst = std::max(worst, (factor * b - b).norm());
    }
    out.push_back(worst);
  }
  return out;
}

}  // namespace qhist
