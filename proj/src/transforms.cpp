#include "qhist/transforms.hpp"

#include <cmath>
#include <numbers>

#include "qhist/compensated.hpp"
#include "qhist/parallel.hpp"

namespace qhist {

namespace {

// Sliced evolution operator with coupling lambda * w_j * Z per slice.
Operator coupled_evolution(const Operator& step, const SpectralDecomposition& z,
                           const std::vector<double>& weights, double lambda) {
  const Eigen::Index dim = step.rows();
  Operator u = Operator::Identity(dim, dim);
  Eigen::VectorXcd phases(dim);
  for (double w : weights) {
    for (Eigen::Index k = 0; k < dim; ++k) phases(k) = std::polar(1.0, -lambda * w * z.eigenvalues(k));
    u = z.eigenvectors * phases.asDiagonal() * z.eigenvectors.adjoint() * step * u;
  }
  return u;
}

}  // namespace

const Operator& OperatorKernel::at_offset(int shift) const {
  const int n = axis.points;
  const int s = ((shift % n) + n) % n;
  return samples[static_cast<std::size_t>(s)];
}

OperatorKernel finite_time_kernel(const HermitianOperator& h, const HermitianOperator& a,
                                  const HermitianOperator& b, const TimeGrid& grid,
                                  const SwitchingFunction& beta_a,
                                  const SwitchingFunction& beta_b, const LambdaAxis& axis) {
  require_same_dim(h.dim(), a.dim(), "H vs A");
  require_same_dim(h.dim(), b.dim(), "H vs B");
  const LambdaGrid lgrid({axis});
  const PathFunctionalSpec spec_a(grid, {beta_a});
  const PathFunctionalSpec spec_b(grid, {beta_b});
  const auto decomp_a = spectral_decompose(a);
  const auto decomp_b = spectral_decompose(b);
  validate_lambda_grid(spec_a, decomp_a.eigenvalues, lgrid);
  validate_lambda_grid(spec_b, decomp_b.eigenvalues, lgrid);

  const Operator step = exact_propagator(h, grid.step());
  const auto n = static_cast<std::size_t>(axis.points);
  std::vector<Operator> in_lambda(n);
  parallel_for(n, [&](std::size_t l) {
    const double lambda = axis.lambda(static_cast<int>(l));
    in_lambda[l] = coupled_evolution(step, decomp_b, spec_b.weights()[0], lambda) *
                   coupled_evolution(step, decomp_a, spec_a.weights()[0], lambda).adjoint();
  });

  // Reuse the scalar lambda -> f transform on the flattened matrix entries.
  const Eigen::Index dim = h.dim();
  Eigen::MatrixXcd entries(dim * dim, static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l < n; ++l) {
    entries.col(static_cast<Eigen::Index>(l)) = in_lambda[l].reshaped();
  }
  // Differences live on a lattice anchored at zero.
  const LambdaGrid diff_grid({LambdaAxis{axis.points, axis.dlambda, 0.0}});
  const AmplitudeField field = field_from_lambda_states(diff_grid, std::move(entries), FieldKind::Fine);

  OperatorKernel kernel{axis, std::vector<Operator>(n)};
  for (std::size_t s = 0; s < n; ++s) {
    kernel.samples[s] = field.states.col(static_cast<Eigen::Index>(s)).reshaped(dim, dim);
  }
  return kernel;
}

AmplitudeField apply_kernel(const OperatorKernel& kernel, const AmplitudeField& field) {
  if (field.grid.meters() != 1 || !(field.grid.axis(0) == kernel.axis)) {
    throw Error(ErrorCode::GridMismatch, "kernel and field must share one readout axis");
  }
  const int n = kernel.axis.points;
  const double df = kernel.axis.df();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(field.states.rows(), field.states.cols());
  require_same_dim(kernel.samples.front().cols(), field.states.rows(), "kernel vs field");
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t mi) {
    const int m = static_cast<int>(mi);
    CompensatedSum acc(field.states.rows());
    for (int mp = 0; mp < n; ++mp) {
      acc.add(kernel.at_offset(m - mp) * field.states.col(mp) * df);
    }
    out.col(m) = acc.value();
  });
  return AmplitudeField{field.grid, std::move(out), field.kind};
}

double kernel_unitarity_residual(const OperatorKernel& kernel) {
  // The product depends on f - f' only, so fixing f = f_0 covers every pair.
  const int n = kernel.axis.points;
  const double df = kernel.axis.df();
  const Eigen::Index dim = kernel.samples.front().rows();
  double worst = 0.0;
  for (int mp = 0; mp < n; ++mp) {
    Operator acc = Operator::Zero(dim, dim);
    for (int mpp = 0; mpp < n; ++mpp) {
      acc += kernel.at_offset(mpp).adjoint() * kernel.at_offset(mpp - mp) * df;
    }
    if (mp == 0) acc -= Operator::Identity(dim, dim) / df;
    worst = std::max(worst, max_abs(acc) * df);
  }
  return worst;
}

BasisChange von_neumann_basis_change(const StateVector& psi, const SpectralDecomposition& a,
                                     const SpectralDecomposition& b) {
  require_same_dim(psi.size(), a.dim(), "psi vs A");
  require_same_dim(a.dim(), b.dim(), "A vs B");
  const Eigen::VectorXcd in_a = a.eigenvectors.adjoint() * psi;        // <a|psi>
  const Operator overlap = b.eigenvectors.adjoint() * a.eigenvectors;  // <b|a>
  BasisChange out;
  out.amplitudes = overlap * in_a;
  const Eigen::VectorXcd direct = b.eigenvectors.adjoint() * psi;
  out.residual = (out.amplitudes - direct).cwiseAbs().maxCoeff();
  return out;
}

double completeness_identity_check(const HermitianOperator& h, const SpectralDecomposition& a,
                                   const TimeGrid& grid, std::uint64_t cap) {
  require_same_dim(h.dim(), a.dim(), "H vs A");
  a.require_nondegenerate();
  const int dim = static_cast<int>(a.dim());
  const int n = grid.slices();
  eigenpath_count(dim, n, cap);
  const Operator step = exact_propagator(h, grid.step());
  std::vector<Operator> projected;
  for (int k = 0; k < dim; ++k) projected.push_back(a.projector(k) * step);

  // Depth-first over paths with prefix operator products.
  std::vector<Operator> prefix(static_cast<std::size_t>(n));
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Operator sum = Operator::Zero(dim, dim);
  auto settle = [&](int d) {
    const auto j = static_cast<std::size_t>(d);
    prefix[j] = d == 0 ? projected[static_cast<std::size_t>(idx[0])]
                       : Operator(projected[static_cast<std::size_t>(idx[j])] * prefix[j - 1]);
  };
  int depth = 0;
  settle(0);
  for (;;) {
    if (depth == n - 1) {
      const auto& u = prefix[static_cast<std::size_t>(depth)];
      sum += u.adjoint() * u;
      while (depth >= 0 && ++idx[static_cast<std::size_t>(depth)] == dim) {
        idx[static_cast<std::size_t>(depth)] = 0;
        --depth;
      }
      if (depth < 0) break;
      settle(depth);
    } else {
      ++depth;
      idx[static_cast<std::size_t>(depth)] = 0;
      settle(depth);
    }
  }
  return max_abs(sum - Operator::Identity(dim, dim));
}

}  // namespace qhist
