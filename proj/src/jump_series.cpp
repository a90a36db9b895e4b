#include <string>
#include <vector>

#include "qhist/pathsum.hpp"

namespace qhist {

namespace {

// Iterated trapezoid rule on the ordered simplex.  With I_0(t) = e^{-iKt} and
// I_m(t) = -i int_0^t e^{-iK(t-s)} V I_{m-1}(s) ds, the n-th term is I_n(T);
// each level reuses the previous level on the same node set, so the cost is
// O(n * nq^2) instead of a filtered nq^n product grid.
Operator iterated_trapezoid(const Operator& generator, const Operator& v, double duration, int n,
                            int nq) {
  const Eigen::Index dim = generator.rows();
  const double h = duration / (nq - 1);
  const HermitianOperator gen(generator);
  std::vector<Operator> shift(static_cast<std::size_t>(nq));
  for (int d = 0; d < nq; ++d) shift[static_cast<std::size_t>(d)] = exact_propagator(gen, d * h);

  std::vector<Operator> level(shift);
  for (int m = 1; m <= n; ++m) {
    std::vector<Operator> next(static_cast<std::size_t>(nq), Operator::Zero(dim, dim));
    std::vector<Operator> vi(static_cast<std::size_t>(nq));
    for (int s = 0; s < nq; ++s) vi[static_cast<std::size_t>(s)] = v * level[static_cast<std::size_t>(s)];
    for (int t = 1; t < nq; ++t) {
      Operator acc = Operator::Zero(dim, dim);
      for (int s = 0; s <= t; ++s) {
        const double w = (s == 0 || s == t) ? 0.5 : 1.0;
        acc.noalias() += w * shift[static_cast<std::size_t>(t - s)] * vi[static_cast<std::size_t>(s)];
      }
      next[static_cast<std::size_t>(t)] = Complex(0.0, -h) * acc;
    }
    level = std::move(next);
  }
  return level.back();
}

}  // namespace

Operator jump_series_term(const HermitianOperator& h0, const HermitianOperator& v,
                          double duration, int n, const JumpSeriesOptions& options) {
  require_same_dim(h0.dim(), v.dim(), "jump_series_term");
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "term order must be >= 0");
  if (!(duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be >= 0");
  if (options.quadrature_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "quadrature needs at least two nodes per axis");
  }
  const int coarse = options.quadrature_points;
  const int fine = options.richardson ? 2 * coarse - 1 : coarse;
  if (static_cast<long>(n) * fine > options.budget) {
    throw Error(ErrorCode::QuadratureBudgetExceeded,
                "n * n_q = " + std::to_string(static_cast<long>(n) * fine) + " exceeds budget " +
                    std::to_string(options.budget));
  }
  const Operator generator =
      options.full_hamiltonian_in_exponent ? Operator(h0.matrix() + v.matrix()) : h0.matrix();
  if (n == 0) return exact_propagator(HermitianOperator(generator), duration);

  const Operator rough = iterated_trapezoid(generator, v.matrix(), duration, n, coarse);
  if (!options.richardson) return rough;
  const Operator refined = iterated_trapezoid(generator, v.matrix(), duration, n, fine);
  return (4.0 * refined - rough) / 3.0;
}

}  // namespace qhist
