#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qhist/compensated.hpp"
#include "qhist/hilbert.hpp"

using namespace qhist;

namespace {

HermitianOperator random_hermitian(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Operator m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = {g(rng), g(rng)};
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

}  // namespace

TEST_CASE("hermiticity is enforced") {
  Operator m(2, 2);
  m << 1.0, 0.5, 0.4, 2.0;
  CHECK_THROWS_AS(HermitianOperator{m}, Error);
  try {
    HermitianOperator bad{m};
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
  }
  CHECK_NOTHROW(HermitianOperator::qubit(0.0, 1.0, {0.5, 0.25}));
}

TEST_CASE("spectral decomposition reconstructs the operator") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto h = random_hermitian(4, seed);
    const auto d = spectral_decompose(h);
    CHECK(max_abs(d.reconstruct() - h.matrix()) < 1e-12);
    CHECK(unitarity_residual(d.eigenvectors) < 1e-12);
    for (Eigen::Index k = 1; k < d.dim(); ++k) CHECK(d.eigenvalues(k) > d.eigenvalues(k - 1));
    CHECK_FALSE(d.degenerate);
  }
}

TEST_CASE("eigenvector phase rule makes the dominant component real positive") {
  const auto d = spectral_decompose(random_hermitian(3, 11));
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::Index top = 0;
    d.eigenvectors.col(k).cwiseAbs().maxCoeff(&top);
    CHECK(std::abs(d.eigenvectors(top, k).imag()) < 1e-14);
    CHECK(d.eigenvectors(top, k).real() > 0.0);
  }
}

TEST_CASE("degenerate spectra are flagged and rejected on demand") {
  const std::vector<double> v{1.0, 1.0, 3.0};
  const auto d = spectral_decompose(HermitianOperator::diagonal(v));
  CHECK(d.degenerate);
  CHECK_THROWS_AS(d.require_nondegenerate(), Error);
}

TEST_CASE("exact propagator agrees with a Taylor oracle") {
  const auto h = random_hermitian(3, 21);
  for (double t : {0.0, 0.1, 1.0, 7.5}) {
    CHECK(max_abs(exact_propagator(h, t) - oracle::propagator(h.matrix(), t)) < 1e-12);
  }
  CHECK_THROWS_AS(exact_propagator(h, -1.0), Error);
}

TEST_CASE("first-order Trotter error decays as 1/N") {
  const std::vector<double> e{0.0, 1.0};
  const auto h0 = HermitianOperator::diagonal(e);
  const auto v = HermitianOperator::qubit(0.0, 0.0, 0.5);
  const Operator exact = exact_propagator(h0 + v, 1.0);
  const double e1 = max_abs(trotter_propagator(h0, v, 1.0, 50) - exact);
  const double e2 = max_abs(trotter_propagator(h0, v, 1.0, 100) - exact);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
  const double s1 = max_abs(trotter_propagator(h0, v, 1.0, 50, Splitting::Symmetric) - exact);
  const double s2 = max_abs(trotter_propagator(h0, v, 1.0, 100, Splitting::Symmetric) - exact);
  CHECK(s1 / s2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("compensated sum recovers cancelled digits") {
  CompensatedSum acc(1);
  Eigen::VectorXcd x(1);
  x(0) = {1e16, 0.0};
  acc.add(x);
  for (int i = 0; i < 1000; ++i) acc.add(0, {1.0, 0.0});
  acc.add(0, {-1e16, 0.0});
  CHECK(acc.value()(0).real() == 1000.0);
}
