#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qhist/dft.hpp"
#include "qhist/meters.hpp"

using namespace qhist;

namespace {

constexpr double kPi = std::numbers::pi;

struct QubitSetup {
  HermitianOperator h = HermitianOperator::qubit(0.0, 1.0, 0.5);
  HermitianOperator a = HermitianOperator::diagonal(std::vector<double>{1.0, 2.0});
  StateVector psi0 = (StateVector(2) << 0.6, Complex(0.0, 0.8)).finished();
  TimeGrid grid{1.0, 10};
};

Eigen::MatrixXcd random_states(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = {g(rng), g(rng)};
  return m;
}

}  // namespace

TEST_CASE("fft matches the naive DFT in both directions") {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int n : {2, 8, 64, 256}) {
    std::vector<Complex> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = {g(rng), g(rng)};
    for (int sign : {-1, 1}) {
      auto y = x;
      dft::transform(y, sign < 0 ? dft::Direction::Forward : dft::Direction::Backward);
      const auto ref = oracle::naive_dft(x, sign);
      double worst = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - ref[i]));
      CHECK(worst < 1e-11);
    }
  }
}

TEST_CASE("axis geometry") {
  const auto ax = LambdaAxis::centered(64, 0.1, 1.5);
  CHECK(ax.df() == doctest::Approx(0.1));
  CHECK(ax.f(32) == doctest::Approx(1.5));
  CHECK(ax.nearest_node(1.52) == 32);
  CHECK(ax.nearest_node(-10.0) == -1);
  CHECK(ax.lambda(32) == 0.0);
  CHECK_THROWS_AS(LambdaGrid({LambdaAxis{12, 1.0, 0.0}}), Error);
}

TEST_CASE("lambda to readout transform matches its defining sum") {
  const LambdaGrid grid({LambdaAxis{16, 0.7, -2.3}, LambdaAxis{8, 1.1, 0.4}});
  const Eigen::MatrixXcd lam = random_states(2, Eigen::Index(grid.size()), 5);
  const AmplitudeField field = field_from_lambda_states(grid, lam, FieldKind::Fine);
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto f = grid.readouts(p);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(2);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      const auto l = grid.lambdas(q);
      acc += std::polar(1.0, l[0] * f[0] + l[1] * f[1]) * lam.col(Eigen::Index(q));
    }
    acc *= 0.7 * 1.1 / (4.0 * kPi * kPi);
    worst = std::max(worst, (acc - field.states.col(Eigen::Index(p))).norm());
  }
  CHECK(worst < 1e-13);
  CHECK((lambda_states_from_field(field) - lam).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("lambda evolution matches dense exponentials") {
  QubitSetup q;
  const LambdaEvolver ev(q.h, q.a, q.grid, {ConstantCoupling{1.0}});
  for (double lambda : {-3.0, 0.0, 0.7, 12.0}) {
    const std::vector<double> c(10, lambda * 0.1);
    const StateVector ref = oracle::coupled_evolution(q.h.matrix(), q.a.matrix(), 0.1, c, q.psi0);
    CHECK((ev.evolve(std::span<const double>(&lambda, 1), q.psi0) - ref).norm() < 1e-13);
    CHECK((evolve_with_coupling(q.h, q.a, q.grid, c, q.psi0) - ref).norm() < 1e-13);
  }
}

TEST_CASE("fine field agrees with binned path sums at every node") {
  QubitSetup q;
  const LambdaGrid lgrid({LambdaAxis::centered(256, 0.01, 1.5)});
  const auto field = amplitude_field(q.h, q.a, q.grid, {ConstantCoupling{1.0}}, lgrid, q.psi0);
  const auto bins = binned_measurement_amplitude(q.h, spectral_decompose(q.a), q.grid, q.psi0,
                                                 PathFunctionalSpec(q.grid, {ConstantCoupling{1.0}}));
  CHECK(field_vs_bins_residual(field, bins) < 1e-10);
  CHECK((field.marginal() - exact_propagator(q.h, 1.0) * q.psi0).norm() < 1e-12);
  CHECK(fourier_consistency_check(field, q.h, q.a, q.grid, {ConstantCoupling{1.0}}, q.psi0) < 1e-10);
}

TEST_CASE("two meters: joint field agrees with joint bins") {
  QubitSetup q;
  const TimeGrid g(1.0, 4);
  const std::vector<SwitchingFunction> betas{ConstantCoupling{1.0}, Impulse{0.9}};
  const LambdaGrid lgrid({LambdaAxis::centered(32, 0.125, 1.5), LambdaAxis::centered(64, 0.125, 1.5)});
  const auto field = amplitude_field(q.h, q.a, g, betas, lgrid, q.psi0);
  const auto bins = binned_measurement_amplitude(q.h, spectral_decompose(q.a), g, q.psi0,
                                                 PathFunctionalSpec(g, betas));
  CHECK(field_vs_bins_residual(field, bins) < 1e-12);
  CHECK((field.marginal() - exact_propagator(q.h, 1.0) * q.psi0).norm() < 1e-12);
}

TEST_CASE("grid validation") {
  QubitSetup q;
  const auto call = [&](const LambdaAxis& ax) {
    return amplitude_field(q.h, q.a, q.grid, {ConstantCoupling{1.0}}, LambdaGrid({ax}), q.psi0);
  };
  try {
    call(LambdaAxis{16, 200.0, 0.0});
    FAIL("expected NyquistViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NyquistViolation);
  }
  try {
    call(LambdaAxis::centered(64, 0.01, 1.5));
    FAIL("expected GridTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooSmall);
  }
}

TEST_CASE("kernel symbol and mass match direct sums") {
  const LambdaGrid grid({LambdaAxis::centered(128, 0.05, 0.0)});
  const auto& ax = grid.axis(0);
  const GaussianKernel g{{0.3}};
  const auto symbol = kernel_symbol(g, grid);
  double worst = 0.0, mass = 0.0;
  for (int l = 0; l < ax.points; ++l) {
    Complex acc = 0.0;
    for (int s = -ax.points / 2; s < ax.points / 2; ++s) {
      const double d = s * ax.df();
      acc += std::exp(-d * d / 0.09) * std::polar(1.0, -ax.lambda(l) * d) * ax.df();
      if (l == 0) mass += std::exp(-2.0 * d * d / 0.09) * ax.df();
    }
    worst = std::max(worst, std::abs(acc - symbol(l)));
  }
  CHECK(worst < 1e-13);
  CHECK(kernel_mass(g, grid) == doctest::Approx(mass).epsilon(1e-12));
  CHECK(mass == doctest::Approx(0.3 * std::sqrt(kPi / 2.0)).epsilon(1e-10));
}

TEST_CASE("coarse graining is a circular convolution") {
  const LambdaGrid grid({LambdaAxis::centered(32, 0.2, 0.0)});
  const auto& ax = grid.axis(0);
  const AmplitudeField fine{grid, random_states(2, 32, 9), FieldKind::Fine};
  const GaussianKernel g{{0.5}};
  const auto coarse = coarse_grain(fine, g);
  CHECK(coarse.kind == FieldKind::Coarse);
  double worst = 0.0;
  for (int m = 0; m < 32; ++m) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(2);
    for (int mp = 0; mp < 32; ++mp) {
      int s = ((m - mp) % 32 + 32) % 32;
      const double d = (s < 16 ? s : s - 32) * ax.df();
      acc += std::exp(-d * d / 0.25) * fine.states.col(mp) * ax.df();
    }
    worst = std::max(worst, (acc - coarse.states.col(m)).norm());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("shift kernel translates the field by whole nodes") {
  const LambdaGrid grid({LambdaAxis::centered(32, 0.25, 0.0)});
  const AmplitudeField fine{grid, random_states(1, 32, 4), FieldKind::Fine};
  const auto shifted = coarse_grain(fine, ShiftKernel{{0.75}});
  for (int m = 0; m < 32; ++m) {
    CHECK(std::abs(shifted.states(0, (m + 3) % 32) - fine.states(0, m)) < 1e-13);
  }
}

TEST_CASE("probability normalization and fine-field rejection") {
  QubitSetup q;
  const LambdaGrid lgrid({LambdaAxis::centered(256, 0.01, 1.5)});
  const auto field = amplitude_field(q.h, q.a, q.grid, {ConstantCoupling{1.0}}, lgrid, q.psi0);
  CHECK_THROWS_AS(probabilities(field), Error);
  const GaussianKernel g{{0.05}};
  const auto probs = probabilities(coarse_grain(field, g));
  CHECK(std::abs(probs.total_mass() - kernel_mass(g, lgrid) * q.psi0.squaredNorm()) < 1e-12);
  CHECK_THROWS_AS(resolution_rescale(g, 0.0), Error);
  CHECK(std::get<GaussianKernel>(resolution_rescale(g, 2.0)).widths[0] == doctest::Approx(0.025));
}
