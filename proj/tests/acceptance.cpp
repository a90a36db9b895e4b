// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qhist/mensky.hpp"
#include "qhist/meters.hpp"
#include "qhist/particle1d.hpp"
#include "qhist/pathsum.hpp"
#include "qhist/transforms.hpp"

using namespace qhist;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Worst marginal-completeness residual over every fine field built below.
double g_marginal_worst = 0.0;
int g_fine_fields = 0;

void note_fine_field(const StateVector& marginal, const StateVector& expected, double measure = 1.0) {
  g_marginal_worst = std::max(g_marginal_worst, (marginal - expected).norm() * std::sqrt(measure));
  ++g_fine_fields;
}

const std::vector<double> kLevels{1.0, 2.0};

struct Qubit {
  HermitianOperator h0 = HermitianOperator::diagonal(std::vector<double>{0.0, 1.0});
  HermitianOperator v = HermitianOperator::qubit(0.0, 0.0, 0.5);
  HermitianOperator h = h0 + v;
  HermitianOperator a = HermitianOperator::diagonal(kLevels);
  StateVector psi0 = (StateVector(2) << 0.6, Complex(0.0, 0.8)).finished();
};

Outcome path_completeness() {
  Qubit q;
  const TimeGrid grid(1.0, 12);
  const auto t0 = std::chrono::steady_clock::now();
  const StateVector sum = path_sum_total(q.h, spectral_decompose(q.a), grid, q.psi0);
  const double t = seconds_since(t0);
  const double r = (sum - oracle::propagator(q.h.matrix(), 1.0) * q.psi0).norm();
  return {r <= 1e-12 && t < 1.0, "4096 paths, residual " + sci(r) + ", " + sci(t) + " s"};
}

const LambdaAxis kQubitAxis = LambdaAxis::centered(256, 1.0 / 120.0, 1.5);

AmplitudeField qubit_field(const Qubit& q, const TimeGrid& grid) {
  return amplitude_field(q.h, q.a, grid, {ConstantCoupling{1.0}}, LambdaGrid({kQubitAxis}), q.psi0);
}

Outcome dual_route() {
  Qubit q;
  const TimeGrid grid(1.0, 12);
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = qubit_field(q, grid);
  const auto bins = binned_measurement_amplitude(q.h, spectral_decompose(q.a), grid, q.psi0,
                                                 PathFunctionalSpec(grid, {ConstantCoupling{1.0}}));
  const double r = field_vs_bins_residual(field, bins);
  const double t = seconds_since(t0);
  note_fine_field(field.marginal(), exact_propagator(q.h, 1.0) * q.psi0);
  return {r <= 1e-10 && t < 5.0,
          std::to_string(bins.bins.size()) + " bins on 256 nodes, residual " + sci(r) + ", " + sci(t) + " s"};
}

Outcome normalization() {
  Qubit q;
  const TimeGrid grid(1.0, 12);
  const auto field = qubit_field(q, grid);
  note_fine_field(field.marginal(), exact_propagator(q.h, 1.0) * q.psi0);
  double worst = 0.0;
  for (double w : {0.02, 0.1, 0.3}) {
    const GaussianKernel g{{w}};
    const auto probs = probabilities(coarse_grain(field, g));
    worst = std::max(worst, std::abs(probs.total_mass() - kernel_mass(g, field.grid) * q.psi0.squaredNorm()));
  }
  return {worst <= 1e-6, "three Gaussian widths, worst " + sci(worst)};
}

Outcome born_rule() {
  const auto h = HermitianOperator::zero(2);
  const auto a = HermitianOperator::diagonal(kLevels);
  const StateVector psi0 = StateVector::Constant(2, Complex(1.0 / std::sqrt(2.0), 0.0));
  const TimeGrid grid(1.0, 4);
  const LambdaGrid lgrid({LambdaAxis::centered(512, 0.01, 1.5)});
  const auto field = amplitude_field(h, a, grid, {Impulse{0.5}}, lgrid, psi0);
  note_fine_field(field.marginal(), psi0);
  const GaussianKernel g{{0.1}};
  const auto probs = probabilities(coarse_grain(field, g));
  const double mass = kernel_mass(g, lgrid);
  double low = 0.0, high = 0.0;
  for (std::size_t p = 0; p < lgrid.size(); ++p) {
    (lgrid.axis(0).f(int(p)) < 1.5 ? low : high) += probs.w(Eigen::Index(p)) * probs.cell / mass;
  }
  const double r = std::max(std::abs(low - 0.5), std::abs(high - 0.5));
  return {r <= 1e-10, "masses " + std::to_string(low) + " / " + std::to_string(high) + ", deviation " + sci(r)};
}

Outcome perturbation_series() {
  Qubit q;
  Operator sum = Operator::Zero(2, 2);
  std::vector<Operator> terms;
  for (int n = 0; n <= 10; ++n) {
    terms.push_back(jump_series_term(q.h0, q.v, 1.0, n));
    sum += terms.back();
  }
  const double series = max_abs(sum - oracle::propagator(q.h.matrix(), 1.0));

  const StateVector psi0 = StateVector::Constant(2, Complex(1.0 / std::sqrt(2.0), 0.0));
  const auto decomp = spectral_decompose(q.a);
  auto errors = [&](int slices) {
    const auto classes = EigenpathSum(q.h, decomp, TimeGrid(1.0, slices), psi0, std::uint64_t{1} << 25).by_jumps();
    std::vector<double> err;
    for (int n = 0; n <= 5; ++n) err.push_back((classes.at(n) - terms[std::size_t(n)] * psi0).norm());
    return err;
  };
  const auto e12 = errors(12);
  const auto e24 = errors(24);
  bool ratios_ok = true;
  std::string detail = "series " + sci(series) + "; N 12->24 ratios";
  for (int n = 0; n <= 5; ++n) {
    const double ratio = e12[std::size_t(n)] / e24[std::size_t(n)];
    if (n <= 3) ratios_ok = ratios_ok && std::abs(ratio - 2.0) <= 0.3;
    char buf[48];
    std::snprintf(buf, sizeof buf, " n=%d:%.2f%s", n, ratio, n <= 3 ? "" : "(info)");
    detail += buf;
  }
  return {series <= 1e-6 && ratios_ok, detail};
}

Outcome mensky_closed_form() {
  const auto a = HermitianOperator::diagonal(kLevels);
  const StateVector psi0 = (StateVector(2) << 0.6, Complex(0.0, 0.8)).finished();
  const TimeGrid grid(1.0, 10);
  const double norm2 = record_evolve(HermitianOperator::zero(2), a, ReadoutRecord::constant(grid, 1.0),
                                     MenskyConfig(1.0), psi0).squaredNorm();
  const double closed = std::abs(norm2 - (0.36 + 0.64 * std::exp(-2.0)));

  Qubit q;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    std::vector<double> phi(10);
    for (auto& x : phi) x = u(rng);
    const ReadoutRecord rec(grid, phi);
    worst = std::max(worst, (record_evolve(q.h, a, rec, MenskyConfig(1.0), psi0) -
                             weak_meter_array(q.h, a, rec, 1.0, psi0)).cwiseAbs().maxCoeff());
  }
  return {closed <= 1e-12 && worst <= 1e-13,
          "closed form " + sci(closed) + ", 100 records worst " + sci(worst)};
}

Outcome weak_limit() {
  Qubit q;
  const auto r = weak_limit_check(q.h, q.a, TimeGrid(1.0, 20), ConstantCoupling{1.0}, {0.2, 0.1},
                                  q.psi0, LambdaAxis{2, 1.5, 0.0});
  const double ratio = r[0] / r[1];
  return {std::abs(ratio - 4.0) <= 0.6, "lambda = -1.5, sigma 0.2 -> 0.1, ratio " + std::to_string(ratio)};
}

Outcome fourier_consistency() {
  Qubit q;
  const TimeGrid grid(1.0, 12);
  const auto field = qubit_field(q, grid);
  note_fine_field(field.marginal(), exact_propagator(q.h, 1.0) * q.psi0);
  double r = fourier_consistency_check(field, q.h, q.a, grid, {ConstantCoupling{1.0}}, q.psi0);

  const TimeGrid g4(1.0, 4);
  const std::vector<SwitchingFunction> two{ConstantCoupling{1.0}, Impulse{0.6}};
  const LambdaGrid lg({LambdaAxis::centered(32, 0.125, 1.5), LambdaAxis::centered(32, 0.25, 1.5)});
  const auto joint = amplitude_field(q.h, q.a, g4, two, lg, q.psi0);
  note_fine_field(joint.marginal(), exact_propagator(q.h, 1.0) * q.psi0);
  r = std::max(r, fourier_consistency_check(joint, q.h, q.a, g4, two, q.psi0));
  return {r <= 1e-10, "one- and two-meter fields, worst " + sci(r)};
}

Outcome transform_kernel() {
  Qubit q;
  const auto b = HermitianOperator::qubit(0.0, 0.0, 1.0);
  const TimeGrid grid(1.0, 6);
  const LambdaAxis axis = LambdaAxis::centered(256, 0.0625, 0.0);
  const LambdaGrid lgrid({axis});
  const auto kernel = finite_time_kernel(q.h, q.a, b, grid, ConstantCoupling{1.0}, ConstantCoupling{1.0}, axis);
  const auto fa = amplitude_field(q.h, q.a, grid, {ConstantCoupling{1.0}}, lgrid, q.psi0);
  const auto fb = amplitude_field(q.h, b, grid, {ConstantCoupling{1.0}}, lgrid, q.psi0);
  const StateVector exact = exact_propagator(q.h, 1.0) * q.psi0;
  note_fine_field(fa.marginal(), exact);
  note_fine_field(fb.marginal(), exact);
  const auto mapped = apply_kernel(kernel, fa);
  const double direct = (mapped.states - fb.states).colwise().norm().maxCoeff() * axis.df();
  const double complete = completeness_identity_check(q.h, spectral_decompose(q.a), grid);
  const double basis =
      von_neumann_basis_change(q.psi0, spectral_decompose(q.a), spectral_decompose(b)).residual;
  return {direct <= 1e-8 && complete <= 1e-12 && basis <= 1e-12,
          "kernel vs direct " + sci(direct) + ", completeness " + sci(complete) + ", basis change " + sci(basis)};
}

Outcome function_binning() {
  const auto a = HermitianOperator::diagonal(std::vector<double>{1.0, 2.0, 3.0});
  const auto decomp = spectral_decompose(a);
  Operator hm(3, 3);
  hm << 0.0, 0.4, Complex(0.0, 0.2),
        0.4, 1.0, 0.3,
        Complex(0.0, -0.2), 0.3, 2.5;
  const HermitianOperator h(hm);
  const StateVector psi0 = (StateVector(3) << 0.5, Complex(0.5, 0.5), -0.5).finished();
  auto fn = [](double x) { return (x - 2.0) * (x - 2.0); };  // F = 1, 0, 1

  // Impulse meter: F bins are coherent sums of A bins.
  const TimeGrid grid(1.0, 4);
  const PathFunctionalSpec impulse(grid, {Impulse{0.6}});
  const EigenpathSum sum(h, decomp, grid, psi0);
  const auto abins = sum.binned(impulse);
  const auto fbins = sum.binned(impulse, fn);
  auto at = [](const BinnedAmplitudes& b, double f) { return b.find(std::span<const double>(&f, 1))->state; };
  double r = std::max((at(fbins, 1.0) - at(abins, 1.0) - at(abins, 3.0)).norm(),
                      (at(fbins, 0.0) - at(abins, 2.0)).norm());

  // Finite-time meter: against regrouping of materialized paths.
  const PathFunctionalSpec finite(grid, {ConstantCoupling{1.0}});
  const auto paths = sum.materialize();
  const auto relabeled = relabel_by_function(paths, decomp, finite, fn);
  std::map<long long, StateVector> groups;
  for (const auto& p : paths) {
    double f = 0.0;
    for (int j = 0; j < 4; ++j) f += 0.25 * fn(decomp.eigenvalues(p.path.indices[std::size_t(j)]));
    auto [it, fresh] = groups.try_emplace(std::llround(f / finite.bin_tol()), StateVector::Zero(3));
    it->second += p.state;
  }
  for (const auto& [key, bin] : relabeled.bins) r = std::max(r, (bin.state - groups.at(key[0])).norm());

  const auto constant = sum.binned(finite, [](double) { return 7.0; });
  const bool single = constant.bins.size() == 1;
  const double exact = single ? (constant.bins.begin()->second.state - sum.total()).norm() : 1.0;
  return {r <= 1e-12 && single && exact == 0.0,
          "F bins vs A bins / regrouping " + sci(r) + ", constant F single bin deviation " + sci(exact)};
}

double outside_fraction(const AmplitudeField& field, double dx, double lo, double hi) {
  const auto& ax = field.grid.axis(0);
  double out = 0.0, total = 0.0;
  for (int m = 0; m < ax.points; ++m) {
    const double w = field.states.col(m).squaredNorm() * dx * ax.df();
    total += w;
    if (ax.f(m) < lo || ax.f(m) > hi) out += w;
  }
  return out / total;
}

Outcome particle() {
  const auto t0 = std::chrono::steady_clock::now();
  const XGrid xg(-64.0, 0.25, 512);
  const auto psi0 = gaussian_packet(xg, -10.0, 2.0, 2.0, 1.0);
  const RealVector v = RealVector::Zero(512);
  const TimeGrid grid(10.0, 256);
  const auto cf = CoordinateFunctional::indicator(xg, -2.0, 2.0, ConstantCoupling{0.1});
  const LambdaAxis axis{128, 2.0 * std::numbers::pi / (128.0 / 64.0), -0.5};  // df = 1/64

  const auto plain = split_step_evolve(psi0, v, grid, 0.0, cf);
  const double drift = std::abs(plain.norm_squared() - psi0.norm_squared());
  const auto field = coordinate_amplitude_field(psi0, v, grid, cf, axis);
  const double sum_rule = (field.marginal() - plain.values).norm() * std::sqrt(xg.dx);
  note_fine_field(field.marginal(), plain.values, xg.dx);
  const double delta = 2.0 * axis.df();
  const double outside = outside_fraction(field, xg.dx, -delta, 1.0 + delta);

  const XGrid tiny(-2.0, 1.0, 4);
  const auto tpsi = gaussian_packet(tiny, 0.0, 1.0, 0.5, 1.0);
  const RealVector tv = RealVector::Zero(4);
  const TimeGrid tgrid(1.0, 4);
  const Operator hfd = lattice_hamiltonian(tiny, 1.0, tv, KineticTerm::FiniteDifference).matrix();
  StateVector dense = tpsi.values;
  for (int j = 0; j < 4; ++j) dense = oracle::propagator(hfd, 0.25) * dense;
  const double feynman = (tiny_lattice_feynman_sum(tpsi, tv, tgrid) - dense).cwiseAbs().maxCoeff();
  const double t = seconds_since(t0);

  // Same packet with a readout grid whose spacing divides the attainable
  // values k/256; reported for comparison only.
  const LambdaAxis aligned{512, 2.0 * std::numbers::pi / 2.0, -0.5};
  const auto field_aligned = coordinate_amplitude_field(psi0, v, grid, cf, aligned);
  const double outside_aligned = outside_fraction(field_aligned, xg.dx, -2.0 * aligned.df(), 1.0 + 2.0 * aligned.df());

  const bool pass = drift <= 1e-10 && outside <= 1e-6 && sum_rule <= 1e-8 && feynman <= 1e-12 && t < 180.0;
  return {pass, "norm drift " + sci(drift) + ", outside mass " + sci(outside) + " (L=512, df=1/256: " +
                    sci(outside_aligned) + "), sum rule " + sci(sum_rule) + ", Feynman sum " + sci(feynman) +
                    ", " + sci(t) + " s"};
}

Outcome covariance() {
  Qubit q;
  const TimeGrid grid(1.0, 12);
  const double alpha = 2.5;
  const LambdaAxis axis_a = kQubitAxis;
  const LambdaAxis axis_b{axis_a.points, axis_a.dlambda / alpha, alpha * axis_a.f_origin};
  const GaussianKernel g{{0.08}};

  const auto fa = amplitude_field(q.h, q.a, grid, {ConstantCoupling{1.0}}, LambdaGrid({axis_a}), q.psi0);
  const auto fb = amplitude_field(q.h, q.a.scaled(alpha), grid, {ConstantCoupling{1.0}},
                                  LambdaGrid({axis_b}), q.psi0);
  const StateVector exact = exact_propagator(q.h, 1.0) * q.psi0;
  note_fine_field(fa.marginal(), exact);
  note_fine_field(fb.marginal(), exact);
  const auto ca = coarse_grain(fa, resolution_rescale(g, alpha));
  const auto cb = coarse_grain(fb, g);
  const double r = (ca.states - cb.states).cwiseAbs().maxCoeff();
  return {r <= 1e-9, "alpha = 2.5, node-by-node residual " + sci(r)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  // Criterion 3 is evaluated last so that it sees every fine field.
  const std::vector<Criterion> criteria{
      {"path-sum completeness", path_completeness},
      {"dual-route equivalence", dual_route},
      {"marginal completeness", nullptr},
      {"probability normalization", normalization},
      {"Born rule", born_rule},
      {"perturbation series", perturbation_series},
      {"Mensky closed form", mensky_closed_form},
      {"weak-limit scaling", weak_limit},
      {"Fourier consistency", fourier_consistency},
      {"transform kernel", transform_kernel},
      {"function-of-operator binning", function_binning},
      {"particle", particle},
      {"coarse-grain covariance", covariance},
  };

  std::vector<Outcome> results(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!criteria[i].run) continue;
    try {
      results[i] = criteria[i].run();
    } catch (const std::exception& e) {
      results[i] = {false, std::string("exception: ") + e.what()};
    }
  }
  results[2] = {g_marginal_worst <= 1e-10,
                std::to_string(g_fine_fields) + " fine fields, worst " + sci(g_marginal_worst)};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::printf("%s %2zu %-30s %s\n", results[i].pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                results[i].detail.c_str());
    failed += results[i].pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
