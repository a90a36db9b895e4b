#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <random>

#include "qhist/experiment.hpp"
#include "qhist/mensky.hpp"
#include "qhist/particle1d.hpp"
#include "qhist/pathsum.hpp"
#include "qhist/transforms.hpp"

namespace qhist::experiment {

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  explicit Stopwatch(ResultBundle& bundle) : bundle_(bundle) {}
  template <typename F>
  decltype(auto) time(const std::string& stage, F&& body) {
    const auto start = Clock::now();
    struct Record {
      ResultBundle& b;
      std::string name;
      Clock::time_point start;
      ~Record() {
        b.timings.emplace_back(name, std::chrono::duration<double>(Clock::now() - start).count());
      }
    } record{bundle_, stage, start};
    return body();
  }

 private:
  ResultBundle& bundle_;
};

void add_residual(ResultBundle& bundle, const ExperimentConfig& cfg, const std::string& name,
                  double value) {
  const double tol = cfg.tolerance(name);
  bundle.residuals.push_back({name, value, tol, value <= tol});
}

std::vector<std::string> f_columns(int meters) {
  if (meters == 1) return {"f"};
  std::vector<std::string> out;
  for (int i = 1; i <= meters; ++i) out.push_back("f_" + std::to_string(i));
  return out;
}

void add_components(std::vector<std::string>& columns, Eigen::Index dim) {
  for (Eigen::Index k = 0; k < dim; ++k) {
    columns.push_back("re_" + std::to_string(k));
    columns.push_back("im_" + std::to_string(k));
  }
}

Table field_table(const std::string& name, const AmplitudeField& field) {
  Table t{name, f_columns(field.grid.meters()), {}};
  add_components(t.columns, field.states.rows());
  for (std::size_t p = 0; p < field.grid.size(); ++p) {
    std::vector<double> row = field.grid.readouts(p);
    for (Eigen::Index k = 0; k < field.states.rows(); ++k) {
      const Complex c = field.states(k, static_cast<Eigen::Index>(p));
      row.push_back(c.real());
      row.push_back(c.imag());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table probability_table(const ProbabilityTable& probs) {
  auto columns = f_columns(probs.grid.meters());
  columns.push_back("W");
  Table t{"probability", std::move(columns), {}};
  for (std::size_t p = 0; p < probs.grid.size(); ++p) {
    std::vector<double> row = probs.grid.readouts(p);
    row.push_back(probs.w(static_cast<Eigen::Index>(p)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table bins_table(const BinnedAmplitudes& bins, int meters, Eigen::Index dim) {
  auto columns = f_columns(meters);
  add_components(columns, dim);
  columns.push_back("paths");
  Table t{"bins", std::move(columns), {}};
  for (const auto& [key, bin] : bins.bins) {
    std::vector<double> row = bin.f;
    for (Eigen::Index k = 0; k < dim; ++k) {
      row.push_back(bin.state(k).real());
      row.push_back(bin.state(k).imag());
    }
    row.push_back(static_cast<double>(bin.paths));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<SwitchingFunction> betas(const ExperimentConfig& cfg) {
  std::vector<SwitchingFunction> out;
  for (const auto& m : cfg.meters) out.push_back(m.beta);
  return out;
}

LambdaGrid lambda_grid(const ExperimentConfig& cfg) {
  std::vector<LambdaAxis> axes;
  for (const auto& m : cfg.meters) axes.push_back(m.axis);
  return LambdaGrid(std::move(axes));
}

// One kernel for the whole product grid, or nothing when no meter has one.
std::optional<CoarseGrainKernel> combined_kernel(const ExperimentConfig& cfg) {
  std::size_t with_kernel = 0;
  for (const auto& m : cfg.meters) with_kernel += m.kernel.has_value();
  if (with_kernel == 0) return std::nullopt;
  if (with_kernel != cfg.meters.size()) {
    throw Error(ErrorCode::ConfigInvalid, "meters: either every meter has a kernel or none does");
  }
  const std::size_t kind = cfg.meters.front().kernel->index();
  std::vector<double> params;
  for (std::size_t i = 0; i < cfg.meters.size(); ++i) {
    const auto& k = *cfg.meters[i].kernel;
    if (k.index() != kind) {
      throw Error(ErrorCode::ConfigInvalid,
                  "meters[" + std::to_string(i) + "].kernel: all meters need the same kernel kind");
    }
    const auto& p = std::visit(
        [](const auto& kk) -> const std::vector<double>& {
          using K = std::decay_t<decltype(kk)>;
          if constexpr (std::is_same_v<K, GaussianKernel>) return kk.widths;
          else if constexpr (std::is_same_v<K, ShiftKernel>) return kk.offsets;
          else if constexpr (std::is_same_v<K, QuadraticPhaseKernel>) return kk.b;
          else throw Error(ErrorCode::ConfigInvalid, "sampled kernels are not configurable");
        },
        k);
    if (p.size() != 1) {
      throw Error(ErrorCode::ConfigInvalid,
                  "meters[" + std::to_string(i) + "].kernel: give one parameter per meter");
    }
    params.push_back(p.front());
  }
  switch (kind) {
    case 0: return GaussianKernel{params};
    case 1: return ShiftKernel{params};
    default: return QuadraticPhaseKernel{params};
  }
}

double max_column_norm(const Eigen::MatrixXcd& m) { return m.colwise().norm().maxCoeff(); }

AmplitudeField lambda_route(const ExperimentConfig& cfg, ResultBundle& bundle, Stopwatch& watch) {
  const auto& h = *cfg.hamiltonian;
  const auto& a = *cfg.observable;
  const LambdaGrid lgrid = lambda_grid(cfg);
  const auto bs = betas(cfg);
  AmplitudeField field =
      watch.time("lambda", [&] { return amplitude_field(h, a, cfg.time, bs, lgrid, cfg.psi0); });
  bundle.tables.push_back(field_table("field", field));

  const StateVector exact = exact_propagator(h, cfg.time.duration()) * cfg.psi0;
  add_residual(bundle, cfg, "marginal_completeness", (field.marginal() - exact).norm());
  add_residual(bundle, cfg, "fourier_consistency",
               fourier_consistency_check(field, h, a, cfg.time, bs, cfg.psi0));

  if (const auto kernel = combined_kernel(cfg)) {
    const ProbabilityTable probs = probabilities(coarse_grain(field, *kernel));
    bundle.tables.push_back(probability_table(probs));
    const double expected = kernel_mass(*kernel, lgrid) * cfg.psi0.squaredNorm();
    add_residual(bundle, cfg, "normalization", std::abs(probs.total_mass() - expected));
  }
  return field;
}

BinnedAmplitudes paths_route(const ExperimentConfig& cfg, ResultBundle& bundle, Stopwatch& watch) {
  const auto& h = *cfg.hamiltonian;
  const auto decomp = spectral_decompose(*cfg.observable);
  const PathFunctionalSpec spec(cfg.time, betas(cfg));
  const EigenpathSum sum(h, decomp, cfg.time, cfg.psi0, cfg.path_cap);
  BinnedAmplitudes bins = watch.time("paths", [&] { return sum.binned(spec); });
  bundle.tables.push_back(bins_table(bins, spec.meters(), h.dim()));

  const auto classes = watch.time("jump_classes", [&] { return sum.by_jumps(); });
  Table jumps{"jump_classes", {"n", "weight"}, {}};
  for (const auto& [n, state] : classes) jumps.rows.push_back({double(n), state.squaredNorm()});
  bundle.tables.push_back(std::move(jumps));

  const StateVector exact = exact_propagator(h, cfg.time.duration()) * cfg.psi0;
  add_residual(bundle, cfg, "path_completeness", (bins.total() - exact).norm());
  return bins;
}

std::vector<ReadoutRecord> mensky_records(const ExperimentConfig& cfg) {
  std::vector<ReadoutRecord> out;
  for (const auto& r : cfg.mensky->records) out.emplace_back(cfg.time, r);
  if (cfg.mensky->random_records > 0) {
    const auto spectrum = spectral_decompose(*cfg.observable).eigenvalues;
    const double lo = spectrum.minCoeff() - 1.0;
    const double hi = spectrum.maxCoeff() + 1.0;
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < cfg.mensky->random_records; ++i) {
      std::vector<double> phi(static_cast<std::size_t>(cfg.time.slices()));
      // Built from raw engine output so the records do not depend on the
      // standard library's distribution implementation.
      for (double& x : phi) x = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
      out.emplace_back(cfg.time, std::move(phi));
    }
  }
  return out;
}

void mensky_route(const ExperimentConfig& cfg, ResultBundle& bundle, Stopwatch& watch) {
  const auto& h = *cfg.hamiltonian;
  const auto& a = *cfg.observable;
  const auto records = mensky_records(cfg);
  const MenskyConfig mc(cfg.mensky->sigma);
  const auto weights =
      watch.time("mensky", [&] { return record_probability_scan(h, a, mc, cfg.psi0, records); });
  Table t{"records", {"record", "weight"}, {}};
  for (std::size_t i = 0; i < weights.size(); ++i) t.rows.push_back({double(i), weights[i]});
  bundle.tables.push_back(std::move(t));

  double worst = 0.0;
  watch.time("meter_array", [&] {
    for (const auto& r : records) {
      const StateVector x = record_evolve(h, a, r, mc, cfg.psi0);
      const StateVector y = weak_meter_array(h, a, r, mc.sigma, cfg.psi0);
      worst = std::max(worst, (x - y).cwiseAbs().maxCoeff());
    }
    return 0;
  });
  add_residual(bundle, cfg, "mensky_vs_meter_array", worst);
}

void transform_route(const ExperimentConfig& cfg, ResultBundle& bundle, Stopwatch& watch) {
  const auto& h = *cfg.hamiltonian;
  const auto& a = *cfg.observable;
  const auto& b = *cfg.observable_b;
  const auto& ma = cfg.meters[0];
  const auto& mb = cfg.meters[1];
  const LambdaGrid lgrid({ma.axis});
  const auto kernel = watch.time("kernel", [&] {
    return finite_time_kernel(h, a, b, cfg.time, ma.beta, mb.beta, ma.axis);
  });
  const auto field_a = amplitude_field(h, a, cfg.time, {ma.beta}, lgrid, cfg.psi0);
  const auto field_b = amplitude_field(h, b, cfg.time, {mb.beta}, lgrid, cfg.psi0);
  const auto mapped = apply_kernel(kernel, field_a);
  bundle.tables.push_back(field_table("field_b", mapped));

  add_residual(bundle, cfg, "kernel_vs_direct",
               max_column_norm(mapped.states - field_b.states) * ma.axis.df());
  add_residual(bundle, cfg, "kernel_unitarity", kernel_unitarity_residual(kernel));
  const auto change = von_neumann_basis_change(cfg.psi0, spectral_decompose(a), spectral_decompose(b));
  add_residual(bundle, cfg, "basis_change", change.residual);
}

double lattice_norm(const StateVector& v, double dx) { return std::sqrt(v.squaredNorm() * dx); }

void particle_route(const ExperimentConfig& cfg, ResultBundle& bundle, Stopwatch& watch) {
  const ParticleBlock& p = *cfg.particle;
  const XGrid grid(p.x_min, p.dx, p.points);
  const auto psi0 = gaussian_packet(grid, p.x0, p.sigma, p.p0, p.mass);
  const CoordinateFunctional cf{p.functional, cfg.meters[0].beta};
  const LambdaAxis& axis = cfg.meters[0].axis;

  const auto field =
      watch.time("lambda", [&] { return coordinate_amplitude_field(psi0, p.potential, cfg.time, cf, axis); });
  const auto final_state = split_step_evolve(psi0, p.potential, cfg.time, 0.0, cf);

  Table marginal{"marginal", {"f", "mass"}, {}};
  const RealVector mass = field.states.colwise().squaredNorm().transpose() * (p.dx * axis.df());
  for (int m = 0; m < axis.points; ++m) marginal.rows.push_back({axis.f(m), mass(m)});
  bundle.tables.push_back(std::move(marginal));

  add_residual(bundle, cfg, "norm_drift", std::abs(final_state.norm_squared() - psi0.norm_squared()));
  add_residual(bundle, cfg, "sum_rule", lattice_norm(field.marginal() - final_state.values, p.dx));
  add_residual(bundle, cfg, "boundary_mass", final_state.boundary_mass(8));

  if (cfg.route != Route::Crosscheck) return;

  // Tiny lattice over the same box, sampling V and F at every stride-th site.
  const int stride = p.points / p.tiny_points;
  const XGrid tiny(p.x_min, p.dx * stride, p.tiny_points);
  RealVector v(p.tiny_points), f(p.tiny_points);
  for (int i = 0; i < p.tiny_points; ++i) {
    v(i) = p.potential(i * stride);
    f(i) = p.functional(i * stride);
  }
  const TimeGrid tgrid(cfg.time.duration(), p.tiny_slices);
  const auto tiny_psi = gaussian_packet(tiny, p.x0, p.sigma, p.p0, p.mass);
  const auto fd = lattice_hamiltonian(tiny, p.mass, v, KineticTerm::FiniteDifference);
  StateVector dense = tiny_psi.values;
  const Operator step = exact_propagator(fd, tgrid.step());
  for (int j = 0; j < tgrid.slices(); ++j) dense = step * dense;
  const StateVector feynman =
      watch.time("feynman_sum", [&] { return tiny_lattice_feynman_sum(tiny_psi, v, tgrid, cfg.path_cap); });
  add_residual(bundle, cfg, "feynman_vs_dense", lattice_norm(feynman - dense, tiny.dx));

  const CoordinateFunctional tiny_cf{f, cf.beta};
  const Operator split = dense_split_propagator(tiny, p.mass, v, tgrid.step(), KineticTerm::Spectral);
  const auto bins = tiny_lattice_binned(tiny_psi, split, tgrid, tiny_cf, cfg.path_cap);
  const auto tiny_field = coordinate_amplitude_field(tiny_psi, v, tgrid, tiny_cf, axis);
  add_residual(bundle, cfg, "tiny_bins_vs_field", field_vs_bins_residual(tiny_field, bins));
}

nlohmann::json metadata(const ExperimentConfig& cfg) {
  nlohmann::json meta;
  meta["schema"] = kSchema;
  meta["qhist_version"] = "0.1.0";
  meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION);
  meta["config"] = cfg.source;
  return meta;
}

}  // namespace

bool ResultBundle::passed() const {
  return std::all_of(residuals.begin(), residuals.end(), [](const Residual& r) { return r.pass; });
}

const Table* ResultBundle::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Residual* ResultBundle::residual(const std::string& name) const {
  for (const auto& r : residuals) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

ResultBundle run(const ExperimentConfig& cfg) {
  ResultBundle bundle;
  bundle.metadata = metadata(cfg);
  Stopwatch watch(bundle);

  if (cfg.system == SystemKind::Particle1d) {
    particle_route(cfg, bundle, watch);
    return bundle;
  }
  switch (cfg.route) {
    case Route::Paths:
      paths_route(cfg, bundle, watch);
      break;
    case Route::Lambda:
      lambda_route(cfg, bundle, watch);
      break;
    case Route::Mensky:
      mensky_route(cfg, bundle, watch);
      break;
    case Route::Transform:
      transform_route(cfg, bundle, watch);
      break;
    case Route::Crosscheck: {
      const auto bins = paths_route(cfg, bundle, watch);
      const auto field = lambda_route(cfg, bundle, watch);
      add_residual(bundle, cfg, "paths_vs_lambda", field_vs_bins_residual(field, bins));
      if (cfg.mensky) mensky_route(cfg, bundle, watch);
      break;
    }
  }
  return bundle;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid: return 2;
    case ErrorCode::CapExceeded:
    case ErrorCode::QuadratureBudgetExceeded: return 3;
    case ErrorCode::NyquistViolation:
    case ErrorCode::GridTooSmall: return 4;
    case ErrorCode::IoError: return 5;
    default: return 6;
  }
}

}  // namespace qhist::experiment
