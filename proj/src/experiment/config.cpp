#include <fstream>

#include "qhist/experiment.hpp"
#include "qhist/particle1d.hpp"

namespace qhist::experiment {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, path + ": " + what);
}

// A json value together with its dotted location, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }
  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  Node at(const std::string& key) const {
    if (!value_.is_object()) invalid(path_, "expected an object");
    if (!value_.contains(key)) invalid(join(key), "required field is missing");
    return {value_.at(key), join(key)};
  }
  Node at(std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t size() const {
    if (!value_.is_array()) invalid(path_, "expected an array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) invalid(path_, "expected a number");
    return value_.get<double>();
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) invalid(path_, "must be positive");
    return v;
  }
  long long integer() const {
    if (!value_.is_number_integer()) invalid(path_, "expected an integer");
    return value_.get<long long>();
  }
  std::string string() const {
    if (!value_.is_string()) invalid(path_, "expected a string");
    return value_.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

RealVector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Operator matrix_block(const Node& node) {
  const Node real = node.at("real");
  const std::size_t n = real.size();
  Operator m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = real.at(r).numbers();
    if (row.size() != n) invalid(real.at(r).path(), "matrix must be square");
    for (std::size_t c = 0; c < n; ++c) m(Eigen::Index(r), Eigen::Index(c)) = row[c];
  }
  if (node.has("imag")) {
    const Node imag = node.at("imag");
    if (imag.size() != n) invalid(imag.path(), "shape differs from real part");
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = imag.at(r).numbers();
      if (row.size() != n) invalid(imag.at(r).path(), "shape differs from real part");
      for (std::size_t c = 0; c < n; ++c) m(Eigen::Index(r), Eigen::Index(c)) += Complex(0.0, row[c]);
    }
  }
  return m;
}

HermitianOperator parse_operator(const Node& node) {
  try {
    if (node.has("diagonal")) {
      const auto d = node.at("diagonal").numbers();
      return HermitianOperator::diagonal(d);
    }
    if (node.has("e1") || node.has("e2") || node.has("v")) {
      Complex v = 0.0;
      if (node.has("v")) {
        const Node vn = node.at("v");
        if (vn.raw().is_array()) {
          const auto parts = vn.numbers();
          if (parts.size() != 2) invalid(vn.path(), "expected [re, im]");
          v = {parts[0], parts[1]};
        } else {
          v = vn.number();
        }
      }
      return HermitianOperator::qubit(node.at("e1").number(), node.at("e2").number(), v);
    }
    if (node.has("real")) return HermitianOperator(matrix_block(node));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    invalid(node.path(), e.what());
  }
  invalid(node.path(), "expected one of diagonal, {e1, e2, v} or {real, imag}");
}

StateVector parse_state(const Node& node) {
  if (node.raw().is_array()) return to_vector(node.numbers()).cast<Complex>();
  StateVector s = to_vector(node.at("real").numbers()).cast<Complex>();
  if (node.has("imag")) {
    const auto im = node.at("imag").numbers();
    if (static_cast<Eigen::Index>(im.size()) != s.size()) {
      invalid(node.at("imag").path(), "length differs from real part");
    }
    for (std::size_t i = 0; i < im.size(); ++i) s(Eigen::Index(i)) += Complex(0.0, im[i]);
  }
  return s;
}

SwitchingFunction parse_beta(const Node& node) {
  if (node.has("impulse")) return Impulse{node.at("impulse").number()};
  if (node.has("constant")) return ConstantCoupling{node.at("constant").number()};
  if (node.has("sampled")) return SampledCoupling{node.at("sampled").numbers()};
  invalid(node.path(), "expected impulse, constant or sampled");
}

int power_of_two(const Node& node) {
  const long long n = node.integer();
  if (n < 2 || n > (1 << 24) || (n & (n - 1)) != 0) invalid(node.path(), "must be a power of two >= 2");
  return static_cast<int>(n);
}

LambdaAxis parse_axis(const Node& node) {
  const int points = power_of_two(node.at("points"));
  if (node.has("df")) {
    return LambdaAxis::centered(points, node.at("df").positive(), node.number_or("f_center", 0.0));
  }
  if (node.has("dlambda")) {
    return LambdaAxis{points, node.at("dlambda").positive(), node.number_or("f_origin", 0.0)};
  }
  invalid(node.path(), "expected df or dlambda");
}

CoarseGrainKernel parse_kernel(const Node& node) {
  if (node.has("gaussian")) {
    const auto w = node.at("gaussian").numbers();
    for (double x : w) {
      if (!(x > 0.0)) invalid(node.at("gaussian").path(), "widths must be positive");
    }
    return GaussianKernel{w};
  }
  if (node.has("shift")) return ShiftKernel{node.at("shift").numbers()};
  if (node.has("quadratic_phase")) return QuadraticPhaseKernel{node.at("quadratic_phase").numbers()};
  invalid(node.path(), "expected gaussian, shift or quadratic_phase");
}

ParticleBlock parse_particle(const Node& node) {
  ParticleBlock p;
  p.x_min = node.at("x_min").number();
  p.dx = node.at("dx").positive();
  p.points = power_of_two(node.at("points"));
  p.mass = node.has("mass") ? node.at("mass").positive() : 1.0;
  const XGrid grid(p.x_min, p.dx, p.points);

  p.potential = RealVector::Zero(p.points);
  if (node.has("potential")) {
    const Node v = node.at("potential");
    if (v.raw().is_array()) {
      const auto samples = v.numbers();
      if (static_cast<int>(samples.size()) != p.points) invalid(v.path(), "needs one sample per lattice point");
      p.potential = to_vector(samples);
    } else {
      const Node b = v.at("barrier");
      const double lo = b.at("lo").number(), hi = b.at("hi").number(), height = b.at("height").number();
      for (int i = 0; i < p.points; ++i) {
        if (grid.x(i) >= lo && grid.x(i) <= hi) p.potential(i) = height;
      }
    }
  }

  const Node packet = node.at("packet");
  p.x0 = packet.at("x0").number();
  p.sigma = packet.at("sigma").positive();
  p.p0 = packet.number_or("p0", 0.0);

  const Node f = node.at("functional");
  if (f.raw().is_string() && f.string() == "position") {
    p.functional = grid.coordinates();
  } else if (f.has("indicator")) {
    const auto range = f.at("indicator").numbers();
    if (range.size() != 2 || range[0] > range[1]) invalid(f.at("indicator").path(), "expected [lo, hi]");
    p.functional = CoordinateFunctional::indicator(grid, range[0], range[1], ConstantCoupling{1.0}).values;
  } else {
    invalid(f.path(), "expected \"position\" or {indicator: [lo, hi]}");
  }
  if (node.has("tiny")) {
    const Node t = node.at("tiny");
    p.tiny_points = power_of_two(t.at("points"));
    p.tiny_slices = static_cast<int>(t.at("slices").integer());
    if (p.tiny_points > 8 || p.tiny_slices < 1 || p.tiny_slices > 8) {
      invalid(t.path(), "tiny lattice needs points <= 8 and 1 <= slices <= 8");
    }
  }
  return p;
}

Route parse_route(const Node& node) {
  const std::string r = node.string();
  if (r == "paths") return Route::Paths;
  if (r == "lambda") return Route::Lambda;
  if (r == "mensky") return Route::Mensky;
  if (r == "transform") return Route::Transform;
  if (r == "crosscheck") return Route::Crosscheck;
  invalid(node.path(), "unknown route '" + r + "'");
}

SystemKind parse_system(const Node& node) {
  const std::string s = node.string();
  if (s == "qubit") return SystemKind::Qubit;
  if (s == "nlevel") return SystemKind::NLevel;
  if (s == "particle1d") return SystemKind::Particle1d;
  invalid(node.path(), "unknown system '" + s + "'");
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> defaults{
      {"path_completeness", 1e-12},  {"paths_vs_lambda", 1e-10},
      {"marginal_completeness", 1e-10}, {"fourier_consistency", 1e-10},
      {"normalization", 1e-6},       {"mensky_vs_meter_array", 1e-13},
      {"kernel_vs_direct", 1e-8},    {"kernel_unitarity", 1e-10},
      {"basis_change", 1e-12},       {"feynman_vs_dense", 1e-12},
      {"tiny_bins_vs_field", 1e-9},  {"norm_drift", 1e-10},
      {"sum_rule", 1e-8},            {"boundary_mass", 1e-10},
  };
  return defaults;
}

}  // namespace

double ExperimentConfig::tolerance(const std::string& name) const {
  if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
  return default_tolerances().at(name);
}

ExperimentConfig parse_config(const json& doc) {
  const Node root(doc, "");
  if (!doc.is_object()) invalid("<root>", "expected an object");
  if (root.at("schema").string() != kSchema) {
    invalid("schema", std::string("expected \"") + kSchema + "\"");
  }

  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.system = parse_system(root.at("system"));
  cfg.route = parse_route(root.at("route"));

  const Node time = root.at("time");
  const double t = time.at("T").positive();
  const long long n = time.at("N").integer();
  if (n < 1) invalid(time.at("N").path(), "must be >= 1");
  cfg.time = TimeGrid(t, static_cast<int>(n));

  if (root.has("meters")) {
    const Node meters = root.at("meters");
    if (meters.size() > 3) invalid(meters.path(), "at most three meters");
    for (std::size_t i = 0; i < meters.size(); ++i) {
      const Node m = meters.at(i);
      MeterConfig mc{parse_beta(m.at("beta")), parse_axis(m.at("grid")), std::nullopt};
      if (m.has("kernel")) mc.kernel = parse_kernel(m.at("kernel"));
      try {
        slice_weights(mc.beta, cfg.time);
      } catch (const Error& e) {
        invalid(m.at("beta").path(), e.what());
      }
      cfg.meters.push_back(std::move(mc));
    }
  }

  if (cfg.system == SystemKind::Particle1d) {
    cfg.particle = parse_particle(root.at("particle"));
    if (cfg.route != Route::Lambda && cfg.route != Route::Crosscheck) {
      invalid("route", "particle1d supports lambda and crosscheck");
    }
    if (cfg.meters.size() != 1) invalid("meters", "particle1d needs exactly one meter");
  } else {
    cfg.hamiltonian = parse_operator(root.at("hamiltonian"));
    cfg.observable = parse_operator(root.at("observable"));
    const Eigen::Index dim = cfg.hamiltonian->dim();
    if (cfg.system == SystemKind::Qubit && dim != 2) invalid("hamiltonian", "qubit must be 2x2");
    if (cfg.observable->dim() != dim) invalid("observable", "dimension differs from hamiltonian");
    if (root.has("observable_b")) {
      cfg.observable_b = parse_operator(root.at("observable_b"));
      if (cfg.observable_b->dim() != dim) invalid("observable_b", "dimension differs from hamiltonian");
    }
    cfg.psi0 = parse_state(root.at("psi0"));
    if (cfg.psi0.size() != dim) invalid("psi0", "dimension differs from hamiltonian");

    const bool needs_meter = cfg.route != Route::Mensky;
    if (needs_meter && cfg.meters.empty()) invalid("meters", "route needs at least one meter");
    if (cfg.route == Route::Transform) {
      if (!cfg.observable_b) invalid("observable_b", "required field is missing");
      if (cfg.meters.size() != 2) invalid("meters", "transform needs a meter for A and one for B");
      if (!(cfg.meters[0].axis == cfg.meters[1].axis)) {
        invalid("meters[1].grid", "transform meters must share one readout grid");
      }
    }
    if (root.has("mensky")) {
      const Node m = root.at("mensky");
      MenskyBlock mb;
      mb.sigma = m.at("sigma").positive();
      if (m.has("records")) {
        const Node recs = m.at("records");
        for (std::size_t i = 0; i < recs.size(); ++i) {
          auto r = recs.at(i).numbers();
          if (static_cast<int>(r.size()) != cfg.time.slices()) {
            invalid(recs.at(i).path(), "needs one sample per slice");
          }
          mb.records.push_back(std::move(r));
        }
      }
      if (m.has("random_records")) {
        const long long k = m.at("random_records").integer();
        if (k < 0) invalid(m.at("random_records").path(), "must be >= 0");
        mb.random_records = static_cast<int>(k);
      }
      if (mb.records.empty() && mb.random_records == 0) invalid(m.path(), "needs records or random_records");
      cfg.mensky = std::move(mb);
    } else if (cfg.route == Route::Mensky) {
      invalid("mensky", "required field is missing");
    }
  }

  if (root.has("tolerances")) {
    const Node tol = root.at("tolerances");
    if (!tol.raw().is_object()) invalid(tol.path(), "expected an object");
    for (const auto& [key, value] : tol.raw().items()) {
      if (!default_tolerances().contains(key)) invalid(tol.path() + "." + key, "unknown tolerance");
      cfg.tolerances[key] = tol.at(key).positive();
    }
  }
  cfg.path_cap = kDefaultPathCap;
  if (root.has("path_cap")) {
    const long long cap = root.at("path_cap").integer();
    if (cap < 1) invalid("path_cap", "must be >= 1");
    cfg.path_cap = static_cast<std::uint64_t>(cap);
  }
  if (root.has("seed")) {
    const long long s = root.at("seed").integer();
    if (s < 0) invalid("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (root.has("output")) {
    const Node out = root.at("output");
    if (out.has("dir")) cfg.out_dir = out.at("dir").string();
    if (out.has("format")) {
      const std::string f = out.at("format").string();
      if (f == "csv") cfg.format = Format::Csv;
      else if (f == "json") cfg.format = Format::Json;
      else invalid(out.at("format").path(), "expected csv or json");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace qhist::experiment
