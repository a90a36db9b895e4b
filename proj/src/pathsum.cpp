#include "qhist/pathsum.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qhist/compensated.hpp"

namespace qhist {

std::uint64_t eigenpath_count(int dim, int slices, std::uint64_t cap) {
  if (dim < 1 || slices < 1) throw Error(ErrorCode::InvalidArgument, "dim and N must be positive");
  std::uint64_t count = 1;
  for (int j = 0; j < slices; ++j) {
    if (count > cap / static_cast<std::uint64_t>(dim)) {
      throw Error(ErrorCode::CapExceeded,
                  std::to_string(dim) + "^" + std::to_string(slices) + " paths exceed cap " +
                      std::to_string(cap) + "; reduce N or use the lambda route");
    }
    count *= static_cast<std::uint64_t>(dim);
  }
  return count;
}

EigenPathEnumerator::EigenPathEnumerator(int dim, const TimeGrid& grid, std::uint64_t cap)
    : dim_(dim), current_(static_cast<std::size_t>(grid.slices()), 0),
      count_(eigenpath_count(dim, grid.slices(), cap)) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "eigenpath enumeration needs dim >= 2");
}

bool EigenPathEnumerator::next(EigenPath& out) {
  if (emitted_ == count_) return false;
  if (emitted_ > 0) {
    for (std::size_t j = current_.size(); j-- > 0;) {
      if (++current_[j] < dim_) break;
      current_[j] = 0;
    }
  }
  ++emitted_;
  out.indices = current_;
  return true;
}

std::vector<EigenPath> enumerate_eigenpaths(int dim, const TimeGrid& grid, std::uint64_t cap) {
  EigenPathEnumerator paths(dim, grid, cap);
  std::vector<EigenPath> out;
  out.reserve(paths.size());
  EigenPath p;
  while (paths.next(p)) out.push_back(p);
  return out;
}

PathAmplitude path_amplitude(const HermitianOperator& h, const SpectralDecomposition& decomp,
                             const TimeGrid& grid, const EigenPath& path, const StateVector& psi0) {
  require_same_dim(h.dim(), decomp.dim(), "path_amplitude: H vs observable");
  require_same_dim(h.dim(), psi0.size(), "path_amplitude: H vs psi0");
  if (path.indices.size() != static_cast<std::size_t>(grid.slices())) {
    throw Error(ErrorCode::DimensionMismatch, "path length does not match the time grid");
  }
  const Operator step = exact_propagator(h, grid.step());
  StateVector state = psi0;
  for (int k : path.indices) {
    if (k < 0 || k >= decomp.dim()) throw Error(ErrorCode::InvalidArgument, "eigen-index out of range");
    state = decomp.projector(k) * (step * state);
  }
  return {path, std::move(state), path.jump_count()};
}

StateVector BinnedAmplitudes::total() const {
  if (bins.empty()) return {};
  CompensatedSum sum(bins.begin()->second.state.size());
  for (const auto& [key, bin] : bins) sum.add(bin.state);
  return sum.value();
}

std::vector<std::int64_t> BinnedAmplitudes::key(std::span<const double> f) const {
  std::vector<std::int64_t> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::llround(f[i] / bin_tol);
  return out;
}

const AmplitudeBin* BinnedAmplitudes::find(std::span<const double> f) const {
  auto it = bins.find(key(f));
  return it == bins.end() ? nullptr : &it->second;
}

EigenpathSum::EigenpathSum(const HermitianOperator& h, const SpectralDecomposition& decomp,
                           const TimeGrid& grid, const StateVector& psi0, std::uint64_t cap)
    : EigenpathSum((require_same_dim(h.dim(), decomp.dim(), "H vs observable"),
                    exact_propagator(h, grid.step())),
                   decomp, grid.slices(), psi0, cap) {}

EigenpathSum::EigenpathSum(Operator slice_propagator, const SpectralDecomposition& decomp,
                           int slices, const StateVector& psi0, std::uint64_t cap)
    : decomp_(decomp), slices_(slices) {
  require_same_dim(slice_propagator.rows(), decomp.dim(), "propagator vs observable");
  require_same_dim(psi0.size(), decomp.dim(), "psi0 vs observable");
  decomp_.require_nondegenerate();
  count_ = eigenpath_count(static_cast<int>(decomp.dim()), slices, cap);
  transition_ = decomp.eigenvectors.adjoint() * slice_propagator * decomp.eigenvectors;
  first_ = decomp.eigenvectors.adjoint() * (slice_propagator * psi0);
}

template <typename Visitor>
void EigenpathSum::walk(const std::vector<std::vector<double>>& slice_values,
                        Visitor&& visit) const {
  const int dim = static_cast<int>(decomp_.dim());
  const int n = slices_;
  const std::size_t meters = slice_values.size();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<Complex> amp(static_cast<std::size_t>(n));
  std::vector<double> prefix(static_cast<std::size_t>(n) * meters);

  auto settle = [&](int d) {
    const auto j = static_cast<std::size_t>(d);
    const int k = idx[j];
    amp[j] = d == 0 ? first_(k) : amp[j - 1] * transition_(k, idx[j - 1]);
    for (std::size_t i = 0; i < meters; ++i) {
      const double base = d == 0 ? 0.0 : prefix[(j - 1) * meters + i];
      prefix[j * meters + i] = base + slice_values[i][j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
    }
  };

  int depth = 0;
  settle(0);
  for (;;) {
    if (depth == n - 1) {
      visit(idx, amp[static_cast<std::size_t>(depth)],
            meters ? &prefix[static_cast<std::size_t>(depth) * meters] : nullptr);
      while (depth >= 0 && ++idx[static_cast<std::size_t>(depth)] == dim) {
        idx[static_cast<std::size_t>(depth)] = 0;
        --depth;
      }
      if (depth < 0) return;
      settle(depth);
    } else {
      ++depth;
      idx[static_cast<std::size_t>(depth)] = 0;
      settle(depth);
    }
  }
}

void EigenpathSum::for_each(
    const std::function<void(const std::vector<int>&, Complex)>& visitor) const {
  walk({}, [&](const std::vector<int>& idx, Complex c, const double*) { visitor(idx, c); });
}

StateVector EigenpathSum::total() const {
  CompensatedSum sum(decomp_.dim());
  walk({}, [&](const std::vector<int>& idx, Complex c, const double*) { sum.add(idx.back(), c); });
  return decomp_.eigenvectors * sum.value();
}

BinnedAmplitudes EigenpathSum::binned(const PathFunctionalSpec& spec,
                                      const std::function<double(double)>& relabel) const {
  if (spec.grid().slices() != slices_) {
    throw Error(ErrorCode::DimensionMismatch, "functional spec grid does not match the path length");
  }
  const auto dim = static_cast<std::size_t>(decomp_.dim());
  std::vector<double> values(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double a = decomp_.eigenvalues(static_cast<Eigen::Index>(k));
    values[k] = relabel ? relabel(a) : a;
  }
  std::vector<std::vector<double>> table;
  for (const auto& w : spec.weights()) {
    std::vector<double> t(w.size() * dim);
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (std::size_t k = 0; k < dim; ++k) t[j * dim + k] = w[j] * values[k];
    }
    table.push_back(std::move(t));
  }

  BinnedAmplitudes out;
  out.bin_tol = spec.bin_tol();
  struct Accumulator {
    std::vector<double> f;
    CompensatedSum sum;
    std::uint64_t paths = 0;
  };
  std::map<std::vector<std::int64_t>, Accumulator> acc;
  const std::size_t meters = table.size();
  std::vector<std::int64_t> key(meters);
  walk(table, [&](const std::vector<int>& idx, Complex c, const double* f) {
    for (std::size_t i = 0; i < meters; ++i) key[i] = std::llround(f[i] / out.bin_tol);
    auto it = acc.find(key);
    if (it == acc.end()) {
      it = acc.emplace(key, Accumulator{std::vector<double>(f, f + meters),
                                        CompensatedSum(decomp_.dim()), 0})
               .first;
    }
    it->second.sum.add(idx.back(), c);
    ++it->second.paths;
  });
  for (auto& [k, a] : acc) {
    out.bins.emplace(k, AmplitudeBin{std::move(a.f), decomp_.eigenvectors * a.sum.value(), a.paths});
  }
  return out;
}

std::map<int, StateVector> EigenpathSum::by_jumps() const {
  std::map<int, CompensatedSum> acc;
  walk({}, [&](const std::vector<int>& idx, Complex c, const double*) {
    int jumps = 0;
    for (std::size_t j = 1; j < idx.size(); ++j) jumps += idx[j] != idx[j - 1];
    auto it = acc.try_emplace(jumps, decomp_.dim()).first;
    it->second.add(idx.back(), c);
  });
  std::map<int, StateVector> out;
  for (const auto& [n, sum] : acc) out.emplace(n, decomp_.eigenvectors * sum.value());
  return out;
}

std::vector<PathAmplitude> EigenpathSum::materialize() const {
  std::vector<PathAmplitude> out;
  out.reserve(count_);
  walk({}, [&](const std::vector<int>& idx, Complex c, const double*) {
    EigenPath path{idx};
    const int jumps = path.jump_count();
    out.push_back({std::move(path), c * decomp_.eigenvectors.col(idx.back()), jumps});
  });
  return out;
}

StateVector path_sum_total(const HermitianOperator& h, const SpectralDecomposition& decomp,
                           const TimeGrid& grid, const StateVector& psi0, std::uint64_t cap) {
  return EigenpathSum(h, decomp, grid, psi0, cap).total();
}

BinnedAmplitudes binned_measurement_amplitude(const HermitianOperator& h,
                                              const SpectralDecomposition& decomp,
                                              const TimeGrid& grid, const StateVector& psi0,
                                              const PathFunctionalSpec& spec, std::uint64_t cap) {
  return EigenpathSum(h, decomp, grid, psi0, cap).binned(spec);
}

BinnedAmplitudes relabel_by_function(std::span<const PathAmplitude> paths,
                                     const SpectralDecomposition& decomp,
                                     const PathFunctionalSpec& spec,
                                     const std::function<double(double)>& f) {
  BinnedAmplitudes out;
  out.bin_tol = spec.bin_tol();
  struct Accumulator {
    std::vector<double> f;
    CompensatedSum sum;
    std::uint64_t paths = 0;
  };
  std::map<std::vector<std::int64_t>, Accumulator> acc;
  const auto& weights = spec.weights();
  std::vector<double> fv(weights.size());
  for (const auto& p : paths) {
    if (p.path.indices.size() != static_cast<std::size_t>(spec.grid().slices())) {
      throw Error(ErrorCode::LengthMismatch, "path length does not match the functional grid");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < weights[i].size(); ++j) {
        v += weights[i][j] * f(decomp.eigenvalues(p.path.indices[j]));
      }
      fv[i] = v;
    }
    auto key = out.key(fv);
    auto it = acc.find(key);
    if (it == acc.end()) {
      it = acc.emplace(std::move(key), Accumulator{fv, CompensatedSum(p.state.size()), 0}).first;
    }
    it->second.sum.add(p.state);
    ++it->second.paths;
  }
  for (auto& [k, a] : acc) out.bins.emplace(k, AmplitudeBin{std::move(a.f), a.sum.value(), a.paths});
  return out;
}

BinnedAmplitudes relabel_by_function(const HermitianOperator& h,
                                     const SpectralDecomposition& decomp, const TimeGrid& grid,
                                     const StateVector& psi0, const PathFunctionalSpec& spec,
                                     const std::function<double(double)>& f, std::uint64_t cap) {
  return EigenpathSum(h, decomp, grid, psi0, cap).binned(spec, f);
}

std::map<int, StateVector> group_paths_by_jumps(const HermitianOperator& h,
                                                const SpectralDecomposition& decomp,
                                                const TimeGrid& grid, const StateVector& psi0,
                                                std::uint64_t cap) {
  return EigenpathSum(h, decomp, grid, psi0, cap).by_jumps();
}

std::vector<double> two_slit_weights(std::span<const StateVector> substates) {
  if (substates.empty()) throw Error(ErrorCode::InvalidArgument, "no substates given");
  std::vector<double> w;
  w.reserve(substates.size());
  double total = 0.0;
  for (const auto& s : substates) {
    w.push_back(s.squaredNorm());
    total += w.back();
  }
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroSubstates, "every substate vanishes");
  for (double& x : w) x /= total;
  return w;
}

}  // namespace qhist
