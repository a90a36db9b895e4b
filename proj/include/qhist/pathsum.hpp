#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "qhist/hilbert.hpp"
#include "qhist/timegrid.hpp"

namespace qhist {

inline constexpr std::uint64_t kDefaultPathCap = std::uint64_t{1} << 22;

/// dim^N, or CapExceeded when it would exceed cap.
std::uint64_t eigenpath_count(int dim, int slices, std::uint64_t cap);

/// Lexicographic stream of all dim^N eigenpaths: (0,...,0), (0,...,1), ...
class EigenPathEnumerator {
 public:
  EigenPathEnumerator(int dim, const TimeGrid& grid, std::uint64_t cap = kDefaultPathCap);

  std::uint64_t size() const noexcept { return count_; }
  /// Writes the next path into out; false once the stream is exhausted.
  bool next(EigenPath& out);

 private:
  int dim_;
  std::vector<int> current_;
  std::uint64_t count_;
  std::uint64_t emitted_ = 0;
};

std::vector<EigenPath> enumerate_eigenpaths(int dim, const TimeGrid& grid,
                                            std::uint64_t cap = kDefaultPathCap);

struct PathAmplitude {
  EigenPath path;
  StateVector state;
  int jump_count = 0;
};

/// [prod_j P_{k_j} exp(-i H eps)] |psi0>, j = 1 applied first, by explicit
/// matrix products.
PathAmplitude path_amplitude(const HermitianOperator& h, const SpectralDecomposition& decomp,
                             const TimeGrid& grid, const EigenPath& path, const StateVector& psi0);

struct AmplitudeBin {
  std::vector<double> f;  // functional values of the first path that landed here
  StateVector state;
  std::uint64_t paths = 0;
};

/// Substates grouped by quantized functional values.  Keys are
/// llround(f / bin_tol) per meter, so iteration is in ascending f order.
struct BinnedAmplitudes {
  double bin_tol = 0.0;
  std::map<std::vector<std::int64_t>, AmplitudeBin> bins;

  StateVector total() const;
  std::vector<std::int64_t> key(std::span<const double> f) const;
  const AmplitudeBin* find(std::span<const double> f) const;
};

/// Exhaustive eigenpath sums for one (slice propagator, observable, psi0).
/// Paths are visited depth-first in lexicographic order with amplitudes
/// carried as scalars in the observable eigenbasis; every reduction uses
/// compensated summation in a fixed order, so results are reproducible.
class EigenpathSum {
 public:
  EigenpathSum(const HermitianOperator& h, const SpectralDecomposition& decomp,
               const TimeGrid& grid, const StateVector& psi0,
               std::uint64_t cap = kDefaultPathCap);
  /// Same, with an arbitrary one-slice propagator (e.g. a split-operator step).
  EigenpathSum(Operator slice_propagator, const SpectralDecomposition& decomp, int slices,
               const StateVector& psi0, std::uint64_t cap = kDefaultPathCap);

  std::uint64_t path_count() const noexcept { return count_; }
  int slices() const noexcept { return slices_; }
  const SpectralDecomposition& basis() const noexcept { return decomp_; }

  /// Visits every path: visitor(indices, coefficient).  The substate is
  /// coefficient * |a_{k_N}>.
  void for_each(const std::function<void(const std::vector<int>&, Complex)>& visitor) const;

  StateVector total() const;
  /// Bins by F_i[a] = sum_j w_{i,j} g(a_{k_j}) where g defaults to the identity.
  BinnedAmplitudes binned(const PathFunctionalSpec& spec,
                          const std::function<double(double)>& relabel = {}) const;
  std::map<int, StateVector> by_jumps() const;
  std::vector<PathAmplitude> materialize() const;

 private:
  template <typename Visitor>
  void walk(const std::vector<std::vector<double>>& slice_values, Visitor&& visit) const;

  SpectralDecomposition decomp_;
  Operator transition_;    // <a_i| U |a_j>
  Eigen::VectorXcd first_; // <a_k| U |psi0>
  int slices_;
  std::uint64_t count_;
};

StateVector path_sum_total(const HermitianOperator& h, const SpectralDecomposition& decomp,
                           const TimeGrid& grid, const StateVector& psi0,
                           std::uint64_t cap = kDefaultPathCap);

BinnedAmplitudes binned_measurement_amplitude(const HermitianOperator& h,
                                              const SpectralDecomposition& decomp,
                                              const TimeGrid& grid, const StateVector& psi0,
                                              const PathFunctionalSpec& spec,
                                              std::uint64_t cap = kDefaultPathCap);

/// Re-bins already materialized paths by the functional of F(a(t)).
BinnedAmplitudes relabel_by_function(std::span<const PathAmplitude> paths,
                                     const SpectralDecomposition& decomp,
                                     const PathFunctionalSpec& spec,
                                     const std::function<double(double)>& f);

BinnedAmplitudes relabel_by_function(const HermitianOperator& h,
                                     const SpectralDecomposition& decomp, const TimeGrid& grid,
                                     const StateVector& psi0, const PathFunctionalSpec& spec,
                                     const std::function<double(double)>& f,
                                     std::uint64_t cap = kDefaultPathCap);

std::map<int, StateVector> group_paths_by_jumps(const HermitianOperator& h,
                                                const SpectralDecomposition& decomp,
                                                const TimeGrid& grid, const StateVector& psi0,
                                                std::uint64_t cap = kDefaultPathCap);

/// W_n = <Phi_n|Phi_n> / sum_m <Phi_m|Phi_m>.
std::vector<double> two_slit_weights(std::span<const StateVector> substates);

struct JumpSeriesOptions {
  /// Nodes per time axis of the iterated trapezoid rule.
  int quadrature_points = 129;
  /// Combine the n_q and 2 n_q - 1 rules to cancel the h^2 error term.
  bool richardson = true;
  /// Upper bound on n * (finest n_q).
  long budget = 1L << 16;
  /// Use H0 + V instead of H0 inside the exponentials (literal reading).
  bool full_hamiltonian_in_exponent = false;
};

/// n-th term of the expansion of exp(-i(H0 + V)T) in powers of V:
/// (-i)^n int_{t1<...<tn} e^{-iH0(T-tn)} V ... V e^{-iH0 t1}.
Operator jump_series_term(const HermitianOperator& h0, const HermitianOperator& v,
                          double duration, int n, const JumpSeriesOptions& options = {});

}  // namespace qhist
