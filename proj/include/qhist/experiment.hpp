#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhist/hilbert.hpp"
#include "qhist/meters.hpp"
#include "qhist/timegrid.hpp"

namespace qhist::experiment {

inline constexpr const char* kSchema = "qhist/1";

enum class SystemKind { Qubit, NLevel, Particle1d };
enum class Route { Paths, Lambda, Mensky, Transform, Crosscheck };
enum class Format { Csv, Json };

struct MeterConfig {
  SwitchingFunction beta;
  LambdaAxis axis;
  std::optional<CoarseGrainKernel> kernel;
};

struct MenskyBlock {
  double sigma = 1.0;
  std::vector<std::vector<double>> records;
  int random_records = 0;  // extra records drawn from the seed
};

struct ParticleBlock {
  double x_min = 0.0;
  double dx = 1.0;
  int points = 0;
  double mass = 1.0;
  RealVector potential;
  double x0 = 0.0;
  double sigma = 1.0;
  double p0 = 0.0;
  RealVector functional;  // F on the lattice
  int tiny_points = 4;    // lattice used by the crosscheck route
  int tiny_slices = 4;
};

struct ExperimentConfig {
  nlohmann::json source;
  SystemKind system = SystemKind::Qubit;
  Route route = Route::Lambda;
  std::optional<HermitianOperator> hamiltonian;
  std::optional<HermitianOperator> observable;
  std::optional<HermitianOperator> observable_b;
  StateVector psi0;
  TimeGrid time{1.0, 1};
  std::vector<MeterConfig> meters;
  std::optional<MenskyBlock> mensky;
  std::optional<ParticleBlock> particle;
  std::map<std::string, double> tolerances;
  std::uint64_t path_cap = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  Format format = Format::Csv;

  double tolerance(const std::string& name) const;
};

/// Parses and validates; errors are ConfigInvalid naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Residual {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct ResultBundle {
  nlohmann::json metadata;
  std::vector<Table> tables;
  std::vector<Residual> residuals;
  /// Wall-clock seconds per stage.  Reported on stderr only so that emitted
  /// files stay byte-identical between runs.
  std::vector<std::pair<std::string, double>> timings;

  bool passed() const;
  const Table* table(const std::string& name) const;
  const Residual* residual(const std::string& name) const;
};

ResultBundle run(const ExperimentConfig& config);

/// Writes one CSV per table plus residuals.json and metadata.json, or a
/// single result.json.  Returns the files written.
std::vector<std::filesystem::path> emit(const ResultBundle& bundle, Format format,
                                        const std::filesystem::path& dir);

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// Process exit status for a library error code.
int exit_code(ErrorCode code);

}  // namespace qhist::experiment
