#include <doctest.h>

#include <fstream>
#include <sstream>

#include "qhist/experiment.hpp"
#include "qhist/parallel.hpp"

using namespace qhist;
namespace ex = qhist::experiment;

namespace {

const std::filesystem::path kConfigs = QHIST_CONFIG_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json base_config() {
  std::ifstream in(kConfigs / "qubit_crosscheck.json");
  return nlohmann::json::parse(in);
}

std::string config_error(const nlohmann::json& doc) {
  try {
    ex::parse_config(doc);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("malformed configs name the offending field") {
  auto doc = base_config();
  doc["time"].erase("T");
  CHECK(config_error(doc).find("time.T") != std::string::npos);

  doc = base_config();
  doc["meters"][0]["grid"]["points"] = 100;
  CHECK(config_error(doc).find("meters[0].grid.points") != std::string::npos);

  doc = base_config();
  doc["route"] = "teleport";
  CHECK(config_error(doc).find("route") != std::string::npos);

  doc = base_config();
  doc["schema"] = "qhist/0";
  CHECK(config_error(doc).find("schema") != std::string::npos);

  doc = base_config();
  doc["hamiltonian"] = {{"real", {{0.0, 1.0}, {0.5, 0.0}}}};
  CHECK(config_error(doc).find("hamiltonian") != std::string::npos);

  CHECK_THROWS_AS(ex::load_config(kConfigs / "malformed_missing_T.json"), Error);
}

TEST_CASE("qubit crosscheck config passes every residual") {
  const auto bundle = ex::run(ex::load_config(kConfigs / "qubit_crosscheck.json"));
  CHECK(bundle.passed());
  REQUIRE(bundle.residual("paths_vs_lambda") != nullptr);
  CHECK(bundle.residual("paths_vs_lambda")->value < 1e-10);
  REQUIRE(bundle.table("field") != nullptr);
  CHECK(bundle.table("field")->columns.front() == "f");
  CHECK(bundle.table("probability")->columns == std::vector<std::string>{"f", "W"});
}

TEST_CASE("Born config: two bumps of half the kernel mass each") {
  const auto cfg = ex::load_config(kConfigs / "born.json");
  const auto bundle = ex::run(cfg);
  CHECK(bundle.passed());
  const auto* t = bundle.table("probability");
  REQUIRE(t != nullptr);
  const double df = cfg.meters[0].axis.df();
  const double mass = kernel_mass(*cfg.meters[0].kernel, LambdaGrid({cfg.meters[0].axis}));
  double low = 0.0, high = 0.0;
  for (const auto& row : t->rows) (row[0] < 1.5 ? low : high) += row[1] * df;
  CHECK(std::abs(low / mass - 0.5) < 1e-10);
  CHECK(std::abs(high / mass - 0.5) < 1e-10);
}

TEST_CASE("emitted files are byte-identical across runs and thread counts") {
  const auto cfg = ex::load_config(kConfigs / "qubit_crosscheck.json");
  const auto dir = std::filesystem::temp_directory_path() / "qhist_emit_test";
  std::filesystem::remove_all(dir);
  set_thread_count(1);
  const auto first = ex::emit(ex::run(cfg), ex::Format::Csv, dir / "a");
  set_thread_count(3);
  const auto second = ex::emit(ex::run(cfg), ex::Format::Csv, dir / "b");
  set_thread_count(1);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(first[i]) == slurp(second[i]));
  CHECK(slurp(dir / "a" / "probability.csv").rfind("f,W\n", 0) == 0);

  const auto json_files = ex::emit(ex::run(cfg), ex::Format::Json, dir / "j");
  REQUIRE(json_files.size() == 1);
  const auto doc = nlohmann::json::parse(slurp(json_files[0]));
  CHECK(doc["residuals"]["paths_vs_lambda"]["pass"] == true);
  CHECK(doc["residuals"]["paths_vs_lambda"].contains("tol"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, -1e-300, 1.0 / 3.0, 123456789.0}) {
    CHECK(std::stod(ex::format_double(x)) == x);
  }
}

TEST_CASE("exit codes are distinct per failure class") {
  CHECK(ex::exit_code(ErrorCode::ConfigInvalid) == 2);
  CHECK(ex::exit_code(ErrorCode::CapExceeded) == 3);
  CHECK(ex::exit_code(ErrorCode::NyquistViolation) == 4);
  CHECK(ex::exit_code(ErrorCode::IoError) == 5);
}

TEST_CASE("route errors surface with remediation hints") {
  auto doc = base_config();
  doc["time"]["N"] = 30;
  doc.erase("mensky");
  doc["meters"][0]["grid"]["df"] = 1.0 / 30.0;
  try {
    ex::run(ex::parse_config(doc));
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
  doc = base_config();
  doc["meters"][0]["grid"]["df"] = 0.0001;
  try {
    ex::run(ex::parse_config(doc));
    FAIL("expected NyquistViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NyquistViolation);
    CHECK(std::string(e.what()).find("df >=") != std::string::npos);
  }
}
