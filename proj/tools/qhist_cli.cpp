#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "qhist/experiment.hpp"
#include "qhist/parallel.hpp"

namespace ex = qhist::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Measurement-amplitude experiments for eigenpath histories"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment config");
  std::string config_file;
  std::string out_dir;
  std::string format;
  int threads = 0;
  run->add_option("config", config_file, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run->add_option("--format", format, "csv or json (overrides output.format)")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) qhist::set_thread_count(threads);
    ex::ExperimentConfig cfg = ex::load_config(config_file);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) cfg.format = format == "json" ? ex::Format::Json : ex::Format::Csv;

    const ex::ResultBundle bundle = ex::run(cfg);
    ex::emit(bundle, cfg.format, cfg.out_dir);

    for (const auto& [stage, seconds] : bundle.timings) {
      std::fprintf(stderr, "time %-14s %.3f s\n", stage.c_str(), seconds);
    }
    for (const auto& r : bundle.residuals) {
      std::printf("%-4s %-24s %.3e (tol %.1e)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                  r.value, r.tol);
    }
    return bundle.passed() ? 0 : 1;
  } catch (const qhist::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ex::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 6;
  }
}
