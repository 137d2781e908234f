// qtikhonov: regularization-parameter selection driver.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 bad input,
// 4 numerical / capacity / spectral failure.
// QTIK_LOG_LEVEL=trace|debug|info|warn|error|off controls stderr logging.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qtikhonov/run.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kInput = 3, kNumerical = 4 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("qtikhonov");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("QTIK_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  qtik::RunConfig cfg;

  CLI::App app{"Tikhonov parameter selection by simulated quantum estimation"};
  app.add_option("--problem", cfg.problem, "geometric-spectrum | low-rank | hilbert-like")
      ->check(CLI::IsMember({"geometric-spectrum", "low-rank", "hilbert-like"}))
      ->capture_default_str();
  app.add_option("--m", cfg.m, "rows of the generated matrix")->capture_default_str();
  app.add_option("--n", cfg.n, "columns of the generated matrix")->capture_default_str();
  app.add_option("--noise", cfg.noise, "norm of the noise added to b")->capture_default_str();
  app.add_option("--matrix-file", cfg.matrix_file, "Matrix Market file for A");
  app.add_option("--rhs-file", cfg.rhs_file, "Matrix Market file for b");
  app.add_option("--mu0", cfg.mu0, "largest grid value")->capture_default_str();
  app.add_option("--rho", cfg.rho, "grid ratio")->capture_default_str();
  app.add_option("--p", cfg.p, "number of grid values")->capture_default_str();
  app.add_option("--method", cfg.method)
      ->check(CLI::IsMember(qtik::method_names()))
      ->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "norm accuracy relative to ||b||")->capture_default_str();
  app.add_option("--phase-bits", cfg.phase_bits, "HHL phase register width")->capture_default_str();
  app.add_option("--rank", cfg.rank, "GCV rank / low-rank generator rank")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--out", cfg.out, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }

  try {
    spdlog::info("method {} on {} grid values, seed {}", cfg.method, cfg.p, cfg.seed);
    const auto start = std::chrono::steady_clock::now();
    const qtik::RunReport report = qtik::run(cfg);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

    if (cfg.out.empty()) {
      qtik::write_report(report, std::cout);
    } else {
      std::ofstream out(cfg.out);
      if (!out) throw qtik::InputError(cfg.out + ": cannot open for writing");
      qtik::write_report(report, out);
      if (!out) throw qtik::InputError(cfg.out + ": write failed");
    }
    spdlog::info("done in {:.3f} s", wall.count());
    return kOk;
  } catch (const qtik::InputError& e) {
    spdlog::error("input: {}", e.what());
    return kInput;
  } catch (const qtik::Error& e) {
    spdlog::error("numerical: {}", e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    spdlog::error("usage: {}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}
