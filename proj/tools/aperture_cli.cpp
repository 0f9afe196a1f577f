#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aperture/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitValidation = 4;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw aperture::cli::ConfigError("cannot read config file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aperture diffraction boundary-integral solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run";
  int threads = 1;
  unsigned seed = 1;
  int levels = 3;
  bool inject_branch_flip = false;

  app.add_option("--config", config_path, "Path to the JSON run configuration");
  app.add_option("--out", out_dir, "Output directory (one per run)");
  app.add_option("--threads", threads, "Worker threads (1 = fully reproducible)");
  app.add_option("--seed", seed, "Seed for probe sampling");

  auto* mesh = app.add_subcommand("mesh", "Build and export the aperture mesh");
  auto* solve = app.add_subcommand("solve", "Assemble and solve the integral equation");
  auto* fields = app.add_subcommand("fields", "Solve and export a field map");
  auto* transmission =
      app.add_subcommand("transmission", "Solve and compute transmitted power");
  auto* convergence = app.add_subcommand("convergence", "Self-convergence study");
  convergence->add_option("--levels", levels, "Number of refinement levels (>= 3)");
  int only_criterion = 0;
  auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
  validate
      ->add_flag("--inject-branch-flip", inject_branch_flip,
                 "Test hook: corrupt the symbol branch to demonstrate a failure")
      ->group("");  // hidden
  validate->add_option("--only", only_criterion, "Run a single criterion by id")
      ->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const int code = aperture::cli::cmd_validate(out_dir, threads, seed,
                                                   inject_branch_flip, only_criterion);
      if (code != 0) std::cerr << "validation failed; see verdict.json\n";
      return code == 0 ? kExitOk : kExitValidation;
    }

    if (config_path.empty())
      throw aperture::cli::ConfigError("--config is required for this command");
    const auto cfg = aperture::cli::RunConfig::parse(slurp(config_path));

    aperture::cli::RunManifest manifest;
    if (mesh->parsed())
      manifest = aperture::cli::cmd_mesh(cfg, out_dir, threads, seed);
    else if (solve->parsed())
      manifest = aperture::cli::cmd_solve(cfg, out_dir, threads, seed);
    else if (fields->parsed())
      manifest = aperture::cli::cmd_fields(cfg, out_dir, threads, seed);
    else if (transmission->parsed())
      manifest = aperture::cli::cmd_transmission(cfg, out_dir, threads, seed);
    else if (convergence->parsed())
      manifest = aperture::cli::cmd_convergence(cfg, out_dir, levels, threads, seed);

    std::cout << manifest.serialize() << "\n";
    return kExitOk;
  } catch (const aperture::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const aperture::cli::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
