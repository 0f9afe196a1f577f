#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aperture/fields.hpp"
#include "aperture/geometry.hpp"
#include "aperture/types.hpp"

namespace aperture::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string problem = "vector";  // "scalar" | "vector"
  double k = 1.0;
  Vec3 m{0, 0, -1};
  Vec3 p{1, 0, 0};  // vector runs only

  geo::ApertureSpec aperture;
  double h = 0.3;
  geo::MeshOptions mesh_options;

  std::string quadrature_profile = "production";  // or "quality"
  double xi_max = 60.0;
  int n_radial = 240;
  int n_angular = 96;
  double eps_band = -1.0;

  std::string assembly = "spatial";  // "spatial" | "spectral" | "both"

  struct FieldMap {
    double z = 0.5;
    int n = 24;
    double extent = 2.0;
  };
  std::optional<FieldMap> field_map;

  // Strict: unknown keys anywhere in the document are errors.
  static RunConfig parse(const std::string& json_text);
  std::string serialize() const;
  void validate() const;  // cross-field checks, throws ConfigError
};

struct FileEntry {
  std::string path;  // relative to the run directory
  std::uint64_t bytes = 0;
  std::string hash;  // fnv1a-64 of the contents, hex
};

struct RunManifest {
  std::string command;
  std::string config_echo;
  std::string version = "aperture 0.1";
  int threads = 1;
  unsigned seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> numbers;  // reports, metrics
  std::vector<FileEntry> files;

  std::string serialize() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

RunManifest cmd_mesh(const RunConfig& cfg, const std::string& out_dir, int threads,
                     unsigned seed);
RunManifest cmd_solve(const RunConfig& cfg, const std::string& out_dir, int threads,
                      unsigned seed);
RunManifest cmd_fields(const RunConfig& cfg, const std::string& out_dir, int threads,
                       unsigned seed);
RunManifest cmd_transmission(const RunConfig& cfg, const std::string& out_dir,
                             int threads, unsigned seed);
RunManifest cmd_convergence(const RunConfig& cfg, const std::string& out_dir,
                            int n_levels, int threads, unsigned seed);
// Returns the process exit code (0 ok, 4 on any failed criterion).
// only_id > 0 restricts the run to a single criterion (test hook).
int cmd_validate(const std::string& out_dir, int threads, unsigned seed,
                 bool corrupt_symbol_branch, int only_id = 0);

}  // namespace aperture::cli
