#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aperture/harness.hpp"

using namespace aperture;
namespace cli = aperture::cli;
namespace fs = std::filesystem;

namespace {

const char* kVectorConfig = R"({
  "problem": "vector",
  "wave": {"k": 1.0, "m": [0, 0, -1], "p": [1, 0, 0]},
  "aperture": {"shape": "disc", "radius": 1.0},
  "mesh": {"h": 0.55},
  "assembly": "spatial"
})";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("fnv1a-64 reference values") {
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("config parse round trip is idempotent") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  const std::string once = cfg.serialize();
  const std::string twice = cli::RunConfig::parse(once).serialize();
  CHECK(once == twice);
}

TEST_CASE("unknown keys are errors, not warnings") {
  const char* bad = R"({
    "problem": "vector",
    "wave": {"k": 1.0, "m": [0, 0, -1], "p": [1, 0, 0]},
    "aperture": {"shape": "disc", "radius": 1.0},
    "mesh": {"h": 0.55},
    "wavelength": 6.28
  })";
  CHECK_THROWS_WITH_AS(cli::RunConfig::parse(bad),
                       doctest::Contains("unknown key 'wavelength'"),
                       cli::ConfigError);
}

TEST_CASE("cross-field validation names the offending field") {
  std::string bad = kVectorConfig;
  bad.replace(bad.find("[0, 0, -1]"), 10, "[0, 0, -2]");
  CHECK_THROWS_WITH_AS(cli::RunConfig::parse(bad), doctest::Contains("wave.m"),
                       cli::ConfigError);

  std::string bad_xi = kVectorConfig;
  bad_xi.insert(bad_xi.rfind('}'), R"(, "spectral": {"xi_max": 1.5})");
  CHECK_THROWS_WITH_AS(cli::RunConfig::parse(bad_xi), doctest::Contains("xi_max"),
                       cli::ConfigError);
}

TEST_CASE("solve command writes a manifest with hashed artifacts") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  const fs::path dir = fs::temp_directory_path() / "aperture_test_run_a";
  fs::remove_all(dir);
  const auto manifest = cli::cmd_solve(cfg, dir.string(), 1, 7);
  CHECK(manifest.files.size() >= 3);
  for (const auto& f : manifest.files) {
    CHECK(fs::exists(dir / f.path));
    CHECK(std::to_string(fs::file_size(dir / f.path)) == std::to_string(f.bytes));
    const std::string contents = slurp(dir / f.path);
    std::ostringstream hex;
    hex << std::hex << cli::fnv1a64(contents);
    CHECK(hex.str() == f.hash);
  }
  fs::remove_all(dir);
}

TEST_CASE("single-threaded reruns are bit-identical") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  const fs::path dir_a = fs::temp_directory_path() / "aperture_test_run_b1";
  const fs::path dir_b = fs::temp_directory_path() / "aperture_test_run_b2";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const auto m1 = cli::cmd_solve(cfg, dir_a.string(), 1, 7);
  const auto m2 = cli::cmd_solve(cfg, dir_b.string(), 1, 7);
  REQUIRE(m1.files.size() == m2.files.size());
  for (std::size_t i = 0; i < m1.files.size(); ++i) {
    CHECK(m1.files[i].path == m2.files[i].path);
    CHECK(m1.files[i].hash == m2.files[i].hash);
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("mesh command reports geometry numbers") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  const fs::path dir = fs::temp_directory_path() / "aperture_test_run_c";
  fs::remove_all(dir);
  const auto manifest = cli::cmd_mesh(cfg, dir.string(), 1, 7);
  bool has_area = false;
  for (const auto& [k, v] : manifest.numbers)
    if (k == "area") {
      has_area = true;
      CHECK(std::abs(v - kPi) / kPi < 0.05);
    }
  CHECK(has_area);
  fs::remove_all(dir);
}

TEST_CASE("convergence requires at least three levels") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  CHECK_THROWS_AS(cli::cmd_convergence(cfg, "/tmp/aperture_nope", 1, 1, 7),
                  cli::ConfigError);
}

TEST_CASE("blocked output directory is a config error") {
  const auto cfg = cli::RunConfig::parse(kVectorConfig);
  const fs::path blocker = fs::temp_directory_path() / "aperture_blocker_file";
  std::ofstream(blocker) << "x";
  CHECK_THROWS_AS(cli::cmd_mesh(cfg, (blocker / "sub").string(), 1, 7),
                  cli::ConfigError);
  fs::remove(blocker);
}
