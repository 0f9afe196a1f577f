// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Also reachable through `aperture validate`.

#include <cstdio>
#include <functional>
#include <vector>

#include "aperture/validate.hpp"

int main() {
  namespace val = aperture::validate;
  val::ValidateOptions opt;
  opt.threads = 2;

  using Criterion = std::function<val::CriterionResult(const val::ValidateOptions&)>;
  const std::vector<Criterion> criteria = {
      val::c1_weyl_identity,      val::c2_electrified_disc,
      val::c3_dual_assembly,      val::c4_sign_structure,
      val::c5_singular_value_stability, val::c6_saddle_consistency,
      val::c7_residual_decrease,  val::c8_energy_consistency,
      val::c9_small_hole_scaling, val::c10_probe_stability,
  };

  bool all = true;
  for (const auto& run : criteria) {
    const auto r = run(opt);
    std::printf("[%s] criterion %2d %-24s (%7.1fs) %s\n",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                r.details.c_str());
    std::fflush(stdout);
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "ACCEPTANCE: ALL CRITERIA PASS"
                          : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
