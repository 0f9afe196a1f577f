#pragma once

#include <string>
#include <vector>

#include "aperture/types.hpp"

namespace aperture::validate {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string details;
};

struct ValidateOptions {
  int threads = 1;
  unsigned seed = 20240811;
  // Test hook: flips the symbol branch inside the sign-structure audit so
  // the validate command can demonstrate a red run.
  bool corrupt_symbol_branch = false;
};

// Runs the full acceptance list (10 criteria, fixed tolerances).
std::vector<CriterionResult> run_acceptance(const ValidateOptions& opt = {});

// Individual criteria, exposed so the test binary can run them one at a time.
CriterionResult c1_weyl_identity(const ValidateOptions& opt);
CriterionResult c2_electrified_disc(const ValidateOptions& opt);
CriterionResult c3_dual_assembly(const ValidateOptions& opt);
CriterionResult c4_sign_structure(const ValidateOptions& opt);
CriterionResult c5_singular_value_stability(const ValidateOptions& opt);
CriterionResult c6_saddle_consistency(const ValidateOptions& opt);
CriterionResult c7_residual_decrease(const ValidateOptions& opt);
CriterionResult c8_energy_consistency(const ValidateOptions& opt);
CriterionResult c9_small_hole_scaling(const ValidateOptions& opt);
CriterionResult c10_probe_stability(const ValidateOptions& opt);

}  // namespace aperture::validate
