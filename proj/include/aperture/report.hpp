#pragma once

#include <map>
#include <string>

#include "aperture/types.hpp"

namespace aperture {

struct SolveReport {
  int unknowns = 0;
  double residual = 0.0;        // ||A x - b|| / ||b||
  double condition = 0.0;       // 2-norm estimate ||A|| ||A^-1||
  double smallest_singular = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  // Named diagnostics (agreement metrics, residual suite entries, ...).
  std::map<std::string, double> metrics;
};

struct PowerReport {
  double incident_flux = 0.0;      // through the aperture area
  double transmitted_aperture = 0.0;
  double transmitted_far = 0.0;
  double tau = 0.0;                // transmitted_aperture / incident_flux
  bool flux_agreement_ok = true;   // the two transmitted powers agree
  double flux_disagreement = 0.0;  // relative spread between the two
};

// Power-iteration estimates of ||A||_2 and ||A^{-1}||_2 through a prepared
// LU solve; deterministic (fixed seed, fixed iteration count).
struct ConditionEstimate {
  double norm = 0.0;
  double inv_norm = 0.0;
  double condition = 0.0;
  double smallest_singular = 0.0;
};
ConditionEstimate estimate_condition(const CMatX& a,
                                     const Eigen::PartialPivLU<CMatX>& lu,
                                     int iterations = 24);

}  // namespace aperture
