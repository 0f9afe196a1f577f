#include "aperture/report.hpp"

#include <random>

namespace aperture {

ConditionEstimate estimate_condition(const CMatX& a,
                                     const Eigen::PartialPivLU<CMatX>& lu,
                                     int iterations) {
  const int n = static_cast<int>(a.rows());
  ConditionEstimate est;
  if (n == 0) return est;

  std::mt19937 rng(0x5eed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVecX v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v /= v.norm();

  // ||A||_2 via power iteration on A^H A.
  for (int it = 0; it < iterations; ++it) {
    CVecX w = a * v;
    w = a.adjoint() * w;
    const double nw = w.norm();
    if (nw == 0) break;
    v = w / nw;
  }
  est.norm = (a * v).norm();

  // ||A^{-1}||_2 via power iteration on (A^H A)^{-1} using the factorization.
  CVecX u(n);
  for (int i = 0; i < n; ++i) u[i] = Complex(gauss(rng), gauss(rng));
  u /= u.norm();
  for (int it = 0; it < iterations; ++it) {
    CVecX w = lu.solve(u);
    w = lu.adjoint().solve(w);
    const double nw = w.norm();
    if (nw == 0) break;
    u = w / nw;
  }
  est.inv_norm = lu.solve(u).norm();
  est.smallest_singular = (est.inv_norm > 0) ? 1.0 / est.inv_norm : 0.0;
  est.condition = est.norm * est.inv_norm;
  return est;
}

}  // namespace aperture
