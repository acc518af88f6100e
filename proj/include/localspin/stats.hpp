#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"
#include "localspin/instance.hpp"

namespace localspin {

/// Result of power iteration for the spectral radius of a symmetric matrix.
struct SpectralEstimate {
  double value = 0.0;
  double achieved_tolerance = 0.0;  // relative change at the last iteration
  std::size_t iterations = 0;
};

/// Estimates |lambda_max(J)| by power iteration on J.
///
/// Returns ||J x|| for the normalized iterate x, which is a lower bound on the
/// spectral norm and converges to it even when +lambda and -lambda are both
/// extremal (bipartite graphs). The start vector is all-ones with a small
/// deterministic perturbation; iterations are capped at 10 n.
inline SpectralEstimate spectral_radius(const CouplingMatrix& J, double rel_tol = 1e-6) {
  const std::size_t n = J.size();
  SpectralEstimate est;
  if (n == 0 || J.nonzeros() == 0) return est;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = std::fmod(0.6180339887498949 * static_cast<double>(i + 1), 1.0);
    x[i] = 1.0 + 1e-3 * (frac - 0.5);
  }
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    s = std::sqrt(s);
    for (double& a : v) a /= s;
    return s;
  };
  normalize(x);
  const std::size_t cap = std::max<std::size_t>(10 * n, 10);
  double previous = 0.0;
  est.achieved_tolerance = 1.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    J.multiply(x, y);
    const double norm = normalize(y);
    est.iterations = it;
    est.value = norm;
    if (norm == 0.0) {
      est.achieved_tolerance = 0.0;
      break;
    }
    est.achieved_tolerance = std::abs(norm - previous) / norm;
    if (it > 1 && est.achieved_tolerance < rel_tol) break;
    previous = norm;
    std::swap(x, y);
  }
  return est;
}

/// Instance-level statistics used for hyperparameter heuristics and as
/// runtime predictors.
struct InstanceStats {
  double m = 0.0;                   // sum_{i,j} J_ij / n
  double m_bar = 0.0;               // sum_{i,j} |J_ij| / n
  double mu = 0.0;                  // misfit: sum_{i<j} J_ij / sum_{i<j} |J_ij|
  double cbar = 0.0;                // 2 / mean_i sum_j |J_ij|
  double gershgorin_radius = 0.0;   // max_i sum_j |J_ij|
  double spectral_radius_estimate = 0.0;
  double spectral_tolerance = 0.0;
};

/// Throws DegenerateInstance if all weights are zero.
inline InstanceStats stats(const Instance& inst, const CouplingMatrix& J) {
  double signed_sum = 0.0, abs_sum = 0.0;  // over i<j, in units of J
  for (const auto& e : inst.edges) {
    signed_sum += e.w / 2.0;
    abs_sum += std::abs(e.w) / 2.0;
  }
  if (abs_sum == 0.0) {
    throw DegenerateInstance("all edge weights are zero: c-bar and misfit are undefined");
  }
  InstanceStats s;
  const double n = static_cast<double>(inst.n);
  s.m = 2.0 * signed_sum / n;
  s.m_bar = 2.0 * abs_sum / n;
  s.mu = signed_sum / abs_sum;
  // mean_i sum_j |J_ij| is exactly m_bar
  s.cbar = 2.0 / s.m_bar;
  for (std::size_t i = 0; i < J.size(); ++i) {
    s.gershgorin_radius = std::max(s.gershgorin_radius, J.row_abs_sum(i));
  }
  const auto spec = spectral_radius(J);
  s.spectral_radius_estimate = spec.value;
  s.spectral_tolerance = spec.achieved_tolerance;
  return s;
}

inline InstanceStats stats(const Instance& inst) { return stats(inst, CouplingMatrix(inst)); }

inline void to_json(nlohmann::json& j, const InstanceStats& s) {
  j = {{"m", s.m},
       {"m_bar", s.m_bar},
       {"mu", s.mu},
       {"cbar", s.cbar},
       {"gershgorin_radius", s.gershgorin_radius},
       {"spectral_radius_estimate", s.spectral_radius_estimate},
       {"spectral_tolerance", s.spectral_tolerance}};
}

}  // namespace localspin
