#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "replicator.hpp"

namespace ulb {

struct M0Bound {
  double M0;
  double radius;  // 1/M0, infinite when M0 == 0
};

inline M0Bound m0_bound(const AffineForm& af) {
  if (!af.pivot_strict_nash)
    throw std::invalid_argument("pivot is not a strict Nash vertex; no bound available");
  int m = static_cast<int>(af.N.size());
  double best = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      double val = (af.M(i, j) + af.M(j, i)) / (-af.N(i));
      if (val > best) best = val;
    }
  double radius = best > 0.0 ? 1.0 / best : std::numeric_limits<double>::infinity();
  return {best, radius};
}

struct GralACheck {
  bool ok = true;
  std::optional<Eigen::VectorXd> witness;
};

// Brute-force negativity of Q(x) = Nx + x^T M x on the corner region.
inline GralACheck gralA_check(const Eigen::VectorXd& N, const Eigen::MatrixXd& M, double radius,
                              int n_samples, std::mt19937_64& rng) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  int m = static_cast<int>(N.size());
  double r = radius * (1.0 - 1e-9);
  if (!std::isfinite(r)) r = 1.0;
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd dir(m);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      dir(i) = gamma(rng);
      total += dir(i);
    }
    dir /= total;
    double scale = r * std::pow(uni(rng), 1.0 / m);
    Eigen::VectorXd x = dir * scale;
    double q = N.dot(x) + x.dot(M * x);
    if (!(q < 0.0)) return {false, x};
  }
  return {true, std::nullopt};
}

struct BasinRegion {
  bool full_simplex = false;
  double radius = 0.0;  // sum of non-pivot shares; ignored when full_simplex
};

struct McBasinResult {
  double fraction = 0.0;  // of classified trajectories converging to the pivot
  int converged_pivot = 0;
  int converged_other = 0;
  int excluded = 0;  // budget exhausted or failed
  int samples = 0;
  double max_monotone_violation = 0.0;
};

struct McOptions {
  double t_max = 3000.0;
  IntegrateOptions integrate;
  bool monitor_monotone = false;
};

inline SimplexPoint sample_start(int n, int pivot, const BasinRegion& region,
                                 std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SimplexPoint x(n);
  if (region.full_simplex) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      x(i) = gamma(rng);
      total += x(i);
    }
    x /= total;
    return x;
  }
  int m = n - 1;
  Eigen::VectorXd dir(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    dir(i) = gamma(rng);
    total += dir(i);
  }
  dir /= total;
  double r = std::min(region.radius, 1.0 - 1e-6);
  double scale = r * std::pow(uni(rng), 1.0 / m);
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (i != pivot) x(i) = dir(k++) * scale;
  x(pivot) = 1.0 - scale;
  return x;
}

template <class Field>
McBasinResult mc_basin_measure_field(Field&& field, int n, int pivot, const BasinRegion& region,
                                     int n_samples, const McOptions& opts, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("need at least one sample");
  std::mt19937_64 rng(seed);
  McBasinResult out;
  IntegrateOptions iopts = opts.integrate;
  if (opts.monitor_monotone) iopts.monitor_pivot = pivot;
  for (int k = 0; k < n_samples; ++k) {
    SimplexPoint x0 = sample_start(n, pivot, region, rng);
    Trajectory traj = detail::integrate_field(field, x0, opts.t_max, iopts);
    ++out.samples;
    if (traj.terminal == Terminal::converged) {
      if (traj.vertex == pivot)
        ++out.converged_pivot;
      else
        ++out.converged_other;
    } else {
      ++out.excluded;
    }
    if (traj.monotone_violation > out.max_monotone_violation)
      out.max_monotone_violation = traj.monotone_violation;
  }
  int classified = out.converged_pivot + out.converged_other;
  out.fraction = classified > 0 ? static_cast<double>(out.converged_pivot) / classified : 0.0;
  return out;
}

inline McBasinResult mc_basin_measure(const Eigen::MatrixXd& A, int pivot,
                                      const BasinRegion& region, int n_samples,
                                      const McOptions& opts, std::uint64_t seed) {
  return mc_basin_measure_field([&](const SimplexPoint& x) { return vector_field(A, x); },
                                static_cast<int>(A.rows()), pivot, region, n_samples, opts,
                                seed);
}

// Three-strategy matrix whose first vertex is a strict Nash attractor with a
// basin of width O(lambda): the two invaders are individually repelled but
// reinforce each other through large positive cross terms, so the symmetric
// point at distance 2*lambda/(1+lambda) escapes toward the far edge.
inline Eigen::MatrixXd counterexample_matrix(double lambda, double a_cap = 100.0) {
  if (!(lambda > 0.0 && lambda <= 0.1)) throw std::invalid_argument("lambda must lie in (0, 0.1]");
  if (!(a_cap > 0.0)) throw std::invalid_argument("a_cap must be positive");
  const double nu = 1.0;                       // common scale of -N2 = -N3
  const double mdiag = -2.0 * nu;              // M22 = M33
  const double mcross = nu * (1.0 / lambda + 4.0);  // M23 = M32
  double d = 3.5 * nu;
  double c = d + nu;
  Eigen::MatrixXd A(3, 3);
  A << c, d, d,
       c - nu, d + mdiag - nu, d + mcross - nu,
       c - nu, d + mcross - nu, d + mdiag - nu;
  double top = A.maxCoeff();
  if (top > a_cap) A *= a_cap / top;  // uniform rescale keeps all ratios
  if (A.minCoeff() <= 0.0) throw std::invalid_argument("cap too small for requested lambda");
  return A;
}

inline double perturbed_basin_radius(const AffineForm& af, double c_minus, double c_plus) {
  if (!(c_minus > 0.0 && c_minus <= c_plus)) throw std::invalid_argument("need 0 < C- <= C+");
  return std::min(m0_bound(af).radius, c_minus / (2.0 * c_plus));
}

// Random matrix with entries in [0,5] whose first vertex is strict Nash with
// invasion eigenvalue gap drawn from [0.1, 2].
inline Eigen::MatrixXd random_strict_nash_matrix(int n, std::mt19937_64& rng) {
  if (n < 2) throw std::invalid_argument("matrix size must be at least 2");
  std::uniform_real_distribution<double> entry(0.0, 5.0);
  std::uniform_real_distribution<double> gap(0.1, 2.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = entry(rng);
  double col_max = -std::numeric_limits<double>::infinity();
  for (int j = 1; j < n; ++j) col_max = std::max(col_max, A(j, 0));
  A(0, 0) = col_max + gap(rng);
  return A;
}

struct BasinReport {
  double M0 = 0.0;
  double radius = 0.0;
  bool certified = false;  // gralA_check passed on the corner region
  std::map<std::pair<int, int>, double> pairwise_barriers;
  McBasinResult mc;
};

inline BasinReport basin_report(const Eigen::MatrixXd& A, int pivot, int gral_samples,
                                int mc_samples, std::uint64_t seed, const McOptions& opts = {}) {
  AffineForm af = affine_form(A, pivot);
  M0Bound bound = m0_bound(af);
  BasinReport rep;
  rep.M0 = bound.M0;
  rep.radius = bound.radius;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  double check_radius = std::isfinite(bound.radius) ? bound.radius : 1.0;
  rep.certified = gralA_check(af.N, af.M, check_radius, gral_samples, rng).ok;
  for (int j = 0; j < A.rows(); ++j) {
    if (j == pivot) continue;
    PairwiseBarrier b = pairwise_barrier(A, pivot, j);
    rep.pairwise_barriers[{pivot, j}] = b.value;
  }
  if (mc_samples > 0) {
    BasinRegion region;
    region.radius = std::isfinite(bound.radius) ? bound.radius * (1.0 - 1e-3) : 1.0 - 1e-3;
    rep.mc = mc_basin_measure(A, pivot, region, mc_samples, opts, seed);
  }
  return rep;
}

}  // namespace ulb
