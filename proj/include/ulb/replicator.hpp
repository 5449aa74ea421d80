#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "payoff.hpp"

namespace ulb {

using SimplexPoint = Eigen::VectorXd;

inline void check_simplex(const SimplexPoint& x, double tol = 1e-9) {
  if (x.size() < 1) throw std::invalid_argument("empty point");
  if (x.minCoeff() < -tol) throw std::invalid_argument("negative population share");
  if (std::abs(x.sum() - 1.0) > tol) throw std::invalid_argument("shares do not sum to 1");
}

inline Eigen::VectorXd vector_field(const Eigen::MatrixXd& A, const SimplexPoint& x) {
  Eigen::VectorXd Ax = A * x;
  double mean = x.dot(Ax);
  return (x.array() * (Ax.array() - mean)).matrix();
}

inline Eigen::VectorXd vector_field(const PayoffMatrix& A, const SimplexPoint& x) {
  return vector_field(A.A, x);
}

// Dynamics in the coordinates of the non-pivot shares: x_j' = x_j[(N + Mx)_j - ...].
// N_j = a_{j1} - a_{11}, M_jk = a_{jk} - a_{1k} + a_{11} - a_{j1} with the pivot
// relabeled as strategy 1. `ordering` lists the original indices of the
// non-pivot strategies, sorted so that -N is non-increasing.
struct AffineForm {
  Eigen::VectorXd N;
  Eigen::MatrixXd M;
  std::vector<int> ordering;
  int pivot = 0;
  bool pivot_strict_nash = false;
};

inline AffineForm affine_form(const Eigen::MatrixXd& A, int pivot) {
  int n = static_cast<int>(A.rows());
  if (A.cols() != n || n < 2) throw std::invalid_argument("square matrix of size >= 2 required");
  if (pivot < 0 || pivot >= n) throw std::invalid_argument("pivot out of range");
  std::vector<int> rest;
  for (int j = 0; j < n; ++j)
    if (j != pivot) rest.push_back(j);
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
    return (A(pivot, pivot) - A(a, pivot)) > (A(pivot, pivot) - A(b, pivot));
  });
  int m = n - 1;
  AffineForm out;
  out.pivot = pivot;
  out.ordering = rest;
  out.N.resize(m);
  out.M.resize(m, m);
  for (int j = 0; j < m; ++j) {
    int rj = rest[static_cast<std::size_t>(j)];
    out.N(j) = A(rj, pivot) - A(pivot, pivot);
    for (int k = 0; k < m; ++k) {
      int rk = rest[static_cast<std::size_t>(k)];
      out.M(j, k) = A(rj, rk) - A(pivot, rk) + A(pivot, pivot) - A(rj, pivot);
    }
  }
  out.pivot_strict_nash = (out.N.size() == 0) || (out.N.maxCoeff() < 0.0);
  return out;
}

inline AffineForm affine_form(const PayoffMatrix& A, int pivot) {
  return affine_form(A.A, pivot);
}

inline std::vector<double> vertex_eigenvalues(const Eigen::MatrixXd& A, int i) {
  std::vector<double> out;
  for (int j = 0; j < A.rows(); ++j)
    if (j != i) out.push_back(A(j, i) - A(i, i));
  return out;
}

struct PairwiseBarrier {
  double value;   // share of strategy j at the edge fixed point
  bool interior;  // false when the edge has no interior fixed point
};

inline PairwiseBarrier pairwise_barrier(const Eigen::MatrixXd& A, int i, int j) {
  double num = A(i, i) - A(j, i);
  double den = num + A(j, j) - A(i, j);
  if (den <= 0.0 || num <= 0.0 || num >= den) return {1.0, false};
  return {num / den, true};
}

enum class Terminal { converged, max_time, left_region, nan_failure };

struct Trajectory {
  std::vector<double> times;
  std::vector<SimplexPoint> points;
  Terminal terminal = Terminal::max_time;
  int vertex = -1;              // target vertex when terminal == converged
  double monotone_violation = 0.0;  // largest observed increase of the watched sum
  long long steps = 0;
};

struct IntegrateOptions {
  double step = 0.01;
  double vertex_tol = 1e-6;
  double clip_tol = 1e-9;
  int record_stride = 0;   // 0: keep only the endpoints
  int monitor_pivot = -1;  // >= 0: watch sum of the non-pivot shares
};

namespace detail {

inline int near_vertex(const SimplexPoint& x, double tol) {
  int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double dist = (1.0 - x(i)) + (x.sum() - x(i));  // L1 distance to e_i
    if (dist < tol) return i;
  }
  return -1;
}

template <class Field>
Trajectory integrate_field(Field&& field, const SimplexPoint& x0, double t_max,
                           const IntegrateOptions& opts) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  check_simplex(x0, opts.clip_tol);
  Trajectory out;
  SimplexPoint x = x0;
  x = x.cwiseMax(0.0);
  x /= x.sum();
  double t = 0.0;
  double watched = std::numeric_limits<double>::infinity();
  if (opts.monitor_pivot >= 0) watched = x.sum() - x(opts.monitor_pivot);
  out.times.push_back(t);
  out.points.push_back(x);
  int v0 = near_vertex(x, opts.vertex_tol);
  if (v0 >= 0) {
    out.terminal = Terminal::converged;
    out.vertex = v0;
    return out;
  }
  double h = opts.step;
  long long max_steps = static_cast<long long>(std::ceil(t_max / h));
  for (long long k = 0; k < max_steps; ++k) {
    Eigen::VectorXd k1 = field(x);
    Eigen::VectorXd k2 = field(x + 0.5 * h * k1);
    Eigen::VectorXd k3 = field(x + 0.5 * h * k2);
    Eigen::VectorXd k4 = field(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      out.terminal = Terminal::nan_failure;
      break;
    }
    x = x.cwiseMax(0.0);
    x /= x.sum();
    t += h;
    ++out.steps;
    if (opts.monitor_pivot >= 0) {
      double now = x.sum() - x(opts.monitor_pivot);
      if (now > watched)
        out.monotone_violation = std::max(out.monotone_violation, now - watched);
      watched = now;
    }
    if (opts.record_stride > 0 && out.steps % opts.record_stride == 0) {
      out.times.push_back(t);
      out.points.push_back(x);
    }
    int v = near_vertex(x, opts.vertex_tol);
    if (v >= 0) {
      out.terminal = Terminal::converged;
      out.vertex = v;
      break;
    }
  }
  if (out.times.back() != t) {
    out.times.push_back(t);
    out.points.push_back(x);
  }
  return out;
}

}  // namespace detail

inline Trajectory integrate(const Eigen::MatrixXd& A, const SimplexPoint& x0, double t_max,
                            const IntegrateOptions& opts = {}) {
  return detail::integrate_field([&](const SimplexPoint& x) { return vector_field(A, x); },
                                 x0, t_max, opts);
}

inline Trajectory integrate(const PayoffMatrix& A, const SimplexPoint& x0, double t_max,
                            const IntegrateOptions& opts = {}) {
  return integrate(A.A, x0, t_max, opts);
}

// Replicator field rescaled componentwise by H, with declared bounds on H.
using GrowthModifier = std::function<Eigen::VectorXd(const SimplexPoint&)>;

inline Eigen::VectorXd perturbed_vector_field(const Eigen::MatrixXd& A, const GrowthModifier& H,
                                              double c_minus, double c_plus,
                                              const SimplexPoint& x) {
  if (!(c_minus > 0.0 && c_minus <= c_plus)) throw std::invalid_argument("need 0 < C- <= C+");
  Eigen::VectorXd h = H(x);
  if (h.size() != x.size()) throw std::invalid_argument("modifier dimension mismatch");
  if (h.minCoeff() < c_minus - 1e-12 || h.maxCoeff() > c_plus + 1e-12)
    throw std::invalid_argument("modifier value outside declared bounds");
  return (vector_field(A, x).array() * h.array()).matrix();
}

inline Trajectory integrate_perturbed(const Eigen::MatrixXd& A, const GrowthModifier& H,
                                      double c_minus, double c_plus, const SimplexPoint& x0,
                                      double t_max, const IntegrateOptions& opts = {}) {
  return detail::integrate_field(
      [&](const SimplexPoint& x) { return perturbed_vector_field(A, H, c_minus, c_plus, x); },
      x0, t_max, opts);
}

}  // namespace ulb
