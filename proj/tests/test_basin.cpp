#include <doctest.h>

#include <random>

#include "ulb/basin.hpp"

using namespace ulb;

namespace {
Eigen::MatrixXd grim_alld_matrix() {
  Eigen::MatrixXd A(2, 2);
  A << 3.0, 0.9, 1.3, 1.0;
  return A;
}
}  // namespace

TEST_CASE("corner bound fixture") {
  AffineForm af = affine_form(grim_alld_matrix(), 0);
  M0Bound b = m0_bound(af);
  CHECK(b.M0 == doctest::Approx(3.6 / 1.7).epsilon(1e-12));
  CHECK(b.radius == doctest::Approx(1.7 / 3.6).epsilon(1e-12));
  // Certified radius never exceeds the pairwise barrier.
  PairwiseBarrier barrier = pairwise_barrier(grim_alld_matrix(), 0, 1);
  CHECK(b.radius <= barrier.value);
  // Non-strict-Nash pivots are rejected.
  Eigen::MatrixXd B(2, 2);
  B << 1.0, 2.0, 1.5, 0.5;
  CHECK_THROWS(m0_bound(affine_form(B, 0)));
}

TEST_CASE("negativity check on the certified region") {
  AffineForm af = affine_form(grim_alld_matrix(), 0);
  M0Bound b = m0_bound(af);
  std::mt19937_64 rng(5);
  GralACheck ok = gralA_check(af.N, af.M, b.radius, 20000, rng);
  CHECK(ok.ok);
  // Pushing the radius past the barrier admits points with nonnegative form.
  GralACheck bad = gralA_check(af.N, af.M, (1.7 / 1.8) * 1.05, 20000, rng);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.witness.has_value());
  double x = (*bad.witness)(0);
  CHECK(af.N(0) * x + af.M(0, 0) * x * x >= 0.0);
  // Negative semidefinite interaction passes at any radius.
  Eigen::VectorXd n1(1);
  n1 << -1.0;
  Eigen::MatrixXd m1(1, 1);
  m1 << -2.0;
  CHECK(gralA_check(n1, m1, 50.0, 5000, rng).ok);
}

TEST_CASE("monte carlo basin of the bistable edge") {
  Eigen::MatrixXd A = grim_alld_matrix();
  BasinRegion full;
  full.full_simplex = true;
  McOptions opts;
  McBasinResult res = mc_basin_measure(A, 0, full, 600, opts, 42);
  CHECK(res.excluded == 0);
  // The true basin boundary sits at invader share 1.7/1.8.
  CHECK(res.fraction == doctest::Approx(1.7 / 1.8).epsilon(0.05));
  // Inside the certified corner everything converges to the pivot.
  BasinRegion corner;
  corner.radius = 1.7 / 3.6;
  McBasinResult inner = mc_basin_measure(A, 0, corner, 200, opts, 43);
  CHECK(inner.fraction == doctest::Approx(1.0));
  CHECK(inner.converged_other == 0);
}

TEST_CASE("sampling respects the requested region") {
  std::mt19937_64 rng(9);
  BasinRegion corner;
  corner.radius = 0.2;
  for (int k = 0; k < 500; ++k) {
    SimplexPoint x = sample_start(4, 1, corner, rng);
    CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.sum() - x(1) <= 0.2 + 1e-12);
  }
}

TEST_CASE("deterministic reruns") {
  Eigen::MatrixXd A = grim_alld_matrix();
  BasinRegion full;
  full.full_simplex = true;
  McOptions opts;
  McBasinResult r1 = mc_basin_measure(A, 0, full, 100, opts, 7);
  McBasinResult r2 = mc_basin_measure(A, 0, full, 100, opts, 7);
  CHECK(r1.converged_pivot == r2.converged_pivot);
  CHECK(r1.fraction == r2.fraction);
}

TEST_CASE("three-strategy escape construction") {
  CHECK_THROWS(counterexample_matrix(0.0));
  CHECK_THROWS(counterexample_matrix(0.2));
  for (double lambda : {0.02, 0.05}) {
    Eigen::MatrixXd A = counterexample_matrix(lambda);
    CHECK(A.minCoeff() > 0.0);
    CHECK(A.maxCoeff() <= 100.0 + 1e-9);
    // Pivot attracts, the other two vertices repel.
    for (double ev : vertex_eigenvalues(A, 0)) CHECK(ev < 0.0);
    for (double ev : vertex_eigenvalues(A, 1)) CHECK(ev > 0.0);
    for (double ev : vertex_eigenvalues(A, 2)) CHECK(ev > 0.0);
    AffineForm af = affine_form(A, 0);
    CHECK(af.N(0) == doctest::Approx(af.N(1)).epsilon(1e-12));
    CHECK(af.M(0, 0) / af.N(0) == doctest::Approx(2.0).epsilon(1e-9));
    // Both edges flow to the pivot from their interiors.
    for (int j : {1, 2}) {
      CHECK_FALSE(pairwise_barrier(A, 0, j).interior);
      Eigen::MatrixXd E(2, 2);
      E << A(0, 0), A(0, j), A(j, 0), A(j, j);
      SimplexPoint x0(2);
      x0 << 0.02, 0.98;
      Trajectory t = integrate(E, x0, 2000.0);
      CHECK(t.vertex == 0);
    }
    // The marked symmetric point escapes the pivot.
    double m = lambda / (1.0 + lambda);
    SimplexPoint x0(3);
    x0 << 1.0 - 2.0 * m, m, m;
    Trajectory t = integrate(A, x0, 600.0);
    bool went_elsewhere = (t.terminal == Terminal::converged && t.vertex != 0) ||
                          (t.terminal == Terminal::max_time && t.points.back()(0) < 0.1);
    CHECK(went_elsewhere);
  }
}

TEST_CASE("perturbed basin radius") {
  AffineForm af = affine_form(grim_alld_matrix(), 0);
  CHECK(perturbed_basin_radius(af, 1.0, 1.5) ==
        doctest::Approx(std::min(1.7 / 3.6, 1.0 / 3.0)).epsilon(1e-12));
  CHECK(perturbed_basin_radius(af, 1.0, 1.0) == doctest::Approx(1.7 / 3.6).epsilon(1e-12));
  CHECK_THROWS(perturbed_basin_radius(af, 2.0, 1.0));
}

TEST_CASE("random strict nash ensemble members are valid") {
  std::mt19937_64 rng(123);
  for (int k = 0; k < 50; ++k) {
    int n = 3 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd A = random_strict_nash_matrix(n, rng);
    AffineForm af = affine_form(A, 0);
    CHECK(af.pivot_strict_nash);
    CHECK(m0_bound(af).radius > 0.0);
  }
}

TEST_CASE("basin report combines the pieces") {
  BasinReport rep = basin_report(grim_alld_matrix(), 0, 5000, 200, 17);
  CHECK(rep.M0 == doctest::Approx(3.6 / 1.7).epsilon(1e-12));
  CHECK(rep.certified);
  CHECK(rep.pairwise_barriers.at({0, 1}) == doctest::Approx(1.7 / 1.8).epsilon(1e-12));
  CHECK(rep.mc.fraction == doctest::Approx(1.0));
}
