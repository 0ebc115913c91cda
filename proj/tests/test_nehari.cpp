#include <gtest/gtest.h>

#include <cmath>

#include "spgs/nehari.hpp"
#include "spgs/random_fields.hpp"
#include "spgs/validation.hpp"

using namespace spgs;

namespace {

// Plain bisection on t^3 - t^2 - 1, independent of the fiber solver.
double bisect_cubic() {
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid - mid * mid - 1.0 > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(SolveFiber, CubicAgainstBisectionOracle) {
  const double oracle = bisect_cubic();
  EXPECT_NEAR(oracle, 1.4655712, 1e-7);
  const FiberRoot root = solve_fiber(1.0, 1.0, 1.0, 4.0);
  EXPECT_NEAR(root.t_bar, oracle, 1e-12);
  EXPECT_LE(root.bracket.first, root.t_bar);
  EXPECT_GE(root.bracket.second, root.t_bar);
  EXPECT_GT(root.iterations, 0);
}

TEST(SolveFiber, NoNonlocalTermClosedForm) {
  EXPECT_NEAR(solve_fiber(1.0, 0.0, 1.0, 4.0).t_bar, 1.0, 1e-13);
  for (double p : {3.2, 4.0, 4.8}) {
    EXPECT_NEAR(solve_fiber(2.0, 0.0, 0.5, p).t_bar, std::pow(4.0, 1.0 / (p - 1.0)), 1e-12) << p;
  }
}

TEST(SolveFiber, ExtremeMagnitudesStillBracket) {
  for (double scale : {1e-8, 1e-3, 1e3, 1e8}) {
    const FiberRoot r = solve_fiber(scale, 1.0, 1.0, 4.5);
    const double s = r.t_bar * r.t_bar;
    const double q = scale + s - std::pow(s, 1.75);
    EXPECT_LE(std::abs(q), 1e-11 * (scale + s + std::pow(s, 1.75))) << scale;
  }
}

TEST(SolveFiber, Errors) {
  try {
    solve_fiber(1.0, 1.0, 0.0, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_field);
  }
  try {
    solve_fiber(-0.5, 1.0, 1.0, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_coercive);
  }
  EXPECT_THROW(solve_fiber(1.0, 1.0, 1.0, 5.5), Error);
}

TEST(NehariProject, ZeroFieldIsRejected) {
  const GridSpec g(3.0, 8);
  try {
    nehari_project(ScalarField(g), Potential::constant(1.0), 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_field);
  }
}

TEST(NehariProject, FreshBreakdownLiesOnManifold) {
  const GridSpec g(5.0, 16);
  const ReducedFunctional F(Potential::coulomb(1.0, 0.1, 1), g, 4.0);
  RandomFieldFamily fam(31);
  for (int t = 0; t < 20; ++t) {
    const FiberScaling fs = nehari_project(fam.next(g), F);
    EXPECT_GT(fs.t_bar, 0.0);
    const EnergyBreakdown fresh = F.breakdown(fs.field);
    EXPECT_LE(std::abs(fresh.G), nehari_tolerance * fresh.scale());
    EXPECT_LE(std::abs(fresh.I - fresh.J), 1e-9 * std::abs(fresh.I));
  }
}

TEST(NehariProject, RayMaximumOnFiftyProjections) {
  const GridSpec g(4.0, 16);
  const ReducedFunctional F(Potential::constant(1.0), g, 4.0);
  RandomFieldFamily fam(32);
  for (int t = 0; t < 50; ++t) {
    const ScalarField u = fam.next(g);
    const FiberScaling fs = nehari_project(u, F);
    EXPECT_TRUE(ray_max_check(u, fs, F, 41)) << t;
  }
}

TEST(NehariProject, PerturbedScalingIsDetected) {
  const GridSpec g(4.0, 16);
  const ReducedFunctional F(Potential::constant(1.0), g, 4.0);
  RandomFieldFamily fam(33);
  for (int t = 0; t < 5; ++t) {
    const ScalarField u = fam.next(g);
    const FiberScaling fs = nehari_project(u, F);
    EXPECT_FALSE(ray_max_check(u, 1.01 * fs.t_bar, F, 401)) << t;
  }
}

TEST(NehariProject, FixedPointAndScaling) {
  const GridSpec g(4.0, 16);
  const ReducedFunctional F(Potential::constant(1.0), g, 3.6);
  RandomFieldFamily fam(34);
  for (int t = 0; t < 10; ++t) {
    const ScalarField u = fam.next(g);
    const FiberScaling fs = nehari_project(u, F);
    EXPECT_NEAR(nehari_project(fs.field, F).t_bar, 1.0, 1e-10);
    for (double c : {0.1, 3.0, 40.0}) EXPECT_NEAR(nehari_project(c * u, F).t_bar * c / fs.t_bar, 1.0, 1e-10);
  }
}

TEST(NehariProject, SingleSignChangeAlongFiber) {
  const GridSpec g(4.0, 16);
  const ReducedFunctional F(Potential::coulomb(1.0, 0.05, 2), g, 4.4);
  RandomFieldFamily fam(35);
  for (int t = 0; t < 20; ++t) {
    const ScalarField u = fam.next(g);
    const FiberScaling fs = nehari_project(u, F);
    EXPECT_EQ(fiber_sign_changes(F.breakdown(u), fs.t_bar * fs.t_bar), 1);
  }
}

TEST(NehariProject, ScalingIsLipschitzUnderPerturbation) {
  const GridSpec g(4.0, 16);
  const ReducedFunctional F(Potential::constant(1.0), g, 4.0);
  RandomFieldFamily fam(36);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const ScalarField u = fam.next(g);
    const ScalarField v = fam.next(g);
    const double base = nehari_project(u, F).t_bar;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      ScalarField w = u;
      w.axpy(eps * l2_norm(u) / l2_norm(v), v);
      const double dt = std::abs(nehari_project(w, F).t_bar - base) / base;
      worst = std::max(worst, dt / eps);
    }
  }
  RecordProperty("lipschitz_ratio", std::to_string(worst));
  EXPECT_LT(worst, 10.0);
}

TEST(ManifoldFloor, PositiveAndStableUnderDoubling) {
  const GridSpec g(5.0, 16);
  const double f50 = manifold_floor_check(Potential::constant(1.0), g, 4.0, 50, 37);
  const double f100 = manifold_floor_check(Potential::constant(1.0), g, 4.0, 100, 37);
  EXPECT_GT(f50, 0.0);
  EXPECT_LE(f100, f50);
  EXPECT_GT(f100, 0.5 * f50);
  EXPECT_GT(manifold_floor_check(Potential::coulomb(1.0, 0.05, 2), g, 4.0, 50, 37), 0.0);
  EXPECT_THROW(manifold_floor_check(Potential::constant(1.0), g, 4.0, 9, 37), Error);
}
