#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "spgs/minimize.hpp"
#include "spgs/radial.hpp"

using namespace spgs;

namespace {

const GridSpec& desk_grid() {
  static const GridSpec g(12.0, 32);
  return g;
}

// One shared V = 1 solve at the desk grid; several tests inspect it.
const GroundStateResult& unit_state() {
  static const GroundStateResult r = find_ground_state(Potential::constant(1.0), SolverConfig{}, desk_grid());
  return r;
}

}  // namespace

TEST(FindGroundState, ZeroInitialFieldIsRejected) {
  SolverConfig cfg;
  cfg.init = ScalarField(desk_grid());
  try {
    find_ground_state(Potential::constant(1.0), cfg, desk_grid());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_field);
  }
}

TEST(FindGroundState, ConfigIsValidated) {
  SolverConfig cfg;
  cfg.step = 0.0;
  EXPECT_THROW(find_ground_state(Potential::constant(1.0), cfg, desk_grid()), Error);
  cfg = SolverConfig{};
  cfg.p = 5.0;
  EXPECT_THROW(find_ground_state(Potential::constant(1.0), cfg, desk_grid()), Error);
}

TEST(FindGroundState, ConvergedStateLiesOnManifold) {
  const GroundStateResult& r = unit_state();
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LE(r.residual_norm, SolverConfig{}.tol);
  EXPECT_EQ(r.c_estimate, r.breakdown.I);
  EXPECT_LE(std::abs(r.breakdown.G), 1e-9 * r.breakdown.scale());
  EXPECT_LE(std::abs(r.breakdown.I - r.breakdown.J), 1e-9 * std::abs(r.breakdown.I));

  // re-evaluated from scratch rather than trusted from the solver
  const ReducedFunctional F(Potential::constant(1.0), desk_grid(), 4.0);
  const EnergyBreakdown fresh = F.breakdown(r.u);
  EXPECT_LE(std::abs(fresh.G), 1e-9 * fresh.scale());
  EXPECT_LE(F.residual(r.u).norm / l2_norm(r.u), SolverConfig{}.tol);
}

TEST(FindGroundState, TraceDescendsAfterWarmup) {
  const GroundStateResult& r = unit_state();
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_EQ(r.trace.front().iter, 0u);
  EXPECT_EQ(r.trace.front().step, 0.0);
  EXPECT_EQ(r.trace.size(), r.iterations + 1);
  // Accepted steps may sit on the rounding floor of I; allow that much.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * r.breakdown.scale();
  for (std::size_t k = 6; k < r.trace.size(); ++k)
    EXPECT_LE(r.trace[k].breakdown.I, r.trace[k - 1].breakdown.I + slack) << "iter " << k;
  for (const TraceRow& row : r.trace) EXPECT_LE(std::abs(row.breakdown.G), 1e-9 * row.breakdown.scale());
}

TEST(FindGroundState, MassStaysLocalized) {
  const GroundStateResult& r = unit_state();
  ASSERT_EQ(r.annulus_profile.size(), 12u);
  EXPECT_LT(worst_outer_decay(r.annulus_profile, desk_grid().half_width()), 0.5);
  for (const AnnulusShell& s : annulus_mass_profile(ScalarField(desk_grid()), ScalarField(desk_grid())))
    EXPECT_EQ(s.mass, 0.0);
}

TEST(FindGroundState, Deterministic) {
  const GroundStateResult b = find_ground_state(Potential::constant(1.0), SolverConfig{}, desk_grid());
  const GroundStateResult& a = unit_state();
  EXPECT_EQ(a.c_estimate, b.c_estimate);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(std::equal(a.u.values().begin(), a.u.values().end(), b.u.values().begin()));
}

TEST(FindGroundState, MultiStartKeepsTheLowestLevel) {
  SolverConfig cfg;
  cfg.starts = 3;
  cfg.seed = 5;
  const GroundStateResult r = find_ground_state(Potential::constant(1.0), cfg, desk_grid());
  EXPECT_LT(r.start, 3u);
  EXPECT_LE(r.c_estimate, unit_state().c_estimate * (1.0 + 1e-9));
}

TEST(FindGroundState, IterationLimitIsAStatus) {
  SolverConfig cfg;
  cfg.max_iters = 2;
  const GroundStateResult r = find_ground_state(Potential::constant(1.0), cfg, desk_grid());
  EXPECT_EQ(r.status, SolveStatus::max_iters);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_EQ(to_string(r.status), "max_iters");
}

TEST(GroundLevelConstant, IncreasesWithLambda) {
  const double c1 = unit_state().c_estimate;
  const double c2 = ground_level_constant(2.0, SolverConfig{}, desk_grid());
  EXPECT_LT(c1, c2);
  EXPECT_THROW(ground_level_constant(0.0, SolverConfig{}, desk_grid()), Error);
}

TEST(GroundLevelConstant, ContinuousAtOne) {
  const double c1 = unit_state().c_estimate;
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1.1, 1.01, 1.001}) {
    const double gap = std::abs(ground_level_constant(lambda, SolverConfig{}, desk_grid()) - c1);
    EXPECT_LT(gap, prev) << "lambda=" << lambda;
    prev = gap;
  }
}

// Self-consistency between n = 32 and n = 48 at L = 12.
TEST(GroundLevelConstant, ResolutionSelfConsistency) {
  const double coarse = unit_state().c_estimate;
  const double fine = ground_level_constant(1.0, SolverConfig{}, GridSpec(12.0, 48));
  RecordProperty("c_n32", std::to_string(coarse));
  RecordProperty("c_n48", std::to_string(fine));
  EXPECT_LE(std::abs(coarse - fine) / fine, 0.02);
}

TEST(MountainPass, RayLevelsDominateNehariLevel) {
  SolverConfig cfg;
  const Potential V = Potential::constant(1.0);
  const MountainPass few = mountain_pass_crosscheck(V, cfg, desk_grid(), 20, 9);
  const MountainPass many = mountain_pass_crosscheck(V, cfg, desk_grid(), 200, 9);
  EXPECT_NEAR(few.c_ray, few.c_nehari, 1e-9 * few.c_nehari);
  EXPECT_GE(few.c_ray_random, few.c_nehari - 1e-9 * few.c_nehari);
  EXPECT_LE(many.c_ray_random, few.c_ray_random);
  EXPECT_THROW(mountain_pass_crosscheck(V, cfg, desk_grid(), 5, 9), Error);
}

TEST(CompareWithVinf, ConstantPotentialHasNoStrictGap) {
  const VinfComparison cmp = compare_with_vinf(Potential::constant(1.0), SolverConfig{}, desk_grid());
  EXPECT_FALSE(cmp.strict);
  EXPECT_EQ(cmp.c, cmp.c_inf);
  EXPECT_EQ(cmp.margin, 0.0);
}

TEST(CompareWithVinf, AttractiveWellsSitBelowTheLimitLevel) {
  const GridSpec g(12.0, 48);
  const VinfComparison coulomb = compare_with_vinf(Potential::coulomb(1.0, 0.05, 1), SolverConfig{}, g);
  RecordProperty("coulomb_gap", std::to_string(coulomb.c_inf - coulomb.c));
  RecordProperty("coulomb_margin", std::to_string(coulomb.margin));
  EXPECT_TRUE(coulomb.strict);

  const Potential well = Potential::composite(Potential::constant(1.0), 0.2, GaussianProfile{1.0});
  const VinfComparison gaussian = compare_with_vinf(well, SolverConfig{}, g);
  RecordProperty("gaussian_gap", std::to_string(gaussian.c_inf - gaussian.c));
  RecordProperty("gaussian_margin", std::to_string(gaussian.margin));
  EXPECT_TRUE(gaussian.strict);
}

TEST(Symmetry, RadializeFixesRadialFields) {
  const GridSpec g(6.0, 32);
  const ScalarField u = ScalarField::sample(g, [](double x, double y, double z) {
    return std::exp(-(x * x + y * y + z * z) / 2.0);
  });
  EXPECT_LT(radial_asymmetry(u), 2e-3);
  const ScalarField lopsided = ScalarField::sample(g, [](double x, double y, double z) {
    return std::exp(-(4.0 * x * x + y * y + z * z) / 2.0);
  });
  EXPECT_GT(radial_asymmetry(lopsided), 0.1);
  const auto c = centroid(u);
  for (double v : c) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Symmetry, ConstantPotentialGroundStateIsRadial) {
  const GroundStateResult r = find_ground_state(Potential::constant(1.0), SolverConfig{}, GridSpec(12.0, 48));
  const double asym = radial_asymmetry(r.u);
  RecordProperty("asymmetry_n48", std::to_string(asym));
  EXPECT_LE(asym, 1e-2);
}

TEST(Refinement, HalvingTheGrid) {
  const GridSpec g(6.0, 32);
  const GridSpec fine = refined_grid(g);
  EXPECT_EQ(fine.points(), 48u);
  EXPECT_EQ(fine.half_width(), 6.0);
  EXPECT_EQ(refined_grid(GridSpec(6.0, 22)).points(), 34u);
}
