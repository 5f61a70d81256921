#include <gtest/gtest.h>

#include <cmath>

#include "galtrap/field.hpp"
#include "galtrap/grid_oracle.hpp"
#include "galtrap/io.hpp"
#include "galtrap/mode.hpp"
#include "galtrap/nonlinear.hpp"
#include "galtrap/random.hpp"

using namespace galtrap;

namespace {

SpectralField random_ball_field(int dim, double radius, std::uint64_t seed, double D = 1.0, double gamma = 2.0) {
  Rng rng(seed);
  return random_field(ModeSet::ball(dim, radius), PowerEnvelope{D, gamma}, rng);
}

double max_component_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int d = 0; d < 3; ++d) m = std::max(m, std::abs(a[i][d] - b[i][d]));
  return m;
}

SpectralField single_pair(int dim, const Mode& k0, const CVec& v) {
  auto set = ModeSet::from_modes(dim, {k0, -k0});
  SpectralField u(set);
  u.set_pair(k0, v);
  return u;
}

}  // namespace

TEST(Leray, ParallelVectorVanishes) {
  const CVec r = leray_project(Mode(1, 0), CVec{1.0, 0.0, 0.0});
  EXPECT_EQ(r[0], cplx(0.0));
  EXPECT_EQ(r[1], cplx(0.0));
}

TEST(Leray, OrthogonalVectorUnchanged) {
  const CVec r = leray_project(Mode(1, 0), CVec{0.0, 1.0, 0.0});
  EXPECT_EQ(r[0], cplx(0.0));
  EXPECT_EQ(r[1], cplx(1.0));
}

TEST(Leray, DiagonalMode) {
  const CVec r = leray_project(Mode(1, 1), CVec{1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(r[0].real(), 0.5);
  EXPECT_DOUBLE_EQ(r[1].real(), -0.5);
}

TEST(ModeSet, BallIsSymmetricAndExcludesZero) {
  for (int dim : {2, 3}) {
    auto s = ModeSet::ball(dim, 4.0);
    for (std::size_t i = 0; i < s->size(); ++i) {
      EXPECT_FALSE((*s)[i].is_zero());
      EXPECT_LE((*s)[i].norm2(), 16);
      const int j = s->conj_index(i);
      ASSERT_GE(j, 0);
      EXPECT_EQ((*s)[static_cast<std::size_t>(j)], -(*s)[i]);
    }
    EXPECT_EQ(s->representatives().size() * 2, s->size());
    EXPECT_TRUE(std::is_sorted(s->begin(), s->end()));
  }
  EXPECT_EQ(ModeSet::ball(2, 1.0)->size(), 4u);
  EXPECT_EQ(ModeSet::ball(3, 1.0)->size(), 6u);
}

TEST(ModeSet, RejectsAsymmetricAndZero) {
  EXPECT_THROW(ModeSet::from_modes(2, {Mode(1, 0)}), InvariantError);
  EXPECT_THROW(ModeSet::from_modes(2, {Mode(0, 0)}), ParameterError);
  EXPECT_NO_THROW(ModeSet::from_modes(2, {Mode(1, 2), Mode(-1, -2)}));
}

TEST(ModeSet, NonCanonicalShapes) {
  auto sq = ModeSet::square(2, 2);
  EXPECT_EQ(sq->size(), 24u);
  auto ann = ModeSet::annulus(2, 1.0, 2.0);
  for (const auto& m : *ann) {
    EXPECT_GT(m.norm(), 1.0);
    EXPECT_LE(m.norm(), 2.0);
  }
  EXPECT_TRUE(ann->subset_of(*ModeSet::ball(2, 2.0)));
}

TEST(RandomField, IsAdmissible) {
  for (int dim : {2, 3}) {
    const auto u = random_ball_field(dim, 5.0, 11);
    EXPECT_NO_THROW(u.check_invariants());
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_LE(norm(u[i]), 1.0 / std::pow(u.modes()[i].norm(), 2.0) + 1e-15);
  }
}

TEST(Nonlinear, ZeroFieldGivesZero) {
  auto set = ModeSet::ball(2, 4.0);
  const auto n = nonlinear_term(SpectralField::zero(set), set);
  EXPECT_EQ(n.max_modulus(), 0.0);
  EXPECT_EQ(nonlinear_term_grid(SpectralField::zero(set), set).max_modulus(), 0.0);
}

TEST(Nonlinear, SingleConjugatePairGivesZero) {
  for (int dim : {2, 3}) {
    const Mode k0 = dim == 2 ? Mode(2, 1) : Mode(1, 2, -1);
    Rng rng(3);
    const auto u = single_pair(dim, k0, 1.7 * random_direction(k0, rng));
    auto target = ModeSet::ball(dim, 5.0);
    EXPECT_LT(nonlinear_term(u, target).max_modulus(), 1e-14);
    EXPECT_LT(nonlinear_term_grid(u, target).max_modulus(), 1e-14);
  }
}

TEST(Nonlinear, OutputIsIncompressibleAndReal) {
  for (int dim : {2, 3}) {
    const auto u = random_ball_field(dim, dim == 2 ? 6.0 : 3.0, 5, 1.0, 1.0);
    const auto n = nonlinear_term(u, u.modeset());
    EXPECT_LT(n.incompressibility_defect(), 1e-13 * (1.0 + n.max_modulus()));
    EXPECT_EQ(n.reality_defect(), 0.0);
  }
}

TEST(Nonlinear, MatchesGridOracle2D) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto u = random_ball_field(2, 4.0, seed, 1.0, 1.0);
    const auto a = nonlinear_term(u, u.modeset());
    const auto b = nonlinear_term_grid(u, u.modeset());
    EXPECT_LT(max_component_diff(a, b), 1e-10);
    EXPECT_GT(a.max_modulus(), 1e-3);
  }
}

TEST(Nonlinear, MatchesGridOracleOnLargerTarget) {
  // Target bigger than the source: modes outside the source still receive
  // triad contributions.
  const auto u = random_ball_field(2, 3.0, 9, 1.0, 1.0);
  auto target = ModeSet::ball(2, 6.0);
  EXPECT_LT(max_component_diff(nonlinear_term(u, target), nonlinear_term_grid(u, target)), 1e-10);
}

TEST(Nonlinear, MatchesGridOracle3D) {
  const auto u = random_ball_field(3, 3.0, 17, 1.0, 1.0);
  EXPECT_LT(max_component_diff(nonlinear_term(u, u.modeset()), nonlinear_term_grid(u, u.modeset())), 1e-10);
}

TEST(GridOracle, RejectsAliasingResolution) {
  const auto u = random_ball_field(2, 4.0, 1);
  const int need = alias_free_resolution(u.modes(), u.modes());
  EXPECT_EQ(need, 13);
  EXPECT_THROW(nonlinear_term_grid(u, u.modeset(), need - 1), ResolutionError);
  // A finer grid is also alias-free and agrees.
  const auto a = nonlinear_term_grid(u, u.modeset(), need);
  const auto b = nonlinear_term_grid(u, u.modeset(), need + 4);
  EXPECT_LT(max_component_diff(a, b), 1e-11);
}

TEST(GridOracle, TwoRMinimumWouldAlias) {
  // 2R+1 points alias: the result differs from the exact convolution.
  const auto u = random_ball_field(2, 4.0, 2, 1.0, 1.0);
  const auto exact = nonlinear_term(u, u.modeset());
  const PhysicalGrid coarse(2, 9, 4);
  const auto w = advection_on_grid(coarse, u);
  double diff = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const CVec c = -1.0 * leray_project(u.modes()[i], coarse.coefficient(w, u.modes()[i]));
    diff = std::max(diff, norm(c - exact[i]));
  }
  EXPECT_GT(diff, 1e-6);
}

TEST(Rhs, ZeroInputs) {
  auto set = ModeSet::ball(2, 3.0);
  const auto r = rhs(SpectralField::zero(set), ForceField::zero(2), PhysicsParams{0.7, 2}, set);
  EXPECT_EQ(r.max_modulus(), 0.0);
}

TEST(Rhs, SinglePairIsPureLinearDecay) {
  const double a = 0.8, nu = 0.3;
  const auto u = single_pair(2, Mode(1, 0), CVec{0.0, a, 0.0});
  const auto r = rhs(u, ForceField::zero(2), PhysicsParams{nu, 2}, u.modeset());
  const CVec rk = r.at(Mode(1, 0));
  EXPECT_DOUBLE_EQ(rk[0].real(), 0.0);
  EXPECT_DOUBLE_EQ(rk[1].real(), -nu * a);
  EXPECT_DOUBLE_EQ(rk[1].imag(), 0.0);
}

TEST(Rhs, SinglePairLinearForAnyMode) {
  for (int dim : {2, 3}) {
    const Mode k0 = dim == 2 ? Mode(3, -2) : Mode(2, 0, 1);
    Rng rng(8);
    const auto u = single_pair(dim, k0, random_direction(k0, rng));
    const double nu = 1.3;
    const auto r = rhs(u, ForceField::zero(dim), PhysicsParams{nu, dim}, u.modeset());
    for (std::size_t i = 0; i < u.size(); ++i)
      EXPECT_LT(norm(r[i] - (-nu * double(u.modes()[i].norm2())) * u[i]), 1e-15);
  }
}

TEST(Pressure, ZeroForZeroInputs) {
  auto set = ModeSet::ball(2, 3.0);
  const auto p = pressure_coefficients(SpectralField::zero(set), ForceField::zero(2));
  for (auto v : p.p) EXPECT_EQ(v, cplx(0.0));
}

TEST(Pressure, SinglePairHasNoPressure) {
  Rng rng(4);
  const auto u = single_pair(2, Mode(1, 2), random_direction(Mode(1, 2), rng));
  const auto p = pressure_coefficients(u, ForceField::zero(2));
  for (auto v : p.p) EXPECT_EQ(v, cplx(0.0));
}

TEST(Pressure, BalancesNonSolenoidalAdvectionOnGrid) {
  const auto u = random_ball_field(2, 4.0, 21, 1.0, 1.0);
  Rng rng(22);
  // Force with a gradient part so (I - P_k) f_k is exercised.
  auto fset = ModeSet::ball(2, 2.0);
  SpectralField fc(fset);
  for (int r : fset->representatives()) {
    const Mode& k = (*fset)[static_cast<std::size_t>(r)];
    fc.set_pair(k, CVec{cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal()), 0.0});
  }
  const ForceField f(fc);
  const auto p = pressure_coefficients(u, f);
  const PhysicalGrid grid(2, alias_free_resolution(u.modes(), u.modes()), u.modes().bound());
  const auto w = advection_on_grid(grid, u);
  double worst = 0.0;
  for (const auto& k : u.modes()) {
    const CVec wk = grid.coefficient(w, k);
    const CVec fk = f.coeffs().at(k);
    // Momentum balance along k: -(I-P)w_k - i k p_k + (I-P) f_k = 0.
    CVec res = (fk - leray_project(k, fk)) - (wk - leray_project(k, wk));
    for (int d = 0; d < 2; ++d) res[d] -= cplx(0.0, 1.0) * double(k.c[d]) * p.at(k);
    worst = std::max(worst, norm(res));
  }
  EXPECT_LT(worst, 1e-8);
  // Pressure of a real field is real: p_{-k} = conj(p_k).
  for (const auto& k : u.modes()) EXPECT_EQ(p.at(-k), std::conj(p.at(k)));
}

TEST(Enstrophy, Examples) {
  auto set = ModeSet::ball(2, 3.0);
  EXPECT_EQ(enstrophy(SpectralField::zero(set)), 0.0);
  const double a = 0.37;
  const auto u = single_pair(2, Mode(1, 0), CVec{0.0, a, 0.0});
  EXPECT_DOUBLE_EQ(enstrophy(u), 2.0 * a * a);
}

TEST(Enstrophy, MatchesExtendedPrecisionSum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto u = random_ball_field(seed % 2 ? 3 : 2, 6.0, seed, 2.0, 1.5);
    long double ref = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
      long double m = 0.0L;
      for (int d = 0; d < 3; ++d)
        m += (long double)u[i][d].real() * u[i][d].real() + (long double)u[i][d].imag() * u[i][d].imag();
      ref += (long double)u.modes()[i].norm2() * m;
    }
    EXPECT_LT(std::abs((long double)enstrophy(u) - ref) / ref, 1e-13L);
    EXPECT_GT(enstrophy(u), 0.0);
  }
}

TEST(Enstrophy, InvariantUnderConjugateRelabeling) {
  const auto u = random_ball_field(2, 5.0, 31);
  SpectralField v(u.modeset());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = conj(u[static_cast<std::size_t>(u.modes().conj_index(i))]);
  EXPECT_DOUBLE_EQ(enstrophy(u), enstrophy(v));
}

TEST(ForceNorm, Examples) {
  EXPECT_EQ(force_enstrophy_norm(ForceField::zero(2)), 0.0);
  const double c = 0.9;
  const ForceField f(single_pair(2, Mode(1, 0), CVec{0.0, c, 0.0}));
  EXPECT_DOUBLE_EQ(force_enstrophy_norm(f), std::sqrt(2.0) * c);
  EXPECT_EQ(f.cutoff(), 1);
}

TEST(ForceNorm, MatchesExtendedPrecisionSum) {
  const ForceField f(random_ball_field(2, 4.0, 44, 3.0, 0.5));
  long double ref = 0.0L;
  const auto& c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) ref += (long double)c.modes()[i].norm2() * norm2(c[i]);
  EXPECT_LT(std::abs((long double)force_enstrophy_norm(f) - std::sqrt(ref)) / std::sqrt(ref), 1e-13L);
  EXPECT_EQ(f.cutoff(), 4);
}

TEST(Serialization, JsonAndCsvRoundTripBitIdentical) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto u = random_ball_field(seed % 2 ? 3 : 2, 3.0, seed, 1.0, 0.3);
    const auto j = field_from_json(json::parse(field_to_json(u).dump()));
    EXPECT_TRUE(j == u);
    const auto c = field_from_csv(field_to_csv(u));
    EXPECT_TRUE(c == u);
  }
}

TEST(Serialization, RejectsNonSolenoidalNamingMode) {
  json j = json::parse(R"({"dimension":2,"modes":[[[1,0],[1.0,0.0],[0.0,0.0]],[[-1,0],[1.0,0.0],[0.0,0.0]]]})");
  try {
    field_from_json(j);
    FAIL() << "expected rejection";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("(-1,0)"), std::string::npos);
  }
}

TEST(Serialization, MissingConjugateNeedsSymmetrize) {
  json j = json::parse(R"({"dimension":2,"modes":[[[1,0],[0.0,0.5],[0.0,0.25]]]})");
  EXPECT_THROW(field_from_json(j), InvariantError);
  const auto u = field_from_json(j, true);
  EXPECT_EQ(u.size(), 2u);
  EXPECT_EQ(u.at(Mode(-1, 0))[1], cplx(0.5, -0.25));
}
