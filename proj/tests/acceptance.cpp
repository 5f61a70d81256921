// Acceptance checks: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "galtrap/cli.hpp"
#include "galtrap/galtrap.hpp"

using namespace galtrap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const PhysicsParams P2{1.0, 2};
const PhysicsParams P3{1.0, 3};

ForceField region_force() {
  SpectralField f(ModeSet::ball(2, 1.0));
  f.set_pair(Mode(1, 0), CVec{0.0, 0.05, 0.0});
  return ForceField(f);
}

const ConstantEstimate& C_lin() {
  static const auto c = estimate_estmLin_constant(2, 4.0, 0.5, 12, 200, 1);
  return c;
}

struct CQScans {
  CQScan d2, d3;
};

const CQScans& cq_scans() {
  static const CQScans s{scan_CQ(2, 4.0, 40.0, 80), scan_CQ(3, 4.0, 40.0, 80)};
  return s;
}

const PolyRegion& poly() {
  static const auto r = build_trap1(0.01, 4.0, region_force(), P2, C_lin(), 0.1);
  return r;
}

// Largest |a - b| over all coefficient components.
double max_component_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(a[i][c] - b[i][c]));
  return m;
}

double enstrophy_rate_of(const SpectralField& u, const ForceField& f, const PhysicsParams& p) {
  return enstrophy_rate(u, rhs(u, f, p, u.modeset()));
}

// 1
Outcome oracle_equivalence() {
  double worst = 0.0;
  for (int d : {2, 3}) {
    const auto set = ModeSet::ball(d, d == 2 ? 8.0 : 4.0);
    for (std::uint64_t s = 0; s < 100; ++s) {
      Rng rng(1000 * d + s);
      const auto u = random_field(set, PowerEnvelope{1.0, 4.0}, rng, AmplitudeProfile::mixed);
      worst = std::max(worst, max_component_diff(nonlinear_term(u, set), nonlinear_term_grid(u, set)));
    }
  }
  return {worst <= 1e-10, "max componentwise |convolution - grid| = " + fmt("%.3g", worst) + " over 200 fields"};
}

// 2
Outcome linear_dynamics() {
  double worst = 0.0;
  Rng rng(2);
  for (const Mode& k : {Mode(1, 0), Mode(1, 1), Mode(2, 1)}) {
    SpectralField u0(ModeSet::from_modes(2, {k, -k}));
    u0.set_pair(k, 0.7 * random_direction(k, rng));
    IntegratorConfig cfg;
    cfg.h = 0.01;
    cfg.T = 1.0;
    const auto u1 = integrate(u0, ForceField::zero(2), P2, cfg).final_state();
    const auto exact = std::exp(-double(k.norm2())) * u0;
    worst = std::max(worst, (u1 - exact).l2_norm() / exact.l2_norm());
  }
  return {worst <= 1e-12, "max relative error vs e^{-|k|^2} u(0) = " + fmt("%.3g", worst)};
}

// 3
Outcome enstrophy_inequality() {
  const auto set = ModeSet::ball(2, 8.0);
  IntegratorConfig cfg;
  cfg.h = 1e-3;
  cfg.T = 2.0;
  double excess = -1e300;
  std::size_t states = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(300 + s);
    const auto u0 = random_field(set, PowerEnvelope{0.5, 4.0}, rng);
    const ForceField f(random_field(ModeSet::ball(2, 3.0), PowerEnvelope{0.2, 2.0}, rng));
    const auto rep = enstrophy_inequality_check(integrate(u0, f, P2, cfg), f, P2);
    excess = std::max(excess, rep.max_excess);
    states += rep.states;
  }
  // f = 0: dV/dt = -2 nu sum |k|^4 |u_k|^2 <= -2 nu V, and < 0 away from u = 0.
  bool strict = true;
  double worst_ratio = 1e300;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(400 + s);
    const auto tr = integrate(random_field(set, PowerEnvelope{0.5, 4.0}, rng), ForceField::zero(2), P2, cfg);
    for (const auto& u : tr.states) {
      const double V = enstrophy(u);
      const double rate = enstrophy_rate_of(u, ForceField::zero(2), P2);
      if (!(rate < 0.0) || rate > -2.0 * P2.nu * V * (1.0 - 1e-12)) strict = false;
      worst_ratio = std::min(worst_ratio, rate / (-2.0 * P2.nu * V));
    }
  }
  return {excess <= 0.0 && strict,
          "forced: " + std::to_string(states) + " states, max (rate - bound - slack) = " + fmt("%.3g", excess) +
              "; unforced: min rate/(-2 nu V) = " + fmt("%.6f", worst_ratio)};
}

// 4
Outcome cq_bound() {
  const auto& s = cq_scans();
  bool bounded = true, at_one = true, doubling = true;
  std::ostringstream os;
  for (const CQScan* scan : {&s.d2, &s.d3}) {
    const auto& e = scan->estimate;
    for (const auto& x : scan->entries) bounded = bounded && x.scaled_value <= e.reported();
    at_one = at_one && e.mode_of_supremum.norm() == 1.0;
    // Radius doubling on the low shells and on the outermost canonical modes.
    double worst = 0.0;
    for (const auto& x : scan->entries) {
      const double kn = x.k.norm();
      if (kn > 3.0 && kn < 39.0) continue;
      if (e.dim == 3 && kn >= 39.0 && x.k.c[1] > 2) continue;
      const auto big = convolution_lattice_sum(x.k, 4.0, e.dim, 2 * x.radius);
      const double change = std::abs(std::pow(kn, 4.0) * big.value - x.scaled_value);
      if (change > x.scaled_tail) doubling = false;
      worst = std::max(worst, change / x.scaled_tail);
    }
    os << "d=" << e.dim << ": C_Q=" << fmt("%.4f", e.reported()) << " attained at " << e.mode_of_supremum.str()
       << ", doubling change/tail <= " << fmt("%.3g", worst) << "; ";
  }
  os << "bound " << (bounded ? "holds" : "VIOLATED") << ", doubling " << (doubling ? "within tail" : "EXCEEDS tail")
     << ", supremum at |k|=1 " << (at_one ? "yes" : "NO");
  return {bounded && doubling && at_one, os.str()};
}

// Interior trajectories stay in the region at every output time.
std::pair<bool, double> trajectories_contained(const TrapRegion& region, const ModeSetPtr& set, const ForceField& f,
                                               const PhysicsParams& p, double T, double h, std::uint64_t seed) {
  bool ok = true;
  double min_slack = 1e300;
  IntegratorConfig cfg;
  cfg.h = h;
  cfg.T = T;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(seed + s);
    const auto tr = integrate(sample_interior_state(region, set, rng), f, p, cfg);
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      const auto m = contains(region, tr.states[i], tr.times[i]);
      ok = ok && m.inside;
      min_slack = std::min(min_slack, m.min_slack);
    }
  }
  return {ok, min_slack};
}

// 5
Outcome trapping_invariance() {
  std::ostringstream os;
  bool ok = true;
  auto record = [&](const std::string& name, const Certificate& c, std::pair<bool, double> tr) {
    ok = ok && c.pass && tr.first;
    os << name << ": cert " << (c.pass ? "pass" : "FAIL") << " worst " << fmt("%.3g", c.worst_margin) << ", traj "
       << (tr.first ? "contained" : "ESCAPED") << "; ";
  };
  const auto sd = build_smalldata_3d(4.0, ForceField::zero(3), P3, cq_scans().d3.estimate, 0.5);
  const auto set3 = ModeSet::ball(3, 6.0);
  record("small-data 3D", certify_inward(sd, set3, ForceField::zero(3), P3, 200, 5),
         trajectories_contained(sd, set3, ForceField::zero(3), P3, 5.0, 0.02, 50));

  const auto f = region_force();
  const auto& base = poly();
  const auto& cq2 = cq_scans().d2.estimate;
  const auto e = build_trap2(base, 2.0 * base.D, P2, cq2, 0.1);
  const auto te = build_trap3(base, 2.0 * base.D, 1.0, P2, cq2, 0.1);
  record("poly", certify_inward(base, ModeSet::ball(2, 10.0), f, P2, 200, 51),
         trajectories_contained(base, ModeSet::ball(2, 10.0), f, P2, 5.0, 0.01, 60));
  record("exp", certify_inward(e, ModeSet::ball(2, 12.0), f, P2, 200, 52),
         trajectories_contained(e, ModeSet::ball(2, 12.0), f, P2, 5.0, 0.01, 70));
  record("time-exp", certify_inward(te, ModeSet::ball(2, 12.0), f, P2, 200, 53),
         trajectories_contained(te, ModeSet::ball(2, 12.0), f, P2, te.t0, 0.01, 80));
  return {ok, os.str()};
}

// 6
Outcome negative_control() {
  const auto f = region_force();
  auto r = build_trap1(3.0, 4.0, f, P2, C_lin(), 0.1);
  const auto set = ModeSet::ball(2, 8.0);
  const auto control = certify_inward(r, set, f, P2, 200, 6);
  r.D = 0.1 * std::sqrt(r.V0) * std::pow(r.K, r.gamma - 1.0);
  const auto c = certify_inward(r, set, f, P2, 200, 6, false);
  const bool ok = control.pass && !c.pass && c.worst.kind == "modulus";
  return {ok, "threshold D: " + std::string(control.pass ? "pass" : "FAIL") + "; 0.1x D: " +
                  (c.pass ? "pass" : "fail") + " at " + c.worst.kind + " facet k=" + c.worst.k.str() +
                  ", outward derivative " + fmt("%.3g", c.worst_margin)};
}

// 7
Outcome lognorm_chain() {
  const auto& r = poly();
  const auto set = ModeSet::ball(2, 8.0);
  const double l = estimate_conditionD_bound(r.D, 4.0, 2, P2.nu, 200.0).l;
  double slack1 = 1e300, slack2 = 1e300, fd = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(700 + s);
    const auto u = sample_interior_state(r, set, rng);
    const auto J = jacobian(u, P2);
    const double e = lognorm_euclidean(J), g = lognorm_gershgorin(J);
    slack1 = std::min(slack1, g - e);
    slack2 = std::min(slack2, l - g);
    if (s < 3) {
      const RealCoordinates rc(set);
      const auto x = rc.to_coords(u);
      Eigen::MatrixXd F(x.size(), x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        auto a = x, b = x;
        a(j) += 1e-6;
        b(j) -= 1e-6;
        F.col(j) = (vector_field_coords(rc, a, region_force(), P2) - vector_field_coords(rc, b, region_force(), P2)) / 2e-6;
      }
      fd = std::max(fd, (J - F).norm() / J.norm());
    }
  }
  return {slack1 >= 0.0 && slack2 >= 0.0 && fd <= 1e-7,
          "min(gershgorin - eig) = " + fmt("%.3g", slack1) + ", min(l - gershgorin) = " + fmt("%.3g", slack2) +
              " (l = " + fmt("%.4f", l) + "), FD relative error " + fmt("%.3g", fd)};
}

// 8
Outcome lipschitz() {
  const auto& r = poly();
  const auto set = ModeSet::ball(2, 8.0);
  const double l = estimate_conditionD_bound(r.D, 4.0, 2, P2.nu, 200.0).l;
  IntegratorConfig cfg;
  cfg.h = 0.01;
  cfg.T = 1.0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a(800 + 2 * s), b(801 + 2 * s);
    const auto rep = lipschitz_experiment(sample_interior_state(r, set, a), sample_interior_state(r, set, b),
                                          region_force(), P2, cfg, l);
    worst = std::max(worst, rep.max_ratio);
  }
  return {worst <= 1.0 + 1e-6, "max separation ratio = " + fmt("%.6f", worst) + " (l = " + fmt("%.4f", l) + ")"};
}

// 9
Outcome galerkin_difference() {
  const auto& r = poly();
  const auto m = ModeSet::ball(2, 12.0);
  const double l = estimate_conditionD_bound(r.D, 4.0, 2, P2.nu, 200.0).l;
  Rng rng(9);
  const auto u0 = sample_interior_state(r, m, rng);
  IntegratorConfig cfg;
  cfg.h = 0.01;
  cfg.T = 1.0;
  bool ok = true;
  double prev = 1e300;
  std::ostringstream os;
  for (double n : {4.0, 6.0, 8.0}) {
    const auto rep = galerkin_difference_experiment(u0, region_force(), P2, cfg, ModeSet::ball(2, n), m, l);
    ok = ok && rep.pass && rep.delta_n < prev;
    prev = rep.delta_n;
    os << "n=" << n << ": delta=" << fmt("%.3g", rep.delta_n) << " min slack=" << fmt("%.3g", rep.min_slack) << "; ";
  }
  return {ok, os.str()};
}

// 10
Outcome semigroup() {
  const auto set = ModeSet::ball(2, 8.0);
  IntegratorConfig half;
  half.h = 0.01;
  half.T = 0.5;
  auto full = half;
  full.T = 1.0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(1000 + s);
    const auto x = sample_interior_state(poly(), set, rng);
    const auto two = integrate(integrate(x, region_force(), P2, half).final_state(), region_force(), P2, half);
    const auto one = integrate(x, region_force(), P2, full);
    worst = std::max(worst, (two.final_state() - one.final_state()).l2_norm());
  }
  return {worst <= 1e-9, "max |phi(0.5, phi(0.5, x)) - phi(1, x)| = " + fmt("%.3g", worst)};
}

// 11
Outcome integrator_order() {
  Rng rng(11);
  const auto u0 = sample_interior_state(poly(), ModeSet::ball(2, 8.0), rng);
  IntegratorConfig cfg;
  cfg.h = 0.2;
  cfg.T = 1.0;
  const auto rep = richardson_order(u0, region_force(), P2, cfg);
  return {std::abs(rep.order - 4.0) <= 0.3, "Richardson exponent " + fmt("%.3f", rep.order) + " from h = 0.2, 0.1, 0.05"};
}

// 12
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "galtrap_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  nlohmann::json recipe{{"kind", "exp"}, {"V0", 0.01}, {"nu", 1.0}, {"force", field_to_json(region_force().coeffs())}};
  recipe["C"] = C_lin().to_json();
  recipe["C_Q"] = cq_scans().d2.estimate.to_json();
  write_text(p("region.json"), recipe.dump());
  const std::string init = "random --radius 8 --seed 3 --envelope D=0.1,gamma=4";
  const std::vector<std::vector<std::string>> runs{
      {"simulate", "--init", init, "--T", "0.5", "--out", p("sim.csv")},
      {"certify", "--region", p("region.json"), "--samples", "50", "--proj-radius", "10", "--out", p("cert.json")},
      {"constants", "--name", "C_estmLin", "--c-samples", "20", "--c-radius", "8", "--out", p("c.json")},
      {"converge", "--init", init, "--radii", "4,6", "--m", "8", "--D", "0.1", "--T", "0.2", "--out", p("conv.csv")},
      {"lognorm", "--init", init, "--D", "0.1", "--out", p("ln.json")},
      {"check-conditions", "--d", "2", "--gamma", "4", "--out", p("cc.json")}};
  bool ok = true;
  int n = 0;
  for (const auto& args : runs) {
    std::ostringstream sink;
    const int code = cli::run(args, sink, sink);
    const std::string out = args.back();
    const std::string again = out + ".again";
    const int rc = cli::run({"replay", out + ".manifest.json", "--out", again}, sink, sink);
    const bool same = code == 0 && rc == 0 && read_text(out) == read_text(again);
    ok = ok && same;
    n += same;
  }
  fs::remove_all(dir);
  return {ok, std::to_string(n) + "/" + std::to_string(runs.size()) + " subcommand manifests replay byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"exact linear dynamics", linear_dynamics},
      {"enstrophy inequality", enstrophy_inequality},
      {"C_Q lattice bound", cq_bound},
      {"trapping invariance", trapping_invariance},
      {"negative control", negative_control},
      {"log-norm chain", lognorm_chain},
      {"Lipschitz bound", lipschitz},
      {"Galerkin difference bound", galerkin_difference},
      {"semigroup property", semigroup},
      {"integrator order", integrator_order},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << (i + 1 < 10 ? " " : "") << i + 1 << " " << criteria[i].first << " ["
              << fmt("%.1f", secs) << "s]: " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
