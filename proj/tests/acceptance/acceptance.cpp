// Copyright 2026 The Szilard Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance runner: one PASS/FAIL line per criterion, followed by the
// measured quantities behind it. Exits 0 once every criterion has been
// evaluated; a crash or unexpected exception exits nonzero.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "szilard/engine.hpp"

namespace {

using namespace szilard;

struct Tally {
  double max_order_gap = 0.0;
  double min_concavity_slack = INFINITY;
  std::size_t cycles = 0;

  void record(const CycleResult& r) {
    ++cycles;
    if (r.diagnostics.order_gap) max_order_gap = std::max(max_order_gap, *r.diagnostics.order_gap);
    min_concavity_slack = std::min(min_concavity_slack, r.ledger.concavity_slack);
  }
};

Tally g_cycles_1_3;  // cycles of criteria 1-3
Tally g_all;         // every cycle in this binary

CycleResult run(const EngineConfig& c, bool first_three) {
  auto r = run_cycle(c);
  g_all.record(r);
  if (first_three) g_cycles_1_3.record(r);
  return r;
}

const BranchResult& branch(const CycleResult& r, const std::string& label) {
  for (const auto& b : r.branches)
    if (b.label == label) return b;
  throw Error("missing branch " + label);
}

void detail(const char* fmt, double a = 0, double b = 0, double c = 0) {
  std::printf("    ");
  std::printf(fmt, a, b, c);
  std::printf("\n");
}

void flag(const char* what, bool value) { std::printf("    %s: %s\n", what, value ? "yes" : "no"); }

double bound_n(double n) {
  return std::log(2 * n) / (2 * n) + (2 * n - 1) / (2 * n) * std::log(2 * n / (2 * n - 1));
}

ScenarioParams params(double q, Index n) {
  ScenarioParams p;
  p.q = q;
  p.n = n;
  return p;
}

bool criterion1() {
  bool ok = true;
  for (double q : {0.3, 0.5}) {
    const auto c = example_one(params(q, 20));
    const auto r = run(c, true);
    const double wp = branch(r, "+").work, wm = branch(r, "-").work;
    const auto f = evaluate_features(r, c);
    const bool pass = std::abs(wp - 1.0) <= 1e-9 && std::abs(wm) <= 1e-9 && f.f1_repeatable &&
                      f.f2_entropy_invariant && !f.f3_positive_work;
    detail("q=%.1f: W+=%.12f W-=%.3e", q, wp, wm);
    detail("features=(%g,%g,%g)", f.f1_repeatable, f.f2_entropy_invariant, f.f3_positive_work);
    ok = ok && pass;
  }
  return ok;
}

bool criterion2() {
  bool ok = true;
  const Index n = 50;
  const auto c = example_two(params(0.5, n));
  const auto r = run(c, true);
  const auto f = evaluate_features(r, c);
  const double bn = bound_n(double(n));
  bool pops = true, window = true;
  for (const auto& b : r.branches) {
    const double pop = b.system_after->matrix()(1, 1).real();
    const double deficit = 0.5 - b.work;
    pops = pops && std::abs(pop - 0.99) <= 1e-9;
    window = window && deficit >= 0.0 && deficit <= bn + 1e-9;
    detail("N=50 outcome: ground population=%.12f, 0.5-W=%.6f, dS_W=%.6f", pop, deficit, b.entropy_change);
  }
  detail("bound_N=%.6f; energy balance gives 0.5-W = 1/(2N) + T dS_W = %.6f + T dS_W", bn, 0.5 / n);
  const bool feat = !f.f1_repeatable && f.f3_positive_work;
  flag("population clause", pops);
  flag("window clause 0.5-W in [0, bound_N+1e-9]", window);
  detail("features=(%g,%g,%g)", f.f1_repeatable, f.f2_entropy_invariant, f.f3_positive_work);
  ok = pops && window && feat;

  double prev = INFINITY;
  bool decreasing = true;
  for (Index m : {5, 50, 500}) {
    const auto rm = run(example_two(params(0.5, m)), true);
    const double deficit = std::max(0.5 - branch(rm, "+").work, 0.5 - branch(rm, "-").work);
    detail("sweep N=%g: 0.5-W=%.6f (bound_N=%.6f)", double(m), deficit, bound_n(double(m)));
    decreasing = decreasing && deficit < prev;
    prev = deficit;
  }
  flag("sweep strictly decreasing", decreasing);
  return ok && decreasing;
}

bool criterion3() {
  const auto rep = impossibility_scan(500, 3);
  for (const auto& [k, v] : rep.triples) std::printf("    pattern %s: %zu\n", k.c_str(), v);
  detail("engines=%g all-three=%g certification failures=%g", double(rep.count), double(rep.all_three),
         double(rep.certification_failures));
  flag("witnessed TTF", rep.f1_f2_not_f3);
  flag("witnessed TFT", rep.f1_f3_not_f2);
  flag("witnessed FTT", rep.f2_f3_not_f1);
  g_cycles_1_3.max_order_gap = std::max(g_cycles_1_3.max_order_gap, rep.max_order_gap);
  g_cycles_1_3.min_concavity_slack = std::min(g_cycles_1_3.min_concavity_slack, rep.min_concavity_slack);
  g_all.max_order_gap = std::max(g_all.max_order_gap, rep.max_order_gap);
  g_all.min_concavity_slack = std::min(g_all.min_concavity_slack, rep.min_concavity_slack);
  return rep.all_three == 0 && rep.certification_failures == 0 && rep.f1_f2_not_f3 && rep.f1_f3_not_f2 &&
         rep.f2_f3_not_f1;
}

bool criterion4() {
  std::size_t models = 0, premise = 0;
  double worst = 0.0;
  auto check = [&](const MeasurementModel& m, const Operator& h_s, const Operator& h_d) {
    const auto w = way_witness(m, h_s, h_d);  // throws on violation
    if (!w.energy_ok) return;
    ++models;
    if (w.repeatable) {
      ++premise;
      worst = std::max(worst, w.observable_commutator);
    }
  };
  try {
    for (double q : {0.3, 0.5}) {
      const auto c = example_one(params(q, 20));
      check(std::get<MeasurementModel>(c.measurement), c.h_s, c.h_d);
    }
    const auto c2 = example_two(params(0.5, 50));
    check(std::get<MeasurementModel>(c2.measurement), c2.h_s, c2.h_d);
    for (std::size_t i = 0; i < 500; ++i) {
      Rng rng = make_rng(3, i);
      const auto eng = random_conforming_engine(rng);
      check(std::get<MeasurementModel>(eng.config.measurement), eng.config.h_s, eng.config.h_d);
    }
    Rng rng = make_rng(2024);
    std::size_t brute = 0, draws = 0;
    while (brute < 500) {
      ++draws;
      const auto inst = random_way_instance(rng);
      if (!inst) continue;
      ++brute;
      check(inst->model, inst->h_s, inst->h_d);
    }
    detail("brute-force 2x2: 500 models from %g draws", double(draws));
  } catch (const InternalInconsistency& e) {
    std::printf("    violation: %s\n", e.what());
    return false;
  }
  detail("energy-conserving models=%g, repeatable=%g, max ||[M_S,H_S]|| among repeatable=%.3e", double(models),
         double(premise), worst);
  return worst <= 1e-10;
}

bool criterion5() {
  detail("cycles=%g (plus 500 scan engines), max order gap=%.3e", double(g_cycles_1_3.cycles),
         g_cycles_1_3.max_order_gap);
  return g_cycles_1_3.max_order_gap <= 1e-10;
}

bool criterion6() {
  const auto r = run(example_one(params(0.5, 20)), false);
  const double gap = r.ledger.work_average - r.ledger.work_coarse;
  detail("Example I q=1/2: W_avg=%.9f W_coarse=%.9f gap=%.3e", r.ledger.work_average, r.ledger.work_coarse, gap);
  detail("min concavity slack over all runs so far=%.3e", g_all.min_concavity_slack);
  return g_all.min_concavity_slack >= -1e-9 && gap > 1e-6;
}

bool criterion7() {
  RandomEngineOptions opt;
  opt.thermal_system = true;
  bool bound = true;
  bool contrast = false;
  double max_coarse = -INFINITY, max_avg = -INFINITY, min_slack = INFINITY;
  for (std::size_t i = 0; i < 100; ++i) {
    Rng rng = make_rng(7, i);
    const auto eng = random_conforming_engine(rng, opt);
    const auto r = run(eng.config, false);
    const auto& l = r.ledger;
    bound = bound && l.net_coarse <= 1e-9 && l.net_coarse <= l.bound_rhs_coarse + 1e-9;
    contrast = contrast || (l.net_average > 0.0 && l.net_coarse <= 0.0);
    max_coarse = std::max(max_coarse, l.net_coarse);
    max_avg = std::max(max_avg, l.net_average);
    min_slack = std::min(min_slack, l.second_law_slack);
  }
  detail("max W_net_coarse=%.3e, min second-law slack=%.3e", max_coarse, min_slack);
  flag("bound clauses", bound);
  detail("max W_net_avg=%.3e", max_avg);
  flag("instance with W_net_avg > 0 and W_net_coarse <= 0", contrast);
  return bound && contrast;
}

bool criterion8() {
  const double omega = 1.0;
  const ThermoContext ctx(1.0);
  bool thermal_ok = true, general_ok = true;
  double max_thermal = -INFINITY, min_slack = INFINITY;
  for (std::size_t i = 0; i < 100; ++i) {
    Rng rng = make_rng(8, i);
    const Index d = uniform_int(rng, 2, 3), dw = 6;
    RealVector ev(d);
    ev(0) = 0.0;
    for (Index k = 1; k < d; ++k) ev(k) = ev(k - 1) + omega * uniform_int(rng, 1, 2);
    const Matrix basis = haar_unitary(d, rng).matrix();
    const Operator h_s(basis * ev.cast<cplx>().asDiagonal() * basis.adjoint());
    const Operator h_w = Operator::diagonal(omega * RealVector::LinSpaced(dw, 0.0, double(dw - 1)));
    const Operator u(detail::random_block_unitary(inner_hamiltonian(h_w, h_s), rng));
    const auto rho_w = random_density(dw, rng, uniform_int(rng, 1, 3));
    const std::vector<Index> dims{dw, d};
    for (bool thermal : {true, false}) {
      const auto rho_s = thermal ? thermal_state(h_s, ctx.beta()) : random_density(d, rng);
      const Matrix joint = u.matrix() * kron(rho_w.matrix(), rho_s.matrix()) * u.adjoint().matrix();
      const auto w_after = DensityMatrix::from_trusted(partial_trace(joint, dims, std::vector<std::size_t>{0}));
      const auto s_after = DensityMatrix::from_trusted(partial_trace(joint, dims, std::vector<std::size_t>{1}));
      const double gain = free_energy(w_after, h_w, ctx) - free_energy(rho_w, h_w, ctx);
      if (thermal) {
        thermal_ok = thermal_ok && gain <= 1e-9;
        max_thermal = std::max(max_thermal, gain);
      } else {
        const double rhs = free_energy(rho_s, h_s, ctx) - free_energy(s_after, h_s, ctx);
        general_ok = general_ok && gain <= rhs + 1e-9;
        min_slack = std::min(min_slack, rhs - gain);
      }
    }
  }
  detail("thermal: max weight free-energy gain=%.3e", max_thermal);
  detail("non-thermal: min slack F(rho_S)-F(Lambda[rho_S])-gain=%.3e", min_slack);
  return thermal_ok && general_ok;
}

bool criterion9() {
  ScenarioParams p;
  p.dim = 4;
  p.n = 4;
  const auto c = degenerate_circumvention(p);
  const auto r = run(c, false);
  const auto f = evaluate_features(r, c);
  const double gap = degenerate_gap(p);
  double min_w = INFINITY;
  for (const auto& b : r.branches) min_w = std::min(min_w, b.work);
  detail("features=(%g,%g,%g)", f.f1_repeatable, f.f2_entropy_invariant, f.f3_positive_work);
  detail("degenerate flag=%g, min W_x=%.9f, subspace gap=%.3f", f.degenerate_target, min_w, gap);
  return f.f1_repeatable && f.f2_entropy_invariant && f.f3_positive_work && f.degenerate_target && gap > 0.0 &&
         min_w >= gap - 1e-9;
}

bool criterion10() {
  ScenarioParams p;
  p.reservoir_dim = 16;
  const auto c = reservoir_circumvention(p);
  const auto r = run(c, false);
  bool ok = true;
  for (const auto& [label, b] : r.diagnostics.reservoir_bounds) {
    detail("W=%.6f  T ln2=%.6f  rhs=%.6f", b.work, c.thermo.kt() * std::log(2.0), b.rhs);
    ok = ok && b.holds && b.work <= c.thermo.kt() * std::log(2.0) + 1e-9;
  }
  return ok && r.diagnostics.reservoir_bounds.size() == 2;
}

bool criterion11() {
  const ThermoContext ctx(1.0);
  const PureState psi = PureState::basis(2, 0);
  const auto mixed = DensityMatrix::maximally_mixed(2);
  const auto expl = erase_demon(mixed, Operator::zero(2), psi, ctx, build_swap_erasure(psi, ctx));
  const auto ideal = erase_demon(mixed, Operator::zero(2), psi, ctx);
  detail("explicit Q=%.9f, Landauer-optimal Q=%.15f, ln2=%.15f", expl.heat, ideal.heat, std::log(2.0));
  return expl.heat >= std::log(2.0) - 1e-9 && std::abs(ideal.heat - std::log(2.0)) <= 1e-12;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria{
      {"Example I reproduction", criterion1},
      {"Example II reproduction and N sweep", criterion2},
      {"feature exclusion scan", criterion3},
      {"WAY implication", criterion4},
      {"objectification order", criterion5},
      {"coarse vs average work concavity", criterion6},
      {"second-law property with thermal systems", criterion7},
      {"weight free-energy gain bound", criterion8},
      {"degenerate circumvention", criterion9},
      {"reservoir-assisted bound", criterion10},
      {"Landauer erasure", criterion11},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::printf("criterion %zu: %s\n", i + 1, criteria[i].first);
    const bool ok = criteria[i].second();
    passed += ok;
    std::printf("[%s] criterion %zu: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", passed, criteria.size());
  return 0;
}
