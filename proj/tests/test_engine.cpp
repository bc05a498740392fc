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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "szilard/engine.hpp"
#include "szilard/scenario_io.hpp"

namespace szilard {
namespace {

const BranchResult& branch(const CycleResult& r, const std::string& label) {
  for (const auto& b : r.branches)
    if (b.label == label) return b;
  throw std::runtime_error("missing branch " + label);
}

double binary_entropy(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); }

ScenarioParams params(double q, Index n) {
  ScenarioParams p;
  p.q = q;
  p.n = n;
  return p;
}

// ---------------------------------------------------------------------------
// Cycles

TEST(Cycle, ExampleOneBranches) {
  const auto c = example_one(params(0.3, 20));
  const auto r = run_cycle(c);
  EXPECT_NEAR(branch(r, "+").probability, 0.3, 1e-12);
  EXPECT_NEAR(branch(r, "+").work, 1.0, 1e-9);
  EXPECT_NEAR(branch(r, "-").probability, 0.7, 1e-12);
  EXPECT_NEAR(branch(r, "-").work, 0.0, 1e-9);
  EXPECT_TRUE(r.certification.pass);
  EXPECT_LE(r.diagnostics.marginal_gap, kAlgTol);
  ASSERT_TRUE(r.diagnostics.order_gap.has_value());
  EXPECT_LE(*r.diagnostics.order_gap, 1e-10);
  EXPECT_LE(r.diagnostics.internal_form_deviation, 1e-9);
  const auto f = evaluate_features(r, c);
  EXPECT_TRUE(f.f1_repeatable);
  EXPECT_TRUE(f.f2_entropy_invariant);
  EXPECT_FALSE(f.f3_positive_work);
}

TEST(Cycle, ExampleOneLedgerAtHalf) {
  const Index n = 20;
  const auto c = example_one(params(0.5, n));
  const auto r = run_cycle(c);
  const auto& l = r.ledger;
  EXPECT_NEAR(l.work_average, 0.5, 1e-9);
  EXPECT_NEAR(l.erasure_work, std::log(2.0), 1e-12);
  EXPECT_NEAR(l.net_average, 0.5 - std::log(2.0), 1e-9);
  // Weight marginal: equal mixture of the flat state and its one-level translate.
  const double overlap = double(n - 1) / double(n);
  const double coarse = 0.5 - binary_entropy((1 + overlap) / 2);
  EXPECT_NEAR(l.work_coarse, coarse, 1e-9);
  EXPECT_LT(l.work_coarse, l.work_average - 1e-3);
}

TEST(Cycle, ExampleTwoPopulationAndFeatures) {
  const auto c = example_two(params(0.4, 50));
  const auto r = run_cycle(c);
  EXPECT_NEAR(branch(r, "+").probability, 0.4, 1e-12);
  EXPECT_NEAR(branch(r, "-").probability, 0.6, 1e-12);
  for (const auto& b : r.branches) {
    ASSERT_TRUE(b.system_after.has_value());
    EXPECT_NEAR(b.system_after->matrix()(1, 1).real(), 0.99, 1e-9) << b.label;
  }
  const auto f = evaluate_features(r, c);
  EXPECT_FALSE(f.f1_repeatable);
  EXPECT_TRUE(f.f3_positive_work);
  EXPECT_FALSE(f.f2_entropy_invariant);
}

TEST(Cycle, ExampleTwoLargeNRelaxedToleranceSatisfiesTwoAndThree) {
  auto p = params(0.5, 500);
  p.tol_s = 1e-2;
  const auto c = example_two(p);
  const auto r = run_cycle(c);
  const auto f = evaluate_features(r, c);
  EXPECT_FALSE(f.f1_repeatable);
  EXPECT_TRUE(f.f2_entropy_invariant);
  EXPECT_TRUE(f.f3_positive_work);
}

TEST(Cycle, ExampleTwoEntropyIncreaseShrinksWithN) {
  double prev = INFINITY;
  for (Index n : {5, 20, 80}) {
    const auto r = run_cycle(example_two(params(0.5, n)));
    const double ds = branch(r, "+").entropy_change;
    EXPECT_GT(ds, 0.0);
    EXPECT_LT(ds, prev);
    prev = ds;
  }
}

TEST(Cycle, NullEngineIsInert) {
  const auto c = null_engine(params(0.3, 4));
  const auto r = run_cycle(c);
  ASSERT_EQ(r.branches.size(), 1u);
  EXPECT_NEAR(r.branches[0].work, 0.0, 1e-12);
  EXPECT_NEAR(r.ledger.work_coarse, 0.0, 1e-12);
  EXPECT_NEAR(r.ledger.work_average, 0.0, 1e-12);
  EXPECT_NEAR(r.ledger.heat, 0.0, 1e-12);
  EXPECT_NEAR(r.ledger.net_coarse, 0.0, 1e-12);
  EXPECT_TRUE(norm_within(r.system_after.matrix() - c.rho_s.matrix(), 1e-12));
}

TEST(Cycle, DegenerateScenarioShowsAllThreeFeatures) {
  ScenarioParams p;
  p.dim = 4;
  p.n = 4;
  const auto c = degenerate_circumvention(p);
  EXPECT_TRUE(c.degenerate_target());
  const auto r = run_cycle(c);
  EXPECT_TRUE(r.certification.pass);
  const auto f = evaluate_features(r, c);
  EXPECT_TRUE(f.degenerate_target);
  EXPECT_FALSE(f.theorem_applies);
  EXPECT_TRUE(f.f1_repeatable && f.f2_entropy_invariant && f.f3_positive_work);
  const double gap = degenerate_gap(p);
  EXPECT_GT(gap, 0.0);
  for (const auto& b : r.branches) EXPECT_GE(b.work, gap - 1e-9) << b.label;
}

TEST(Cycle, ReservoirScenarioBoundChainHolds) {
  ScenarioParams p;
  p.reservoir_dim = 16;
  const auto c = reservoir_circumvention(p);
  const auto r = run_cycle(c);
  EXPECT_TRUE(r.certification.pass);
  ASSERT_EQ(r.diagnostics.reservoir_bounds.size(), 2u);
  for (const auto& [label, b] : r.diagnostics.reservoir_bounds) {
    EXPECT_TRUE(b.holds) << label;
    EXPECT_LE(b.work, c.thermo.kt() * std::log(2.0) + 1e-9);
  }
  EXPECT_GE(r.diagnostics.entropy_chain_slack, -kAlgTol);
  const auto f = evaluate_features(r, c);
  EXPECT_TRUE(f.reservoir_in_feedback);
  EXPECT_FALSE(f.theorem_applies);
}

TEST(Cycle, ReservoirWorkGrowsWithCoupling) {
  double prev = -INFINITY;
  for (double k : {0.0, 0.5, 1.0}) {
    ScenarioParams p;
    p.coupling = k;
    const auto r = run_cycle(reservoir_circumvention(p));
    const double w = branch(r, "+").work;
    EXPECT_GE(w, prev - 1e-12);
    prev = w;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(Cycle, ConformingEngineFailingCertificationThrows) {
  auto c = example_one(params(0.5, 6));
  c.h_d = Operator::diagonal({1.0, -1.0});
  EXPECT_THROW(run_cycle(c), CertificationError);
  c.conforming = false;
  const auto r = run_cycle(c);
  EXPECT_FALSE(r.certification.pass);
}

TEST(Cycle, NonConformingEnergyPumpReportsSecondLawDeficit) {
  const auto configs = parse_scenario(std::string(SZILARD_SCENARIO_DIR) + "/non_conforming_feedback.json");
  ASSERT_EQ(configs.size(), 1u);
  const auto r = run_cycle(configs[0].config);
  EXPECT_FALSE(r.certification.pass);
  EXPECT_LT(r.ledger.second_law_slack, -1e-3);
  EXPECT_FALSE(evaluate_features(r, configs[0].config).theorem_applies);
}

TEST(Cycle, AllThreeFeaturesOnConformingEngineIsHardAssertion) {
  const auto c = example_one(params(0.5, 6));
  auto r = run_cycle(c);
  for (auto& b : r.branches) b.work = 1.0;  // forged result
  EXPECT_THROW(evaluate_features(r, c), InternalInconsistency);
}

TEST(Cycle, ExplicitErasureRespectsLandauer) {
  auto p = params(0.5, 6);
  p.explicit_erasure = true;
  const auto r = run_cycle(example_one(p));
  EXPECT_FALSE(r.erasure.landauer_optimal);
  EXPECT_GE(r.erasure.heat, std::log(2.0) - 1e-9);
}

// ---------------------------------------------------------------------------
// Random engines

TEST(Scan, NoEngineShowsAllThreeFeatures) {
  const auto rep = impossibility_scan(150, 17);
  EXPECT_EQ(rep.count, 150u);
  EXPECT_EQ(rep.all_three, 0u);
  EXPECT_EQ(rep.certification_failures, 0u);
  EXPECT_LE(rep.max_order_gap, 1e-10);
  EXPECT_GE(rep.min_concavity_slack, -1e-9);
}

TEST(Scan, RepeatableEnginesWithPureWeightsCannotGainOnGroundOutcome) {
  RandomEngineOptions opt;
  opt.measurement = MeasurementFamily::repeatable;
  opt.weight = WeightFamily::flat_pure;
  std::size_t checked = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = make_rng(41, i);
    const auto eng = random_conforming_engine(rng, opt);
    const auto r = run_cycle(eng.config);
    const auto f = evaluate_features(r, eng.config);
    EXPECT_TRUE(f.f1_repeatable);
    if (eng.weight != WeightFamily::flat_pure) continue;
    const auto& ground = branch(r, "x0");
    if (ground.probability > kEigCutoff) EXPECT_LE(ground.work, eng.config.work_threshold());
    ++checked;
  }
  EXPECT_GT(checked, 50u);
}

TEST(Scan, NonRepeatableEnginesFailFeatureOne) {
  RandomEngineOptions opt;
  opt.measurement = MeasurementFamily::non_repeatable;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = make_rng(42, i);
    const auto eng = random_conforming_engine(rng, opt);
    const auto f = evaluate_features(run_cycle(eng.config), eng.config);
    EXPECT_FALSE(f.f1_repeatable);
  }
}

TEST(Scan, SeededRunsAreReproducible) {
  const auto a = impossibility_scan(30, 99), b = impossibility_scan(30, 99);
  EXPECT_EQ(a.triples, b.triples);
}

TEST(Way, RandomQubitModelsNeverViolateImplication) {
  Rng rng = make_rng(43);
  int generated = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto inst = random_way_instance(rng);
    if (!inst) continue;
    ++generated;
    EXPECT_NO_THROW(way_witness(inst->model, inst->h_s, inst->h_d));
  }
  EXPECT_GT(generated, 50);
}

// ---------------------------------------------------------------------------
// Scenario files

TEST(ScenarioIo, TopLevelParamsGiveOneConfig) {
  const auto v = parse_scenario_text(R"({"scenario": "example_I", "q": 0.5, "N": 20})");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].config.name, "example_I");
  EXPECT_FALSE(v[0].sweep_value.has_value());
}

TEST(ScenarioIo, SweepOverNGivesThreeConfigs) {
  const auto v = parse_scenario_text(
      R"({"scenario": "example_II", "params": {"q": 0.5}, "sweep": {"parameter": "N", "values": [5, 50, 500]}})");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(*v[2].sweep_value, 500.0);
  EXPECT_EQ(v[2].config.weight.hamiltonian.dim(), 504);
}

TEST(ScenarioIo, RangeSweep) {
  const auto v = parse_scenario_text(
      R"({"scenario": "example_I", "sweep": {"parameter": "q", "range": {"start": 0, "stop": 1, "count": 5}}})");
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(*v[1].sweep_value, 0.25);
}

TEST(ScenarioIo, OutOfRangeQNamesField) {
  try {
    parse_scenario_text(R"({"scenario": "example_I", "q": 1.5})");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "q");
  }
}

TEST(ScenarioIo, SweepValueOutOfRangeNamesField) {
  try {
    parse_scenario_text(R"({"scenario": "example_I", "sweep": {"parameter": "q", "values": [0.2, 2]}})");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "sweep.q");
  }
}

TEST(ScenarioIo, MalformedJsonReportsLineAndColumn) {
  try {
    parse_scenario_text("{\n  \"scenario\": \"example_I\",\n  \"q\": ]\n}", {}, "f.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("f.json:3:"), std::string::npos) << e.what();
  }
}

TEST(ScenarioIo, UnknownScenarioAndParameter) {
  EXPECT_THROW(parse_scenario_text(R"({"scenario": "nope"})"), ValidationError);
  EXPECT_THROW(parse_scenario_text(R"({"scenario": "example_I", "sweep": {"parameter": "zeta", "values": [1]}})"),
               ValidationError);
}

TEST(ScenarioIo, OverridesApply) {
  RunOverrides ov;
  ov.kb = 2.0;
  ov.tol_s = 1e-3;
  const auto v = parse_scenario_text(R"({"scenario": "example_I"})", ov);
  EXPECT_DOUBLE_EQ(v[0].config.thermo.boltzmann, 2.0);
  EXPECT_DOUBLE_EQ(v[0].config.entropy_tolerance(), 1e-3);
}

TEST(ScenarioIo, MissingFileIsIoError) { EXPECT_THROW(parse_scenario("/nonexistent/x.json"), IoError); }

TEST(ScenarioIo, MatrixRoundTrip) {
  Rng rng = make_rng(44);
  const Matrix m = ginibre(3, 3, rng);
  const Json j = Json::parse(to_json(m).dump());
  EXPECT_EQ(matrix_from_json(j, "m"), m);
}

TEST(ScenarioIo, ExplicitConfigRuns) {
  const std::string text = R"({
    "params": {"T": 1.0},
    "explicit": {
      "h_s": [[0.5, 0], [0, -0.5]],
      "rho_s": [[0.5, 0], [0, 0.5]],
      "h_d": [[0, 0], [0, 0]],
      "demon_initial": [1, 0],
      "target": [{"label": "+", "value": 1, "projector": [[1, 0], [0, 0]]},
                 {"label": "-", "value": -1, "projector": [[0, 0], [0, 1]]}],
      "pointer": [{"label": "+", "value": 1, "projector": [[1, 0], [0, 0]]},
                  {"label": "-", "value": -1, "projector": [[0, 0], [0, 1]]}],
      "post_states": {"+": [1, 0], "-": [0, 1]},
      "h_w": [[0, 0], [0, 1]],
      "rho_w": [[1, 0], [0, 0]],
      "feedback": {"+": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
                   "-": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}
    }})";
  const auto v = parse_scenario_text(text);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].scenario, "explicit");
  const auto r = run_cycle(v[0].config);
  for (const auto& b : r.branches) EXPECT_NEAR(b.work, 0.0, 1e-12);
}

TEST(ScenarioIo, ExplicitConfigRejectsNonHermitianHamiltonian) {
  try {
    parse_scenario_text(R"({"explicit": {"h_s": [[0, 1], [0, 0]]}})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "explicit.h_s");
  }
}

RunRecord run_record(const ParsedConfig& pc) {
  RunRecord rec{pc, run_cycle(pc.config), std::nullopt, "ok", ""};
  rec.features = evaluate_features(*rec.result, pc.config);
  return rec;
}

TEST(ScenarioIo, JsonRecordRoundTripsBitIdentically) {
  const auto v = parse_scenario_text(R"({"scenario": "example_II", "q": 0.37, "N": 9})");
  const Json j = record_to_json(run_record(v[0]));
  const Json back = Json::parse(j.dump());
  EXPECT_EQ(back, j);
  EXPECT_EQ(back["ledger"]["work_coarse"].get<double>(), j["ledger"]["work_coarse"].get<double>());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(ScenarioIo, ExampleOneCsvRows) {
  const auto v = parse_scenario_text(R"({"scenario": "example_I", "q": 0.3})");
  const auto rows = csv_rows(records_to_csv({run_record(v[0])}));
  ASSERT_EQ(rows.size(), 3u);
  // label, probability, work, entropy_change at columns 5..8
  EXPECT_EQ(rows[1][5], "+");
  EXPECT_NEAR(std::stod(rows[1][6]), 0.3, 1e-12);
  EXPECT_NEAR(std::stod(rows[1][7]), 1.0, 1e-9);
  EXPECT_NEAR(std::stod(rows[1][8]), 0.0, 1e-9);
  EXPECT_EQ(rows[2][5], "-");
  EXPECT_NEAR(std::stod(rows[2][6]), 0.7, 1e-12);
  EXPECT_NEAR(std::stod(rows[2][7]), 0.0, 1e-9);
  EXPECT_NEAR(std::stod(rows[2][8]), 0.0, 1e-9);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(ScenarioIo, ExampleTwoPlotColumnApproachesHalf) {
  const auto v = parse_scenario_text(
      R"({"scenario": "example_II", "sweep": {"parameter": "N", "values": [5, 20, 80]}})");
  std::vector<RunRecord> recs;
  for (const auto& pc : v) recs.push_back(run_record(pc));
  const auto rows = csv_rows(records_to_plot(recs));
  ASSERT_EQ(rows.size(), 7u);
  double prev = -INFINITY;
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    const double w = std::stod(rows[i][2]);
    EXPECT_GT(w, prev);
    EXPECT_LT(w, 0.5);
    prev = w;
  }
}

TEST(ScenarioIo, NullEngineLedgerIsZero) {
  const auto v = parse_scenario_text(R"({"scenario": "null_engine"})");
  const Json j = record_to_json(run_record(v[0]));
  for (const char* k : {"work_coarse", "work_average", "heat", "erasure_work", "net_coarse", "net_average"})
    EXPECT_NEAR(j["ledger"][k].get<double>(), 0.0, 1e-12) << k;
}

}  // namespace
}  // namespace szilard
