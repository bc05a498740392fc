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

// JSON scenario files (library scenarios, explicit matrices, sweeps) and
// JSON/CSV result records.

#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "szilard/engine.hpp"

namespace szilard {

using Json = nlohmann::json;

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invariant violation in a scenario file; `field` names the offending key.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& msg)
      : Error("field '" + field + "': " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Matrices as [[ [re, im], ... ], ...]

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

namespace detail {

inline cplx complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ValidationError(field, "expected a number or a [re, im] pair");
}

}  // namespace detail

inline Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a non-empty array of rows");
  const auto n = static_cast<Index>(j.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) throw ValidationError(field, "matrix must be square");
    for (Index k = 0; k < n; ++k) m(i, k) = detail::complex_from_json(row[static_cast<std::size_t>(k)], field);
  }
  return m;
}

inline Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a non-empty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = detail::complex_from_json(j[i], field);
  return v;
}

// ---------------------------------------------------------------------------
// Scenario files

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_s;
  std::optional<double> kb;
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct ParsedConfig {
  std::string name;
  std::string scenario;
  std::optional<std::string> sweep_parameter;
  std::optional<double> sweep_value;
  EngineConfig config;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline double number_field(const Json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ValidationError(key, "expected a number");
  return obj[key].get<double>();
}

inline const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys{"q", "N", "omega", "T", "kb", "dim", "reservoir_dim", "coupling",
                                             "weight_cutoff", "tol_s"};
  return keys;
}

inline void set_param(ScenarioParams& p, const std::string& key, double v) {
  auto as_index = [&](double x) {
    if (x != std::floor(x)) throw ValidationError(key, "expected an integer");
    return static_cast<Index>(x);
  };
  if (key == "q") {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(key, "must lie in [0, 1]");
    p.q = v;
  } else if (key == "N") {
    if (v < 1) throw ValidationError(key, "must be >= 1");
    p.n = as_index(v);
  } else if (key == "omega") {
    if (!(v > 0.0)) throw ValidationError(key, "must be positive");
    p.omega = v;
  } else if (key == "T") {
    if (!(v > 0.0)) throw ValidationError(key, "must be positive");
    p.temperature = v;
  } else if (key == "kb") {
    if (!(v > 0.0)) throw ValidationError(key, "must be positive");
    p.kb = v;
  } else if (key == "dim") {
    if (v < 3) throw ValidationError(key, "must be >= 3");
    p.dim = as_index(v);
  } else if (key == "reservoir_dim") {
    if (v < 2) throw ValidationError(key, "must be >= 2");
    p.reservoir_dim = as_index(v);
  } else if (key == "coupling") {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(key, "must lie in [0, 1]");
    p.coupling = v;
  } else if (key == "weight_cutoff") {
    p.weight_cutoff = as_index(v);
  } else if (key == "tol_s") {
    if (!(v > 0.0)) throw ValidationError(key, "must be positive");
    p.tol_s = v;
  } else {
    throw ValidationError(key, "unknown parameter");
  }
}

inline SweepSpec parse_sweep(const Json& s) {
  if (!s.is_object()) throw ValidationError("sweep", "expected an object");
  if (!s.contains("parameter") || !s["parameter"].is_string())
    throw ValidationError("sweep.parameter", "expected a parameter name");
  SweepSpec sw{s["parameter"].get<std::string>(), {}};
  if (s.contains("values")) {
    if (!s["values"].is_array() || s["values"].empty()) throw ValidationError("sweep.values", "expected a non-empty array");
    for (const auto& v : s["values"]) {
      if (!v.is_number()) throw ValidationError("sweep.values", "expected numbers");
      sw.values.push_back(v.get<double>());
    }
  } else if (s.contains("range")) {
    const Json& r = s["range"];
    if (!r.is_object()) throw ValidationError("sweep.range", "expected {start, stop, count}");
    const double a = number_field(r, "start", 0.0), b = number_field(r, "stop", 0.0);
    const double count = number_field(r, "count", 0.0);
    if (count < 1 || count != std::floor(count)) throw ValidationError("sweep.range.count", "must be a positive integer");
    const auto n = static_cast<int>(count);
    for (int i = 0; i < n; ++i) sw.values.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
  } else {
    throw ValidationError("sweep", "needs 'values' or 'range'");
  }
  return sw;
}

inline Observable observable_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a list of outcomes");
  std::vector<Outcome> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& o = j[i];
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("label") || !o["label"].is_string())
      throw ValidationError(f + ".label", "expected a string label");
    out.push_back({o["label"].get<std::string>(), number_field(o, "value", double(i)),
                   Operator(matrix_from_json(o.at("projector"), f + ".projector"))});
  }
  try {
    return Observable(std::move(out));
  } catch (const ArgumentError& e) {
    throw ValidationError(field, e.what());
  }
}

// Fully explicit engine: all matrices given in the file.
inline EngineConfig explicit_config(const Json& e, const ScenarioParams& p, bool conforming) {
  auto req = [&](const char* key) -> const Json& {
    if (!e.contains(key)) throw ValidationError(std::string("explicit.") + key, "missing");
    return e[key];
  };
  auto op = [&](const char* key) {
    try {
      const Operator o(matrix_from_json(req(key), std::string("explicit.") + key));
      if (!o.is_hermitian()) throw ValidationError(std::string("explicit.") + key, "must be Hermitian");
      return o;
    } catch (const ArgumentError& ex) {
      throw ValidationError(std::string("explicit.") + key, ex.what());
    }
  };
  auto state = [&](const char* key) {
    try {
      return DensityMatrix(matrix_from_json(req(key), std::string("explicit.") + key));
    } catch (const ArgumentError& ex) {
      throw ValidationError(std::string("explicit.") + key, ex.what());
    }
  };
  const Operator h_s = op("h_s"), h_d = op("h_d"), h_w = op("h_w");
  const DensityMatrix rho_s = state("rho_s"), rho_w = state("rho_w");
  const auto target = observable_from_json(req("target"), "explicit.target");
  const auto pointer = observable_from_json(req("pointer"), "explicit.pointer");
  const Vector psi = vector_from_json(req("demon_initial"), "explicit.demon_initial");
  if (std::abs(psi.norm() - 1.0) > kAlgTol) throw ValidationError("explicit.demon_initial", "not normalized");
  LabeledVectors posts;
  const Json& ps = req("post_states");
  if (!ps.is_object()) throw ValidationError("explicit.post_states", "expected {label: vector}");
  for (auto it = ps.begin(); it != ps.end(); ++it)
    posts.emplace_back(it.key(), vector_from_json(it.value(), "explicit.post_states." + it.key()));
  LabeledOperators us;
  const Json& fb = req("feedback");
  if (!fb.is_object()) throw ValidationError("explicit.feedback", "expected {label: matrix}");
  for (auto it = fb.begin(); it != fb.end(); ++it)
    us.emplace_back(it.key(), Operator(matrix_from_json(it.value(), "explicit.feedback." + it.key())));
  std::optional<MeasurementModel> model;
  try {
    std::optional<EnergyConstraint> energy;
    if (conforming) energy = EnergyConstraint{h_s, h_d};
    model = build_standard_premeasurement(target, posts, pointer, PureState(psi), energy);
  } catch (const Error& ex) {
    throw ValidationError("explicit.post_states", ex.what());
  }
  LabeledOperators projs;
  for (const auto& o : pointer.outcomes()) projs.emplace_back(o.label, o.projector);
  std::optional<FeedbackScheme> scheme;
  try {
    scheme.emplace(std::move(us), std::move(projs));
  } catch (const Error& ex) {
    throw ValidationError("explicit.feedback", ex.what());
  }
  EngineConfig c{"explicit", h_s, rho_s, h_d, std::move(*model), std::move(*scheme),
                 WeightConfig{h_w, rho_w, std::nullopt}, ThermoContext(p.temperature, p.kb)};
  c.omega = p.omega;
  c.tolerances.entropy = p.tol_s;
  c.conforming = conforming;
  return c;
}

}  // namespace detail

/// Parses scenario text; `source` labels diagnostics.
inline std::vector<ParsedConfig> parse_scenario_text(const std::string& text, const RunOverrides& ov = {},
                                                     const std::string& source = "<input>") {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  if (!root.is_object()) throw ParseError(source + ": top level must be an object");
  const Json params = root.contains("params") ? root["params"] : root;
  if (!params.is_object()) throw ValidationError("params", "expected an object");

  ScenarioParams base;
  for (const auto& key : detail::param_keys())
    if (params.contains(key)) {
      if (!params[key].is_number()) throw ValidationError(key, "expected a number");
      detail::set_param(base, key, params[key].get<double>());
    }
  if (ov.kb) detail::set_param(base, "kb", *ov.kb);
  if (ov.tol_s) detail::set_param(base, "tol_s", *ov.tol_s);
  if (params.contains("erasure")) {
    const Json& er = params["erasure"];
    if (!er.is_string() || (er != "landauer" && er != "explicit"))
      throw ValidationError("erasure", "expected 'landauer' or 'explicit'");
    base.explicit_erasure = er == "explicit";
  }
  bool conforming = true;
  if (root.contains("non_conforming")) {
    if (!root["non_conforming"].is_boolean()) throw ValidationError("non_conforming", "expected a boolean");
    conforming = !root["non_conforming"].get<bool>();
  }

  std::string scenario;
  if (root.contains("scenario")) {
    if (!root["scenario"].is_string()) throw ValidationError("scenario", "expected a scenario name");
    scenario = root["scenario"].get<std::string>();
    const auto& names = scenario_names();
    if (scenario != "random_engine" && std::find(names.begin(), names.end(), scenario) == names.end())
      throw ValidationError("scenario", "unknown scenario '" + scenario + "'");
  } else if (root.contains("explicit")) {
    scenario = "explicit";
  } else {
    throw ValidationError("scenario", "missing (or provide an 'explicit' block)");
  }
  const std::string name = root.contains("name") && root["name"].is_string() ? root["name"].get<std::string>() : scenario;
  std::uint64_t seed = 0;
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ValidationError("seed", "expected an unsigned integer");
    seed = root["seed"].get<std::uint64_t>();
  }
  if (ov.seed) seed = *ov.seed;

  std::optional<SweepSpec> sweep;
  if (root.contains("sweep")) sweep = detail::parse_sweep(root["sweep"]);

  auto build = [&](const ScenarioParams& p, std::size_t index) -> EngineConfig {
    try {
      if (scenario == "explicit") return detail::explicit_config(root["explicit"], p, conforming);
      if (scenario == "random_engine") {
        Rng rng = make_rng(seed, index);
        RandomEngineOptions opt;
        opt.omega = p.omega;
        opt.temperature = p.temperature;
        auto e = random_conforming_engine(rng, opt).config;
        e.tolerances.entropy = p.tol_s;
        return e;
      }
      EngineConfig c = scenario_library(scenario, p);
      c.conforming = conforming;
      return c;
    } catch (const ValidationError&) {
      throw;
    } catch (const ArgumentError& e) {
      throw ValidationError(sweep ? sweep->parameter : "params", e.what());
    }
  };

  std::vector<ParsedConfig> out;
  if (!sweep) {
    out.push_back({name, scenario, std::nullopt, std::nullopt, build(base, 0)});
    return out;
  }
  for (std::size_t i = 0; i < sweep->values.size(); ++i) {
    ScenarioParams p = base;
    try {
      detail::set_param(p, sweep->parameter, sweep->values[i]);
    } catch (const ValidationError& e) {
      throw ValidationError("sweep." + e.field(), e.what());
    }
    out.push_back({name, scenario, sweep->parameter, sweep->values[i], build(p, i)});
  }
  return out;
}

inline std::vector<ParsedConfig> parse_scenario(const std::string& path, const RunOverrides& ov = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), ov, path);
}

// ---------------------------------------------------------------------------
// Result records

struct RunRecord {
  ParsedConfig parsed;
  std::optional<CycleResult> result;
  std::optional<FeatureReport> features;
  std::string status;  // "ok" or "certification_failed"
  std::string message;
};

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json record_to_json(const RunRecord& rec) {
  Json j;
  j["name"] = rec.parsed.name;
  j["scenario"] = rec.parsed.scenario;
  if (rec.parsed.sweep_parameter) {
    j["sweep_parameter"] = *rec.parsed.sweep_parameter;
    j["sweep_value"] = *rec.parsed.sweep_value;
  }
  j["status"] = rec.status;
  if (!rec.message.empty()) j["message"] = rec.message;
  if (!rec.result) return j;
  const CycleResult& r = *rec.result;
  Json branches = Json::array();
  for (const auto& b : r.branches)
    branches.push_back({{"label", b.label},
                        {"probability", b.probability},
                        {"work", b.work},
                        {"entropy_change", b.entropy_change},
                        {"energy_change", b.energy_change}});
  j["branches"] = std::move(branches);
  const WorkLedger& l = r.ledger;
  j["ledger"] = {{"work_coarse", l.work_coarse},
                 {"work_average", l.work_average},
                 {"heat", l.heat},
                 {"erasure_work", l.erasure_work},
                 {"net_coarse", l.net_coarse},
                 {"net_average", l.net_average},
                 {"bound_rhs_coarse", l.bound_rhs_coarse},
                 {"concavity_slack", l.concavity_slack},
                 {"second_law_slack", l.second_law_slack},
                 {"landauer_optimal", l.landauer_optimal}};
  if (rec.features) {
    const auto& f = *rec.features;
    j["features"] = {{"f1_repeatable", f.f1_repeatable},
                     {"f2_entropy_invariant", f.f2_entropy_invariant},
                     {"f3_positive_work", f.f3_positive_work},
                     {"min_work", number_or_null(f.min_work)},
                     {"degenerate_target", f.degenerate_target},
                     {"reservoir_in_feedback", f.reservoir_in_feedback},
                     {"theorem_applies", f.theorem_applies}};
  }
  const auto& c = r.certification;
  Json cert = {{"pass", c.pass}, {"feedback_commutator", c.feedback.total_commutator}};
  if (c.measurement) {
    cert["premeasurement_commutator"] = c.measurement->premeasurement_commutator;
    cert["pointer_commutator"] = c.measurement->pointer_commutator;
  }
  if (c.way) cert["observable_commutator"] = c.way->observable_commutator;
  j["certification"] = std::move(cert);
  Json diag = {{"marginal_gap", r.diagnostics.marginal_gap},
               {"entropy_chain_slack", r.diagnostics.entropy_chain_slack},
               {"internal_form_deviation", r.diagnostics.internal_form_deviation}};
  if (r.diagnostics.order_gap) diag["order_gap"] = *r.diagnostics.order_gap;
  j["diagnostics"] = std::move(diag);
  j["system_after"] = to_json(r.system_after.matrix());
  return j;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_header() {
  return "name,scenario,sweep_parameter,sweep_value,status,label,probability,work,entropy_change,energy_change,"
         "f1,f2,f3";
}

inline std::string records_to_csv(const std::vector<RunRecord>& recs) {
  std::string out = csv_header() + "\n";
  for (const auto& rec : recs) {
    const std::string prefix = rec.parsed.name + "," + rec.parsed.scenario + "," +
                               rec.parsed.sweep_parameter.value_or("") + "," +
                               (rec.parsed.sweep_value ? format_double(*rec.parsed.sweep_value) : "") + "," +
                               rec.status + ",";
    if (!rec.result) {
      out += prefix + ",,,,,,,\n";
      continue;
    }
    const auto* f = rec.features ? &*rec.features : nullptr;
    const std::string flags = f ? std::string(f->f1_repeatable ? "1" : "0") + "," + (f->f2_entropy_invariant ? "1" : "0") +
                                      "," + (f->f3_positive_work ? "1" : "0")
                                : ",,";
    for (const auto& b : rec.result->branches)
      out += prefix + b.label + "," + format_double(b.probability) + "," + format_double(b.work) + "," +
             format_double(b.entropy_change) + "," + format_double(b.energy_change) + "," + flags + "\n";
  }
  return out;
}

/// Long-format plot data: sweep value, outcome, W_x, weight entropy change.
inline std::string records_to_plot(const std::vector<RunRecord>& recs) {
  std::string out = "sweep_value,label,work,entropy_change\n";
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& rec = recs[i];
    if (!rec.result) continue;
    const double x = rec.parsed.sweep_value.value_or(double(i));
    for (const auto& b : rec.result->branches)
      out += format_double(x) + "," + b.label + "," + format_double(b.work) + "," + format_double(b.entropy_change) + "\n";
  }
  return out;
}

}  // namespace szilard
