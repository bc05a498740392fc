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

// szilard: batch runner for engine scenarios and the feature scan.
//
// Exit codes: 0 success, 1 parse/IO/usage error, 2 hard assertion,
// 3 certification failure of a conforming scenario.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "szilard/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitCertification = 3;

template <typename T>
std::optional<T> env_value(const char* name) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    if constexpr (std::is_same_v<T, std::uint64_t>) return static_cast<T>(std::stoull(raw));
    else return static_cast<T>(std::stod(raw));
  } catch (const std::exception&) {
    throw szilard::ValidationError(name, "not a number");
  }
}

void print_summary(const std::vector<szilard::RunRecord>& recs) {
  std::fprintf(stderr, "%-28s %-10s %-14s %-8s %-14s %-14s %s\n", "config", "sweep", "status", "outcome", "p", "W",
               "dS_W");
  for (const auto& r : recs) {
    const std::string sweep = r.parsed.sweep_value ? szilard::format_double(*r.parsed.sweep_value) : "-";
    if (!r.result) {
      std::fprintf(stderr, "%-28s %-10s %-14s\n", r.parsed.name.c_str(), sweep.c_str(), r.status.c_str());
      continue;
    }
    for (const auto& b : r.result->branches)
      std::fprintf(stderr, "%-28s %-10s %-14s %-8s %-14.6g %-14.6g %.6g\n", r.parsed.name.c_str(), sweep.c_str(),
                   r.status.c_str(), b.label.c_str(), b.probability, b.work, b.entropy_change);
  }
}

int write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return kExitUsage;
  }
  out << text;
  return out ? kExitOk : kExitUsage;
}

int run_command(const std::string& file, const std::string& format, const std::string& out_path, bool plot,
                szilard::RunOverrides ov) {
  using namespace szilard;
  if (!ov.seed) ov.seed = env_value<std::uint64_t>("SZILARD_SEED");
  if (!ov.tol_s) ov.tol_s = env_value<double>("SZILARD_TOL_S");
  if (!ov.kb) ov.kb = env_value<double>("SZILARD_KB");
  std::vector<ParsedConfig> configs;
  try {
    configs = parse_scenario(file, ov);
  } catch (const ValidationError& e) {
    std::cerr << file << ": validation error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<RunRecord> recs;
  int status = kExitOk;
  for (auto& pc : configs) {
    RunRecord rec{pc, std::nullopt, std::nullopt, "ok", ""};
    try {
      rec.result = run_cycle(pc.config);
      rec.features = evaluate_features(*rec.result, pc.config);
      if (!rec.result->certification.pass) rec.status = "uncertified";
    } catch (const CertificationError& e) {
      rec.status = "certification_failed";
      rec.message = e.what();
      status = std::max(status, kExitCertification);
    } catch (const InternalInconsistency& e) {
      std::cerr << "hard assertion: " << e.what() << "\n";
      return kExitAssertion;
    } catch (const Error& e) {
      std::cerr << "error in '" << pc.name << "': " << e.what() << "\n";
      return kExitUsage;
    }
    recs.push_back(std::move(rec));
  }

  std::string text;
  if (plot) {
    text = records_to_plot(recs);
  } else if (format == "csv") {
    text = records_to_csv(recs);
  } else {
    Json arr = Json::array();
    for (const auto& r : recs) arr.push_back(record_to_json(r));
    text = arr.dump(2) + "\n";
  }
  print_summary(recs);
  const int io = write_output(text, out_path);
  return io != kExitOk ? io : status;
}

int scan_command(std::size_t count, std::uint64_t seed) {
  using namespace szilard;
  ScanReport rep;
  try {
    rep = impossibility_scan(count, seed);
  } catch (const InternalInconsistency& e) {
    std::cerr << "hard assertion: " << e.what() << "\n";
    return kExitAssertion;
  }
  Json j;
  j["count"] = rep.count;
  j["seed"] = seed;
  j["all_three"] = rep.all_three;
  j["certification_failures"] = rep.certification_failures;
  j["triples"] = rep.triples;
  j["f1_f2_not_f3"] = rep.f1_f2_not_f3;
  j["f1_f3_not_f2"] = rep.f1_f3_not_f2;
  j["f2_f3_not_f1"] = rep.f2_f3_not_f1;
  j["max_order_gap"] = rep.max_order_gap;
  j["min_concavity_slack"] = number_or_null(rep.min_concavity_slack);
  std::cout << j.dump(2) << "\n";
  return rep.all_three == 0 ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Szilard engine lab"};
  app.require_subcommand(1);

  std::string file, format = "json", out_path;
  bool plot = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_s, kb;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("file", file, "Scenario JSON file")->required();
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--out", out_path, "Output path (default stdout)");
  run->add_option("--seed", seed, "Seed for random scenarios");
  run->add_option("--tol-s", tol_s, "Entropy tolerance");
  run->add_option("--kb", kb, "Boltzmann constant");
  run->add_flag("--plot", plot, "Emit plot data (sweep value, outcome, W, dS_W)");

  std::size_t count = 500;
  std::uint64_t scan_seed = 1;
  auto* scan = app.add_subcommand("scan", "Feature scan over random conforming engines");
  scan->add_option("--count", count, "Number of engines");
  scan->add_option("--seed", scan_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (*run) return run_command(file, format, out_path, plot, {seed, tol_s, kb});
    if (*scan) {
      if (scan->count("--seed") == 0)
        if (auto s = env_value<std::uint64_t>("SZILARD_SEED")) scan_seed = *s;
      return scan_command(count, scan_seed);
    }
  } catch (const szilard::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
