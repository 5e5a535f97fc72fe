// Copyright 2026 The invmodel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// invmodel: generate datasets, maintain and verify inverse models, benchmark
// the update strategies and run the oracle.
//
//   invmodel gen --topo example --bits 8 --fail A-C --out data/example
//   invmodel run --dir data/example --properties props.json
//   invmodel bench --dir data/ft8 --strategies mr2,per-rule
//   invmodel oracle-check --instances 200
//   invmodel dump-ecs --dir data/example --after-trace
//
// Options may also come from an INI file given before the subcommand,
// with one section per subcommand:
//
//   invmodel --config run.ini run --dir data/example
//
//   [run]
//   strategy=ap
//   subspaces=8
//
// Exit codes: 0 ok, 1 usage or parse error, 2 ill-behaved dataset,
// 3 invariant violation, 4 oracle mismatch.

#include <sys/resource.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "invmodel/engine.h"
#include "invmodel/io.h"
#include "invmodel/oracle.h"
#include "invmodel/topogen.h"
#include "invmodel/verify.h"
#include "json.hpp"

namespace invmodel {
namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kIllBehaved = 2,
  kInvariant = 3,
  kOracleMismatch = 4,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------------------
// Dataset files

struct DatasetPaths {
  std::string dir;
  std::string topology;
  std::string rules;
  std::string trace;
  std::optional<uint32_t> bits;

  void AddOptions(CLI::App* app) {
    app->add_option("--dir", dir,
                    "Dataset directory (topology.json, rules.txt, trace.txt, "
                    "meta.json)");
    app->add_option("--topology", topology, "Topology JSON (overrides --dir)");
    app->add_option("--rules", rules, "Rule file (overrides --dir)");
    app->add_option("--trace", trace, "Update trace (overrides --dir)");
    app->add_option("--bits", bits, "Header width L (default: meta.json, else 32)");
  }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json ReadJson(const std::string& path) {
  try {
    return nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(absl::StrCat(path, ": ", e.what()));
  }
}

struct Dataset {
  uint32_t bits = 32;
  Topology topology;
  std::vector<RuleLine> rules;
  std::vector<TraceBatch> trace;
  std::string rules_file;
  std::string trace_file;
};

Dataset LoadDataset(const DatasetPaths& p) {
  auto pick = [&](const std::string& explicit_path, const char* name) {
    if (!explicit_path.empty()) return explicit_path;
    if (p.dir.empty()) return std::string();
    return absl::StrCat(p.dir, "/", name);
  };
  Dataset d;
  const std::string topo = pick(p.topology, "topology.json");
  d.rules_file = pick(p.rules, "rules.txt");
  d.trace_file = pick(p.trace, "trace.txt");
  if (topo.empty() || d.rules_file.empty()) {
    throw UsageError("need --dir or both --topology and --rules");
  }
  d.topology = Topology::FromJson(ReadJson(topo));
  if (p.bits.has_value()) {
    d.bits = *p.bits;
  } else if (!p.dir.empty() && std::ifstream(absl::StrCat(p.dir, "/meta.json"))) {
    d.bits = ReadJson(absl::StrCat(p.dir, "/meta.json")).value("bits", 32u);
  }
  {
    std::ifstream in(d.rules_file);
    if (!in) throw UsageError(absl::StrCat("cannot open ", d.rules_file));
    d.rules = ParseRules(in, d.rules_file);
  }
  if (std::ifstream in(d.trace_file); in) {
    d.trace = ParseTrace(in, d.trace_file);
  } else if (!p.trace.empty()) {
    throw UsageError(absl::StrCat("cannot open ", d.trace_file));
  }
  return d;
}

// Stores, loader and manager for one run over a dataset.
struct Session {
  explicit Session(const Dataset& d, Strategy strategy)
      : store(d.bits), vectors(d.topology.device_count()),
        loader(store, d.topology) {
    if (d.topology.device_count() == 0) throw UsageError("topology has no devices");
    manager = std::make_unique<ModelManager>(loader.Load(d.rules, d.rules_file),
                                             vectors, strategy);
  }

  BatchUpdate Next(const Dataset& d, size_t i) {
    return loader.Convert(d.trace[i], manager->network(), d.trace_file);
  }

  PredicateStore store;
  VectorStore vectors;
  RuleLoader loader;
  std::unique_ptr<ModelManager> manager;
};

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError(absl::StrCat("cannot write ", path));
  return out;
}

// --------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string topo = "example";
  size_t k = 4;
  uint32_t bits = 32;
  size_t prefixes = 11;
  std::vector<std::string> fail;
  bool device_load = false;
  std::string out;
};

int RunGen(const GenOptions& o) {
  GeneratedDataset d;
  if (o.topo == "example") {
    d = GenExample(o.bits, o.prefixes);
  } else if (o.topo == "fattree") {
    d = GenFatTree(o.k, o.bits);
  } else {
    throw UsageError(absl::StrCat("unknown --topo '", o.topo, "'"));
  }
  if (o.device_load) d = MakeDeviceLoad(d);
  for (const std::string& link : o.fail) {
    std::vector<std::string> ends = absl::StrSplit(link, '-');
    if (ends.size() != 2) {
      throw UsageError(absl::StrCat("--fail wants <a>-<b>, got '", link, "'"));
    }
    GenFailureTrace(d, ends[0], ends[1]);
  }
  WriteDataset(d, o.out);
  const nlohmann::json meta = d.Metadata();
  std::cout << "wrote " << o.out << ": " << meta["devices"] << " devices, "
            << meta["directed_switch_links"] << " directed switch links, "
            << meta["rules"] << " rules, " << meta["trace_batches"]
            << " trace batches\n";
  if (!d.disconnected.empty()) {
    std::cout << "warning: " << d.disconnected.size()
              << " device(s) lost a route and drop it now\n";
  }
  return kOk;
}

// --------------------------------------------------------------------------
// run

struct RunOptions {
  DatasetPaths paths;
  std::string strategy = "mr2";
  size_t subspaces = 1;
  std::string properties;
  std::string report;
  std::string emit_changes;
  std::string dump_model;
  bool check_invariants = false;
};

int RunRun(const RunOptions& o) {
  const Dataset d = LoadDataset(o.paths);
  PropertySpec spec;
  if (!o.properties.empty()) {
    spec = PropertySpec::FromJson(ReadJson(o.properties));
    spec.Validate(d.topology);
  }
  Session s(d, ParseStrategy(o.strategy));
  ModelManager& m = *s.manager;
  m.set_check_invariants(o.check_invariants);
  if (o.subspaces > 1) m.Partition(o.subspaces);

  std::optional<std::ofstream> report;
  if (!o.report.empty()) report = OpenOut(o.report);
  std::optional<std::ofstream> changes;
  if (!o.emit_changes.empty()) changes = OpenOut(o.emit_changes);
  auto write_records = [&](const VerificationReport& r, size_t batch) {
    if (!report.has_value()) return;
    for (const auto& [key, rec] : r.records()) {
      nlohmann::json j = RecordToJson(rec);
      j["batch"] = batch;
      *report << j.dump() << "\n";
    }
  };

  std::cout << "loaded " << d.rules.size() << " rules (ids 1.."
            << d.rules.size() << ") on " << d.topology.device_count()
            << " devices, L=" << d.bits << ", strategy "
            << StrategyName(m.strategy()) << ", subspaces " << o.subspaces
            << "\n";
  VerificationReport current = VerifyModel(m.model(), spec, d.topology);
  write_records(current, 0);
  std::cout << "batch 0: " << m.model().size() << " classes, "
            << current.failures() << " failing checks\n";

  for (size_t i = 0; i < d.trace.size(); ++i) {
    const uint64_t first_id = s.loader.next_id();
    BatchUpdate batch = s.Next(d, i);
    ChangeSummary summary = m.Apply(batch);
    RecheckResult r = IncrementalRecheck(current, m.model(), summary, spec,
                                         d.topology);
    current = std::move(r.merged);
    write_records(r.delta, i + 1);
    if (changes.has_value()) {
      nlohmann::json j = ChangeSummaryToJson(summary);
      j["batch"] = i + 1;
      *changes << j.dump() << "\n";
    }
    std::cout << "batch " << i + 1 << ": +" << batch.inserts.size() << " -"
              << batch.deletes.size();
    if (!batch.inserts.empty()) {
      std::cout << " (ids " << first_id << ".." << s.loader.next_id() - 1 << ")";
    }
    std::cout << ", " << summary.overwrites << " overwrites, "
              << m.model().size() << " classes, " << summary.changes.size()
              << " changed regions, " << r.classes_rechecked
              << " classes rechecked, " << current.failures()
              << " failing checks, " << std::fixed << std::setprecision(6)
              << summary.timing.total_seconds << " s\n";
    std::cout.unsetf(std::ios::fixed);
  }
  if (!spec.checks.empty()) {
    std::cout << "\n";
    current.WriteSummary(std::cout, spec);
  }
  if (!o.dump_model.empty()) OpenOut(o.dump_model) << DumpModel(m.model());
  return kOk;
}

// --------------------------------------------------------------------------
// bench

struct BenchOptions {
  DatasetPaths paths;
  std::string strategies = "mr2,per-rule";
  size_t repeat = 1;
  std::string csv;
};

double Percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t idx = static_cast<size_t>(std::ceil(q * v.size()));
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

long PeakRssKb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

int RunBench(const BenchOptions& o) {
  const Dataset d = LoadDataset(o.paths);
  std::optional<std::ofstream> csv;
  if (!o.csv.empty()) {
    csv = OpenOut(o.csv);
    *csv << "strategy,round,batch,ops,turnaround_s,mr1_s,r2_s,apply_s,"
            "overwrites,classes\n";
  }
  std::cout << std::left << std::setw(10) << "strategy" << std::right
            << std::setw(8) << "batches" << std::setw(13) << "mean_s"
            << std::setw(13) << "p99_s" << std::setw(13) << "mr1_s"
            << std::setw(13) << "r2_s" << std::setw(13) << "apply_s"
            << std::setw(12) << "peak_kb" << "\n";
  for (const std::string& name :
       std::vector<std::string>(absl::StrSplit(o.strategies, ','))) {
    const Strategy strategy = ParseStrategy(name);
    std::vector<double> turnaround;
    double mr1 = 0, r2 = 0, apply = 0;
    for (size_t round = 0; round < o.repeat; ++round) {
      Session s(d, strategy);
      for (size_t i = 0; i < d.trace.size(); ++i) {
        BatchUpdate batch = s.Next(d, i);
        ChangeSummary c = s.manager->Apply(batch);
        turnaround.push_back(c.timing.total_seconds);
        mr1 += c.timing.mr1_seconds;
        r2 += c.timing.r2_seconds;
        apply += c.timing.apply_seconds;
        if (csv.has_value()) {
          *csv << name << "," << round << "," << i + 1 << ","
               << batch.inserts.size() + batch.deletes.size() << ","
               << c.timing.total_seconds << "," << c.timing.mr1_seconds << ","
               << c.timing.r2_seconds << "," << c.timing.apply_seconds << ","
               << c.overwrites << "," << s.manager->model().size() << "\n";
        }
      }
    }
    const double n = std::max<double>(1, turnaround.size());
    double mean = 0;
    for (double t : turnaround) mean += t;
    std::cout << std::left << std::setw(10) << name << std::right
              << std::setw(8) << turnaround.size() << std::scientific
              << std::setprecision(3) << std::setw(13) << mean / n
              << std::setw(13) << Percentile(turnaround, 0.99) << std::setw(13)
              << mr1 / n << std::setw(13) << r2 / n << std::setw(13)
              << apply / n;
    std::cout.unsetf(std::ios::scientific);
    std::cout << std::setw(12) << PeakRssKb() << "\n";
  }
  return kOk;
}

// --------------------------------------------------------------------------
// oracle-check

struct OracleOptions {
  uint64_t seed = 1;
  size_t instances = 100;
  size_t batches = 4;
  uint32_t bits = 8;
  DatasetPaths paths;
};

int RunOracleCheck(const OracleOptions& o) {
  if (!o.paths.dir.empty() || !o.paths.rules.empty()) {
    // Dataset mode: every strategy after every batch against the reference.
    const Dataset d = LoadDataset(o.paths);
    if (d.bits > kMaxOracleBits) {
      throw UsageError(absl::StrCat("oracle-check needs L <= ", kMaxOracleBits,
                                    ", dataset has ", d.bits));
    }
    for (Strategy strategy : {Strategy::kApFull, Strategy::kPerRule,
                              Strategy::kMr2, Strategy::kBaseSeq}) {
      Session s(d, strategy);
      for (size_t i = 0; i <= d.trace.size(); ++i) {
        if (i > 0) s.manager->Apply(s.Next(d, i - 1));
        Comparison c = Compare(s.manager->model(),
                               BuildReferenceModel(s.manager->network()));
        if (!c.ok) {
          std::cout << "MISMATCH strategy " << StrategyName(strategy)
                    << " after batch " << i << ": " << c.Describe(d.bits) << "\n";
          return kOracleMismatch;
        }
      }
    }
    std::cout << "oracle-check: dataset matches the oracle under every strategy\n";
    return kOk;
  }
  OracleSuiteOptions so;
  so.seed = o.seed;
  so.instances = o.instances;
  so.batches = o.batches;
  so.bits = o.bits;
  OracleSuiteResult r = RunOracleSuite(so, &std::cout);
  if (!r.ok) {
    std::cout << "MISMATCH (seed " << r.failing_seed << "): " << r.failure << "\n";
    return kOracleMismatch;
  }
  std::cout << "oracle-check: " << r.checks << " checks passed (seeds "
            << o.seed << ".." << o.seed + o.instances - 1 << ")\n";
  return kOk;
}

// --------------------------------------------------------------------------
// dump-ecs

struct DumpOptions {
  DatasetPaths paths;
  std::string strategy = "mr2";
  bool after_trace = false;
  std::string out;
};

int RunDump(const DumpOptions& o) {
  const Dataset d = LoadDataset(o.paths);
  Session s(d, ParseStrategy(o.strategy));
  if (o.after_trace) {
    for (size_t i = 0; i < d.trace.size(); ++i) s.manager->Apply(s.Next(d, i));
  }
  const std::string dump = DumpModel(s.manager->model());
  if (o.out.empty()) {
    std::cout << dump;
  } else {
    OpenOut(o.out) << dump;
  }
  std::cerr << s.manager->model().size() << " equivalence classes\n";
  if (std::optional<Rational> delta = AverageDifferenceRatio(s.manager->model())) {
    std::cerr << "average agreement ratio (delta): " << *delta << " = "
              << delta->convert_to<double>() << "\n";
  }
  return kOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Inverse-model data plane verification"};
  app.set_config("--config", "", "INI file with [gen]/[run]/[bench]/... sections");
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a dataset");
  gen_cmd->add_option("--topo", gen.topo, "example | fattree")
      ->check(CLI::IsMember({"example", "fattree"}));
  gen_cmd->add_option("--k", gen.k, "Fat-tree parameter (even)");
  gen_cmd->add_option("--bits", gen.bits, "Header width: 8, 16 or 32");
  gen_cmd->add_option("--prefixes", gen.prefixes, "Example: prefixes per subnet");
  gen_cmd->add_option("--fail", gen.fail, "Fail link <a>-<b> (repeatable)");
  gen_cmd->add_flag("--device-load", gen.device_load,
                    "Start from default rules, install each device as a batch");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Build, update and verify");
  run.paths.AddOptions(run_cmd);
  run_cmd->add_option("--strategy", run.strategy, "ap | per-rule | mr2 | base");
  run_cmd->add_option("--subspaces", run.subspaces, "Subspace count");
  run_cmd->add_option("--properties", run.properties, "Property spec JSON");
  run_cmd->add_option("--report", run.report, "Verification report (JSON lines)");
  run_cmd->add_option("--emit-changes", run.emit_changes,
                      "Per-batch change summaries (JSON lines)");
  run_cmd->add_option("--dump-model", run.dump_model, "Final model dump");
  run_cmd->add_flag("--check-invariants", run.check_invariants,
                    "Compare against a full rebuild after every batch");

  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time the trace per strategy");
  bench.paths.AddOptions(bench_cmd);
  bench_cmd->add_option("--strategies", bench.strategies, "Comma-separated list");
  bench_cmd->add_option("--repeat", bench.repeat, "Rounds per strategy");
  bench_cmd->add_option("--csv", bench.csv, "Per-batch CSV output");

  OracleOptions oracle;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-check", "Differential check against brute force");
  oracle_cmd->add_option("--seed", oracle.seed, "First seed");
  oracle_cmd->add_option("--instances", oracle.instances, "Random instances");
  oracle_cmd->add_option("--batches", oracle.batches, "Batches per instance");
  oracle_cmd->add_option("--bits", oracle.bits, "Header width (<= 16)");
  oracle_cmd->add_option("--dir", oracle.paths.dir,
                         "Check a dataset instead of random instances");

  DumpOptions dump;
  CLI::App* dump_cmd = app.add_subcommand("dump-ecs", "Print the equivalence classes");
  dump.paths.AddOptions(dump_cmd);
  dump_cmd->add_option("--strategy", dump.strategy, "ap | per-rule | mr2 | base");
  dump_cmd->add_flag("--after-trace", dump.after_trace, "Apply the trace first");
  dump_cmd->add_option("--out", dump.out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (gen_cmd->parsed()) return RunGen(gen);
    if (run_cmd->parsed()) return RunRun(run);
    if (bench_cmd->parsed()) return RunBench(bench);
    if (oracle_cmd->parsed()) return RunOracleCheck(oracle);
    if (dump_cmd->parsed()) return RunDump(dump);
  } catch (const IllBehavedError& e) {
    std::cerr << "ill-behaved: " << e.what() << "\n";
    return kIllBehaved;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace
}  // namespace invmodel

int main(int argc, char** argv) { return invmodel::Main(argc, argv); }
