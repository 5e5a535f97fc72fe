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

#include "invmodel/oracle.h"

#include <stdexcept>

#include "absl/strings/str_cat.h"
#include "invmodel/engine.h"

namespace invmodel {
namespace {

void CheckBits(uint32_t bits) {
  if (bits > kMaxOracleBits) {
    throw std::invalid_argument(absl::StrCat("oracle supports at most ",
                                             kMaxOracleBits, " header bits, got ",
                                             bits));
  }
}

std::string HeaderBits(uint64_t x, uint32_t bits) {
  return Header::FromUint(x, bits).ToString();
}

}  // namespace

PlainVector OracleEval(const Network& network, uint64_t header) {
  const Header h = Header::FromUint(header, network.predicates().header_bits());
  PlainVector out(network.size(), kNoUpdate);
  for (DeviceIndex d = 0; d < network.size(); ++d) {
    const Rule* best = nullptr;
    for (const Rule* r : network.table(d).RulesByPriority()) {
      if (!r->prefix.Matches(h)) continue;
      if (best != nullptr && best->priority == r->priority) {
        throw std::logic_error(absl::StrCat("device ", d,
                                            " has two top rules for ",
                                            h.ToString()));
      }
      if (best == nullptr) best = r;
    }
    if (best == nullptr) {
      throw std::logic_error(absl::StrCat("device ", d, " has no rule for ",
                                          h.ToString()));
    }
    out[d] = best->action;
  }
  return out;
}

ReferenceModel ReferenceFromTable(uint32_t bits, ExplicitTable table) {
  CheckBits(bits);
  ReferenceModel ref;
  ref.bits = bits;
  ref.table = std::move(table);
  for (uint64_t x = 0; x < ref.table.size(); ++x) {
    ref.classes[ref.table[x]].push_back(x);
  }
  return ref;
}

ReferenceModel BuildReferenceModel(const Network& network) {
  const uint32_t bits = network.predicates().header_bits();
  CheckBits(bits);
  ExplicitTable table(size_t{1} << bits);
  for (uint64_t x = 0; x < table.size(); ++x) table[x] = OracleEval(network, x);
  return ReferenceFromTable(bits, std::move(table));
}

ExplicitTable Tabulate(const InverseModel& model) {
  const uint32_t bits = model.predicates().header_bits();
  CheckBits(bits);
  ExplicitTable out(size_t{1} << bits);
  for (uint64_t x = 0; x < out.size(); ++x) {
    out[x] = Evaluate(model, Header::FromUint(x, bits)).ToPlain();
  }
  return out;
}

ExplicitTable OverwriteTables(const ExplicitTable& a, const ExplicitTable& b) {
  if (a.size() != b.size()) throw std::invalid_argument("table size mismatch");
  ExplicitTable out(a.size());
  for (size_t x = 0; x < a.size(); ++x) {
    out[x].resize(a[x].size());
    for (size_t i = 0; i < a[x].size(); ++i) {
      out[x][i] = b[x][i] == kNoUpdate ? a[x][i] : b[x][i];
    }
  }
  return out;
}

std::string Comparison::Describe(uint32_t bits) const {
  if (ok) return "ok";
  std::string out = problem;
  if (mismatch_count > 0) {
    absl::StrAppend(&out, out.empty() ? "" : "; ", mismatch_count,
                    " header(s) differ");
    for (const Mismatch& m : mismatches) {
      absl::StrAppend(&out, "\n  ", HeaderBits(m.header, bits), " expected (",
                      FormatVector(m.expected), ") got (",
                      FormatVector(m.actual), ")");
    }
  }
  return out;
}

Comparison Compare(const InverseModel& model, const ReferenceModel& ref,
                   size_t max_mismatches) {
  Comparison out;
  InvariantCheck inv = CheckInvariants(model);
  if (!inv.ok) {
    out.ok = false;
    out.problem = absl::StrCat("invalid model: ", inv.violation);
    return out;
  }
  if (model.predicates().header_bits() != ref.bits) {
    out.ok = false;
    out.problem = "header width differs";
    return out;
  }
  for (uint64_t x = 0; x < ref.table.size(); ++x) {
    PlainVector actual =
        Evaluate(model, Header::FromUint(x, ref.bits)).ToPlain();
    if (actual != ref.table[x]) {
      out.ok = false;
      if (out.mismatches.size() < max_mismatches) {
        out.mismatches.push_back({x, ref.table[x], std::move(actual)});
      }
      ++out.mismatch_count;
    }
  }
  if (out.ok && model.size() != ref.classes.size()) {
    out.ok = false;
    out.problem = absl::StrCat("model has ", model.size(),
                               " entries, reference has ", ref.classes.size(),
                               " classes");
  }
  return out;
}

std::vector<uint64_t> RuleInverseOracle(const Rule& rule,
                                        const RuleTable& table) {
  std::vector<uint64_t> out;
  if (!table.Contains(rule.id)) return out;
  const uint32_t bits = rule.match.store()->header_bits();
  CheckBits(bits);
  std::vector<const Rule*> higher;
  for (const Rule* r : table.RulesByPriority()) {
    if (r->priority > rule.priority) higher.push_back(r);
  }
  for (uint64_t x = 0; x < (uint64_t{1} << bits); ++x) {
    const Header h = Header::FromUint(x, bits);
    if (!rule.prefix.Matches(h)) continue;
    bool shadowed = false;
    for (const Rule* r : higher) {
      if (r->prefix.Matches(h)) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) out.push_back(x);
  }
  return out;
}

std::vector<uint64_t> Enumerate(Predicate p) {
  const uint32_t bits = p.store()->header_bits();
  CheckBits(bits);
  std::vector<uint64_t> out;
  for (uint64_t x = 0; x < (uint64_t{1} << bits); ++x) {
    if (p.store()->Contains(p, Header::FromUint(x, bits))) out.push_back(x);
  }
  return out;
}

OracleSuiteResult RunOracleSuite(const OracleSuiteOptions& options,
                                 std::ostream* log) {
  OracleSuiteResult result;
  constexpr Strategy kStrategies[] = {Strategy::kApFull, Strategy::kPerRule,
                                      Strategy::kMr2, Strategy::kBaseSeq};
  for (size_t i = 0; i < options.instances && result.ok; ++i) {
    const uint64_t seed = options.seed + i;
    InstanceGenerator gen(seed, options.bits);
    PredicateStore store(options.bits);
    NetworkShape shape;
    shape.devices = gen.Uniform(2, 4);
    VectorStore vectors(shape.devices);
    auto fail = [&](std::string what) {
      result.ok = false;
      result.failing_seed = seed;
      result.failure = std::move(what);
    };
    try {
      Network network = gen.RandomNetwork(store, shape);
      std::vector<ModelManager> managers;
      for (Strategy s : kStrategies) managers.emplace_back(network, vectors, s);
      for (size_t b = 0; b <= options.batches && result.ok; ++b) {
        if (b > 0) {
          BatchUpdate batch = gen.RandomBatch(managers.front().network(), 4);
          for (ModelManager& m : managers) m.Apply(batch);
        }
        const Network& current = managers.front().network();
        ReferenceModel ref = BuildReferenceModel(current);
        for (ModelManager& m : managers) {
          Comparison c = Compare(m.model(), ref);
          ++result.checks;
          if (!c.ok) {
            fail(absl::StrCat("strategy ", StrategyName(m.strategy()),
                              " after batch ", b, ": ",
                              c.Describe(options.bits)));
            break;
          }
        }
        for (DeviceIndex d = 0; d < current.size() && result.ok; ++d) {
          const RuleTable& table = current.table(d);
          for (const Rule* r : table.RulesByPriority()) {
            ++result.checks;
            if (Enumerate(table.Inverse(r->id)) != RuleInverseOracle(*r, table)) {
              fail(absl::StrCat("rule ", r->id.value, " on device ", d,
                                ": cached inverse differs from the oracle"));
              break;
            }
          }
        }
      }
    } catch (const std::exception& e) {
      fail(absl::StrCat("exception: ", e.what()));
    }
    if (log != nullptr && (i + 1) % 10 == 0) {
      *log << "oracle-check: " << (i + 1) << "/" << options.instances
           << " instances\n";
    }
  }
  return result;
}

}  // namespace invmodel
