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

// Brute-force ground truth for small header widths. Everything here works
// on explicit header values and matches rules with Prefix::Matches; nothing
// goes through the BDD engine except evaluating the model under test.

#ifndef INVMODEL_ORACLE_H_
#define INVMODEL_ORACLE_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "invmodel/model.h"
#include "invmodel/random.h"
#include "invmodel/rules.h"

namespace invmodel {

inline constexpr uint32_t kMaxOracleBits = 16;

struct ReferenceModel {
  uint32_t bits = 0;
  // Vector of every header.
  ExplicitTable table;
  // Headers per vector, ascending.
  std::map<PlainVector, std::vector<uint64_t>> classes;
};

// Throws std::invalid_argument for L > kMaxOracleBits.
ReferenceModel BuildReferenceModel(const Network& network);
ReferenceModel ReferenceFromTable(uint32_t bits, ExplicitTable table);

// Top-priority action per device, by linear scan of the rules.
PlainVector OracleEval(const Network& network, uint64_t header);

struct Mismatch {
  uint64_t header;
  PlainVector expected;
  PlainVector actual;
};

struct Comparison {
  bool ok = true;
  // Structural problems (invariants, class count) or empty.
  std::string problem;
  std::vector<Mismatch> mismatches;  // capped at `max_mismatches`
  size_t mismatch_count = 0;

  std::string Describe(uint32_t bits) const;
};

// Checks the model invariants, then every header's vector, then that the
// model has exactly one entry per reference class.
Comparison Compare(const InverseModel& model, const ReferenceModel& ref,
                   size_t max_mismatches = 8);

// Every header's vector under `model`, by evaluation.
ExplicitTable Tabulate(const InverseModel& model);

// Row-wise overwrite of two tables.
ExplicitTable OverwriteTables(const ExplicitTable& a, const ExplicitTable& b);

// Headers matched by `rule` and by no strictly higher-priority rule of
// `table`, ascending. Empty if the rule is not in the table.
std::vector<uint64_t> RuleInverseOracle(const Rule& rule,
                                        const RuleTable& table);

// The headers of `p`, ascending.
std::vector<uint64_t> Enumerate(Predicate p);

struct OracleSuiteOptions {
  uint64_t seed = 1;
  size_t instances = 100;
  size_t batches = 4;
  uint32_t bits = 8;
};

struct OracleSuiteResult {
  bool ok = true;
  size_t checks = 0;
  uint64_t failing_seed = 0;
  std::string failure;
};

// The differential suite behind `oracle-check`: random networks and traces,
// every strategy and the rule inverses compared against the oracle. Stops at
// the first mismatch.
OracleSuiteResult RunOracleSuite(const OracleSuiteOptions& options,
                                 std::ostream* log = nullptr);

}  // namespace invmodel

#endif  // INVMODEL_ORACLE_H_
