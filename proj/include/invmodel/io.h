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

// Rule and update-trace files.
//
// Rule file, one rule per line, `#` starts a comment:
//
//   <device> <prefix>/<len> <priority> <action>
//
// Trace file: batches separated by blank lines, each line one of
//
//   + <device> <prefix>/<len> <priority> <action>
//   - <device> <rule-id>
//
// Rule ids are assigned on load: 1, 2, ... in rule-file order, continuing
// through the trace inserts in order.

#ifndef INVMODEL_IO_H_
#define INVMODEL_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "invmodel/predicate.h"
#include "invmodel/rules.h"
#include "invmodel/verify.h"

namespace invmodel {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string_view file, size_t line, std::string_view message);
  const std::string& file() const { return file_; }
  size_t line() const { return line_; }

 private:
  std::string file_;
  size_t line_;
};

struct RuleLine {
  std::string device;
  Prefix prefix;
  uint32_t priority = 0;
  std::string action;
  // Source line, 0 if generated.
  size_t line = 0;

  friend bool operator==(const RuleLine& a, const RuleLine& b) {
    return a.device == b.device && a.prefix == b.prefix &&
           a.priority == b.priority && a.action == b.action;
  }
};

std::string FormatRuleLine(const RuleLine& r);

struct TraceOp {
  enum class Kind { kInsert, kDelete };
  Kind kind = Kind::kInsert;
  RuleLine rule;  // kInsert
  std::string device;  // kDelete
  uint64_t id = 0;     // kDelete
  size_t line = 0;
};

using TraceBatch = std::vector<TraceOp>;

std::vector<RuleLine> ParseRules(std::istream& in, std::string_view file);
std::vector<TraceBatch> ParseTrace(std::istream& in, std::string_view file);
void WriteRules(std::ostream& out, const std::vector<RuleLine>& rules);
void WriteTrace(std::ostream& out, const std::vector<TraceBatch>& batches);

// Turns parsed lines into rules of a network over `topo`'s devices.
class RuleLoader {
 public:
  RuleLoader(PredicateStore& store, const Topology& topo);

  // Builds the initial network; ids start at 1. Throws ParseError for
  // unknown devices, bad actions or prefixes longer than L, and
  // IllBehavedError (message prefixed with file:line where possible) for
  // tables that are not well-behaved.
  Network Load(const std::vector<RuleLine>& rules, std::string_view file);

  // Converts one trace batch, assigning ids to its inserts.
  BatchUpdate Convert(const TraceBatch& batch, const Network& current,
                      std::string_view file);

  Rule MakeRule(const RuleLine& line, std::string_view file);
  uint64_t next_id() const { return next_id_; }

 private:
  PredicateStore* store_;
  const Topology* topo_;
  uint64_t next_id_ = 1;
};

}  // namespace invmodel

#endif  // INVMODEL_IO_H_
