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

#include "invmodel/io.h"

#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace invmodel {
namespace {

std::vector<std::string> Fields(const std::string& line) {
  return absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
}

// Drops comments and surrounding whitespace.
std::string Clean(const std::string& raw) {
  std::string line = raw.substr(0, raw.find('#'));
  return std::string(absl::StripAsciiWhitespace(line));
}

RuleLine ParseRuleFields(const std::vector<std::string>& f, size_t first,
                         std::string_view file, size_t line) {
  if (f.size() - first != 4) {
    throw ParseError(file, line,
                     "expected '<device> <prefix>/<len> <priority> <action>'");
  }
  RuleLine r;
  r.line = line;
  r.device = f[first];
  try {
    r.prefix = Prefix::Parse(f[first + 1]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, line, e.what());
  }
  if (!absl::SimpleAtoi(f[first + 2], &r.priority)) {
    throw ParseError(file, line, absl::StrCat("bad priority '", f[first + 2], "'"));
  }
  r.action = f[first + 3];
  try {
    if (ActionValue::Parse(r.action).kind == ActionValue::Kind::kNoUpdate) {
      throw ParseError(file, line, "'-' is not a rule action");
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, line, e.what());
  }
  return r;
}

}  // namespace

ParseError::ParseError(std::string_view file, size_t line,
                       std::string_view message)
    : std::runtime_error(absl::StrCat(std::string(file), ":", line, ": ",
                                      std::string(message))),
      file_(file),
      line_(line) {}

std::string FormatRuleLine(const RuleLine& r) {
  return absl::StrCat(r.device, " ", r.prefix.ToString(), " ", r.priority, " ",
                      r.action);
}

std::vector<RuleLine> ParseRules(std::istream& in, std::string_view file) {
  std::vector<RuleLine> out;
  std::string raw;
  for (size_t line = 1; std::getline(in, raw); ++line) {
    std::string text = Clean(raw);
    if (text.empty()) continue;
    out.push_back(ParseRuleFields(Fields(text), 0, file, line));
  }
  return out;
}

std::vector<TraceBatch> ParseTrace(std::istream& in, std::string_view file) {
  std::vector<TraceBatch> out;
  TraceBatch current;
  std::string raw;
  for (size_t line = 1; std::getline(in, raw); ++line) {
    // Only truly blank lines separate batches; comment lines do not.
    if (absl::StripAsciiWhitespace(raw).empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    std::string text = Clean(raw);
    if (text.empty()) continue;
    std::vector<std::string> f = Fields(text);
    TraceOp op;
    op.line = line;
    if (f[0] == "+") {
      op.kind = TraceOp::Kind::kInsert;
      op.rule = ParseRuleFields(f, 1, file, line);
    } else if (f[0] == "-") {
      op.kind = TraceOp::Kind::kDelete;
      if (f.size() != 3 || !absl::SimpleAtoi(f[2], &op.id)) {
        throw ParseError(file, line, "expected '- <device> <rule-id>'");
      }
      op.device = f[1];
    } else {
      throw ParseError(file, line, "trace lines start with '+' or '-'");
    }
    current.push_back(std::move(op));
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

void WriteRules(std::ostream& out, const std::vector<RuleLine>& rules) {
  for (const RuleLine& r : rules) out << FormatRuleLine(r) << "\n";
}

void WriteTrace(std::ostream& out, const std::vector<TraceBatch>& batches) {
  for (size_t b = 0; b < batches.size(); ++b) {
    if (b > 0) out << "\n";
    for (const TraceOp& op : batches[b]) {
      if (op.kind == TraceOp::Kind::kInsert) {
        out << "+ " << FormatRuleLine(op.rule) << "\n";
      } else {
        out << "- " << op.device << " " << op.id << "\n";
      }
    }
  }
}

RuleLoader::RuleLoader(PredicateStore& store, const Topology& topo)
    : store_(&store), topo_(&topo) {}

Rule RuleLoader::MakeRule(const RuleLine& line, std::string_view file) {
  std::optional<DeviceIndex> device = topo_->FindDevice(line.device);
  if (!device.has_value()) {
    throw ParseError(file, line.line,
                     absl::StrCat("unknown device '", line.device, "'"));
  }
  if (line.prefix.length > store_->header_bits()) {
    throw ParseError(file, line.line,
                     absl::StrCat("prefix ", line.prefix.ToString(),
                                  " is longer than the header (",
                                  store_->header_bits(), " bits)"));
  }
  Rule r;
  r.id = RuleId{next_id_++};
  r.device = *device;
  r.prefix = line.prefix;
  try {
    r.match = store_->FromPrefix(line.prefix);
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, line.line, e.what());
  }
  r.action = InternText(line.action);
  r.priority = line.priority;
  return r;
}

Network RuleLoader::Load(const std::vector<RuleLine>& rules,
                         std::string_view file) {
  Network network(*store_, topo_->device_count());
  for (const RuleLine& line : rules) {
    Rule r = MakeRule(line, file);
    try {
      network.mutable_table(r.device).Insert(r);
    } catch (const IllBehavedError& e) {
      throw IllBehavedError::WithMessage(
          e.device(), e.witness(),
          absl::StrCat(std::string(file), ":", line.line, ": device '",
                       line.device, "': ", e.reason()));
    }
  }
  for (DeviceIndex d = 0; d < network.size(); ++d) {
    Predicate uncovered = network.table(d).Uncovered();
    if (!uncovered.IsEmpty()) {
      throw IllBehavedError::WithMessage(
          d, uncovered,
          absl::StrCat(std::string(file), ": device '", topo_->devices()[d],
                       "' has no rule for header ",
                       store_->AnyHeader(uncovered).ToString(),
                       " (a priority-0 default rule is required)"));
    }
  }
  return network;
}

BatchUpdate RuleLoader::Convert(const TraceBatch& batch, const Network& current,
                                std::string_view file) {
  BatchUpdate out;
  for (const TraceOp& op : batch) {
    if (op.kind == TraceOp::Kind::kInsert) {
      out.inserts.push_back(MakeRule(op.rule, file));
      continue;
    }
    std::optional<DeviceIndex> device = topo_->FindDevice(op.device);
    if (!device.has_value()) {
      throw ParseError(file, op.line, absl::StrCat("unknown device '", op.device, "'"));
    }
    if (!current.table(*device).Contains(RuleId{op.id})) {
      throw ParseError(file, op.line,
                       absl::StrCat("device '", op.device, "' has no rule ", op.id));
    }
    out.deletes.push_back({*device, RuleId{op.id}});
  }
  return out;
}

}  // namespace invmodel
