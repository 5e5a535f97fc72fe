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

// Rule-based control systems: per-device priority rule tables with
// maintained rule inverses, batch updates, and the mapping from a rule
// change to a sequence of inverse-model overwrites.
//
// Device indices are 0-based positions in the output vector.

#ifndef INVMODEL_RULES_H_
#define INVMODEL_RULES_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "invmodel/action.h"
#include "invmodel/merkle.h"
#include "invmodel/model.h"
#include "invmodel/predicate.h"

namespace invmodel {

using DeviceIndex = uint32_t;

struct RuleId {
  uint64_t value = 0;

  friend auto operator<=>(const RuleId&, const RuleId&) = default;
  template <typename H>
  friend H AbslHashValue(H h, RuleId id) {
    return H::combine(std::move(h), id.value);
  }
};

struct Rule {
  RuleId id;
  DeviceIndex device = 0;
  // Source prefix; `match` is its predicate.
  Prefix prefix;
  Predicate match;
  ActionId action;
  uint32_t priority = 0;
};

// Headers whose owning rule changed from `from` to `to` on one device. An
// empty optional means "no rule", which only occurs transiently while a
// multi-step change is applied.
struct Transfer {
  std::optional<RuleId> from;
  std::optional<RuleId> to;
  Predicate region;
};

class IllBehavedError : public std::runtime_error {
 public:
  IllBehavedError(DeviceIndex device, Predicate witness, const std::string& why);
  // Same error with `message` as the whole text.
  static IllBehavedError WithMessage(DeviceIndex device, Predicate witness,
                                     const std::string& message);
  DeviceIndex device() const { return device_; }
  // The text after the "device N: " prefix.
  const std::string& reason() const { return reason_; }
  // Headers with zero or several top-priority matching rules.
  Predicate witness() const { return witness_; }

 private:
  struct Raw {};
  IllBehavedError(Raw, DeviceIndex device, Predicate witness,
                  const std::string& message);

  DeviceIndex device_;
  Predicate witness_;
  std::string reason_;
};

struct WellBehavedCheck {
  bool ok = true;
  Predicate witness;
  std::string reason;
};

class RuleTable {
 public:
  RuleTable(DeviceIndex device, PredicateStore& store);

  DeviceIndex device() const { return device_; }
  size_t size() const { return rules_.size(); }
  bool Contains(RuleId id) const { return rules_.contains(id); }
  const Rule& Get(RuleId id) const;

  // Cached inverse: the part of the rule's match not shadowed by any
  // strictly higher-priority rule. False for rules not in the table.
  Predicate Inverse(RuleId id) const;

  // Descending priority, ascending id within a level.
  std::vector<const Rule*> RulesByPriority() const;

  // Adds `rule` and returns the headers it took over. Throws
  // IllBehavedError if it overlaps a rule of equal priority (the table is
  // left unchanged) and std::invalid_argument for malformed rules.
  std::vector<Transfer> Insert(const Rule& rule);

  // Removes a rule and returns where its headers went. Throws
  // std::out_of_range for unknown ids.
  std::vector<Transfer> Erase(RuleId id);

  // Headers matched by no rule.
  Predicate Uncovered() const { return uncovered_; }

  WellBehavedCheck CheckWellBehaved() const;

  // Inverse of `rule` against the current table, from scratch.
  Predicate ComputeInverse(const Rule& rule) const;
  void RecomputeInverses();

  // A rule other than `rule` with the same match, action and priority.
  std::optional<RuleId> FindEquivalent(const Rule& rule) const;

  // Action of the top-priority rule matching `header`, or nullopt.
  std::optional<ActionId> Lookup(const Header& header) const;

 private:
  DeviceIndex device_;
  PredicateStore* store_;
  std::map<uint32_t, std::vector<RuleId>, std::greater<>> levels_;
  absl::flat_hash_map<RuleId, Rule> rules_;
  absl::flat_hash_map<RuleId, Predicate> inverses_;
  Predicate uncovered_;
};

// Rules of every device. Tables are shared copy-on-write between copies of
// a Network, so copying is cheap and mutation clones only touched devices.
class Network {
 public:
  Network(PredicateStore& store, size_t devices);

  PredicateStore& predicates() const { return *store_; }
  size_t size() const { return tables_.size(); }
  const RuleTable& table(DeviceIndex i) const { return *tables_.at(i); }
  RuleTable& mutable_table(DeviceIndex i);

  // Locates a rule on any device.
  const Rule* FindRule(RuleId id) const;

  WellBehavedCheck CheckWellBehaved() const;

 private:
  PredicateStore* store_;
  std::vector<std::shared_ptr<RuleTable>> tables_;
};

struct RuleDelete {
  DeviceIndex device = 0;
  RuleId id;
};

struct BatchUpdate {
  std::vector<Rule> inserts;
  std::vector<RuleDelete> deletes;

  bool empty() const { return inserts.empty() && deletes.empty(); }
};

// F_R(x): the top-priority action of every device.
PlainVector EvalControl(const Network& network, const Header& header);

// Deletes, then inserts, on a copy. Throws IllBehavedError if the result is
// not well-behaved and std::invalid_argument for unknown deletes or
// duplicate ids; `network` is never modified.
Network ApplyBatch(const Network& network, const BatchUpdate& batch);

// Insert/delete sets between two networks, by rule id.
BatchUpdate DiffNetworks(const Network& old_network,
                         const Network& new_network);

// Inverse of `rule` in `table`; false if the rule is not in the table.
Predicate RuleInverse(const Rule& rule, const RuleTable& table);

// Inserted rules plus surviving rules shadowed by a deleted rule of strictly
// higher priority on the same device. A superset of the expanding rules.
std::vector<Rule> Upperbound(const Network& old_network,
                             const BatchUpdate& batch);

// The candidates whose inverse gained headers from `old_network` to
// `new_network`. `candidates` must contain every expanding rule. A rule
// re-inserted under a new id is compared with its old equivalent.
std::vector<Rule> ExpandingRules(const Network& old_network,
                                 const Network& new_network,
                                 std::span<const Rule> candidates);

// {(inverse, vectorize(device, action)), (¬inverse, 0)} for an expanding
// rule, using its inverse in `new_network`. Throws std::invalid_argument if
// that inverse is empty.
InverseModel DeltaModel(const Rule& rule, const Network& new_network,
                        VectorStore& vectors);

// ΔM_r for every expanding rule, ordered by device then rule id.
std::vector<InverseModel> BaseSequence(const Network& old_network,
                                       const Network& new_network,
                                       VectorStore& vectors);

}  // namespace invmodel

#endif  // INVMODEL_RULES_H_
