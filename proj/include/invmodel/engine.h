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

// Model manager: keeps the inverse model of a network current under batch
// updates.
//
// Every strategy turns a batch into a list of delta models and folds them
// into the current model with `Overwrite`:
//
//   kApFull   rebuild from the identity model, one delta per (device, action)
//   kPerRule  one rule at a time, one delta per changed rule inverse
//   kMr2      expanding rules, aggregated per device, then merged across
//             devices whose deltas share the same header sets
//   kBaseSeq  one delta per expanding rule, no aggregation
//
// All four produce the same model; the tests check that exhaustively.

#ifndef INVMODEL_ENGINE_H_
#define INVMODEL_ENGINE_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "invmodel/merkle.h"
#include "invmodel/model.h"
#include "invmodel/rules.h"
#include "json.hpp"

namespace invmodel {

enum class Strategy { kApFull, kPerRule, kMr2, kBaseSeq };

// Accepts "ap", "per-rule", "mr2", "base".
Strategy ParseStrategy(std::string_view name);
std::string StrategyName(Strategy strategy);

// Thrown when a model differs from the from-scratch rebuild while invariant
// checking is enabled.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PhaseTimes {
  // Mapping rules to delta models.
  double mr1_seconds = 0;
  // Merging deltas with identical header sets.
  double r2_seconds = 0;
  // Folding deltas into the model.
  double apply_seconds = 0;
  double total_seconds = 0;
};

// Headers whose output vector changed, split by (before, after) pair. The
// regions are pairwise disjoint.
struct VectorChange {
  Predicate region;
  OutputVector before;
  OutputVector after;
};

struct ChangeSummary {
  std::vector<VectorChange> changes;
  size_t overwrites = 0;
  PhaseTimes timing;

  Predicate Touched(PredicateStore& store) const;
};

nlohmann::json ChangeSummaryToJson(const ChangeSummary& summary);

// The changes between two models of the same stores.
std::vector<VectorChange> DiffModels(const InverseModel& before,
                                     const InverseModel& after);

// Builds the model of `network` from the identity model: per device, the
// rule inverses are unioned per action and overwritten in one at a time.
InverseModel RebuildFull(const Network& network, VectorStore& vectors);

struct DeltaPlan {
  Network next;
  // true when `deltas` start from the identity model rather than the
  // current one.
  bool from_scratch = false;
  std::vector<InverseModel> deltas;
  PhaseTimes timing;
};

using RuleUpdate = std::variant<Rule, RuleDelete>;

class ModelManager {
 public:
  ModelManager(Network network, VectorStore& vectors,
               Strategy strategy = Strategy::kMr2);

  const Network& network() const { return network_; }
  const InverseModel& model() const { return model_; }
  Strategy strategy() const { return strategy_; }
  void set_strategy(Strategy strategy) { strategy_ = strategy; }

  // Recompare against RebuildFull after every update.
  void set_check_invariants(bool on) { check_invariants_ = on; }

  // Computes the deltas `strategy` would apply for `batch`, without
  // changing any state. Throws IllBehavedError for ill-behaved results.
  DeltaPlan Plan(const BatchUpdate& batch, Strategy strategy) const;

  // Applies `batch` with the configured strategy, within subspaces when
  // partitioned. On error nothing changes.
  ChangeSummary Apply(const BatchUpdate& batch);

  ChangeSummary ApplySingle(const RuleUpdate& update);
  ChangeSummary ApplyFull(const BatchUpdate& batch);
  ChangeSummary ApplyPerRule(const BatchUpdate& batch);
  ChangeSummary ApplyMr2(const BatchUpdate& batch);
  ChangeSummary ApplyBaseSequence(const BatchUpdate& batch);

  // Splits the header space on its top ceil(log2 k) bits into `k`
  // subspaces and restricts the current model to each. Subsequent `Apply`
  // calls update each subspace independently and merge the results.
  const std::vector<SubspaceModel>& Partition(size_t k);
  void Unpartition() { subspaces_.clear(); }
  ChangeSummary ApplyPartitioned(const BatchUpdate& batch);
  bool partitioned() const { return !subspaces_.empty(); }
  const std::vector<SubspaceModel>& subspaces() const { return subspaces_; }

  // Model equals the from-scratch rebuild of the current tables.
  InvariantCheck CheckMasterInvariant() const;

 private:
  ChangeSummary Commit(DeltaPlan plan);
  ChangeSummary CommitPartitioned(DeltaPlan plan);

  Network network_;
  VectorStore* vectors_;
  InverseModel model_;
  Strategy strategy_;
  bool check_invariants_ = false;
  std::vector<SubspaceModel> subspaces_;
};

// Header sets splitting the space on its top bits into `k` nonempty parts.
std::vector<Predicate> SubspacePredicates(PredicateStore& store, size_t k);

}  // namespace invmodel

#endif  // INVMODEL_ENGINE_H_
