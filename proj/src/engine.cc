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

#include "invmodel/engine.h"

#include <chrono>
#include <map>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"

namespace invmodel {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// {(region, v), (¬region, 0)}, omitting the complement when empty.
InverseModel RegionDelta(Predicate region, OutputVector v,
                         VectorStore& vectors) {
  std::vector<ModelEntry> entries{{region, v}};
  if (!region.IsTrue()) entries.push_back({~region, vectors.Zero()});
  return InverseModel(*region.store(), vectors, std::move(entries));
}

// One delta per device: the inverses of `rules` unioned per action, plus the
// 0 complement. `rules` must be sorted by device.
std::vector<InverseModel> AggregatePerDevice(const Network& next,
                                             std::span<const Rule> rules,
                                             VectorStore& vectors) {
  std::vector<InverseModel> out;
  PredicateStore& store = next.predicates();
  for (size_t begin = 0; begin < rules.size();) {
    const DeviceIndex device = rules[begin].device;
    std::map<ActionId, Predicate> by_action;
    size_t end = begin;
    for (; end < rules.size() && rules[end].device == device; ++end) {
      Predicate inverse = next.table(device).Inverse(rules[end].id);
      auto [it, inserted] = by_action.try_emplace(rules[end].action, inverse);
      if (!inserted) it->second |= inverse;
    }
    std::vector<ModelEntry> entries;
    Predicate covered = store.False();
    for (const auto& [action, region] : by_action) {
      if (region.IsEmpty()) continue;
      entries.push_back({region, vectors.Vectorize(device, action)});
      covered |= region;
    }
    if (!entries.empty()) {
      if (!covered.IsTrue()) entries.push_back({~covered, vectors.Zero()});
      out.emplace_back(store, vectors, std::move(entries));
    }
    begin = end;
  }
  return out;
}

// Merges deltas whose entries carry exactly the same header sets: each
// header set receives the overwrite of the members' vectors for it.
std::vector<InverseModel> MergeByHeaderSets(std::vector<InverseModel> deltas) {
  std::vector<std::vector<uint32_t>> keys;
  std::vector<std::vector<size_t>> groups;
  std::map<std::vector<uint32_t>, size_t> group_of;
  for (size_t i = 0; i < deltas.size(); ++i) {
    std::vector<uint32_t> key;
    for (const ModelEntry& e : deltas[i].entries()) key.push_back(e.predicate.id());
    std::sort(key.begin(), key.end());
    auto [it, inserted] = group_of.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::vector<InverseModel> out;
  for (const std::vector<size_t>& group : groups) {
    if (group.size() == 1) {
      out.push_back(std::move(deltas[group.front()]));
      continue;
    }
    const InverseModel& first = deltas[group.front()];
    VectorStore& vectors = first.vectors();
    std::vector<ModelEntry> entries = first.entries();
    for (size_t k = 1; k < group.size(); ++k) {
      absl::flat_hash_map<uint32_t, OutputVector> member;
      for (const ModelEntry& e : deltas[group[k]].entries()) {
        member.emplace(e.predicate.id(), e.vector);
      }
      for (ModelEntry& e : entries) {
        e.vector = vectors.Overwrite(e.vector, member.at(e.predicate.id()));
      }
    }
    // Vectors stay distinct for component-disjoint members; merge defensively
    // so the result is a valid model regardless.
    absl::flat_hash_map<uint32_t, size_t> index;
    std::vector<ModelEntry> merged;
    for (const ModelEntry& e : entries) {
      auto [it, inserted] = index.try_emplace(e.vector.root(), merged.size());
      if (inserted) {
        merged.push_back(e);
      } else {
        merged[it->second].predicate |= e.predicate;
      }
    }
    out.emplace_back(first.predicates(), vectors, std::move(merged));
  }
  return out;
}

// Per device and action, the union of rule inverses, in device order.
std::vector<InverseModel> FullRebuildDeltas(const Network& network,
                                            VectorStore& vectors) {
  std::vector<InverseModel> out;
  for (DeviceIndex i = 0; i < network.size(); ++i) {
    std::map<ActionId, Predicate> by_action;
    const RuleTable& table = network.table(i);
    for (const Rule* r : table.RulesByPriority()) {
      Predicate inverse = table.Inverse(r->id);
      auto [it, inserted] = by_action.try_emplace(r->action, inverse);
      if (!inserted) it->second |= inverse;
    }
    for (const auto& [action, region] : by_action) {
      if (region.IsEmpty()) continue;
      out.push_back(RegionDelta(region, vectors.Vectorize(i, action), vectors));
    }
  }
  return out;
}

// Per-rule deltas: applies the batch one rule at a time to a working copy
// and emits a delta for every header region that changes owner to a rule
// with a different action.
std::vector<InverseModel> PerRuleDeltas(const Network& network,
                                        const BatchUpdate& batch,
                                        VectorStore& vectors) {
  Network working = network;
  std::vector<InverseModel> out;
  auto emit = [&](DeviceIndex device, const std::vector<Transfer>& transfers,
                  std::optional<ActionId> erased_action) {
    const RuleTable& table = working.table(device);
    for (const Transfer& t : transfers) {
      // Headers left without a rule keep their stale action until a later
      // step hands them to a rule.
      if (!t.to.has_value()) continue;
      const ActionId to = table.Get(*t.to).action;
      std::optional<ActionId> from;
      if (t.from.has_value()) {
        from = table.Contains(*t.from) ? table.Get(*t.from).action
                                       : erased_action;
      }
      if (from == to) continue;
      out.push_back(RegionDelta(t.region, vectors.Vectorize(device, to), vectors));
    }
  };
  auto erase = [&](const RuleDelete& d) {
    const ActionId action = working.table(d.device).Get(d.id).action;
    emit(d.device, working.mutable_table(d.device).Erase(d.id), action);
  };

  std::vector<RuleDelete> pending = batch.deletes;
  for (const Rule& rule : batch.inserts) {
    // An equal-priority overlapping rule must leave before `rule` arrives.
    for (auto it = pending.begin(); it != pending.end();) {
      const Rule& old = working.table(it->device).Get(it->id);
      if (it->device == rule.device && old.priority == rule.priority &&
          old.match.Intersects(rule.match)) {
        erase(*it);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
    emit(rule.device, working.mutable_table(rule.device).Insert(rule),
         std::nullopt);
  }
  for (const RuleDelete& d : pending) erase(d);
  return out;
}

}  // namespace

Strategy ParseStrategy(std::string_view name) {
  if (name == "ap") return Strategy::kApFull;
  if (name == "per-rule") return Strategy::kPerRule;
  if (name == "mr2") return Strategy::kMr2;
  if (name == "base") return Strategy::kBaseSeq;
  throw std::invalid_argument(absl::StrCat("unknown strategy '", std::string(name),
                                           "' (want ap, per-rule, mr2, base)"));
}

std::string StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kApFull: return "ap";
    case Strategy::kPerRule: return "per-rule";
    case Strategy::kMr2: return "mr2";
    case Strategy::kBaseSeq: return "base";
  }
  return "?";
}

Predicate ChangeSummary::Touched(PredicateStore& store) const {
  Predicate out = store.False();
  for (const VectorChange& c : changes) out |= c.region;
  return out;
}

nlohmann::json ChangeSummaryToJson(const ChangeSummary& summary) {
  nlohmann::json changes = nlohmann::json::array();
  for (const VectorChange& c : summary.changes) {
    changes.push_back({{"cubes", c.region.store()->Cubes(c.region)},
                       {"before", FormatVector(c.before.ToPlain())},
                       {"after", FormatVector(c.after.ToPlain())}});
  }
  return {{"changes", std::move(changes)},
          {"overwrites", summary.overwrites},
          {"timing",
           {{"mr1_seconds", summary.timing.mr1_seconds},
            {"r2_seconds", summary.timing.r2_seconds},
            {"apply_seconds", summary.timing.apply_seconds},
            {"total_seconds", summary.timing.total_seconds}}}};
}

std::vector<VectorChange> DiffModels(const InverseModel& before,
                                     const InverseModel& after) {
  absl::flat_hash_map<uint32_t, Predicate> old_by_vector;
  for (const ModelEntry& e : before.entries()) {
    old_by_vector.emplace(e.vector.root(), e.predicate);
  }
  absl::flat_hash_map<uint32_t, Predicate> new_by_vector;
  for (const ModelEntry& e : after.entries()) {
    new_by_vector.emplace(e.vector.root(), e.predicate);
  }
  auto unchanged = [](const absl::flat_hash_map<uint32_t, Predicate>& other,
                      const ModelEntry& e) {
    auto it = other.find(e.vector.root());
    return it != other.end() && it->second == e.predicate;
  };
  std::vector<const ModelEntry*> old_changed;
  for (const ModelEntry& e : before.entries()) {
    if (!unchanged(new_by_vector, e)) old_changed.push_back(&e);
  }
  std::vector<VectorChange> out;
  for (const ModelEntry& n : after.entries()) {
    if (unchanged(old_by_vector, n)) continue;
    for (const ModelEntry* o : old_changed) {
      if (o->vector == n.vector) continue;
      Predicate region = o->predicate & n.predicate;
      if (!region.IsEmpty()) out.push_back({region, o->vector, n.vector});
    }
  }
  return out;
}

InverseModel RebuildFull(const Network& network, VectorStore& vectors) {
  InverseModel model = InverseModel::Identity(network.predicates(), vectors);
  for (const InverseModel& delta : FullRebuildDeltas(network, vectors)) {
    model = Overwrite(model, delta);
  }
  return model;
}

std::vector<Predicate> SubspacePredicates(PredicateStore& store, size_t k) {
  if (k == 0) throw std::invalid_argument("subspace count must be >= 1");
  uint32_t bits = 0;
  while ((size_t{1} << bits) < k) ++bits;
  if (bits > store.header_bits()) {
    throw std::invalid_argument(absl::StrCat("cannot split ",
                                             store.header_bits(),
                                             "-bit headers into ", k,
                                             " subspaces"));
  }
  std::vector<Predicate> out(k, store.False());
  const size_t cells = size_t{1} << bits;
  for (size_t c = 0; c < cells; ++c) {
    std::string cube(store.header_bits(), '*');
    for (uint32_t b = 0; b < bits; ++b) {
      cube[b] = ((c >> (bits - 1 - b)) & 1) ? '1' : '0';
    }
    out[c * k / cells] |= store.FromCube(cube);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ModelManager

ModelManager::ModelManager(Network network, VectorStore& vectors,
                           Strategy strategy)
    : network_(std::move(network)),
      vectors_(&vectors),
      model_(RebuildFull(network_, vectors)),
      strategy_(strategy) {
  if (vectors.width() != network_.size()) {
    throw std::invalid_argument(absl::StrCat("vector width ", vectors.width(),
                                             " does not match ",
                                             network_.size(), " devices"));
  }
  WellBehavedCheck check = network_.CheckWellBehaved();
  if (!check.ok) {
    throw IllBehavedError(0, check.witness, check.reason);
  }
}

DeltaPlan ModelManager::Plan(const BatchUpdate& batch,
                             Strategy strategy) const {
  DeltaPlan plan{ApplyBatch(network_, batch), false, {}, {}};
  Clock::time_point start = Clock::now();
  switch (strategy) {
    case Strategy::kApFull:
      plan.from_scratch = true;
      plan.deltas = FullRebuildDeltas(plan.next, *vectors_);
      plan.timing.mr1_seconds = Since(start);
      break;
    case Strategy::kPerRule:
      plan.deltas = PerRuleDeltas(network_, batch, *vectors_);
      plan.timing.mr1_seconds = Since(start);
      break;
    case Strategy::kBaseSeq: {
      std::vector<Rule> upper = Upperbound(network_, batch);
      for (const Rule& r : ExpandingRules(network_, plan.next, upper)) {
        plan.deltas.push_back(DeltaModel(r, plan.next, *vectors_));
      }
      plan.timing.mr1_seconds = Since(start);
      break;
    }
    case Strategy::kMr2: {
      std::vector<Rule> upper = Upperbound(network_, batch);
      std::vector<Rule> expanding = ExpandingRules(network_, plan.next, upper);
      std::vector<InverseModel> per_device =
          AggregatePerDevice(plan.next, expanding, *vectors_);
      plan.timing.mr1_seconds = Since(start);
      Clock::time_point r2 = Clock::now();
      plan.deltas = MergeByHeaderSets(std::move(per_device));
      plan.timing.r2_seconds = Since(r2);
      break;
    }
  }
  return plan;
}

ChangeSummary ModelManager::Commit(DeltaPlan plan) {
  Clock::time_point start = Clock::now();
  InverseModel model = plan.from_scratch
                           ? InverseModel::Identity(network_.predicates(), *vectors_)
                           : model_;
  for (const InverseModel& delta : plan.deltas) model = Overwrite(model, delta);
  ChangeSummary summary;
  summary.overwrites = plan.deltas.size();
  summary.timing = plan.timing;
  summary.timing.apply_seconds = Since(start);
  if (check_invariants_ &&
      !ModelEquals(model, RebuildFull(plan.next, *vectors_))) {
    throw InvariantViolation("model differs from the from-scratch rebuild");
  }
  summary.changes = DiffModels(model_, model);
  network_ = std::move(plan.next);
  model_ = std::move(model);
  if (partitioned()) {
    for (SubspaceModel& s : subspaces_) s = Restrict(model_, s.subspace);
  }
  return summary;
}

ChangeSummary ModelManager::CommitPartitioned(DeltaPlan plan) {
  Clock::time_point start = Clock::now();
  std::vector<SubspaceModel> next;
  next.reserve(subspaces_.size());
  InverseModel identity = InverseModel::Identity(network_.predicates(), *vectors_);
  for (const SubspaceModel& s : subspaces_) {
    SubspaceModel part = plan.from_scratch ? Restrict(identity, s.subspace) : s;
    for (const InverseModel& delta : plan.deltas) {
      part = Overwrite(part, Restrict(delta, s.subspace));
    }
    next.push_back(std::move(part));
  }
  InverseModel model =
      MergeSubspaces(network_.predicates(), *vectors_, next);
  ChangeSummary summary;
  summary.overwrites = plan.deltas.size() * subspaces_.size();
  summary.timing = plan.timing;
  summary.timing.apply_seconds = Since(start);
  if (check_invariants_ &&
      !ModelEquals(model, RebuildFull(plan.next, *vectors_))) {
    throw InvariantViolation("merged subspace model differs from the rebuild");
  }
  summary.changes = DiffModels(model_, model);
  network_ = std::move(plan.next);
  model_ = std::move(model);
  subspaces_ = std::move(next);
  return summary;
}

namespace {

ChangeSummary Timed(Clock::time_point start, ChangeSummary summary) {
  summary.timing.total_seconds = Since(start);
  return summary;
}

}  // namespace

ChangeSummary ModelManager::Apply(const BatchUpdate& batch) {
  Clock::time_point start = Clock::now();
  DeltaPlan plan = Plan(batch, strategy_);
  return Timed(start, partitioned() ? CommitPartitioned(std::move(plan))
                                    : Commit(std::move(plan)));
}

ChangeSummary ModelManager::ApplySingle(const RuleUpdate& update) {
  BatchUpdate batch;
  if (const Rule* r = std::get_if<Rule>(&update)) {
    batch.inserts.push_back(*r);
  } else {
    batch.deletes.push_back(std::get<RuleDelete>(update));
  }
  return ApplyPerRule(batch);
}

ChangeSummary ModelManager::ApplyFull(const BatchUpdate& batch) {
  Clock::time_point start = Clock::now();
  return Timed(start, Commit(Plan(batch, Strategy::kApFull)));
}

ChangeSummary ModelManager::ApplyPerRule(const BatchUpdate& batch) {
  Clock::time_point start = Clock::now();
  return Timed(start, Commit(Plan(batch, Strategy::kPerRule)));
}

ChangeSummary ModelManager::ApplyMr2(const BatchUpdate& batch) {
  Clock::time_point start = Clock::now();
  return Timed(start, Commit(Plan(batch, Strategy::kMr2)));
}

ChangeSummary ModelManager::ApplyBaseSequence(const BatchUpdate& batch) {
  Clock::time_point start = Clock::now();
  return Timed(start, Commit(Plan(batch, Strategy::kBaseSeq)));
}

const std::vector<SubspaceModel>& ModelManager::Partition(size_t k) {
  subspaces_.clear();
  for (Predicate p : SubspacePredicates(network_.predicates(), k)) {
    subspaces_.push_back(Restrict(model_, p));
  }
  return subspaces_;
}

ChangeSummary ModelManager::ApplyPartitioned(const BatchUpdate& batch) {
  if (!partitioned()) throw std::logic_error("ApplyPartitioned before Partition");
  Clock::time_point start = Clock::now();
  return Timed(start, CommitPartitioned(Plan(batch, strategy_)));
}

InvariantCheck ModelManager::CheckMasterInvariant() const {
  InvariantCheck structure = CheckInvariants(model_);
  if (!structure.ok) return structure;
  if (!ModelEquals(model_, RebuildFull(network_, *vectors_))) {
    return {false, "model differs from the from-scratch rebuild"};
  }
  return {};
}

}  // namespace invmodel
