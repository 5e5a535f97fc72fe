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

#include "invmodel/rules.h"

#include <algorithm>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"

namespace invmodel {

IllBehavedError::IllBehavedError(DeviceIndex device, Predicate witness,
                                 const std::string& why)
    : std::runtime_error(absl::StrCat("device ", device, ": ", why)),
      device_(device),
      witness_(witness),
      reason_(why) {}

IllBehavedError::IllBehavedError(Raw, DeviceIndex device, Predicate witness,
                                 const std::string& message)
    : std::runtime_error(message),
      device_(device),
      witness_(witness),
      reason_(message) {}

IllBehavedError IllBehavedError::WithMessage(DeviceIndex device,
                                             Predicate witness,
                                             const std::string& message) {
  return IllBehavedError(Raw{}, device, witness, message);
}

// ---------------------------------------------------------------------------
// RuleTable

RuleTable::RuleTable(DeviceIndex device, PredicateStore& store)
    : device_(device), store_(&store), uncovered_(store.True()) {}

const Rule& RuleTable::Get(RuleId id) const {
  auto it = rules_.find(id);
  if (it == rules_.end()) {
    throw std::out_of_range(absl::StrCat("device ", device_, " has no rule ",
                                         id.value));
  }
  return it->second;
}

Predicate RuleTable::Inverse(RuleId id) const {
  auto it = inverses_.find(id);
  return it == inverses_.end() ? store_->False() : it->second;
}

std::vector<const Rule*> RuleTable::RulesByPriority() const {
  std::vector<const Rule*> out;
  out.reserve(rules_.size());
  for (const auto& [priority, ids] : levels_) {
    for (RuleId id : ids) out.push_back(&rules_.at(id));
  }
  return out;
}

std::vector<Transfer> RuleTable::Insert(const Rule& rule) {
  if (rule.device != device_) {
    throw std::invalid_argument(absl::StrCat("rule ", rule.id.value,
                                             " is for device ", rule.device,
                                             ", not ", device_));
  }
  if (rule.match.store() != store_) {
    throw std::invalid_argument("rule match belongs to a different store");
  }
  if (rule.match.IsEmpty()) {
    throw std::invalid_argument(absl::StrCat("rule ", rule.id.value,
                                             " has an empty match"));
  }
  if (rule.action == kNoUpdate) {
    throw std::invalid_argument(absl::StrCat(
        "rule ", rule.id.value, " uses the reserved NOUPDATE action"));
  }
  if (rules_.contains(rule.id)) {
    throw std::invalid_argument(absl::StrCat("duplicate rule id ",
                                             rule.id.value));
  }
  if (auto level = levels_.find(rule.priority); level != levels_.end()) {
    for (RuleId peer : level->second) {
      Predicate overlap = rules_.at(peer).match & rule.match;
      if (!overlap.IsEmpty()) {
        throw IllBehavedError(
            device_, overlap,
            absl::StrCat("rule ", rule.id.value, " overlaps rule ", peer.value,
                         " at equal priority ", rule.priority));
      }
    }
  }

  Predicate inverse = rule.match;
  for (auto it = levels_.begin();
       it != levels_.end() && it->first > rule.priority && !inverse.IsEmpty();
       ++it) {
    for (RuleId id : it->second) inverse -= rules_.at(id).match;
  }

  std::vector<Transfer> transfers;
  if (!inverse.IsEmpty()) {
    // Lower-priority rules can only lose headers inside `inverse`.
    Predicate claimed = store_->False();
    for (auto it = levels_.upper_bound(rule.priority);
         it != levels_.end() && claimed != inverse; ++it) {
      for (RuleId id : it->second) {
        Predicate& lower = inverses_.at(id);
        if (lower.IsEmpty()) continue;
        Predicate lost = lower & rule.match;
        if (lost.IsEmpty()) continue;
        lower -= lost;
        claimed |= lost;
        transfers.push_back({id, rule.id, lost});
        if (claimed == inverse) break;
      }
    }
    if (claimed != inverse) {
      Predicate unowned = inverse - claimed;
      transfers.push_back({std::nullopt, rule.id, unowned});
      uncovered_ -= unowned;
    }
  }

  rules_.emplace(rule.id, rule);
  inverses_.emplace(rule.id, inverse);
  std::vector<RuleId>& level = levels_[rule.priority];
  level.insert(std::upper_bound(level.begin(), level.end(), rule.id), rule.id);
  return transfers;
}

std::vector<Transfer> RuleTable::Erase(RuleId id) {
  auto it = rules_.find(id);
  if (it == rules_.end()) {
    throw std::out_of_range(absl::StrCat("device ", device_, " has no rule ",
                                         id.value));
  }
  const uint32_t priority = it->second.priority;
  Predicate remaining = inverses_.at(id);
  rules_.erase(it);
  inverses_.erase(id);
  auto level = levels_.find(priority);
  std::erase(level->second, id);
  if (level->second.empty()) levels_.erase(level);

  std::vector<Transfer> transfers;
  for (auto lower = levels_.upper_bound(priority);
       lower != levels_.end() && !remaining.IsEmpty(); ++lower) {
    for (RuleId other : lower->second) {
      Predicate gained = remaining & rules_.at(other).match;
      if (gained.IsEmpty()) continue;
      inverses_.at(other) |= gained;
      remaining = gained == remaining ? store_->False() : remaining - gained;
      transfers.push_back({id, other, gained});
      if (remaining.IsEmpty()) break;
    }
  }
  if (!remaining.IsEmpty()) {
    transfers.push_back({id, std::nullopt, remaining});
    uncovered_ |= remaining;
  }
  return transfers;
}

WellBehavedCheck RuleTable::CheckWellBehaved() const {
  Predicate all = store_->False();
  for (const auto& [priority, ids] : levels_) {
    Predicate level_union = store_->False();
    for (RuleId id : ids) {
      const Predicate match = rules_.at(id).match;
      Predicate overlap = level_union & match;
      if (!overlap.IsEmpty()) {
        return {false, overlap,
                absl::StrCat("device ", device_, ": rules overlap at priority ",
                             priority)};
      }
      level_union |= match;
    }
    all |= level_union;
  }
  if (!all.IsTrue()) {
    return {false, ~all,
            absl::StrCat("device ", device_, ": headers without a matching rule")};
  }
  return {true, store_->False(), ""};
}

std::optional<RuleId> RuleTable::FindEquivalent(const Rule& rule) const {
  auto level = levels_.find(rule.priority);
  if (level == levels_.end()) return std::nullopt;
  for (RuleId id : level->second) {
    const Rule& peer = rules_.at(id);
    if (id != rule.id && peer.match == rule.match && peer.action == rule.action) {
      return id;
    }
  }
  return std::nullopt;
}

Predicate RuleTable::ComputeInverse(const Rule& rule) const {
  if (!Contains(rule.id)) return store_->False();
  Predicate inverse = rule.match;
  for (auto it = levels_.begin();
       it != levels_.end() && it->first > rule.priority; ++it) {
    for (RuleId id : it->second) inverse -= rules_.at(id).match;
  }
  return inverse;
}

void RuleTable::RecomputeInverses() {
  Predicate covered = store_->False();
  for (const auto& [priority, ids] : levels_) {
    for (RuleId id : ids) {
      inverses_.at(id) = ComputeInverse(rules_.at(id));
      covered |= rules_.at(id).match;
    }
  }
  uncovered_ = ~covered;
}

std::optional<ActionId> RuleTable::Lookup(const Header& header) const {
  for (const auto& [priority, ids] : levels_) {
    for (RuleId id : ids) {
      const Rule& rule = rules_.at(id);
      if (store_->Contains(rule.match, header)) return rule.action;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(PredicateStore& store, size_t devices) : store_(&store) {
  if (devices == 0) throw std::invalid_argument("network without devices");
  for (size_t i = 0; i < devices; ++i) {
    tables_.push_back(std::make_shared<RuleTable>(DeviceIndex(i), store));
  }
}

RuleTable& Network::mutable_table(DeviceIndex i) {
  std::shared_ptr<RuleTable>& table = tables_.at(i);
  if (table.use_count() > 1) table = std::make_shared<RuleTable>(*table);
  return *table;
}

const Rule* Network::FindRule(RuleId id) const {
  for (const auto& table : tables_) {
    if (table->Contains(id)) return &table->Get(id);
  }
  return nullptr;
}

WellBehavedCheck Network::CheckWellBehaved() const {
  for (const auto& table : tables_) {
    WellBehavedCheck check = table->CheckWellBehaved();
    if (!check.ok) return check;
  }
  return {true, store_->False(), ""};
}

PlainVector EvalControl(const Network& network, const Header& header) {
  PlainVector out(network.size(), kNoUpdate);
  for (DeviceIndex i = 0; i < network.size(); ++i) {
    std::optional<ActionId> action = network.table(i).Lookup(header);
    if (!action.has_value()) {
      throw std::logic_error(absl::StrCat("device ", i, " has no rule for ",
                                          header.ToString()));
    }
    out[i] = *action;
  }
  return out;
}

Network ApplyBatch(const Network& network, const BatchUpdate& batch) {
  Network next = network;
  absl::flat_hash_set<DeviceIndex> touched;
  absl::flat_hash_set<RuleId> inserted;
  for (const RuleDelete& d : batch.deletes) {
    if (d.device >= next.size() || !next.table(d.device).Contains(d.id)) {
      throw std::invalid_argument(absl::StrCat(
          "delete of unknown rule ", d.id.value, " on device ", d.device));
    }
    next.mutable_table(d.device).Erase(d.id);
    touched.insert(d.device);
  }
  for (const Rule& rule : batch.inserts) {
    if (rule.device >= next.size()) {
      throw std::invalid_argument(absl::StrCat("rule ", rule.id.value,
                                               " names unknown device ",
                                               rule.device));
    }
    if (!inserted.insert(rule.id).second || next.FindRule(rule.id) != nullptr) {
      throw std::invalid_argument(absl::StrCat("duplicate rule id ",
                                               rule.id.value));
    }
    next.mutable_table(rule.device).Insert(rule);
    touched.insert(rule.device);
  }
  for (DeviceIndex d : touched) {
    Predicate uncovered = next.table(d).Uncovered();
    if (!uncovered.IsEmpty()) {
      throw IllBehavedError(d, uncovered, "headers without a matching rule");
    }
  }
  return next;
}

BatchUpdate DiffNetworks(const Network& old_network,
                         const Network& new_network) {
  if (old_network.size() != new_network.size()) {
    throw std::invalid_argument("networks differ in device count");
  }
  BatchUpdate batch;
  for (DeviceIndex i = 0; i < old_network.size(); ++i) {
    const RuleTable& before = old_network.table(i);
    const RuleTable& after = new_network.table(i);
    for (const Rule* r : after.RulesByPriority()) {
      if (!before.Contains(r->id)) batch.inserts.push_back(*r);
    }
    for (const Rule* r : before.RulesByPriority()) {
      if (!after.Contains(r->id)) batch.deletes.push_back({i, r->id});
    }
  }
  return batch;
}

Predicate RuleInverse(const Rule& rule, const RuleTable& table) {
  if (!table.Contains(rule.id)) return rule.match.store()->False();
  return table.Inverse(rule.id);
}

std::vector<Rule> Upperbound(const Network& old_network,
                             const BatchUpdate& batch) {
  std::vector<Rule> out = batch.inserts;
  absl::flat_hash_map<DeviceIndex, uint32_t> max_deleted;
  absl::flat_hash_set<RuleId> deleted;
  for (const RuleDelete& d : batch.deletes) {
    const uint32_t p = old_network.table(d.device).Get(d.id).priority;
    auto [it, inserted] = max_deleted.try_emplace(d.device, p);
    if (!inserted) it->second = std::max(it->second, p);
    deleted.insert(d.id);
  }
  std::vector<DeviceIndex> devices;
  for (const auto& [device, p] : max_deleted) devices.push_back(device);
  std::sort(devices.begin(), devices.end());
  for (DeviceIndex device : devices) {
    const uint32_t threshold = max_deleted.at(device);
    for (const Rule* r : old_network.table(device).RulesByPriority()) {
      if (r->priority < threshold && !deleted.contains(r->id)) {
        out.push_back(*r);
      }
    }
  }
  return out;
}

std::vector<Rule> ExpandingRules(const Network& old_network,
                                 const Network& new_network,
                                 std::span<const Rule> candidates) {
  std::vector<Rule> out;
  absl::flat_hash_set<RuleId> seen;
  for (const Rule& r : candidates) {
    if (!seen.insert(r.id).second) continue;
    Predicate gained = RuleInverse(r, new_network.table(r.device));
    if (gained.IsEmpty()) continue;
    const RuleTable& old_table = old_network.table(r.device);
    if (old_table.Contains(r.id)) {
      gained -= old_table.Inverse(r.id);
    } else if (std::optional<RuleId> twin = old_table.FindEquivalent(r)) {
      gained -= old_table.Inverse(*twin);
    }
    if (!gained.IsEmpty()) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const Rule& a, const Rule& b) {
    return std::tie(a.device, a.id) < std::tie(b.device, b.id);
  });
  return out;
}

InverseModel DeltaModel(const Rule& rule, const Network& new_network,
                        VectorStore& vectors) {
  Predicate inverse = RuleInverse(rule, new_network.table(rule.device));
  if (inverse.IsEmpty()) {
    throw std::invalid_argument(absl::StrCat(
        "rule ", rule.id.value, " has an empty inverse and is not expanding"));
  }
  std::vector<ModelEntry> entries{
      {inverse, vectors.Vectorize(rule.device, rule.action)}};
  if (!inverse.IsTrue()) entries.push_back({~inverse, vectors.Zero()});
  return InverseModel(new_network.predicates(), vectors, std::move(entries));
}

std::vector<InverseModel> BaseSequence(const Network& old_network,
                                       const Network& new_network,
                                       VectorStore& vectors) {
  BatchUpdate batch = DiffNetworks(old_network, new_network);
  std::vector<Rule> candidates = Upperbound(old_network, batch);
  std::vector<InverseModel> out;
  for (const Rule& r : ExpandingRules(old_network, new_network, candidates)) {
    out.push_back(DeltaModel(r, new_network, vectors));
  }
  return out;
}

}  // namespace invmodel
