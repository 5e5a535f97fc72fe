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

#include "invmodel/model.h"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace invmodel {
namespace {

// Accumulates header sets per output vector, preserving first-seen order.
class Buckets {
 public:
  void Add(Predicate p, OutputVector v) {
    auto [it, inserted] = index_.try_emplace(v.root(), entries_.size());
    if (inserted) {
      entries_.push_back({p, v});
    } else {
      entries_[it->second].predicate |= p;
    }
  }
  std::vector<ModelEntry> Take() { return std::move(entries_); }

 private:
  absl::flat_hash_map<uint32_t, size_t> index_;
  std::vector<ModelEntry> entries_;
};

// Core of A ⊗ B for two entry lists covering the same region. The right
// operand's 0 entry is visited last and receives whatever part of a left
// entry is still unclaimed. With several non-0 right entries, a left entry
// is first tested against their union and kept as is when untouched.
std::vector<ModelEntry> OverwriteEntries(std::span<const ModelEntry> a,
                                         std::span<const ModelEntry> b,
                                         VectorStore& vectors) {
  std::vector<const ModelEntry*> order;
  order.reserve(b.size());
  const ModelEntry* zero = nullptr;
  for (const ModelEntry& e : b) {
    if (e.vector.IsNoUpdate()) {
      zero = &e;
    } else {
      order.push_back(&e);
    }
  }
  if (zero != nullptr) order.push_back(zero);

  std::optional<Predicate> support;
  if (zero != nullptr && order.size() > 2) support = ~zero->predicate;

  Buckets buckets;
  for (const ModelEntry& ea : a) {
    if (support.has_value() && !ea.predicate.Intersects(*support)) {
      buckets.Add(ea.predicate, ea.vector);
      continue;
    }
    Predicate remaining = ea.predicate;
    for (size_t k = 0; k < order.size() && !remaining.IsEmpty(); ++k) {
      const ModelEntry& eb = *order[k];
      const bool last = k + 1 == order.size();
      Predicate part = last ? remaining : remaining & eb.predicate;
      if (part.IsEmpty()) continue;
      if (!last) remaining = part == remaining ? part.store()->False()
                                               : remaining - part;
      OutputVector v = eb.vector.IsNoUpdate()
                           ? ea.vector
                           : vectors.Overwrite(ea.vector, eb.vector);
      buckets.Add(part, v);
    }
  }
  return buckets.Take();
}

void CheckSameStores(const InverseModel& a, const InverseModel& b) {
  if (&a.predicates() != &b.predicates() || &a.vectors() != &b.vectors()) {
    throw std::invalid_argument("models use different stores");
  }
}

InvariantCheck CheckEntries(std::span<const ModelEntry> entries,
                            Predicate region) {
  absl::flat_hash_set<uint32_t> seen;
  Predicate covered = region.store()->False();
  for (size_t j = 0; j < entries.size(); ++j) {
    const ModelEntry& e = entries[j];
    if (e.predicate.IsEmpty()) {
      return {false, absl::StrCat("entry ", j, " has an empty header set")};
    }
    if (!seen.insert(e.vector.root()).second) {
      return {false, absl::StrCat("entry ", j, " repeats vector ",
                                  e.vector.ToString())};
    }
    if (covered.Intersects(e.predicate)) {
      return {false, absl::StrCat("entry ", j, " overlaps an earlier entry")};
    }
    if (!(e.predicate - region).IsEmpty()) {
      return {false, absl::StrCat("entry ", j, " leaves the region")};
    }
    covered |= e.predicate;
  }
  if (covered != region) return {false, "entries do not cover the region"};
  return {};
}

}  // namespace

InverseModel::InverseModel(PredicateStore& predicates, VectorStore& vectors,
                           std::vector<ModelEntry> entries)
    : predicates_(&predicates), vectors_(&vectors), entries_(std::move(entries)) {}

InverseModel InverseModel::Identity(PredicateStore& predicates,
                                   VectorStore& vectors) {
  return InverseModel(predicates, vectors,
                      {{predicates.True(), vectors.Zero()}});
}

bool InverseModel::IsIdentity() const {
  return entries_.size() == 1 && entries_[0].predicate.IsTrue() &&
         entries_[0].vector.IsNoUpdate();
}

std::optional<Predicate> InverseModel::Find(OutputVector v) const {
  for (const ModelEntry& e : entries_) {
    if (e.vector == v) return e.predicate;
  }
  return std::nullopt;
}

std::vector<ModelEntry> InverseModel::SortedEntries() const {
  std::vector<ModelEntry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(),
            [](const ModelEntry& x, const ModelEntry& y) {
              return x.vector.digest() < y.vector.digest();
            });
  return sorted;
}

InvariantCheck CheckInvariants(const InverseModel& m) {
  if (m.entries().empty()) return {false, "model has no entries"};
  return CheckEntries(m.entries(), m.predicates().True());
}

InvariantCheck CheckInvariants(const SubspaceModel& m) {
  if (m.subspace.IsEmpty()) return {false, "empty subspace"};
  return CheckEntries(m.entries, m.subspace);
}

InverseModel Overwrite(const InverseModel& a, const InverseModel& b) {
  CheckSameStores(a, b);
  if (b.IsIdentity()) return a;
  if (a.IsIdentity()) return b;
  return InverseModel(a.predicates(), a.vectors(),
                      OverwriteEntries(a.entries(), b.entries(), a.vectors()));
}

SubspaceModel Overwrite(const SubspaceModel& a, const SubspaceModel& b) {
  if (a.subspace != b.subspace) {
    throw std::invalid_argument("subspace models over different subspaces");
  }
  if (a.entries.empty() || b.entries.empty()) {
    throw std::invalid_argument("subspace model without entries");
  }
  return {a.subspace, OverwriteEntries(a.entries, b.entries,
                                       *a.entries.front().vector.store())};
}

OutputVector Evaluate(const InverseModel& m, const Header& header) {
  for (const ModelEntry& e : m.entries()) {
    if (m.predicates().Contains(e.predicate, header)) return e.vector;
  }
  throw std::logic_error("header not covered by model");
}

bool IsProjection(const InverseModel& projection, const InverseModel& m) {
  CheckSameStores(projection, m);
  for (const ModelEntry& p : projection.entries()) {
    if (p.vector.IsNoUpdate()) continue;
    for (const ModelEntry& e : m.entries()) {
      if (p.predicate.Intersects(e.predicate) &&
          !m.vectors().IsProjection(p.vector, e.vector)) {
        return false;
      }
    }
  }
  return true;
}

bool AreDisjoint(const InverseModel& a, const InverseModel& b,
                 Disjointness kind) {
  CheckSameStores(a, b);
  for (const ModelEntry& x : a.entries()) {
    if (x.vector.IsNoUpdate()) continue;
    for (const ModelEntry& y : b.entries()) {
      if (y.vector.IsNoUpdate()) continue;
      const bool supports = a.vectors().SupportsDisjoint(x.vector, y.vector);
      switch (kind) {
        case Disjointness::kPredicate:
          if (x.predicate.Intersects(y.predicate)) return false;
          break;
        case Disjointness::kComponent:
          if (!supports) return false;
          break;
        case Disjointness::kEither:
          if (!supports && x.predicate.Intersects(y.predicate)) return false;
          break;
      }
    }
  }
  return true;
}

InverseModel Absorb(std::span<const InverseModel> models) {
  if (models.empty()) throw std::invalid_argument("absorb of no models");
  for (size_t i = 0; i < models.size(); ++i) {
    for (size_t j = i + 1; j < models.size(); ++j) {
      if (!AreDisjoint(models[i], models[j], Disjointness::kPredicate)) {
        throw std::invalid_argument(absl::StrCat(
            "absorb: models ", i, " and ", j, " are not predicate-disjoint"));
      }
    }
  }
  PredicateStore& predicates = models.front().predicates();
  VectorStore& vectors = models.front().vectors();
  Buckets buckets;
  Predicate covered = predicates.False();
  for (const InverseModel& m : models) {
    CheckSameStores(models.front(), m);
    for (const ModelEntry& e : m.entries()) {
      if (e.vector.IsNoUpdate()) continue;
      buckets.Add(e.predicate, e.vector);
      covered |= e.predicate;
    }
  }
  std::vector<ModelEntry> entries = buckets.Take();
  if (!covered.IsTrue()) entries.push_back({~covered, vectors.Zero()});
  return InverseModel(predicates, vectors, std::move(entries));
}

SubspaceModel Restrict(const InverseModel& m, Predicate subspace) {
  if (subspace.IsEmpty()) throw std::invalid_argument("restrict to empty set");
  SubspaceModel out{subspace, {}};
  for (const ModelEntry& e : m.entries()) {
    Predicate p = e.predicate & subspace;
    if (!p.IsEmpty()) out.entries.push_back({p, e.vector});
  }
  return out;
}

InverseModel MergeSubspaces(PredicateStore& predicates, VectorStore& vectors,
                            std::span<const SubspaceModel> parts) {
  Predicate covered = predicates.False();
  Buckets buckets;
  for (const SubspaceModel& part : parts) {
    if (covered.Intersects(part.subspace)) {
      throw std::invalid_argument("merge: overlapping subspaces");
    }
    covered |= part.subspace;
    for (const ModelEntry& e : part.entries) buckets.Add(e.predicate, e.vector);
  }
  if (!covered.IsTrue()) {
    throw std::invalid_argument("merge: subspaces do not cover the header space");
  }
  return InverseModel(predicates, vectors, buckets.Take());
}

namespace {

bool EntriesEqual(std::span<const ModelEntry> a, std::span<const ModelEntry> b) {
  if (a.size() != b.size()) return false;
  absl::flat_hash_map<uint32_t, Predicate> by_vector;
  for (const ModelEntry& e : a) by_vector.emplace(e.vector.root(), e.predicate);
  for (const ModelEntry& e : b) {
    auto it = by_vector.find(e.vector.root());
    if (it == by_vector.end() || it->second != e.predicate) return false;
  }
  return true;
}

}  // namespace

bool ModelEquals(const InverseModel& a, const InverseModel& b) {
  CheckSameStores(a, b);
  return EntriesEqual(a.entries(), b.entries());
}

bool ModelEquals(const SubspaceModel& a, const SubspaceModel& b) {
  return a.subspace == b.subspace && EntriesEqual(a.entries, b.entries);
}

std::string DumpModel(const InverseModel& m) {
  std::string out;
  for (const ModelEntry& e : m.SortedEntries()) {
    absl::StrAppend(&out, absl::StrJoin(m.predicates().Cubes(e.predicate), " "),
                    " :: ", FormatVector(e.vector.ToPlain()), "\n");
  }
  return out;
}

std::optional<Rational> AverageDifferenceRatio(const InverseModel& m) {
  const auto& entries = m.entries();
  if (entries.size() < 2) return std::nullopt;
  BigCount agreements = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    for (size_t j = i + 1; j < entries.size(); ++j) {
      agreements += m.vectors().AgreementCount(entries[i].vector,
                                               entries[j].vector);
    }
  }
  BigCount pairs = BigCount(entries.size()) * (entries.size() - 1) / 2;
  return Rational(agreements, pairs * m.width());
}

}  // namespace invmodel
