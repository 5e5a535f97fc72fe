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

// Inverse models and the overwrite monoid.
//
// An inverse model is a set of (header set, output vector) entries with
// unique vectors, pairwise disjoint nonempty header sets, and a union equal
// to the whole header space. The same type represents equivalence classes
// of a data plane and incremental updates to them; both are combined with
// `Overwrite`, whose identity is `InverseModel::Identity`.

#ifndef INVMODEL_MODEL_H_
#define INVMODEL_MODEL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invmodel/action.h"
#include "invmodel/merkle.h"
#include "invmodel/predicate.h"

namespace invmodel {

struct ModelEntry {
  Predicate predicate;
  OutputVector vector;

  friend bool operator==(const ModelEntry&, const ModelEntry&) = default;
};

class InverseModel {
 public:
  // Does not validate; see CheckInvariants.
  InverseModel(PredicateStore& predicates, VectorStore& vectors,
               std::vector<ModelEntry> entries);

  // {(true, 0)}.
  static InverseModel Identity(PredicateStore& predicates,
                               VectorStore& vectors);

  PredicateStore& predicates() const { return *predicates_; }
  VectorStore& vectors() const { return *vectors_; }
  size_t width() const { return vectors_->width(); }

  const std::vector<ModelEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool IsIdentity() const;

  // Header set mapped to `v`, or nullopt if `v` is not in the range.
  std::optional<Predicate> Find(OutputVector v) const;

  // Entries ordered by vector digest.
  std::vector<ModelEntry> SortedEntries() const;

 private:
  PredicateStore* predicates_;
  VectorStore* vectors_;
  std::vector<ModelEntry> entries_;
};

// An inverse model restricted to the header set `subspace`: entries are
// disjoint, nonempty, and cover exactly `subspace`.
struct SubspaceModel {
  Predicate subspace;
  std::vector<ModelEntry> entries;
};

// Empty `violation` means every model invariant holds.
struct InvariantCheck {
  bool ok = true;
  std::string violation;
};
InvariantCheck CheckInvariants(const InverseModel& m);
InvariantCheck CheckInvariants(const SubspaceModel& m);

// A ⊗ B: every pair of entries contributes the intersection of their header
// sets to the bucket of the overwritten vector; empty buckets vanish.
// Throws std::invalid_argument if the operands use different stores.
InverseModel Overwrite(const InverseModel& a, const InverseModel& b);
SubspaceModel Overwrite(const SubspaceModel& a, const SubspaceModel& b);

// The vector of the entry containing `header`.
OutputVector Evaluate(const InverseModel& m, const Header& header);

// Every entry of `projection` overlapping an entry of `m` carries a vector
// that is NOUPDATE or equal to the overlapped entry's vector, per component.
bool IsProjection(const InverseModel& projection, const InverseModel& m);

enum class Disjointness {
  // All non-0 entry pairs have disjoint header sets.
  kPredicate,
  // All non-0 entry pairs have disjoint component supports.
  kComponent,
  // Each non-0 entry pair satisfies one of the two.
  kEither,
};
bool AreDisjoint(const InverseModel& a, const InverseModel& b,
                 Disjointness kind);

// Union of the non-0 entries per vector plus the 0 complement. Equal to the
// overwrite chain of `models` in any order. Throws std::invalid_argument if
// the models are not pairwise predicate-disjoint or `models` is empty.
InverseModel Absorb(std::span<const InverseModel> models);

// Throws std::invalid_argument if `subspace` is empty.
SubspaceModel Restrict(const InverseModel& m, Predicate subspace);

// Reassembles a full model from subspace models whose subspaces partition
// the header space. Throws std::invalid_argument otherwise.
InverseModel MergeSubspaces(PredicateStore& predicates, VectorStore& vectors,
                            std::span<const SubspaceModel> parts);

// Same entry set. Handles are canonical, so this is semantic equality.
bool ModelEquals(const InverseModel& a, const InverseModel& b);
bool ModelEquals(const SubspaceModel& a, const SubspaceModel& b);

// One line per entry, ordered by vector digest:
//   <cube> <cube> ... :: <action>,<action>,...
std::string DumpModel(const InverseModel& m);

// Mean agreement fraction over all unordered pairs of distinct entries;
// nullopt for models with fewer than two entries.
std::optional<Rational> AverageDifferenceRatio(const InverseModel& m);

}  // namespace invmodel

#endif  // INVMODEL_MODEL_H_
