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

// Persistent Merkle-tree output vectors.
//
// A vector of width N is a complete binary tree over the component indices,
// padded to the next power of two with NOUPDATE leaves. Values live only in
// leaves; an internal node's digest is HashPair(left digest, right digest).
// Nodes are hash-consed per `VectorStore`, so structurally equal vectors share
// one root and vector equality is a root-id compare. Updates copy only the
// path from the changed leaf to the root.
//
// Same single-writer contract as `PredicateStore`.

#ifndef INVMODEL_MERKLE_H_
#define INVMODEL_MERKLE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "invmodel/action.h"

namespace invmodel {

class VectorStore;

class OutputVector {
 public:
  OutputVector() = default;

  VectorStore* store() const { return store_; }
  uint32_t root() const { return root_; }
  size_t width() const;

  ActionId operator[](size_t index) const;
  const Digest& digest() const;
  bool IsNoUpdate() const;
  PlainVector ToPlain() const;
  std::string ToString() const;

  friend bool operator==(const OutputVector&, const OutputVector&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const OutputVector& v) {
    return H::combine(std::move(h), v.store_, v.root_);
  }

 private:
  friend class VectorStore;
  OutputVector(VectorStore* store, uint32_t root) : store_(store), root_(root) {}

  VectorStore* store_ = nullptr;
  uint32_t root_ = 0;
};

class VectorStore {
 public:
  explicit VectorStore(size_t width);

  VectorStore(const VectorStore&) = delete;
  VectorStore& operator=(const VectorStore&) = delete;

  size_t width() const { return width_; }

  // The all-NOUPDATE vector.
  OutputVector Zero() const { return OutputVector(const_cast<VectorStore*>(this), zero_[depth_]); }
  OutputVector FromPlain(std::span<const ActionId> values);
  OutputVector Vectorize(size_t index, ActionId value);
  OutputVector Set(OutputVector v, size_t index, ActionId value);

  // Component-wise overwrite. Subtrees of `b` that are all NOUPDATE are
  // shared from `a` without being visited.
  OutputVector Overwrite(OutputVector a, OutputVector b);

  ActionId Get(OutputVector v, size_t index) const;
  PlainVector ToPlain(OutputVector v) const;
  const Digest& DigestOf(OutputVector v) const;

  // Every component of `p` is NOUPDATE or equal to the same component of `v`.
  bool IsProjection(OutputVector p, OutputVector v) const;
  // No index holds a non-NOUPDATE value in both vectors.
  bool SupportsDisjoint(OutputVector a, OutputVector b) const;
  // Number of indices in [0, width) where the vectors agree. Shared subtrees
  // are counted without descending.
  size_t AgreementCount(OutputVector a, OutputVector b) const;

  size_t node_count() const { return nodes_.size(); }
  void ClearCaches() { overwrite_memo_.clear(); }

 private:
  struct Node {
    uint32_t left;
    uint32_t right;
    ActionId leaf;
    uint32_t level;
    Digest digest;
  };

  void CheckOwned(OutputVector v) const;
  uint32_t MakeLeaf(ActionId value);
  uint32_t MakeInternal(uint32_t left, uint32_t right);
  uint32_t SetRec(uint32_t node, size_t index, ActionId value);
  uint32_t OverwriteRec(uint32_t a, uint32_t b);
  bool IsProjectionRec(uint32_t p, uint32_t v) const;
  bool DisjointRec(uint32_t a, uint32_t b) const;
  size_t AgreementRec(uint32_t a, uint32_t b) const;
  void ToPlainRec(uint32_t node, size_t offset, PlainVector& out) const;
  uint32_t BuildRec(std::span<const ActionId> padded, uint32_t level);

  size_t width_;
  uint32_t depth_ = 0;
  std::vector<Node> nodes_;
  // zero_[l] is the all-NOUPDATE subtree of level l.
  std::vector<uint32_t> zero_;
  absl::flat_hash_map<ActionId, uint32_t> leaves_;
  absl::flat_hash_map<std::pair<uint32_t, uint32_t>, uint32_t> internal_;
  absl::flat_hash_map<std::pair<uint32_t, uint32_t>, uint32_t> overwrite_memo_;
};

}  // namespace invmodel

#endif  // INVMODEL_MERKLE_H_
