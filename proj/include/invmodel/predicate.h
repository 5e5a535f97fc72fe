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

// Header sets over {0,1}^L as reduced ordered binary decision diagrams.
//
// A `PredicateStore` owns a hash-consed node table. Every `Predicate` is a
// (store, node) handle; because nodes are hash-consed, two predicates of the
// same store denote the same header set iff their handles are equal. Header
// bit 0 is the most significant bit and is the topmost decision variable, so
// prefix predicates stay linear in the prefix length.
//
// The store is single-writer: anything that creates nodes (combining,
// negating, building from prefixes) must be serialized by the caller. Queries
// that only walk existing nodes (`Contains`, `SatCount`, `Cubes`) are const.

#ifndef INVMODEL_PREDICATE_H_
#define INVMODEL_PREDICATE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "absl/container/flat_hash_map.h"

namespace invmodel {

using BigCount = boost::multiprecision::cpp_int;

// A concrete header value in {0,1}^L, stored most-significant-bit first.
class Header {
 public:
  explicit Header(uint32_t bits);

  // `value` holds the header right-aligned: its bit (bits-1) is header bit 0.
  static Header FromUint(uint64_t value, uint32_t bits);
  static Header FromBytes(std::span<const uint8_t> bytes, uint32_t bits);

  uint32_t bits() const { return bits_; }
  bool bit(uint32_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1; }
  void set_bit(uint32_t i, bool value);
  std::span<const uint8_t> bytes() const { return bytes_; }

  // Binary string of length `bits()`.
  std::string ToString() const;

  friend bool operator==(const Header&, const Header&) = default;

 private:
  std::vector<uint8_t> bytes_;
  uint32_t bits_;
};

// A destination prefix `address/length`. Only the first `length` bits of the
// address are significant.
struct Prefix {
  std::vector<uint8_t> address;
  uint32_t length = 0;

  // Parses dotted-octet notation such as "10.1.3.0/24". Throws
  // std::invalid_argument on malformed input.
  static Prefix Parse(std::string_view text);

  // Dotted quad with the host bits cleared, e.g. "10.1.3.0/24".
  std::string ToString() const;

  // Plain bit comparison; shares no code with the BDD engine.
  bool Matches(const Header& header) const;

  friend bool operator==(const Prefix& a, const Prefix& b);
};

enum class CombineOp { kAnd, kOr, kDiff };

class PredicateStore;

class Predicate {
 public:
  Predicate() = default;

  PredicateStore* store() const { return store_; }
  uint32_t id() const { return node_; }
  bool valid() const { return store_ != nullptr; }

  bool IsEmpty() const { return node_ == 0; }
  bool IsTrue() const { return node_ == 1; }

  friend Predicate operator&(Predicate a, Predicate b);
  friend Predicate operator|(Predicate a, Predicate b);
  // Set difference.
  friend Predicate operator-(Predicate a, Predicate b);
  friend Predicate operator~(Predicate a);
  Predicate& operator&=(Predicate other) { return *this = *this & other; }
  Predicate& operator|=(Predicate other) { return *this = *this | other; }
  Predicate& operator-=(Predicate other) { return *this = *this - other; }

  // Same as !(*this & other).IsEmpty() without building the conjunction.
  bool Intersects(Predicate other) const;

  friend bool operator==(const Predicate&, const Predicate&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const Predicate& p) {
    return H::combine(std::move(h), p.store_, p.node_);
  }

 private:
  friend class PredicateStore;
  Predicate(PredicateStore* store, uint32_t node)
      : store_(store), node_(node) {}

  PredicateStore* store_ = nullptr;
  uint32_t node_ = 0;
};

class PredicateStore {
 public:
  explicit PredicateStore(uint32_t header_bits);

  PredicateStore(const PredicateStore&) = delete;
  PredicateStore& operator=(const PredicateStore&) = delete;

  uint32_t header_bits() const { return header_bits_; }

  Predicate True() { return Predicate(this, 1); }
  Predicate False() { return Predicate(this, 0); }

  // Headers whose first `length` bits equal those of `address`. Throws
  // std::invalid_argument if `length` exceeds L or `address` is too short.
  Predicate FromPrefix(std::span<const uint8_t> address, uint32_t length);
  Predicate FromPrefix(const Prefix& prefix);

  // The single header `header`.
  Predicate FromHeader(const Header& header);

  // Ternary string over {0,1,*} of length L.
  Predicate FromCube(std::string_view cube);

  Predicate Combine(CombineOp op, Predicate a, Predicate b);
  Predicate Negate(Predicate a);

  bool Contains(Predicate p, const Header& header) const;
  bool Intersects(Predicate a, Predicate b);

  // Exact number of headers in `p`.
  BigCount SatCount(Predicate p) const;

  // Disjoint cubes covering `p`, one per BDD path to the true terminal, in
  // lexicographic order. `False` yields an empty list.
  std::vector<std::string> Cubes(Predicate p) const;

  // Some header in `p`; `p` must be nonempty.
  Header AnyHeader(Predicate p) const;

  size_t node_count() const { return nodes_.size(); }

  // Drops the operation memo tables. Node handles stay valid.
  void ClearCaches();

 private:
  struct Node {
    uint32_t var;
    uint32_t low;
    uint32_t high;
  };
  struct NodeKey {
    uint32_t var, low, high;
    friend bool operator==(const NodeKey&, const NodeKey&) = default;
    template <typename H>
    friend H AbslHashValue(H h, const NodeKey& k) {
      return H::combine(std::move(h), k.var, k.low, k.high);
    }
  };
  struct OpKey {
    uint32_t op, a, b;
    friend bool operator==(const OpKey&, const OpKey&) = default;
    template <typename H>
    friend H AbslHashValue(H h, const OpKey& k) {
      return H::combine(std::move(h), k.op, k.a, k.b);
    }
  };

  void CheckOwned(Predicate p) const;
  uint32_t MakeNode(uint32_t var, uint32_t low, uint32_t high);
  uint32_t Apply(CombineOp op, uint32_t a, uint32_t b);
  uint32_t Not(uint32_t a);
  bool IntersectsRec(uint32_t a, uint32_t b);
  void TrimCaches();

  uint32_t header_bits_;
  std::vector<Node> nodes_;
  absl::flat_hash_map<NodeKey, uint32_t> unique_;
  absl::flat_hash_map<OpKey, uint32_t> apply_memo_;
  absl::flat_hash_map<uint32_t, uint32_t> not_memo_;
  absl::flat_hash_map<OpKey, bool> intersect_memo_;
};

// Free-function forms of the predicate algebra.
inline Predicate Combine(CombineOp op, Predicate a, Predicate b) {
  return a.store()->Combine(op, a, b);
}
inline Predicate Negate(Predicate a) { return a.store()->Negate(a); }
inline bool IsEmpty(Predicate a) { return a.IsEmpty(); }
inline bool Equals(Predicate a, Predicate b) { return a == b; }
inline BigCount SatCount(Predicate a) { return a.store()->SatCount(a); }

// Debug serialization: one cube per line, sorted.
std::string SerializeCubes(Predicate p);

}  // namespace invmodel

#endif  // INVMODEL_PREDICATE_H_
