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

// Per-device output values and plain (array-backed) output vectors.
//
// Action values are interned process-wide into `ActionId`s so that vectors
// are compact and equality is an integer compare. `kNoUpdate` (id 0) is the
// reserved "keep the previous value" action.

#ifndef INVMODEL_ACTION_H_
#define INVMODEL_ACTION_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace invmodel {

using Rational = boost::multiprecision::cpp_rational;

// 128-bit content digest.
struct Digest {
  std::array<uint8_t, 16> bytes{};

  std::string Hex() const;
  friend auto operator<=>(const Digest&, const Digest&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const Digest& d) {
    return H::combine(std::move(h), d.bytes);
  }
};

Digest HashBytes(std::string_view data);
Digest HashPair(const Digest& left, const Digest& right);

struct ActionValue {
  enum class Kind : uint8_t { kNoUpdate, kDrop, kDeliver, kForward };

  Kind kind = Kind::kNoUpdate;
  // Endpoint name for kDeliver.
  std::string target;
  // Sorted, duplicate-free port labels for kForward.
  std::vector<std::string> ports;

  static ActionValue NoUpdate() { return {}; }
  static ActionValue Drop() { return {Kind::kDrop, {}, {}}; }
  static ActionValue Deliver(std::string target);
  static ActionValue Forward(std::vector<std::string> ports);

  // Grammar: `drop` | `deliver:<name>` | `fwd:<port>[,<port>...]` | `-`.
  // Throws std::invalid_argument on anything else.
  static ActionValue Parse(std::string_view text);
  std::string ToString() const;

  friend bool operator==(const ActionValue&, const ActionValue&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const ActionValue& a) {
    return H::combine(std::move(h), a.kind, a.target, a.ports);
  }
};

struct ActionId {
  uint32_t value = 0;

  friend auto operator<=>(const ActionId&, const ActionId&) = default;
  template <typename H>
  friend H AbslHashValue(H h, ActionId a) {
    return H::combine(std::move(h), a.value);
  }
};

inline constexpr ActionId kNoUpdate{0};

// Process-wide interning; safe to call from multiple threads.
ActionId Intern(const ActionValue& value);
ActionId InternText(std::string_view text);
const ActionValue& Lookup(ActionId id);
std::string ActionText(ActionId id);
// Digest of a single-leaf tree holding `id`.
const Digest& LeafDigest(ActionId id);

// a if b is NOUPDATE, else b.
inline ActionId OverwriteComponent(ActionId a, ActionId b) {
  return b == kNoUpdate ? a : b;
}

using PlainVector = std::vector<ActionId>;

// Component-wise overwrite; throws std::invalid_argument on length mismatch.
PlainVector OverwriteVector(std::span<const ActionId> a,
                            std::span<const ActionId> b);

// NOUPDATE everywhere except `value` at 0-based position `index`.
PlainVector Vectorize(size_t index, ActionId value, size_t width);

// Fraction of positions at which `a` and `b` hold the same action.
Rational DifferenceRatio(std::span<const ActionId> a,
                         std::span<const ActionId> b);

// Root digest of the padded complete binary tree over `v`; equal to the
// digest of the Merkle-backed vector with the same content.
Digest PlainDigest(std::span<const ActionId> v);

// "a1,a2,...,aN" in the action grammar.
std::string FormatVector(std::span<const ActionId> v);

}  // namespace invmodel

#endif  // INVMODEL_ACTION_H_
