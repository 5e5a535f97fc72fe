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

#include "invmodel/predicate.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace invmodel {
namespace {

constexpr uint32_t kFalse = 0;
constexpr uint32_t kTrue = 1;
// Memo tables are flushed once they grow past this many entries.
constexpr size_t kMaxMemoEntries = size_t{1} << 22;

}  // namespace

// ---------------------------------------------------------------------------
// Header

Header::Header(uint32_t bits) : bytes_((bits + 7) / 8, 0), bits_(bits) {
  if (bits == 0) throw std::invalid_argument("header width must be >= 1");
}

Header Header::FromUint(uint64_t value, uint32_t bits) {
  Header h(bits);
  for (uint32_t i = 0; i < bits; ++i) {
    uint32_t shift = bits - 1 - i;
    h.set_bit(i, shift < 64 && ((value >> shift) & 1));
  }
  return h;
}

Header Header::FromBytes(std::span<const uint8_t> bytes, uint32_t bits) {
  Header h(bits);
  if (bytes.size() * 8 < bits) {
    throw std::invalid_argument("header bytes shorter than header width");
  }
  std::copy_n(bytes.begin(), h.bytes_.size(), h.bytes_.begin());
  if (bits % 8 != 0) h.bytes_.back() &= uint8_t(0xff << (8 - bits % 8));
  return h;
}

void Header::set_bit(uint32_t i, bool value) {
  uint8_t mask = uint8_t(1u << (7 - i % 8));
  if (value) {
    bytes_[i / 8] |= mask;
  } else {
    bytes_[i / 8] &= uint8_t(~mask);
  }
}

std::string Header::ToString() const {
  std::string out(bits_, '0');
  for (uint32_t i = 0; i < bits_; ++i) {
    if (bit(i)) out[i] = '1';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prefix

Prefix Prefix::Parse(std::string_view input) {
  const absl::string_view text(input.data(), input.size());
  std::pair<absl::string_view, absl::string_view> parts =
      absl::StrSplit(text, absl::MaxSplits('/', 1));
  Prefix prefix;
  if (!absl::SimpleAtoi(parts.second, &prefix.length)) {
    throw std::invalid_argument(absl::StrCat("bad prefix length in '", text, "'"));
  }
  for (absl::string_view octet : absl::StrSplit(parts.first, '.')) {
    uint32_t value;
    if (!absl::SimpleAtoi(octet, &value) || value > 255) {
      throw std::invalid_argument(absl::StrCat("bad address in '", text, "'"));
    }
    prefix.address.push_back(uint8_t(value));
  }
  if (prefix.length > prefix.address.size() * 8) {
    throw std::invalid_argument(
        absl::StrCat("prefix length exceeds address in '", text, "'"));
  }
  // Canonicalize: clear bits past the prefix length.
  for (uint32_t i = prefix.length; i < prefix.address.size() * 8; ++i) {
    prefix.address[i / 8] &= uint8_t(~(1u << (7 - i % 8)));
  }
  return prefix;
}

std::string Prefix::ToString() const {
  std::vector<uint8_t> octets = address;
  while (octets.size() < 4) octets.push_back(0);
  for (uint32_t i = length; i < octets.size() * 8; ++i) {
    octets[i / 8] &= uint8_t(~(1u << (7 - i % 8)));
  }
  return absl::StrCat(
      absl::StrJoin(octets, ".",
                    [](std::string* out, uint8_t b) { absl::StrAppend(out, b); }),
      "/", length);
}

bool Prefix::Matches(const Header& header) const {
  if (length > header.bits()) return false;
  for (uint32_t i = 0; i < length; ++i) {
    bool want = (address[i / 8] >> (7 - i % 8)) & 1;
    if (header.bit(i) != want) return false;
  }
  return true;
}

bool operator==(const Prefix& a, const Prefix& b) {
  if (a.length != b.length) return false;
  for (uint32_t i = 0; i < a.length; ++i) {
    if (((a.address[i / 8] ^ b.address[i / 8]) >> (7 - i % 8)) & 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Predicate operators

Predicate operator&(Predicate a, Predicate b) {
  return a.store_->Combine(CombineOp::kAnd, a, b);
}
bool Predicate::Intersects(Predicate other) const {
  return store_->Intersects(*this, other);
}

Predicate operator|(Predicate a, Predicate b) {
  return a.store_->Combine(CombineOp::kOr, a, b);
}
Predicate operator-(Predicate a, Predicate b) {
  return a.store_->Combine(CombineOp::kDiff, a, b);
}
Predicate operator~(Predicate a) { return a.store_->Negate(a); }

// ---------------------------------------------------------------------------
// PredicateStore

PredicateStore::PredicateStore(uint32_t header_bits)
    : header_bits_(header_bits) {
  if (header_bits == 0) {
    throw std::invalid_argument("header width must be >= 1");
  }
  // Terminals sit below every variable.
  nodes_.push_back({header_bits, kFalse, kFalse});
  nodes_.push_back({header_bits, kTrue, kTrue});
}

void PredicateStore::CheckOwned(Predicate p) const {
  if (p.store_ != this) {
    throw std::invalid_argument("predicate belongs to a different store");
  }
}

uint32_t PredicateStore::MakeNode(uint32_t var, uint32_t low, uint32_t high) {
  if (low == high) return low;
  auto [it, inserted] =
      unique_.try_emplace(NodeKey{var, low, high}, uint32_t(nodes_.size()));
  if (inserted) nodes_.push_back({var, low, high});
  return it->second;
}

Predicate PredicateStore::FromPrefix(std::span<const uint8_t> address,
                                     uint32_t length) {
  if (length > header_bits_) {
    throw std::invalid_argument(absl::StrCat("prefix length ", length,
                                             " exceeds header width ",
                                             header_bits_));
  }
  if (address.size() * 8 < length) {
    throw std::invalid_argument("prefix address shorter than prefix length");
  }
  uint32_t node = kTrue;
  for (uint32_t i = length; i-- > 0;) {
    bool bit = (address[i / 8] >> (7 - i % 8)) & 1;
    node = bit ? MakeNode(i, kFalse, node) : MakeNode(i, node, kFalse);
  }
  return Predicate(this, node);
}

Predicate PredicateStore::FromPrefix(const Prefix& prefix) {
  return FromPrefix(prefix.address, prefix.length);
}

Predicate PredicateStore::FromHeader(const Header& header) {
  if (header.bits() != header_bits_) {
    throw std::invalid_argument("header width does not match store");
  }
  return FromPrefix(header.bytes(), header_bits_);
}

Predicate PredicateStore::FromCube(std::string_view cube) {
  if (cube.size() != header_bits_) {
    throw std::invalid_argument(absl::StrCat("cube '", std::string(cube),
                                             "' does not have length ",
                                             header_bits_));
  }
  uint32_t node = kTrue;
  for (uint32_t i = header_bits_; i-- > 0;) {
    switch (cube[i]) {
      case '0': node = MakeNode(i, node, kFalse); break;
      case '1': node = MakeNode(i, kFalse, node); break;
      case '*': break;
      default:
        throw std::invalid_argument(absl::StrCat("bad cube character in '",
                                                 std::string(cube), "'"));
    }
  }
  return Predicate(this, node);
}

Predicate PredicateStore::Combine(CombineOp op, Predicate a, Predicate b) {
  CheckOwned(a);
  CheckOwned(b);
  TrimCaches();
  return Predicate(this, Apply(op, a.node_, b.node_));
}

Predicate PredicateStore::Negate(Predicate a) {
  CheckOwned(a);
  TrimCaches();
  return Predicate(this, Not(a.node_));
}

void PredicateStore::TrimCaches() {
  if (apply_memo_.size() > kMaxMemoEntries) apply_memo_.clear();
  if (not_memo_.size() > kMaxMemoEntries) not_memo_.clear();
  if (intersect_memo_.size() > kMaxMemoEntries) intersect_memo_.clear();
}

void PredicateStore::ClearCaches() {
  apply_memo_.clear();
  not_memo_.clear();
  intersect_memo_.clear();
}

uint32_t PredicateStore::Not(uint32_t a) {
  if (a == kFalse) return kTrue;
  if (a == kTrue) return kFalse;
  if (auto it = not_memo_.find(a); it != not_memo_.end()) return it->second;
  Node n = nodes_[a];
  uint32_t low = Not(n.low);
  uint32_t high = Not(n.high);
  uint32_t result = MakeNode(n.var, low, high);
  not_memo_[a] = result;
  not_memo_[result] = a;
  return result;
}

uint32_t PredicateStore::Apply(CombineOp op, uint32_t a, uint32_t b) {
  switch (op) {
    case CombineOp::kAnd:
      if (a == kFalse || b == kFalse) return kFalse;
      if (a == kTrue || a == b) return b;
      if (b == kTrue) return a;
      if (a > b) std::swap(a, b);
      break;
    case CombineOp::kOr:
      if (a == kTrue || b == kTrue) return kTrue;
      if (a == kFalse || a == b) return b;
      if (b == kFalse) return a;
      if (a > b) std::swap(a, b);
      break;
    case CombineOp::kDiff:
      if (a == kFalse || b == kTrue || a == b) return kFalse;
      if (b == kFalse) return a;
      if (a == kTrue) return Not(b);
      break;
  }
  OpKey key{uint32_t(op), a, b};
  if (auto it = apply_memo_.find(key); it != apply_memo_.end()) {
    return it->second;
  }
  Node na = nodes_[a];
  Node nb = nodes_[b];
  uint32_t var = std::min(na.var, nb.var);
  uint32_t a_low = na.var == var ? na.low : a;
  uint32_t a_high = na.var == var ? na.high : a;
  uint32_t b_low = nb.var == var ? nb.low : b;
  uint32_t b_high = nb.var == var ? nb.high : b;
  uint32_t low = Apply(op, a_low, b_low);
  uint32_t high = Apply(op, a_high, b_high);
  uint32_t result = MakeNode(var, low, high);
  apply_memo_[key] = result;
  return result;
}

bool PredicateStore::Intersects(Predicate a, Predicate b) {
  CheckOwned(a);
  CheckOwned(b);
  TrimCaches();
  return IntersectsRec(a.node_, b.node_);
}

bool PredicateStore::IntersectsRec(uint32_t a, uint32_t b) {
  if (a == kFalse || b == kFalse) return false;
  if (a == kTrue || b == kTrue || a == b) return true;
  if (a > b) std::swap(a, b);
  OpKey key{uint32_t(CombineOp::kAnd), a, b};
  if (auto it = apply_memo_.find(key); it != apply_memo_.end()) {
    return it->second != kFalse;
  }
  if (auto it = intersect_memo_.find(key); it != intersect_memo_.end()) {
    return it->second;
  }
  Node na = nodes_[a];
  Node nb = nodes_[b];
  uint32_t var = std::min(na.var, nb.var);
  bool result = IntersectsRec(na.var == var ? na.low : a, nb.var == var ? nb.low : b) ||
                IntersectsRec(na.var == var ? na.high : a, nb.var == var ? nb.high : b);
  intersect_memo_[key] = result;
  return result;
}

bool PredicateStore::Contains(Predicate p, const Header& header) const {
  CheckOwned(p);
  if (header.bits() != header_bits_) {
    throw std::invalid_argument("header width does not match store");
  }
  uint32_t node = p.node_;
  while (node > kTrue) {
    const Node& n = nodes_[node];
    node = header.bit(n.var) ? n.high : n.low;
  }
  return node == kTrue;
}

BigCount PredicateStore::SatCount(Predicate p) const {
  CheckOwned(p);
  // count[n] = satisfying assignments of variables var(n)..L-1.
  absl::flat_hash_map<uint32_t, BigCount> memo;
  auto count = [&](auto&& self, uint32_t node) -> BigCount {
    if (node == kFalse) return 0;
    if (node == kTrue) return 1;
    if (auto it = memo.find(node); it != memo.end()) return it->second;
    const Node& n = nodes_[node];
    BigCount low = self(self, n.low) << (nodes_[n.low].var - n.var - 1);
    BigCount high = self(self, n.high) << (nodes_[n.high].var - n.var - 1);
    BigCount total = low + high;
    memo.emplace(node, total);
    return total;
  };
  return count(count, p.node_) << nodes_[p.node_].var;
}

std::vector<std::string> PredicateStore::Cubes(Predicate p) const {
  CheckOwned(p);
  std::vector<std::string> out;
  std::string cube(header_bits_, '*');
  auto walk = [&](auto&& self, uint32_t node) -> void {
    if (node == kFalse) return;
    if (node == kTrue) {
      out.push_back(cube);
      return;
    }
    const Node& n = nodes_[node];
    cube[n.var] = '0';
    self(self, n.low);
    cube[n.var] = '1';
    self(self, n.high);
    cube[n.var] = '*';
  };
  walk(walk, p.node_);
  std::sort(out.begin(), out.end());
  return out;
}

Header PredicateStore::AnyHeader(Predicate p) const {
  CheckOwned(p);
  if (p.IsEmpty()) throw std::invalid_argument("AnyHeader of empty predicate");
  Header h(header_bits_);
  uint32_t node = p.node_;
  while (node > kTrue) {
    const Node& n = nodes_[node];
    if (n.low != kFalse) {
      node = n.low;
    } else {
      h.set_bit(n.var, true);
      node = n.high;
    }
  }
  return h;
}

std::string SerializeCubes(Predicate p) {
  std::string out;
  for (const std::string& cube : p.store()->Cubes(p)) {
    absl::StrAppend(&out, cube, "\n");
  }
  return out;
}

}  // namespace invmodel
