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

#include "invmodel/merkle.h"

#include <stdexcept>

#include "absl/strings/str_cat.h"

namespace invmodel {
namespace {

constexpr size_t kMaxMemoEntries = size_t{1} << 22;

}  // namespace

size_t OutputVector::width() const { return store_->width(); }
ActionId OutputVector::operator[](size_t index) const {
  return store_->Get(*this, index);
}
const Digest& OutputVector::digest() const { return store_->DigestOf(*this); }
bool OutputVector::IsNoUpdate() const { return *this == store_->Zero(); }
PlainVector OutputVector::ToPlain() const { return store_->ToPlain(*this); }
std::string OutputVector::ToString() const {
  return absl::StrCat("(", FormatVector(ToPlain()), ")");
}

VectorStore::VectorStore(size_t width) : width_(width) {
  if (width == 0) throw std::invalid_argument("vector width must be >= 1");
  while ((size_t{1} << depth_) < width) ++depth_;
  zero_.push_back(MakeLeaf(kNoUpdate));
  for (uint32_t l = 1; l <= depth_; ++l) {
    zero_.push_back(MakeInternal(zero_[l - 1], zero_[l - 1]));
  }
}

void VectorStore::CheckOwned(OutputVector v) const {
  if (v.store_ != this) {
    throw std::invalid_argument("output vector belongs to a different store");
  }
}

uint32_t VectorStore::MakeLeaf(ActionId value) {
  auto [it, inserted] = leaves_.try_emplace(value, uint32_t(nodes_.size()));
  if (inserted) {
    nodes_.push_back({0, 0, value, 0, LeafDigest(value)});
  }
  return it->second;
}

uint32_t VectorStore::MakeInternal(uint32_t left, uint32_t right) {
  auto [it, inserted] =
      internal_.try_emplace({left, right}, uint32_t(nodes_.size()));
  if (inserted) {
    nodes_.push_back({left, right, kNoUpdate, nodes_[left].level + 1,
                      HashPair(nodes_[left].digest, nodes_[right].digest)});
  }
  return it->second;
}

uint32_t VectorStore::BuildRec(std::span<const ActionId> padded,
                               uint32_t level) {
  if (level == 0) return MakeLeaf(padded.front());
  size_t half = padded.size() / 2;
  uint32_t left = BuildRec(padded.first(half), level - 1);
  uint32_t right = BuildRec(padded.subspan(half), level - 1);
  return MakeInternal(left, right);
}

OutputVector VectorStore::FromPlain(std::span<const ActionId> values) {
  if (values.size() != width_) {
    throw std::invalid_argument(absl::StrCat("vector of length ", values.size(),
                                             " in store of width ", width_));
  }
  PlainVector padded(size_t{1} << depth_, kNoUpdate);
  std::copy(values.begin(), values.end(), padded.begin());
  return OutputVector(this, BuildRec(padded, depth_));
}

OutputVector VectorStore::Vectorize(size_t index, ActionId value) {
  return Set(Zero(), index, value);
}

uint32_t VectorStore::SetRec(uint32_t node, size_t index, ActionId value) {
  const Node n = nodes_[node];
  if (n.level == 0) return MakeLeaf(value);
  size_t half = size_t{1} << (n.level - 1);
  if (index < half) {
    return MakeInternal(SetRec(n.left, index, value), n.right);
  }
  return MakeInternal(n.left, SetRec(n.right, index - half, value));
}

OutputVector VectorStore::Set(OutputVector v, size_t index, ActionId value) {
  CheckOwned(v);
  if (index >= width_) {
    throw std::out_of_range(absl::StrCat("component index ", index,
                                         " out of range for width ", width_));
  }
  return OutputVector(this, SetRec(v.root_, index, value));
}

uint32_t VectorStore::OverwriteRec(uint32_t a, uint32_t b) {
  const uint32_t level = nodes_[a].level;
  if (b == zero_[level] || a == b) return a;
  if (a == zero_[level] || level == 0) return b;
  auto key = std::make_pair(a, b);
  if (auto it = overwrite_memo_.find(key); it != overwrite_memo_.end()) {
    return it->second;
  }
  const Node na = nodes_[a];
  const Node nb = nodes_[b];
  uint32_t left = OverwriteRec(na.left, nb.left);
  uint32_t right = OverwriteRec(na.right, nb.right);
  uint32_t result = MakeInternal(left, right);
  overwrite_memo_.emplace(key, result);
  return result;
}

OutputVector VectorStore::Overwrite(OutputVector a, OutputVector b) {
  CheckOwned(a);
  CheckOwned(b);
  if (overwrite_memo_.size() > kMaxMemoEntries) overwrite_memo_.clear();
  return OutputVector(this, OverwriteRec(a.root_, b.root_));
}

ActionId VectorStore::Get(OutputVector v, size_t index) const {
  CheckOwned(v);
  if (index >= width_) {
    throw std::out_of_range(absl::StrCat("component index ", index,
                                         " out of range for width ", width_));
  }
  uint32_t node = v.root_;
  while (nodes_[node].level > 0) {
    size_t half = size_t{1} << (nodes_[node].level - 1);
    if (index < half) {
      node = nodes_[node].left;
    } else {
      node = nodes_[node].right;
      index -= half;
    }
  }
  return nodes_[node].leaf;
}

void VectorStore::ToPlainRec(uint32_t node, size_t offset,
                             PlainVector& out) const {
  if (offset >= out.size()) return;
  const Node& n = nodes_[node];
  if (n.level == 0) {
    out[offset] = n.leaf;
    return;
  }
  if (node == zero_[n.level]) return;
  ToPlainRec(n.left, offset, out);
  ToPlainRec(n.right, offset + (size_t{1} << (n.level - 1)), out);
}

PlainVector VectorStore::ToPlain(OutputVector v) const {
  CheckOwned(v);
  PlainVector out(width_, kNoUpdate);
  ToPlainRec(v.root_, 0, out);
  return out;
}

const Digest& VectorStore::DigestOf(OutputVector v) const {
  CheckOwned(v);
  return nodes_[v.root_].digest;
}

bool VectorStore::IsProjectionRec(uint32_t p, uint32_t v) const {
  const Node& n = nodes_[p];
  if (p == v || p == zero_[n.level]) return true;
  if (n.level == 0) return false;
  return IsProjectionRec(n.left, nodes_[v].left) &&
         IsProjectionRec(n.right, nodes_[v].right);
}

bool VectorStore::IsProjection(OutputVector p, OutputVector v) const {
  CheckOwned(p);
  CheckOwned(v);
  return IsProjectionRec(p.root_, v.root_);
}

bool VectorStore::DisjointRec(uint32_t a, uint32_t b) const {
  const Node& n = nodes_[a];
  if (a == zero_[n.level] || b == zero_[n.level]) return true;
  if (n.level == 0) return false;
  return DisjointRec(n.left, nodes_[b].left) &&
         DisjointRec(n.right, nodes_[b].right);
}

bool VectorStore::SupportsDisjoint(OutputVector a, OutputVector b) const {
  CheckOwned(a);
  CheckOwned(b);
  return DisjointRec(a.root_, b.root_);
}

size_t VectorStore::AgreementRec(uint32_t a, uint32_t b) const {
  const Node& n = nodes_[a];
  if (a == b) return size_t{1} << n.level;
  if (n.level == 0) return 0;
  return AgreementRec(n.left, nodes_[b].left) +
         AgreementRec(n.right, nodes_[b].right);
}

size_t VectorStore::AgreementCount(OutputVector a, OutputVector b) const {
  CheckOwned(a);
  CheckOwned(b);
  // Padding leaves are NOUPDATE in both trees and always agree.
  return AgreementRec(a.root_, b.root_) - ((size_t{1} << depth_) - width_);
}

}  // namespace invmodel
