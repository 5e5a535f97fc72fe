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

#include "invmodel/action.h"

#include <sodium.h>

#include <algorithm>
#include <deque>
#include <mutex>
#include <stdexcept>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/escaping.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace invmodel {
namespace {

class ActionInterner {
 public:
  ActionInterner() { Intern(ActionValue::NoUpdate()); }

  ActionId Intern(const ActionValue& value) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(value);
    if (it != ids_.end()) return it->second;
    ActionId id{uint32_t(values_.size())};
    values_.push_back(value);
    digests_.push_back(HashBytes(absl::StrCat("L", value.ToString())));
    ids_.emplace(value, id);
    return id;
  }

  const ActionValue& Lookup(ActionId id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (id.value >= values_.size()) {
      throw std::out_of_range(absl::StrCat("unknown action id ", id.value));
    }
    return values_[id.value];
  }

  const Digest& LeafDigest(ActionId id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (id.value >= digests_.size()) {
      throw std::out_of_range(absl::StrCat("unknown action id ", id.value));
    }
    return digests_[id.value];
  }

 private:
  std::mutex mu_;
  // deques keep references stable across growth.
  std::deque<ActionValue> values_;
  std::deque<Digest> digests_;
  absl::flat_hash_map<ActionValue, ActionId> ids_;
};

ActionInterner& Interner() {
  static ActionInterner* interner = new ActionInterner();
  return *interner;
}

}  // namespace

std::string Digest::Hex() const {
  return absl::BytesToHexString(
      absl::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Digest HashBytes(std::string_view data) {
  static const bool initialized = sodium_init() >= 0;
  if (!initialized) throw std::runtime_error("libsodium failed to initialize");
  Digest d;
  crypto_generichash(d.bytes.data(), d.bytes.size(),
                     reinterpret_cast<const unsigned char*>(data.data()),
                     data.size(), nullptr, 0);
  return d;
}

Digest HashPair(const Digest& left, const Digest& right) {
  std::string buf(1 + 2 * 16, 'N');
  std::copy(left.bytes.begin(), left.bytes.end(), buf.begin() + 1);
  std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 17);
  return HashBytes(buf);
}

ActionValue ActionValue::Deliver(std::string target) {
  return {Kind::kDeliver, std::move(target), {}};
}

ActionValue ActionValue::Forward(std::vector<std::string> ports) {
  std::sort(ports.begin(), ports.end());
  ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
  if (ports.empty()) throw std::invalid_argument("forward action without ports");
  return {Kind::kForward, {}, std::move(ports)};
}

ActionValue ActionValue::Parse(std::string_view text) {
  if (text == "-") return NoUpdate();
  if (text == "drop") return Drop();
  if (text.starts_with("deliver:") && text.size() > 8) {
    return Deliver(std::string(text.substr(8)));
  }
  if (text.starts_with("fwd:") && text.size() > 4) {
    std::vector<std::string> ports = absl::StrSplit(std::string(text.substr(4)), ',');
    for (const std::string& p : ports) {
      if (p.empty()) {
        throw std::invalid_argument(absl::StrCat("empty port in '", std::string(text), "'"));
      }
    }
    return Forward(std::move(ports));
  }
  throw std::invalid_argument(absl::StrCat("unknown action '", std::string(text), "'"));
}

std::string ActionValue::ToString() const {
  switch (kind) {
    case Kind::kNoUpdate: return "-";
    case Kind::kDrop: return "drop";
    case Kind::kDeliver: return absl::StrCat("deliver:", target);
    case Kind::kForward: return absl::StrCat("fwd:", absl::StrJoin(ports, ","));
  }
  return "?";
}

ActionId Intern(const ActionValue& value) { return Interner().Intern(value); }

ActionId InternText(std::string_view text) {
  return Intern(ActionValue::Parse(text));
}

const ActionValue& Lookup(ActionId id) { return Interner().Lookup(id); }

std::string ActionText(ActionId id) { return Lookup(id).ToString(); }

const Digest& LeafDigest(ActionId id) { return Interner().LeafDigest(id); }

PlainVector OverwriteVector(std::span<const ActionId> a,
                            std::span<const ActionId> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(absl::StrCat("vector length mismatch: ",
                                             a.size(), " vs ", b.size()));
  }
  PlainVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = OverwriteComponent(a[i], b[i]);
  return out;
}

PlainVector Vectorize(size_t index, ActionId value, size_t width) {
  if (index >= width) {
    throw std::out_of_range(absl::StrCat("component index ", index,
                                         " out of range for width ", width));
  }
  PlainVector out(width, kNoUpdate);
  out[index] = value;
  return out;
}

Rational DifferenceRatio(std::span<const ActionId> a,
                         std::span<const ActionId> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("difference ratio needs equal nonzero lengths");
  }
  size_t same = 0;
  for (size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return Rational(same, a.size());
}

Digest PlainDigest(std::span<const ActionId> v) {
  size_t width = 1;
  while (width < v.size()) width *= 2;
  std::vector<Digest> level(width, LeafDigest(kNoUpdate));
  for (size_t i = 0; i < v.size(); ++i) level[i] = LeafDigest(v[i]);
  while (level.size() > 1) {
    std::vector<Digest> next(level.size() / 2);
    for (size_t i = 0; i < next.size(); ++i) {
      next[i] = HashPair(level[2 * i], level[2 * i + 1]);
    }
    level = std::move(next);
  }
  return level.front();
}

std::string FormatVector(std::span<const ActionId> v) {
  return absl::StrJoin(v, ",", [](std::string* out, ActionId id) {
    absl::StrAppend(out, ActionText(id));
  });
}

}  // namespace invmodel
