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

#include "invmodel/random.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"

namespace invmodel {

InverseModel ModelFromTable(PredicateStore& predicates, VectorStore& vectors,
                            const ExplicitTable& table) {
  const uint32_t bits = predicates.header_bits();
  if (bits > 20 || table.size() != (size_t{1} << bits)) {
    throw std::invalid_argument("table size does not match header width");
  }
  std::map<PlainVector, Predicate> groups;
  for (size_t x = 0; x < table.size(); ++x) {
    Predicate h = predicates.FromHeader(Header::FromUint(x, bits));
    auto [it, inserted] = groups.try_emplace(table[x], h);
    if (!inserted) it->second |= h;
  }
  std::vector<ModelEntry> entries;
  for (const auto& [v, p] : groups) {
    entries.push_back({p, vectors.FromPlain(v)});
  }
  return InverseModel(predicates, vectors, std::move(entries));
}

std::string RandomDeviceName(size_t i) { return absl::StrCat("d", i); }
std::string RandomEndpointName(size_t i) { return absl::StrCat("e", i); }

bool PrefixesOverlap(const Prefix& a, const Prefix& b) {
  const uint32_t n = std::min(a.length, b.length);
  for (uint32_t i = 0; i < n; ++i) {
    if (((a.address[i / 8] ^ b.address[i / 8]) >> (7 - i % 8)) & 1) {
      return false;
    }
  }
  return true;
}

InstanceGenerator::InstanceGenerator(uint64_t seed, uint32_t bits)
    : seed_(seed), bits_(bits), rng_(seed) {}

size_t InstanceGenerator::Uniform(size_t lo, size_t hi) {
  return std::uniform_int_distribution<size_t>(lo, hi)(rng_);
}

bool InstanceGenerator::Chance(double p) {
  return std::bernoulli_distribution(p)(rng_);
}

Prefix InstanceGenerator::RandomPrefix(uint32_t min_length,
                                       uint32_t max_length) {
  Prefix p;
  p.length = static_cast<uint32_t>(Uniform(min_length, max_length));
  p.address.resize((bits_ + 7) / 8);
  for (uint8_t& b : p.address) b = static_cast<uint8_t>(Uniform(0, 255));
  for (uint32_t i = p.length; i < p.address.size() * 8; ++i) {
    p.address[i / 8] &= static_cast<uint8_t>(~(0x80 >> (i % 8)));
  }
  return p;
}

std::string InstanceGenerator::RandomCube() {
  std::string cube(bits_, '*');
  for (char& c : cube) {
    size_t r = Uniform(0, 3);
    if (r == 0) c = '0';
    if (r == 1) c = '1';
  }
  return cube;
}

ActionId InstanceGenerator::TableAction(size_t k) {
  return InternText(absl::StrCat("fwd:p", k));
}

ExplicitTable InstanceGenerator::RandomTable(size_t width, size_t alphabet,
                                             size_t paints,
                                             double zero_probability) {
  auto random_vector = [&] {
    PlainVector v(width, kNoUpdate);
    for (ActionId& a : v) {
      if (!Chance(zero_probability)) a = TableAction(Uniform(0, alphabet - 1));
    }
    return v;
  };
  ExplicitTable table(size_t{1} << bits_, random_vector());
  for (size_t k = 0; k < paints; ++k) {
    const std::string cube = RandomCube();
    const PlainVector v = random_vector();
    for (size_t x = 0; x < table.size(); ++x) {
      bool inside = true;
      for (uint32_t i = 0; i < bits_ && inside; ++i) {
        const bool bit = (x >> (bits_ - 1 - i)) & 1;
        if (cube[i] != '*' && (cube[i] == '1') != bit) inside = false;
      }
      if (inside) table[x] = v;
    }
  }
  return table;
}

ExplicitTable InstanceGenerator::RandomDeltaTable(size_t width,
                                                  size_t alphabet) {
  ExplicitTable table = RandomTable(width, alphabet, Uniform(1, 4), 0.5);
  const std::string cube = RandomCube();
  for (size_t x = 0; x < table.size(); ++x) {
    for (uint32_t i = 0; i < bits_; ++i) {
      const bool bit = (x >> (bits_ - 1 - i)) & 1;
      if (cube[i] != '*' && (cube[i] == '1') != bit) {
        table[x] = PlainVector(width, kNoUpdate);
        break;
      }
    }
  }
  return table;
}

ActionId InstanceGenerator::RandomRuleAction(DeviceIndex device,
                                             size_t devices) {
  const size_t r = Uniform(0, 9);
  if (r == 0 || devices < 2) return InternText("drop");
  if (r <= 2) {
    return InternText(absl::StrCat("deliver:", RandomEndpointName(device)));
  }
  auto other = [&] {
    size_t j = Uniform(0, devices - 2);
    if (j >= device) ++j;
    return RandomDeviceName(j);
  };
  std::vector<std::string> ports{other()};
  if (devices > 2 && Chance(0.25)) ports.push_back(other());
  return Intern(ActionValue::Forward(std::move(ports)));
}

Rule InstanceGenerator::MakeRule(PredicateStore& store, DeviceIndex device,
                                 Prefix prefix, ActionId action,
                                 uint32_t priority) {
  Rule r;
  r.id = NextId();
  r.device = device;
  r.match = store.FromPrefix(prefix);
  r.prefix = std::move(prefix);
  r.action = action;
  r.priority = priority;
  return r;
}

Network InstanceGenerator::RandomNetwork(PredicateStore& store,
                                         const NetworkShape& shape) {
  Network network(store, shape.devices);
  for (DeviceIndex d = 0; d < shape.devices; ++d) {
    RuleTable& table = network.mutable_table(d);
    table.Insert(MakeRule(store, d, RandomPrefix(0, 0),
                          RandomRuleAction(d, shape.devices), 0));
    const size_t total = Uniform(shape.min_rules, shape.max_rules);
    const size_t extra = total > 0 ? total - 1 : 0;
    for (size_t k = 0; k < extra; ++k) {
      Prefix p = RandomPrefix(1, bits_);
      const uint32_t priority =
          static_cast<uint32_t>(Uniform(1, shape.max_priority));
      bool clash = false;
      for (const Rule* r : table.RulesByPriority()) {
        if (r->priority == priority && PrefixesOverlap(r->prefix, p)) {
          clash = true;
        }
      }
      if (clash) continue;
      table.Insert(MakeRule(store, d, std::move(p),
                            RandomRuleAction(d, shape.devices), priority));
    }
  }
  return network;
}

BatchUpdate InstanceGenerator::RandomBatch(const Network& network,
                                           size_t max_changes) {
  // Skip ids already in use.
  for (DeviceIndex d = 0; d < network.size(); ++d) {
    for (const Rule* r : network.table(d).RulesByPriority()) {
      next_id_ = std::max(next_id_, r->id.value + 1);
    }
  }
  PredicateStore& store = network.predicates();
  BatchUpdate batch;
  const size_t changes = Uniform(1, max_changes);
  // Final (prefix, priority) pairs per device, to keep levels disjoint.
  std::vector<std::vector<std::pair<Prefix, uint32_t>>> final_rules(
      network.size());
  absl::flat_hash_set<RuleId> deleted;
  for (DeviceIndex d = 0; d < network.size(); ++d) {
    for (const Rule* r : network.table(d).RulesByPriority()) {
      final_rules[d].push_back({r->prefix, r->priority});
    }
  }
  auto erase_final = [&](DeviceIndex d, const Rule& r) {
    auto& v = final_rules[d];
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it->second == r.priority && it->first == r.prefix) {
        v.erase(it);
        return;
      }
    }
  };
  auto fits = [&](DeviceIndex d, const Prefix& p, uint32_t priority) {
    for (const auto& [q, qp] : final_rules[d]) {
      if (qp == priority && PrefixesOverlap(p, q)) return false;
    }
    return true;
  };

  for (size_t c = 0; c < changes; ++c) {
    const DeviceIndex d = static_cast<DeviceIndex>(Uniform(0, network.size() - 1));
    std::vector<const Rule*> rules = network.table(d).RulesByPriority();
    std::erase_if(rules, [&](const Rule* r) { return deleted.contains(r->id); });
    const size_t kind = Uniform(0, 9);
    if (kind <= 3 && !rules.empty()) {
      // Delete; a deleted default is replaced in the same batch.
      const Rule& victim = *rules[Uniform(0, rules.size() - 1)];
      batch.deletes.push_back({d, victim.id});
      deleted.insert(victim.id);
      erase_final(d, victim);
      if (victim.priority == 0 && victim.prefix.length == 0) {
        Prefix all = RandomPrefix(0, 0);
        batch.inserts.push_back(
            MakeRule(store, d, all, RandomRuleAction(d, network.size()), 0));
        final_rules[d].push_back({all, 0});
      } else if (Chance(0.3)) {
        // Identical triplet under a fresh id.
        batch.inserts.push_back(
            MakeRule(store, d, victim.prefix, victim.action, victim.priority));
        final_rules[d].push_back({victim.prefix, victim.priority});
      }
    } else {
      Prefix p = RandomPrefix(1, bits_);
      uint32_t priority = static_cast<uint32_t>(Uniform(1, 10));
      if (!fits(d, p, priority)) continue;
      batch.inserts.push_back(
          MakeRule(store, d, p, RandomRuleAction(d, network.size()), priority));
      final_rules[d].push_back({p, priority});
    }
  }
  return batch;
}

}  // namespace invmodel
