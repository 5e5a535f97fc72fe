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

// Seeded generators for small random instances: explicit header tables,
// models built from them, rule networks, and update batches. Used by the
// tests, the acceptance suite and `oracle-check`.

#ifndef INVMODEL_RANDOM_H_
#define INVMODEL_RANDOM_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "invmodel/action.h"
#include "invmodel/merkle.h"
#include "invmodel/model.h"
#include "invmodel/predicate.h"
#include "invmodel/rules.h"

namespace invmodel {

// One output vector per header value, indexed by the header read as an
// unsigned integer (header bit 0 most significant).
using ExplicitTable = std::vector<PlainVector>;

// Groups `table` by vector into a model. `table` must have 2^L rows of
// width `vectors.width()`.
InverseModel ModelFromTable(PredicateStore& predicates, VectorStore& vectors,
                            const ExplicitTable& table);

// Names used by generated networks: devices "d<i>", endpoints "e<i>" with
// e<i> attached to d<i>.
std::string RandomDeviceName(size_t i);
std::string RandomEndpointName(size_t i);

struct NetworkShape {
  size_t devices = 3;
  size_t min_rules = 3;
  size_t max_rules = 6;
  // Priorities are drawn from [1, max_priority]; rules may shadow each
  // other completely.
  uint32_t max_priority = 10;
};

class InstanceGenerator {
 public:
  explicit InstanceGenerator(uint64_t seed, uint32_t bits = 8);

  uint64_t seed() const { return seed_; }
  uint32_t bits() const { return bits_; }
  std::mt19937_64& rng() { return rng_; }

  size_t Uniform(size_t lo, size_t hi);  // inclusive
  bool Chance(double p);

  Prefix RandomPrefix(uint32_t min_length, uint32_t max_length);
  // A random ternary cube of length L.
  std::string RandomCube();

  // Action alphabet for `width`-component tables: "fwd:p<k>" for k < size.
  ActionId TableAction(size_t k);

  // Starts from a random vector and repaints random cubes. Components are
  // NOUPDATE with probability `zero_probability`.
  ExplicitTable RandomTable(size_t width, size_t alphabet, size_t paints,
                            double zero_probability);
  // A table that is 0 outside a random region, like a delta model.
  ExplicitTable RandomDeltaTable(size_t width, size_t alphabet);

  // Each device gets a priority-0 default rule plus random prefix rules.
  // Actions are drop, deliver:e<i>, and fwd to one or two other devices.
  Network RandomNetwork(PredicateStore& store, const NetworkShape& shape);
  ActionId RandomRuleAction(DeviceIndex device, size_t devices);

  // A well-behaved batch of up to `max_changes` inserts and deletes against
  // `network`. Includes default-route replacement and delete/re-insert of
  // identical rules now and then.
  BatchUpdate RandomBatch(const Network& network, size_t max_changes);

  RuleId NextId() { return RuleId{next_id_++}; }

 private:
  Rule MakeRule(PredicateStore& store, DeviceIndex device, Prefix prefix,
                ActionId action, uint32_t priority);

  uint64_t seed_;
  uint32_t bits_;
  std::mt19937_64 rng_;
  uint64_t next_id_ = 1;
};

// Prefixes overlap iff one contains the other.
bool PrefixesOverlap(const Prefix& a, const Prefix& b);

}  // namespace invmodel

#endif  // INVMODEL_RANDOM_H_
