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

// Synthetic datasets: the three-router example, k-ary fat-trees with
// shortest-path ECMP routing, and link-failure traces.
//
// Rules are recomputed from scratch from the set of live links; a failure
// trace is the per-device difference between the two rule sets.

#ifndef INVMODEL_TOPOGEN_H_
#define INVMODEL_TOPOGEN_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "invmodel/io.h"
#include "invmodel/verify.h"
#include "json.hpp"

namespace invmodel {

struct GeneratedDataset {
  enum class Kind { kExample, kFatTree };
  Kind kind = Kind::kExample;
  uint32_t bits = 32;
  // Example: number of prefixes per subnet. Fat-tree: k.
  size_t param = 0;

  Topology topology;
  // Contents of the rule file; rule i has id i+1.
  std::vector<RuleLine> rules;
  std::vector<TraceBatch> trace;

  // Rules in force after the trace, by id, and the next id to assign.
  std::map<uint64_t, RuleLine> live;
  uint64_t next_id = 1;
  // Failed links, as sorted name pairs.
  std::set<std::pair<std::string, std::string>> failed;
  // Devices left without a route to some destination by a failure.
  std::set<std::string> disconnected;

  nlohmann::json Metadata() const;
};

// The A/B/C network: SubnetX behind B with prefixes 10.0.i.0/24, SubnetY
// behind C with 10.1.i.0/24 (i < prefix_count), the Internet behind A as the
// default route. At L=16 the leading "10." is dropped; at L=8 a header is
// [1 bit subnet][4 bits index][3 bits host] and the prefixes are /5.
GeneratedDataset GenExample(uint32_t bits = 32, size_t prefix_count = 11);

// k-ary fat-tree: (k/2)^2 core, k^2/2 aggregation and k^2/2 edge switches.
// Pod p owns 10.p.0.0/16 and rack (p, e) owns 10.p.e.0/24, both scaled
// proportionally for L in {8, 16}. Each switch gets a default drop rule, one
// pod rule per pod carrying the most common next-hop set of its racks, and
// /24 exceptions for the other racks.
GeneratedDataset GenFatTree(size_t k, uint32_t bits = 32);

// Fails link (a, b), recomputes the rules, and appends the differences as
// one batch per changed device in device order. Returns the new batches.
// Destinations that become unreachable are routed to drop and the devices
// recorded in `disconnected`. Throws std::invalid_argument for unknown or
// already failed links.
std::vector<TraceBatch> GenFailureTrace(GeneratedDataset& dataset,
                                        const std::string& a,
                                        const std::string& b);

// Starts every device with only its priority-0 rules and installs the rest
// as one batch per device, in device order.
GeneratedDataset MakeDeviceLoad(const GeneratedDataset& full);

// Closed-form counts.
size_t FatTreeSwitchCount(size_t k);
size_t FatTreeDirectedLinkCount(size_t k);

// The full rule set of `dataset` for its live links.
std::vector<RuleLine> ComputeRules(const GeneratedDataset& dataset);

// Writes topology.json, rules.txt, trace.txt and meta.json into `dir`.
void WriteDataset(const GeneratedDataset& dataset, const std::string& dir);

}  // namespace invmodel

#endif  // INVMODEL_TOPOGEN_H_
