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

// Graph manager: per-class forwarding graphs and property checks.
//
// Nodes are the devices (indices 0..N-1, in vector order) followed by the
// endpoints. A device's port towards a neighbor is labelled with the
// neighbor's name, so `fwd:B` on A follows link (A, B).

#ifndef INVMODEL_VERIFY_H_
#define INVMODEL_VERIFY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "invmodel/engine.h"
#include "invmodel/model.h"
#include "invmodel/rules.h"
#include "json.hpp"

namespace invmodel {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string name;
  std::string device;
};

struct Link {
  std::string a;
  std::string b;
};

class Topology {
 public:
  Topology() = default;
  // Throws TopologyError on duplicate names, unknown link ends, or repeated
  // links.
  Topology(std::vector<std::string> devices, std::vector<Endpoint> endpoints,
           std::vector<Link> links);

  // {"devices": [...], "endpoints": [{"name", "device"}], "links": [{"a","b"}]}
  static Topology FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

  size_t device_count() const { return devices_.size(); }
  size_t node_count() const { return names_.size(); }
  const std::vector<std::string>& devices() const { return devices_; }
  const std::vector<Endpoint>& endpoints() const { return endpoints_; }
  const std::vector<Link>& links() const { return links_; }
  const std::string& node_name(size_t node) const { return names_.at(node); }
  bool IsDevice(size_t node) const { return node < devices_.size(); }

  std::optional<size_t> FindNode(std::string_view name) const;
  std::optional<DeviceIndex> FindDevice(std::string_view name) const;
  // Neighbor reached from `device` through port `port`.
  std::optional<size_t> PortTarget(DeviceIndex device,
                                   std::string_view port) const;
  // Neighbor names of a node, sorted.
  std::vector<std::string> Neighbors(size_t node) const;

 private:
  std::vector<std::string> devices_;
  std::vector<Endpoint> endpoints_;
  std::vector<Link> links_;
  std::vector<std::string> names_;
  std::map<std::string, size_t, std::less<>> index_;
  std::vector<std::map<std::string, size_t, std::less<>>> ports_;
};

// Successors of device `node` under `action`, plus whether it drops.
// Throws TopologyError for ports or endpoints the topology lacks.
struct Hop {
  std::vector<size_t> next;
  bool drop = false;
};
Hop InterpretAction(const Topology& topo, DeviceIndex device, ActionId action);

struct ForwardingGraph {
  Predicate class_predicate;
  OutputVector vector;
  // Out-edges per node; endpoints have none.
  std::vector<std::vector<size_t>> out;
  // Devices whose action is drop.
  std::vector<bool> drops;
};

ForwardingGraph BuildGraph(Predicate class_predicate, OutputVector vector,
                           const Topology& topo);

enum class Verdict { kPass, kFail };
std::string VerdictName(Verdict v);

struct Witness {
  enum class Kind {
    kNone,
    // nodes[0..k] with nodes[k] == nodes[j] for some j < k.
    kCycle,
    // A path from a source to where it stops: nodes.back() is a dropping
    // device, a device without a usable action, or an endpoint that is not
    // the destination.
    kStuck,
    // A path from a source to the destination that avoids the waypoint.
    kBypass,
    // The source, when no path reaches the destination (existential mode).
    kUnreached,
  };
  Kind kind = Kind::kNone;
  std::vector<std::string> nodes;

  friend bool operator==(const Witness&, const Witness&) = default;
};
std::string WitnessKindName(Witness::Kind k);

struct CheckResult {
  Verdict verdict = Verdict::kPass;
  Witness witness;
};

enum class ReachMode { kUniversal, kExistential };

struct PropertyCheck {
  enum class Type { kLoopFree, kBlackholeFree, kReachability, kWaypoint };
  Type type = Type::kLoopFree;
  std::vector<std::string> src;  // empty = every device
  std::string dst;
  std::string via;
  ReachMode mode = ReachMode::kUniversal;
  // Devices where drop is legal; "*" allows it everywhere.
  std::vector<std::string> allow_drop;
  // The check applies to classes intersecting any of these prefixes; empty
  // means every class.
  std::vector<Prefix> match;

  std::string Name() const;
};

struct PropertySpec {
  std::vector<PropertyCheck> checks;

  // A list of records, or {"checks": [...]}. Record fields: type
  // (loop_free | blackhole_free | reachability | waypoint), src (string or
  // list), dst, via, mode (universal | existential), allow_drop, match.
  static PropertySpec FromJson(const nlohmann::json& j);
  // Throws TopologyError for node names the topology lacks.
  void Validate(const Topology& topo) const;
};

CheckResult CheckLoopFree(const ForwardingGraph& g, const Topology& topo);
CheckResult CheckBlackholeFree(const ForwardingGraph& g, const Topology& topo,
                               const PropertyCheck& check);
CheckResult CheckReachability(const ForwardingGraph& g, const Topology& topo,
                              const PropertyCheck& check);
CheckResult CheckWaypoint(const ForwardingGraph& g, const Topology& topo,
                          const PropertyCheck& check);
CheckResult RunCheck(const ForwardingGraph& g, const Topology& topo,
                     const PropertyCheck& check);

struct CheckRecord {
  // Hex digest of the class vector.
  std::string class_id;
  size_t check_index = 0;
  std::string check;
  Verdict verdict = Verdict::kPass;
  Witness witness;

  friend bool operator==(const CheckRecord&, const CheckRecord&) = default;
};

nlohmann::json RecordToJson(const CheckRecord& r);

class VerificationReport {
 public:
  // Keyed by (class_id, check_index).
  using Records = std::map<std::pair<std::string, size_t>, CheckRecord>;

  const Records& records() const { return records_; }
  Records& mutable_records() { return records_; }
  size_t size() const { return records_.size(); }
  size_t failures() const;
  void Add(CheckRecord r);

  void WriteJsonLines(std::ostream& out) const;
  // Per check: classes checked, passed, failed.
  void WriteSummary(std::ostream& out, const PropertySpec& spec) const;

  friend bool operator==(const VerificationReport&,
                         const VerificationReport&) = default;

 private:
  Records records_;
};

// Checks every class of `model` against every applicable check.
VerificationReport VerifyModel(const InverseModel& model,
                               const PropertySpec& spec, const Topology& topo);

struct RecheckResult {
  // Records for the rechecked classes only.
  VerificationReport delta;
  // `previous` with stale classes dropped and `delta` merged in.
  VerificationReport merged;
  size_t classes_rechecked = 0;
};

// Rechecks the classes of `model` that intersect the changed headers of
// `summary` or whose vector `previous` has not seen.
RecheckResult IncrementalRecheck(const VerificationReport& previous,
                                 const InverseModel& model,
                                 const ChangeSummary& summary,
                                 const PropertySpec& spec,
                                 const Topology& topo);

// Replays a FAIL witness for one header by per-hop simulation with the
// rule tables. Returns an empty string if it replays, else the reason.
std::string ReplayWitness(const Network& network, const Topology& topo,
                          const Header& header, const PropertyCheck& check,
                          const Witness& witness);

}  // namespace invmodel

#endif  // INVMODEL_VERIFY_H_
