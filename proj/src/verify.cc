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

#include "invmodel/verify.h"

#include <algorithm>
#include <deque>
#include <iomanip>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace invmodel {

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(std::vector<std::string> devices,
                   std::vector<Endpoint> endpoints, std::vector<Link> links)
    : devices_(std::move(devices)),
      endpoints_(std::move(endpoints)),
      links_(std::move(links)) {
  auto add_name = [&](const std::string& name) {
    if (name.empty()) throw TopologyError("empty node name");
    if (!index_.emplace(name, names_.size()).second) {
      throw TopologyError(absl::StrCat("duplicate node name '", name, "'"));
    }
    names_.push_back(name);
  };
  for (const std::string& d : devices_) add_name(d);
  for (const Endpoint& e : endpoints_) add_name(e.name);
  ports_.resize(names_.size());

  auto connect = [&](const std::string& a, const std::string& b) {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) {
      throw TopologyError(absl::StrCat("link (", a, ", ", b,
                                       ") names an unknown node"));
    }
    if (ia->second == ib->second) {
      throw TopologyError(absl::StrCat("link (", a, ", ", b, ") is a self-link"));
    }
    if (!ports_[ia->second].emplace(b, ib->second).second ||
        !ports_[ib->second].emplace(a, ia->second).second) {
      throw TopologyError(absl::StrCat("repeated link (", a, ", ", b, ")"));
    }
  };
  for (const Endpoint& e : endpoints_) {
    auto it = index_.find(e.device);
    if (it == index_.end() || !IsDevice(it->second)) {
      throw TopologyError(absl::StrCat("endpoint '", e.name,
                                       "' attaches to unknown device '",
                                       e.device, "'"));
    }
    connect(e.device, e.name);
  }
  for (const Link& l : links_) connect(l.a, l.b);
}

Topology Topology::FromJson(const nlohmann::json& j) {
  try {
    std::vector<std::string> devices =
        j.at("devices").get<std::vector<std::string>>();
    std::vector<Endpoint> endpoints;
    for (const auto& e : j.value("endpoints", nlohmann::json::array())) {
      endpoints.push_back(
          {e.at("name").get<std::string>(), e.at("device").get<std::string>()});
    }
    std::vector<Link> links;
    for (const auto& l : j.value("links", nlohmann::json::array())) {
      links.push_back({l.at("a").get<std::string>(), l.at("b").get<std::string>()});
    }
    return Topology(std::move(devices), std::move(endpoints), std::move(links));
  } catch (const nlohmann::json::exception& e) {
    throw TopologyError(absl::StrCat("bad topology: ", e.what()));
  }
}

nlohmann::json Topology::ToJson() const {
  nlohmann::json endpoints = nlohmann::json::array();
  for (const Endpoint& e : endpoints_) {
    endpoints.push_back({{"name", e.name}, {"device", e.device}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const Link& l : links_) links.push_back({{"a", l.a}, {"b", l.b}});
  return {{"devices", devices_}, {"endpoints", endpoints}, {"links", links}};
}

std::optional<size_t> Topology::FindNode(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<DeviceIndex> Topology::FindDevice(std::string_view name) const {
  std::optional<size_t> n = FindNode(name);
  if (!n.has_value() || !IsDevice(*n)) return std::nullopt;
  return static_cast<DeviceIndex>(*n);
}

std::optional<size_t> Topology::PortTarget(DeviceIndex device,
                                           std::string_view port) const {
  const auto& ports = ports_.at(device);
  auto it = ports.find(port);
  if (it == ports.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Topology::Neighbors(size_t node) const {
  std::vector<std::string> out;
  for (const auto& [name, target] : ports_.at(node)) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------
// Graphs

Hop InterpretAction(const Topology& topo, DeviceIndex device, ActionId action) {
  Hop hop;
  const ActionValue& value = Lookup(action);
  switch (value.kind) {
    case ActionValue::Kind::kNoUpdate:
      break;
    case ActionValue::Kind::kDrop:
      hop.drop = true;
      break;
    case ActionValue::Kind::kDeliver: {
      std::optional<size_t> n = topo.FindNode(value.target);
      if (!n.has_value() || topo.IsDevice(*n)) {
        throw TopologyError(absl::StrCat("device '", topo.node_name(device),
                                         "' delivers to unknown endpoint '",
                                         value.target, "'"));
      }
      hop.next.push_back(*n);
      break;
    }
    case ActionValue::Kind::kForward:
      for (const std::string& port : value.ports) {
        std::optional<size_t> n = topo.PortTarget(device, port);
        if (!n.has_value()) {
          throw TopologyError(absl::StrCat("device '", topo.node_name(device),
                                           "' has no port '", port, "'"));
        }
        hop.next.push_back(*n);
      }
      break;
  }
  std::sort(hop.next.begin(), hop.next.end());
  hop.next.erase(std::unique(hop.next.begin(), hop.next.end()), hop.next.end());
  return hop;
}

ForwardingGraph BuildGraph(Predicate class_predicate, OutputVector vector,
                           const Topology& topo) {
  if (vector.width() != topo.device_count()) {
    throw TopologyError(absl::StrCat("vector has ", vector.width(),
                                     " components, topology has ",
                                     topo.device_count(), " devices"));
  }
  ForwardingGraph g{class_predicate, vector, {}, {}};
  g.out.resize(topo.node_count());
  g.drops.assign(topo.device_count(), false);
  for (DeviceIndex d = 0; d < topo.device_count(); ++d) {
    Hop hop = InterpretAction(topo, d, vector[d]);
    g.out[d] = std::move(hop.next);
    g.drops[d] = hop.drop;
  }
  return g;
}

std::string VerdictName(Verdict v) { return v == Verdict::kPass ? "PASS" : "FAIL"; }

std::string WitnessKindName(Witness::Kind k) {
  switch (k) {
    case Witness::Kind::kNone: return "none";
    case Witness::Kind::kCycle: return "cycle";
    case Witness::Kind::kStuck: return "stuck";
    case Witness::Kind::kBypass: return "bypass";
    case Witness::Kind::kUnreached: return "unreached";
  }
  return "?";
}

namespace {

std::vector<std::string> Names(const Topology& topo,
                               const std::vector<size_t>& nodes) {
  std::vector<std::string> out;
  for (size_t n : nodes) out.push_back(topo.node_name(n));
  return out;
}

CheckResult Fail(Witness::Kind kind, const Topology& topo,
                 const std::vector<size_t>& nodes) {
  return {Verdict::kFail, {kind, Names(topo, nodes)}};
}

std::vector<size_t> Sources(const Topology& topo, const PropertyCheck& check) {
  std::vector<size_t> out;
  if (check.src.empty()) {
    for (size_t d = 0; d < topo.device_count(); ++d) out.push_back(d);
  } else {
    for (const std::string& s : check.src) {
      std::optional<size_t> n = topo.FindNode(s);
      if (!n.has_value()) throw TopologyError(absl::StrCat("unknown node '", s, "'"));
      out.push_back(*n);
    }
  }
  return out;
}

size_t NodeOf(const Topology& topo, const std::string& name) {
  std::optional<size_t> n = topo.FindNode(name);
  if (!n.has_value()) throw TopologyError(absl::StrCat("unknown node '", name, "'"));
  return *n;
}

// Breadth-first search from `src`, not leaving `stop` and never entering
// `avoid`. Returns parents (src is its own parent); unreached nodes map to
// SIZE_MAX.
std::vector<size_t> Bfs(const ForwardingGraph& g, size_t src,
                        std::optional<size_t> stop, std::optional<size_t> avoid,
                        std::vector<size_t>* order) {
  std::vector<size_t> parent(g.out.size(), SIZE_MAX);
  if (avoid == src) return parent;
  std::deque<size_t> queue{src};
  parent[src] = src;
  while (!queue.empty()) {
    size_t u = queue.front();
    queue.pop_front();
    if (order != nullptr) order->push_back(u);
    if (u == stop) continue;
    for (size_t v : g.out[u]) {
      if (parent[v] != SIZE_MAX || v == avoid) continue;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  return parent;
}

std::vector<size_t> PathTo(const std::vector<size_t>& parent, size_t node) {
  std::vector<size_t> path{node};
  while (parent[path.back()] != path.back()) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

// A cycle reachable from `roots`, as the DFS stack from a root down to the
// repeated node, or empty. Does not leave `stop`.
std::vector<size_t> FindCycle(const ForwardingGraph& g,
                              const std::vector<size_t>& roots,
                              std::optional<size_t> stop) {
  enum Color : uint8_t { kWhite, kGray, kBlack };
  std::vector<Color> color(g.out.size(), kWhite);
  for (size_t root : roots) {
    if (color[root] != kWhite) continue;
    // (node, next edge index)
    std::vector<std::pair<size_t, size_t>> stack{{root, 0}};
    color[root] = kGray;
    while (!stack.empty()) {
      auto& [u, k] = stack.back();
      const std::vector<size_t>& succ =
          u == stop ? std::vector<size_t>{} : g.out[u];
      if (k == succ.size()) {
        color[u] = kBlack;
        stack.pop_back();
        continue;
      }
      size_t v = succ[k++];
      if (color[v] == kGray) {
        std::vector<size_t> cycle;
        for (const auto& frame : stack) cycle.push_back(frame.first);
        cycle.push_back(v);
        return cycle;
      }
      if (color[v] == kWhite) {
        color[v] = kGray;
        stack.push_back({v, 0});
      }
    }
  }
  return {};
}

bool DropAllowed(const Topology& topo, const PropertyCheck& check,
                 size_t device) {
  for (const std::string& d : check.allow_drop) {
    if (d == "*" || d == topo.node_name(device)) return true;
  }
  return false;
}

}  // namespace

CheckResult CheckLoopFree(const ForwardingGraph& g, const Topology& topo) {
  std::vector<size_t> roots;
  for (size_t d = 0; d < topo.device_count(); ++d) roots.push_back(d);
  std::vector<size_t> cycle = FindCycle(g, roots, std::nullopt);
  if (cycle.empty()) return {};
  return Fail(Witness::Kind::kCycle, topo, cycle);
}

CheckResult CheckBlackholeFree(const ForwardingGraph& g, const Topology& topo,
                               const PropertyCheck& check) {
  for (size_t src : Sources(topo, check)) {
    std::vector<size_t> order;
    std::vector<size_t> parent = Bfs(g, src, std::nullopt, std::nullopt, &order);
    for (size_t u : order) {
      if (!topo.IsDevice(u) || !g.out[u].empty()) continue;
      if (g.drops[u] && DropAllowed(topo, check, u)) continue;
      return Fail(Witness::Kind::kStuck, topo, PathTo(parent, u));
    }
  }
  return {};
}

CheckResult CheckReachability(const ForwardingGraph& g, const Topology& topo,
                              const PropertyCheck& check) {
  const size_t dst = NodeOf(topo, check.dst);
  for (size_t src : Sources(topo, check)) {
    std::vector<size_t> order;
    std::vector<size_t> parent = Bfs(g, src, dst, std::nullopt, &order);
    if (check.mode == ReachMode::kExistential) {
      if (parent[dst] == SIZE_MAX) {
        return Fail(Witness::Kind::kUnreached, topo, {src});
      }
      continue;
    }
    for (size_t u : order) {
      if (u != dst && g.out[u].empty()) {
        return Fail(Witness::Kind::kStuck, topo, PathTo(parent, u));
      }
    }
    std::vector<size_t> cycle = FindCycle(g, {src}, dst);
    if (!cycle.empty()) return Fail(Witness::Kind::kCycle, topo, cycle);
  }
  return {};
}

CheckResult CheckWaypoint(const ForwardingGraph& g, const Topology& topo,
                          const PropertyCheck& check) {
  const size_t dst = NodeOf(topo, check.dst);
  const size_t via = NodeOf(topo, check.via);
  for (size_t src : Sources(topo, check)) {
    if (src == via) continue;
    std::vector<size_t> parent = Bfs(g, src, dst, via, nullptr);
    if (parent[dst] != SIZE_MAX) {
      return Fail(Witness::Kind::kBypass, topo, PathTo(parent, dst));
    }
  }
  return {};
}

CheckResult RunCheck(const ForwardingGraph& g, const Topology& topo,
                     const PropertyCheck& check) {
  switch (check.type) {
    case PropertyCheck::Type::kLoopFree: return CheckLoopFree(g, topo);
    case PropertyCheck::Type::kBlackholeFree:
      return CheckBlackholeFree(g, topo, check);
    case PropertyCheck::Type::kReachability:
      return CheckReachability(g, topo, check);
    case PropertyCheck::Type::kWaypoint: return CheckWaypoint(g, topo, check);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Property specs

std::string PropertyCheck::Name() const {
  const std::string sources = src.empty() ? "*" : absl::StrJoin(src, ",");
  switch (type) {
    case Type::kLoopFree: return "loop_free";
    case Type::kBlackholeFree: return absl::StrCat("blackhole_free(", sources, ")");
    case Type::kReachability:
      return absl::StrCat(
          mode == ReachMode::kExistential ? "reachability_exists(" : "reachability(",
          sources, "->", dst, ")");
    case Type::kWaypoint:
      return absl::StrCat("waypoint(", sources, "->", dst, " via ", via, ")");
  }
  return "?";
}

PropertySpec PropertySpec::FromJson(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() ? j.at("checks") : j;
  if (!list.is_array()) throw std::invalid_argument("property spec must be a list");
  PropertySpec spec;
  auto strings = [](const nlohmann::json& v) {
    if (v.is_string()) return std::vector<std::string>{v.get<std::string>()};
    return v.get<std::vector<std::string>>();
  };
  for (const nlohmann::json& r : list) {
    PropertyCheck c;
    const std::string type = r.at("type").get<std::string>();
    if (type == "loop_free") {
      c.type = PropertyCheck::Type::kLoopFree;
    } else if (type == "blackhole_free") {
      c.type = PropertyCheck::Type::kBlackholeFree;
    } else if (type == "reachability") {
      c.type = PropertyCheck::Type::kReachability;
    } else if (type == "waypoint") {
      c.type = PropertyCheck::Type::kWaypoint;
    } else {
      throw std::invalid_argument(absl::StrCat("unknown check type '", type, "'"));
    }
    if (r.contains("src")) c.src = strings(r["src"]);
    c.dst = r.value("dst", "");
    c.via = r.value("via", "");
    if (r.contains("allow_drop")) c.allow_drop = strings(r["allow_drop"]);
    if (r.contains("match")) {
      for (const std::string& p : strings(r["match"])) c.match.push_back(Prefix::Parse(p));
    }
    const std::string mode = r.value("mode", "universal");
    if (mode == "existential") {
      c.mode = ReachMode::kExistential;
    } else if (mode != "universal") {
      throw std::invalid_argument(absl::StrCat("unknown mode '", mode, "'"));
    }
    const bool needs_dst = c.type == PropertyCheck::Type::kReachability ||
                           c.type == PropertyCheck::Type::kWaypoint;
    if (needs_dst && c.dst.empty()) {
      throw std::invalid_argument(absl::StrCat(type, " needs dst"));
    }
    if (c.type == PropertyCheck::Type::kWaypoint && c.via.empty()) {
      throw std::invalid_argument("waypoint needs via");
    }
    spec.checks.push_back(std::move(c));
  }
  return spec;
}

void PropertySpec::Validate(const Topology& topo) const {
  for (const PropertyCheck& c : checks) {
    for (const std::string& s : c.src) {
      if (!topo.FindDevice(s).has_value()) {
        throw TopologyError(absl::StrCat(c.Name(), ": source '", s,
                                         "' is not a device"));
      }
    }
    for (const std::string* name : {&c.dst, &c.via}) {
      if (!name->empty() && !topo.FindNode(*name).has_value()) {
        throw TopologyError(absl::StrCat(c.Name(), ": unknown node '", *name, "'"));
      }
    }
    for (const std::string& d : c.allow_drop) {
      if (d != "*" && !topo.FindDevice(d).has_value()) {
        throw TopologyError(absl::StrCat(c.Name(), ": unknown device '", d, "'"));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

nlohmann::json RecordToJson(const CheckRecord& r) {
  return {{"class_id", r.class_id},
          {"check", r.check},
          {"check_index", r.check_index},
          {"verdict", VerdictName(r.verdict)},
          {"witness",
           {{"kind", WitnessKindName(r.witness.kind)}, {"nodes", r.witness.nodes}}}};
}

size_t VerificationReport::failures() const {
  size_t n = 0;
  for (const auto& [key, r] : records_) n += r.verdict == Verdict::kFail;
  return n;
}

void VerificationReport::Add(CheckRecord r) {
  auto key = std::make_pair(r.class_id, r.check_index);
  records_.insert_or_assign(std::move(key), std::move(r));
}

void VerificationReport::WriteJsonLines(std::ostream& out) const {
  for (const auto& [key, r] : records_) out << RecordToJson(r).dump() << "\n";
}

void VerificationReport::WriteSummary(std::ostream& out,
                                      const PropertySpec& spec) const {
  std::vector<size_t> pass(spec.checks.size()), fail(spec.checks.size());
  for (const auto& [key, r] : records_) {
    if (r.check_index >= spec.checks.size()) continue;
    (r.verdict == Verdict::kPass ? pass : fail)[r.check_index]++;
  }
  size_t width = 5;
  for (const PropertyCheck& c : spec.checks) width = std::max(width, c.Name().size());
  out << std::left << std::setw(static_cast<int>(width)) << "check"
      << "  classes    pass    fail\n";
  for (size_t i = 0; i < spec.checks.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << spec.checks[i].Name()
        << std::right << std::setw(9) << pass[i] + fail[i] << std::setw(8)
        << pass[i] << std::setw(8) << fail[i] << "\n";
  }
}

namespace {

std::vector<Predicate> MatchPredicates(PredicateStore& store,
                                       const PropertySpec& spec) {
  std::vector<Predicate> out;
  for (const PropertyCheck& c : spec.checks) {
    if (c.match.empty()) {
      out.push_back(store.True());
      continue;
    }
    Predicate p = store.False();
    for (const Prefix& prefix : c.match) p |= store.FromPrefix(prefix);
    out.push_back(p);
  }
  return out;
}

void CheckClass(const ModelEntry& entry, const PropertySpec& spec,
                const std::vector<Predicate>& scopes, const Topology& topo,
                VerificationReport& report) {
  ForwardingGraph g = BuildGraph(entry.predicate, entry.vector, topo);
  const std::string id = entry.vector.digest().Hex();
  for (size_t i = 0; i < spec.checks.size(); ++i) {
    if (!scopes[i].Intersects(entry.predicate)) continue;
    CheckResult r = RunCheck(g, topo, spec.checks[i]);
    report.Add({id, i, spec.checks[i].Name(), r.verdict, std::move(r.witness)});
  }
}

}  // namespace

VerificationReport VerifyModel(const InverseModel& model,
                               const PropertySpec& spec, const Topology& topo) {
  std::vector<Predicate> scopes = MatchPredicates(model.predicates(), spec);
  VerificationReport report;
  for (const ModelEntry& e : model.entries()) {
    CheckClass(e, spec, scopes, topo, report);
  }
  return report;
}

RecheckResult IncrementalRecheck(const VerificationReport& previous,
                                 const InverseModel& model,
                                 const ChangeSummary& summary,
                                 const PropertySpec& spec,
                                 const Topology& topo) {
  RecheckResult out;
  if (summary.changes.empty()) {
    out.merged = previous;
    return out;
  }
  PredicateStore& store = model.predicates();
  const Predicate touched = summary.Touched(store);
  // Classes that lost or gained headers, by vector.
  absl::flat_hash_set<uint32_t> changed;
  for (const VectorChange& c : summary.changes) {
    changed.insert(c.before.root());
    changed.insert(c.after.root());
  }
  absl::flat_hash_set<std::string> known;
  for (const auto& [key, r] : previous.records()) known.insert(key.first);

  std::vector<Predicate> scopes = MatchPredicates(store, spec);
  absl::flat_hash_set<std::string> live;
  std::vector<const ModelEntry*> recheck;
  for (const ModelEntry& e : model.entries()) {
    std::string id = e.vector.digest().Hex();
    if (!known.contains(id) || changed.contains(e.vector.root()) ||
        e.predicate.Intersects(touched)) {
      recheck.push_back(&e);
    }
    live.insert(std::move(id));
  }
  for (const ModelEntry* e : recheck) {
    CheckClass(*e, spec, scopes, topo, out.delta);
  }
  out.classes_rechecked = recheck.size();

  absl::flat_hash_set<std::string> redone;
  for (const ModelEntry* e : recheck) redone.insert(e->vector.digest().Hex());
  for (const auto& [key, r] : previous.records()) {
    if (live.contains(key.first) && !redone.contains(key.first)) out.merged.Add(r);
  }
  for (const auto& [key, r] : out.delta.records()) out.merged.Add(r);
  return out;
}

// ---------------------------------------------------------------------------
// Replay

std::string ReplayWitness(const Network& network, const Topology& topo,
                          const Header& header, const PropertyCheck& check,
                          const Witness& witness) {
  if (witness.nodes.empty()) return "empty witness";
  std::vector<size_t> nodes;
  for (const std::string& name : witness.nodes) {
    std::optional<size_t> n = topo.FindNode(name);
    if (!n.has_value()) return absl::StrCat("unknown node '", name, "'");
    nodes.push_back(*n);
  }
  auto hop = [&](size_t node) {
    const DeviceIndex d = static_cast<DeviceIndex>(node);
    std::optional<ActionId> action = network.table(d).Lookup(header);
    return InterpretAction(topo, d, action.value_or(kNoUpdate));
  };
  if (witness.kind != Witness::Kind::kCycle && !check.src.empty() &&
      std::find(check.src.begin(), check.src.end(), witness.nodes.front()) ==
          check.src.end()) {
    return "witness does not start at a source";
  }
  if (witness.kind == Witness::Kind::kUnreached) {
    const size_t dst = NodeOf(topo, check.dst);
    std::vector<bool> seen(topo.node_count(), false);
    std::deque<size_t> queue{nodes.front()};
    seen[nodes.front()] = true;
    while (!queue.empty()) {
      size_t u = queue.front();
      queue.pop_front();
      if (u == dst) return "destination is reachable";
      if (!topo.IsDevice(u)) continue;
      for (size_t v : hop(u).next) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    return "";
  }
  // Every step must follow the header's forwarding; at most N+1 hops.
  if (nodes.size() > topo.device_count() + 1) return "witness too long";
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!topo.IsDevice(nodes[i])) return "path continues past an endpoint";
    std::vector<size_t> next = hop(nodes[i]).next;
    if (std::find(next.begin(), next.end(), nodes[i + 1]) == next.end()) {
      return absl::StrCat(witness.nodes[i], " does not forward to ",
                          witness.nodes[i + 1]);
    }
  }
  const size_t last = nodes.back();
  switch (witness.kind) {
    case Witness::Kind::kCycle:
      if (std::find(nodes.begin(), nodes.end() - 1, last) == nodes.end() - 1) {
        return "path does not revisit a device";
      }
      return "";
    case Witness::Kind::kStuck: {
      if (!topo.IsDevice(last)) {
        if (check.type == PropertyCheck::Type::kReachability &&
            topo.node_name(last) != check.dst) {
          return "";
        }
        return "path ends at the destination";
      }
      Hop h = hop(last);
      if (!h.next.empty()) return "last device forwards";
      if (check.type == PropertyCheck::Type::kBlackholeFree && h.drop &&
          DropAllowed(topo, check, last)) {
        return "last device drops legally";
      }
      return "";
    }
    case Witness::Kind::kBypass:
      if (topo.node_name(last) != check.dst) return "path misses the destination";
      if (std::find(witness.nodes.begin(), witness.nodes.end(), check.via) !=
          witness.nodes.end()) {
        return "path visits the waypoint";
      }
      return "";
    default:
      return "witness has no kind";
  }
}

}  // namespace invmodel
