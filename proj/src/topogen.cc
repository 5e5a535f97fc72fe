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

#include "invmodel/topogen.h"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "absl/strings/str_cat.h"

namespace invmodel {
namespace {

// A prefix whose first `length` bits are the low `length` bits of `value`
// shifted to the top of an L-bit header.
Prefix MakePrefix(uint32_t bits, uint64_t value, uint32_t length) {
  Prefix p;
  p.length = length;
  p.address.assign((bits + 7) / 8, 0);
  const uint64_t header = length == 0 ? 0 : value << (bits - length);
  for (size_t i = 0; i < p.address.size(); ++i) {
    const int shift = static_cast<int>(bits) - 8 * static_cast<int>(i + 1);
    p.address[i] = static_cast<uint8_t>(
        shift >= 0 ? (header >> shift) & 0xff : (header << -shift) & 0xff);
  }
  return p;
}

void CheckBits(uint32_t bits) {
  if (bits != 8 && bits != 16 && bits != 32) {
    throw std::invalid_argument(absl::StrCat("header width must be 8, 16 or 32, got ", bits));
  }
}

struct Destination {
  Prefix prefix;
  std::string endpoint;
};

// Per device, the action towards each destination over live links.
class Router {
 public:
  explicit Router(const GeneratedDataset& d) : topo_(d.topology) {
    const size_t n = topo_.device_count();
    adj_.resize(n);
    for (const Link& l : topo_.links()) {
      auto a = topo_.FindDevice(l.a);
      auto b = topo_.FindDevice(l.b);
      if (!a || !b) continue;
      auto key = std::minmax(l.a, l.b);
      if (d.failed.contains({key.first, key.second})) continue;
      adj_[*a].push_back(*b);
      adj_[*b].push_back(*a);
    }
    for (const Endpoint& e : topo_.endpoints()) {
      attach_[e.name] = *topo_.FindDevice(e.device);
    }
  }

  // Action text for `device` towards `endpoint`; drop if unreachable.
  std::string Action(DeviceIndex device, const std::string& endpoint,
                     std::set<std::string>* disconnected) {
    const DeviceIndex target = attach_.at(endpoint);
    if (device == target) return absl::StrCat("deliver:", endpoint);
    const std::vector<int>& dist = Distances(target);
    if (dist[device] < 0) {
      disconnected->insert(topo_.devices()[device]);
      return "drop";
    }
    std::vector<std::string> ports;
    for (DeviceIndex u : adj_[device]) {
      if (dist[u] == dist[device] - 1) ports.push_back(topo_.devices()[u]);
    }
    return ActionValue::Forward(std::move(ports)).ToString();
  }

 private:
  const std::vector<int>& Distances(DeviceIndex target) {
    auto it = dist_.find(target);
    if (it != dist_.end()) return it->second;
    std::vector<int> dist(adj_.size(), -1);
    std::deque<DeviceIndex> queue{target};
    dist[target] = 0;
    while (!queue.empty()) {
      DeviceIndex u = queue.front();
      queue.pop_front();
      for (DeviceIndex v : adj_[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    return dist_.emplace(target, std::move(dist)).first->second;
  }

  const Topology& topo_;
  std::vector<std::vector<DeviceIndex>> adj_;
  std::map<std::string, DeviceIndex> attach_;
  std::map<DeviceIndex, std::vector<int>> dist_;
};

// Example: one rule per destination prefix on every device.
std::vector<RuleLine> ExampleRules(const GeneratedDataset& d,
                                   std::set<std::string>* disconnected) {
  const uint32_t bits = d.bits;
  std::vector<Destination> dests{{MakePrefix(bits, 0, 0), "Internet"}};
  for (uint64_t side = 0; side < 2; ++side) {
    const std::string endpoint = side == 0 ? "SubnetX" : "SubnetY";
    for (uint64_t i = 0; i < d.param; ++i) {
      Prefix p = bits == 32   ? MakePrefix(bits, (10 << 16) | (side << 8) | i, 24)
                 : bits == 16 ? MakePrefix(bits, (side << 8) | i, 16)
                              : MakePrefix(bits, (side << 4) | i, 5);
      dests.push_back({std::move(p), endpoint});
    }
  }
  Router router(d);
  std::vector<RuleLine> out;
  for (DeviceIndex dev = 0; dev < d.topology.device_count(); ++dev) {
    for (const Destination& dest : dests) {
      out.push_back({d.topology.devices()[dev], dest.prefix, dest.prefix.length,
                     router.Action(dev, dest.endpoint, disconnected), 0});
    }
  }
  return out;
}

std::string RackName(size_t pod, size_t rack) {
  return absl::StrCat("h", pod, "_", rack);
}

// Fat-tree field layout: [top bits of 10][pod][rack][host], each a quarter
// of the header.
std::vector<RuleLine> FatTreeRules(const GeneratedDataset& d,
                                   std::set<std::string>* disconnected) {
  const size_t k = d.param;
  const uint32_t q = d.bits / 4;
  const uint64_t net = uint64_t{10} >> (8 - q);
  Router router(d);
  std::vector<RuleLine> out;
  for (DeviceIndex dev = 0; dev < d.topology.device_count(); ++dev) {
    const std::string& name = d.topology.devices()[dev];
    out.push_back({name, MakePrefix(d.bits, 0, 0), 0, "drop", 0});
    for (size_t pod = 0; pod < k; ++pod) {
      std::vector<std::string> actions;
      for (size_t rack = 0; rack < k / 2; ++rack) {
        actions.push_back(router.Action(dev, RackName(pod, rack), disconnected));
      }
      // Most common action; ties go to the earliest rack.
      std::string common = actions.front();
      size_t best = 0;
      for (const std::string& a : actions) {
        size_t c = std::count(actions.begin(), actions.end(), a);
        if (c > best) {
          best = c;
          common = a;
        }
      }
      out.push_back({name, MakePrefix(d.bits, (net << q) | pod, 2 * q), 2 * q,
                     common, 0});
      for (size_t rack = 0; rack < k / 2; ++rack) {
        if (actions[rack] == common) continue;
        out.push_back({name,
                       MakePrefix(d.bits, (((net << q) | pod) << q) | rack, 3 * q),
                       3 * q, actions[rack], 0});
      }
    }
  }
  return out;
}

std::vector<RuleLine> Compute(const GeneratedDataset& d,
                              std::set<std::string>* disconnected) {
  return d.kind == GeneratedDataset::Kind::kExample ? ExampleRules(d, disconnected)
                                                    : FatTreeRules(d, disconnected);
}

void Install(GeneratedDataset& d) {
  d.rules = Compute(d, &d.disconnected);
  d.live.clear();
  for (size_t i = 0; i < d.rules.size(); ++i) d.live[i + 1] = d.rules[i];
  d.next_id = d.rules.size() + 1;
}

}  // namespace

size_t FatTreeSwitchCount(size_t k) { return 5 * k * k / 4; }
size_t FatTreeDirectedLinkCount(size_t k) { return k * k * k; }

nlohmann::json GeneratedDataset::Metadata() const {
  size_t switch_links = 0;
  for (const Link& l : topology.links()) {
    if (topology.FindDevice(l.a) && topology.FindDevice(l.b)) ++switch_links;
  }
  size_t ops = 0;
  for (const TraceBatch& b : trace) ops += b.size();
  nlohmann::json failed_links = nlohmann::json::array();
  for (const auto& [a, b] : failed) failed_links.push_back({a, b});
  nlohmann::json j = {
      {"kind", kind == Kind::kExample ? "example" : "fattree"},
      {"bits", bits},
      {"devices", topology.device_count()},
      {"endpoints", topology.endpoints().size()},
      {"switch_links", switch_links},
      {"directed_switch_links", 2 * switch_links},
      {"rules", rules.size()},
      {"trace_batches", trace.size()},
      {"trace_ops", ops},
      {"failed_links", failed_links},
      {"disconnected", disconnected},
  };
  if (kind == Kind::kExample) {
    j["prefix_count"] = param;
  } else {
    j["k"] = param;
  }
  return j;
}

GeneratedDataset GenExample(uint32_t bits, size_t prefix_count) {
  CheckBits(bits);
  const size_t limit = bits == 8 ? 16 : 256;
  if (prefix_count == 0 || prefix_count > limit) {
    throw std::invalid_argument(absl::StrCat("prefix count must be in [1, ", limit,
                                             "] at ", bits, " bits"));
  }
  GeneratedDataset d;
  d.kind = GeneratedDataset::Kind::kExample;
  d.bits = bits;
  d.param = prefix_count;
  d.topology = Topology({"A", "B", "C"},
                        {{"Internet", "A"}, {"SubnetX", "B"}, {"SubnetY", "C"}},
                        {{"A", "B"}, {"A", "C"}, {"B", "C"}});
  Install(d);
  return d;
}

GeneratedDataset GenFatTree(size_t k, uint32_t bits) {
  CheckBits(bits);
  if (k < 2 || k % 2 != 0) {
    throw std::invalid_argument(absl::StrCat("fat-tree k must be even and >= 2, got ", k));
  }
  const size_t field = size_t{1} << (bits / 4);
  if (k > field) {
    throw std::invalid_argument(absl::StrCat("k=", k, " does not fit ", bits,
                                             "-bit headers (at most ", field, ")"));
  }
  const size_t h = k / 2;
  std::vector<std::string> devices;
  for (size_t c = 0; c < h * h; ++c) devices.push_back(absl::StrCat("c", c));
  for (size_t p = 0; p < k; ++p) {
    for (size_t j = 0; j < h; ++j) devices.push_back(absl::StrCat("a", p, "_", j));
  }
  for (size_t p = 0; p < k; ++p) {
    for (size_t j = 0; j < h; ++j) devices.push_back(absl::StrCat("e", p, "_", j));
  }
  std::vector<Endpoint> endpoints;
  std::vector<Link> links;
  for (size_t p = 0; p < k; ++p) {
    for (size_t j = 0; j < h; ++j) {
      endpoints.push_back({RackName(p, j), absl::StrCat("e", p, "_", j)});
      for (size_t m = 0; m < h; ++m) {
        links.push_back({absl::StrCat("a", p, "_", j), absl::StrCat("e", p, "_", m)});
      }
      for (size_t m = 0; m < h; ++m) {
        links.push_back({absl::StrCat("a", p, "_", j), absl::StrCat("c", j * h + m)});
      }
    }
  }
  GeneratedDataset d;
  d.kind = GeneratedDataset::Kind::kFatTree;
  d.bits = bits;
  d.param = k;
  d.topology = Topology(std::move(devices), std::move(endpoints), std::move(links));
  Install(d);
  return d;
}

std::vector<RuleLine> ComputeRules(const GeneratedDataset& dataset) {
  std::set<std::string> ignored;
  return Compute(dataset, &ignored);
}

std::vector<TraceBatch> GenFailureTrace(GeneratedDataset& d, const std::string& a,
                                        const std::string& b) {
  auto key = std::minmax(a, b);
  bool exists = false;
  for (const Link& l : d.topology.links()) {
    if (std::minmax(l.a, l.b) == key) exists = true;
  }
  if (!exists || !d.topology.FindDevice(a) || !d.topology.FindDevice(b)) {
    throw std::invalid_argument(absl::StrCat("no switch link (", a, ", ", b, ")"));
  }
  if (!d.failed.insert({key.first, key.second}).second) {
    throw std::invalid_argument(absl::StrCat("link (", a, ", ", b, ") already failed"));
  }
  std::vector<RuleLine> next = Compute(d, &d.disconnected);

  std::vector<TraceBatch> batches;
  for (const std::string& device : d.topology.devices()) {
    std::vector<RuleLine> wanted;
    for (const RuleLine& r : next) {
      if (r.device == device) wanted.push_back(r);
    }
    TraceBatch batch;
    std::vector<uint64_t> removed;
    for (const auto& [id, r] : d.live) {
      if (r.device != device) continue;
      auto it = std::find(wanted.begin(), wanted.end(), r);
      if (it != wanted.end()) {
        wanted.erase(it);
      } else {
        TraceOp op;
        op.kind = TraceOp::Kind::kDelete;
        op.device = device;
        op.id = id;
        batch.push_back(std::move(op));
        removed.push_back(id);
      }
    }
    for (RuleLine& r : wanted) {
      TraceOp op;
      op.kind = TraceOp::Kind::kInsert;
      op.rule = r;
      batch.push_back(std::move(op));
      d.live[d.next_id++] = std::move(r);
    }
    for (uint64_t id : removed) d.live.erase(id);
    if (!batch.empty()) batches.push_back(std::move(batch));
  }
  d.trace.insert(d.trace.end(), batches.begin(), batches.end());
  return batches;
}

GeneratedDataset MakeDeviceLoad(const GeneratedDataset& full) {
  GeneratedDataset d = full;
  d.rules.clear();
  d.trace.clear();
  d.live.clear();
  std::vector<RuleLine> rest;
  for (const auto& [id, r] : full.live) {
    (r.priority == 0 ? d.rules : rest).push_back(r);
  }
  for (size_t i = 0; i < d.rules.size(); ++i) d.live[i + 1] = d.rules[i];
  d.next_id = d.rules.size() + 1;
  for (const std::string& device : d.topology.devices()) {
    TraceBatch batch;
    for (const RuleLine& r : rest) {
      if (r.device != device) continue;
      TraceOp op;
      op.kind = TraceOp::Kind::kInsert;
      op.rule = r;
      batch.push_back(std::move(op));
      d.live[d.next_id++] = r;
    }
    if (!batch.empty()) d.trace.push_back(std::move(batch));
  }
  return d;
}

void WriteDataset(const GeneratedDataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw std::runtime_error(absl::StrCat("cannot write ", dir, "/", name));
    return out;
  };
  {
    std::ofstream out = open("topology.json");
    out << dataset.topology.ToJson().dump(2) << "\n";
  }
  {
    std::ofstream out = open("rules.txt");
    WriteRules(out, dataset.rules);
  }
  {
    std::ofstream out = open("trace.txt");
    WriteTrace(out, dataset.trace);
  }
  {
    std::ofstream out = open("meta.json");
    out << dataset.Metadata().dump(2) << "\n";
  }
}

}  // namespace invmodel
