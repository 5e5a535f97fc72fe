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

#include <deque>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "invmodel/oracle.h"
#include "invmodel/random.h"
#include "testing.h"

namespace invmodel {
namespace {

using testing::Plain;

Topology Abc() {
  return Topology({"A", "B", "C"},
                  {{"Internet", "A"}, {"SubnetX", "B"}, {"SubnetY", "C"}},
                  {{"A", "B"}, {"A", "C"}, {"B", "C"}});
}

// Full mesh over the devices of a random network.
Topology MeshFor(size_t devices) {
  std::vector<std::string> names;
  std::vector<Endpoint> endpoints;
  std::vector<Link> links;
  for (size_t i = 0; i < devices; ++i) {
    names.push_back(RandomDeviceName(i));
    endpoints.push_back({RandomEndpointName(i), RandomDeviceName(i)});
    for (size_t j = 0; j < i; ++j) links.push_back({RandomDeviceName(j), names[i]});
  }
  return Topology(names, endpoints, links);
}

CheckResult RunOn(const Topology& topo, std::initializer_list<const char*> v,
                  const char* check_json) {
  static PredicateStore preds(8);
  VectorStore vectors(topo.device_count());
  ForwardingGraph g = BuildGraph(preds.True(), vectors.FromPlain(Plain(v)), topo);
  std::vector<PropertyCheck> checks =
      testing::FromJsonChecks(absl::StrCat("[", check_json, "]").c_str());
  return RunCheck(g, topo, checks.at(0));
}

TEST(TopologyTest, Construction) {
  Topology t = Abc();
  EXPECT_EQ(t.device_count(), 3u);
  EXPECT_EQ(t.node_count(), 6u);
  EXPECT_EQ(*t.FindNode("SubnetX"), 4u);
  EXPECT_FALSE(t.FindDevice("SubnetX").has_value());
  EXPECT_EQ(*t.PortTarget(0, "B"), 1u);
  EXPECT_FALSE(t.PortTarget(1, "Internet").has_value());
  EXPECT_EQ(t.Neighbors(0), (std::vector<std::string>{"B", "C", "Internet"}));
  Topology round = Topology::FromJson(t.ToJson());
  EXPECT_EQ(round.ToJson(), t.ToJson());

  EXPECT_THROW(Topology({"A", "A"}, {}, {}), TopologyError);
  EXPECT_THROW(Topology({"A"}, {{"A", "A"}}, {}), TopologyError);
  EXPECT_THROW(Topology({"A", "B"}, {}, {{"A", "Z"}}), TopologyError);
  EXPECT_THROW(Topology({"A", "B"}, {}, {{"A", "B"}, {"B", "A"}}), TopologyError);
  EXPECT_THROW(Topology({"A"}, {}, {{"A", "A"}}), TopologyError);
  EXPECT_THROW(Topology({"A"}, {{"x", "Q"}}, {}), TopologyError);
  EXPECT_THROW(Topology::FromJson(nlohmann::json::parse(R"({"devices": 3})")),
               TopologyError);
}

TEST(GraphTest, ActionInterpretation) {
  Topology t = Abc();
  Hop h = InterpretAction(t, 0, InternText("fwd:B,C"));
  EXPECT_EQ(h.next, (std::vector<size_t>{1, 2}));
  EXPECT_FALSE(h.drop);
  EXPECT_TRUE(InterpretAction(t, 0, InternText("drop")).drop);
  EXPECT_EQ(InterpretAction(t, 1, InternText("deliver:SubnetX")).next,
            std::vector<size_t>{4});
  Hop none = InterpretAction(t, 1, kNoUpdate);
  EXPECT_TRUE(none.next.empty());
  EXPECT_FALSE(none.drop);
  EXPECT_THROW(InterpretAction(t, 1, InternText("fwd:Internet")), TopologyError);
  EXPECT_THROW(InterpretAction(t, 1, InternText("deliver:Nowhere")), TopologyError);
}

TEST(GraphTest, ExampleClassGraph) {
  PredicateStore preds(8);
  VectorStore vectors(3);
  Topology t = Abc();
  ForwardingGraph g = BuildGraph(
      preds.True(),
      vectors.FromPlain(Plain({"fwd:B", "deliver:SubnetX", "fwd:B"})), t);
  EXPECT_EQ(g.out[0], std::vector<size_t>{1});
  EXPECT_EQ(g.out[1], std::vector<size_t>{4});
  EXPECT_EQ(g.out[2], std::vector<size_t>{1});
  for (size_t n = 3; n < 6; ++n) EXPECT_TRUE(g.out[n].empty());

  ForwardingGraph dropped =
      BuildGraph(preds.True(), vectors.FromPlain(Plain({"drop", "drop", "drop"})), t);
  for (const auto& out : dropped.out) EXPECT_TRUE(out.empty());
  EXPECT_TRUE(dropped.drops[0] && dropped.drops[1] && dropped.drops[2]);

  ForwardingGraph ecmp = BuildGraph(
      preds.True(), vectors.FromPlain(Plain({"fwd:B,C", "drop", "drop"})), t);
  EXPECT_EQ(ecmp.out[0].size(), 2u);

  VectorStore narrow(2);
  EXPECT_THROW(BuildGraph(preds.True(), narrow.Zero(), t), TopologyError);
}

TEST(CheckTest, LoopFree) {
  Topology t = Abc();
  CheckResult loop = RunOn(t, {"fwd:B", "fwd:A", "drop"}, R"({"type":"loop_free"})");
  EXPECT_EQ(loop.verdict, Verdict::kFail);
  EXPECT_EQ(loop.witness.kind, Witness::Kind::kCycle);
  EXPECT_EQ(loop.witness.nodes, (std::vector<std::string>{"A", "B", "A"}));
  CheckResult ok = RunOn(t, {"fwd:B", "deliver:SubnetX", "fwd:B"},
                         R"({"type":"loop_free"})");
  EXPECT_EQ(ok.verdict, Verdict::kPass);
  EXPECT_EQ(ok.witness.kind, Witness::Kind::kNone);
  CheckResult tri = RunOn(t, {"fwd:C", "fwd:A", "fwd:B"}, R"({"type":"loop_free"})");
  EXPECT_EQ(tri.witness.nodes.size(), 4u);
}

TEST(CheckTest, BlackholeFree) {
  Topology t = Abc();
  CheckResult bh = RunOn(t, {"fwd:B", "drop", "fwd:A"},
                         R"({"type":"blackhole_free","src":"C"})");
  EXPECT_EQ(bh.verdict, Verdict::kFail);
  EXPECT_EQ(bh.witness.kind, Witness::Kind::kStuck);
  EXPECT_EQ(bh.witness.nodes, (std::vector<std::string>{"C", "A", "B"}));
  EXPECT_EQ(RunOn(t, {"fwd:B", "drop", "fwd:A"},
                  R"({"type":"blackhole_free","src":"C","allow_drop":["B"]})")
                .verdict,
            Verdict::kPass);
  EXPECT_EQ(RunOn(t, {"drop", "drop", "drop"},
                  R"({"type":"blackhole_free","allow_drop":"*"})")
                .verdict,
            Verdict::kPass);
}

TEST(CheckTest, Reachability) {
  Topology t = Abc();
  const std::initializer_list<const char*> p3 = {"deliver:Internet", "fwd:A", "fwd:A"};
  EXPECT_EQ(RunOn(t, p3, R"({"type":"reachability","src":"B","dst":"Internet"})").verdict,
            Verdict::kPass);
  CheckResult miss =
      RunOn(t, p3, R"({"type":"reachability","src":"B","dst":"SubnetX"})");
  EXPECT_EQ(miss.verdict, Verdict::kFail);
  EXPECT_EQ(miss.witness.nodes, (std::vector<std::string>{"B", "A", "Internet"}));
  // ECMP: one branch dropping fails universal reachability only.
  const std::initializer_list<const char*> split = {"fwd:B,C", "deliver:SubnetX", "drop"};
  EXPECT_EQ(RunOn(t, split, R"({"type":"reachability","src":"A","dst":"SubnetX"})").verdict,
            Verdict::kFail);
  EXPECT_EQ(RunOn(t, split, R"({"type":"reachability","src":"A","dst":"SubnetX",
                                "mode":"existential"})")
                .verdict,
            Verdict::kPass);
  CheckResult none = RunOn(t, {"drop", "drop", "drop"},
                           R"({"type":"reachability","src":"A","dst":"SubnetX",
                               "mode":"existential"})");
  EXPECT_EQ(none.witness.kind, Witness::Kind::kUnreached);
  CheckResult looping = RunOn(t, {"fwd:B", "fwd:A", "drop"},
                              R"({"type":"reachability","src":"A","dst":"SubnetY"})");
  EXPECT_EQ(looping.witness.kind, Witness::Kind::kCycle);
}

TEST(CheckTest, Waypoint) {
  Topology t = Abc();
  const char* check = R"({"type":"waypoint","src":"A","dst":"SubnetY","via":"B"})";
  EXPECT_EQ(RunOn(t, {"fwd:B", "fwd:C", "deliver:SubnetY"}, check).verdict,
            Verdict::kPass);
  CheckResult bypass = RunOn(t, {"fwd:C", "fwd:C", "deliver:SubnetY"}, check);
  EXPECT_EQ(bypass.verdict, Verdict::kFail);
  EXPECT_EQ(bypass.witness.kind, Witness::Kind::kBypass);
  EXPECT_EQ(bypass.witness.nodes, (std::vector<std::string>{"A", "C", "SubnetY"}));
}

TEST(PropertySpecTest, Parsing) {
  PropertySpec s = PropertySpec::FromJson(nlohmann::json::parse(R"({"checks": [
      {"type": "loop_free"},
      {"type": "reachability", "src": ["A", "B"], "dst": "SubnetY",
       "match": ["10.1.0.0/16"]}]})"));
  ASSERT_EQ(s.checks.size(), 2u);
  EXPECT_EQ(s.checks[1].Name(), "reachability(A,B->SubnetY)");
  EXPECT_EQ(s.checks[1].match.size(), 1u);
  s.Validate(Abc());
  for (const char* bad : {R"([{"type": "fast"}])", R"([{"type": "reachability"}])",
                          R"([{"type": "waypoint", "dst": "A"}])",
                          R"([{"type": "loop_free", "mode": "maybe"}])", R"(7)"}) {
    EXPECT_THROW(PropertySpec::FromJson(nlohmann::json::parse(bad)), std::exception)
        << bad;
  }
  PropertySpec unknown = PropertySpec::FromJson(
      nlohmann::json::parse(R"([{"type": "reachability", "dst": "Mars"}])"));
  EXPECT_THROW(unknown.Validate(Abc()), TopologyError);
  PropertySpec endpoint_src = PropertySpec::FromJson(nlohmann::json::parse(
      R"([{"type": "reachability", "src": "SubnetX", "dst": "SubnetY"}])"));
  EXPECT_THROW(endpoint_src.Validate(Abc()), TopologyError);
}

TEST(VerifyTest, ExampleAfterFailure) {
  auto ex = testing::LoadExample(32);
  ModelManager m(ex->network, ex->vectors);
  PropertySpec spec = PropertySpec::FromJson(nlohmann::json::parse(R"([
      {"type": "loop_free"},
      {"type": "reachability", "dst": "SubnetY",
       "match": ["10.1.0.0/21", "10.1.8.0/23", "10.1.10.0/24"]},
      {"type": "reachability", "src": "B", "dst": "Internet", "match": ["8.0.0.0/8"]}])"));
  VerificationReport report = VerifyModel(m.model(), spec, ex->data.topology);
  // Loop check on 3 classes, one subnet-Y class, one Internet class.
  EXPECT_EQ(report.size(), 5u);
  EXPECT_EQ(report.failures(), 0u);
  for (size_t i = 0; i < ex->data.trace.size(); ++i) {
    ChangeSummary c = m.Apply(ex->Batch(i, m));
    RecheckResult r = IncrementalRecheck(report, m.model(), c, spec, ex->data.topology);
    // Each batch changes exactly one class.
    EXPECT_EQ(r.classes_rechecked, 1u);
    report = r.merged;
    EXPECT_EQ(report, VerifyModel(m.model(), spec, ex->data.topology));
  }
  EXPECT_EQ(report.failures(), 0u);
  std::ostringstream table;
  report.WriteSummary(table, spec);
  EXPECT_NE(table.str().find("reachability(*->SubnetY)"), std::string::npos);
}

TEST(VerifyTest, EmptySummaryRechecksNothing) {
  auto ex = testing::LoadExample(8);
  ModelManager m(ex->network, ex->vectors);
  PropertySpec spec = PropertySpec::FromJson(nlohmann::json::parse(R"([{"type":"loop_free"}])"));
  VerificationReport full = VerifyModel(m.model(), spec, ex->data.topology);
  RecheckResult r = IncrementalRecheck(full, m.model(), ChangeSummary{}, spec,
                                       ex->data.topology);
  EXPECT_EQ(r.delta.size(), 0u);
  EXPECT_EQ(r.classes_rechecked, 0u);
  EXPECT_EQ(r.merged, full);
}

TEST(VerifyTest, ReportJson) {
  CheckRecord rec{"00ff", 2, "loop_free", Verdict::kFail,
                  {Witness::Kind::kCycle, {"A", "B", "A"}}};
  nlohmann::json j = RecordToJson(rec);
  EXPECT_EQ(j["class_id"], "00ff");
  EXPECT_EQ(j["verdict"], "FAIL");
  EXPECT_EQ(j["witness"]["kind"], "cycle");
  VerificationReport r;
  r.Add(rec);
  std::ostringstream out;
  r.WriteJsonLines(out);
  EXPECT_EQ(nlohmann::json::parse(out.str()), j);
}

// Every edge switch reaches every host of a fat-tree, before and after a
// core link failure. The oracle follows the rule tables hop by hop for
// sampled headers of each rack.
class FatTreeReachTest : public ::testing::TestWithParam<bool> {};

std::set<std::string> SimulateTerminals(const Network& n, const Topology& t,
                                        size_t src, const Header& h) {
  std::set<std::string> out;
  std::set<size_t> seen{src};
  std::deque<size_t> q{src};
  while (!q.empty()) {
    size_t u = q.front();
    q.pop_front();
    if (!t.IsDevice(u)) {
      out.insert(t.node_name(u));
      continue;
    }
    std::optional<ActionId> a = n.table(DeviceIndex(u)).Lookup(h);
    Hop hop = InterpretAction(t, DeviceIndex(u), *a);
    if (hop.next.empty()) out.insert("stuck at " + t.node_name(u));
    for (size_t v : hop.next) {
      if (seen.insert(v).second) q.push_back(v);
    }
  }
  return out;
}

TEST_P(FatTreeReachTest, AllRacksReachable) {
  GeneratedDataset d = GenFatTree(4, 16);
  if (GetParam()) GenFailureTrace(d, "c0", "a0_0");
  testing::Loaded ft(std::move(d));
  ModelManager m(ft.network, ft.vectors);
  for (size_t i = 0; i < ft.data.trace.size(); ++i) m.Apply(ft.Batch(i, m));

  nlohmann::json checks = nlohmann::json::array({{{"type", "loop_free"}}});
  std::vector<std::string> edges;
  for (const std::string& dev : ft.data.topology.devices()) {
    if (dev[0] == 'e') edges.push_back(dev);
  }
  // At L=16 rack (p, e) is [0000][p][e][host]. Delivery rules can be pod
  // rules with exceptions, so the rack prefix is built directly.
  std::vector<std::pair<std::string, Prefix>> hosts;
  for (const Endpoint& h : ft.data.topology.endpoints()) {
    const int pod = h.name[1] - '0', rack = h.name[3] - '0';
    hosts.push_back({h.name, Prefix::Parse(absl::StrCat(pod, ".", rack * 16, ".0.0/12"))});
  }
  ASSERT_EQ(hosts.size(), 8u);
  for (const auto& [host, prefix] : hosts) {
    checks.push_back({{"type", "reachability"},
                      {"src", edges},
                      {"dst", host},
                      {"match", {prefix.ToString()}}});
  }
  PropertySpec spec = PropertySpec::FromJson(checks);
  VerificationReport report = VerifyModel(m.model(), spec, ft.data.topology);
  EXPECT_EQ(report.failures(), 0u);

  // Oracle: a few headers per rack, every edge switch.
  PredicateStore& s = ft.store;
  for (const auto& [host, prefix] : hosts) {
    Predicate p = s.FromPrefix(prefix);
    for (uint64_t low : {0ull, 1ull, 0xfull}) {
      Header h = s.AnyHeader(p);
      for (uint32_t b = prefix.length; b < 16; ++b) h.set_bit(b, (low >> (15 - b)) & 1);
      for (const std::string& e : edges) {
        std::set<std::string> terminals = SimulateTerminals(
            m.network(), ft.data.topology, *ft.data.topology.FindNode(e), h);
        ASSERT_EQ(terminals, std::set<std::string>{host}) << e << " -> " << host;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(FailedCoreLink, FatTreeReachTest, ::testing::Bool());

// Random networks on a full mesh have loops, drops and misses; every FAIL
// witness must replay for every header of its class, and incremental
// rechecking must agree with full verification.
TEST(VerifyTest, RandomWitnessesReplayAndRecheckIsExact) {
  size_t replayed = 0;
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    InstanceGenerator gen(seed);
    PredicateStore store(8);
    const size_t devices = gen.Uniform(2, 4);
    VectorStore vectors(devices);
    Topology topo = MeshFor(devices);
    nlohmann::json checks = nlohmann::json::array(
        {{{"type", "loop_free"}},
         {{"type", "blackhole_free"}},
         {{"type", "reachability"}, {"dst", RandomEndpointName(1)}},
         {{"type", "reachability"}, {"src", RandomDeviceName(0)},
          {"dst", RandomEndpointName(1)}, {"mode", "existential"}},
         {{"type", "waypoint"}, {"src", RandomDeviceName(0)},
          {"dst", RandomEndpointName(1)}, {"via", RandomDeviceName(devices - 1)}}});
    PropertySpec spec = PropertySpec::FromJson(checks);
    ModelManager m(gen.RandomNetwork(store, {devices, 3, 6, 10}), vectors);
    VerificationReport report = VerifyModel(m.model(), spec, topo);
    for (int step = 0; step <= 4; ++step) {
      if (step > 0) {
        ChangeSummary c = m.Apply(gen.RandomBatch(m.network(), 5));
        RecheckResult r = IncrementalRecheck(report, m.model(), c, spec, topo);
        report = r.merged;
        ASSERT_EQ(report, VerifyModel(m.model(), spec, topo)) << "seed " << seed;
      }
      for (const ModelEntry& e : m.model().entries()) {
        const std::string id = e.vector.digest().Hex();
        for (size_t ci = 0; ci < spec.checks.size(); ++ci) {
          auto it = report.records().find({id, ci});
          ASSERT_NE(it, report.records().end());
          if (it->second.verdict != Verdict::kFail) continue;
          for (uint64_t h : Enumerate(e.predicate)) {
            std::string why = ReplayWitness(m.network(), topo, Header::FromUint(h, 8),
                                            spec.checks[ci], it->second.witness);
            ASSERT_EQ(why, "") << "seed " << seed << " " << spec.checks[ci].Name();
            ++replayed;
          }
        }
      }
    }
  }
  EXPECT_GT(replayed, 1000u);
}

TEST(VerifyTest, ReplayRejectsBogusWitnesses) {
  auto ex = testing::LoadExample(8, false);
  Topology& t = ex->data.topology;
  PropertyCheck loop = testing::FromJsonChecks(R"([{"type":"loop_free"}])")[0];
  Header h = Header::FromUint(0, 8);  // subnet X
  EXPECT_NE(ReplayWitness(ex->network, t, h, loop,
                          {Witness::Kind::kCycle, {"A", "B", "A"}}),
            "");
  PropertyCheck reach = testing::FromJsonChecks(
      R"([{"type":"reachability","src":"A","dst":"SubnetY"}])")[0];
  EXPECT_EQ(ReplayWitness(ex->network, t, h, reach,
                          {Witness::Kind::kStuck, {"A", "B", "SubnetX"}}),
            "");
  EXPECT_NE(ReplayWitness(ex->network, t, h, reach,
                          {Witness::Kind::kStuck, {"A", "C", "SubnetY"}}),
            "");
  EXPECT_NE(ReplayWitness(ex->network, t, h, reach,
                          {Witness::Kind::kStuck, {"B", "SubnetX"}}),
            "");
}

}  // namespace
}  // namespace invmodel
