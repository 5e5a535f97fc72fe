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

#include "invmodel/engine.h"

#include "gtest/gtest.h"
#include "invmodel/oracle.h"
#include "invmodel/random.h"
#include "testing.h"

namespace invmodel {
namespace {

using testing::Plain;

constexpr Strategy kAll[] = {Strategy::kApFull, Strategy::kPerRule,
                             Strategy::kMr2, Strategy::kBaseSeq};

TEST(EngineTest, StrategyNames) {
  for (Strategy s : kAll) EXPECT_EQ(ParseStrategy(StrategyName(s)), s);
  EXPECT_EQ(ParseStrategy("per-rule"), Strategy::kPerRule);
  EXPECT_THROW(ParseStrategy("fast"), std::invalid_argument);
}

TEST(EngineTest, ExampleHasThreeClasses) {
  for (uint32_t bits : {8u, 16u, 32u}) {
    auto ex = testing::LoadExample(bits, false);
    InverseModel m = RebuildFull(ex->network, ex->vectors);
    EXPECT_EQ(m.size(), 3u) << "L=" << bits;
    EXPECT_TRUE(CheckInvariants(m).ok);
  }
}

TEST(EngineTest, DefaultsOnlyIsOneClass) {
  InstanceGenerator gen(1);
  PredicateStore store(8);
  Network n = gen.RandomNetwork(store, {3, 0, 0, 10});
  VectorStore vectors(3);
  EXPECT_EQ(RebuildFull(n, vectors).size(), 1u);
}

TEST(EngineTest, ExampleFailureUnderEveryStrategy) {
  for (Strategy s : kAll) {
    auto ex = testing::LoadExample(32);
    ModelManager m(ex->network, ex->vectors, s);
    m.set_check_invariants(true);
    InverseModel before = m.model();
    BatchUpdate batch = ex->Batch(0, m);

    DeltaPlan plan = m.Plan(batch, s);
    if (s == Strategy::kMr2) {
      // One aggregated delta: the whole subnet-Y block moves to B.
      ASSERT_EQ(plan.deltas.size(), 1u);
      Predicate p2 = testing::ExampleSubnet(ex->store, ex->data, "deliver:SubnetY");
      InverseModel expected(
          ex->store, ex->vectors,
          {{p2, ex->vectors.FromPlain(Plain({"fwd:B", "-", "-"}))},
           {~p2, ex->vectors.Zero()}});
      EXPECT_TRUE(ModelEquals(plan.deltas[0], expected));
    }
    if (s == Strategy::kBaseSeq) EXPECT_EQ(plan.deltas.size(), 11u);

    ChangeSummary c = m.Apply(batch);
    EXPECT_EQ(c.overwrites, plan.deltas.size());
    ASSERT_EQ(m.model().size(), 3u);
    bool saw_p2 = false;
    for (const ModelEntry& e : m.model().entries()) {
      PlainVector v = e.vector.ToPlain();
      if (v == Plain({"fwd:B", "fwd:C", "deliver:SubnetY"})) saw_p2 = true;
    }
    EXPECT_TRUE(saw_p2) << StrategyName(s);
    // The other two classes keep predicate and vector.
    size_t kept = 0;
    for (const ModelEntry& e : before.entries()) {
      for (const ModelEntry& f : m.model().entries()) kept += e == f;
    }
    EXPECT_EQ(kept, 2u);
    ASSERT_EQ(c.changes.size(), 1u);
    EXPECT_EQ(c.changes[0].before.ToPlain(),
              Plain({"fwd:C", "fwd:C", "deliver:SubnetY"}));

    m.Apply(ex->Batch(1, m));
    EXPECT_TRUE(m.CheckMasterInvariant().ok);
  }
}

TEST(EngineTest, EmptyBatch) {
  for (Strategy s : kAll) {
    auto ex = testing::LoadExample(8);
    ModelManager m(ex->network, ex->vectors, s);
    InverseModel before = m.model();
    ChangeSummary c = m.Apply(BatchUpdate{});
    if (s != Strategy::kApFull) EXPECT_EQ(c.overwrites, 0u);
    EXPECT_TRUE(c.changes.empty());
    EXPECT_TRUE(ModelEquals(m.model(), before));
  }
}

TEST(EngineTest, SingleUpdates) {
  auto ex = testing::LoadExample(8, false);
  ModelManager m(ex->network, ex->vectors, Strategy::kPerRule);
  m.set_check_invariants(true);
  // Move one subnet-Y prefix on A to B: only that slice changes.
  const Rule* moved = nullptr;
  for (const Rule* r : ex->network.table(0).RulesByPriority()) {
    if (ActionText(r->action) == "fwd:C") moved = r;
  }
  ASSERT_NE(moved, nullptr);
  Rule r = *moved;
  r.id = RuleId{500};
  r.priority += 1;
  r.action = InternText("fwd:B");
  ChangeSummary c = m.ApplySingle(r);
  ASSERT_EQ(c.changes.size(), 1u);
  EXPECT_EQ(c.changes[0].region, r.match);
  EXPECT_EQ(m.model().size(), 4u);
  EXPECT_TRUE(Compare(m.model(), BuildReferenceModel(m.network())).ok);

  // Deleting the now hidden rule changes nothing.
  ChangeSummary none = m.ApplySingle(RuleDelete{0, moved->id});
  EXPECT_TRUE(none.changes.empty());
  EXPECT_EQ(none.overwrites, 0u);
}

TEST(EngineTest, SingleRuleBatchMatchesSingleUpdate) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    InstanceGenerator gen(seed);
    PredicateStore store(8);
    VectorStore vectors(3);
    Network n = gen.RandomNetwork(store, {});
    BatchUpdate b;
    for (int tries = 0; tries < 20 && b.inserts.empty(); ++tries) {
      BatchUpdate cand = gen.RandomBatch(n, 3);
      if (!cand.inserts.empty()) b.inserts = {cand.inserts[0]};
      try {
        ApplyBatch(n, b);
      } catch (const IllBehavedError&) {
        b.inserts.clear();
      }
    }
    if (b.inserts.empty()) continue;
    ModelManager single(n, vectors, Strategy::kPerRule);
    ModelManager mr2(n, vectors, Strategy::kMr2);
    single.ApplySingle(b.inserts[0]);
    mr2.Apply(b);
    ASSERT_TRUE(ModelEquals(single.model(), mr2.model())) << "seed " << seed;
  }
}

TEST(EngineTest, StrategiesAgreeOnRandomTraces) {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    InstanceGenerator gen(seed);
    PredicateStore store(8);
    const size_t devices = gen.Uniform(2, 4);
    VectorStore vectors(devices);
    Network n = gen.RandomNetwork(store, {devices, 3, 6, 10});
    std::vector<std::unique_ptr<ModelManager>> ms;
    for (Strategy s : kAll) ms.push_back(std::make_unique<ModelManager>(n, vectors, s));
    for (int step = 0; step < 5; ++step) {
      BatchUpdate b = gen.RandomBatch(ms[0]->network(), 6);
      for (auto& m : ms) m->Apply(b);
      for (size_t i = 1; i < ms.size(); ++i) {
        ASSERT_TRUE(ModelEquals(ms[0]->model(), ms[i]->model()))
            << "seed " << seed << " step " << step << " strategy "
            << StrategyName(ms[i]->strategy());
      }
      ASSERT_TRUE(ms[2]->CheckMasterInvariant().ok);
    }
  }
}

TEST(EngineTest, ChangeSummaryIsExact) {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    InstanceGenerator gen(seed);
    PredicateStore store(8);
    const size_t devices = gen.Uniform(2, 4);
    VectorStore vectors(devices);
    ModelManager m(gen.RandomNetwork(store, {devices, 3, 6, 10}), vectors,
                   seed % 2 ? Strategy::kMr2 : Strategy::kPerRule);
    for (int step = 0; step < 4; ++step) {
      ExplicitTable before = BuildReferenceModel(m.network()).table;
      ChangeSummary c = m.Apply(gen.RandomBatch(m.network(), 5));
      ExplicitTable after = BuildReferenceModel(m.network()).table;
      std::vector<int> owner(256, -1);
      for (size_t i = 0; i < c.changes.size(); ++i) {
        for (uint64_t h : Enumerate(c.changes[i].region)) {
          ASSERT_EQ(owner[h], -1) << "regions overlap";
          owner[h] = int(i);
          ASSERT_EQ(c.changes[i].before.ToPlain(), before[h]);
          ASSERT_EQ(c.changes[i].after.ToPlain(), after[h]);
        }
      }
      for (uint64_t h = 0; h < 256; ++h) {
        ASSERT_EQ(owner[h] != -1, before[h] != after[h])
            << "seed " << seed << " header " << h;
      }
      Predicate touched = c.Touched(store);
      ASSERT_EQ(Enumerate(touched).size(),
                size_t(std::count_if(owner.begin(), owner.end(),
                                     [](int o) { return o != -1; })));
    }
  }
}

TEST(EngineTest, ChangeSummaryJson) {
  auto ex = testing::LoadExample(8);
  ModelManager m(ex->network, ex->vectors);
  nlohmann::json j = ChangeSummaryToJson(m.Apply(ex->Batch(0, m)));
  ASSERT_EQ(j["changes"].size(), 1u);
  EXPECT_EQ(j["changes"][0]["after"], "fwd:B,fwd:C,deliver:SubnetY");
  EXPECT_TRUE(j["timing"].contains("mr1_seconds"));
  EXPECT_EQ(j["overwrites"], 1);
}

TEST(EngineTest, PhaseTimesFitTheTotal) {
  GeneratedDataset d = GenFatTree(4, 16);
  GenFailureTrace(d, "c0", "a0_0");
  testing::Loaded ft(std::move(d));
  ModelManager m(ft.network, ft.vectors);
  for (size_t i = 0; i < ft.data.trace.size(); ++i) {
    ChangeSummary c = m.Apply(ft.Batch(i, m));
    const PhaseTimes& t = c.timing;
    EXPECT_LE(t.mr1_seconds + t.r2_seconds + t.apply_seconds, t.total_seconds);
  }
}

TEST(EngineTest, RejectedBatchLeavesStateAlone) {
  auto ex = testing::LoadExample(8);
  ModelManager m(ex->network, ex->vectors);
  InverseModel before = m.model();
  BatchUpdate bad;
  const Rule* deflt = m.network().table(1).RulesByPriority().back();
  bad.deletes.push_back({1, deflt->id});
  EXPECT_THROW(m.Apply(bad), IllBehavedError);
  EXPECT_TRUE(ModelEquals(m.model(), before));
  EXPECT_TRUE(m.network().table(1).Contains(deflt->id));
}

TEST(EngineTest, ManagerRejectsBadNetworks) {
  PredicateStore store(8);
  VectorStore vectors(2);
  Network n(store, 2);
  EXPECT_THROW(ModelManager(n, vectors), IllBehavedError);
  VectorStore wrong(3);
  InstanceGenerator gen(1);
  EXPECT_THROW(ModelManager(gen.RandomNetwork(store, {2, 1, 2, 5}), wrong),
               std::invalid_argument);
}

TEST(EngineTest, SubspacePredicatesPartition) {
  PredicateStore store(8);
  for (size_t k : {1u, 2u, 3u, 5u, 8u, 256u}) {
    std::vector<Predicate> parts = SubspacePredicates(store, k);
    ASSERT_EQ(parts.size(), k);
    Predicate all = store.False();
    for (Predicate p : parts) {
      ASSERT_FALSE(p.IsEmpty());
      ASSERT_FALSE(all.Intersects(p));
      all |= p;
    }
    EXPECT_TRUE(all.IsTrue());
  }
  EXPECT_THROW(SubspacePredicates(store, 0), std::invalid_argument);
  EXPECT_THROW(SubspacePredicates(store, 257), std::invalid_argument);
}

TEST(EngineTest, PartitionedRunsMerge) {
  for (size_t k : {1u, 2u, 3u, 8u}) {
    auto ex = testing::LoadExample(8);
    ModelManager plain(ex->network, ex->vectors);
    ModelManager parted(ex->network, ex->vectors);
    const std::vector<SubspaceModel>& parts = parted.Partition(k);
    size_t total = 0;
    for (const SubspaceModel& p : parts) total += p.entries.size();
    EXPECT_GE(total, plain.model().size());
    for (size_t i = 0; i < ex->data.trace.size(); ++i) {
      plain.Apply(ex->Batch(i, plain));
      parted.Apply(ex->Batch(i, parted));
      ASSERT_TRUE(ModelEquals(plain.model(), parted.model())) << "k=" << k;
      for (const SubspaceModel& p : parted.subspaces()) {
        ASSERT_TRUE(ModelEquals(p, Restrict(plain.model(), p.subspace)));
      }
    }
  }
}

TEST(EngineTest, PartitionedRandomTraces) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    InstanceGenerator gen(seed);
    PredicateStore store(8);
    VectorStore vectors(3);
    Network n = gen.RandomNetwork(store, {});
    ModelManager plain(n, vectors, Strategy::kMr2);
    ModelManager parted(n, vectors, seed % 2 ? Strategy::kBaseSeq : Strategy::kPerRule);
    parted.Partition(1 + seed % 8);
    for (int step = 0; step < 4; ++step) {
      BatchUpdate b = gen.RandomBatch(plain.network(), 5);
      plain.Apply(b);
      parted.ApplyPartitioned(b);
      ASSERT_TRUE(ModelEquals(plain.model(), parted.model())) << "seed " << seed;
    }
  }
  auto ex = testing::LoadExample(8);
  ModelManager m(ex->network, ex->vectors);
  EXPECT_THROW(m.ApplyPartitioned(BatchUpdate{}), std::logic_error);
}

TEST(EngineTest, DiffModels) {
  auto ex = testing::LoadExample(8);
  InverseModel a = RebuildFull(ex->network, ex->vectors);
  EXPECT_TRUE(DiffModels(a, a).empty());
  Network next = ApplyBatch(ex->network, ex->Batch(0, ex->network));
  InverseModel b = RebuildFull(next, ex->vectors);
  std::vector<VectorChange> d = DiffModels(a, b);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].after.ToPlain(), Plain({"fwd:B", "fwd:C", "deliver:SubnetY"}));
}

}  // namespace
}  // namespace invmodel
