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

#include "invmodel/model.h"

#include <algorithm>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"
#include "invmodel/oracle.h"
#include "invmodel/random.h"
#include "testing.h"

namespace invmodel {
namespace {

using testing::Plain;

// Random models over L=8 with a shared store pair per test.
class RandomModels {
 public:
  RandomModels(uint64_t seed, size_t width)
      : gen_(seed), preds_(8), vectors_(width) {}

  ExplicitTable Table() {
    return gen_.RandomTable(vectors_.width(), 3, gen_.Uniform(1, 6), 0.3);
  }
  InverseModel Model(const ExplicitTable& t) {
    return ModelFromTable(preds_, vectors_, t);
  }
  InverseModel Model() { return Model(Table()); }

  InstanceGenerator& gen() { return gen_; }
  PredicateStore& preds() { return preds_; }
  VectorStore& vectors() { return vectors_; }

 private:
  InstanceGenerator gen_;
  PredicateStore preds_;
  VectorStore vectors_;
};

TEST(ModelTest, Identity) {
  PredicateStore preds(8);
  VectorStore vectors(3);
  InverseModel id = InverseModel::Identity(preds, vectors);
  ASSERT_EQ(id.size(), 1u);
  EXPECT_TRUE(id.entries()[0].predicate.IsTrue());
  EXPECT_EQ(id.entries()[0].vector.ToPlain(), Plain({"-", "-", "-"}));
  EXPECT_TRUE(id.IsIdentity());
  EXPECT_TRUE(CheckInvariants(id).ok);
  EXPECT_EQ(Evaluate(id, Header::FromUint(77, 8)), vectors.Zero());

  RandomModels r(3, 3);
  InverseModel m = r.Model();
  InverseModel id2 = InverseModel::Identity(r.preds(), r.vectors());
  EXPECT_TRUE(ModelEquals(Overwrite(m, id2), m));
  EXPECT_TRUE(ModelEquals(Overwrite(id2, m), m));
}

TEST(ModelTest, RunningExampleOverwrite) {
  auto ex = testing::LoadExample(32, false);
  InverseModel m = RebuildFull(ex->network, ex->vectors);
  Predicate p1 = testing::ExampleSubnet(ex->store, ex->data, "deliver:SubnetX");
  Predicate p2 = testing::ExampleSubnet(ex->store, ex->data, "deliver:SubnetY");
  Predicate p3 = ~(p1 | p2);
  OutputVector b00 = ex->vectors.FromPlain(Plain({"fwd:B", "-", "-"}));
  InverseModel delta(ex->store, ex->vectors,
                     {{p2, b00}, {~p2, ex->vectors.Zero()}});
  ASSERT_TRUE(CheckInvariants(delta).ok);
  InverseModel out = Overwrite(m, delta);
  InverseModel expected(
      ex->store, ex->vectors,
      {{p1, ex->vectors.FromPlain(Plain({"fwd:B", "deliver:SubnetX", "fwd:B"}))},
       {p2, ex->vectors.FromPlain(Plain({"fwd:B", "fwd:C", "deliver:SubnetY"}))},
       {p3, ex->vectors.FromPlain(Plain({"deliver:Internet", "fwd:A", "fwd:A"}))}});
  EXPECT_TRUE(ModelEquals(out, expected)) << DumpModel(out);
  Header in_x = Header::FromUint((10u << 24) | (0u << 16) | (3u << 8) | 9, 32);
  EXPECT_EQ(Evaluate(m, in_x).ToPlain(),
            Plain({"fwd:B", "deliver:SubnetX", "fwd:B"}));
  // Restriction to one class keeps exactly that class.
  SubspaceModel r = Restrict(m, p1);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].predicate, p1);
  EXPECT_EQ(r.entries[0].vector.ToPlain(),
            Plain({"fwd:B", "deliver:SubnetX", "fwd:B"}));
}

TEST(ModelTest, MonoidLaws) {
  for (size_t width : {2u, 3u, 4u}) {
    RandomModels r(100 + width, width);
    for (int trial = 0; trial < 150; ++trial) {
      ExplicitTable ta = r.Table(), tb = r.Table(), tc = r.Table();
      InverseModel a = r.Model(ta), b = r.Model(tb), c = r.Model(tc);
      InverseModel ab = Overwrite(a, b);
      InverseModel left = Overwrite(ab, c);
      InverseModel right = Overwrite(a, Overwrite(b, c));
      ASSERT_TRUE(CheckInvariants(ab).ok) << CheckInvariants(ab).violation;
      ASSERT_TRUE(ModelEquals(left, right)) << "width " << width << " trial " << trial;
      // Per header: F_{A⊗B}(x) = F_A(x) ⊗ F_B(x).
      ASSERT_EQ(Tabulate(ab), OverwriteTables(ta, tb));
      // The model is exactly the grouping of its table.
      ASSERT_TRUE(ModelEquals(ab, r.Model(OverwriteTables(ta, tb))));
    }
  }
}

TEST(ModelTest, ProjectionOverwriteIsNoop) {
  RandomModels r(11, 3);
  for (int trial = 0; trial < 200; ++trial) {
    ExplicitTable t = r.Table();
    ExplicitTable p = t;
    for (PlainVector& row : p) {
      for (ActionId& a : row) {
        if (r.gen().Chance(0.5)) a = kNoUpdate;
      }
    }
    InverseModel m = r.Model(t);
    InverseModel proj = r.Model(p);
    ASSERT_TRUE(IsProjection(proj, m));
    ASSERT_TRUE(ModelEquals(Overwrite(m, proj), m));
  }
  InverseModel m = r.Model();
  EXPECT_TRUE(IsProjection(m, m));
  EXPECT_TRUE(IsProjection(InverseModel::Identity(r.preds(), r.vectors()), m));
}

TEST(ModelTest, NonProjectionDetected) {
  PredicateStore preds(8);
  VectorStore vectors(2);
  ExplicitTable t(256, Plain({"drop", "drop"}));
  ExplicitTable p(256, Plain({"-", "-"}));
  p[5] = Plain({"fwd:x", "-"});
  EXPECT_FALSE(IsProjection(ModelFromTable(preds, vectors, p),
                            ModelFromTable(preds, vectors, t)));
}

// Models whose non-0 entries live in disjoint header groups.
std::vector<InverseModel> DisjointModels(RandomModels& r, size_t k) {
  std::vector<size_t> group(256);
  for (size_t& g : group) g = r.gen().Uniform(0, k);
  std::vector<InverseModel> out;
  for (size_t m = 0; m < k; ++m) {
    ExplicitTable t = r.Table();
    for (size_t h = 0; h < 256; ++h) {
      if (group[h] != m) t[h] = PlainVector(r.vectors().width(), kNoUpdate);
    }
    out.push_back(r.Model(t));
  }
  return out;
}

TEST(ModelTest, AbsorbEqualsChain) {
  RandomModels r(21, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<InverseModel> models = DisjointModels(r, r.gen().Uniform(1, 5));
    for (size_t i = 0; i < models.size(); ++i) {
      for (size_t j = i + 1; j < models.size(); ++j) {
        ASSERT_TRUE(AreDisjoint(models[i], models[j], Disjointness::kPredicate));
      }
    }
    InverseModel chain = InverseModel::Identity(r.preds(), r.vectors());
    for (const InverseModel& m : models) chain = Overwrite(chain, m);
    InverseModel absorbed = Absorb(models);
    ASSERT_TRUE(CheckInvariants(absorbed).ok);
    ASSERT_TRUE(ModelEquals(absorbed, chain));
  }
  InverseModel one = r.Model();
  EXPECT_TRUE(ModelEquals(Absorb(std::vector<InverseModel>{one}), one));
  EXPECT_THROW(Absorb(std::vector<InverseModel>{}), std::invalid_argument);
}

TEST(ModelTest, AbsorbRejectsOverlap) {
  PredicateStore preds(8);
  VectorStore vectors(1);
  ExplicitTable a(256, Plain({"-"}));
  ExplicitTable b(256, Plain({"-"}));
  a[3] = Plain({"drop"});
  b[3] = Plain({"fwd:z"});
  std::vector<InverseModel> ms = {ModelFromTable(preds, vectors, a),
                                  ModelFromTable(preds, vectors, b)};
  EXPECT_FALSE(AreDisjoint(ms[0], ms[1], Disjointness::kEither));
  EXPECT_THROW(Absorb(ms), std::invalid_argument);
}

TEST(ModelTest, AbsorbSingleRuleDeltas) {
  auto ex = testing::LoadExample(32, false);
  Predicate p2 = testing::ExampleSubnet(ex->store, ex->data, "deliver:SubnetY");
  OutputVector b00 = ex->vectors.FromPlain(Plain({"fwd:B", "-", "-"}));
  std::vector<InverseModel> deltas;
  for (size_t y = 0; y < 11; ++y) {
    Predicate p = ex->store.FromPrefix(
        Prefix::Parse(absl::StrCat("10.1.", y, ".0/24")));
    deltas.emplace_back(ex->store, ex->vectors,
                        std::vector<ModelEntry>{{p, b00}, {~p, ex->vectors.Zero()}});
  }
  InverseModel expected(ex->store, ex->vectors,
                        {{p2, b00}, {~p2, ex->vectors.Zero()}});
  EXPECT_TRUE(ModelEquals(Absorb(deltas), expected));
}

TEST(ModelTest, DisjointModelsCommute) {
  RandomModels r(31, 4);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    InverseModel a = r.Model(), b = r.Model();
    switch (trial % 3) {
      case 0: {
        std::vector<InverseModel> ms = DisjointModels(r, 2);
        a = ms[0];
        b = ms[1];
        break;
      }
      case 1: {
        // Supports on complementary components.
        ExplicitTable ta = r.Table(), tb = r.Table();
        for (size_t h = 0; h < 256; ++h) {
          for (size_t i = 0; i < 4; ++i) (i % 2 ? ta : tb)[h][i] = kNoUpdate;
        }
        a = r.Model(ta);
        b = r.Model(tb);
        ASSERT_TRUE(AreDisjoint(a, b, Disjointness::kComponent));
        break;
      }
      default:
        break;
    }
    if (AreDisjoint(a, b, Disjointness::kEither)) {
      ++checked;
      ASSERT_TRUE(ModelEquals(Overwrite(a, b), Overwrite(b, a)));
    }
  }
  EXPECT_GE(checked, 200);
  InverseModel id = InverseModel::Identity(r.preds(), r.vectors());
  EXPECT_TRUE(AreDisjoint(id, r.Model(), Disjointness::kEither));
}

TEST(ModelTest, RestrictDistributesOverOverwrite) {
  RandomModels r(41, 3);
  for (int trial = 0; trial < 100; ++trial) {
    InverseModel a = r.Model(), b = r.Model();
    Predicate p = r.preds().FromCube(r.gen().RandomCube());
    SubspaceModel lhs = Restrict(Overwrite(a, b), p);
    SubspaceModel rhs = Overwrite(Restrict(a, p), Restrict(b, p));
    ASSERT_TRUE(CheckInvariants(lhs).ok);
    ASSERT_TRUE(ModelEquals(lhs, rhs));
    for (uint64_t h : Enumerate(p)) {
      Header x = Header::FromUint(h, 8);
      OutputVector want = Evaluate(Overwrite(a, b), x);
      auto it = std::find_if(lhs.entries.begin(), lhs.entries.end(),
                             [&](const ModelEntry& e) {
                               return r.preds().Contains(e.predicate, x);
                             });
      ASSERT_NE(it, lhs.entries.end());
      ASSERT_EQ(it->vector, want);
    }
  }
  InverseModel m = r.Model();
  SubspaceModel all = Restrict(m, r.preds().True());
  EXPECT_TRUE(ModelEquals(InverseModel(r.preds(), r.vectors(), all.entries), m));
  EXPECT_THROW(Restrict(m, r.preds().False()), std::invalid_argument);
}

TEST(ModelTest, SubspaceMerge) {
  RandomModels r(51, 2);
  InverseModel m = r.Model();
  for (size_t k : {1u, 2u, 3u, 8u}) {
    std::vector<SubspaceModel> parts;
    size_t total = 0;
    for (Predicate p : SubspacePredicates(r.preds(), k)) {
      parts.push_back(Restrict(m, p));
      total += parts.back().entries.size();
    }
    EXPECT_GE(total, m.size());
    EXPECT_TRUE(ModelEquals(MergeSubspaces(r.preds(), r.vectors(), parts), m));
  }
  std::vector<SubspaceModel> overlapping = {Restrict(m, r.preds().True()),
                                            Restrict(m, r.preds().True())};
  EXPECT_THROW(MergeSubspaces(r.preds(), r.vectors(), overlapping),
               std::invalid_argument);
}

TEST(ModelTest, InvariantViolationsAreReported) {
  PredicateStore preds(8);
  VectorStore vectors(1);
  Predicate half = preds.FromCube("0*******");
  OutputVector d = vectors.FromPlain(Plain({"drop"}));
  // Incomplete.
  EXPECT_FALSE(CheckInvariants(InverseModel(preds, vectors, {{half, d}})).ok);
  // Overlapping.
  EXPECT_FALSE(CheckInvariants(InverseModel(
                                   preds, vectors,
                                   {{half, d}, {preds.True(), vectors.Zero()}}))
                   .ok);
  // Duplicate vector.
  EXPECT_FALSE(CheckInvariants(InverseModel(preds, vectors, {{half, d}, {~half, d}})).ok);
  // Empty predicate.
  EXPECT_FALSE(CheckInvariants(InverseModel(preds, vectors,
                                            {{preds.True(), d},
                                             {preds.False(), vectors.Zero()}}))
                   .ok);
}

TEST(ModelTest, DumpIsSortedAndStable) {
  RandomModels r(61, 3);
  InverseModel m = r.Model();
  std::string dump = DumpModel(m);
  std::vector<std::string> lines = absl::StrSplit(dump, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), m.size());
  for (const std::string& line : lines) {
    EXPECT_NE(line.find(" :: "), std::string::npos) << line;
  }
  // Entry order does not matter.
  std::vector<ModelEntry> reversed(m.entries().rbegin(), m.entries().rend());
  EXPECT_EQ(DumpModel(InverseModel(r.preds(), r.vectors(), reversed)), dump);
}

TEST(ModelTest, AverageDifferenceRatioMatchesPairwise) {
  RandomModels r(71, 4);
  for (int trial = 0; trial < 50; ++trial) {
    InverseModel m = r.Model();
    std::optional<Rational> got = AverageDifferenceRatio(m);
    if (m.size() < 2) {
      EXPECT_FALSE(got.has_value());
      continue;
    }
    Rational sum = 0;
    size_t pairs = 0;
    for (size_t i = 0; i < m.size(); ++i) {
      for (size_t j = i + 1; j < m.size(); ++j) {
        sum += DifferenceRatio(m.entries()[i].vector.ToPlain(),
                               m.entries()[j].vector.ToPlain());
        ++pairs;
      }
    }
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, sum / pairs);
  }
}

}  // namespace
}  // namespace invmodel
