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

// Shared fixtures for the unit tests and the acceptance binary.

#ifndef INVMODEL_TESTS_TESTING_H_
#define INVMODEL_TESTS_TESTING_H_

#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "invmodel/action.h"
#include "invmodel/engine.h"
#include "invmodel/io.h"
#include "invmodel/merkle.h"
#include "invmodel/model.h"
#include "invmodel/predicate.h"
#include "invmodel/rules.h"
#include "invmodel/topogen.h"
#include "invmodel/verify.h"

namespace invmodel::testing {

// Plain vector from action texts; "-" is NOUPDATE.
inline PlainVector Plain(std::initializer_list<const char*> texts) {
  PlainVector v;
  for (const char* t : texts) v.push_back(InternText(t));
  return v;
}

// A generated dataset loaded into fresh stores.
struct Loaded {
  explicit Loaded(GeneratedDataset d)
      : data(std::move(d)),
        store(data.bits),
        vectors(data.topology.device_count()),
        loader(store, data.topology),
        network(loader.Load(data.rules, "rules.txt")) {}

  Loaded(const Loaded&) = delete;
  Loaded& operator=(const Loaded&) = delete;

  // Trace batch `i` against the current state of `m`.
  BatchUpdate Batch(size_t i, const ModelManager& m) {
    return loader.Convert(data.trace.at(i), m.network(), "trace.txt");
  }
  BatchUpdate Batch(size_t i, const Network& n) {
    return loader.Convert(data.trace.at(i), n, "trace.txt");
  }

  GeneratedDataset data;
  PredicateStore store;
  VectorStore vectors;
  RuleLoader loader;
  Network network;
};

// The three-router example with link (A, C) failed afterwards.
inline std::unique_ptr<Loaded> LoadExample(uint32_t bits, bool fail_ac = true,
                                           size_t prefixes = 11) {
  GeneratedDataset d = GenExample(bits, prefixes);
  if (fail_ac) GenFailureTrace(d, "A", "C");
  return std::make_unique<Loaded>(std::move(d));
}

// Union of the example prefixes of one subnet (side 0 = X, 1 = Y).
inline Predicate ExampleSubnet(PredicateStore& store, const GeneratedDataset& d,
                               const std::string& deliver) {
  Predicate p = store.False();
  for (const RuleLine& r : d.rules) {
    if (r.action == deliver) p |= store.FromPrefix(r.prefix);
  }
  return p;
}

inline std::vector<PropertyCheck> FromJsonChecks(const char* text) {
  return PropertySpec::FromJson(nlohmann::json::parse(text)).checks;
}

}  // namespace invmodel::testing

#endif  // INVMODEL_TESTS_TESTING_H_
