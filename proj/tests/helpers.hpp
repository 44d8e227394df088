// Copyright 2026 The relate-kg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

#include "relate/kg.hpp"
#include "relate/models.hpp"
#include "relate/rng.hpp"

namespace testing {

inline relate::KnowledgeGraph make_kg(std::size_t entities, std::size_t relations,
                                      relate::TripleList train, relate::TripleList valid = {},
                                      relate::TripleList test = {}) {
  relate::KnowledgeGraph kg;
  for (std::size_t e = 0; e < entities; ++e) kg.vocab.intern_entity("e" + std::to_string(e));
  for (std::size_t r = 0; r < relations; ++r) kg.vocab.intern_relation("r" + std::to_string(r));
  kg.train = std::move(train);
  kg.valid = std::move(valid);
  kg.test = std::move(test);
  kg.base_relations = relations;
  kg.rebuild_filter();
  return kg;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::uint64_t counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("relate_test_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Every tensor filled uniformly at random; optional random type signatures.
inline relate::RelateModel random_relate(std::size_t entities, std::size_t relations,
                                         std::size_t dim, relate::Rng& rng,
                                         bool with_type = false, double gamma = 12.0) {
  relate::RelateModel m(entities, relations, dim, gamma);
  for (auto& t : m.parameters()) {
    for (double& v : t.value.flat()) v = relate::uniform(rng, -2.0, 2.0);
  }
  if (with_type) {
    auto sig = std::make_shared<relate::TypeSignatures>(entities, 2 * relations);
    for (double& v : sig->flat()) v = relate::uniform(rng, 0.0, 1.0);
    m.set_type_context(relate::TypeContext{sig, relate::uniform(rng, 0.01, 0.5),
                                           relate::uniform(rng, 0.1, 1.0)});
  }
  return m;
}

inline relate::Triple random_triple(std::size_t entities, std::size_t relations, relate::Rng& rng) {
  return {static_cast<relate::EntityId>(relate::uniform_index(rng, entities)),
          static_cast<relate::RelationId>(relate::uniform_index(rng, relations)),
          static_cast<relate::EntityId>(relate::uniform_index(rng, entities))};
}

}  // namespace testing
