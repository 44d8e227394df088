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

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "relate/error.hpp"
#include "relate/io.hpp"
#include "relate/kg.hpp"

using namespace relate;

TEST_SUITE("kg") {

TEST_CASE("parse two triples") {
  std::istringstream in("a\tr\tb\nb\tr\tc\n");
  const auto loaded = parse_triples(in, Vocabulary{}, VocabMode::kGrow);
  CHECK(loaded.triples.size() == 2);
  CHECK(loaded.vocab.num_entities() == 3);
  CHECK(loaded.vocab.num_relations() == 1);
}

TEST_CASE("malformed line names its line") {
  std::istringstream in("a\tr\n");
  try {
    parse_triples(in, Vocabulary{}, VocabMode::kGrow, "f.txt");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("duplicates dropped and counted, comments skipped") {
  std::istringstream in("# header\na\tr\tb\n\na\tr\tb\n");
  const auto loaded = parse_triples(in, Vocabulary{}, VocabMode::kGrow);
  CHECK(loaded.triples.size() == 1);
  CHECK(loaded.duplicates_dropped == 1);
}

TEST_CASE("fixed vocabulary rejects unknown tokens") {
  std::istringstream first("a\tr\tb\n");
  const auto base = parse_triples(first, Vocabulary{}, VocabMode::kGrow);
  std::istringstream second("a\tr\tz\n");
  CHECK_THROWS_AS(parse_triples(second, base.vocab, VocabMode::kFixed), VocabularyError);
}

TEST_CASE("filter index is the set union of splits") {
  const TripleList a{{0, 0, 1}}, b{{0, 0, 2}}, c{};
  const auto f = build_filter_index(a, b, c);
  CHECK(f.tails_of(0, 0) == std::vector<EntityId>{1, 2});
  CHECK(f.heads_of(0, 2) == std::vector<EntityId>{0});

  const TripleList empty{};
  CHECK(build_filter_index(empty, empty, empty).empty());

  const TripleList dup{{0, 0, 1}};
  CHECK(build_filter_index(dup, empty, dup).tails_of(0, 0) == std::vector<EntityId>{1});
}

TEST_CASE("relation categories") {
  auto cat = classify_relations({{0, 0, 1}, {2, 0, 3}});
  CHECK(cat.at(0).kind == CategoryKind::kOneToOne);
  CHECK(cat.at(0).avg_tails_per_head == doctest::Approx(1.0));

  cat = classify_relations({{0, 0, 1}, {0, 0, 2}, {0, 0, 3}});
  // 3 tails for the single head; each tail has one head.
  CHECK(cat.at(0).avg_tails_per_head == doctest::Approx(3.0));
  CHECK(cat.at(0).avg_heads_per_tail == doctest::Approx(1.0));
  CHECK(cat.at(0).kind == CategoryKind::kOneToMany);

  cat = classify_relations({{0, 0, 2}, {1, 0, 2}});
  CHECK(cat.at(0).kind == CategoryKind::kManyToOne);
}

TEST_CASE("reciprocal augmentation") {
  auto kg = augment_reciprocal(testing::make_kg(2, 1, {{0, 0, 1}}));
  CHECK(kg.num_relations() == 2);
  CHECK(kg.base_relations == 1);
  CHECK(kg.train == TripleList{{0, 0, 1}, {1, 1, 0}});

  kg = augment_reciprocal(testing::make_kg(2, 1, {}));
  CHECK(kg.train.empty());
  CHECK(kg.num_relations() == 2);

  kg = augment_reciprocal(testing::make_kg(2, 1, {{0, 0, 1}, {1, 0, 0}}));
  // (0,0,1),(1,0,0),(1,1,0),(0,1,1): four distinct triples.
  CHECK(kg.train.size() == 4);
  CHECK(std::set<Triple>(kg.train.begin(), kg.train.end()).size() == 4);
}

TEST_CASE("reciprocal filter covers reversed held-out triples") {
  const auto kg = augment_reciprocal(testing::make_kg(3, 1, {{0, 0, 1}}, {}, {{2, 0, 1}}));
  CHECK(kg.filter.has_tail(1, 1, 2));
}

TEST_CASE("type signatures") {
  auto sig = infer_type_signatures({{0, 0, 1}}, {}, 3, 2);
  CHECK(sig(0, 0) == 1.0);
  CHECK(sig(0, 1) == 0.0);
  CHECK(sig(0, 2) == 0.0);
  CHECK(sig(0, 3) == 0.0);
  for (std::size_t k = 0; k < 4; ++k) CHECK(sig(2, k) == 0.0);

  sig = infer_type_signatures({{0, 0, 1}, {2, 1, 0}}, {}, 3, 2);
  // Entity 0: head of r0 once, tail of r1 once.
  CHECK(sig(0, 0) == doctest::Approx(0.5));
  CHECK(sig(0, 1) == 0.0);
  CHECK(sig(0, 2) == 0.0);
  CHECK(sig(0, 3) == doctest::Approx(0.5));
}

TEST_CASE("synthetic generator is deterministic and closed") {
  GeneratorConfig cfg;
  const auto a = generate_synthetic_kg(cfg, 7);
  const auto b = generate_synthetic_kg(cfg, 7);
  CHECK(a.train == b.train);
  CHECK(a.valid == b.valid);
  CHECK(a.test == b.test);
  CHECK(a.num_entities() == 200);

  const auto facts = all_facts(a);
  const std::set<Triple> all(facts.begin(), facts.end());
  for (const Triple& t : facts) {
    if (t.relation == family::kParentOf) {
      CHECK(all.count({t.tail, family::kChildOf, t.head}) == 1);
      for (const Triple& u : facts) {
        if (u.relation == family::kParentOf && u.head == t.tail) {
          CHECK(all.count({t.head, family::kGrandparentOf, u.tail}) == 1);
        }
      }
    }
  }
  const double n = static_cast<double>(facts.size());
  CHECK(a.train.size() + a.valid.size() + a.test.size() == facts.size());
  CHECK(a.train.size() / n == doctest::Approx(0.8).epsilon(0.02));

  std::set<EntityId> train_entities;
  for (const Triple& t : a.train) {
    train_entities.insert(t.head);
    train_entities.insert(t.tail);
  }
  for (const auto* split : {&a.valid, &a.test}) {
    for (const Triple& t : *split) {
      CHECK(train_entities.count(t.head) == 1);
      CHECK(train_entities.count(t.tail) == 1);
    }
  }
}

TEST_CASE("dataset write and load round trip") {
  const auto dir = testing::temp_dir("kg");
  const auto kg = generate_synthetic_kg(GeneratorConfig{}, 3);
  write_dataset(dir, kg);
  const auto back = load_dataset(dir);
  // Ids follow first appearance in train.txt, so compare by name.
  auto named = [](const KnowledgeGraph& g, const TripleList& split) {
    std::vector<std::string> out;
    for (const Triple& t : split) {
      out.push_back(g.vocab.entity_name(t.head) + "|" + g.vocab.relation_name(t.relation) + "|" +
                    g.vocab.entity_name(t.tail));
    }
    return out;
  };
  CHECK(back.num_entities() == kg.num_entities());
  CHECK(named(back, back.train) == named(kg, kg.train));
  CHECK(named(back, back.valid) == named(kg, kg.valid));
  CHECK(named(back, back.test) == named(kg, kg.test));
  CHECK(format_triples(back.test, back.vocab) == format_triples(kg.test, kg.vocab));
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

}
