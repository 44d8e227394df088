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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relate/tensor.hpp"

namespace relate {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using TripleList = std::vector<Triple>;

std::ostream& operator<<(std::ostream& os, const Triple& t);

class Vocabulary {
 public:
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  const std::string& entity_name(EntityId id) const { return entities_.at(id); }
  const std::string& relation_name(RelationId id) const { return relations_.at(id); }
  const std::vector<std::string>& entity_names() const { return entities_; }
  const std::vector<std::string>& relation_names() const { return relations_; }

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  // Returns the existing id or appends a new one.
  EntityId intern_entity(std::string_view name);
  RelationId intern_relation(std::string_view name);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

// Known-true completions over every split, for the filtered ranking protocol.
class FilterIndex {
 public:
  // Sorted, duplicate-free. Empty span when the pair was never seen.
  const std::vector<EntityId>& tails_of(EntityId head, RelationId relation) const;
  const std::vector<EntityId>& heads_of(RelationId relation, EntityId tail) const;

  bool has_tail(EntityId head, RelationId relation, EntityId tail) const;
  bool has_head(RelationId relation, EntityId tail, EntityId head) const;

  bool empty() const { return tails_.empty() && heads_.empty(); }
  std::size_t num_tail_keys() const { return tails_.size(); }
  std::size_t num_head_keys() const { return heads_.size(); }

 private:
  friend FilterIndex build_filter_index(const std::vector<const TripleList*>& splits);
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

FilterIndex build_filter_index(const std::vector<const TripleList*>& splits);
FilterIndex build_filter_index(const TripleList& train, const TripleList& valid,
                               const TripleList& test);

struct KnowledgeGraph {
  Vocabulary vocab;
  TripleList train;
  TripleList valid;
  TripleList test;
  FilterIndex filter;
  // Relation count before reciprocal augmentation; equals
  // vocab.num_relations() when `reciprocal` is false.
  std::size_t base_relations = 0;
  bool reciprocal = false;

  std::size_t num_entities() const { return vocab.num_entities(); }
  std::size_t num_relations() const { return vocab.num_relations(); }
  void rebuild_filter();
};

// ---------------------------------------------------------------------------
// Loading

enum class VocabMode {
  kGrow,        // build or extend the vocabulary from the file
  kFixed,       // unknown tokens are a VocabularyError
};

struct LoadedTriples {
  TripleList triples;
  Vocabulary vocab;
  std::size_t duplicates_dropped = 0;
};

// Parses tab-separated head/relation/tail lines. Empty lines and lines
// starting with '#' are skipped. Duplicate triples are dropped and counted.
LoadedTriples parse_triples(std::istream& in, Vocabulary vocab, VocabMode mode,
                            const std::string& source_name = "<stream>");

LoadedTriples load_triples(const std::filesystem::path& path,
                           const std::optional<Vocabulary>& existing_vocab = std::nullopt,
                           bool extend_vocab = false);

// Reads train.txt / valid.txt / test.txt from `dir`. Transductive by default:
// valid/test tokens must occur in train unless `extend_vocab` is set.
KnowledgeGraph load_dataset(const std::filesystem::path& dir, bool extend_vocab = false);

std::string format_triples(const TripleList& triples, const Vocabulary& vocab,
                           const std::string& header_comment = "");
std::string format_vocabulary(const std::vector<std::string>& names);

void write_dataset(const std::filesystem::path& dir, const KnowledgeGraph& kg,
                   const std::string& header_comment = "");

// ---------------------------------------------------------------------------
// Relation statistics

enum class CategoryKind { kOneToOne, kOneToMany, kManyToOne, kManyToMany };

std::string_view category_name(CategoryKind kind);

struct RelationCategory {
  CategoryKind kind = CategoryKind::kOneToOne;
  double avg_tails_per_head = 0.0;
  double avg_heads_per_tail = 0.0;
};

// Averages at or below this count as "1", above as "N".
inline constexpr double kCategoryThreshold = 1.5;

std::map<RelationId, RelationCategory> classify_relations(const TripleList& train);

// ---------------------------------------------------------------------------
// Reciprocal augmentation

// Relation i gains a reverse relation i + |R|; every train triple (h, r, t)
// gets a companion (t, r + |R|, h). Valid and test stay unchanged. The filter
// covers the reversed copies of every split so reverse-relation tail queries
// are filtered exactly like the head queries they stand in for.
KnowledgeGraph augment_reciprocal(const KnowledgeGraph& kg);

// Removes relations >= base_relations from a triple list.
TripleList strip_reciprocal(const TripleList& triples, std::size_t base_relations);

// ---------------------------------------------------------------------------
// Type signatures: |E| x 2|R|, head incidence in the first |R| columns, tail
// incidence in the last |R|, each row normalized to sum 1 (zero if isolated).

using TypeSignatures = Matrix;

TypeSignatures infer_type_signatures(const TripleList& train, const TripleList& valid,
                                     std::size_t num_entities, std::size_t num_relations);

// ---------------------------------------------------------------------------
// Synthetic family-tree graph

struct GeneratorConfig {
  std::size_t entities = 200;
  std::size_t depth = 4;
  double train_fraction = 0.8;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
};

namespace family {
inline constexpr RelationId kParentOf = 0;
inline constexpr RelationId kChildOf = 1;
inline constexpr RelationId kSiblingOf = 2;
inline constexpr RelationId kGrandparentOf = 3;
inline constexpr RelationId kSpouseOf = 4;
}  // namespace family

// Deterministic under `seed`. Emits parent_of, child_of, sibling_of,
// grandparent_of and spouse_of facts closed under their defining rules, split
// so that every valid/test entity and relation also occurs in train.
KnowledgeGraph generate_synthetic_kg(const GeneratorConfig& config, std::uint64_t seed);

// Every fact the generator produced, before splitting.
TripleList all_facts(const KnowledgeGraph& kg);

}  // namespace relate
