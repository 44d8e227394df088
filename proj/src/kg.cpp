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

#include "relate/kg.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "relate/error.hpp"
#include "relate/io.hpp"
#include "relate/rng.hpp"

namespace relate {

std::ostream& operator<<(std::ostream& os, const Triple& t) {
  return os << '(' << t.head << ", " << t.relation << ", " << t.tail << ')';
}

std::optional<EntityId> Vocabulary::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

EntityId Vocabulary::intern_entity(std::string_view name) {
  auto [it, inserted] =
      entity_index_.emplace(std::string(name), static_cast<EntityId>(entities_.size()));
  if (inserted) entities_.emplace_back(name);
  return it->second;
}

RelationId Vocabulary::intern_relation(std::string_view name) {
  auto [it, inserted] =
      relation_index_.emplace(std::string(name), static_cast<RelationId>(relations_.size()));
  if (inserted) relations_.emplace_back(name);
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {
const std::vector<EntityId> kNoEntities;

bool sorted_contains(const std::vector<EntityId>& v, EntityId x) {
  return std::binary_search(v.begin(), v.end(), x);
}
}  // namespace

const std::vector<EntityId>& FilterIndex::tails_of(EntityId head, RelationId relation) const {
  auto it = tails_.find(key(head, relation));
  return it == tails_.end() ? kNoEntities : it->second;
}

const std::vector<EntityId>& FilterIndex::heads_of(RelationId relation, EntityId tail) const {
  auto it = heads_.find(key(relation, tail));
  return it == heads_.end() ? kNoEntities : it->second;
}

bool FilterIndex::has_tail(EntityId head, RelationId relation, EntityId tail) const {
  return sorted_contains(tails_of(head, relation), tail);
}

bool FilterIndex::has_head(RelationId relation, EntityId tail, EntityId head) const {
  return sorted_contains(heads_of(relation, tail), head);
}

FilterIndex build_filter_index(const std::vector<const TripleList*>& splits) {
  FilterIndex index;
  for (const TripleList* split : splits) {
    for (const Triple& t : *split) {
      index.tails_[FilterIndex::key(t.head, t.relation)].push_back(t.tail);
      index.heads_[FilterIndex::key(t.relation, t.tail)].push_back(t.head);
    }
  }
  auto normalize = [](auto& map) {
    for (auto& [k, v] : map) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  };
  normalize(index.tails_);
  normalize(index.heads_);
  return index;
}

FilterIndex build_filter_index(const TripleList& train, const TripleList& valid,
                               const TripleList& test) {
  return build_filter_index({&train, &valid, &test});
}

void KnowledgeGraph::rebuild_filter() {
  if (!reciprocal) {
    filter = build_filter_index(train, valid, test);
    return;
  }
  const auto r = static_cast<RelationId>(base_relations);
  auto with_reverse = [r](const TripleList& split) {
    TripleList out = split;
    for (const Triple& t : split) {
      if (t.relation < r) out.push_back({t.tail, t.relation + r, t.head});
    }
    return out;
  };
  const TripleList valid_all = with_reverse(valid);
  const TripleList test_all = with_reverse(test);
  filter = build_filter_index({&train, &valid_all, &test_all});
}

// ---------------------------------------------------------------------------

LoadedTriples parse_triples(std::istream& in, Vocabulary vocab, VocabMode mode,
                            const std::string& source_name) {
  LoadedTriples result;
  std::set<Triple> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::string_view fields[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      const std::size_t end = tab == std::string::npos ? line.size() : tab;
      if (count < 3) fields[count] = std::string_view(line).substr(start, end - start);
      ++count;
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (count != 3) {
      throw ParseError(source_name + ": line " + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                       std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) {
        throw ParseError(source_name + ": line " + std::to_string(line_no) + ": empty field");
      }
    }

    Triple t;
    if (mode == VocabMode::kFixed) {
      auto h = vocab.find_entity(fields[0]);
      auto r = vocab.find_relation(fields[1]);
      auto tl = vocab.find_entity(fields[2]);
      if (!h) throw VocabularyError(source_name + ": line " + std::to_string(line_no) + ": unknown entity '" + std::string(fields[0]) + "'");
      if (!r) throw VocabularyError(source_name + ": line " + std::to_string(line_no) + ": unknown relation '" + std::string(fields[1]) + "'");
      if (!tl) throw VocabularyError(source_name + ": line " + std::to_string(line_no) + ": unknown entity '" + std::string(fields[2]) + "'");
      t = {*h, *r, *tl};
    } else {
      const EntityId h = vocab.intern_entity(fields[0]);
      const RelationId r = vocab.intern_relation(fields[1]);
      const EntityId tl = vocab.intern_entity(fields[2]);
      t = {h, r, tl};
    }
    if (seen.insert(t).second) {
      result.triples.push_back(t);
    } else {
      ++result.duplicates_dropped;
    }
  }
  result.vocab = std::move(vocab);
  return result;
}

LoadedTriples load_triples(const std::filesystem::path& path,
                           const std::optional<Vocabulary>& existing_vocab, bool extend_vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const VocabMode mode =
      existing_vocab && !extend_vocab ? VocabMode::kFixed : VocabMode::kGrow;
  return parse_triples(in, existing_vocab.value_or(Vocabulary{}), mode, path.string());
}

KnowledgeGraph load_dataset(const std::filesystem::path& dir, bool extend_vocab) {
  KnowledgeGraph kg;
  auto train = load_triples(dir / "train.txt");
  auto valid = load_triples(dir / "valid.txt", train.vocab, extend_vocab);
  auto test = load_triples(dir / "test.txt", valid.vocab, extend_vocab);
  kg.vocab = std::move(test.vocab);
  kg.train = std::move(train.triples);
  kg.valid = std::move(valid.triples);
  kg.test = std::move(test.triples);
  kg.base_relations = kg.vocab.num_relations();
  kg.rebuild_filter();
  return kg;
}

std::string format_triples(const TripleList& triples, const Vocabulary& vocab,
                           const std::string& header_comment) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  for (const Triple& t : triples) {
    out += vocab.entity_name(t.head);
    out += '\t';
    out += vocab.relation_name(t.relation);
    out += '\t';
    out += vocab.entity_name(t.tail);
    out += '\n';
  }
  return out;
}

std::string format_vocabulary(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += names[i];
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const KnowledgeGraph& kg,
                   const std::string& header_comment) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "train.txt", format_triples(kg.train, kg.vocab, header_comment));
  write_file_atomic(dir / "valid.txt", format_triples(kg.valid, kg.vocab, header_comment));
  write_file_atomic(dir / "test.txt", format_triples(kg.test, kg.vocab, header_comment));
  write_file_atomic(dir / "entities.tsv", format_vocabulary(kg.vocab.entity_names()));
  write_file_atomic(dir / "relations.tsv", format_vocabulary(kg.vocab.relation_names()));
}

// ---------------------------------------------------------------------------

std::string_view category_name(CategoryKind kind) {
  switch (kind) {
    case CategoryKind::kOneToOne: return "1-to-1";
    case CategoryKind::kOneToMany: return "1-to-N";
    case CategoryKind::kManyToOne: return "N-to-1";
    case CategoryKind::kManyToMany: return "N-to-N";
  }
  return "?";
}

std::map<RelationId, RelationCategory> classify_relations(const TripleList& train) {
  struct Counts {
    std::size_t triples = 0;
    std::unordered_set<EntityId> heads;
    std::unordered_set<EntityId> tails;
  };
  std::map<RelationId, Counts> counts;
  std::set<Triple> unique(train.begin(), train.end());
  for (const Triple& t : unique) {
    auto& c = counts[t.relation];
    ++c.triples;
    c.heads.insert(t.head);
    c.tails.insert(t.tail);
  }
  std::map<RelationId, RelationCategory> out;
  for (const auto& [r, c] : counts) {
    RelationCategory cat;
    cat.avg_tails_per_head = static_cast<double>(c.triples) / static_cast<double>(c.heads.size());
    cat.avg_heads_per_tail = static_cast<double>(c.triples) / static_cast<double>(c.tails.size());
    const bool many_tails = cat.avg_tails_per_head > kCategoryThreshold;
    const bool many_heads = cat.avg_heads_per_tail > kCategoryThreshold;
    if (!many_heads && !many_tails) {
      cat.kind = CategoryKind::kOneToOne;
    } else if (!many_heads && many_tails) {
      cat.kind = CategoryKind::kOneToMany;
    } else if (many_heads && !many_tails) {
      cat.kind = CategoryKind::kManyToOne;
    } else {
      cat.kind = CategoryKind::kManyToMany;
    }
    out.emplace(r, cat);
  }
  return out;
}

// ---------------------------------------------------------------------------

KnowledgeGraph augment_reciprocal(const KnowledgeGraph& kg) {
  if (kg.reciprocal) return kg;
  KnowledgeGraph out;
  out.vocab = kg.vocab;
  const auto r_count = static_cast<RelationId>(kg.vocab.num_relations());
  for (RelationId r = 0; r < r_count; ++r) {
    out.vocab.intern_relation(kg.vocab.relation_name(r) + "_reverse");
  }
  out.train = kg.train;
  std::set<Triple> seen(kg.train.begin(), kg.train.end());
  for (const Triple& t : kg.train) {
    const Triple rev{t.tail, t.relation + r_count, t.head};
    if (seen.insert(rev).second) out.train.push_back(rev);
  }
  out.valid = kg.valid;
  out.test = kg.test;
  out.base_relations = r_count;
  out.reciprocal = true;
  out.rebuild_filter();
  return out;
}

TripleList strip_reciprocal(const TripleList& triples, std::size_t base_relations) {
  TripleList out;
  for (const Triple& t : triples) {
    if (t.relation < base_relations) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------

TypeSignatures infer_type_signatures(const TripleList& train, const TripleList& valid,
                                     std::size_t num_entities, std::size_t num_relations) {
  TypeSignatures sig(num_entities, 2 * num_relations);
  for (const TripleList* split : {&train, &valid}) {
    for (const Triple& t : *split) {
      sig(t.head, t.relation) += 1.0;
      sig(t.tail, num_relations + t.relation) += 1.0;
    }
  }
  for (std::size_t e = 0; e < num_entities; ++e) {
    auto row = sig.row(e);
    double total = 0.0;
    for (double v : row) total += v;
    if (total > 0.0) {
      for (double& v : row) v /= total;
    }
  }
  return sig;
}

// ---------------------------------------------------------------------------

namespace {

struct Couple {
  EntityId a;
  EntityId b;
  std::size_t generation;
};

}  // namespace

KnowledgeGraph generate_synthetic_kg(const GeneratorConfig& config, std::uint64_t seed) {
  const double fsum = config.train_fraction + config.valid_fraction + config.test_fraction;
  if (config.train_fraction < 0 || config.valid_fraction < 0 || config.test_fraction < 0 ||
      fsum > 1.0 + 1e-12) {
    throw ConfigError("split fractions must be non-negative and sum to at most 1");
  }
  if (config.entities < 4) throw ConfigError("synthetic graph needs at least 4 entities");
  if (config.depth < 2) throw ConfigError("synthetic graph depth must be at least 2");

  Rng rng = make_rng(seed, Stream::kGenerator);
  const std::size_t n = config.entities;

  std::vector<std::vector<EntityId>> parents(n);
  std::vector<std::vector<EntityId>> children_of_couple;
  std::vector<std::pair<EntityId, EntityId>> spouses;
  std::size_t created = 0;
  auto new_person = [&]() { return static_cast<EntityId>(created++); };

  std::vector<Couple> queue;
  std::size_t head = 0;
  while (created < n) {
    if (head == queue.size()) {
      if (n - created < 2) {
        // A lone remaining person joins the most recent couple as a child.
        const EntityId c = new_person();
        const Couple& last = queue.back();
        parents[c] = {last.a, last.b};
        children_of_couple.back().push_back(c);
        break;
      }
      const EntityId a = new_person();
      const EntityId b = new_person();
      spouses.emplace_back(a, b);
      queue.push_back({a, b, 0});
      children_of_couple.emplace_back();
      continue;
    }
    const Couple couple = queue[head];
    const std::size_t couple_index = head;
    ++head;
    if (couple.generation + 1 >= config.depth) continue;
    const std::size_t kids = 2 + uniform_index(rng, 2);
    for (std::size_t k = 0; k < kids && created < n; ++k) {
      const EntityId c = new_person();
      parents[c] = {couple.a, couple.b};
      children_of_couple[couple_index].push_back(c);
      if (couple.generation + 2 < config.depth && created < n) {
        const EntityId s = new_person();
        spouses.emplace_back(c, s);
        queue.push_back({c, s, couple.generation + 1});
        children_of_couple.emplace_back();
      }
    }
  }

  std::set<Triple> facts;
  using namespace family;
  for (EntityId c = 0; c < n; ++c) {
    for (EntityId p : parents[c]) {
      facts.insert({p, kParentOf, c});
      facts.insert({c, kChildOf, p});
    }
  }
  for (const auto& kids : children_of_couple) {
    for (EntityId x : kids) {
      for (EntityId y : kids) {
        if (x != y) facts.insert({x, kSiblingOf, y});
      }
    }
  }
  for (const auto& [a, b] : spouses) {
    facts.insert({a, kSpouseOf, b});
    facts.insert({b, kSpouseOf, a});
  }
  for (EntityId c = 0; c < n; ++c) {
    for (EntityId p : parents[c]) {
      for (EntityId g : parents[p]) facts.insert({g, kGrandparentOf, c});
    }
  }

  KnowledgeGraph kg;
  char name[32];
  for (std::size_t e = 0; e < n; ++e) {
    std::snprintf(name, sizeof(name), "person_%03zu", e);
    kg.vocab.intern_entity(name);
  }
  for (const char* r : {"parent_of", "child_of", "sibling_of", "grandparent_of", "spouse_of"}) {
    kg.vocab.intern_relation(r);
  }

  TripleList all(facts.begin(), facts.end());
  Rng split_rng = make_rng(seed, Stream::kSplit);
  shuffle(all, split_rng);
  const auto n_train = static_cast<std::size_t>(config.train_fraction * static_cast<double>(all.size()) + 0.5);
  const auto n_valid = static_cast<std::size_t>(config.valid_fraction * static_cast<double>(all.size()) + 0.5);
  const std::size_t rest = all.size() - std::min(all.size(), n_train + n_valid);
  // Fractions summing to 1 assign every fact; rounding leftovers go to test.
  const std::size_t n_test =
      std::abs(fsum - 1.0) <= 1e-12
          ? rest
          : std::min(rest, static_cast<std::size_t>(
                               config.test_fraction * static_cast<double>(all.size()) + 0.5));
  kg.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, all.size())));
  const std::size_t v_end = std::min(all.size(), n_train + n_valid);
  kg.valid.assign(all.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, all.size())),
                  all.begin() + static_cast<std::ptrdiff_t>(v_end));
  kg.test.assign(all.begin() + static_cast<std::ptrdiff_t>(v_end),
                 all.begin() + static_cast<std::ptrdiff_t>(v_end + n_test));

  // Move held-out facts whose entities or relation never occur in train.
  std::vector<char> entity_seen(n, 0);
  std::vector<char> relation_seen(kg.vocab.num_relations(), 0);
  for (const Triple& t : kg.train) {
    entity_seen[t.head] = entity_seen[t.tail] = 1;
    relation_seen[t.relation] = 1;
  }
  bool moved = true;
  while (moved) {
    moved = false;
    for (TripleList* split : {&kg.valid, &kg.test}) {
      TripleList keep;
      for (const Triple& t : *split) {
        if (entity_seen[t.head] && entity_seen[t.tail] && relation_seen[t.relation]) {
          keep.push_back(t);
        } else {
          kg.train.push_back(t);
          entity_seen[t.head] = entity_seen[t.tail] = 1;
          relation_seen[t.relation] = 1;
          moved = true;
        }
      }
      *split = std::move(keep);
    }
  }

  kg.base_relations = kg.vocab.num_relations();
  kg.rebuild_filter();
  return kg;
}

TripleList all_facts(const KnowledgeGraph& kg) {
  std::set<Triple> s;
  for (const TripleList* split : {&kg.train, &kg.valid, &kg.test}) {
    for (const Triple& t : *split) {
      if (t.relation < kg.base_relations) s.insert(t);
    }
  }
  return {s.begin(), s.end()};
}

}  // namespace relate
