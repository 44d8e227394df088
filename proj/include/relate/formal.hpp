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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relate/kg.hpp"
#include "relate/rng.hpp"
#include "relate/tensor.hpp"

namespace relate {

// Truth assignment over every (head, relation, tail) of a small graph.
class TruthTable {
 public:
  TruthTable(std::size_t num_entities, std::size_t num_relations, bool fill = true);

  // Each triple true with probability 1/2.
  static TruthTable random(std::size_t num_entities, std::size_t num_relations, Rng& rng);

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t size() const { return truth_.size(); }

  // (head * |R| + relation) * |E| + tail.
  std::size_t index(const Triple& t) const;
  Triple triple(std::size_t index) const;

  bool get(const Triple& t) const { return truth_[index(t)] != 0; }
  void set(const Triple& t, bool value) { truth_[index(t)] = value ? 1 : 0; }

  TripleList false_triples() const;

 private:
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::vector<char> truth_;
};

// Scoring parameters with unconstrained widths and biases, used only for
// mechanical proofs. Every vector has `width` coordinates; lambdas are 1.
struct FormalParams {
  std::size_t width = 0;
  Matrix entity_phase;       // |E| x width
  Matrix entity_modulus;     // |E| x width
  Matrix relation_phase;     // |R| x width
  Matrix relation_modulus;   // |R| x width
  Matrix relation_bias;      // |R| x width, used as b directly
  Matrix relation_width;     // |R| x width, used as w directly

  FormalParams() = default;
  FormalParams(std::size_t num_entities, std::size_t num_relations, std::size_t width);

  std::size_t num_entities() const { return entity_phase.rows(); }
  std::size_t num_relations() const { return relation_phase.rows(); }
};

// gamma - sum_i w_i |h_i (r_i + b_i) - t_i (1 - b_i)| - sum_i |sin((h + r - t)_i / 2)|.
double formal_score(const FormalParams& params, const Triple& t, double gamma);

struct SeparationCertificate {
  FormalParams params;
  TruthTable truth{0, 0};
  double gamma = 0.0;
  std::vector<double> scores;  // indexed like TruthTable::index
  double min_true_score = 0.0;
  double max_false_score = 0.0;
  // True triples at or below gamma and false triples at or above 0.
  TripleList offending;
  bool valid = false;
  std::size_t surgeries = 0;
};

// Base case: zero phases, unit moduli, relation modulus 2, bias 0 and width -1
// on every coordinate, so every triple scores gamma + |E||R|. Then, for each
// false triple (h, r, t) in index order, on coordinate r * |E| + t:
//   1. the tail's modulus += C,
//   2. every other entity's modulus -= C,
//   3. relation r's width and bias += C,
//   4. every other relation's width += C,
// with C = max(current score, 0) / (smallest |width| at that coordinate) + gamma + 1.
// The result is verified exhaustively; failures are reported, not repaired.
SeparationCertificate construct_expressive_embedding(const TruthTable& truth, double gamma);

// The base case alone, before any surgery.
FormalParams expressive_base_case(std::size_t num_entities, std::size_t num_relations);

// Recomputes every score from the certificate's parameters and checks the
// separation conditions and the stored table (to 1e-9).
bool reverify_certificate(const SeparationCertificate& cert);

std::string certificate_to_json(const SeparationCertificate& cert, const Vocabulary* vocab = nullptr);

// ---------------------------------------------------------------------------
// Inference patterns

struct FormalRelation {
  std::vector<double> phase;
  std::vector<double> modulus;
  std::vector<double> bias;
  std::vector<double> width;
};

FormalRelation random_relation(std::size_t width, Rng& rng);

FormalRelation make_symmetric(std::size_t width);
FormalRelation make_inverse(const FormalRelation& r1);
FormalRelation make_composed(const FormalRelation& r1, const FormalRelation& r2);
// Same transform, widths divided by `scale` (> 1): the super relation accepts
// every modulus pair within the sub relation's mismatch bound.
FormalRelation make_hierarchy(const FormalRelation& sub, double scale);
// Phases pi/2 on the first coordinate for r1 and on the second for r2.
std::pair<FormalRelation, FormalRelation> make_disjoint(std::size_t width);

// sum_i |sin((h + r - t)_i / 2)|.
double formal_phase_score(std::span<const double> head, const FormalRelation& r,
                          std::span<const double> tail);
// sum_i w_i |h_i (r_i + b_i) - t_i (1 - b_i)|.
double formal_modulus_score(std::span<const double> head, const FormalRelation& r,
                            std::span<const double> tail);

enum class PatternKind { kSymmetry, kAntiSymmetry, kInversion, kHierarchy, kComposition, kDisjointness };

inline constexpr PatternKind kAllPatterns[] = {
    PatternKind::kSymmetry,    PatternKind::kAntiSymmetry, PatternKind::kInversion,
    PatternKind::kHierarchy,   PatternKind::kComposition,  PatternKind::kDisjointness};

std::string_view pattern_name(PatternKind kind);

struct PatternWitness {
  PatternKind kind = PatternKind::kSymmetry;
  std::vector<FormalRelation> relations;
  std::string identity;  // the checked statement
  bool formalized = false;  // our checkable form of a claim stated without a score bound
  std::size_t trials = 0;
  double tolerance = 0.0;
  // Largest identity violation; for anti-symmetry the largest gap found and
  // for disjointness the smallest r2 phase score over r1-aligned pairs.
  double max_residual = 0.0;
  bool passed = false;
  std::string counterexample;
};

// Relations for `kind` built with the make_* constructions from random bases:
// symmetry [r], anti-symmetry [r], inversion [r1, r2], hierarchy [sub, super],
// composition [r1, r2, r3], disjointness [r1, r2].
std::vector<FormalRelation> pattern_relations(PatternKind kind, std::size_t width, Rng& rng);

// Checks the identity for `kind` over `trials` random or constructed entity
// embeddings. `relations` is laid out as in pattern_relations.
PatternWitness verify_pattern(PatternKind kind, const std::vector<FormalRelation>& relations,
                              std::size_t trials, double tolerance, std::uint64_t seed);

std::string witness_to_json(const PatternWitness& witness);

}  // namespace relate
