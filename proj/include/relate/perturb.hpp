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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relate/kg.hpp"
#include "relate/models.hpp"
#include "relate/training.hpp"

namespace relate {

enum class PerturbationKind {
  kEdgeAddition,
  kEdgeDeletion,
  kInverseRelationFlip,
  kRelationSwap,
  kCounterfactualInjection,
};

inline constexpr PerturbationKind kAllPerturbations[] = {
    PerturbationKind::kEdgeAddition, PerturbationKind::kEdgeDeletion,
    PerturbationKind::kInverseRelationFlip, PerturbationKind::kRelationSwap,
    PerturbationKind::kCounterfactualInjection};

// edge_addition, edge_deletion, inverse_flip, relation_swap, counterfactual.
std::string_view perturbation_name(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(std::string_view name);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kEdgeDeletion;
  double ratio = 0.1;
  std::uint64_t seed = 0;
  // InverseRelationFlip only: flip (h, first, t) into (t, second, h) and vice
  // versa instead of reversing within the same relation.
  std::optional<std::pair<RelationId, RelationId>> inverse_pair;
  // CounterfactualInjection only.
  double plausibility_threshold = 0.5;
  std::size_t attempts_per_edit = 100;
};

// max(1, round(ratio * train_size)). Throws SpecError unless 0 < ratio <= 1.
std::size_t edit_budget(double ratio, std::size_t train_size);

enum class EditOp { kAdd, kDelete, kModify, kMerge };

std::string_view edit_op_name(EditOp op);

struct Edit {
  EditOp op = EditOp::kAdd;
  std::optional<Triple> before;
  std::optional<Triple> after;
};

struct PerturbationResult {
  TripleList train;
  std::vector<Edit> log;
  std::size_t budget = 0;
};

// Perturbs `train`; the rest of `kg` (valid, test, vocabulary) is only read.
// `signatures` is required for CounterfactualInjection. A flip or swap whose
// result is already present is dropped and logged as kMerge.
PerturbationResult apply_perturbation(const TripleList& train, const KnowledgeGraph& kg,
                                      const PerturbationSpec& spec,
                                      const TypeSignatures* signatures = nullptr);

// op, before_head, before_relation, before_tail, after_head, after_relation,
// after_tail; absent sides are empty.
std::string edit_log_to_tsv(const std::vector<Edit>& log, const Vocabulary& vocab);

// Cosine similarity; 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Degradation experiment

struct RobustnessCell {
  std::string model;
  std::optional<PerturbationKind> kind;  // empty for the clean baseline row
  double base_mrr = 0.0;
  double base_hits10 = 0.0;
  double perturbed_mrr = 0.0;
  double perturbed_hits10 = 0.0;
  double delta_mrr = 0.0;      // base - perturbed
  double delta_mrr_pct = 0.0;  // NaN when base is 0
  double delta_hits10 = 0.0;
  double delta_hits10_pct = 0.0;
};

struct RobustnessReport {
  std::vector<RobustnessCell> cells;
};

RobustnessCell make_cell(const std::string& model, std::optional<PerturbationKind> kind,
                         double base_mrr, double base_hits10, double perturbed_mrr,
                         double perturbed_hits10);

struct RobustnessOptions {
  // Metrics are averaged over one run per seed. Run i trains with seed
  // seeds[i] and perturbs with spec.seed + i.
  std::vector<std::uint64_t> seeds;
  // Optional per-edit logs, written as the experiment proceeds.
  std::function<void(ModelKind, const PerturbationSpec&, std::size_t run,
                     const PerturbationResult&)>
      on_perturbation;
};

// Trains each model on the clean graph once per seed, then once per (spec,
// seed) on the perturbed training split, and evaluates every run on the
// unchanged test split under the clean graph's filter.
RobustnessReport robustness_experiment(const std::vector<ModelKind>& models,
                                       const KnowledgeGraph& kg,
                                       const std::vector<PerturbationSpec>& specs,
                                       const TrainConfig& config,
                                       const RobustnessOptions& options = {});

// Matrix layout: one row per perturbation, two columns (percent delta MRR and
// percent delta Hits@10) per model.
std::string robustness_to_csv(const RobustnessReport& report);
// One row per cell with every field.
std::string robustness_to_long_csv(const RobustnessReport& report);

}  // namespace relate
