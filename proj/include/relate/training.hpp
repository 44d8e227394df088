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
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relate/kg.hpp"
#include "relate/models.hpp"
#include "relate/rng.hpp"
#include "relate/tensor.hpp"

namespace relate {

enum class CorruptionPolicy { kUniform, kHeadOnly, kTailOnly };

struct TrainConfig {
  std::size_t dim = 64;
  double lr = 1e-3;
  // Score margin gamma.
  double margin = 12.0;
  // Hinge margin; the score margin is used when unset.
  std::optional<double> loss_margin;
  double adv_temperature = 1.0;
  std::size_t neg_samples = 64;
  std::size_t batch_size = 128;
  std::size_t max_steps = 2000;
  std::size_t valid_interval = 200;
  std::size_t patience = 5;
  double l3_weight = 1e-5;
  double type_lambda = 0.05;
  // 10% of max_steps when unset.
  std::optional<std::size_t> warmup_steps;
  double init_relation_width = 0.03;
  double modulus_weight = 1.0;
  std::uint64_t seed = 0;
  bool reciprocal = false;
  bool filter_negatives = false;
  double clip_norm = 10.0;
  std::size_t workers = 1;

  // Not settable from config files.
  CorruptionPolicy corruption = CorruptionPolicy::kUniform;
  // Validation triples scored at each validation point (two queries each).
  std::size_t valid_subsample = 500;

  double effective_loss_margin() const { return loss_margin.value_or(margin); }
  std::size_t effective_warmup_steps() const { return warmup_steps.value_or(max_steps / 10); }

  // Throws ConfigError naming the first violated constraint.
  void validate() const;
};

// Flat key=value text. '#' starts a comment; blank lines are ignored. Every
// error names the key and the 1-based line.
TrainConfig parse_config(const std::string& text, const std::string& source = "<config>");
TrainConfig load_config(const std::filesystem::path& path);
// key=value lines for every file key, parseable by parse_config.
std::string format_config(const TrainConfig& config);

// ---------------------------------------------------------------------------
// Loss pieces

// n_neg corruptions per positive, positive-major. The replacement is uniform
// over entities other than the one it replaces. With `known` set, candidates
// found there are redrawn (up to a fixed attempt budget).
TripleList sample_negatives(std::span<const Triple> positives, std::size_t n_neg,
                            std::size_t num_entities, CorruptionPolicy policy, Rng& rng,
                            const FilterIndex* known = nullptr);

// softmax(alpha * scores).
std::vector<double> adversarial_weights(std::span<const double> neg_scores, double alpha);

// sum_j weights_j * max(0, f_negs_j - f_pos + margin).
double margin_loss(double f_pos, std::span<const double> f_negs, std::span<const double> weights,
                   double margin);

// weight * sum |theta|^3 over every entry.
double l3_penalty(const ParameterSet& params, double weight);
// Adds 3 * weight * sign(theta) * theta^2 for every entry into `grad`.
void accumulate_l3_gradient(const ParameterSet& params, double weight, Gradient& grad);
// Penalty and gradient restricted to the rows already touched in `grad`.
double l3_penalty_touched(const ParameterSet& params, double weight, Gradient& grad);

// warm * type_lambda * (sig(h) . head_proto + sig(t) . tail_proto).
double type_bias_term(std::span<const double> head_signature,
                      std::span<const double> tail_signature,
                      std::span<const double> head_proto, std::span<const double> tail_proto,
                      double warm, double type_lambda);

// min(1, step / warmup_steps); 1 when warmup_steps is 0.
double warm_factor(std::size_t step, std::size_t warmup_steps);

// ---------------------------------------------------------------------------
// Objective

struct LossOptions {
  double loss_margin = 12.0;
  double l3_weight = 0.0;
};

struct ObjectiveValue {
  double margin = 0.0;  // mean over positives
  double l3 = 0.0;
  double total() const { return margin + l3; }
};

// Self-adversarial weights for each positive's block of negatives, computed
// from the current scores and treated as constants.
std::vector<double> batch_adversarial_weights(const ScoreModel& model,
                                              std::span<const Triple> positives,
                                              std::span<const Triple> negatives, double alpha);

// Mean weighted margin loss over positives plus L3 over every row the batch
// reads. `negatives` holds negatives.size() / positives.size() entries per
// positive and `weights` is parallel to it. When `grad` is given it receives
// the gradient of the returned total.
ObjectiveValue batch_objective(const ScoreModel& model, std::span<const Triple> positives,
                               std::span<const Triple> negatives, std::span<const double> weights,
                               const LossOptions& options, Gradient* grad,
                               std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(const ParameterSet& like);
};

// One bias-corrected Adam update. Sparse mode visits only rows touched in
// `grad`; dense mode visits every row. Throws InternalError on shape mismatch.
void adam_step(AdamState& state, ParameterSet& params, const Gradient& grad, double lr,
               bool dense = false);

// ---------------------------------------------------------------------------
// Training loop

struct HistoryEntry {
  std::size_t step = 0;
  double loss = 0.0;       // running mean since the previous entry
  double valid_mrr = 0.0;  // NaN without a validation split
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<HistoryEntry> entries;
};

std::string history_to_csv(const TrainHistory& history, bool include_timing = true);

struct TrainResult {
  std::unique_ptr<ScoreModel> model;  // best validation checkpoint
  TrainHistory history;
  std::size_t best_step = 0;
  double best_valid_mrr = 0.0;
  std::size_t steps_run = 0;
};

// Trains `kind` on kg.train with early stopping on a fixed validation
// subsample. Reciprocal augmentation, when wanted, must already be applied.
// `signatures` enables the type-bias term for RelatE (null disables it).
// Throws TrainingAbort on a non-finite loss or gradient.
TrainResult train(const TrainConfig& config, const KnowledgeGraph& kg,
                  std::shared_ptr<const TypeSignatures> signatures,
                  ModelKind kind = ModelKind::kRelate);

struct PreparedGraph {
  KnowledgeGraph graph;
  std::shared_ptr<const TypeSignatures> signatures;  // null when type_lambda is 0
};

// Applies reciprocal augmentation when configured and infers type signatures
// from the (augmented) train and valid splits.
PreparedGraph prepare_graph(const KnowledgeGraph& kg, const TrainConfig& config);

ModelInit model_init_from(const TrainConfig& config, ModelKind kind);

}  // namespace relate
