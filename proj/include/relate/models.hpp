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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relate/kg.hpp"
#include "relate/tensor.hpp"

namespace relate {

// Common interface of every scoring model. Higher score means more plausible.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t num_entities() const = 0;
  virtual std::size_t num_relations() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double gamma() const = 0;

  virtual double score(const Triple& t) const = 0;

  // out[e] = score(head, relation, e); out.size() must equal num_entities().
  virtual void score_tails(EntityId head, RelationId relation, std::span<double> out) const;
  // out[e] = score(e, relation, tail).
  virtual void score_heads(RelationId relation, EntityId tail, std::span<double> out) const;

  // Adds coeff * d score(t) / d theta into `grad`.
  virtual void accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const = 0;
  // Marks every parameter row that score(t) reads, without changing values.
  virtual void touch_rows(const Triple& t, Gradient& grad) const = 0;

  virtual ParameterSet& parameters() = 0;
  virtual const ParameterSet& parameters() const = 0;

  virtual std::unique_ptr<ScoreModel> clone() const = 0;
};

struct WeightedTriple {
  Triple triple;
  double weight = 1.0;
  double sign = 1.0;
};

// Accumulates d(sum weight * sign * score)/d theta.
void accumulate_gradient(const ScoreModel& model, std::span<const WeightedTriple> entries,
                         Gradient& grad);

// ---------------------------------------------------------------------------
// RelatE

double softplus(double x);
double softplus_inverse(double y);
double sigmoid(double x);

// Learned relation-conditioned type bias. The signatures are fixed data; the
// prototypes live in the model's parameters.
struct TypeContext {
  std::shared_ptr<const TypeSignatures> signatures;
  double type_lambda = 0.0;
  double warm = 1.0;
};

struct RelateInit {
  std::size_t dim = 64;
  double gamma = 12.0;
  double init_relation_width = 0.03;
  double modulus_weight = 1.0;
};

// Phase/modulus model. Every phase and modulus vector has dim/2 coordinates;
// widths, biases and the two per-relation weights are stored pre-activation.
class RelateModel final : public ScoreModel {
 public:
  // Tensor slots in parameters(), in checkpoint order.
  enum Slot : std::size_t {
    kEntityPhase,
    kEntityModulus,
    kRelationPhase,
    kRelationModulus,
    kRelationBiasRaw,
    kRelationWidthRaw,
    kLambdaModRaw,
    kLambdaPhaseRaw,
    kHeadTypeProto,
    kTailTypeProto,
    kNumSlots,
  };

  // All-zero parameters of the right shapes. Throws ConfigError on odd or
  // non-positive dim.
  RelateModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim, double gamma);

  static RelateModel init(std::size_t num_entities, std::size_t num_relations,
                          const RelateInit& init, std::uint64_t seed);

  std::string_view kind() const override { return "relate"; }
  std::size_t num_entities() const override { return num_entities_; }
  std::size_t num_relations() const override { return num_relations_; }
  std::size_t dim() const override { return dim_; }
  std::size_t width() const { return dim_ / 2; }
  double gamma() const override { return gamma_; }
  void set_gamma(double g) { gamma_ = g; }

  // Modulus term: sum_i w_i |h_i (r_i + b_i) - t_i (1 - b_i)|.
  double modulus_score(const Triple& t) const;
  // Phase term: sum_i |sin((h_i + r_i - t_i) / 2)|.
  double phase_score(const Triple& t) const;
  // gamma - (lambda_m * modulus + lambda_p * phase), without the type term.
  double base_score(const Triple& t) const;
  double type_bias(const Triple& t) const;
  double score(const Triple& t) const override;

  void score_tails(EntityId head, RelationId relation, std::span<double> out) const override;
  void score_heads(RelationId relation, EntityId tail, std::span<double> out) const override;

  void accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const override;
  void touch_rows(const Triple& t, Gradient& grad) const override;

  void set_type_context(std::optional<TypeContext> ctx) { type_ctx_ = ctx; }
  const std::optional<TypeContext>& type_context() const { return type_ctx_; }

  ParameterSet& parameters() override { return params_; }
  const ParameterSet& parameters() const override { return params_; }
  Matrix& tensor(Slot s) { return params_[s].value; }
  const Matrix& tensor(Slot s) const { return params_[s].value; }

  std::unique_ptr<ScoreModel> clone() const override;

 private:
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::size_t dim_;
  double gamma_;
  ParameterSet params_;
  std::optional<TypeContext> type_ctx_;
};

// ---------------------------------------------------------------------------
// Baselines

// gamma - ||h + r - t||_1.
class TransEModel final : public ScoreModel {
 public:
  enum Slot : std::size_t { kEntity, kRelation };

  TransEModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim, double gamma);
  static TransEModel init(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                          double gamma, std::uint64_t seed);

  std::string_view kind() const override { return "transe"; }
  std::size_t num_entities() const override { return num_entities_; }
  std::size_t num_relations() const override { return num_relations_; }
  std::size_t dim() const override { return dim_; }
  double gamma() const override { return gamma_; }

  double score(const Triple& t) const override;
  void accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const override;
  void touch_rows(const Triple& t, Gradient& grad) const override;

  ParameterSet& parameters() override { return params_; }
  const ParameterSet& parameters() const override { return params_; }
  std::unique_ptr<ScoreModel> clone() const override;

 private:
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::size_t dim_;
  double gamma_;
  ParameterSet params_;
};

// gamma - sum_k ||rot(theta_k) h_k - t_k||_2 over coordinate pairs. Entity rows
// hold the dim/2 real parts followed by the dim/2 imaginary parts.
class RotatEModel final : public ScoreModel {
 public:
  enum Slot : std::size_t { kEntity, kRelationPhase };

  RotatEModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim, double gamma);
  static RotatEModel init(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                          double gamma, std::uint64_t seed);

  std::string_view kind() const override { return "rotate"; }
  std::size_t num_entities() const override { return num_entities_; }
  std::size_t num_relations() const override { return num_relations_; }
  std::size_t dim() const override { return dim_; }
  double gamma() const override { return gamma_; }

  double score(const Triple& t) const override;
  void accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const override;
  void touch_rows(const Triple& t, Gradient& grad) const override;

  ParameterSet& parameters() override { return params_; }
  const ParameterSet& parameters() const override { return params_; }
  std::unique_ptr<ScoreModel> clone() const override;

 private:
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::size_t dim_;
  double gamma_;
  ParameterSet params_;
};

// ---------------------------------------------------------------------------
// Construction by name, checkpoints and CSV export

enum class ModelKind { kRelate, kTransE, kRotatE };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

struct ModelInit {
  ModelKind kind = ModelKind::kRelate;
  std::size_t dim = 64;
  double gamma = 12.0;
  double init_relation_width = 0.03;
  double modulus_weight = 1.0;
};

std::unique_ptr<ScoreModel> make_model(const ModelInit& init, std::size_t num_entities,
                                       std::size_t num_relations, std::uint64_t seed);

// Versioned JSON container: kind, dims, gamma, every tensor, and for RelatE
// the type-bias lambda and warm factor. Signatures are data, not parameters:
// a restored type context has null signatures until the caller attaches them.
// Doubles are written in shortest round-trip form, so load(save(m)) is
// bit-exact.
std::string serialize_checkpoint(const ScoreModel& model);
std::unique_ptr<ScoreModel> deserialize_checkpoint(const std::string& text);
void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path);
std::unique_ptr<ScoreModel> load_checkpoint(const std::filesystem::path& path);

// One row per entity: name, dim/2 phases, dim/2 moduli, at 17 significant
// digits with a header row.
std::string format_embeddings_csv(const RelateModel& model, const Vocabulary& vocab);
void export_embeddings(const RelateModel& model, const Vocabulary& vocab,
                       const std::filesystem::path& path);

struct EmbeddingTable {
  std::vector<std::string> names;
  Matrix phase;
  Matrix modulus;
};

EmbeddingTable parse_embeddings_csv(const std::string& text);
EmbeddingTable import_embeddings(const std::filesystem::path& path);

}  // namespace relate
