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

#include "relate/models.hpp"

#include <cmath>
#include <numbers>

#include "relate/error.hpp"
#include "relate/rng.hpp"

namespace relate {

void ScoreModel::score_tails(EntityId head, RelationId relation, std::span<double> out) const {
  for (std::size_t e = 0; e < out.size(); ++e) {
    out[e] = score({head, relation, static_cast<EntityId>(e)});
  }
}

void ScoreModel::score_heads(RelationId relation, EntityId tail, std::span<double> out) const {
  for (std::size_t e = 0; e < out.size(); ++e) {
    out[e] = score({static_cast<EntityId>(e), relation, tail});
  }
}

void accumulate_gradient(const ScoreModel& model, std::span<const WeightedTriple> entries,
                         Gradient& grad) {
  for (const auto& e : entries) {
    model.accumulate_gradient(e.triple, e.weight * e.sign, grad);
  }
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (y <= 0.0) throw ConfigError("softplus inverse needs a positive value");
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_dim(std::size_t dim) {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("dim must be even and positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// RelateModel

RelateModel::RelateModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                         double gamma)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim), gamma_(gamma) {
  check_dim(dim);
  const std::size_t k = dim / 2;
  params_.add("entity_phase", Matrix(num_entities, k));
  params_.add("entity_modulus", Matrix(num_entities, k));
  params_.add("relation_phase", Matrix(num_relations, k));
  params_.add("relation_modulus", Matrix(num_relations, k));
  params_.add("relation_bias_raw", Matrix(num_relations, k));
  params_.add("relation_width_raw", Matrix(num_relations, k));
  params_.add("lambda_mod_raw", Matrix(num_relations, 1));
  params_.add("lambda_phase_raw", Matrix(num_relations, 1));
  params_.add("head_type_proto", Matrix(num_relations, 2 * num_relations));
  params_.add("tail_type_proto", Matrix(num_relations, 2 * num_relations));
}

RelateModel RelateModel::init(std::size_t num_entities, std::size_t num_relations,
                              const RelateInit& init, std::uint64_t seed) {
  check_dim(init.dim);
  if (init.init_relation_width <= 0.0) throw ConfigError("init_relation_width must be positive");
  if (init.modulus_weight <= 0.0) throw ConfigError("modulus_weight must be positive");
  RelateModel m(num_entities, num_relations, init.dim, init.gamma);
  Rng rng = make_rng(seed, Stream::kInit);
  constexpr double pi = std::numbers::pi;
  for (double& v : m.tensor(kEntityPhase).flat()) v = uniform(rng, -pi, pi);
  for (double& v : m.tensor(kEntityModulus).flat()) v = uniform(rng, 0.5, 1.5);
  for (double& v : m.tensor(kRelationPhase).flat()) v = uniform(rng, -pi, pi);
  for (double& v : m.tensor(kRelationModulus).flat()) v = uniform(rng, 0.5, 1.5);
  m.tensor(kRelationBiasRaw).fill(0.0);
  m.tensor(kRelationWidthRaw).fill(softplus_inverse(init.init_relation_width));
  m.tensor(kLambdaModRaw).fill(softplus_inverse(init.modulus_weight));
  m.tensor(kLambdaPhaseRaw).fill(softplus_inverse(1.0));
  return m;
}

double RelateModel::modulus_score(const Triple& t) const {
  const auto h = tensor(kEntityModulus).row(t.head);
  const auto tl = tensor(kEntityModulus).row(t.tail);
  const auto r = tensor(kRelationModulus).row(t.relation);
  const auto braw = tensor(kRelationBiasRaw).row(t.relation);
  const auto wraw = tensor(kRelationWidthRaw).row(t.relation);
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double b = sigmoid(braw[i]);
    s += softplus(wraw[i]) * std::abs(h[i] * (r[i] + b) - tl[i] * (1.0 - b));
  }
  return s;
}

double RelateModel::phase_score(const Triple& t) const {
  const auto h = tensor(kEntityPhase).row(t.head);
  const auto tl = tensor(kEntityPhase).row(t.tail);
  const auto r = tensor(kRelationPhase).row(t.relation);
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    s += std::abs(std::sin(0.5 * (h[i] + r[i] - tl[i])));
  }
  return s;
}

double RelateModel::base_score(const Triple& t) const {
  const double lm = softplus(tensor(kLambdaModRaw)(t.relation, 0));
  const double lp = softplus(tensor(kLambdaPhaseRaw)(t.relation, 0));
  return gamma_ - (lm * modulus_score(t) + lp * phase_score(t));
}

double RelateModel::type_bias(const Triple& t) const {
  if (!type_ctx_ || !type_ctx_->signatures) return 0.0;
  const double scale = type_ctx_->warm * type_ctx_->type_lambda;
  if (scale == 0.0) return 0.0;
  const auto sh = type_ctx_->signatures->row(t.head);
  const auto st = type_ctx_->signatures->row(t.tail);
  const auto ph = tensor(kHeadTypeProto).row(t.relation);
  const auto pt = tensor(kTailTypeProto).row(t.relation);
  double s = 0.0;
  for (std::size_t k = 0; k < sh.size(); ++k) s += sh[k] * ph[k] + st[k] * pt[k];
  return scale * s;
}

double RelateModel::score(const Triple& t) const { return base_score(t) + type_bias(t); }

void RelateModel::score_tails(EntityId head, RelationId relation, std::span<double> out) const {
  const std::size_t k = width();
  const auto hm = tensor(kEntityModulus).row(head);
  const auto hp = tensor(kEntityPhase).row(head);
  const auto rm = tensor(kRelationModulus).row(relation);
  const auto rp = tensor(kRelationPhase).row(relation);
  const auto braw = tensor(kRelationBiasRaw).row(relation);
  const auto wraw = tensor(kRelationWidthRaw).row(relation);
  const double lm = softplus(tensor(kLambdaModRaw)(relation, 0));
  const double lp = softplus(tensor(kLambdaPhaseRaw)(relation, 0));

  std::vector<double> moved(k), keep(k), w(k), shifted(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double b = sigmoid(braw[i]);
    moved[i] = hm[i] * (rm[i] + b);
    keep[i] = 1.0 - b;
    w[i] = softplus(wraw[i]);
    shifted[i] = hp[i] + rp[i];
  }
  const Matrix& em = tensor(kEntityModulus);
  const Matrix& ep = tensor(kEntityPhase);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto tm = em.row(e);
    const auto tp = ep.row(e);
    double mod = 0.0;
    double ph = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mod += w[i] * std::abs(moved[i] - tm[i] * keep[i]);
      ph += std::abs(std::sin(0.5 * (shifted[i] - tp[i])));
    }
    out[e] = gamma_ - (lm * mod + lp * ph);
  }
  if (type_ctx_ && type_ctx_->signatures && type_ctx_->warm * type_ctx_->type_lambda != 0.0) {
    for (std::size_t e = 0; e < out.size(); ++e) {
      out[e] += type_bias({head, relation, static_cast<EntityId>(e)});
    }
  }
}

void RelateModel::score_heads(RelationId relation, EntityId tail, std::span<double> out) const {
  const std::size_t k = width();
  const auto tm = tensor(kEntityModulus).row(tail);
  const auto tp = tensor(kEntityPhase).row(tail);
  const auto rm = tensor(kRelationModulus).row(relation);
  const auto rp = tensor(kRelationPhase).row(relation);
  const auto braw = tensor(kRelationBiasRaw).row(relation);
  const auto wraw = tensor(kRelationWidthRaw).row(relation);
  const double lm = softplus(tensor(kLambdaModRaw)(relation, 0));
  const double lp = softplus(tensor(kLambdaPhaseRaw)(relation, 0));

  std::vector<double> scale(k), target(k), w(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double b = sigmoid(braw[i]);
    scale[i] = rm[i] + b;
    target[i] = tm[i] * (1.0 - b);
    w[i] = softplus(wraw[i]);
  }
  const Matrix& em = tensor(kEntityModulus);
  const Matrix& ep = tensor(kEntityPhase);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto hm = em.row(e);
    const auto hp = ep.row(e);
    double mod = 0.0;
    double ph = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mod += w[i] * std::abs(hm[i] * scale[i] - target[i]);
      ph += std::abs(std::sin(0.5 * (hp[i] + rp[i] - tp[i])));
    }
    out[e] = gamma_ - (lm * mod + lp * ph);
  }
  if (type_ctx_ && type_ctx_->signatures && type_ctx_->warm * type_ctx_->type_lambda != 0.0) {
    for (std::size_t e = 0; e < out.size(); ++e) {
      out[e] += type_bias({static_cast<EntityId>(e), relation, tail});
    }
  }
}

void RelateModel::accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const {
  if (coeff == 0.0) return;
  const std::size_t k = width();
  const auto hm = tensor(kEntityModulus).row(t.head);
  const auto tm = tensor(kEntityModulus).row(t.tail);
  const auto hp = tensor(kEntityPhase).row(t.head);
  const auto tp = tensor(kEntityPhase).row(t.tail);
  const auto rm = tensor(kRelationModulus).row(t.relation);
  const auto rp = tensor(kRelationPhase).row(t.relation);
  const auto braw = tensor(kRelationBiasRaw).row(t.relation);
  const auto wraw = tensor(kRelationWidthRaw).row(t.relation);
  const double lm_raw = tensor(kLambdaModRaw)(t.relation, 0);
  const double lp_raw = tensor(kLambdaPhaseRaw)(t.relation, 0);
  const double lm = softplus(lm_raw);
  const double lp = softplus(lp_raw);

  // score = gamma - lm * M - lp * P (+ type term)
  const double cm = -coeff * lm;
  const double cp = -coeff * lp;

  auto g_hm = grad.row(kEntityModulus, t.head);
  auto g_tm = grad.row(kEntityModulus, t.tail);
  auto g_hp = grad.row(kEntityPhase, t.head);
  auto g_tp = grad.row(kEntityPhase, t.tail);
  auto g_rm = grad.row(kRelationModulus, t.relation);
  auto g_rp = grad.row(kRelationPhase, t.relation);
  auto g_b = grad.row(kRelationBiasRaw, t.relation);
  auto g_w = grad.row(kRelationWidthRaw, t.relation);

  double mod_total = 0.0;
  double phase_total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double b = sigmoid(braw[i]);
    const double w = softplus(wraw[i]);
    const double diff = hm[i] * (rm[i] + b) - tm[i] * (1.0 - b);
    const double s = sign0(diff);
    mod_total += w * std::abs(diff);
    const double ws = cm * w * s;
    g_hm[i] += ws * (rm[i] + b);
    g_tm[i] -= ws * (1.0 - b);
    g_rm[i] += ws * hm[i];
    g_b[i] += ws * (hm[i] + tm[i]) * b * (1.0 - b);
    g_w[i] += cm * std::abs(diff) * sigmoid(wraw[i]);

    const double half = 0.5 * (hp[i] + rp[i] - tp[i]);
    const double sn = std::sin(half);
    phase_total += std::abs(sn);
    const double gp = cp * sign0(sn) * std::cos(half) * 0.5;
    g_hp[i] += gp;
    g_rp[i] += gp;
    g_tp[i] -= gp;
  }
  grad.row(kLambdaModRaw, t.relation)[0] += -coeff * mod_total * sigmoid(lm_raw);
  grad.row(kLambdaPhaseRaw, t.relation)[0] += -coeff * phase_total * sigmoid(lp_raw);

  if (type_ctx_ && type_ctx_->signatures) {
    const double scale = coeff * type_ctx_->warm * type_ctx_->type_lambda;
    if (scale != 0.0) {
      const auto sh = type_ctx_->signatures->row(t.head);
      const auto st = type_ctx_->signatures->row(t.tail);
      auto g_ph = grad.row(kHeadTypeProto, t.relation);
      auto g_pt = grad.row(kTailTypeProto, t.relation);
      for (std::size_t j = 0; j < sh.size(); ++j) {
        g_ph[j] += scale * sh[j];
        g_pt[j] += scale * st[j];
      }
    }
  }
}

void RelateModel::touch_rows(const Triple& t, Gradient& grad) const {
  grad.row(kEntityPhase, t.head);
  grad.row(kEntityPhase, t.tail);
  grad.row(kEntityModulus, t.head);
  grad.row(kEntityModulus, t.tail);
  for (std::size_t s : {kRelationPhase, kRelationModulus, kRelationBiasRaw, kRelationWidthRaw,
                        kLambdaModRaw, kLambdaPhaseRaw}) {
    grad.row(s, t.relation);
  }
  if (type_ctx_ && type_ctx_->signatures && type_ctx_->warm * type_ctx_->type_lambda != 0.0) {
    grad.row(kHeadTypeProto, t.relation);
    grad.row(kTailTypeProto, t.relation);
  }
}

std::unique_ptr<ScoreModel> RelateModel::clone() const {
  return std::make_unique<RelateModel>(*this);
}

// ---------------------------------------------------------------------------
// TransE

TransEModel::TransEModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                         double gamma)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim), gamma_(gamma) {
  if (dim == 0) throw ConfigError("dim must be positive");
  params_.add("entity", Matrix(num_entities, dim));
  params_.add("relation", Matrix(num_relations, dim));
}

TransEModel TransEModel::init(std::size_t num_entities, std::size_t num_relations,
                              std::size_t dim, double gamma, std::uint64_t seed) {
  TransEModel m(num_entities, num_relations, dim, gamma);
  Rng rng = make_rng(seed, Stream::kInit);
  const double range = (gamma + 2.0) / static_cast<double>(dim);
  for (auto& t : m.params_) {
    for (double& v : t.value.flat()) v = uniform(rng, -range, range);
  }
  return m;
}

double TransEModel::score(const Triple& t) const {
  const auto h = params_[kEntity].value.row(t.head);
  const auto tl = params_[kEntity].value.row(t.tail);
  const auto r = params_[kRelation].value.row(t.relation);
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += std::abs(h[i] + r[i] - tl[i]);
  return gamma_ - s;
}

void TransEModel::accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const {
  if (coeff == 0.0) return;
  const auto h = params_[kEntity].value.row(t.head);
  const auto tl = params_[kEntity].value.row(t.tail);
  const auto r = params_[kRelation].value.row(t.relation);
  std::vector<double> s(dim_);
  for (std::size_t i = 0; i < dim_; ++i) s[i] = sign0(h[i] + r[i] - tl[i]);
  auto gh = grad.row(kEntity, t.head);
  for (std::size_t i = 0; i < dim_; ++i) gh[i] -= coeff * s[i];
  auto gt = grad.row(kEntity, t.tail);
  for (std::size_t i = 0; i < dim_; ++i) gt[i] += coeff * s[i];
  auto gr = grad.row(kRelation, t.relation);
  for (std::size_t i = 0; i < dim_; ++i) gr[i] -= coeff * s[i];
}

void TransEModel::touch_rows(const Triple& t, Gradient& grad) const {
  grad.row(kEntity, t.head);
  grad.row(kEntity, t.tail);
  grad.row(kRelation, t.relation);
}

std::unique_ptr<ScoreModel> TransEModel::clone() const {
  return std::make_unique<TransEModel>(*this);
}

// ---------------------------------------------------------------------------
// RotatE

RotatEModel::RotatEModel(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                         double gamma)
    : num_entities_(num_entities), num_relations_(num_relations), dim_(dim), gamma_(gamma) {
  check_dim(dim);
  params_.add("entity", Matrix(num_entities, dim));
  params_.add("relation_phase", Matrix(num_relations, dim / 2));
}

RotatEModel RotatEModel::init(std::size_t num_entities, std::size_t num_relations,
                              std::size_t dim, double gamma, std::uint64_t seed) {
  RotatEModel m(num_entities, num_relations, dim, gamma);
  Rng rng = make_rng(seed, Stream::kInit);
  const double range = (gamma + 2.0) / static_cast<double>(dim);
  for (double& v : m.params_[kEntity].value.flat()) v = uniform(rng, -range, range);
  constexpr double pi = std::numbers::pi;
  for (double& v : m.params_[kRelationPhase].value.flat()) v = uniform(rng, -pi, pi);
  return m;
}

double RotatEModel::score(const Triple& t) const {
  const std::size_t k = dim_ / 2;
  const auto h = params_[kEntity].value.row(t.head);
  const auto tl = params_[kEntity].value.row(t.tail);
  const auto th = params_[kRelationPhase].value.row(t.relation);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = std::cos(th[i]);
    const double sn = std::sin(th[i]);
    const double x = h[i] * c - h[k + i] * sn - tl[i];
    const double y = h[i] * sn + h[k + i] * c - tl[k + i];
    s += std::sqrt(x * x + y * y);
  }
  return gamma_ - s;
}

void RotatEModel::accumulate_gradient(const Triple& t, double coeff, Gradient& grad) const {
  if (coeff == 0.0) return;
  const std::size_t k = dim_ / 2;
  const auto h = params_[kEntity].value.row(t.head);
  const auto tl = params_[kEntity].value.row(t.tail);
  const auto th = params_[kRelationPhase].value.row(t.relation);
  std::vector<double> gh(dim_, 0.0), gt(dim_, 0.0);
  auto gth = grad.row(kRelationPhase, t.relation);
  for (std::size_t i = 0; i < k; ++i) {
    const double c = std::cos(th[i]);
    const double sn = std::sin(th[i]);
    const double x = h[i] * c - h[k + i] * sn - tl[i];
    const double y = h[i] * sn + h[k + i] * c - tl[k + i];
    const double n = std::sqrt(x * x + y * y);
    if (n == 0.0) continue;
    const double dx = -coeff * x / n;
    const double dy = -coeff * y / n;
    gh[i] += dx * c + dy * sn;
    gh[k + i] += -dx * sn + dy * c;
    gt[i] -= dx;
    gt[k + i] -= dy;
    gth[i] += dx * (-h[i] * sn - h[k + i] * c) + dy * (h[i] * c - h[k + i] * sn);
  }
  auto g_head = grad.row(kEntity, t.head);
  for (std::size_t i = 0; i < dim_; ++i) g_head[i] += gh[i];
  auto g_tail = grad.row(kEntity, t.tail);
  for (std::size_t i = 0; i < dim_; ++i) g_tail[i] += gt[i];
}

void RotatEModel::touch_rows(const Triple& t, Gradient& grad) const {
  grad.row(kEntity, t.head);
  grad.row(kEntity, t.tail);
  grad.row(kRelationPhase, t.relation);
}

std::unique_ptr<ScoreModel> RotatEModel::clone() const {
  return std::make_unique<RotatEModel>(*this);
}

// ---------------------------------------------------------------------------

ModelKind parse_model_kind(std::string_view name) {
  if (name == "relate") return ModelKind::kRelate;
  if (name == "transe") return ModelKind::kTransE;
  if (name == "rotate") return ModelKind::kRotatE;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected relate, transe or rotate)");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRelate: return "relate";
    case ModelKind::kTransE: return "transe";
    case ModelKind::kRotatE: return "rotate";
  }
  return "?";
}

std::unique_ptr<ScoreModel> make_model(const ModelInit& init, std::size_t num_entities,
                                       std::size_t num_relations, std::uint64_t seed) {
  switch (init.kind) {
    case ModelKind::kRelate:
      return std::make_unique<RelateModel>(RelateModel::init(
          num_entities, num_relations,
          {init.dim, init.gamma, init.init_relation_width, init.modulus_weight}, seed));
    case ModelKind::kTransE:
      return std::make_unique<TransEModel>(
          TransEModel::init(num_entities, num_relations, init.dim, init.gamma, seed));
    case ModelKind::kRotatE:
      return std::make_unique<RotatEModel>(
          RotatEModel::init(num_entities, num_relations, init.dim, init.gamma, seed));
  }
  throw InternalError("unhandled model kind");
}

}  // namespace relate
