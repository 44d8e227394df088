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

// Independent reference implementations used by the tests. They read the
// model's tensors by name and recompute everything with plain loops, sharing
// no code with the library's scoring, ranking or formal routines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "relate/kg.hpp"
#include "relate/models.hpp"

namespace oracle {

inline double softplus(double x) { return x > 30.0 ? x : std::log(1.0 + std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double relate_modulus(const relate::RelateModel& m, const relate::Triple& t) {
  const auto& p = m.parameters();
  const auto& em = p.at("entity_modulus");
  const auto& rm = p.at("relation_modulus");
  const auto& b = p.at("relation_bias_raw");
  const auto& w = p.at("relation_width_raw");
  double sum = 0.0;
  for (std::size_t i = 0; i < em.cols(); ++i) {
    const double bi = sigmoid(b(t.relation, i));
    const double lhs = em(t.head, i) * (rm(t.relation, i) + bi);
    const double rhs = em(t.tail, i) * (1.0 - bi);
    sum += softplus(w(t.relation, i)) * std::fabs(lhs - rhs);
  }
  return sum;
}

inline double relate_phase(const relate::RelateModel& m, const relate::Triple& t) {
  const auto& p = m.parameters();
  const auto& ep = p.at("entity_phase");
  const auto& rp = p.at("relation_phase");
  double sum = 0.0;
  for (std::size_t i = 0; i < ep.cols(); ++i) {
    sum += std::fabs(std::sin((ep(t.head, i) + rp(t.relation, i) - ep(t.tail, i)) / 2.0));
  }
  return sum;
}

inline double relate_type(const relate::RelateModel& m, const relate::Triple& t) {
  const auto& ctx = m.type_context();
  if (!ctx || !ctx->signatures) return 0.0;
  const auto& sig = *ctx->signatures;
  const auto& hp = m.parameters().at("head_type_proto");
  const auto& tp = m.parameters().at("tail_type_proto");
  double dot = 0.0;
  for (std::size_t k = 0; k < sig.cols(); ++k) {
    dot += sig(t.head, k) * hp(t.relation, k) + sig(t.tail, k) * tp(t.relation, k);
  }
  return ctx->warm * ctx->type_lambda * dot;
}

inline double relate_score(const relate::RelateModel& m, const relate::Triple& t) {
  const auto& p = m.parameters();
  const double lm = softplus(p.at("lambda_mod_raw")(t.relation, 0));
  const double lp = softplus(p.at("lambda_phase_raw")(t.relation, 0));
  return m.gamma() - lm * relate_modulus(m, t) - lp * relate_phase(m, t) + relate_type(m, t);
}

// Filtered rank by sorting: candidates are every entity except the answer and
// the known-true completions; rank = 1 + #greater + 0.5 * #equal.
inline double brute_force_rank(const relate::ScoreModel& model, const relate::Triple& truth,
                               bool predict_head, const std::set<relate::Triple>& known,
                               std::size_t* ties = nullptr) {
  const auto n = static_cast<relate::EntityId>(model.num_entities());
  const double target = model.score(truth);
  std::vector<double> others;
  for (relate::EntityId e = 0; e < n; ++e) {
    relate::Triple c = truth;
    (predict_head ? c.head : c.tail) = e;
    if (c == truth || known.count(c) > 0) continue;
    others.push_back(model.score(c));
  }
  std::sort(others.begin(), others.end(), std::greater<>());
  const auto [lo, hi] = std::equal_range(others.begin(), others.end(), target, std::greater<>());
  const double greater = static_cast<double>(lo - others.begin());
  const double equal = static_cast<double>(hi - lo);
  if (ties != nullptr) *ties = static_cast<std::size_t>(hi - lo);
  return 1.0 + greater + 0.5 * equal;
}

}  // namespace oracle
