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

// Randomized oracle comparisons shared by the unit tests (few trials) and the
// acceptance runner (full trial counts).

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracle.hpp"
#include "relate/eval.hpp"
#include "relate/io.hpp"
#include "relate/models.hpp"
#include "relate/training.hpp"

namespace checks {

struct ScoringResult {
  std::size_t draws = 0;
  double max_abs_error = 0.0;
};

inline ScoringResult scoring_oracle(std::size_t draws, std::uint64_t seed) {
  relate::Rng rng(seed);
  ScoringResult out;
  const std::size_t dims[] = {2, 8, 64};
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t dim = dims[i % 3];
    const auto m = testing::random_relate(6, 3, dim, rng, i % 2 == 1);
    const auto t = testing::random_triple(6, 3, rng);
    out.max_abs_error = std::max({out.max_abs_error,
                                  std::abs(m.modulus_score(t) - oracle::relate_modulus(m, t)),
                                  std::abs(m.phase_score(t) - oracle::relate_phase(m, t)),
                                  std::abs(m.score(t) - oracle::relate_score(m, t))});
    ++out.draws;
  }
  return out;
}

struct GradientResult {
  std::size_t configs = 0;
  std::size_t partials = 0;
  std::size_t rejected = 0;  // draws too close to a kink
  double max_rel_error = 0.0;
  std::string worst;
};

// Smallest distance from any absolute value or hinge kink the objective
// passes through at the current parameters.
inline double kink_distance(const relate::RelateModel& m, const relate::TripleList& pos,
                            const relate::TripleList& neg, double margin) {
  double d = 1e300;
  auto components = [&](const relate::Triple& t) {
    const auto& p = m.parameters();
    for (std::size_t i = 0; i < m.width(); ++i) {
      const double b = oracle::sigmoid(p.at("relation_bias_raw")(t.relation, i));
      const double diff = p.at("entity_modulus")(t.head, i) *
                              (p.at("relation_modulus")(t.relation, i) + b) -
                          p.at("entity_modulus")(t.tail, i) * (1.0 - b);
      const double half = 0.5 * (p.at("entity_phase")(t.head, i) +
                                 p.at("relation_phase")(t.relation, i) -
                                 p.at("entity_phase")(t.tail, i));
      d = std::min({d, std::abs(diff), std::abs(std::sin(half))});
    }
  };
  const std::size_t per = neg.size() / pos.size();
  for (std::size_t i = 0; i < pos.size(); ++i) {
    components(pos[i]);
    const double fp = m.score(pos[i]);
    for (std::size_t j = 0; j < per; ++j) {
      components(neg[i * per + j]);
      d = std::min(d, std::abs(m.score(neg[i * per + j]) - fp + margin));
    }
  }
  return d;
}

// Central differences of the full objective (margin loss with fixed
// adversarial weights, L3, type bias) against the analytic gradient.
inline GradientResult objective_gradient(std::size_t configs, std::uint64_t seed,
                                         std::size_t dim = 8, double step = 1e-5) {
  relate::Rng rng(seed);
  GradientResult out;
  constexpr std::size_t ne = 6, nr = 3, n_pos = 3, n_neg = 4;
  while (out.configs < configs) {
    auto m = testing::random_relate(ne, nr, dim, rng, true);
    for (auto& t : m.parameters()) {
      for (double& v : t.value.flat()) v *= 0.5;
    }
    relate::TripleList pos;
    for (std::size_t i = 0; i < n_pos; ++i) pos.push_back(testing::random_triple(ne, nr, rng));
    const auto neg = relate::sample_negatives(pos, n_neg, ne, relate::CorruptionPolicy::kUniform, rng);
    relate::LossOptions opts;
    opts.loss_margin = relate::uniform(rng, 1.0, 6.0);
    opts.l3_weight = relate::uniform(rng, 1e-3, 1e-1);
    const auto weights = relate::batch_adversarial_weights(m, pos, neg, 1.0);
    if (kink_distance(m, pos, neg, opts.loss_margin) < 1e-3) {
      ++out.rejected;
      continue;
    }
    ++out.configs;
    relate::Gradient g(m.parameters());
    relate::batch_objective(m, pos, neg, weights, opts, &g);
    for (std::size_t s = 0; s < m.parameters().size(); ++s) {
      auto flat = m.parameters()[s].value.flat();
      for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + step;
        const double up = relate::batch_objective(m, pos, neg, weights, opts, nullptr).total();
        flat[k] = saved - step;
        const double down = relate::batch_objective(m, pos, neg, weights, opts, nullptr).total();
        flat[k] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = g.dense(s).flat()[k];
        if (fd == 0.0 && an == 0.0) continue;
        ++out.partials;
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        if (rel > out.max_rel_error) {
          out.max_rel_error = rel;
          std::ostringstream os;
          os << m.parameters()[s].name << "[" << k << "] analytic " << an << " numeric " << fd;
          out.worst = os.str();
        }
      }
    }
  }
  return out;
}

struct RankingResult {
  std::size_t graphs = 0;
  std::size_t queries = 0;
  std::size_t mismatches = 0;
  std::size_t tied_queries = 0;  // queries where the answer ties another candidate
  std::string report;            // one line per query
};

// Random small graphs and parameters; some entities are exact copies of
// others so that ties occur. Every triple of every split is ranked in both
// directions by the library and by the sorting oracle.
inline RankingResult ranking_oracle(std::size_t graphs, std::uint64_t seed) {
  relate::Rng rng(seed);
  RankingResult out;
  std::string& rep = out.report;
  rep = "graph,head,relation,tail,direction,rank,oracle\n";
  for (std::size_t g = 0; g < graphs; ++g) {
    const std::size_t ne = 3 + relate::uniform_index(rng, 18);
    const std::size_t nr = 1 + relate::uniform_index(rng, 5);
    std::set<relate::Triple> all;
    const std::size_t n_facts = 1 + relate::uniform_index(rng, 3 * ne);
    while (all.size() < n_facts) all.insert(testing::random_triple(ne, nr, rng));
    relate::TripleList facts(all.begin(), all.end());
    relate::shuffle(facts, rng);
    const std::size_t n_test = std::max<std::size_t>(1, facts.size() / 5);
    const std::size_t n_valid = facts.size() / 10;
    relate::TripleList test(facts.begin(), facts.begin() + n_test);
    relate::TripleList valid(facts.begin() + n_test, facts.begin() + n_test + n_valid);
    relate::TripleList train(facts.begin() + n_test + n_valid, facts.end());
    const auto kg = testing::make_kg(ne, nr, train, valid, test);

    std::unique_ptr<relate::ScoreModel> model;
    const int kind = static_cast<int>(g % 3);
    if (kind == 0) {
      auto m = testing::random_relate(ne, nr, 4, rng, g % 2 == 0);
      // Engineered ties: copy one entity's rows onto others.
      const std::size_t copies = 1 + relate::uniform_index(rng, 3);
      for (std::size_t c = 0; c < copies; ++c) {
        const auto src = relate::uniform_index(rng, ne);
        const auto dst = relate::uniform_index(rng, ne);
        for (auto slot : {relate::RelateModel::kEntityPhase, relate::RelateModel::kEntityModulus}) {
          auto& mat = m.tensor(slot);
          auto from = mat.row(src);
          std::vector<double> tmp(from.begin(), from.end());
          std::copy(tmp.begin(), tmp.end(), mat.row(dst).begin());
        }
        if (m.type_context()) {
          auto sig = std::make_shared<relate::TypeSignatures>(*m.type_context()->signatures);
          auto from = sig->row(src);
          std::vector<double> tmp(from.begin(), from.end());
          std::copy(tmp.begin(), tmp.end(), sig->row(dst).begin());
          auto ctx = *m.type_context();
          ctx.signatures = sig;
          m.set_type_context(ctx);
        }
      }
      model = std::make_unique<relate::RelateModel>(std::move(m));
    } else {
      relate::ModelInit init;
      init.kind = kind == 1 ? relate::ModelKind::kTransE : relate::ModelKind::kRotatE;
      init.dim = 4;
      model = relate::make_model(init, ne, nr, g);
      if (g % 2 == 0) {
        // Constant model: every candidate ties.
        for (auto& t : model->parameters()) t.value.fill(0.0);
      }
    }

    for (const auto* split : {&kg.train, &kg.valid, &kg.test}) {
      for (const relate::Triple& t : *split) {
        for (bool head : {true, false}) {
          const relate::Query q{head ? t.tail : t.head, t.relation,
                                head ? relate::Direction::kHead : relate::Direction::kTail};
          const double lib = relate::rank_query(*model, q, head ? t.head : t.tail, kg.filter);
          std::size_t ties = 0;
          const double ref = oracle::brute_force_rank(*model, t, head, all, &ties);
          if (ties > 0) ++out.tied_queries;
          if (lib != ref) ++out.mismatches;
          ++out.queries;
          rep += std::to_string(g) + "," + std::to_string(t.head) + "," +
                 std::to_string(t.relation) + "," + std::to_string(t.tail) + "," +
                 (head ? "head," : "tail,") + relate::format_double(lib) + "," +
                 relate::format_double(ref) + "\n";
        }
      }
    }
    ++out.graphs;
  }
  return out;
}

}  // namespace checks
