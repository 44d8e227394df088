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

#include "relate/formal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "relate/error.hpp"

namespace relate {

TruthTable::TruthTable(std::size_t num_entities, std::size_t num_relations, bool fill)
    : num_entities_(num_entities),
      num_relations_(num_relations),
      truth_(num_entities * num_entities * num_relations, fill ? 1 : 0) {}

TruthTable TruthTable::random(std::size_t num_entities, std::size_t num_relations, Rng& rng) {
  TruthTable tt(num_entities, num_relations);
  for (auto& v : tt.truth_) v = static_cast<char>(uniform_index(rng, 2));
  return tt;
}

std::size_t TruthTable::index(const Triple& t) const {
  if (t.head >= num_entities_ || t.tail >= num_entities_ || t.relation >= num_relations_) {
    throw InternalError("truth table index out of range");
  }
  return (t.head * num_relations_ + t.relation) * num_entities_ + t.tail;
}

Triple TruthTable::triple(std::size_t index) const {
  const auto tail = static_cast<EntityId>(index % num_entities_);
  index /= num_entities_;
  const auto relation = static_cast<RelationId>(index % num_relations_);
  const auto head = static_cast<EntityId>(index / num_relations_);
  return {head, relation, tail};
}

TripleList TruthTable::false_triples() const {
  TripleList out;
  for (std::size_t i = 0; i < truth_.size(); ++i) {
    if (!truth_[i]) out.push_back(triple(i));
  }
  return out;
}

FormalParams::FormalParams(std::size_t num_entities, std::size_t num_relations, std::size_t w)
    : width(w),
      entity_phase(num_entities, w),
      entity_modulus(num_entities, w),
      relation_phase(num_relations, w),
      relation_modulus(num_relations, w),
      relation_bias(num_relations, w),
      relation_width(num_relations, w) {}

double formal_score(const FormalParams& p, const Triple& t, double gamma) {
  const auto hm = p.entity_modulus.row(t.head);
  const auto tm = p.entity_modulus.row(t.tail);
  const auto hp = p.entity_phase.row(t.head);
  const auto tp = p.entity_phase.row(t.tail);
  const auto rm = p.relation_modulus.row(t.relation);
  const auto rp = p.relation_phase.row(t.relation);
  const auto b = p.relation_bias.row(t.relation);
  const auto w = p.relation_width.row(t.relation);
  double mod = 0.0;
  double phase = 0.0;
  for (std::size_t i = 0; i < p.width; ++i) {
    mod += w[i] * std::abs(hm[i] * (rm[i] + b[i]) - tm[i] * (1.0 - b[i]));
    phase += std::abs(std::sin(0.5 * (hp[i] + rp[i] - tp[i])));
  }
  return gamma - mod - phase;
}

// ---------------------------------------------------------------------------
// Expressivity construction

FormalParams expressive_base_case(std::size_t num_entities, std::size_t num_relations) {
  FormalParams p(num_entities, num_relations, num_entities * num_relations);
  p.entity_modulus.fill(1.0);
  p.relation_modulus.fill(2.0);
  p.relation_bias.fill(0.0);
  p.relation_width.fill(-1.0);
  return p;
}

namespace {

void score_table(SeparationCertificate& cert) {
  const TruthTable& tt = cert.truth;
  cert.scores.assign(tt.size(), 0.0);
  cert.offending.clear();
  cert.min_true_score = std::numeric_limits<double>::infinity();
  cert.max_false_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const Triple t = tt.triple(i);
    const double s = formal_score(cert.params, t, cert.gamma);
    cert.scores[i] = s;
    if (tt.get(t)) {
      cert.min_true_score = std::min(cert.min_true_score, s);
      if (!(s > cert.gamma)) cert.offending.push_back(t);
    } else {
      cert.max_false_score = std::max(cert.max_false_score, s);
      if (!(s < 0.0)) cert.offending.push_back(t);
    }
  }
  cert.valid = cert.offending.empty();
}

}  // namespace

SeparationCertificate construct_expressive_embedding(const TruthTable& truth, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (truth.num_entities() == 0 || truth.num_relations() == 0) {
    throw ConfigError("truth table must have entities and relations");
  }
  const std::size_t ne = truth.num_entities();
  const std::size_t nr = truth.num_relations();
  SeparationCertificate cert;
  cert.truth = truth;
  cert.gamma = gamma;
  cert.params = expressive_base_case(ne, nr);
  FormalParams& p = cert.params;

  for (const Triple& f : truth.false_triples()) {
    const std::size_t dim = f.relation * ne + f.tail;
    double min_width = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < nr; ++x) {
      min_width = std::min(min_width, std::abs(p.relation_width(x, dim)));
    }
    if (min_width == 0.0) min_width = 1.0;
    const double current = formal_score(p, f, gamma);
    const double c = std::max(current, 0.0) / min_width + gamma + 1.0;

    p.entity_modulus(f.tail, dim) += c;
    for (std::size_t e = 0; e < ne; ++e) {
      if (e != f.tail) p.entity_modulus(e, dim) -= c;
    }
    p.relation_width(f.relation, dim) += c;
    p.relation_bias(f.relation, dim) += c;
    for (std::size_t x = 0; x < nr; ++x) {
      if (x != f.relation) p.relation_width(x, dim) += c;
    }
    ++cert.surgeries;
  }
  score_table(cert);
  return cert;
}

bool reverify_certificate(const SeparationCertificate& cert) {
  const TruthTable& tt = cert.truth;
  if (cert.scores.size() != tt.size()) return false;
  if (cert.params.width > tt.num_entities() * tt.num_relations() + 1) return false;
  bool separated = true;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const Triple t = tt.triple(i);
    const double s = formal_score(cert.params, t, cert.gamma);
    if (!(std::abs(s - cert.scores[i]) <= 1e-9)) return false;
    separated = separated && (tt.get(t) ? s > cert.gamma : s < 0.0);
  }
  return separated == cert.valid;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

nlohmann::json triple_json(const Triple& t, const Vocabulary* vocab) {
  if (vocab && t.head < vocab->num_entities() && t.tail < vocab->num_entities() &&
      t.relation < vocab->num_relations()) {
    return {vocab->entity_name(t.head), vocab->relation_name(t.relation),
            vocab->entity_name(t.tail)};
  }
  return {t.head, t.relation, t.tail};
}

}  // namespace

std::string certificate_to_json(const SeparationCertificate& cert, const Vocabulary* vocab) {
  nlohmann::json j;
  j["num_entities"] = cert.truth.num_entities();
  j["num_relations"] = cert.truth.num_relations();
  j["width"] = cert.params.width;
  j["gamma"] = cert.gamma;
  j["valid"] = cert.valid;
  j["surgeries"] = cert.surgeries;
  j["min_true_score"] = cert.min_true_score;
  j["max_false_score"] = cert.max_false_score;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < cert.truth.size(); ++i) {
    const Triple t = cert.truth.triple(i);
    table.push_back({{"triple", triple_json(t, vocab)},
                     {"true", cert.truth.get(t)},
                     {"score", cert.scores.at(i)}});
  }
  j["scores"] = std::move(table);
  nlohmann::json offending = nlohmann::json::array();
  for (const Triple& t : cert.offending) offending.push_back(triple_json(t, vocab));
  j["offending"] = std::move(offending);
  j["params"] = {{"entity_phase", matrix_json(cert.params.entity_phase)},
                 {"entity_modulus", matrix_json(cert.params.entity_modulus)},
                 {"relation_phase", matrix_json(cert.params.relation_phase)},
                 {"relation_modulus", matrix_json(cert.params.relation_modulus)},
                 {"relation_bias", matrix_json(cert.params.relation_bias)},
                 {"relation_width", matrix_json(cert.params.relation_width)}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Inference patterns

FormalRelation random_relation(std::size_t width, Rng& rng) {
  FormalRelation r;
  for (std::size_t i = 0; i < width; ++i) {
    r.phase.push_back(uniform(rng, -std::numbers::pi, std::numbers::pi));
    r.modulus.push_back(uniform(rng, 0.5, 1.5));
    r.bias.push_back(uniform(rng, 0.05, 0.95));
    r.width.push_back(uniform(rng, 0.5, 1.5));
  }
  return r;
}

FormalRelation make_symmetric(std::size_t width) {
  FormalRelation r;
  r.phase.assign(width, 0.0);
  r.modulus.assign(width, 0.0);
  r.bias.assign(width, 0.5);
  r.width.assign(width, 1.0);
  return r;
}

FormalRelation make_inverse(const FormalRelation& r1) {
  FormalRelation r2 = r1;
  for (double& p : r2.phase) p = -p;
  return r2;
}

FormalRelation make_composed(const FormalRelation& r1, const FormalRelation& r2) {
  if (r1.phase.size() != r2.phase.size() || r1.modulus.size() != r2.modulus.size()) {
    throw ConfigError("composed relations must have equal widths");
  }
  FormalRelation r3 = r1;
  for (std::size_t i = 0; i < r3.phase.size(); ++i) r3.phase[i] = r1.phase[i] + r2.phase[i];
  for (std::size_t i = 0; i < r3.modulus.size(); ++i) {
    r3.modulus[i] = r1.modulus[i] * r2.modulus[i];
  }
  return r3;
}

FormalRelation make_hierarchy(const FormalRelation& sub, double scale) {
  if (!(scale > 1.0)) throw ConfigError("hierarchy scale must exceed 1");
  FormalRelation super = sub;
  for (double& w : super.width) w /= scale;
  return super;
}

std::pair<FormalRelation, FormalRelation> make_disjoint(std::size_t width) {
  if (width < 2) throw ConfigError("disjoint construction needs width >= 2");
  FormalRelation r1 = make_symmetric(width);
  FormalRelation r2 = make_symmetric(width);
  r1.phase[0] = std::numbers::pi / 2.0;
  r2.phase[1] = std::numbers::pi / 2.0;
  return {r1, r2};
}

double formal_phase_score(std::span<const double> head, const FormalRelation& r,
                          std::span<const double> tail) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.phase.size(); ++i) {
    s += std::abs(std::sin(0.5 * (head[i] + r.phase[i] - tail[i])));
  }
  return s;
}

double formal_modulus_score(std::span<const double> head, const FormalRelation& r,
                            std::span<const double> tail) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.modulus.size(); ++i) {
    s += r.width[i] * std::abs(head[i] * (r.modulus[i] + r.bias[i]) - tail[i] * (1.0 - r.bias[i]));
  }
  return s;
}

std::string_view pattern_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::kSymmetry: return "symmetry";
    case PatternKind::kAntiSymmetry: return "anti_symmetry";
    case PatternKind::kInversion: return "inversion";
    case PatternKind::kHierarchy: return "hierarchy";
    case PatternKind::kComposition: return "composition";
    case PatternKind::kDisjointness: return "disjointness";
  }
  return "?";
}

std::vector<FormalRelation> pattern_relations(PatternKind kind, std::size_t width, Rng& rng) {
  switch (kind) {
    case PatternKind::kSymmetry: return {make_symmetric(width)};
    case PatternKind::kAntiSymmetry: {
      FormalRelation r = random_relation(width, rng);
      // Keep every phase clear of 0 and pi so the witness cannot degenerate.
      for (double& p : r.phase) p = uniform(rng, 0.25, std::numbers::pi - 0.25);
      return {r};
    }
    case PatternKind::kInversion: {
      FormalRelation r1 = random_relation(width, rng);
      return {r1, make_inverse(r1)};
    }
    case PatternKind::kHierarchy: {
      FormalRelation sub = random_relation(width, rng);
      return {sub, make_hierarchy(sub, 2.0)};
    }
    case PatternKind::kComposition: {
      FormalRelation r1 = random_relation(width, rng);
      FormalRelation r2 = random_relation(width, rng);
      return {r1, r2, make_composed(r1, r2)};
    }
    case PatternKind::kDisjointness: {
      auto [r1, r2] = make_disjoint(width);
      return {r1, r2};
    }
  }
  throw InternalError("unhandled pattern kind");
}

namespace {

std::vector<double> random_phases(std::size_t width, Rng& rng) {
  std::vector<double> v(width);
  for (double& x : v) x = uniform(rng, -std::numbers::pi, std::numbers::pi);
  return v;
}

std::string vec_text(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

void expect_count(PatternKind kind, const std::vector<FormalRelation>& relations, std::size_t n) {
  if (relations.size() != n) {
    throw ConfigError(std::string(pattern_name(kind)) + " check expects " + std::to_string(n) +
                      " relations");
  }
  for (const auto& r : relations) {
    if (r.phase.size() != relations[0].phase.size() ||
        r.modulus.size() != relations[0].phase.size() || r.bias.size() != r.modulus.size() ||
        r.width.size() != r.modulus.size()) {
      throw ConfigError("pattern relations must share one width");
    }
  }
}

}  // namespace

PatternWitness verify_pattern(PatternKind kind, const std::vector<FormalRelation>& relations,
                              std::size_t trials, double tolerance, std::uint64_t seed) {
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (trials == 0) throw ConfigError("trials must be positive");
  Rng rng = make_rng(seed, Stream::kFormal);
  PatternWitness w;
  w.kind = kind;
  w.relations = relations;
  w.trials = trials;
  w.tolerance = tolerance;
  double worst = 0.0;
  auto fail_with = [&](double residual, const std::string& example) {
    if (residual > worst) {
      worst = residual;
      if (residual > tolerance) w.counterexample = example;
    }
  };

  switch (kind) {
    case PatternKind::kSymmetry: {
      expect_count(kind, relations, 1);
      w.identity = "phase_score(h, r, t) == phase_score(t, r, h) for zero-phase r";
      const std::size_t width = relations[0].phase.size();
      for (std::size_t i = 0; i < trials; ++i) {
        const auto h = random_phases(width, rng);
        const auto t = random_phases(width, rng);
        const double res = std::abs(formal_phase_score(h, relations[0], t) -
                                    formal_phase_score(t, relations[0], h));
        fail_with(res, "h=" + vec_text(h) + " t=" + vec_text(t));
      }
      w.max_residual = worst;
      w.passed = worst <= tolerance;
      break;
    }
    case PatternKind::kAntiSymmetry: {
      expect_count(kind, relations, 1);
      w.identity = "exists (h, t) with phase_score(h, r, t) != phase_score(t, r, h)";
      const std::size_t width = relations[0].phase.size();
      double best = 0.0;
      std::string example;
      for (std::size_t i = 0; i < trials; ++i) {
        const auto h = random_phases(width, rng);
        const auto t = random_phases(width, rng);
        const double gap = std::abs(formal_phase_score(h, relations[0], t) -
                                    formal_phase_score(t, relations[0], h));
        if (gap > best) {
          best = gap;
          example = "h=" + vec_text(h) + " t=" + vec_text(t);
        }
      }
      w.max_residual = best;
      w.passed = best > tolerance;
      if (!w.passed) w.counterexample = "no separating pair among " + std::to_string(trials);
      break;
    }
    case PatternKind::kInversion: {
      expect_count(kind, relations, 2);
      w.identity = "phase_score(h, r1, t) == phase_score(t, r2, h) for r2 = -r1 in phase";
      const std::size_t width = relations[0].phase.size();
      for (std::size_t i = 0; i < trials; ++i) {
        const auto h = random_phases(width, rng);
        const auto t = random_phases(width, rng);
        const double res = std::abs(formal_phase_score(h, relations[0], t) -
                                    formal_phase_score(t, relations[1], h));
        fail_with(res, "h=" + vec_text(h) + " t=" + vec_text(t));
      }
      w.max_residual = worst;
      w.passed = worst <= tolerance;
      break;
    }
    case PatternKind::kComposition: {
      expect_count(kind, relations, 3);
      w.identity =
          "phase_score(h, r3, t) == 0 when h + r1 == e and e + r2 == t (mod 2 pi), r3 = r1 + r2";
      const std::size_t width = relations[0].phase.size();
      for (std::size_t i = 0; i < trials; ++i) {
        const auto h = random_phases(width, rng);
        std::vector<double> e(width), t(width);
        for (std::size_t k = 0; k < width; ++k) {
          const double wrap1 = 2.0 * std::numbers::pi * (static_cast<double>(uniform_index(rng, 3)) - 1.0);
          const double wrap2 = 2.0 * std::numbers::pi * (static_cast<double>(uniform_index(rng, 3)) - 1.0);
          e[k] = h[k] + relations[0].phase[k] + wrap1;
          t[k] = e[k] + relations[1].phase[k] + wrap2;
        }
        const double chain = formal_phase_score(h, relations[0], e) +
                             formal_phase_score(e, relations[1], t);
        const double res = formal_phase_score(h, relations[2], t);
        fail_with(res, "h=" + vec_text(h) + " t=" + vec_text(t) + " chain residual " +
                           std::to_string(chain));
      }
      w.max_residual = worst;
      w.passed = worst <= tolerance;
      break;
    }
    case PatternKind::kHierarchy: {
      expect_count(kind, relations, 2);
      w.formalized = true;
      w.identity =
          "for constructed (h, t) with modulus_score(h, sub, t) <= B (including the zero-mismatch "
          "pairs), modulus_score(h, super, t) <= B; B = 1";
      const FormalRelation& sub = relations[0];
      const FormalRelation& super = relations[1];
      const std::size_t width = sub.modulus.size();
      constexpr double kBound = 1.0;
      for (std::size_t i = 0; i < trials; ++i) {
        std::vector<double> h(width), t(width);
        for (std::size_t k = 0; k < width; ++k) {
          h[k] = uniform(rng, 0.5, 1.5);
          t[k] = h[k] * (sub.modulus[k] + sub.bias[k]) / (1.0 - sub.bias[k]);
        }
        // Even trials use the exact zero-mismatch pair; odd trials move the
        // tail so the sub relation's mismatch lands anywhere in [0, B].
        if (i % 2 == 1) {
          const double budget = uniform(rng, 0.0, kBound);
          const std::size_t k = uniform_index(rng, width);
          t[k] += budget / (sub.width[k] * (1.0 - sub.bias[k]));
        }
        const double sub_score = formal_modulus_score(h, sub, t);
        if (sub_score > kBound + 1e-12) continue;
        const double res = std::max(0.0, formal_modulus_score(h, super, t) - kBound);
        fail_with(res, "h=" + vec_text(h) + " t=" + vec_text(t));
      }
      w.max_residual = worst;
      w.passed = worst <= tolerance;
      break;
    }
    case PatternKind::kDisjointness: {
      expect_count(kind, relations, 2);
      w.formalized = true;
      w.identity =
          "no (h, t) aligned under r1 (phase_score(h, r1, t) = 0) has phase_score(h, r2, t) <= "
          "tolerance";
      const std::size_t width = relations[0].phase.size();
      // Grid over the first two head coordinates, random elsewhere; the tail
      // is the exact r1-aligned partner.
      const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(trials))));
      double min_r2 = std::numeric_limits<double>::infinity();
      std::size_t checked = 0;
      for (std::size_t a = 0; a < side && checked < trials; ++a) {
        for (std::size_t b = 0; b < side && checked < trials; ++b, ++checked) {
          auto h = random_phases(width, rng);
          h[0] = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(side);
          h[1] = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(side);
          std::vector<double> t(width);
          for (std::size_t k = 0; k < width; ++k) t[k] = h[k] + relations[0].phase[k];
          const double p1 = formal_phase_score(h, relations[0], t);
          const double p2 = formal_phase_score(h, relations[1], t);
          if (p1 <= tolerance && p2 <= tolerance) {
            w.counterexample = "h=" + vec_text(h) + " aligned under both";
          }
          min_r2 = std::min(min_r2, p2);
        }
      }
      w.trials = checked;
      w.max_residual = min_r2;
      w.passed = w.counterexample.empty();
      break;
    }
  }
  return w;
}

namespace {

nlohmann::json relation_json(const FormalRelation& r) {
  return {{"phase", r.phase}, {"modulus", r.modulus}, {"bias", r.bias}, {"width", r.width}};
}

}  // namespace

std::string witness_to_json(const PatternWitness& w) {
  nlohmann::json j;
  j["pattern"] = std::string(pattern_name(w.kind));
  j["identity"] = w.identity;
  j["formalized"] = w.formalized;
  j["trials"] = w.trials;
  j["tolerance"] = w.tolerance;
  j["max_residual"] = w.max_residual;
  j["passed"] = w.passed;
  j["counterexample"] = w.counterexample;
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : w.relations) rels.push_back(relation_json(r));
  j["relations"] = std::move(rels);
  return j.dump(2) + "\n";
}

}  // namespace relate
