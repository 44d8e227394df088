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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "oracle.hpp"
#include "relate/error.hpp"
#include "relate/io.hpp"
#include "relate/models.hpp"

using namespace relate;

namespace {

constexpr double kPi = std::numbers::pi;

// Bias at the b -> 0 limit.
constexpr double kZeroBias = -40.0;

RelateModel hand_model() {
  RelateModel m(2, 1, 4, 12.0);
  m.tensor(RelateModel::kEntityModulus).row(0)[0] = 2.0;
  m.tensor(RelateModel::kEntityModulus).row(0)[1] = 3.0;
  m.tensor(RelateModel::kEntityModulus).row(1)[0] = 2.0;
  m.tensor(RelateModel::kEntityModulus).row(1)[1] = 3.0;
  m.tensor(RelateModel::kRelationModulus).row(0)[0] = 1.0;
  m.tensor(RelateModel::kRelationModulus).row(0)[1] = 0.0;
  m.tensor(RelateModel::kRelationBiasRaw).fill(kZeroBias);
  m.tensor(RelateModel::kRelationWidthRaw).fill(softplus_inverse(1.0));
  m.tensor(RelateModel::kLambdaModRaw).fill(softplus_inverse(1.0));
  m.tensor(RelateModel::kLambdaPhaseRaw).fill(softplus_inverse(1.0));
  return m;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("modulus component by hand") {
  const auto m = hand_model();
  // |2*1 - 2| + |3*0 - 3| = 3
  CHECK(m.modulus_score({0, 0, 1}) == doctest::Approx(3.0).epsilon(1e-12));

  RelateModel z(2, 1, 4, 12.0);
  z.tensor(RelateModel::kRelationModulus).fill(1.7);
  z.tensor(RelateModel::kRelationWidthRaw).fill(0.4);
  CHECK(z.modulus_score({0, 0, 1}) == 0.0);
}

TEST_CASE("phase component") {
  RelateModel m(2, 1, 2, 12.0);
  CHECK(m.phase_score({0, 0, 1}) == 0.0);
  m.tensor(RelateModel::kRelationPhase)(0, 0) = kPi;
  CHECK(m.phase_score({0, 0, 1}) == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(5);
  auto r = testing::random_relate(3, 2, 8, rng);
  const Triple t{0, 1, 2};
  const double before = r.phase_score(t);
  r.tensor(RelateModel::kEntityPhase)(0, 2) += 2.0 * kPi;
  CHECK(r.phase_score(t) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("full score arithmetic") {
  auto m = hand_model();
  m.tensor(RelateModel::kRelationPhase)(0, 0) = kPi;
  // 12 - 1 * 3 - 1 * 1
  CHECK(m.score({0, 0, 1}) == doctest::Approx(8.0).epsilon(1e-12));

  RelateModel id(1, 1, 6, 12.0);
  id.tensor(RelateModel::kEntityModulus).fill(0.8);
  id.tensor(RelateModel::kEntityPhase).fill(0.3);
  id.tensor(RelateModel::kRelationModulus).fill(1.0);
  id.tensor(RelateModel::kRelationBiasRaw).fill(kZeroBias);
  CHECK(id.score({0, 0, 0}) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("scores match the scalar oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = testing::random_relate(5, 3, 8, rng, trial % 2 == 0);
    const auto t = testing::random_triple(5, 3, rng);
    CHECK(m.modulus_score(t) == doctest::Approx(oracle::relate_modulus(m, t)).epsilon(1e-12));
    CHECK(m.phase_score(t) == doctest::Approx(oracle::relate_phase(m, t)).epsilon(1e-12));
    CHECK(std::abs(m.score(t) - oracle::relate_score(m, t)) < 1e-10);
  }
}

TEST_CASE("batched tail and head scoring equals single scoring") {
  Rng rng(12);
  for (ModelKind kind : {ModelKind::kRelate, ModelKind::kTransE, ModelKind::kRotatE}) {
    ModelInit init;
    init.kind = kind;
    init.dim = 8;
    auto m = make_model(init, 7, 3, 4);
    if (auto* r = dynamic_cast<RelateModel*>(m.get())) {
      *r = testing::random_relate(7, 3, 8, rng, true);
    }
    std::vector<double> out(7);
    for (RelationId r = 0; r < 3; ++r) {
      for (EntityId a = 0; a < 7; ++a) {
        m->score_tails(a, r, out);
        for (EntityId e = 0; e < 7; ++e) CHECK(out[e] == m->score({a, r, e}));
        m->score_heads(r, a, out);
        for (EntityId e = 0; e < 7; ++e) CHECK(out[e] == m->score({e, r, a}));
      }
    }
  }
}

TEST_CASE("gradient at the phase minimum is zero") {
  RelateModel m(2, 1, 4, 12.0);
  m.tensor(RelateModel::kEntityPhase).fill(0.7);
  m.tensor(RelateModel::kEntityModulus).fill(1.0);
  m.tensor(RelateModel::kRelationModulus).fill(0.5);
  Gradient g(m.parameters());
  m.accumulate_gradient({0, 0, 1}, 1.0, g);
  for (double v : g.dense(RelateModel::kEntityPhase).flat()) CHECK(v == 0.0);
  for (double v : g.dense(RelateModel::kRelationPhase).flat()) CHECK(v == 0.0);
}

TEST_CASE("score gradient matches central differences") {
  Rng rng(13);
  constexpr double h = 1e-5;
  int checked = 0;
  while (checked < 20) {
    auto m = testing::random_relate(4, 2, 8, rng, true);
    const auto t = testing::random_triple(4, 2, rng);
    bool near_kink = false;
    for (std::size_t i = 0; i < m.width(); ++i) {
      const auto& p = m.parameters();
      const double b = oracle::sigmoid(p.at("relation_bias_raw")(t.relation, i));
      const double diff = p.at("entity_modulus")(t.head, i) * (p.at("relation_modulus")(t.relation, i) + b) -
                          p.at("entity_modulus")(t.tail, i) * (1.0 - b);
      const double half = 0.5 * (p.at("entity_phase")(t.head, i) + p.at("relation_phase")(t.relation, i) -
                                 p.at("entity_phase")(t.tail, i));
      if (std::abs(diff) < 1e-3 || std::abs(std::sin(half)) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;
    ++checked;
    Gradient g(m.parameters());
    m.accumulate_gradient(t, 1.0, g);
    for (std::size_t s = 0; s < m.parameters().size(); ++s) {
      auto flat = m.parameters()[s].value.flat();
      for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + h;
        const double up = m.score(t);
        flat[k] = saved - h;
        const double down = m.score(t);
        flat[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = g.dense(s).flat()[k];
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4});
        CHECK_MESSAGE(rel < 1e-4, m.parameters()[s].name, "[", k, "]: ", an, " vs ", fd);
      }
    }
  }
}

TEST_CASE("gradient is linear in entry weights") {
  Rng rng(14);
  const auto m = testing::random_relate(4, 2, 8, rng, true);
  const Triple t{1, 0, 3};
  Gradient split(m.parameters()), whole(m.parameters());
  const WeightedTriple parts[] = {{t, 0.3, 1.0}, {t, 0.7, 1.0}};
  const WeightedTriple one[] = {{t, 1.0, 1.0}};
  accumulate_gradient(m, parts, split);
  accumulate_gradient(m, one, whole);
  for (std::size_t s = 0; s < split.size(); ++s) {
    const auto a = split.dense(s).flat();
    const auto b = whole.dense(s).flat();
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
}

TEST_CASE("touch_rows covers every row the gradient writes") {
  Rng rng(15);
  const auto m = testing::random_relate(5, 3, 8, rng, true);
  const Triple t{4, 2, 1};
  Gradient g(m.parameters()), touched(m.parameters());
  m.accumulate_gradient(t, 1.0, g);
  m.touch_rows(t, touched);
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (std::size_t r : g.touched_rows(s)) CHECK(touched.is_touched(s, r));
  }
}

TEST_CASE("baselines") {
  TransEModel te(2, 1, 4, 9.0);
  for (std::size_t i = 0; i < 4; ++i) {
    te.parameters()[TransEModel::kEntity].value(0, i) = 0.1 * i;
    te.parameters()[TransEModel::kRelation].value(0, i) = 0.5 - i;
    te.parameters()[TransEModel::kEntity].value(1, i) = 0.1 * i + 0.5 - i;
  }
  CHECK(te.score({0, 0, 1}) == doctest::Approx(9.0).epsilon(1e-14));

  Rng rng(16);
  auto ro = RotatEModel::init(3, 2, 8, 9.0, 3);
  ro.parameters()[RotatEModel::kRelationPhase].value.fill(0.0);
  auto ent = ro.parameters()[RotatEModel::kEntity].value.row(2);
  auto src = ro.parameters()[RotatEModel::kEntity].value.row(0);
  std::copy(src.begin(), src.end(), ent.begin());
  CHECK(ro.score({0, 1, 2}) == doctest::Approx(9.0).epsilon(1e-14));

  auto rr = RotatEModel::init(3, 2, 8, 9.0, 4);
  const double before = rr.score({0, 1, 2});
  rr.parameters()[RotatEModel::kRelationPhase].value(1, 3) += 2.0 * kPi;
  CHECK(rr.score({0, 1, 2}) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("initialization") {
  RelateInit init;
  init.dim = 16;
  const auto a = RelateModel::init(10, 3, init, 42);
  for (double v : a.tensor(RelateModel::kRelationWidthRaw).flat()) {
    CHECK(std::abs(softplus(v) - 0.03) < 1e-9);
  }
  const auto b = RelateModel::init(10, 3, init, 42);
  CHECK(a.parameters() == b.parameters());
  init.dim = 7;
  CHECK_THROWS_AS(RelateModel::init(10, 3, init, 42), ConfigError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(17);
  auto m = testing::random_relate(6, 2, 8, rng, true);
  const auto back = deserialize_checkpoint(serialize_checkpoint(m));
  CHECK(back->kind() == "relate");
  CHECK(back->parameters() == m.parameters());
  const auto* r = dynamic_cast<const RelateModel*>(back.get());
  REQUIRE(r != nullptr);
  REQUIRE(r->type_context().has_value());
  CHECK(r->type_context()->type_lambda == m.type_context()->type_lambda);
  CHECK(r->type_context()->warm == m.type_context()->warm);

  for (ModelKind kind : {ModelKind::kTransE, ModelKind::kRotatE}) {
    ModelInit init;
    init.kind = kind;
    init.dim = 6;
    const auto base = make_model(init, 4, 2, 9);
    const auto copy = deserialize_checkpoint(serialize_checkpoint(*base));
    CHECK(copy->kind() == base->kind());
    CHECK(copy->parameters() == base->parameters());
  }
  CHECK_THROWS(deserialize_checkpoint("{\"not\": \"a checkpoint\"}"));
}

TEST_CASE("embedding export") {
  Vocabulary vocab;
  for (const char* n : {"a", "b", "c"}) vocab.intern_entity(n);
  RelateInit init;
  init.dim = 4;
  const auto m = RelateModel::init(3, 1, init, 5);
  const std::string csv = format_embeddings_csv(m, vocab);
  std::istringstream in(csv);
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(lines == 4);
  const auto table = parse_embeddings_csv(csv);
  CHECK(table.names == vocab.entity_names());
  CHECK(table.phase == m.tensor(RelateModel::kEntityPhase));
  CHECK(table.modulus == m.tensor(RelateModel::kEntityModulus));
  CHECK(format_embeddings_csv(RelateModel::init(3, 1, init, 5), vocab) == csv);
}

}
