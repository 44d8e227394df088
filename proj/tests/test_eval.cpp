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
#include <limits>
#include <set>

#include "checks.hpp"
#include "helpers.hpp"
#include "relate/error.hpp"
#include "relate/eval.hpp"
#include "relate/training.hpp"

using namespace relate;

namespace {

// Scores known triples +inf and everything else 0.
class KnownTripleModel final : public ScoreModel {
 public:
  KnownTripleModel(std::size_t ne, std::size_t nr, const TripleList& facts)
      : ne_(ne), nr_(nr), facts_(facts.begin(), facts.end()) {}
  std::string_view kind() const override { return "known"; }
  std::size_t num_entities() const override { return ne_; }
  std::size_t num_relations() const override { return nr_; }
  std::size_t dim() const override { return 0; }
  double gamma() const override { return 0.0; }
  double score(const Triple& t) const override {
    return facts_.count(t) ? std::numeric_limits<double>::infinity() : 0.0;
  }
  void accumulate_gradient(const Triple&, double, Gradient&) const override {}
  void touch_rows(const Triple&, Gradient&) const override {}
  ParameterSet& parameters() override { return params_; }
  const ParameterSet& parameters() const override { return params_; }
  std::unique_ptr<ScoreModel> clone() const override {
    return std::make_unique<KnownTripleModel>(*this);
  }

 private:
  std::size_t ne_, nr_;
  std::set<Triple> facts_;
  ParameterSet params_;
};

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("rank rule") {
  const double unique[] = {0.1, 5.0, 0.3};
  CHECK(rank_from_scores(unique, 1, {}) == 1.0);

  std::vector<double> flat(11, 2.0);
  CHECK(rank_from_scores(flat, 0, {}) == 6.0);
  CHECK(rank_from_scores(flat, 0, {3, 4}) == 5.0);

  const double s[] = {1.0, 3.0, 2.0, 3.0};
  // 3 scores above the answer's 1.0, but entity 1 is filtered.
  CHECK(rank_from_scores(s, 0, {1}) == 3.0);

  const double bad[] = {std::nan(""), 1.0};
  CHECK_THROWS_AS(rank_from_scores(bad, 0, {}), InternalError);
  CHECK_THROWS_AS(rank_from_scores(bad, 5, {}), InternalError);
}

TEST_CASE("metrics from ranks") {
  RankAccumulator acc;
  acc.add(1.0);
  acc.add(4.0);
  const auto r = RankingReport::from(acc);
  CHECK(r.mrr == doctest::Approx(0.625));
  CHECK(r.mr == doctest::Approx(2.5));
  CHECK(r.hits1 == 0.5);
  CHECK(r.hits3 == 0.5);
  CHECK(r.hits10 == 1.0);
  CHECK(r.n_queries == 2);
}

TEST_CASE("perfect model") {
  const TripleList facts{{0, 0, 1}, {1, 0, 2}, {2, 1, 3}, {3, 1, 0}};
  const auto kg = testing::make_kg(5, 2, {facts[0], facts[1]}, {}, {facts[2], facts[3]});
  const KnownTripleModel m(5, 2, facts);
  const auto rep = evaluate(m, kg, kg.test);
  CHECK(rep.combined.mrr == 1.0);
  CHECK(rep.combined.mr == 1.0);
  CHECK(rep.combined.n_queries == 4);
}

TEST_CASE("ranks match the brute-force oracle") {
  const auto r = checks::ranking_oracle(8, 41);
  CHECK(r.graphs == 8);
  CHECK(r.queries > 0);
  CHECK(r.tied_queries > 0);
  CHECK(r.mismatches == 0);
}

TEST_CASE("parallel evaluation is identical") {
  const auto kg = generate_synthetic_kg(GeneratorConfig{}, 5);
  RelateInit init;
  init.dim = 16;
  const auto m = RelateModel::init(kg.num_entities(), kg.num_relations(), init, 1);
  const auto a = query_ranks(m, kg, kg.test, {1});
  const auto b = query_ranks(m, kg, kg.test, {3});
  CHECK(a == b);
  const auto ra = evaluate(m, kg, kg.test, {1});
  const auto rb = evaluate(m, kg, kg.test, {3});
  CHECK(report_to_json(ra, "relate", "test") == report_to_json(rb, "relate", "test"));
}

TEST_CASE("reciprocal head queries use the reverse relation") {
  const auto base = testing::make_kg(6, 2, {{0, 0, 1}, {2, 1, 3}, {4, 0, 5}}, {}, {{1, 0, 2}, {3, 1, 4}});
  const auto kg = augment_reciprocal(base);
  Rng rng(6);
  const auto m = testing::random_relate(6, 4, 8, rng);
  const auto ranks = query_ranks(m, kg, kg.test);
  for (std::size_t i = 0; i < kg.test.size(); ++i) {
    const Triple& t = kg.test[i];
    const Query rev{t.tail, t.relation + 2, Direction::kTail};
    CHECK(ranks[2 * i] == rank_query(m, rev, t.head, kg.filter));
    const Query tail{t.head, t.relation, Direction::kTail};
    CHECK(ranks[2 * i + 1] == rank_query(m, tail, t.tail, kg.filter));
  }
}

TEST_CASE("category breakdown") {
  const TripleList train{{0, 0, 1}, {2, 0, 3}, {4, 0, 5}};
  const auto kg = testing::make_kg(8, 1, train, {}, {{6, 0, 7}, {1, 0, 4}});
  Rng rng(7);
  const auto m = testing::random_relate(8, 1, 8, rng);
  const auto cats = classify_relations(kg.train);
  const auto by = evaluate_by_category(m, kg, kg.test, cats);
  const auto all = evaluate(m, kg, kg.test);
  REQUIRE(by.buckets.size() == 1);
  const auto& one = by.buckets.at("1-to-1");
  CHECK(one.at(Direction::kHead).mrr == all.head.mrr);
  CHECK(one.at(Direction::kTail).mrr == all.tail.mrr);

  const auto big = generate_synthetic_kg(GeneratorConfig{}, 8);
  RelateInit init;
  init.dim = 8;
  const auto bm = RelateModel::init(big.num_entities(), big.num_relations(), init, 2);
  const auto rep = evaluate_by_category(bm, big, big.test, classify_relations(big.train));
  std::size_t n = 0;
  for (const auto& [name, dirs] : rep.buckets) {
    for (const auto& [dir, r] : dirs) n += r.n_queries;
  }
  CHECK(n == 2 * big.test.size());
}

TEST_CASE("linear fit") {
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  const double y[] = {3.0, 5.0, 7.0, 9.0};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));

  const double one[] = {64.0};
  try {
    fit_line(std::span(one, 1), std::span(one, 1));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("need >= 2 points") != std::string::npos);
  }
}

TEST_CASE("benchmark amortization") {
  const ModelFactory factory = [](std::size_t dim) {
    RelateInit init;
    init.dim = dim;
    return std::make_unique<RelateModel>(RelateModel::init(500, 5, init, 1));
  };
  const std::size_t dims[] = {64, 256};
  const auto small = bench_scaling(factory, dims, 5000, 3, 1);
  const auto large = bench_scaling(factory, dims, 10000, 3, 1);
  for (std::size_t i = 0; i < 2; ++i) {
    const double ratio = large.points[i].seconds_per_triple / small.points[i].seconds_per_triple;
    CHECK(ratio < 2.0);
    CHECK(ratio > 0.5);
  }
}

}
