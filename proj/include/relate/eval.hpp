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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "relate/kg.hpp"
#include "relate/models.hpp"

namespace relate {

enum class Direction { kHead, kTail };

std::string_view direction_name(Direction d);

// (?, r, anchor) for kHead, (anchor, r, ?) for kTail.
struct Query {
  EntityId anchor = 0;
  RelationId relation = 0;
  Direction direction = Direction::kTail;
};

// Filtered rank with mean tie handling:
//   1 + #{unfiltered others scoring higher} + 0.5 * #{unfiltered others tied}.
// Known-true completions other than `answer` are skipped. `scratch` must hold
// num_entities() doubles.
double rank_query(const ScoreModel& model, const Query& query, EntityId answer,
                  const FilterIndex& filter, std::span<double> scratch);

double rank_query(const ScoreModel& model, const Query& query, EntityId answer,
                  const FilterIndex& filter);

// Same rule applied to an already computed score vector.
double rank_from_scores(std::span<const double> scores, EntityId answer,
                        const std::vector<EntityId>& known_true);

// Running sums; merging accumulators is exact (counts and sums of exact ranks
// in a fixed order per worker, reduced in worker order).
struct RankAccumulator {
  std::size_t n = 0;
  double sum_rank = 0.0;
  double sum_reciprocal = 0.0;
  std::size_t hits1 = 0;
  std::size_t hits3 = 0;
  std::size_t hits10 = 0;

  void add(double rank);
  void merge(const RankAccumulator& other);
};

struct RankingReport {
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t n_queries = 0;

  static RankingReport from(const RankAccumulator& acc);
};

struct EvalReport {
  RankingReport head;
  RankingReport tail;
  RankingReport combined;
};

struct EvalOptions {
  std::size_t workers = 1;
};

// One head and one tail query per triple. With a reciprocal graph, head
// prediction of (h, r, t) is tail prediction of (t, r + |R|, h).
EvalReport evaluate(const ScoreModel& model, const KnowledgeGraph& kg, const TripleList& split,
                    const EvalOptions& options = {});

// Per-query ranks in split order: head query then tail query of each triple.
std::vector<double> query_ranks(const ScoreModel& model, const KnowledgeGraph& kg,
                                const TripleList& split, const EvalOptions& options = {});

inline constexpr const char* kUncategorized = "uncategorized";

struct CategoryReport {
  // bucket name -> direction -> report. Bucket names come from category_name
  // or kUncategorized.
  std::map<std::string, std::map<Direction, RankingReport>> buckets;
};

CategoryReport evaluate_by_category(const ScoreModel& model, const KnowledgeGraph& kg,
                                    const TripleList& split,
                                    const std::map<RelationId, RelationCategory>& categories,
                                    const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Output formats

std::string report_to_json(const EvalReport& report, const std::string& model_kind,
                           const std::string& split_name);
std::string report_to_text(const EvalReport& report);
std::string category_report_to_csv(const CategoryReport& report);
std::string category_report_to_text(const CategoryReport& report);

// ---------------------------------------------------------------------------
// Scaling benchmark

struct ScalingPoint {
  std::size_t dim = 0;
  double seconds_per_triple = 0.0;
};

struct EfficiencyReport {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Throws ConfigError with
// fewer than 2 points.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

using ModelFactory = std::function<std::unique_ptr<ScoreModel>(std::size_t dim)>;

// Times scoring of `n_triples` random triples at each dim. One discarded warm
// up pass, then the minimum over `repetitions`.
EfficiencyReport bench_scaling(const ModelFactory& factory, std::span<const std::size_t> dims,
                               std::size_t n_triples, std::size_t repetitions,
                               std::uint64_t seed = 0);

std::string efficiency_report_to_json(const EfficiencyReport& report);

}  // namespace relate
