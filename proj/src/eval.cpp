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

#include "relate/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "json.hpp"
#include "relate/error.hpp"
#include "relate/rng.hpp"

namespace relate {

std::string_view direction_name(Direction d) { return d == Direction::kHead ? "head" : "tail"; }

double rank_from_scores(std::span<const double> scores, EntityId answer,
                        const std::vector<EntityId>& known_true) {
  if (answer >= scores.size()) throw InternalError("answer id out of range");
  const double target = scores[answer];
  if (std::isnan(target)) throw InternalError("answer scored NaN");
  std::size_t greater = 0;
  std::size_t ties = 0;
  auto filtered = known_true.begin();
  for (std::size_t e = 0; e < scores.size(); ++e) {
    while (filtered != known_true.end() && *filtered < e) ++filtered;
    if (e == answer) continue;
    if (filtered != known_true.end() && *filtered == e) continue;
    if (scores[e] > target) {
      ++greater;
    } else if (scores[e] == target) {
      ++ties;
    }
  }
  return 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(ties);
}

double rank_query(const ScoreModel& model, const Query& query, EntityId answer,
                  const FilterIndex& filter, std::span<double> scratch) {
  if (scratch.size() != model.num_entities()) throw InternalError("rank_query scratch size");
  if (query.direction == Direction::kTail) {
    model.score_tails(query.anchor, query.relation, scratch);
    return rank_from_scores(scratch, answer, filter.tails_of(query.anchor, query.relation));
  }
  model.score_heads(query.relation, query.anchor, scratch);
  return rank_from_scores(scratch, answer, filter.heads_of(query.relation, query.anchor));
}

double rank_query(const ScoreModel& model, const Query& query, EntityId answer,
                  const FilterIndex& filter) {
  std::vector<double> scratch(model.num_entities());
  return rank_query(model, query, answer, filter, scratch);
}

void RankAccumulator::add(double rank) {
  ++n;
  sum_rank += rank;
  sum_reciprocal += 1.0 / rank;
  if (rank <= 1.0) ++hits1;
  if (rank <= 3.0) ++hits3;
  if (rank <= 10.0) ++hits10;
}

void RankAccumulator::merge(const RankAccumulator& other) {
  n += other.n;
  sum_rank += other.sum_rank;
  sum_reciprocal += other.sum_reciprocal;
  hits1 += other.hits1;
  hits3 += other.hits3;
  hits10 += other.hits10;
}

RankingReport RankingReport::from(const RankAccumulator& acc) {
  RankingReport r;
  r.n_queries = acc.n;
  if (acc.n == 0) return r;
  const double n = static_cast<double>(acc.n);
  r.mr = acc.sum_rank / n;
  r.mrr = acc.sum_reciprocal / n;
  r.hits1 = static_cast<double>(acc.hits1) / n;
  r.hits3 = static_cast<double>(acc.hits3) / n;
  r.hits10 = static_cast<double>(acc.hits10) / n;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double rank_one(const ScoreModel& model, const KnowledgeGraph& kg, const Triple& t,
                Direction direction, std::span<double> scratch) {
  if (direction == Direction::kTail) {
    return rank_query(model, {t.head, t.relation, Direction::kTail}, t.tail, kg.filter, scratch);
  }
  if (kg.reciprocal) {
    const auto reverse = static_cast<RelationId>(t.relation + kg.base_relations);
    return rank_query(model, {t.tail, reverse, Direction::kTail}, t.head, kg.filter, scratch);
  }
  return rank_query(model, {t.tail, t.relation, Direction::kHead}, t.head, kg.filter, scratch);
}

template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace

std::vector<double> query_ranks(const ScoreModel& model, const KnowledgeGraph& kg,
                                const TripleList& split, const EvalOptions& options) {
  std::vector<double> ranks(2 * split.size());
  parallel_chunks(split.size(), options.workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch(model.num_entities());
    for (std::size_t i = lo; i < hi; ++i) {
      ranks[2 * i] = rank_one(model, kg, split[i], Direction::kHead, scratch);
      ranks[2 * i + 1] = rank_one(model, kg, split[i], Direction::kTail, scratch);
    }
  });
  return ranks;
}

EvalReport evaluate(const ScoreModel& model, const KnowledgeGraph& kg, const TripleList& split,
                    const EvalOptions& options) {
  const auto ranks = query_ranks(model, kg, split, options);
  RankAccumulator head, tail, both;
  for (std::size_t i = 0; i < split.size(); ++i) {
    head.add(ranks[2 * i]);
    tail.add(ranks[2 * i + 1]);
    both.add(ranks[2 * i]);
    both.add(ranks[2 * i + 1]);
  }
  return {RankingReport::from(head), RankingReport::from(tail), RankingReport::from(both)};
}

CategoryReport evaluate_by_category(const ScoreModel& model, const KnowledgeGraph& kg,
                                    const TripleList& split,
                                    const std::map<RelationId, RelationCategory>& categories,
                                    const EvalOptions& options) {
  const auto ranks = query_ranks(model, kg, split, options);
  std::map<std::string, std::map<Direction, RankAccumulator>> acc;
  for (std::size_t i = 0; i < split.size(); ++i) {
    auto it = categories.find(split[i].relation);
    const std::string bucket =
        it == categories.end() ? kUncategorized : std::string(category_name(it->second.kind));
    acc[bucket][Direction::kHead].add(ranks[2 * i]);
    acc[bucket][Direction::kTail].add(ranks[2 * i + 1]);
  }
  CategoryReport report;
  for (const auto& [bucket, dirs] : acc) {
    for (const auto& [dir, a] : dirs) report.buckets[bucket][dir] = RankingReport::from(a);
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json ranking_json(const RankingReport& r) {
  return {{"mr", r.mr},       {"mrr", r.mrr},       {"hits1", r.hits1},
          {"hits3", r.hits3}, {"hits10", r.hits10}, {"n_queries", r.n_queries}};
}

std::string fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string text_row(const std::string& label, const RankingReport& r) {
  return pad(label, 16) + pad(fixed(r.mr, 2), 10) + pad(fixed(r.mrr, 4), 9) +
         pad(fixed(r.hits1, 4), 9) + pad(fixed(r.hits3, 4), 9) + pad(fixed(r.hits10, 4), 9) +
         pad(std::to_string(r.n_queries), 9) + "\n";
}

const std::string kTextHeader = pad("", 16) + pad("MR", 10) + pad("MRR", 9) + pad("H@1", 9) +
                                pad("H@3", 9) + pad("H@10", 9) + pad("n", 9) + "\n";

}  // namespace

std::string report_to_json(const EvalReport& report, const std::string& model_kind,
                           const std::string& split_name) {
  nlohmann::json j;
  j["model"] = model_kind;
  j["split"] = split_name;
  j["head"] = ranking_json(report.head);
  j["tail"] = ranking_json(report.tail);
  j["combined"] = ranking_json(report.combined);
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
  return kTextHeader + text_row("head", report.head) + text_row("tail", report.tail) +
         text_row("combined", report.combined);
}

std::string category_report_to_csv(const CategoryReport& report) {
  std::string out = "category,direction,mr,mrr,hits1,hits3,hits10,n\n";
  for (const auto& [bucket, dirs] : report.buckets) {
    for (const auto& [dir, r] : dirs) {
      out += bucket + "," + std::string(direction_name(dir)) + "," + fixed(r.mr, 6) + "," +
             fixed(r.mrr, 6) + "," + fixed(r.hits1, 6) + "," + fixed(r.hits3, 6) + "," +
             fixed(r.hits10, 6) + "," + std::to_string(r.n_queries) + "\n";
    }
  }
  return out;
}

std::string category_report_to_text(const CategoryReport& report) {
  std::string out = kTextHeader;
  for (const auto& [bucket, dirs] : report.buckets) {
    for (const auto& [dir, r] : dirs) {
      out += text_row(bucket + " " + std::string(direction_name(dir)), r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InternalError("fit_line: size mismatch");
  if (x.size() < 2) throw ConfigError("need >= 2 points for a linear fit");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("linear fit needs at least 2 distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

EfficiencyReport bench_scaling(const ModelFactory& factory, std::span<const std::size_t> dims,
                               std::size_t n_triples, std::size_t repetitions,
                               std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("need >= 2 points for a linear fit");
  if (n_triples == 0 || repetitions == 0) {
    throw ConfigError("bench needs positive n_triples and repetitions");
  }
  for (std::size_t d : dims) {
    if (d < 2 || d % 2 != 0) throw ConfigError("bench dims must be even and positive");
  }
  EfficiencyReport report;
  std::vector<double> xs, ys;
  for (std::size_t d : dims) {
    const auto model = factory(d);
    Rng rng = make_rng(seed, Stream::kBatch);
    TripleList triples(n_triples);
    for (auto& t : triples) {
      t.head = static_cast<EntityId>(uniform_index(rng, model->num_entities()));
      t.relation = static_cast<RelationId>(uniform_index(rng, model->num_relations()));
      t.tail = static_cast<EntityId>(uniform_index(rng, model->num_entities()));
    }
    volatile double sink = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep <= repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      double acc = 0.0;
      for (const Triple& t : triples) acc += model->score(t);
      const auto stop = std::chrono::steady_clock::now();
      sink = sink + acc;
      if (rep == 0) continue;
      best = std::min(best, std::chrono::duration<double>(stop - start).count());
    }
    const double per_triple = best / static_cast<double>(n_triples);
    report.points.push_back({d, per_triple});
    xs.push_back(static_cast<double>(d));
    ys.push_back(per_triple);
  }
  const LinearFit fit = fit_line(xs, ys);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.r_squared = fit.r_squared;
  return report;
}

std::string efficiency_report_to_json(const EfficiencyReport& report) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"dim", p.dim}, {"seconds_per_triple", p.seconds_per_triple}});
  }
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["r_squared"] = report.r_squared;
  return j.dump(2) + "\n";
}

}  // namespace relate
