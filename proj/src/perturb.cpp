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

#include "relate/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "relate/error.hpp"
#include "relate/eval.hpp"
#include "relate/io.hpp"
#include "relate/rng.hpp"

namespace relate {

std::string_view perturbation_name(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kEdgeAddition: return "edge_addition";
    case PerturbationKind::kEdgeDeletion: return "edge_deletion";
    case PerturbationKind::kInverseRelationFlip: return "inverse_flip";
    case PerturbationKind::kRelationSwap: return "relation_swap";
    case PerturbationKind::kCounterfactualInjection: return "counterfactual";
  }
  return "?";
}

PerturbationKind parse_perturbation_kind(std::string_view name) {
  for (PerturbationKind k : kAllPerturbations) {
    if (perturbation_name(k) == name) return k;
  }
  throw ConfigError("unknown perturbation '" + std::string(name) +
                    "' (expected edge_addition, edge_deletion, inverse_flip, relation_swap or "
                    "counterfactual)");
}

std::size_t edit_budget(double ratio, std::size_t train_size) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw SpecError("perturbation ratio must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(train_size)));
  return std::max<std::size_t>(1, k);
}

std::string_view edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::kAdd: return "add";
    case EditOp::kDelete: return "del";
    case EditOp::kModify: return "mod";
    case EditOp::kMerge: return "merge";
  }
  return "?";
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InternalError("cosine_similarity: size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::set<Triple> all_known(const TripleList& train, const KnowledgeGraph& kg) {
  std::set<Triple> known(train.begin(), train.end());
  known.insert(kg.train.begin(), kg.train.end());
  known.insert(kg.valid.begin(), kg.valid.end());
  known.insert(kg.test.begin(), kg.test.end());
  return known;
}

// First k entries of a seeded permutation of [0, n).
std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

PerturbationResult edge_addition(const TripleList& train, const KnowledgeGraph& kg,
                                 std::size_t k, Rng& rng) {
  const std::size_t ne = kg.num_entities();
  const std::size_t nr = kg.num_relations();
  std::set<Triple> known = all_known(train, kg);
  const std::size_t total = ne * ne * nr;
  const std::size_t available = total - known.size();
  if (k > available) {
    throw SpecError("edge addition needs " + std::to_string(k) + " new triples but only " +
                    std::to_string(available) + " are absent from every split");
  }
  PerturbationResult out;
  out.train = train;
  auto add = [&](const Triple& t) {
    known.insert(t);
    out.train.push_back(t);
    out.log.push_back({EditOp::kAdd, std::nullopt, t});
  };
  if (available < 4 * k) {
    TripleList free;
    for (EntityId h = 0; h < ne; ++h) {
      for (RelationId r = 0; r < nr; ++r) {
        for (EntityId t = 0; t < ne; ++t) {
          if (!known.count({h, r, t})) free.push_back({h, r, t});
        }
      }
    }
    for (std::size_t i : choose_indices(free.size(), k, rng)) add(free[i]);
    return out;
  }
  while (out.log.size() < k) {
    const Triple t{static_cast<EntityId>(uniform_index(rng, ne)),
                   static_cast<RelationId>(uniform_index(rng, nr)),
                   static_cast<EntityId>(uniform_index(rng, ne))};
    if (!known.count(t)) add(t);
  }
  return out;
}

PerturbationResult edge_deletion(const TripleList& train, std::size_t k, Rng& rng) {
  if (k > train.size()) {
    throw SpecError("edge deletion of " + std::to_string(k) + " triples exceeds the " +
                    std::to_string(train.size()) + " available");
  }
  PerturbationResult out;
  std::vector<char> removed(train.size(), 0);
  for (std::size_t i : choose_indices(train.size(), k, rng)) {
    removed[i] = 1;
    out.log.push_back({EditOp::kDelete, train[i], std::nullopt});
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!removed[i]) out.train.push_back(train[i]);
  }
  return out;
}

// Rewrites k chosen triples; results already present are merged away.
template <typename Rewrite>
PerturbationResult rewrite_chosen(const TripleList& train, const std::vector<std::size_t>& chosen,
                                  Rewrite&& rewrite) {
  std::vector<char> is_chosen(train.size(), 0);
  for (std::size_t i : chosen) is_chosen[i] = 1;
  std::set<Triple> present;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!is_chosen[i]) present.insert(train[i]);
  }
  std::vector<std::optional<Triple>> replacement(train.size());
  PerturbationResult out;
  for (std::size_t i : chosen) {
    const Triple after = rewrite(train[i]);
    if (present.count(after)) {
      out.log.push_back({EditOp::kMerge, train[i], after});
    } else {
      present.insert(after);
      replacement[i] = after;
      out.log.push_back({EditOp::kModify, train[i], after});
    }
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!is_chosen[i]) {
      out.train.push_back(train[i]);
    } else if (replacement[i]) {
      out.train.push_back(*replacement[i]);
    }
  }
  return out;
}

PerturbationResult inverse_flip(const TripleList& train, const PerturbationSpec& spec,
                                std::size_t k, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const RelationId r = train[i].relation;
    if (!spec.inverse_pair || r == spec.inverse_pair->first || r == spec.inverse_pair->second) {
      eligible.push_back(i);
    }
  }
  if (k > eligible.size()) {
    throw SpecError("inverse flip of " + std::to_string(k) + " triples exceeds the " +
                    std::to_string(eligible.size()) + " eligible");
  }
  std::vector<std::size_t> chosen;
  for (std::size_t j : choose_indices(eligible.size(), k, rng)) chosen.push_back(eligible[j]);
  return rewrite_chosen(train, chosen, [&](const Triple& t) {
    RelationId r = t.relation;
    if (spec.inverse_pair) {
      r = r == spec.inverse_pair->first ? spec.inverse_pair->second : spec.inverse_pair->first;
    }
    return Triple{t.tail, r, t.head};
  });
}

PerturbationResult relation_swap(const TripleList& train, std::size_t num_relations,
                                 std::size_t k, Rng& rng) {
  if (num_relations < 2) throw SpecError("relation swap needs at least 2 relations");
  if (k > train.size()) {
    throw SpecError("relation swap of " + std::to_string(k) + " triples exceeds the " +
                    std::to_string(train.size()) + " available");
  }
  const auto chosen = choose_indices(train.size(), k, rng);
  return rewrite_chosen(train, chosen, [&](const Triple& t) {
    auto r = static_cast<RelationId>(uniform_index(rng, num_relations - 1));
    if (r >= t.relation) ++r;
    return Triple{t.head, r, t.tail};
  });
}

PerturbationResult counterfactual(const TripleList& train, const KnowledgeGraph& kg,
                                  const PerturbationSpec& spec, const TypeSignatures* signatures,
                                  std::size_t k, Rng& rng) {
  if (signatures == nullptr) throw SpecError("counterfactual injection needs type signatures");
  const std::size_t ne = kg.num_entities();
  const std::size_t nr = kg.num_relations();
  if (signatures->rows() != ne) {
    throw SpecError("type signatures do not cover every entity");
  }
  const std::size_t cols = signatures->cols();

  Matrix head_centroid(nr, cols), tail_centroid(nr, cols);
  std::vector<std::size_t> count(nr, 0);
  for (const Triple& t : train) {
    auto hc = head_centroid.row(t.relation);
    auto tc = tail_centroid.row(t.relation);
    const auto sh = signatures->row(t.head);
    const auto st = signatures->row(t.tail);
    for (std::size_t c = 0; c < cols; ++c) {
      hc[c] += sh[c];
      tc[c] += st[c];
    }
    ++count[t.relation];
  }
  std::vector<RelationId> relations;
  std::vector<std::vector<EntityId>> heads(nr), tails(nr);
  for (RelationId r = 0; r < nr; ++r) {
    if (count[r] == 0) continue;
    for (EntityId e = 0; e < ne; ++e) {
      if (cosine_similarity(signatures->row(e), head_centroid.row(r)) >=
          spec.plausibility_threshold) {
        heads[r].push_back(e);
      }
      if (cosine_similarity(signatures->row(e), tail_centroid.row(r)) >=
          spec.plausibility_threshold) {
        tails[r].push_back(e);
      }
    }
    if (!heads[r].empty() && !tails[r].empty()) relations.push_back(r);
  }
  if (relations.empty()) throw SpecError("no relation has type-plausible heads and tails");

  std::set<Triple> known = all_known(train, kg);
  PerturbationResult out;
  out.train = train;
  const std::size_t budget = spec.attempts_per_edit * k;
  std::vector<std::size_t> rejected(nr, 0);
  for (std::size_t attempt = 0; attempt < budget && out.log.size() < k; ++attempt) {
    const RelationId r = relations[uniform_index(rng, relations.size())];
    const Triple t{heads[r][uniform_index(rng, heads[r].size())], r,
                   tails[r][uniform_index(rng, tails[r].size())]};
    if (known.count(t)) {
      ++rejected[r];
      continue;
    }
    known.insert(t);
    out.train.push_back(t);
    out.log.push_back({EditOp::kAdd, std::nullopt, t});
  }
  if (out.log.size() < k) {
    const auto worst = static_cast<RelationId>(
        std::max_element(rejected.begin(), rejected.end()) - rejected.begin());
    throw SpecError("counterfactual sampler exhausted " + std::to_string(budget) +
                    " attempts after " + std::to_string(out.log.size()) + " of " +
                    std::to_string(k) + " injections; relation '" +
                    kg.vocab.relation_name(worst) + "' has too few plausible false triples");
  }
  return out;
}

}  // namespace

PerturbationResult apply_perturbation(const TripleList& train, const KnowledgeGraph& kg,
                                      const PerturbationSpec& spec,
                                      const TypeSignatures* signatures) {
  const std::size_t k = edit_budget(spec.ratio, train.size());
  Rng rng = make_rng(spec.seed, Stream::kPerturb);
  PerturbationResult out;
  switch (spec.kind) {
    case PerturbationKind::kEdgeAddition: out = edge_addition(train, kg, k, rng); break;
    case PerturbationKind::kEdgeDeletion: out = edge_deletion(train, k, rng); break;
    case PerturbationKind::kInverseRelationFlip: out = inverse_flip(train, spec, k, rng); break;
    case PerturbationKind::kRelationSwap:
      out = relation_swap(train, kg.num_relations(), k, rng);
      break;
    case PerturbationKind::kCounterfactualInjection:
      out = counterfactual(train, kg, spec, signatures, k, rng);
      break;
  }
  out.budget = k;
  return out;
}

std::string edit_log_to_tsv(const std::vector<Edit>& log, const Vocabulary& vocab) {
  std::string out =
      "op\tbefore_head\tbefore_relation\tbefore_tail\tafter_head\tafter_relation\tafter_tail\n";
  auto side = [&](const std::optional<Triple>& t) {
    if (!t) return std::string("\t\t");
    return vocab.entity_name(t->head) + "\t" + vocab.relation_name(t->relation) + "\t" +
           vocab.entity_name(t->tail);
  };
  for (const Edit& e : log) {
    out += std::string(edit_op_name(e.op)) + "\t" + side(e.before) + "\t" + side(e.after) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

RobustnessCell make_cell(const std::string& model, std::optional<PerturbationKind> kind,
                         double base_mrr, double base_hits10, double perturbed_mrr,
                         double perturbed_hits10) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RobustnessCell c;
  c.model = model;
  c.kind = kind;
  c.base_mrr = base_mrr;
  c.base_hits10 = base_hits10;
  c.perturbed_mrr = perturbed_mrr;
  c.perturbed_hits10 = perturbed_hits10;
  c.delta_mrr = base_mrr - perturbed_mrr;
  c.delta_hits10 = base_hits10 - perturbed_hits10;
  c.delta_mrr_pct = base_mrr > 0.0 ? c.delta_mrr / base_mrr * 100.0 : nan;
  c.delta_hits10_pct = base_hits10 > 0.0 ? c.delta_hits10 / base_hits10 * 100.0 : nan;
  return c;
}

namespace {

struct RunMetrics {
  double mrr = 0.0;
  double hits10 = 0.0;
};

RunMetrics train_and_test(const KnowledgeGraph& train_graph, const PreparedGraph& eval_graph,
                          const TrainConfig& config, ModelKind kind) {
  const PreparedGraph prepared = prepare_graph(train_graph, config);
  const TrainResult result = train(config, prepared.graph, prepared.signatures, kind);
  const EvalReport report = evaluate(*result.model, eval_graph.graph, eval_graph.graph.test,
                                     EvalOptions{config.workers});
  return {report.combined.mrr, report.combined.hits10};
}

}  // namespace

RobustnessReport robustness_experiment(const std::vector<ModelKind>& models,
                                       const KnowledgeGraph& kg,
                                       const std::vector<PerturbationSpec>& specs,
                                       const TrainConfig& config,
                                       const RobustnessOptions& options) {
  const std::vector<std::uint64_t> seeds =
      options.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : options.seeds;
  const double n = static_cast<double>(seeds.size());
  const PreparedGraph clean = prepare_graph(kg, config);
  const TypeSignatures clean_signatures =
      infer_type_signatures(kg.train, kg.valid, kg.num_entities(), kg.num_relations());

  RobustnessReport report;
  for (ModelKind kind : models) {
    const std::string name(model_kind_name(kind));
    auto context = [&](const std::string& what, const Error& e) {
      return TrainingAbort("model " + name + ", " + what + ": " + e.what());
    };
    RunMetrics base;
    for (std::uint64_t seed : seeds) {
      TrainConfig run_config = config;
      run_config.seed = seed;
      try {
        const RunMetrics m = train_and_test(kg, clean, run_config, kind);
        base.mrr += m.mrr / n;
        base.hits10 += m.hits10 / n;
      } catch (const TrainingAbort& e) {
        throw context("clean run", e);
      }
    }
    report.cells.push_back(make_cell(name, std::nullopt, base.mrr, base.hits10, base.mrr,
                                     base.hits10));
    for (const PerturbationSpec& spec : specs) {
      RunMetrics perturbed;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        PerturbationSpec run_spec = spec;
        run_spec.seed = spec.seed + i;
        TrainConfig run_config = config;
        run_config.seed = seeds[i];
        const PerturbationResult edit =
            apply_perturbation(kg.train, kg, run_spec, &clean_signatures);
        if (options.on_perturbation) options.on_perturbation(kind, run_spec, i, edit);
        KnowledgeGraph perturbed_kg = kg;
        perturbed_kg.train = edit.train;
        perturbed_kg.rebuild_filter();
        try {
          const RunMetrics m = train_and_test(perturbed_kg, clean, run_config, kind);
          perturbed.mrr += m.mrr / n;
          perturbed.hits10 += m.hits10 / n;
        } catch (const TrainingAbort& e) {
          throw context(std::string(perturbation_name(spec.kind)), e);
        }
      }
      report.cells.push_back(
          make_cell(name, spec.kind, base.mrr, base.hits10, perturbed.mrr, perturbed.hits10));
    }
  }
  return report;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

}  // namespace

std::string robustness_to_csv(const RobustnessReport& report) {
  std::vector<std::string> models;
  std::vector<std::string> rows;
  std::map<std::pair<std::string, std::string>, const RobustnessCell*> cells;
  for (const auto& c : report.cells) {
    if (std::find(models.begin(), models.end(), c.model) == models.end()) {
      models.push_back(c.model);
    }
    if (!c.kind) continue;
    const std::string row(perturbation_name(*c.kind));
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    cells[{row, c.model}] = &c;
  }
  std::string out = "perturbation";
  for (const auto& m : models) out += "," + m + "_delta_mrr_pct," + m + "_delta_hits10_pct";
  out += "\n";
  for (const auto& row : rows) {
    out += row;
    for (const auto& m : models) {
      auto it = cells.find({row, m});
      if (it == cells.end()) {
        out += ",,";
      } else {
        out += "," + num(it->second->delta_mrr_pct) + "," + num(it->second->delta_hits10_pct);
      }
    }
    out += "\n";
  }
  return out;
}

std::string robustness_to_long_csv(const RobustnessReport& report) {
  std::string out =
      "model,perturbation,base_mrr,base_hits10,perturbed_mrr,perturbed_hits10,delta_mrr,"
      "delta_mrr_pct,delta_hits10,delta_hits10_pct\n";
  for (const auto& c : report.cells) {
    out += c.model + "," + (c.kind ? std::string(perturbation_name(*c.kind)) : "none") + "," +
           num(c.base_mrr) + "," + num(c.base_hits10) + "," + num(c.perturbed_mrr) + "," +
           num(c.perturbed_hits10) + "," + num(c.delta_mrr) + "," + num(c.delta_mrr_pct) + "," +
           num(c.delta_hits10) + "," + num(c.delta_hits10_pct) + "\n";
  }
  return out;
}

}  // namespace relate
