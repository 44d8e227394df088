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

#include "relate/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relate/error.hpp"
#include "relate/eval.hpp"
#include "relate/formal.hpp"
#include "relate/io.hpp"
#include "relate/kg.hpp"
#include "relate/models.hpp"
#include "relate/perturb.hpp"
#include "relate/rng.hpp"
#include "relate/training.hpp"

namespace fs = std::filesystem;

namespace relate::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Work = std::function<void(std::ostream& out, std::ostream& err)>;

const std::vector<std::string> kModelNames = {"relate", "transe", "rotate"};

std::vector<std::string> perturbation_names() {
  std::vector<std::string> names;
  for (auto k : kAllPerturbations) names.emplace_back(perturbation_name(k));
  return names;
}

std::string config_help() {
  std::string text = "Config file keys (key=value, '#' comments) and defaults:\n";
  std::istringstream in(format_config(TrainConfig{}));
  for (std::string line; std::getline(in, line);) text += "  " + line + "\n";
  text += "  loss_margin=<margin>\n  warmup_steps=<max_steps / 10>\n";
  return text;
}

void require_output_dir(const std::string& path) {
  if (fs::exists(path) && !fs::is_directory(path)) {
    throw UsageError("--out: '" + path + "' exists and is not a directory");
  }
}

void require_output_file(const std::string& path, const char* flag) {
  if (fs::is_directory(path)) throw UsageError(std::string(flag) + ": '" + path + "' is a directory");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

TrainConfig load_config_or_usage(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

std::string seeds_tsv(std::uint64_t seed, std::initializer_list<std::pair<const char*, Stream>> streams) {
  std::string out = "stream\tseed\n";
  out += "root\t" + std::to_string(seed) + "\n";
  for (const auto& [name, stream] : streams) {
    out += std::string(name) + "\t" + std::to_string(derive_seed(seed, stream)) + "\n";
  }
  return out;
}

std::string train_seeds_tsv(std::uint64_t seed) {
  return seeds_tsv(seed, {{"init", Stream::kInit},
                          {"batch", Stream::kBatch},
                          {"negatives", Stream::kNegatives},
                          {"valid_subsample", Stream::kValidSubsample}});
}

// Reattaches reciprocal augmentation and type signatures to a checkpoint so it
// scores exactly as it did during training.
struct LoadedModel {
  KnowledgeGraph graph;
  std::unique_ptr<ScoreModel> model;
};

LoadedModel load_model_for(const std::string& checkpoint, const std::string& data) {
  LoadedModel lm;
  lm.model = load_checkpoint(checkpoint);
  KnowledgeGraph kg = load_dataset(data);
  if (lm.model->num_entities() != kg.num_entities()) {
    throw ConfigError("checkpoint has " + std::to_string(lm.model->num_entities()) +
                      " entities, dataset has " + std::to_string(kg.num_entities()));
  }
  TrainConfig shape;
  if (lm.model->num_relations() == 2 * kg.num_relations()) {
    shape.reciprocal = true;
  } else if (lm.model->num_relations() != kg.num_relations()) {
    throw ConfigError("checkpoint has " + std::to_string(lm.model->num_relations()) +
                      " relations, dataset has " + std::to_string(kg.num_relations()));
  }
  auto* relate = dynamic_cast<RelateModel*>(lm.model.get());
  shape.type_lambda = relate != nullptr && relate->type_context() ? 1.0 : 0.0;
  auto prepared = prepare_graph(kg, shape);
  lm.graph = std::move(prepared.graph);
  if (prepared.signatures) {
    TypeContext ctx = *relate->type_context();
    ctx.signatures = prepared.signatures;
    relate->set_type_context(ctx);
  }
  return lm;
}

// ---------------------------------------------------------------------------

struct GenOpts {
  std::string out;
  std::size_t entities = 200;
  std::size_t depth = 4;
  std::uint64_t seed = 0;
};

Work gen_synthetic_work(const GenOpts& o) {
  require_output_dir(o.out);
  GeneratorConfig gc;
  gc.entities = o.entities;
  gc.depth = o.depth;
  return [o, gc](std::ostream& out, std::ostream&) {
    const auto kg = generate_synthetic_kg(gc, o.seed);
    make_dirs(o.out);
    write_dataset(o.out, kg,
                  "synthetic family graph, entities=" + std::to_string(o.entities) +
                      " depth=" + std::to_string(o.depth) + " seed=" + std::to_string(o.seed));
    write_file_atomic(fs::path(o.out) / "seeds.tsv",
                      seeds_tsv(o.seed, {{"generator", Stream::kGenerator}, {"split", Stream::kSplit}}));
    out << "wrote " << kg.train.size() << " train, " << kg.valid.size() << " valid, "
        << kg.test.size() << " test triples over " << kg.num_entities() << " entities to "
        << o.out << "\n";
  };
}

struct TrainOpts {
  std::string config;
  std::string data;
  std::string out;
  std::string model = "relate";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool no_timing = false;
};

Work train_work(const TrainOpts& o) {
  require_output_dir(o.out);
  TrainConfig config = load_config_or_usage(o.config);
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const ModelKind kind = parse_model_kind(o.model);
  return [o, config, kind](std::ostream& out, std::ostream& err) {
    const KnowledgeGraph kg = load_dataset(o.data);
    const auto prepared = prepare_graph(kg, config);
    err << "training " << model_kind_name(kind) << " on " << kg.train.size()
        << " triples, seed " << config.seed << "\n";
    auto result = train(config, prepared.graph, prepared.signatures, kind);
    const auto report = evaluate(*result.model, prepared.graph, prepared.graph.test,
                                 EvalOptions{config.workers});
    make_dirs(o.out);
    const fs::path dir(o.out);
    write_file_atomic(dir / "config.cfg", format_config(config));
    write_file_atomic(dir / "seeds.tsv", train_seeds_tsv(config.seed));
    write_file_atomic(dir / "history.csv", history_to_csv(result.history, !o.no_timing));
    save_checkpoint(*result.model, dir / "checkpoint.json");
    write_file_atomic(dir / "eval.json",
                      report_to_json(report, std::string(model_kind_name(kind)), "test"));
    out << "steps " << result.steps_run << ", best step " << result.best_step
        << ", best valid MRR " << format_double(result.best_valid_mrr) << "\n";
    out << report_to_text(report);
  };
}

struct EvalOpts {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out;
  std::string categories;
  std::size_t workers = 1;
};

Work eval_work(const EvalOpts& o) {
  if (!o.out.empty()) require_output_file(o.out, "--out");
  if (!o.categories.empty()) require_output_file(o.categories, "--categories");
  return [o](std::ostream& out, std::ostream&) {
    auto lm = load_model_for(o.checkpoint, o.data);
    const TripleList& split = o.split == "valid" ? lm.graph.valid : lm.graph.test;
    const EvalOptions opts{o.workers};
    const auto report = evaluate(*lm.model, lm.graph, split, opts);
    std::optional<CategoryReport> cats;
    if (!o.categories.empty()) {
      const auto categories =
          classify_relations(strip_reciprocal(lm.graph.train, lm.graph.base_relations));
      cats = evaluate_by_category(*lm.model, lm.graph, split, categories, opts);
    }
    if (!o.out.empty()) {
      write_file_atomic(o.out, report_to_json(report, std::string(lm.model->kind()), o.split));
    }
    if (cats) write_file_atomic(o.categories, category_report_to_csv(*cats));
    out << report_to_text(report);
    if (cats) out << category_report_to_text(*cats);
  };
}

struct PerturbOpts {
  std::string data;
  std::string kind;
  double ratio = 0.1;
  std::uint64_t seed = 0;
  std::string out;
  std::string inverse_pair;
  double threshold = 0.5;
};

Work perturb_work(const PerturbOpts& o) {
  require_output_dir(o.out);
  PerturbationSpec spec;
  spec.kind = parse_perturbation_kind(o.kind);
  spec.ratio = o.ratio;
  spec.seed = o.seed;
  spec.plausibility_threshold = o.threshold;
  std::optional<std::pair<std::string, std::string>> pair_names;
  if (!o.inverse_pair.empty()) {
    if (spec.kind != PerturbationKind::kInverseRelationFlip) {
      throw UsageError("--inverse-pair only applies to inverse_flip");
    }
    const auto comma = o.inverse_pair.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == o.inverse_pair.size()) {
      throw UsageError("--inverse-pair: expected 'relation,relation', got '" + o.inverse_pair + "'");
    }
    pair_names.emplace(o.inverse_pair.substr(0, comma), o.inverse_pair.substr(comma + 1));
  }
  return [o, spec, pair_names](std::ostream& out, std::ostream&) mutable {
    const KnowledgeGraph kg = load_dataset(o.data);
    if (pair_names) {
      const auto a = kg.vocab.find_relation(pair_names->first);
      const auto b = kg.vocab.find_relation(pair_names->second);
      if (!a || !b) throw VocabularyError("--inverse-pair names an unknown relation");
      spec.inverse_pair.emplace(*a, *b);
    }
    std::optional<TypeSignatures> sigs;
    if (spec.kind == PerturbationKind::kCounterfactualInjection) {
      sigs = infer_type_signatures(kg.train, kg.valid, kg.num_entities(), kg.num_relations());
    }
    const auto result = apply_perturbation(kg.train, kg, spec, sigs ? &*sigs : nullptr);
    make_dirs(o.out);
    const fs::path src(o.data);
    const fs::path dst(o.out);
    write_file_atomic(dst / "train.txt",
                      format_triples(result.train, kg.vocab,
                                     std::string(perturbation_name(spec.kind)) +
                                         " ratio=" + format_double(o.ratio) +
                                         " seed=" + std::to_string(o.seed)));
    // Held-out splits are copied byte for byte.
    write_file_atomic(dst / "valid.txt", read_file(src / "valid.txt"));
    write_file_atomic(dst / "test.txt", read_file(src / "test.txt"));
    write_file_atomic(fs::path(o.out) / "edits.tsv", edit_log_to_tsv(result.log, kg.vocab));
    out << perturbation_name(spec.kind) << ": " << result.log.size() << " edits (budget "
        << result.budget << "), train " << kg.train.size() << " -> " << result.train.size()
        << "\n";
  };
}

struct RobustOpts {
  std::string config;
  std::string data;
  std::string out;
  std::vector<std::string> models;
  std::vector<std::string> kinds;
  double ratio = 0.1;
  std::size_t runs = 3;
  std::uint64_t seed = 0;
  std::optional<std::size_t> workers;
  bool edit_logs = false;
};

Work robustness_work(const RobustOpts& o) {
  require_output_dir(o.out);
  TrainConfig config = load_config_or_usage(o.config);
  if (o.workers) config.workers = *o.workers;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  std::vector<ModelKind> models;
  for (const auto& m : o.models.empty() ? kModelNames : o.models) models.push_back(parse_model_kind(m));
  std::vector<PerturbationSpec> specs;
  for (const auto& k : o.kinds.empty() ? perturbation_names() : o.kinds) {
    PerturbationSpec spec;
    spec.kind = parse_perturbation_kind(k);
    spec.ratio = o.ratio;
    spec.seed = o.seed;
    specs.push_back(spec);
  }
  RobustnessOptions ropts;
  for (std::size_t i = 0; i < o.runs; ++i) ropts.seeds.push_back(o.seed + i);
  return [o, config, models, specs, ropts](std::ostream& out, std::ostream& err) mutable {
    const KnowledgeGraph kg = load_dataset(o.data);
    make_dirs(o.out);
    const fs::path dir(o.out);
    if (o.edit_logs) {
      make_dirs(dir / "edits");
      ropts.on_perturbation = [&](ModelKind kind, const PerturbationSpec& spec, std::size_t run,
                                  const PerturbationResult& result) {
        const std::string name = std::string(model_kind_name(kind)) + "_" +
                                 std::string(perturbation_name(spec.kind)) + "_run" +
                                 std::to_string(run) + ".tsv";
        write_file_atomic(dir / "edits" / name, edit_log_to_tsv(result.log, kg.vocab));
      };
    }
    std::string seeds = "run\ttrain_seed\tperturb_seed\n";
    for (std::size_t i = 0; i < ropts.seeds.size(); ++i) {
      seeds += std::to_string(i) + "\t" + std::to_string(ropts.seeds[i]) + "\t" +
               std::to_string(o.seed + i) + "\n";
    }
    err << "robustness: " << models.size() << " models x " << specs.size()
        << " perturbations x " << ropts.seeds.size() << " runs\n";
    const auto report = robustness_experiment(models, kg, specs, config, ropts);
    write_file_atomic(dir / "seeds.tsv", seeds);
    write_file_atomic(dir / "robustness.csv", robustness_to_csv(report));
    write_file_atomic(dir / "robustness_long.csv", robustness_to_long_csv(report));
    out << robustness_to_csv(report);
  };
}

struct ExpressOpts {
  std::size_t entities = 3;
  std::size_t relations = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double gamma = 12.0;
  std::string out;
  bool verbose = false;
};

struct ExpressOutcome {
  std::size_t valid = 0;
};

Work verify_expressivity_work(const ExpressOpts& o, std::shared_ptr<ExpressOutcome> outcome) {
  if (!o.out.empty()) require_output_file(o.out, "--out");
  return [o, outcome](std::ostream& out, std::ostream&) {
    Rng rng = make_rng(o.seed, Stream::kFormal);
    nlohmann::json certs = nlohmann::json::array();
    for (std::size_t i = 0; i < o.trials; ++i) {
      const auto truth = TruthTable::random(o.entities, o.relations, rng);
      const auto cert = construct_expressive_embedding(truth, o.gamma);
      if (!reverify_certificate(cert)) {
        throw InternalError("certificate " + std::to_string(i) + " does not re-verify");
      }
      if (cert.valid) ++outcome->valid;
      if (o.verbose || !cert.valid) {
        out << "table " << i << ": " << (cert.valid ? "valid" : "INVALID") << ", "
            << cert.offending.size() << " offending, min true " << format_double(cert.min_true_score)
            << ", max false " << format_double(cert.max_false_score) << "\n";
      }
      if (!o.out.empty()) certs.push_back(nlohmann::json::parse(certificate_to_json(cert)));
    }
    if (!o.out.empty()) {
      nlohmann::json doc;
      doc["entities"] = o.entities;
      doc["relations"] = o.relations;
      doc["trials"] = o.trials;
      doc["seed"] = o.seed;
      doc["gamma"] = o.gamma;
      doc["valid"] = outcome->valid;
      doc["certificates"] = std::move(certs);
      write_file_atomic(o.out, doc.dump(2) + "\n");
    }
    out << outcome->valid << "/" << o.trials << " certificates valid\n";
  };
}

struct PatternOpts {
  std::size_t width = 8;
  std::size_t trials = 1000;
  double tolerance = 1e-12;
  std::uint64_t seed = 0;
  std::string out;
};

struct PatternOutcome {
  std::size_t failed = 0;
};

Work verify_patterns_work(const PatternOpts& o, std::shared_ptr<PatternOutcome> outcome) {
  if (!o.out.empty()) require_output_file(o.out, "--out");
  if (o.width < 2) throw UsageError("--width must be at least 2");
  return [o, outcome](std::ostream& out, std::ostream&) {
    Rng rng = make_rng(o.seed, Stream::kFormal);
    nlohmann::json doc = nlohmann::json::array();
    for (auto kind : kAllPatterns) {
      const auto relations = pattern_relations(kind, o.width, rng);
      const auto w = verify_pattern(kind, relations, o.trials, o.tolerance, o.seed);
      if (!w.passed) ++outcome->failed;
      out << (w.passed ? "PASS " : "FAIL ") << pattern_name(kind)
          << " residual=" << format_double(w.max_residual) << " trials=" << w.trials
          << (w.formalized ? " (formalized)" : "") << "\n";
      if (!w.passed && !w.counterexample.empty()) out << "  " << w.counterexample << "\n";
      doc.push_back(nlohmann::json::parse(witness_to_json(w)));
    }
    if (!o.out.empty()) write_file_atomic(o.out, doc.dump(2) + "\n");
  };
}

struct BenchOpts {
  std::vector<std::size_t> dims = {64, 128, 256, 512, 1024};
  std::size_t triples = 20000;
  std::size_t repetitions = 5;
  std::size_t entities = 1000;
  std::size_t relations = 10;
  std::string model = "relate";
  std::uint64_t seed = 0;
  std::string out;
};

Work bench_work(const BenchOpts& o) {
  if (!o.out.empty()) require_output_file(o.out, "--out");
  if (o.dims.size() < 2) throw UsageError("--dims needs at least two values");
  const ModelKind kind = parse_model_kind(o.model);
  for (auto d : o.dims) {
    if (d == 0 || (kind != ModelKind::kTransE && d % 2 != 0)) {
      throw UsageError("--dims: " + std::to_string(d) + " is not a valid dimension");
    }
  }
  return [o, kind](std::ostream& out, std::ostream&) {
    const ModelFactory factory = [&](std::size_t dim) {
      ModelInit init;
      init.kind = kind;
      init.dim = dim;
      return make_model(init, o.entities, o.relations, o.seed);
    };
    const auto report = bench_scaling(factory, o.dims, o.triples, o.repetitions, o.seed);
    const std::string json = efficiency_report_to_json(report);
    if (!o.out.empty()) write_file_atomic(o.out, json);
    out << json;
  };
}

struct ExportOpts {
  std::string checkpoint;
  std::string data;
  std::string out;
};

Work export_work(const ExportOpts& o) {
  require_output_file(o.out, "--out");
  return [o](std::ostream& out, std::ostream&) {
    const auto model = load_checkpoint(o.checkpoint);
    const KnowledgeGraph kg = load_dataset(o.data);
    const auto* relate = dynamic_cast<const RelateModel*>(model.get());
    if (relate == nullptr) {
      throw ConfigError("export-embeddings needs a relate checkpoint, got " +
                        std::string(model->kind()));
    }
    if (relate->num_entities() != kg.num_entities()) {
      throw ConfigError("checkpoint and dataset disagree on the entity count");
    }
    export_embeddings(*relate, kg.vocab, o.out);
    out << "wrote " << kg.num_entities() << " entity rows to " << o.out << "\n";
  };
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge graph embedding toolkit: phase-modulus model, baselines, evaluation, "
               "robustness and formal checks"};
  app.name("relate");
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  GenOpts gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write the synthetic family graph as a dataset");
  gen_cmd->add_option("--out", gen.out, "Output dataset directory")->required();
  gen_cmd->add_option("--entities", gen.entities, "Number of people")
      ->capture_default_str()->check(CLI::Range(std::size_t{4}, std::size_t{1} << 24));
  gen_cmd->add_option("--depth", gen.depth, "Generations")
      ->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{64}));
  gen_cmd->add_option("--seed", gen.seed, "Root seed")->capture_default_str();

  TrainOpts tr;
  std::uint64_t tr_seed = 0;
  std::size_t tr_workers = 1;
  auto* train_cmd = app.add_subcommand("train", "Train a model and evaluate it on the test split");
  train_cmd->footer(config_help());
  train_cmd->add_option("--config", tr.config, "Config file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", tr.data, "Dataset directory with train/valid/test.txt")
      ->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", tr.out, "Run directory")->required();
  train_cmd->add_option("--model", tr.model, "Model")->capture_default_str()
      ->check(CLI::IsMember(kModelNames));
  auto* tr_seed_opt = train_cmd->add_option("--seed", tr_seed, "Root seed (overrides config)");
  auto* tr_workers_opt = train_cmd->add_option("--workers", tr_workers, "Worker threads (overrides config)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_flag("--no-timing", tr.no_timing, "Leave wall-clock fields empty");

  EvalOpts ev;
  auto* eval_cmd = app.add_subcommand("eval", "Filtered ranking evaluation of a checkpoint");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--split", ev.split, "Split to rank")->capture_default_str()
      ->check(CLI::IsMember({"valid", "test"}));
  eval_cmd->add_option("--out", ev.out, "JSON report path");
  eval_cmd->add_option("--categories", ev.categories, "Per-category CSV path");
  eval_cmd->add_option("--workers", ev.workers, "Worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);

  PerturbOpts pt;
  auto* perturb_cmd = app.add_subcommand("perturb", "Perturb a dataset's train split");
  perturb_cmd->add_option("--data", pt.data, "Dataset directory")->required()
      ->check(CLI::ExistingDirectory);
  perturb_cmd->add_option("--kind", pt.kind, "Perturbation")->required()
      ->check(CLI::IsMember(perturbation_names()));
  perturb_cmd->add_option("--ratio", pt.ratio, "Fraction of train triples to edit")
      ->capture_default_str()->check(CLI::Range(1e-12, 1.0));
  perturb_cmd->add_option("--seed", pt.seed, "Root seed")->capture_default_str();
  perturb_cmd->add_option("--out", pt.out, "Output dataset directory")->required();
  perturb_cmd->add_option("--inverse-pair", pt.inverse_pair, "inverse_flip: 'relation,relation'");
  perturb_cmd->add_option("--threshold", pt.threshold, "counterfactual: cosine plausibility threshold")
      ->capture_default_str()->check(CLI::Range(-1.0, 1.0));

  RobustOpts rb;
  std::size_t rb_workers = 1;
  auto* robust_cmd = app.add_subcommand("robustness", "Degradation matrix over models and perturbations");
  robust_cmd->footer(config_help());
  robust_cmd->add_option("--config", rb.config, "Config file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  robust_cmd->add_option("--data", rb.data, "Dataset directory")->required()
      ->check(CLI::ExistingDirectory);
  robust_cmd->add_option("--out", rb.out, "Report directory")->required();
  robust_cmd->add_option("--model", rb.models, "Models (repeatable; default all)")
      ->delimiter(',')->check(CLI::IsMember(kModelNames));
  robust_cmd->add_option("--kind", rb.kinds, "Perturbations (repeatable; default all)")
      ->delimiter(',')->check(CLI::IsMember(perturbation_names()));
  robust_cmd->add_option("--ratio", rb.ratio, "Edit ratio")->capture_default_str()
      ->check(CLI::Range(1e-12, 1.0));
  robust_cmd->add_option("--runs", rb.runs, "Seeds averaged per cell")->capture_default_str()
      ->check(CLI::PositiveNumber);
  robust_cmd->add_option("--seed", rb.seed, "Root seed; run i trains with seed+i")
      ->capture_default_str();
  auto* rb_workers_opt = robust_cmd->add_option("--workers", rb_workers, "Worker threads (overrides config)")
      ->check(CLI::PositiveNumber);
  robust_cmd->add_flag("--edit-logs", rb.edit_logs, "Write every edit log under <out>/edits");

  ExpressOpts ex;
  auto* express_cmd = app.add_subcommand("verify-expressivity",
                                         "Build and check separating embeddings for random truth tables");
  express_cmd->add_option("--entities", ex.entities, "Entities")->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  express_cmd->add_option("--relations", ex.relations, "Relations")->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  express_cmd->add_option("--trials", ex.trials, "Truth tables")->capture_default_str()
      ->check(CLI::PositiveNumber);
  express_cmd->add_option("--seed", ex.seed, "Root seed")->capture_default_str();
  express_cmd->add_option("--gamma", ex.gamma, "Score margin")->capture_default_str()
      ->check(CLI::PositiveNumber);
  express_cmd->add_option("--out", ex.out, "JSON file with every certificate");
  express_cmd->add_flag("--verbose", ex.verbose, "One line per table");

  PatternOpts pa;
  auto* pattern_cmd = app.add_subcommand("verify-patterns", "Check the relation pattern identities");
  pattern_cmd->add_option("--width", pa.width, "Coordinates per vector")->capture_default_str();
  pattern_cmd->add_option("--trials", pa.trials, "Random trials per pattern")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pattern_cmd->add_option("--tolerance", pa.tolerance, "Identity tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pattern_cmd->add_option("--seed", pa.seed, "Root seed")->capture_default_str();
  pattern_cmd->add_option("--out", pa.out, "JSON file with every witness");

  BenchOpts be;
  auto* bench_cmd = app.add_subcommand("bench", "Per-triple scoring time against dimension");
  bench_cmd->add_option("--dims", be.dims, "Dimensions")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--triples", be.triples, "Triples per timing pass")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repetitions", be.repetitions, "Timed passes (minimum kept)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--entities", be.entities, "Entities")->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  bench_cmd->add_option("--relations", be.relations, "Relations")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--model", be.model, "Model")->capture_default_str()
      ->check(CLI::IsMember(kModelNames));
  bench_cmd->add_option("--seed", be.seed, "Root seed")->capture_default_str();
  bench_cmd->add_option("--out", be.out, "JSON report path");

  ExportOpts exo;
  auto* export_cmd = app.add_subcommand("export-embeddings", "Write entity phases and moduli as CSV");
  export_cmd->add_option("--checkpoint", exo.checkpoint, "Checkpoint file")->required()
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--data", exo.data, "Dataset directory (for entity names)")->required()
      ->check(CLI::ExistingDirectory);
  export_cmd->add_option("--out", exo.out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Work work;
  auto express_outcome = std::make_shared<ExpressOutcome>();
  auto pattern_outcome = std::make_shared<PatternOutcome>();
  try {
    if (gen_cmd->parsed()) {
      work = gen_synthetic_work(gen);
    } else if (train_cmd->parsed()) {
      if (tr_seed_opt->count() > 0) tr.seed = tr_seed;
      if (tr_workers_opt->count() > 0) tr.workers = tr_workers;
      work = train_work(tr);
    } else if (eval_cmd->parsed()) {
      work = eval_work(ev);
    } else if (perturb_cmd->parsed()) {
      work = perturb_work(pt);
    } else if (robust_cmd->parsed()) {
      if (rb_workers_opt->count() > 0) rb.workers = rb_workers;
      work = robustness_work(rb);
    } else if (express_cmd->parsed()) {
      work = verify_expressivity_work(ex, express_outcome);
    } else if (pattern_cmd->parsed()) {
      work = verify_patterns_work(pa, pattern_outcome);
    } else if (bench_cmd->parsed()) {
      work = bench_work(be);
    } else {
      work = export_work(exo);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    work(out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  if (express_cmd->parsed() && express_outcome->valid != ex.trials) return kFailure;
  if (pattern_cmd->parsed() && pattern_outcome->failed > 0) return kFailure;
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("relate");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace relate::cli
