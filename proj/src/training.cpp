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

#include "relate/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <type_traits>
#include <thread>

#include "relate/error.hpp"
#include "relate/eval.hpp"
#include "relate/io.hpp"

namespace relate {

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("dim must be even and positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be positive");
  if (loss_margin && (!(*loss_margin >= 0.0) || !std::isfinite(*loss_margin))) {
    throw ConfigError("loss_margin must be non-negative");
  }
  if (!(adv_temperature >= 0.0) || !std::isfinite(adv_temperature)) {
    throw ConfigError("adv_temperature must be non-negative");
  }
  if (neg_samples == 0) throw ConfigError("neg_samples must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (valid_interval == 0) throw ConfigError("valid_interval must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (!(l3_weight >= 0.0) || !std::isfinite(l3_weight)) {
    throw ConfigError("l3_weight must be non-negative");
  }
  if (!(type_lambda >= 0.0) || !std::isfinite(type_lambda)) {
    throw ConfigError("type_lambda must be non-negative");
  }
  if (!(init_relation_width > 0.0) || !std::isfinite(init_relation_width)) {
    throw ConfigError("init_relation_width must be positive");
  }
  if (!(modulus_weight > 0.0) || !std::isfinite(modulus_weight)) {
    throw ConfigError("modulus_weight must be positive");
  }
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive (inf disables clipping)");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (valid_subsample == 0) throw ConfigError("valid subsample must be positive");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  if constexpr (std::is_unsigned_v<T>) {
    if (first != last && *first == '-') return false;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

TrainConfig parse_config(const std::string& text, const std::string& source) {
  TrainConfig c;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> key_line;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ": line " + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key_line.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(key_line[key]) + ")");
    }
    key_line[key] = line_no;
    const auto bad = [&](const char* what) {
      return ConfigError(where + ": " + key + ": expected " + what + ", got '" + value + "'");
    };
    auto num = [&](auto& field) {
      if (!parse_number(value, field)) {
        if constexpr (std::is_floating_point_v<std::remove_reference_t<decltype(field)>>) {
          throw bad("a number");
        } else {
          throw bad("a non-negative integer");
        }
      }
    };
    if (key == "dim") num(c.dim);
    else if (key == "lr") num(c.lr);
    else if (key == "margin") num(c.margin);
    else if (key == "loss_margin") { double v = 0; num(v); c.loss_margin = v; }
    else if (key == "adv_temperature") num(c.adv_temperature);
    else if (key == "neg_samples") num(c.neg_samples);
    else if (key == "batch_size") num(c.batch_size);
    else if (key == "max_steps") num(c.max_steps);
    else if (key == "valid_interval") num(c.valid_interval);
    else if (key == "patience") num(c.patience);
    else if (key == "l3_weight") num(c.l3_weight);
    else if (key == "type_lambda") num(c.type_lambda);
    else if (key == "warmup_steps") { std::size_t v = 0; num(v); c.warmup_steps = v; }
    else if (key == "init_relation_width") num(c.init_relation_width);
    else if (key == "modulus_weight") num(c.modulus_weight);
    else if (key == "seed") num(c.seed);
    else if (key == "reciprocal") { if (!parse_bool(value, c.reciprocal)) throw bad("true or false"); }
    else if (key == "filter_negatives") { if (!parse_bool(value, c.filter_negatives)) throw bad("true or false"); }
    else if (key == "clip_norm") num(c.clip_norm);
    else if (key == "workers") num(c.workers);
    else throw ConfigError(where + ": unknown key '" + key + "'");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    // Point at the line of the offending key when it came from the file.
    const std::string msg = e.what();
    for (const auto& [key, line] : key_line) {
      if (msg.rfind(key + " ", 0) == 0) {
        throw ConfigError(source + ": line " + std::to_string(line) + ": " + msg);
      }
    }
    throw ConfigError(source + ": " + msg);
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

std::string format_config(const TrainConfig& c) {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  kv("dim", std::to_string(c.dim));
  kv("lr", format_double(c.lr));
  kv("margin", format_double(c.margin));
  if (c.loss_margin) kv("loss_margin", format_double(*c.loss_margin));
  kv("adv_temperature", format_double(c.adv_temperature));
  kv("neg_samples", std::to_string(c.neg_samples));
  kv("batch_size", std::to_string(c.batch_size));
  kv("max_steps", std::to_string(c.max_steps));
  kv("valid_interval", std::to_string(c.valid_interval));
  kv("patience", std::to_string(c.patience));
  kv("l3_weight", format_double(c.l3_weight));
  kv("type_lambda", format_double(c.type_lambda));
  if (c.warmup_steps) kv("warmup_steps", std::to_string(*c.warmup_steps));
  kv("init_relation_width", format_double(c.init_relation_width));
  kv("modulus_weight", format_double(c.modulus_weight));
  kv("seed", std::to_string(c.seed));
  kv("reciprocal", c.reciprocal ? "true" : "false");
  kv("filter_negatives", c.filter_negatives ? "true" : "false");
  kv("clip_norm", format_double(c.clip_norm));
  kv("workers", std::to_string(c.workers));
  return out;
}

// ---------------------------------------------------------------------------
// Loss pieces

TripleList sample_negatives(std::span<const Triple> positives, std::size_t n_neg,
                            std::size_t num_entities, CorruptionPolicy policy, Rng& rng,
                            const FilterIndex* known) {
  if (num_entities < 2) throw SamplingError("negative sampling needs at least 2 entities");
  if (n_neg == 0) throw SamplingError("n_neg must be positive");
  constexpr int kAttempts = 32;
  TripleList out;
  out.reserve(positives.size() * n_neg);
  for (const Triple& pos : positives) {
    for (std::size_t j = 0; j < n_neg; ++j) {
      bool corrupt_head = false;
      switch (policy) {
        case CorruptionPolicy::kUniform: corrupt_head = uniform_index(rng, 2) == 0; break;
        case CorruptionPolicy::kHeadOnly: corrupt_head = true; break;
        case CorruptionPolicy::kTailOnly: corrupt_head = false; break;
      }
      Triple neg = pos;
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const EntityId original = corrupt_head ? pos.head : pos.tail;
        auto e = static_cast<EntityId>(uniform_index(rng, num_entities - 1));
        if (e >= original) ++e;
        (corrupt_head ? neg.head : neg.tail) = e;
        if (known == nullptr || !known->has_tail(neg.head, neg.relation, neg.tail)) break;
      }
      out.push_back(neg);
    }
  }
  return out;
}

std::vector<double> adversarial_weights(std::span<const double> neg_scores, double alpha) {
  std::vector<double> w(neg_scores.size());
  if (neg_scores.empty()) return w;
  double top = -std::numeric_limits<double>::infinity();
  for (double s : neg_scores) top = std::max(top, alpha * s);
  double total = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::exp(alpha * neg_scores[j] - top);
    total += w[j];
  }
  for (double& x : w) x /= total;
  return w;
}

double margin_loss(double f_pos, std::span<const double> f_negs, std::span<const double> weights,
                   double margin) {
  if (f_negs.size() != weights.size()) throw InternalError("margin_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t j = 0; j < f_negs.size(); ++j) {
    loss += weights[j] * std::max(0.0, f_negs[j] - f_pos + margin);
  }
  return loss;
}

double l3_penalty(const ParameterSet& params, double weight) {
  double s = 0.0;
  for (const auto& t : params) {
    for (double x : t.value.flat()) s += std::abs(x) * x * x;
  }
  return weight * s;
}

void accumulate_l3_gradient(const ParameterSet& params, double weight, Gradient& grad) {
  if (weight == 0.0) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& m = params[i].value;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto g = grad.row(i, r);
      const auto x = m.row(r);
      for (std::size_t c = 0; c < x.size(); ++c) g[c] += 3.0 * weight * std::abs(x[c]) * x[c];
    }
  }
}

double l3_penalty_touched(const ParameterSet& params, double weight, Gradient& grad) {
  if (weight == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& m = params[i].value;
    for (std::size_t r : grad.touched_rows(i)) {
      auto g = grad.row(i, r);
      const auto x = m.row(r);
      for (std::size_t c = 0; c < x.size(); ++c) {
        s += std::abs(x[c]) * x[c] * x[c];
        g[c] += 3.0 * weight * std::abs(x[c]) * x[c];
      }
    }
  }
  return weight * s;
}

double type_bias_term(std::span<const double> head_signature,
                      std::span<const double> tail_signature,
                      std::span<const double> head_proto, std::span<const double> tail_proto,
                      double warm, double type_lambda) {
  if (head_signature.size() != head_proto.size() || tail_signature.size() != tail_proto.size()) {
    throw InternalError("type_bias_term: size mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < head_signature.size(); ++k) s += head_signature[k] * head_proto[k];
  for (std::size_t k = 0; k < tail_signature.size(); ++k) s += tail_signature[k] * tail_proto[k];
  return warm * type_lambda * s;
}

double warm_factor(std::size_t step, std::size_t warmup_steps) {
  if (warmup_steps == 0 || step >= warmup_steps) return 1.0;
  return static_cast<double>(step) / static_cast<double>(warmup_steps);
}

// ---------------------------------------------------------------------------
// Objective

std::vector<double> batch_adversarial_weights(const ScoreModel& model,
                                              std::span<const Triple> positives,
                                              std::span<const Triple> negatives, double alpha) {
  if (positives.empty() || negatives.size() % positives.size() != 0) {
    throw InternalError("negatives must come in equal blocks per positive");
  }
  const std::size_t n_neg = negatives.size() / positives.size();
  std::vector<double> weights(negatives.size());
  std::vector<double> scores(n_neg);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    for (std::size_t j = 0; j < n_neg; ++j) scores[j] = model.score(negatives[i * n_neg + j]);
    const auto w = adversarial_weights(scores, alpha);
    std::copy(w.begin(), w.end(), weights.begin() + static_cast<std::ptrdiff_t>(i * n_neg));
  }
  return weights;
}

namespace {

// Margin part for positives [lo, hi): returns the unnormalized loss sum.
double margin_block(const ScoreModel& model, std::span<const Triple> positives,
                    std::span<const Triple> negatives, std::span<const double> weights,
                    std::size_t n_neg, double margin, double coeff, std::size_t lo,
                    std::size_t hi, Gradient* grad) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const Triple& pos = positives[i];
    const double f_pos = model.score(pos);
    if (grad) model.touch_rows(pos, *grad);
    double pos_coeff = 0.0;
    for (std::size_t j = 0; j < n_neg; ++j) {
      const Triple& neg = negatives[i * n_neg + j];
      const double w = weights[i * n_neg + j];
      const double f_neg = model.score(neg);
      const double a = f_neg - f_pos + margin;
      if (grad) model.touch_rows(neg, *grad);
      if (a > 0.0) {
        sum += w * a;
        if (grad && w != 0.0) {
          model.accumulate_gradient(neg, coeff * w, *grad);
          pos_coeff -= coeff * w;
        }
      }
    }
    if (grad && pos_coeff != 0.0) model.accumulate_gradient(pos, pos_coeff, *grad);
  }
  return sum;
}

}  // namespace

ObjectiveValue batch_objective(const ScoreModel& model, std::span<const Triple> positives,
                               std::span<const Triple> negatives, std::span<const double> weights,
                               const LossOptions& options, Gradient* grad, std::size_t workers) {
  if (positives.empty() || negatives.size() % positives.size() != 0 ||
      weights.size() != negatives.size()) {
    throw InternalError("batch_objective: inconsistent batch shapes");
  }
  const std::size_t n_neg = negatives.size() / positives.size();
  const double coeff = 1.0 / static_cast<double>(positives.size());
  workers = std::max<std::size_t>(1, std::min(workers, positives.size()));

  double sum = 0.0;
  if (workers == 1) {
    sum = margin_block(model, positives, negatives, weights, n_neg, options.loss_margin, coeff, 0,
                       positives.size(), grad);
  } else {
    std::vector<double> partial(workers, 0.0);
    std::vector<Gradient> grads;
    if (grad) grads.assign(workers, Gradient(model.parameters()));
    std::vector<std::thread> threads;
    const std::size_t chunk = (positives.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(positives.size(), w * chunk);
      const std::size_t hi = std::min(positives.size(), lo + chunk);
      threads.emplace_back([&, w, lo, hi] {
        partial[w] = margin_block(model, positives, negatives, weights, n_neg,
                                  options.loss_margin, coeff, lo, hi,
                                  grad ? &grads[w] : nullptr);
      });
    }
    for (auto& t : threads) t.join();
    for (std::size_t w = 0; w < workers; ++w) {
      sum += partial[w];
      if (grad) grad->merge(grads[w]);
    }
  }

  ObjectiveValue value;
  value.margin = sum * coeff;
  if (grad) {
    value.l3 = l3_penalty_touched(model.parameters(), options.l3_weight, *grad);
  } else if (options.l3_weight != 0.0) {
    Gradient touched(model.parameters());
    for (const Triple& t : positives) model.touch_rows(t, touched);
    for (const Triple& t : negatives) model.touch_rows(t, touched);
    value.l3 = l3_penalty_touched(model.parameters(), options.l3_weight, touched);
  }
  return value;
}

// ---------------------------------------------------------------------------
// Optimizer

AdamState::AdamState(const ParameterSet& like) {
  for (const auto& t : like) {
    m.emplace_back(t.value.rows(), t.value.cols());
    v.emplace_back(t.value.rows(), t.value.cols());
  }
}

void adam_step(AdamState& state, ParameterSet& params, const Gradient& grad, double lr,
               bool dense) {
  if (state.m.size() != params.size() || grad.size() != params.size()) {
    throw InternalError("adam_step: tensor count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& p = params[i].value;
    const Matrix& g = grad.dense(i);
    if (state.m[i].rows() != p.rows() || state.m[i].cols() != p.cols() ||
        g.rows() != p.rows() || g.cols() != p.cols()) {
      throw InternalError("adam_step: shape mismatch in tensor '" + params[i].name + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = params[i].value;
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    auto update_row = [&](std::size_t r) {
      auto pr = p.row(r);
      auto mr = m.row(r);
      auto vr = v.row(r);
      const auto gr = grad.row(i, r);
      for (std::size_t c = 0; c < pr.size(); ++c) {
        mr[c] = state.beta1 * mr[c] + (1.0 - state.beta1) * gr[c];
        vr[c] = state.beta2 * vr[c] + (1.0 - state.beta2) * gr[c] * gr[c];
        pr[c] -= lr * (mr[c] / bc1) / (std::sqrt(vr[c] / bc2) + state.eps);
      }
    };
    if (dense) {
      for (std::size_t r = 0; r < p.rows(); ++r) update_row(r);
    } else {
      for (std::size_t r : grad.touched_rows(i)) update_row(r);
    }
  }
}

// ---------------------------------------------------------------------------
// Training loop

std::string history_to_csv(const TrainHistory& history, bool include_timing) {
  std::string out = "step,loss,valid_mrr,seconds\n";
  for (const auto& e : history.entries) {
    out += std::to_string(e.step) + "," + format_double(e.loss) + "," +
           format_double(e.valid_mrr) + "," + (include_timing ? format_double(e.seconds) : "") +
           "\n";
  }
  return out;
}

PreparedGraph prepare_graph(const KnowledgeGraph& kg, const TrainConfig& config) {
  PreparedGraph out;
  out.graph = config.reciprocal && !kg.reciprocal ? augment_reciprocal(kg) : kg;
  if (config.type_lambda > 0.0) {
    out.signatures = std::make_shared<const TypeSignatures>(
        infer_type_signatures(out.graph.train, out.graph.valid, out.graph.num_entities(),
                              out.graph.num_relations()));
  }
  return out;
}

ModelInit model_init_from(const TrainConfig& config, ModelKind kind) {
  ModelInit init;
  init.kind = kind;
  init.dim = config.dim;
  init.gamma = config.margin;
  init.init_relation_width = config.init_relation_width;
  init.modulus_weight = config.modulus_weight;
  return init;
}

namespace {

std::string parameter_norms(const ParameterSet& params) {
  std::string out;
  for (const auto& t : params) {
    double s = 0.0;
    for (double x : t.value.flat()) s += x * x;
    if (!out.empty()) out += ", ";
    out += t.name + "=" + format_double(std::sqrt(s));
  }
  return out;
}

TripleList validation_subsample(const KnowledgeGraph& kg, const TrainConfig& config) {
  TripleList sample = kg.valid;
  if (sample.size() <= config.valid_subsample) return sample;
  Rng rng = make_rng(config.seed, Stream::kValidSubsample);
  shuffle(sample, rng);
  sample.resize(config.valid_subsample);
  return sample;
}

}  // namespace

TrainResult train(const TrainConfig& config, const KnowledgeGraph& kg,
                  std::shared_ptr<const TypeSignatures> signatures, ModelKind kind) {
  config.validate();
  if (kg.num_entities() < 2) throw SamplingError("training needs at least 2 entities");
  if (kg.train.empty() && config.max_steps > 0) throw ConfigError("training split is empty");

  TrainResult result;
  auto model = make_model(model_init_from(config, kind), kg.num_entities(), kg.num_relations(),
                          config.seed);
  auto* relate = dynamic_cast<RelateModel*>(model.get());
  const bool typed = relate != nullptr && signatures != nullptr && config.type_lambda > 0.0;
  if (typed && (signatures->rows() != kg.num_entities() ||
                signatures->cols() != 2 * kg.num_relations())) {
    throw ConfigError("type signatures do not match the graph's entity and relation counts");
  }
  const std::size_t warmup = config.effective_warmup_steps();
  auto set_warm = [&](std::size_t step) {
    if (typed) relate->set_type_context(TypeContext{signatures, config.type_lambda,
                                                    warm_factor(step, warmup)});
  };
  set_warm(0);

  if (config.max_steps == 0) {
    result.model = std::move(model);
    return result;
  }

  std::optional<FilterIndex> known;
  if (config.filter_negatives) known = build_filter_index({&kg.train});
  const TripleList valid_sample = validation_subsample(kg, config);
  const EvalOptions eval_options{config.workers};
  const LossOptions loss_options{config.effective_loss_margin(), config.l3_weight};

  Rng batch_rng = make_rng(config.seed, Stream::kBatch);
  Rng neg_rng = make_rng(config.seed, Stream::kNegatives);
  std::vector<std::size_t> order(kg.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, batch_rng);
  std::size_t cursor = 0;

  AdamState adam(model->parameters());
  Gradient grad(model->parameters());
  TripleList positives;
  const auto start = std::chrono::steady_clock::now();
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::size_t stale = 0;
  bool have_best = false;

  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    set_warm(step - 1);
    positives.clear();
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      if (cursor == order.size()) {
        shuffle(order, batch_rng);
        cursor = 0;
      }
      positives.push_back(kg.train[order[cursor++]]);
    }
    const TripleList negatives =
        sample_negatives(positives, config.neg_samples, kg.num_entities(), config.corruption,
                         neg_rng, known ? &*known : nullptr);
    const auto weights =
        batch_adversarial_weights(*model, positives, negatives, config.adv_temperature);

    grad.clear();
    const ObjectiveValue value = batch_objective(*model, positives, negatives, weights,
                                                 loss_options, &grad, config.workers);
    const double loss = value.total();
    const double norm = std::sqrt(grad.squared_norm());
    if (!std::isfinite(loss) || !std::isfinite(norm)) {
      throw TrainingAbort("non-finite " + std::string(std::isfinite(loss) ? "gradient" : "loss") +
                          " at step " + std::to_string(step) + " (batch " +
                          std::to_string(step - 1) + "); parameter norms: " +
                          parameter_norms(model->parameters()));
    }
    if (norm > config.clip_norm) grad.scale(config.clip_norm / norm);
    adam_step(adam, model->parameters(), grad, config.lr);
    loss_sum += loss;
    ++loss_count;
    result.steps_run = step;

    if (step % config.valid_interval != 0 && step != config.max_steps) continue;

    set_warm(step);
    HistoryEntry entry;
    entry.step = step;
    entry.loss = loss_sum / static_cast<double>(loss_count);
    loss_sum = 0.0;
    loss_count = 0;
    if (valid_sample.empty()) {
      entry.valid_mrr = std::numeric_limits<double>::quiet_NaN();
      result.model = model->clone();
      result.best_step = step;
      result.best_valid_mrr = entry.valid_mrr;
    } else {
      entry.valid_mrr = evaluate(*model, kg, valid_sample, eval_options).combined.mrr;
      if (!have_best || entry.valid_mrr > result.best_valid_mrr) {
        have_best = true;
        result.model = model->clone();
        result.best_step = step;
        result.best_valid_mrr = entry.valid_mrr;
        stale = 0;
      } else {
        ++stale;
      }
    }
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.entries.push_back(entry);
    if (stale >= config.patience) break;
  }
  if (!result.model) result.model = std::move(model);
  return result;
}

}  // namespace relate
