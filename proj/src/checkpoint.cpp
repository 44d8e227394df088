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

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"
#include "relate/error.hpp"
#include "relate/io.hpp"
#include "relate/models.hpp"

namespace relate {

namespace {

constexpr const char* kFormat = "relate-checkpoint";
constexpr int kVersion = 1;

using nlohmann::json;

}  // namespace

std::string serialize_checkpoint(const ScoreModel& model) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["model"] = std::string(model.kind());
  j["num_entities"] = model.num_entities();
  j["num_relations"] = model.num_relations();
  j["dim"] = model.dim();
  j["gamma"] = model.gamma();
  json tensors = json::array();
  for (const auto& t : model.parameters()) {
    tensors.push_back({{"name", t.name},
                       {"rows", t.value.rows()},
                       {"cols", t.value.cols()},
                       {"data", std::vector<double>(t.value.flat().begin(), t.value.flat().end())}});
  }
  j["tensors"] = std::move(tensors);
  if (const auto* relate = dynamic_cast<const RelateModel*>(&model);
      relate != nullptr && relate->type_context()) {
    j["type_lambda"] = relate->type_context()->type_lambda;
    j["type_warm"] = relate->type_context()->warm;
  }
  return j.dump() + "\n";
}

std::unique_ptr<ScoreModel> deserialize_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw ParseError("not a relate checkpoint");
    if (j.at("version").get<int>() != kVersion) {
      throw ParseError("unsupported checkpoint version " + j.at("version").dump());
    }
    ModelInit init;
    init.kind = parse_model_kind(j.at("model").get<std::string>());
    init.dim = j.at("dim").get<std::size_t>();
    init.gamma = j.at("gamma").get<double>();
    const auto ne = j.at("num_entities").get<std::size_t>();
    const auto nr = j.at("num_relations").get<std::size_t>();
    std::unique_ptr<ScoreModel> model;
    switch (init.kind) {
      case ModelKind::kRelate: model = std::make_unique<RelateModel>(ne, nr, init.dim, init.gamma); break;
      case ModelKind::kTransE: model = std::make_unique<TransEModel>(ne, nr, init.dim, init.gamma); break;
      case ModelKind::kRotatE: model = std::make_unique<RotatEModel>(ne, nr, init.dim, init.gamma); break;
    }
    auto& params = model->parameters();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != params.size()) throw ParseError("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& tj = tensors[i];
      auto& dst = params[i];
      if (tj.at("name").get<std::string>() != dst.name ||
          tj.at("rows").get<std::size_t>() != dst.value.rows() ||
          tj.at("cols").get<std::size_t>() != dst.value.cols()) {
        throw ParseError("checkpoint tensor '" + tj.at("name").get<std::string>() + "' has unexpected name or shape");
      }
      const auto data = tj.at("data").get<std::vector<double>>();
      if (data.size() != dst.value.size()) throw ParseError("checkpoint tensor data length mismatch");
      std::copy(data.begin(), data.end(), dst.value.flat().begin());
    }
    if (auto* relate = dynamic_cast<RelateModel*>(model.get());
        relate != nullptr && j.contains("type_lambda")) {
      relate->set_type_context(
          TypeContext{nullptr, j.at("type_lambda").get<double>(), j.at("type_warm").get<double>()});
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(model));
}

std::unique_ptr<ScoreModel> load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

// ---------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_embeddings_csv(const RelateModel& model, const Vocabulary& vocab) {
  if (vocab.num_entities() != model.num_entities()) {
    throw InternalError("vocabulary and model disagree on the entity count");
  }
  const std::size_t k = model.width();
  std::string out = "entity";
  for (std::size_t i = 0; i < k; ++i) out += ",phase_" + std::to_string(i);
  for (std::size_t i = 0; i < k; ++i) out += ",modulus_" + std::to_string(i);
  out += '\n';
  const Matrix& phase = model.tensor(RelateModel::kEntityPhase);
  const Matrix& modulus = model.tensor(RelateModel::kEntityModulus);
  for (std::size_t e = 0; e < model.num_entities(); ++e) {
    out += csv_field(vocab.entity_name(static_cast<EntityId>(e)));
    for (double v : phase.row(e)) out += "," + g17(v);
    for (double v : modulus.row(e)) out += "," + g17(v);
    out += '\n';
  }
  return out;
}

void export_embeddings(const RelateModel& model, const Vocabulary& vocab,
                       const std::filesystem::path& path) {
  write_file_atomic(path, format_embeddings_csv(model, vocab));
}

EmbeddingTable parse_embeddings_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embedding CSV is empty");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "entity" || (header.size() - 1) % 2 != 0) {
    throw ParseError("embedding CSV header malformed");
  }
  const std::size_t k = (header.size() - 1) / 2;
  std::vector<std::string> names;
  std::vector<double> phase, modulus;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2 * k + 1) {
      throw ParseError("embedding CSV line " + std::to_string(line_no) + ": wrong column count");
    }
    names.push_back(fields[0]);
    for (std::size_t i = 0; i < 2 * k; ++i) {
      const std::string& f = fields[i + 1];
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size()) {
        throw ParseError("embedding CSV line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      (i < k ? phase : modulus).push_back(v);
    }
  }
  EmbeddingTable table;
  table.phase = Matrix(names.size(), k);
  table.modulus = Matrix(names.size(), k);
  std::copy(phase.begin(), phase.end(), table.phase.flat().begin());
  std::copy(modulus.begin(), modulus.end(), table.modulus.flat().begin());
  table.names = std::move(names);
  return table;
}

EmbeddingTable import_embeddings(const std::filesystem::path& path) {
  return parse_embeddings_csv(read_file(path));
}

}  // namespace relate
