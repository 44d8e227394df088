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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "relate/cli.hpp"
#include "relate/io.hpp"
#include "relate/kg.hpp"

namespace fs = std::filesystem;
using relate::read_file;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = relate::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

// Small dataset plus a fast config, shared by the tests below.
struct Fixture {
  fs::path root = testing::temp_dir("cli");
  fs::path data = root / "data";
  fs::path config = root / "fast.cfg";

  Fixture() {
    relate::GeneratorConfig g;
    g.entities = 40;
    g.depth = 3;
    relate::write_dataset(data, relate::generate_synthetic_kg(g, 1));
    relate::write_file_atomic(config,
                              "dim=8\nlr=0.01\nneg_samples=4\nbatch_size=16\nmax_steps=30\n"
                              "valid_interval=10\nreciprocal=true\n");
  }
  ~Fixture() { fs::remove_all(root); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("unknown flag is a usage error and creates nothing") {
  Fixture f;
  const auto out = f.root / "run";
  const auto o = run({"train", "--config", f.config.string(), "--data", f.data.string(), "--out",
                      out.string(), "--bogus"});
  CHECK(o.code == 1);
  CHECK(o.err.find("--bogus") != std::string::npos);
  CHECK(o.err.find("Usage") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("invalid values are usage errors") {
  Fixture f;
  const auto out = f.root / "run";
  relate::write_file_atomic(f.root / "bad.cfg", "dim=7\n");
  auto o = run({"train", "--config", (f.root / "bad.cfg").string(), "--data", f.data.string(),
                "--out", out.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("dim must be even and positive") != std::string::npos);
  o = run({"train", "--data", (f.root / "missing").string(), "--out", out.string()});
  CHECK(o.code == 1);
  o = run({"perturb", "--data", f.data.string(), "--kind", "shuffle", "--out", out.string()});
  CHECK(o.code == 1);
  o = run({"perturb", "--data", f.data.string(), "--kind", "edge_deletion", "--ratio", "2",
           "--out", out.string()});
  CHECK(o.code == 1);
  o = run({});
  CHECK(o.code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("help documents config defaults") {
  const auto o = run({"train", "--help"});
  CHECK(o.code == 0);
  CHECK(o.out.find("dim=64") != std::string::npos);
  CHECK(o.out.find("lr=0.001") != std::string::npos);
}

TEST_CASE("train writes its artifacts and reruns are byte identical") {
  Fixture f;
  const auto a = f.root / "a";
  const auto b = f.root / "b";
  for (const auto& dir : {a, b}) {
    const auto o = run({"train", "--config", f.config.string(), "--data", f.data.string(), "--out",
                        dir.string(), "--seed", "5", "--no-timing"});
    REQUIRE(o.code == 0);
  }
  for (const char* name : {"checkpoint.json", "history.csv", "eval.json", "config.cfg", "seeds.tsv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(read_file(a / name) == read_file(b / name));
  }
  CHECK(read_file(a / "config.cfg").find("seed=5") != std::string::npos);

  const auto ev = f.root / "eval.json";
  const auto cats = f.root / "cats.csv";
  auto o = run({"eval", "--checkpoint", (a / "checkpoint.json").string(), "--data",
                f.data.string(), "--out", ev.string(), "--categories", cats.string()});
  REQUIRE(o.code == 0);
  CHECK(read_file(ev) == read_file(a / "eval.json"));
  CHECK(fs::exists(cats));

  const auto emb = f.root / "emb.csv";
  o = run({"export-embeddings", "--checkpoint", (a / "checkpoint.json").string(), "--data",
           f.data.string(), "--out", emb.string()});
  CHECK(o.code == 0);
  CHECK(fs::exists(emb));

  o = run({"eval", "--checkpoint", (a / "checkpoint.json").string(), "--data",
           (f.root / "other").string()});
  CHECK(o.code == 1);
}

TEST_CASE("runtime failures exit 2") {
  Fixture f;
  fs::create_directories(f.root / "empty");
  const auto o = run({"train", "--config", f.config.string(), "--data", (f.root / "empty").string(),
                      "--out", (f.root / "run").string()});
  CHECK(o.code == 2);
  CHECK_FALSE(o.err.empty());
  CHECK_FALSE(fs::exists(f.root / "run"));
}

TEST_CASE("perturb keeps held-out splits byte identical") {
  Fixture f;
  const auto out = f.root / "perturbed";
  const auto o = run({"perturb", "--data", f.data.string(), "--kind", "relation_swap", "--seed", "3",
                      "--out", out.string()});
  REQUIRE(o.code == 0);
  CHECK(read_file(out / "valid.txt") == read_file(f.data / "valid.txt"));
  CHECK(read_file(out / "test.txt") == read_file(f.data / "test.txt"));
  CHECK(read_file(out / "train.txt") != read_file(f.data / "train.txt"));
  CHECK(fs::exists(out / "edits.tsv"));
  CHECK_NOTHROW(relate::load_dataset(out));
}

TEST_CASE("verify-patterns") {
  const auto o = run({"verify-patterns", "--seed", "2"});
  CHECK(o.code == 0);
  std::size_t passes = 0;
  for (std::size_t p = o.out.find("PASS "); p != std::string::npos; p = o.out.find("PASS ", p + 1)) {
    ++passes;
  }
  CHECK(passes == 6);
}

TEST_CASE("verify-expressivity reports a count and an exit code that agree") {
  const auto o = run({"verify-expressivity", "--entities", "3", "--relations", "2", "--trials",
                      "100", "--seed", "1"});
  const auto pos = o.out.find("/100 certificates valid");
  REQUIRE(pos != std::string::npos);
  const auto start = o.out.rfind('\n', pos);
  const int valid = std::stoi(o.out.substr(start == std::string::npos ? 0 : start + 1));
  CHECK(o.code == (valid == 100 ? 0 : 2));
}

TEST_CASE("verify-expressivity: all 100 tables certified" * doctest::may_fail()) {
  const auto o = run({"verify-expressivity", "--entities", "3", "--relations", "2", "--trials",
                      "100", "--seed", "1"});
  CHECK(o.out.find("100/100 certificates valid") != std::string::npos);
  CHECK(o.code == 0);
}

TEST_CASE("gen-synthetic and bench") {
  const auto root = testing::temp_dir("cli_gen");
  auto o = run({"gen-synthetic", "--out", (root / "g").string(), "--seed", "7"});
  CHECK(o.code == 0);
  const auto kg = relate::load_dataset(root / "g");
  CHECK(kg.num_entities() == 200);
  o = run({"bench", "--dims", "8,16", "--triples", "200", "--repetitions", "1", "--out",
           (root / "bench.json").string()});
  CHECK(o.code == 0);
  CHECK(fs::exists(root / "bench.json"));
  o = run({"bench", "--dims", "8"});
  CHECK(o.code == 1);
  fs::remove_all(root);
}

}
