// Drives the built command-line tool through std::system.
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#ifndef THEMIS_CLI_PATH
#error "THEMIS_CLI_PATH must point at the themis executable"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + THEMIS_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Small series shared by the cases below.
struct Workspace {
  support::TempDir dir;
  std::string common;

  Workspace() {
    REQUIRE(run("synth --length 2048 --segments 3 --seed 5 --out \"" + dir.path().string() + "\"", dir / "synth.log") == 0);
    common = "--series \"" + (dir / "series.csv").string() + "\" --labels \"" + (dir / "labels.csv").string() +
             "\" --reference-embedder --window 128 --batch-windows 4 --k 3";
  }
  std::string out(const std::string& name) const { return " --out \"" + (dir / name).string() + "\""; }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes series and labels") {
    Workspace ws;
    CHECK(line_count(ws.dir / "series.csv") == 2049);
    CHECK(line_count(ws.dir / "labels.csv") == 2049);
  }

  TEST_CASE("detect writes the run artefacts and reruns are byte-identical") {
    Workspace ws;
    REQUIRE(run("detect " + ws.common + ws.out("a"), ws.dir / "a.log") == 0);
    REQUIRE(run("detect " + ws.common + ws.out("b"), ws.dir / "b.log") == 0);
    for (const char* f : {"scores.csv", "scores.them", "predictions.csv", "threshold.json", "report.json"}) {
      CAPTURE(f);
      REQUIRE(fs::exists(ws.dir / "a" / f));
      CHECK(slurp(ws.dir / "a" / f) == slurp(ws.dir / "b" / f));
    }
    const auto m = load(ws.dir / "a" / "manifest.json");
    CHECK(m["command"] == "detect");
    CHECK(m["series_length"] == 2048);
    CHECK(line_count(ws.dir / "a" / "scores.csv") == 2049);
    CHECK(load(ws.dir / "a" / "report.json")["f1"].is_number());
  }

  TEST_CASE("manifest reproduces the run through --config") {
    Workspace ws;
    REQUIRE(run("detect " + ws.common + " --spot-q 0.002" + ws.out("a"), ws.dir / "a.log") == 0);
    REQUIRE(run("detect --config \"" + (ws.dir / "a" / "manifest.json").string() + "\"" + ws.out("b"),
                ws.dir / "b.log") == 0);
    CHECK(slurp(ws.dir / "a" / "scores.csv") == slurp(ws.dir / "b" / "scores.csv"));
    CHECK(slurp(ws.dir / "a" / "threshold.json") == slurp(ws.dir / "b" / "threshold.json"));
    CHECK(load(ws.dir / "b" / "manifest.json")["config"] == load(ws.dir / "a" / "manifest.json")["config"]);
  }

  TEST_CASE("key=value config with command-line override") {
    Workspace ws;
    support::write_text(ws.dir / "run.cfg", "# settings\nk = 2\nspot-q=0.01\n");
    REQUIRE(run("detect " + ws.common + " --config \"" + (ws.dir / "run.cfg").string() + "\"" + ws.out("c"),
                ws.dir / "c.log") == 0);
    const auto cfg = load(ws.dir / "c" / "manifest.json")["config"];
    CHECK(cfg["k"] == 3);  // given on the command line
    CHECK(cfg["spot-q"] == 0.01);
    support::write_text(ws.dir / "bad.cfg", "nonsense = 1\n");
    CHECK(run("detect " + ws.common + " --config \"" + (ws.dir / "bad.cfg").string() + "\"" + ws.out("d"),
              ws.dir / "d.log") == 1);
  }

  TEST_CASE("input errors exit with 1 and name the module") {
    Workspace ws;
    CHECK(run("detect --series /nonexistent.csv --reference-embedder" + ws.out("e"), ws.dir / "e.log") == 1);
    CHECK(slurp(ws.dir / "e.log").find("themis: dataset_io:") != std::string::npos);
    support::write_text(ws.dir / "nan.csv", "v\n1\n2\nnan\n");
    CHECK(run("score --series \"" + (ws.dir / "nan.csv").string() + "\" --reference-embedder" + ws.out("f"),
              ws.dir / "f.log") == 1);
    CHECK(run("detect " + ws.common + " --adapter bogus" + ws.out("g"), ws.dir / "g.log") == 1);
    CHECK(run("detect " + ws.common + " --spot-q 2" + ws.out("h"), ws.dir / "h.log") == 1);
  }

  TEST_CASE("empty truth reports null F1 and exits 0") {
    Workspace ws;
    std::string zeros = "label\n";
    for (int i = 0; i < 2048; ++i) zeros += "0\n";
    support::write_text(ws.dir / "zeros.csv", zeros);
    REQUIRE(run("detect --series \"" + (ws.dir / "series.csv").string() + "\" --labels \"" +
                    (ws.dir / "zeros.csv").string() + "\" --reference-embedder --window 128 --batch-windows 4 --k 3" +
                    ws.out("z"),
                ws.dir / "z.log") == 0);
    const auto r = load(ws.dir / "z" / "report.json");
    CHECK(r["f1"].is_null());
    CHECK(r["recall"].is_null());
    CHECK(r["empty_truth"] == true);
  }

  TEST_CASE("plot-data emits one row per timestep and batch entry") {
    Workspace ws;
    REQUIRE(run("detect " + ws.common + " --dump-wasm" + ws.out("p"), ws.dir / "p.log") == 0);
    REQUIRE(run("plot-data --from \"" + (ws.dir / "p").string() + "\" --series \"" + (ws.dir / "series.csv").string() +
                    "\" --labels \"" + (ws.dir / "labels.csv").string() + "\"" + ws.out("plots"),
                ws.dir / "plot.log") == 0);
    CHECK(line_count(ws.dir / "plots" / "series_with_labels.csv") == 2049);
    CHECK(line_count(ws.dir / "plots" / "scores_with_threshold.csv") == 2049);
    // 16 windows in batches of 4 -> 4 matrices of 512 x 512 entries.
    REQUIRE(fs::exists(ws.dir / "plots" / "wasm_batch_0.csv"));
    CHECK(line_count(ws.dir / "plots" / "wasm_batch_0.csv") == 512 * 512 + 1);
    CHECK_FALSE(fs::exists(ws.dir / "plots" / "wasm_batch_4.csv"));
    CHECK(run("plot-data --from \"" + (ws.dir / "missing").string() + "\"" + ws.out("plots2"), ws.dir / "p2.log") == 1);
  }

  TEST_CASE("sweep writes one row per grid point") {
    Workspace ws;
    REQUIRE(run("sweep " + ws.common + " --grid-batch 1,4,16 --grid-k 2" + ws.out("s"), ws.dir / "s.log") == 0);
    CHECK(line_count(ws.dir / "s" / "sweep.csv") == 4);
  }

  TEST_CASE("embed-ref output feeds back in as an embedding file") {
    Workspace ws;
    const auto series = " --series \"" + (ws.dir / "series.csv").string() + "\" --window 128";
    REQUIRE(run("embed-ref" + series + " --out \"" + (ws.dir / "emb.them").string() + "\"", ws.dir / "x.log") == 0);
    REQUIRE(run("score" + series + " --embeddings \"" + (ws.dir / "emb.them").string() + "\" --batch-windows 4 --k 3" +
                    ws.out("f"),
                ws.dir / "y.log") == 0);
    REQUIRE(run("score" + series + " --reference-embedder --batch-windows 4 --k 3" + ws.out("r"), ws.dir / "z.log") == 0);
    CHECK(slurp(ws.dir / "f" / "scores.csv") == slurp(ws.dir / "r" / "scores.csv"));
  }
}
