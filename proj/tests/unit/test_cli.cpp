#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "llafs/dataset.hpp"
#include "llafs/digest.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

#ifdef LLAFS_CLI_PATH

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("llafs_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args, const std::string& stdin_text = {}) {
  const fs::path out = scratch() / "stdout";
  const fs::path err = scratch() / "stderr";
  std::string cmd = std::string("'") + LLAFS_CLI_PATH + "' " + args;
  if (!stdin_text.empty()) {
    const fs::path in = scratch() / "stdin";
    std::ofstream(in, std::ios::binary) << stdin_text;
    cmd += " < '" + in.string() + "'";
  }
  cmd += " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = oracle::read_file(out);
  r.err = oracle::read_file(err);
  return r;
}

std::string fixture(const std::string& rel) { return "'" + oracle::fixture_path(rel) + "'"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("schedule") {
    const auto r = run("schedule --n 0");
    CHECK(r.status == 0);
    CHECK(r.out.find("a=100 b=150 c=0 d=50 M=15") != std::string::npos);

    const auto mid = run("schedule --n 30000");
    CHECK(mid.out.find("a=50 b=100 c=25 d=75 M=0") != std::string::npos);

    const auto table = run("schedule --stride 20000 --format tsv");
    CHECK(table.status == 0);
    CHECK(table.out.find("\t") != std::string::npos);
    CHECK(std::count(table.out.begin(), table.out.end(), '\n') >= 3);

    CHECK(run("schedule --n 60000").status == 2);
    const auto bad = run("schedule --format xml");
    CHECK(bad.status == 1);
    CHECK(bad.err.find("--format") != std::string::npos);
  }

  TEST_CASE("usage errors") {
    CHECK(run("").status == 1);
    CHECK(run("frobnicate").status == 1);
    const auto r = run("gen --out x");
    CHECK(r.status == 1);
    CHECK(r.err.find("--config") != std::string::npos);
  }

  TEST_CASE("parse") {
    const auto bad = run("parse " + fixture("parser/malformed/01_fifteen_vertices.txt"));
    CHECK(bad.status == 2);
    CHECK(bad.err.find("16") != std::string::npos);
    CHECK(bad.err.find("byte 266") != std::string::npos);

    const auto good = run("parse -", oracle::read_file(oracle::fixture_path("eval/episode_output.txt")));
    CHECK(good.status == 0);
    CHECK(good.out.find("\"objects\"") != std::string::npos);
    CHECK(good.out.find("\"spans\"") != std::string::npos);
  }

  TEST_CASE("render goldens") {
    for (const char* kind : {"task", "incontext", "multishot"}) {
      CAPTURE(kind);
      const auto r = run(std::string("render --kind ") + kind + " --input " +
                         fixture(std::string("templates/") + kind + ".json"));
      CHECK(r.status == 0);
      CHECK(r.out == oracle::read_file(oracle::fixture_path(std::string("templates/") + kind + ".golden.txt")));
    }
    CHECK(run("render --kind bogus --input x").status == 1);
  }

  TEST_CASE("gen, validate, render pretrain, score") {
    const fs::path ds = scratch() / "score_ds";
    fs::remove_all(ds);
    const auto gen = run("gen -q -j 2 --config " + fixture("cli/score/gen.conf") + " --out '" + ds.string() + "'");
    REQUIRE(gen.status == 0);
    CHECK(run("validate '" + ds.string() + "'").status == 0);

    const auto pre = run("render --kind pretrain --dataset '" + ds.string() + "' --pair 1");
    CHECK(pre.status == 0);
    CHECK(pre.out == oracle::read_file(ds / "pairs/000001/pretrain.txt"));

    const fs::path report = scratch() / "report.json";
    const fs::path csv = scratch() / "report.csv";
    const auto score = run("score --pred " + fixture("cli/score/pred") + " --gt '" + ds.string() +
                           "' --folds 2 --out '" + report.string() + "' --csv '" + csv.string() + "'");
    CHECK(score.status == 0);
    CHECK(oracle::read_file(report) == oracle::read_file(oracle::fixture_path("cli/score/report.golden.json")));
    CHECK(oracle::read_file(csv) == oracle::read_file(oracle::fixture_path("cli/score/report.golden.csv")));

    const char junk[] = "x";
    std::ofstream(ds / "pairs/000002/query.png", std::ios::binary).write(junk, 1);
    const auto broken = run("validate '" + ds.string() + "'");
    CHECK(broken.status == 2);
    CHECK(broken.err.find("000002") != std::string::npos);
  }

  TEST_CASE("config errors map to exit 2") {
    const fs::path conf = scratch() / "big.conf";
    std::ofstream(conf) << "size = 500\n";
    const auto r = run("gen --config '" + conf.string() + "' --out '" + (scratch() / "never").string() + "'");
    CHECK(r.status == 2);
    CHECK(r.err.find("size") != std::string::npos);
  }
}

#endif
