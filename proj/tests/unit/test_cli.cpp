#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"
#include "support/temp_dir.hpp"

using namespace fairrank;
using namespace fairrank::cli;
using fairrank::testing::read_file;
using fairrank::testing::TempDir;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(const TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt";
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" + FAIRRANK_CLI_PATH + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Invocation r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string sample(const std::string& name) { return std::string(FAIRRANK_SAMPLE_DIR) + "/" + name; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config grammar") {
    const Options o = parse_config_text("# header\nrho = 0.5\n\nbeta=2 # trailing\nepsilons = 0.1, 0.2\n");
    CHECK(o.real("rho", 0) == 0.5);
    CHECK(o.real("beta", 0) == 2.0);
    CHECK(o.reals("epsilons", {}) == std::vector<double>{0.1, 0.2});
    CHECK(o.real("gamma", 7.0) == 7.0);
    CHECK_THROWS_WITH_AS(parse_config_text("rho 1\n", "f"), doctest::Contains("f:1"), UsageError);
    CHECK_THROWS_WITH_AS(parse_config_text("a=1\na=2\n"), doctest::Contains("duplicate"), UsageError);
    CHECK_THROWS_AS(parse_config_text("Bad-Key = 1\n"), UsageError);
  }

  TEST_CASE("typed option access") {
    Options o;
    o.set("tau", "1e7");
    o.set("flag", "off");
    o.set("x", "abc");
    CHECK(o.count("tau", 0) == 10'000'000);
    CHECK_FALSE(o.boolean("flag", true));
    CHECK_THROWS_AS(o.real("x", 0), UsageError);
    CHECK_THROWS_AS(o.require("missing"), UsageError);
    Options flags;
    flags.set("x", "1");
    o.merge(flags);
    CHECK(o.real("x", 0) == 1.0);
  }

  TEST_CASE("formatting and hashing") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("manifest round trip") {
    RunManifest m;
    m.command = "train";
    m.version = "1.2.3";
    m.isa = "scalar";
    m.options.set("rho", "0.001");
    m.inputs.push_back({"/x/data.csv", "0123456789abcdef"});
    m.outputs.push_back({"weights.csv", "fedcba9876543210"});
    m.seconds = 1.5;
    const RunManifest back = parse_manifest(manifest_json(m));
    CHECK(back.command == "train");
    CHECK(back.isa == "scalar");
    CHECK(back.options.all() == m.options.all());
    CHECK(back.inputs[0].fnv1a == "0123456789abcdef");
    CHECK(back.outputs[0].path == "weights.csv");
    CHECK_THROWS_AS(parse_manifest("{"), DataError);
  }

  TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(UsageError("x")) == kExitUsage);
    CHECK(exit_code_for(ConfigError("x")) == kExitUsage);
    CHECK(exit_code_for(InfeasibleError("x")) == kExitInfeasible);
    CHECK(exit_code_for(DataError("x")) == kExitData);
    CHECK(exit_code_for(InstanceTooLarge("x")) == kExitData);
  }

  TEST_CASE("generate: usage errors, size and determinism") {
    TempDir dir;
    const Invocation missing = invoke(dir, "generate --k 4 -o x.csv");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("alpha") != std::string::npos);
    CHECK(missing.err.find("Usage") != std::string::npos);
    CHECK(invoke(dir, "frobnicate").code == 2);
    CHECK(invoke(dir, "generate --alpha nope -o x.csv").code == 2);

    REQUIRE(invoke(dir, "generate --alpha 0.9 --k 40 --h 25 --seed 1 -o syn09.csv").code == 0);
    CHECK(line_count(read_file(dir.path() / "syn09.csv")) == 1001);
    REQUIRE(invoke(dir, "generate --alpha 0.9 --k 40 --h 25 --seed 1 -o again.csv").code == 0);
    CHECK(read_file(dir.path() / "syn09.csv") == read_file(dir.path() / "again.csv"));
    CHECK(std::filesystem::exists(dir.path() / "syn09.csv.manifest.json"));
  }

  TEST_CASE("train, evaluate and replay through the binary") {
    TempDir dir;
    REQUIRE(invoke(dir, "generate --alpha 0.8 --k 4 --h 10 --seed 3 -o d.csv").code == 0);
    dir.write("run.conf", "outer_iters = 3\ninner_iters = 5\nepsilon = 0.5\ntau = 1000\n");
    const Invocation t = invoke(dir, "train --data d.csv --config run.conf --epsilon 0.05 --output-dir run");
    REQUIRE(t.code == 0);
    const std::string trace = read_file(dir.path() / "run/trace.csv");
    CHECK(line_count(trace) == 4);
    const RunManifest m = read_manifest(dir.path() / "run/manifest.json");
    CHECK(m.options.str("epsilon", "") == "0.05");  // flag beat the config file
    CHECK(m.options.str("outer_iters", "") == "3");
    CHECK(m.outputs.size() == 3);

    const Invocation r = invoke(dir, "replay --manifest run/manifest.json --output-dir again");
    CHECK(r.code == 0);
    CHECK(r.out.find("MISMATCH") == std::string::npos);
    CHECK(read_file(dir.path() / "run/predictions.csv") == read_file(dir.path() / "again/predictions.csv"));

    const Invocation e = invoke(dir, "evaluate --data d.csv --predictions run/predictions.csv --output-dir eval");
    REQUIRE(e.code == 0);
    const auto report = nlohmann::json::parse(read_file(dir.path() / "eval/report.json"));
    REQUIRE(report.size() == 3);
    CHECK(report[0]["label"] == "data");
    CHECK(report[2]["label"] == "projected");
    CHECK(read_file(dir.path() / "eval/report.csv").rfind("label,AUC,MD,BR,IRR", 0) == 0);

    dir.write("short.csv", "index,task_id,prediction\n0,t0,1.0\n");
    CHECK(invoke(dir, "evaluate --data d.csv --predictions short.csv --output-dir bad").code == 4);
    CHECK(invoke(dir, "train --data nowhere.csv --output-dir x").code == 4);
  }

  TEST_CASE("perfect predictions give zero BR and RMSE") {
    TempDir dir;
    TaskDataset d = generate_synthetic({.alpha = 0.7, .k = 3, .h = 8, .n = 3, .seed = 2});
    std::vector<PredictionRow> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = d.targets[static_cast<Eigen::Index>(i)];
      rows.push_back({i, d.task_ids[i / d.h], "", y, y, y, false});
    }
    const auto report = evaluate_rows(d, &rows);
    REQUIRE(report.size() == 3);
    CHECK(report[1].br == 0.0);
    CHECK(report[1].rmse == 0.0);
    CHECK(report[1].auc == report[0].auc);
    rows.pop_back();
    CHECK_THROWS_WITH_AS(evaluate_rows(d, &rows), doctest::Contains("row-count mismatch"), DataError);
  }

  TEST_CASE("targets evaluated against themselves reproduce the data AUC") {
    const TaskDataset d = generate_synthetic({.alpha = 0.9, .seed = 1});
    const auto rows = evaluate_rows(d, nullptr);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].auc == doctest::Approx(0.902).epsilon(0.04));
    CHECK(rows[0].br == 0.0);
  }

  TEST_CASE("project: identity, oracle gap, size limit and infeasibility") {
    TempDir dir;
    dir.write("inband.csv", "value,group\n1.5,A\n2.5,B\n4,A\n2,B\n");
    const Invocation id = invoke(dir, "project --input inband.csv --epsilon 0.5 --oracle --output-dir p1");
    REQUIRE(id.code == 0);
    const auto r1 = nlohmann::json::parse(read_file(dir.path() / "p1/report.json"));
    CHECK(r1["route"] == "identity");
    CHECK(r1["gap"] == 0.0);

    dir.write("grow.csv", "value,group\n10,A\n20,A\n30,B\n40,B\n50,B\n");
    REQUIRE(invoke(dir, "project --input grow.csv --epsilon 0.16666666666666666 --oracle --output-dir p2").code == 0);
    const auto r2 = nlohmann::json::parse(read_file(dir.path() / "p2/report.json"));
    CHECK(r2["feasible"] == true);
    CHECK(r2["gap"].get<double>() >= 0.0);

    std::ostringstream big;
    big << "value,group\n";
    for (int i = 0; i < 17; ++i) big << i << ',' << (i % 2 ? 'A' : 'B') << '\n';
    dir.write("big.csv", big.str());
    CHECK(invoke(dir, "project --input big.csv --oracle --output-dir p3").code == 4);
    CHECK(invoke(dir, "project --input big.csv --output-dir p3").code == 0);
    CHECK(invoke(dir, "project --input grow.csv --lower 1000 --output-dir p4").code == 3);
    CHECK(invoke(dir, "project --output-dir p5").code == 2);
  }

  TEST_CASE("project fuzz mode writes a gap summary") {
    TempDir dir;
    REQUIRE(invoke(dir, "project --fuzz 40 --max-size 8 --seed 5 --output-dir fz").code == 0);
    CHECK(line_count(read_file(dir.path() / "fz/gaps.csv")) == 41);
    const auto s = nlohmann::json::parse(read_file(dir.path() / "fz/gap_summary.json"));
    CHECK(s["instances"] == 40);
    CHECK(s["recheck_failures"] == 0);
    CHECK(s["feasible_without_oracle_solution"] == 0);
    CHECK(invoke(dir, "project --fuzz 5 --max-size 17 --output-dir fz2").code == 4);
  }

  TEST_CASE("sweep on a bundled sample") {
    TempDir dir;
    const Invocation s = invoke(dir, "sweep --data '" + sample("wine_sample.csv") +
                                         "' --betas 0.01 --epsilons 0.05,0.25 --folds 2 --outer-iters 3 "
                                         "--inner-iters 5 --tau 1000 --repeats 2 --jobs 2 --output-dir sw");
    REQUIRE(s.code == 0);
    const std::string curve = read_file(dir.path() / "sw/curve.csv");
    CHECK(line_count(curve) == 3);
    CHECK(curve.rfind("epsilon,rmse\n", 0) == 0);
    const std::string best = read_file(dir.path() / "sw/best.conf");
    CHECK(best.find("beta = 0.01") != std::string::npos);  // single-point grid wins
    CHECK(parse_config_text(best).real("beta", 0) == 0.01);
    CHECK(line_count(read_file(dir.path() / "sw/table.csv")) == 3);
  }

  TEST_CASE("sweep results do not depend on the job count") {
    const TaskDataset d = load_csv(sample("crime_sample.csv"));
    SweepSettings s;
    s.base.outer_iters = 3;
    s.base.inner_iters = 5;
    s.base.tau = 500;
    s.betas = {0.01, 1.0};
    s.epsilons = {0.1};
    s.folds = 3;
    const SweepResult one = run_sweep(d, s);
    s.jobs = 3;
    const SweepResult three = run_sweep(d, s);
    REQUIRE(one.grid.size() == 2);
    for (std::size_t i = 0; i < one.grid.size(); ++i) CHECK(one.grid[i].rmse_mean == three.grid[i].rmse_mean);
    s.betas = {};
    CHECK_THROWS_AS(run_sweep(d, s), UsageError);
  }

  TEST_CASE("bundled samples run end to end with finite metrics") {
    for (const char* name : {"crime_sample.csv", "income_sample.csv", "wine_sample.csv", "student_sample.csv"}) {
      CAPTURE(name);
      const TaskDataset d = load_csv(sample(name));
      SolverConfig c;
      c.outer_iters = 5;
      c.inner_iters = 10;
      c.epsilon = 0.05;
      const TrainOutput out = train_model(d, c);
      for (const auto& row : evaluate_rows(d, &out.rows)) {
        CHECK(std::isfinite(row.auc));
        CHECK(std::isfinite(row.md));
        CHECK(std::isfinite(row.br));
        CHECK(std::isfinite(row.irr));
        CHECK(std::isfinite(row.rmse));
      }
    }
  }
}
