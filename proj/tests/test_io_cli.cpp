#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fwmips/bench.hpp"
#include "fwmips/calibration.hpp"
#include "fwmips/io.hpp"

using namespace fwmips;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("fwmips_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("point-set binary format round trip") {
  const fs::path dir = temp_dir("fwps");
  const PointSet pts = generate_vertices(13, 7, 3);
  save_point_set(pts, dir / "a.fwps");
  const PointSet back = load_point_set(dir / "a.fwps");
  CHECK(back.matrix() == pts.matrix());  // bit exact
  CHECK(back.max_radius() == pts.max_radius());

  SUBCASE("bad magic is rejected with the path in the message") {
    std::ofstream bad(dir / "bad.fwps", std::ios::binary);
    bad << "NOPE1234";
    bad.close();
    CHECK_THROWS_AS(load_point_set(dir / "bad.fwps"), IoError);
    CHECK_THROWS_AS(load_point_set(dir / "missing.fwps"), IoError);
  }
}

TEST_CASE("point-set csv reader") {
  const fs::path dir = temp_dir("csv");
  {
    std::ofstream out(dir / "pts.csv");
    out << "1.5,2.0,-3.0\n0.0,0.25,8.0\n";
  }
  const PointSet pts = load_point_set_csv(dir / "pts.csv");
  CHECK(pts.size() == 2);
  CHECK(pts.dim() == 3);
  CHECK(pts.point(0)(0) == 1.5);
  CHECK(pts.point(1)(2) == 8.0);
}

TEST_CASE("ensemble metadata persists seeds, not matrices") {
  const fs::path dir = temp_dir("ens");
  const SketchEnsemble ens = build_ensemble(40, 9, 0.3, 0.1, 77, 5);
  save_ensemble_meta(ens, dir / "ens.json");
  const SketchEnsemble back = load_ensemble_meta(dir / "ens.json");
  REQUIRE(back.count() == ens.count());
  CHECK(back.sketch_dim == ens.sketch_dim);
  for (int i = 0; i < ens.count(); ++i)
    CHECK(back.matrices[static_cast<std::size_t>(i)] ==
          ens.matrices[static_cast<std::size_t>(i)]);
}

TEST_CASE("trace and estimate serialization") {
  const fs::path dir = temp_dir("trace");
  FwTrace trace;
  FwRecord rec;
  rec.t = 0;
  rec.eta = 1.0;
  rec.r = 0.5;
  rec.outcome = IterOutcome::kHit;
  rec.selected = 4;
  rec.gap_surrogate = 0.125;
  rec.objective = 0.25;
  trace.records.push_back(rec);
  trace.iterations = 1;
  trace.reason = StopReason::kGapThreshold;
  save_trace_csv(trace, dir / "t.csv");
  save_trace_summary_json(trace, dir / "t.json");

  const std::string csv = slurp(dir / "t.csv");
  CHECK(csv.find("t,eta,r,outcome,selected,gap_surrogate,objective") != std::string::npos);
  CHECK(csv.find("hit") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(slurp(dir / "t.json"));
  CHECK(j.at("reason") == "gap_threshold");
  CHECK(j.at("iterations") == 1);

  std::vector<AipeEstimate> ests = {{2, 0.5, 0.875}};
  save_estimates_csv(ests, dir / "e.csv");
  CHECK(slurp(dir / "e.csv").find("2,0.5,0.875") != std::string::npos);
}

TEST_CASE("experiment spec parsing and validation") {
  const fs::path dir = temp_dir("spec");
  {
    std::ofstream out(dir / "spec.json");
    out << R"({"scenario":"fw_quadratic","n":40,"d":8,"epsilon":0.005,
               "oracle":"lshjl","seeds":[1,2],"output_dir":")"
        << (dir / "inst").string() << R"("})";
  }
  const ExperimentSpec spec = ExperimentSpec::from_json_file(dir / "spec.json");
  CHECK(spec.n == 40);
  CHECK(spec.oracle == "lshjl");
  CHECK(spec.seeds.size() == 2);

  ExperimentSpec bad = spec;
  bad.oracle = "quantum";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.seeds.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("generate is deterministic and planted instances verify on load") {
  ExperimentSpec spec;
  spec.scenario = "planted_maxip";
  spec.n = 50;
  spec.d = 12;
  spec.tau = 0.9;
  spec.seeds = {7};

  const fs::path dir_a = temp_dir("gen_a");
  const fs::path dir_b = temp_dir("gen_b");
  spec.output_dir = dir_a.string();
  CHECK(cmd_generate(spec) == 0);
  spec.output_dir = dir_b.string();
  CHECK(cmd_generate(spec) == 0);

  // byte-identical outputs under the same seed (manifest differs only in
  // the embedded output_dir, so compare the data files)
  CHECK(slurp(dir_a / "points.fwps") == slurp(dir_b / "points.fwps"));

  const PointSet pts = load_point_set(dir_a / "points.fwps");
  nlohmann::json manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
  const auto qv = manifest.at("query").get<std::vector<double>>();
  Vec q(static_cast<Eigen::Index>(qv.size()));
  for (std::size_t i = 0; i < qv.size(); ++i) q(static_cast<Eigen::Index>(i)) = qv[i];
  const auto planted = manifest.at("planted_index").get<Eigen::Index>();
  CHECK(std::abs(pts.point(planted).dot(q) - 0.9) <= 1e-9);
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    if (i == planted) continue;
    CHECK(pts.point(i).dot(q) <= 0.3 + 1e-9);
  }
}

TEST_CASE("run pipeline: counters, determinism, reports") {
  // n large enough that sub-linear probing actually undercuts a full scan
  ExperimentSpec spec;
  spec.scenario = "fw_quadratic";
  spec.n = 400;
  spec.d = 8;
  spec.epsilon = 5e-3;
  spec.c = 0.9;
  spec.seeds = {1, 2};
  const fs::path dir = temp_dir("run");
  spec.output_dir = dir.string();
  REQUIRE(cmd_generate(spec) == 0);

  spec.oracle = "exact";
  REQUIRE(cmd_run(spec) == 0);
  spec.oracle = "lshjl";
  REQUIRE(cmd_run(spec) == 0);
  spec.oracle = "aipe";
  REQUIRE(cmd_run(spec) == 0);

  SUBCASE("exact dot counter is iterations * n * (d+3)") {
    nlohmann::json rep = nlohmann::json::parse(slurp(dir / "report_exact.json"));
    for (const auto& run : rep.at("runs")) {
      REQUIRE(run.at("ok").get<bool>());
      const auto iters = run.at("iterations").get<std::uint64_t>();
      const auto dots = run.at("counters").at("dot_ops").get<std::uint64_t>();
      CHECK(dots == iters * 400 * (8 + 3));
    }
  }

  SUBCASE("lshjl verification work stays below one exact scan per query") {
    nlohmann::json rep = nlohmann::json::parse(slurp(dir / "report_lshjl.json"));
    for (const auto& run : rep.at("runs")) {
      REQUIRE(run.at("ok").get<bool>());
      const auto queries = run.at("counters").at("oracle_queries").get<std::uint64_t>();
      const auto dots = run.at("counters").at("dot_ops").get<std::uint64_t>();
      const auto sketch = run.at("counters").at("sketch_ops").get<std::uint64_t>();
      CHECK(dots + sketch < queries * 400 * (8 + 3));
    }
  }

  SUBCASE("rerun reproduces traces byte for byte") {
    const std::string before = slurp(dir / "trace_lshjl_seed1.csv");
    spec.oracle = "lshjl";
    REQUIRE(cmd_run(spec) == 0);
    CHECK(slurp(dir / "trace_lshjl_seed1.csv") == before);
  }

  SUBCASE("report aggregates all three oracles") {
    const fs::path out = temp_dir("report");
    REQUIRE(cmd_report({dir}, out) == 0);
    const std::string md = slurp(out / "report.md");
    CHECK(md.find("| fw_quadratic | exact |") != std::string::npos);
    CHECK(md.find("| fw_quadratic | lshjl |") != std::string::npos);
    CHECK(md.find("| fw_quadratic | aipe |") != std::string::npos);
    CHECK(fs::exists(out / "curves.csv"));
    CHECK_THROWS_AS(cmd_report({out / "nothing_here"}, out), IoError);
  }
}

TEST_CASE("exact-run gap decays with log-log slope near -1 when mu is outside") {
  ExperimentSpec spec;
  spec.scenario = "fw_quadratic";
  spec.n = 60;
  spec.d = 10;
  spec.mu_mode = "outside";
  spec.epsilon = 1e-6;
  spec.max_iters = 3000;
  spec.oracle = "exact";
  spec.seeds = {5};
  const fs::path dir = temp_dir("slope");
  spec.output_dir = dir.string();
  REQUIRE(cmd_generate(spec) == 0);
  REQUIRE(cmd_run(spec) == 0);

  // fit on the trace's gap surrogate over t in [10, 2000]
  std::ifstream tr(dir / "trace_exact_seed5.csv");
  REQUIRE(tr.good());
  std::string line;
  std::getline(tr, line);
  std::vector<double> gaps;
  while (std::getline(tr, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    gaps.push_back(std::stod(cells[5]));
  }
  REQUIRE(gaps.size() > 100);
  const double slope = log_log_slope(gaps, 10, std::min<int>(2000, static_cast<int>(gaps.size()) - 1));
  CHECK(slope <= -0.85);
  CHECK(slope >= -1.15);
}

TEST_CASE("all-seeds-fail exit policy") {
  ExperimentSpec spec;
  spec.scenario = "fw_quadratic";
  spec.n = 30;
  spec.d = 6;
  spec.epsilon = 1e-30;  // unreachable threshold: every seed stalls
  spec.oracle = "lshjl";
  spec.probe_budget = 0;
  spec.seeds = {1, 2, 3};
  const fs::path dir = temp_dir("fail");
  spec.output_dir = dir.string();
  REQUIRE(cmd_generate(spec) == 0);
  CHECK(cmd_run(spec) == 1);

  nlohmann::json rep = nlohmann::json::parse(slurp(dir / "report_lshjl.json"));
  for (const auto& run : rep.at("runs")) {
    CHECK_FALSE(run.at("ok").get<bool>());
    CHECK(run.at("error").get<std::string>().find("consecutive") != std::string::npos);
  }
}

TEST_CASE("log_log_slope recovers exact power laws") {
  std::vector<double> inv_t, inv_t2;
  for (int t = 0; t < 3000; ++t) {
    inv_t.push_back(1.0 / (t + 1.0));
    inv_t2.push_back(1.0 / ((t + 1.0) * (t + 1.0)));
  }
  CHECK(std::abs(log_log_slope(inv_t, 10, 2999) + 1.0) <= 1e-9);
  CHECK(std::abs(log_log_slope(inv_t2, 10, 2999) + 2.0) <= 1e-9);
}

TEST_CASE("committed calibration file matches the compiled constants") {
  const fs::path committed = fs::path(FWMIPS_SOURCE_DIR) / "data" / "calibration.json";
  REQUIRE(fs::exists(committed));
  nlohmann::json j = nlohmann::json::parse(slurp(committed));

  CHECK(j.at("jl").at("C_s").get<double>() == calib::kCs);
  CHECK(j.at("jl").at("C_l").get<double>() == calib::kCl);
  CHECK(j.at("jl").at("k_cap").get<int>() == calib::kEnsembleCap);
  // the committed C_s must dominate what the pilot found necessary
  CHECK(j.at("jl").at("implied_C_s").get<double>() <= calib::kCs);

  CHECK(j.at("lsh").at("L_default").get<int>() == calib::kLshTablesDefault);
  CHECK(j.at("lsh").at("probe_budget_factor").get<int>() == calib::kProbeBudgetFactor);
  CHECK(j.at("lsh").at("smallest_L").get<int>() <= calib::kLshTablesDefault);

  CHECK(j.at("aipe").at("C_k").get<double>() == calib::kCk);
  CHECK(j.at("aipe").at("C_q").get<double>() == calib::kCq);

  CHECK(j.at("fw").at("C_T").get<double>() == calib::kCt);
  CHECK(j.at("fw").at("lambda_tilde_const").get<double>() == calib::kLambdaTildeConst);
  const auto& profile = j.at("fw").at("lshjl_profile");
  CHECK(profile.at("k_jl").get<int>() == calib::kFwProfileKjl);
  CHECK(profile.at("kappa").get<int>() == calib::kFwProfileKappa);
  CHECK(profile.at("samples").get<int>() == calib::kFwProfileSamples);
  CHECK(profile.at("tables").get<int>() == calib::kFwProfileTables);
  const auto& aipe_profile = j.at("fw").at("aipe_profile");
  CHECK(aipe_profile.at("epsilon").get<double>() == calib::kFwAipeEpsilon);
  CHECK(aipe_profile.at("top_verify").get<int>() == calib::kFwAipeTopVerify);
}

TEST_CASE("herding scenario runs end to end, with and without a custom P") {
  ExperimentSpec spec;
  spec.scenario = "herding";
  spec.n = 80;
  spec.d = 10;
  spec.k = 24;
  spec.epsilon = 5e-3;
  spec.c = 0.9;
  spec.oracle = "lshjl";
  spec.seeds = {4};
  const fs::path dir = temp_dir("herd");
  spec.output_dir = dir.string();
  REQUIRE(cmd_generate(spec) == 0);
  REQUIRE(cmd_run(spec) == 0);
  nlohmann::json rep = nlohmann::json::parse(slurp(dir / "report_lshjl.json"));
  REQUIRE(rep.at("runs")[0].at("ok").get<bool>());
  CHECK(rep.at("runs")[0].at("final_gap").get<double>() <= 5e-3);

  // weight half the points double: P supplied as a one-column CSV
  {
    std::ofstream p_file(dir / "p.csv");
    p_file.precision(17);
    const double lo = 2.0 / (3.0 * spec.n), hi = 4.0 / (3.0 * spec.n);
    for (int i = 0; i < spec.n; ++i) p_file << (i < spec.n / 2 ? hi : lo) << "\n";
  }
  nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  manifest["P_path"] = (dir / "p.csv").string();
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  REQUIRE(cmd_run(spec) == 0);
  nlohmann::json rep2 = nlohmann::json::parse(slurp(dir / "report_lshjl.json"));
  CHECK(rep2.at("runs")[0].at("ok").get<bool>());
  CHECK(rep2.at("runs")[0].at("final_gap").get<double>() <= 5e-3);
}
