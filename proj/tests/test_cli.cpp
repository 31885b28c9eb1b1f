#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tailfuse/commands.hpp"
#include "tailfuse/csv.hpp"
#include "tailfuse/simulate.hpp"

using namespace tailfuse;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tailfuse_tests" / name;
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

RunConfig base_sim_config(const fs::path& dir) {
  RunConfig c;
  c.set("out_dir", dir.string());
  c.set("sim.n", "200");
  c.set("sim.J", "6");
  c.set("sim.gamma-block", "3");
  c.set("sim.sigma-block", "3");
  c.set("sim.rho", "0.5");
  c.set("seed", "11");
  return c;
}

}  // namespace

TEST_CASE("config file parsing") {
  const fs::path dir = fresh_dir("config");
  {
    std::ofstream out(dir / "run.conf");
    out << "# comment\n"
        << "input = data.csv\n"
        << "lambda.count=12\n"
        << "rl.tau = 0.001,0.002  # trailing comment\n";
  }
  RunConfig c;
  c.load_file((dir / "run.conf").string());
  CHECK(c.str("input") == "data.csv");
  CHECK(c.integer("lambda.count", 0) == 12);
  CHECK(c.num_list("rl.tau") == std::vector<double>{0.001, 0.002});
  c.set("lambda.count", "7");  // overrides win
  CHECK(c.integer("lambda.count", 0) == 7);

  std::ofstream bad(dir / "bad.conf");
  bad << "no equals sign here\n";
  bad.close();
  RunConfig b;
  CHECK_THROWS_AS(b.load_file((dir / "bad.conf").string()), std::invalid_argument);
}

TEST_CASE("csv round trip preserves doubles exactly") {
  const fs::path dir = fresh_dir("roundtrip");
  Matrix m(3, 2);
  m(0, 0) = 1.0 / 3.0;
  m(1, 0) = 1e-17;
  m(2, 0) = 123456789.123456789;
  m(0, 1) = -0.1;
  m(1, 1) = 2.5e300;
  m(2, 1) = 0.0;
  write_csv_file((dir / "m.csv").string(), m, {"a", "b"});
  const CsvTable back = read_csv_file((dir / "m.csv").string());
  CHECK(back.header == std::vector<std::string>{"a", "b"});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(back.values(i, j) == m(i, j));
}

TEST_CASE("csv rejects ragged and empty cells") {
  const fs::path dir = fresh_dir("badcsv");
  {
    std::ofstream out(dir / "ragged.csv");
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_csv_file((dir / "ragged.csv").string()), std::invalid_argument);
  {
    std::ofstream out(dir / "empty_cell.csv");
    out << "1,2\n3,\n";
  }
  CHECK_THROWS_AS(read_csv_file((dir / "empty_cell.csv").string()), std::invalid_argument);
  {
    std::ofstream out(dir / "empty.csv");
  }
  CHECK_THROWS_AS(read_csv_file((dir / "empty.csv").string()), std::invalid_argument);
}

TEST_CASE("cmd_simulate is byte-identical under a fixed seed") {
  const fs::path d1 = fresh_dir("sim_a");
  const fs::path d2 = fresh_dir("sim_b");
  std::ostringstream err;
  RunConfig c1 = base_sim_config(d1);
  c1.set("sim.reps", "3");
  c1.set("sim.procedure", "clusterwise");
  RunConfig c2 = base_sim_config(d2);
  c2.set("sim.reps", "3");
  c2.set("sim.procedure", "clusterwise");
  REQUIRE(cmd_simulate(c1, err) == kExitOk);
  REQUIRE(cmd_simulate(c2, err) == kExitOk);
  for (const std::string f : {"data.csv", "truth.csv", "eval.csv", "meta.json"}) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(!slurp(d1 / f).empty());
  }
  // a different seed changes the data
  const fs::path d3 = fresh_dir("sim_c");
  RunConfig c3 = base_sim_config(d3);
  c3.set("seed", "12");
  REQUIRE(cmd_simulate(c3, err) == kExitOk);
  CHECK(slurp(d1 / "data.csv") != slurp(d3 / "data.csv"));
}

TEST_CASE("cmd_simulate rejects unknown presets") {
  const fs::path dir = fresh_dir("sim_bad");
  std::ostringstream err;
  RunConfig c;
  c.set("out_dir", dir.string());
  c.set("sim.preset", "nope");
  CHECK(cmd_simulate(c, err) == kExitInputError);
  CHECK(err.str().find("error:") == 0);
}

TEST_CASE("fit pipeline artifacts and the lambda-zero grid") {
  const fs::path sim_dir = fresh_dir("fit_sim");
  std::ostringstream err;
  RunConfig sc = base_sim_config(sim_dir);
  REQUIRE(cmd_simulate(sc, err) == kExitOk);

  const fs::path fit_dir = fresh_dir("fit_out");
  RunConfig fc;
  fc.set("input", (sim_dir / "data.csv").string());
  fc.set("out_dir", fit_dir.string());
  fc.set("threshold.mode", "common-k");
  fc.set("threshold.k", "100");
  fc.set("graph.mode", "band");
  fc.set("graph.offsets", "1");
  fc.set("weights.kind", "uniform");
  fc.set("lambda.grid", "0");
  REQUIRE(cmd_fit(fc, err) == kExitOk);

  const CsvTable clusters = read_csv_file((fit_dir / "clusters.csv").string());
  REQUIRE(clusters.values.rows() == 6);
  // at lambda 0 the fused estimates equal the cluster-wise ones
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(clusters.values(j, 4) ==
          doctest::Approx(clusters.values(j, 3)).epsilon(1e-4));  // gamma_hat vs gamma_tilde
    CHECK(clusters.values(j, 1) == 100.0);
  }
  CHECK(fs::exists(fit_dir / "path.csv"));
  CHECK(fs::exists(fit_dir / "path_result.json"));
  CHECK(fs::exists(fit_dir / "graph.txt"));
  CHECK(fs::exists(fit_dir / "report.csv"));
  const CsvTable report = read_csv_file((fit_dir / "report.csv").string());
  CHECK(report.values.rows() == 6);  // default single tau
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(report.values(j, 4) <= report.values(j, 3));  // ci_lower <= point
    CHECK(report.values(j, 3) <= report.values(j, 5));
  }
}

TEST_CASE("cmd_return_level recomputes the report from the cluster table") {
  const fs::path sim_dir = fresh_dir("rl_sim");
  std::ostringstream err;
  REQUIRE(cmd_simulate(base_sim_config(sim_dir), err) == kExitOk);

  const fs::path fit_dir = fresh_dir("rl_fit");
  RunConfig fc;
  fc.set("input", (sim_dir / "data.csv").string());
  fc.set("out_dir", fit_dir.string());
  fc.set("threshold.mode", "common-k");
  fc.set("threshold.k", "80");
  fc.set("graph.offsets", "1,2");
  fc.set("rl.tau", "0.002");
  REQUIRE(cmd_fit(fc, err) == kExitOk);

  const fs::path rl_dir = fresh_dir("rl_out");
  RunConfig rc;
  rc.set("input", (fit_dir / "clusters.csv").string());
  rc.set("out_dir", rl_dir.string());
  rc.set("rl.tau", "0.002");
  REQUIRE(cmd_return_level(rc, err) == kExitOk);
  CHECK(slurp(rl_dir / "report.csv") == slurp(fit_dir / "report.csv"));
}

TEST_CASE("fit with a chi graph recovers two well-separated groups") {
  // two shape groups with strong serial dependence so the tail-dependence
  // graph links neighboring clusters
  ScenarioConfig sc;
  sc.n = 800;
  sc.J = 10;
  sc.rho = 0.95;
  sc.seed = 314;
  sc.gamma_true = {0.3, 0.3, 0.3, 0.3, 0.3, -0.1, -0.1, -0.1, -0.1, -0.1};
  sc.sigma_true.assign(10, 1.0);
  const Matrix data = generate(sc, 0);
  const fs::path dir = fresh_dir("chi_fit");
  write_csv_file((dir / "data.csv").string(), data);

  std::ostringstream err;
  RunConfig fc;
  fc.set("input", (dir / "data.csv").string());
  fc.set("out_dir", (dir / "out").string());
  fc.set("threshold.mode", "common-k");
  fc.set("threshold.k", "400");
  fc.set("graph.mode", "chi");
  fc.set("graph.chi-u", "0.9");
  fc.set("graph.cutoff", "0.35");
  fc.set("weights.kind", "scad");
  fc.set("lambda.count", "25");
  REQUIRE(cmd_fit(fc, err) == kExitOk);

  std::ifstream meta(dir / "out" / "meta.json");
  std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"selected_K\": 2") != std::string::npos);
  const CsvTable clusters = read_csv_file((dir / "out" / "clusters.csv").string());
  // the two halves carry the two distinct fused shapes
  CHECK(clusters.values(0, 4) == clusters.values(4, 4));
  CHECK(clusters.values(5, 4) == clusters.values(9, 4));
  CHECK(clusters.values(0, 4) != clusters.values(9, 4));
}

TEST_CASE("cmd_threshold with a single-k grid selects that k") {
  const fs::path sim_dir = fresh_dir("thr_sim");
  std::ostringstream err;
  REQUIRE(cmd_simulate(base_sim_config(sim_dir), err) == kExitOk);
  const fs::path out = fresh_dir("thr_out");
  RunConfig c;
  c.set("input", (sim_dir / "data.csv").string());
  c.set("out_dir", out.string());
  c.set("threshold.k-min", "60");
  c.set("threshold.k-max", "60");
  c.set("threshold.method", "min");
  REQUIRE(cmd_threshold(c, err) == kExitOk);
  std::ifstream meta(out / "meta.json");
  std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"selected_k\": 60") != std::string::npos);
}

TEST_CASE("cmd_return_level reproduces the exponential closed form") {
  const fs::path dir = fresh_dir("rl_closed");
  {
    std::ofstream out(dir / "clusters.csv");
    out << "cluster,n_j,w_j,gamma_tilde,gamma_hat,group,sigma_hat\n";
    out << "1,240,0,0,0,1,40\n";  // gamma 0, sigma 40, xi_hat = 240/240 = 1
  }
  std::ostringstream err;
  RunConfig c;
  c.set("input", (dir / "clusters.csv").string());
  c.set("out_dir", (dir / "out").string());
  c.set("rl.tau", format_double(1.0 / 240.0));
  c.set("rl.raw-n", "240");
  REQUIRE(cmd_return_level(c, err) == kExitOk);
  const CsvTable report = read_csv_file((dir / "out" / "report.csv").string());
  CHECK(report.values(0, 3) == doctest::Approx(40.0 * std::log(240.0)).epsilon(1e-10));
}

TEST_CASE("cmd_graph caches the chi matrix") {
  const fs::path sim_dir = fresh_dir("chi_sim");
  std::ostringstream err;
  REQUIRE(cmd_simulate(base_sim_config(sim_dir), err) == kExitOk);

  const fs::path out = fresh_dir("chi_out");
  RunConfig c;
  c.set("input", (sim_dir / "data.csv").string());
  c.set("out_dir", out.string());
  c.set("graph.mode", "chi");
  c.set("graph.chi-u", "0.9");
  c.set("graph.cutoff", "0.5");
  REQUIRE(cmd_graph(c, err) == kExitOk);
  REQUIRE(fs::exists(out / "chi.csv"));
  const std::string chi_bytes = slurp(out / "chi.csv");
  const std::string graph_bytes = slurp(out / "graph.txt");
  // second run reuses the cache and reproduces the graph
  REQUIRE(cmd_graph(c, err) == kExitOk);
  CHECK(slurp(out / "chi.csv") == chi_bytes);
  CHECK(slurp(out / "graph.txt") == graph_bytes);
  const CsvTable chi = read_csv_file((out / "chi.csv").string());
  CHECK(chi.values.rows() == 6);
  for (std::size_t j = 0; j < 6; ++j) CHECK(chi.values(j, j) == 1.0);
}

TEST_CASE("command error codes") {
  std::ostringstream err;
  SUBCASE("missing input") {
    RunConfig c;
    c.set("out_dir", fresh_dir("err1").string());
    CHECK(cmd_fit(c, err) == kExitInputError);
  }
  SUBCASE("nonexistent file") {
    RunConfig c;
    c.set("input", "/does/not/exist.csv");
    c.set("out_dir", fresh_dir("err2").string());
    CHECK(cmd_fit(c, err) == kExitInputError);
    CHECK(err.str().rfind("error: input:", 0) == 0);
  }
  SUBCASE("bad graph mode") {
    const fs::path sim_dir = fresh_dir("err3_sim");
    REQUIRE(cmd_simulate(base_sim_config(sim_dir), err) == kExitOk);
    RunConfig c;
    c.set("input", (sim_dir / "data.csv").string());
    c.set("out_dir", fresh_dir("err3").string());
    c.set("threshold.mode", "common-k");
    c.set("threshold.k", "50");
    c.set("graph.mode", "mystery");
    CHECK(cmd_fit(c, err) == kExitInputError);
  }
}

#ifdef TAILFUSE_CLI_PATH
TEST_CASE("binary exit codes") {
  const std::string bin = TAILFUSE_CLI_PATH;
  const fs::path dir = fresh_dir("bin");
  CHECK(std::system((bin + " fit -i /missing.csv -o " + (dir / "o").string() +
                     " 2>" + (dir / "e.txt").string())
                        .c_str()) != 0);
  const std::string msg = slurp(dir / "e.txt");
  CHECK(msg.rfind("error: input:", 0) == 0);
  CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
}
#endif
