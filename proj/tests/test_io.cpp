#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tmd/errors.hpp"
#include "tmd/io.hpp"

using namespace tmd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tmd_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name) const { return path / name; }
};

}  // namespace

TEST_CASE("matrix JSON round-trips bit-exactly") {
  TempDir tmp;
  SplitMix64 rng(4);
  const auto weights = oracles::random_weights(rng, 7);
  const ConditionalMatrix c = conditional_matrix(weights, 9);
  io::write_matrix_json(tmp.file("c.json"), c);
  const ConditionalMatrix back = io::read_conditional_matrix_json(tmp.file("c.json"));
  CHECK(back.mode_count == c.mode_count);
  CHECK(back.truncation == c.truncation);
  REQUIRE(back.entries.a.size() == c.entries.a.size());
  for (std::size_t i = 0; i < c.entries.a.size(); ++i)
    CHECK(back.entries.a[i] == c.entries.a[i]);  // exact, not approximate
}

TEST_CASE("matrix CSV round-trips bit-exactly through %.17g") {
  TempDir tmp;
  SplitMix64 rng(5);
  Matrix m(3, 4);
  for (double& v : m.a) v = rng.next_double() * 1e-3;
  m.a[5] = 0.0;
  m.a[6] = 1.0;
  io::write_matrix_csv(tmp.file("m.csv"), m);
  const Matrix back = io::read_matrix_csv(tmp.file("m.csv"));
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  for (std::size_t i = 0; i < m.a.size(); ++i) CHECK(back.a[i] == m.a[i]);

  SUBCASE("header row carries the column indices") {
    std::ifstream in(tmp.file("m.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "0,1,2,3");
  }
}

TEST_CASE("histogram CSV") {
  TempDir tmp;
  CountHistogram hist;
  hist.tallies = {120, 40, 9, 0, 1};
  hist.pulses = 170;
  io::write_histogram_csv(tmp.file("h.csv"), hist);
  const CountHistogram back = io::read_histogram_csv(tmp.file("h.csv"));
  CHECK(back.tallies == hist.tallies);
  CHECK(back.pulses == 170);

  SUBCASE("header is enforced") {
    std::ofstream out(tmp.file("bad.csv"));
    out << "count,k\n0,1\n";
    out.close();
    CHECK_THROWS_AS(io::read_histogram_csv(tmp.file("bad.csv")), validation_error);
  }
  SUBCASE("bad rows are reported with their line number") {
    std::ofstream out(tmp.file("bad2.csv"));
    out << "k,count\n0,12\n1,oops\n";
    out.close();
    CHECK_THROWS_WITH_AS(io::read_histogram_csv(tmp.file("bad2.csv")),
                         doctest::Contains("line 3"), validation_error);
  }
}

TEST_CASE("detector config JSON") {
  TempDir tmp;
  DetectorConfig config;
  config.stages = 3;
  config.coupler_ratios = {0.5, 0.45, 0.55};
  config.fiber_transmission = 0.95;
  config.detector_efficiency = 0.8;
  io::write_detector_config(tmp.file("cfg.json"), config);
  const DetectorConfig back = io::read_detector_config(tmp.file("cfg.json"));
  CHECK(back.stages == 3);
  CHECK(back.coupler_ratios == config.coupler_ratios);
  CHECK(back.fiber_transmission == 0.95);

  SUBCASE("schema key is required") {
    std::ofstream out(tmp.file("noschema.json"));
    out << R"({"stages": 2})";
    out.close();
    CHECK_THROWS_WITH_AS(io::read_detector_config(tmp.file("noschema.json")),
                         doctest::Contains("schema"), validation_error);
  }
  SUBCASE("field errors name the field") {
    std::ofstream out(tmp.file("badfield.json"));
    out << R"({"schema": 1, "stages": 0})";
    out.close();
    CHECK_THROWS_WITH_AS(io::read_detector_config(tmp.file("badfield.json")),
                         doctest::Contains("stages"), validation_error);
  }
}

TEST_CASE("weights and gates") {
  TempDir tmp;
  ModeWeights w;
  w.weights = {0.25, 0.25, 0.3, 0.1};
  w.loss_fraction = 0.1;
  RejectionReport report;
  report.events_total = 100;
  report.events_out_of_window = 10;
  io::write_weights_json(tmp.file("w.json"), w, &report);
  const ModeWeights back = io::read_weights_json(tmp.file("w.json"));
  CHECK(back.weights == w.weights);
  CHECK(back.loss_fraction == 0.1);

  std::ofstream gates_out(tmp.file("gates.json"));
  gates_out << "[[0, 50], [100, 150]]";
  gates_out.close();
  const GateSpec gates = io::read_gates_json(tmp.file("gates.json"));
  REQUIRE(gates.windows.size() == 2);
  CHECK(gates.windows[1].first == 100.0);

  std::ofstream bad(tmp.file("badgates.json"));
  bad << "[[0, 50, 75]]";
  bad.close();
  CHECK_THROWS_AS(io::read_gates_json(tmp.file("badgates.json")), validation_error);
}

TEST_CASE("TOA CSV") {
  TempDir tmp;
  std::ofstream out(tmp.file("toa.csv"));
  out << "detector,arrival_ns\n0,12.5\n1,140\n0,260.25\n";
  out.close();
  const auto events = io::read_toa_csv(tmp.file("toa.csv"));
  REQUIRE(events.size() == 3);
  CHECK(events[1].detector == 1);
  CHECK(events[2].arrival_ns == 260.25);

  std::ofstream bad(tmp.file("badtoa.csv"));
  bad << "time,det\n1,2\n";
  bad.close();
  CHECK_THROWS_AS(io::read_toa_csv(tmp.file("badtoa.csv")), validation_error);
}

TEST_CASE("distribution and result JSON") {
  TempDir tmp;
  const Distribution d = poisson_distribution(3.77, 8);
  io::write_distribution_json(tmp.file("d.json"), d);
  const Distribution back = io::read_distribution_json(tmp.file("d.json"));
  CHECK(back.kind == DistKind::photon_number);
  CHECK(back.values == d.values);
  CHECK(back.mu.value() == 3.77);
  CHECK(back.warnings == d.warnings);

  ReconstructionResult result;
  result.method = Method::inversion;
  result.rho = d;
  result.mu_estimate = 1.25;
  result.residual = 3.5e-9;
  result.diagnostics.negative_entries = true;
  result.error_bars = std::vector<double>{0.1, 0.2};
  io::write_result_json(tmp.file("r.json"), result);
  const ReconstructionResult rback = io::read_result_json(tmp.file("r.json"));
  CHECK(rback.method == Method::inversion);
  CHECK(rback.rho.values == d.values);
  CHECK(rback.mu_estimate.value() == 1.25);
  CHECK(rback.residual == 3.5e-9);
  CHECK(rback.diagnostics.negative_entries);
  CHECK_FALSE(rback.diagnostics.sum_deviation);
  CHECK(rback.error_bars.value() == std::vector<double>{0.1, 0.2});
}

TEST_CASE("result CSV carries bars and diagnostics") {
  TempDir tmp;
  ReconstructionResult result;
  result.method = Method::inversion;
  result.rho.values = {0.9, 0.2, -0.1};
  result.diagnostics.negative_entries = true;
  result.error_bars = std::vector<double>{0.01, 0.02, 0.03};
  io::write_result_csv(tmp.file("r.csv"), result);
  std::ifstream in(tmp.file("r.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,rho,stddev");
  std::getline(in, line);
  CHECK(line == "0,0.90000000000000002,0.01");
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.find("-0.1") != std::string::npos);  // negatives written as-is
  std::getline(in, line);
  CHECK(line.find("negative_entries") != std::string::npos);
}

TEST_CASE("bayes CSV omits undefined columns") {
  TempDir tmp;
  const std::vector<double> equal(4, 0.25);
  const ConditionalMatrix c = conditional_matrix(equal, 6);
  const LossMatrix l = loss_matrix(0.8, 6);
  const Distribution prior = Distribution::delta(2, 6, DistKind::photon_number);
  const BayesTable table = bayes_table(prior, c, l);
  io::write_bayes_csv(tmp.file("b.csv"), table);
  std::ifstream in(tmp.file("b.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "0,1,2");  // k = 3, 4 are impossible under a 2-photon prior
}

TEST_CASE("digests are stable and discriminating") {
  TempDir tmp;
  std::ofstream(tmp.file("a.txt")) << "same content";
  std::ofstream(tmp.file("b.txt")) << "same content";
  std::ofstream(tmp.file("c.txt")) << "different";
  CHECK(io::digest_file(tmp.file("a.txt")) == io::digest_file(tmp.file("b.txt")));
  CHECK(io::digest_file(tmp.file("a.txt")) != io::digest_file(tmp.file("c.txt")));
  CHECK(io::fnv1a64_hex("x") != io::fnv1a64_hex("y"));
}

TEST_CASE("manifest lands next to the output") {
  TempDir tmp;
  io::RunManifest manifest;
  manifest.command_line = "tmd matrix w.json --nmax 8 --out c.csv";
  manifest.tool_version = "0.0.0";
  manifest.kernel = "scalar";
  manifest.generator = "splitmix64";
  manifest.seed = 7;
  manifest.inputs.emplace_back("w.json", "abc");
  manifest.params_digest = io::fnv1a64_hex("nmax=8;");
  io::write_manifest(tmp.file("c.csv"), manifest);
  CHECK(fs::exists(tmp.file("c.csv.manifest.json")));
  std::ifstream in(tmp.file("c.csv.manifest.json"));
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("\"seed\": 7") != std::string::npos);
  CHECK(ss.str().find("splitmix64") != std::string::npos);
}
