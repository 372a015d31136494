// tmd - command-line front end for the time-multiplexed click-detector
// toolkit: device weights, transfer matrices, seeded simulation, photon
// number reconstruction, single-shot confidence tables.
//
// Exit codes: 0 success (possibly with warnings), 2 validation error,
// 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmd/errors.hpp"
#include "tmd/io.hpp"
#include "tmd/kernels.hpp"
#include "tmd/matrix.hpp"
#include "tmd/reconstruct.hpp"
#include "tmd/rng.hpp"
#include "tmd/simulate.hpp"
#include "tmd/timing.hpp"
#include "tmd/version.hpp"

namespace {

bool g_quiet = false;
bool g_json_errors = false;

void progress(const std::string& msg) {
  if (!g_quiet) std::cerr << msg << '\n';
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void report_error(const std::string& msg, int code) {
  if (g_json_errors)
    std::cerr << nlohmann::json{{"error", msg}, {"code", code}}.dump() << '\n';
  else
    std::cerr << "error: " << msg << '\n';
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// Collects everything that pins a run; emitted as <out>.manifest.json next to
// each produced file (skipped when writing to stdout).
class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string command_line) {
    manifest_.command_line = std::move(command_line);
    manifest_.tool_version = TMD_VERSION;
    manifest_.kernel = tmd::kern::active().name;
    manifest_.generator = tmd::kGeneratorName;
  }

  void input(const std::filesystem::path& path) {
    manifest_.inputs.emplace_back(path.string(), tmd::io::digest_file(path));
  }
  void input_text(const std::string& name, const std::string& content) {
    manifest_.inputs.emplace_back(name, tmd::io::fnv1a64_hex(content));
  }
  void param(const std::string& name, const std::string& value) {
    params_ += name + '=' + value + ';';
  }
  void seed(std::uint64_t s) {
    manifest_.seed = s;
    param("seed", std::to_string(s));
  }
  void metadata(const std::string& key, const std::string& value) {
    manifest_.metadata.emplace_back(key, value);
  }
  void output(const std::filesystem::path& path) { manifest_.outputs.push_back(path.string()); }

  void emit(const std::filesystem::path& primary_output) {
    manifest_.params_digest = tmd::io::fnv1a64_hex(params_);
    output(primary_output);
    tmd::io::write_manifest(primary_output, manifest_);
  }

 private:
  tmd::io::RunManifest manifest_;
  std::string params_;
};

bool is_stdout(const std::string& path) { return path == "-"; }

// --- weights ---

struct WeightsArgs {
  std::string config, toa, gates, out;
  double eta = 1.0;
};

void run_weights(const WeightsArgs& args, ManifestBuilder& manifest) {
  if (args.config.empty() == args.toa.empty())
    throw tmd::validation_error(
        "conflicting weight sources: give exactly one of --config or --toa");
  if (!args.toa.empty() && args.gates.empty())
    throw tmd::validation_error("--toa requires --gates");

  if (!args.config.empty()) {
    manifest.input(args.config);
    const tmd::DetectorConfig config = tmd::io::read_detector_config(args.config);
    if (config.deadtime_violation())
      warn("base_delay_ns <= deadtime_ns: adjacent modes fall inside the detector deadtime");
    const tmd::ModeWeights weights = tmd::derive_mode_weights(config);
    tmd::io::write_weights_json(args.out, weights);
    progress("wrote " + std::to_string(weights.mode_count()) + " mode weights (efficiency " +
             tmd::io::format_double(weights.efficiency()) + ") to " + args.out);
  } else {
    manifest.input(args.toa);
    manifest.input(args.gates);
    manifest.param("eta", tmd::io::format_double(args.eta));
    const auto events = tmd::io::read_toa_csv(args.toa);
    const tmd::GateSpec gates = tmd::io::read_gates_json(args.gates);
    const auto [weights, report] = tmd::weights_from_events(events, gates, args.eta);
    tmd::io::write_weights_json(args.out, weights, &report);
    progress("integrated " + std::to_string(report.events_total - report.events_out_of_window) +
             " in-window events; out-of-window fraction " +
             tmd::io::format_double(report.out_of_window_fraction()));
  }
  manifest.emit(args.out);
}

// --- matrix ---

struct MatrixArgs {
  std::string weights, out;
  std::size_t n_max = 8;
};

void run_matrix(const MatrixArgs& args, ManifestBuilder& manifest) {
  manifest.input(args.weights);
  manifest.param("nmax", std::to_string(args.n_max));
  const tmd::ModeWeights raw = tmd::io::read_weights_json(args.weights);
  const tmd::ModeWeights normalized = raw.normalized();
  const tmd::ConditionalMatrix c = tmd::conditional_matrix(normalized.weights, args.n_max);
  if (is_stdout(args.out)) {
    tmd::io::write_matrix_csv(std::cout, c.entries);
    return;
  }
  if (std::filesystem::path(args.out).extension() == ".json")
    tmd::io::write_matrix_json(args.out, c);
  else
    tmd::io::write_matrix_csv(args.out, c.entries);
  manifest.emit(args.out);
  progress("conditional matrix " + std::to_string(c.entries.rows) + "x" +
           std::to_string(c.entries.cols) + " for " + std::to_string(c.mode_count) + " modes");
}

// --- simulate ---

struct SimulateArgs {
  std::optional<double> coherent;
  std::optional<int> fock;
  std::string custom;
  std::string config, weights;
  std::optional<double> eta;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  double dark = 0.0;
  std::string records;
  std::string out;
};

void run_simulate(const SimulateArgs& args, ManifestBuilder& manifest) {
  const int sources = int(args.coherent.has_value()) + int(args.fock.has_value()) +
                      int(!args.custom.empty());
  if (sources != 1)
    throw tmd::validation_error("give exactly one source: --coherent, --fock or --custom");
  if (args.config.empty() == args.weights.empty())
    throw tmd::validation_error("give exactly one of --config or --weights");

  tmd::ModeWeights weights;
  double eta = 1.0;
  if (!args.config.empty()) {
    if (args.eta)
      throw tmd::validation_error(
          "--eta conflicts with --config (efficiency comes from the device description)");
    manifest.input(args.config);
    const tmd::DetectorConfig config = tmd::io::read_detector_config(args.config);
    weights = tmd::derive_mode_weights(config);
    eta = weights.efficiency();
  } else {
    manifest.input(args.weights);
    weights = tmd::io::read_weights_json(args.weights);
    eta = args.eta.value_or(1.0);
  }

  tmd::SourceSpec source;
  if (args.coherent)
    source = tmd::SourceSpec::coherent(*args.coherent, args.pulses);
  else if (args.fock)
    source = tmd::SourceSpec::fock(*args.fock, args.pulses);
  else {
    manifest.input(args.custom);
    source = tmd::SourceSpec::custom(tmd::io::read_distribution_json(args.custom), args.pulses);
  }

  tmd::SimOptions options;
  options.dark_count_prob_per_mode = args.dark;
  options.keep_records = !args.records.empty();

  const tmd::SimResult result = tmd::simulate(source, weights, eta, args.seed, options);

  manifest.seed(args.seed);
  manifest.param("source", source.describe());
  manifest.param("eta", tmd::io::format_double(eta));
  manifest.param("pulses", std::to_string(args.pulses));
  manifest.param("dark", tmd::io::format_double(args.dark));
  manifest.metadata("source", source.describe());
  manifest.metadata("weights_digest", result.weights_digest);

  if (!args.records.empty()) {
    tmd::io::write_records_jsonl(args.records, result.records);
    manifest.output(args.records);
  }
  if (is_stdout(args.out)) {
    tmd::io::write_histogram_csv(std::cout, result.hist);
    return;
  }
  tmd::io::write_histogram_csv(args.out, result.hist);
  manifest.emit(args.out);
  progress("simulated " + std::to_string(args.pulses) + " pulses (seed " +
           std::to_string(args.seed) + ", mean count " +
           tmd::io::format_double(result.hist.mean_count()) + ")");
}

// --- reconstruct ---

struct ReconstructArgs {
  std::string hist = "-";
  std::string method;
  std::string matrix, weights;
  std::size_t n_max = 8;
  double eta = 1.0;
  std::optional<std::size_t> modes;
  std::size_t error_bars = 0;
  std::uint64_t seed = 0;
  std::string out;
};

tmd::ConditionalMatrix load_conditional(const ReconstructArgs& args, ManifestBuilder& manifest) {
  if (!args.matrix.empty()) {
    manifest.input(args.matrix);
    if (std::filesystem::path(args.matrix).extension() == ".json")
      return tmd::io::read_conditional_matrix_json(args.matrix);
    tmd::Matrix m = tmd::io::read_matrix_csv(args.matrix);
    tmd::ConditionalMatrix c;
    c.mode_count = m.rows - 1;  // lower bound; enough for the square truncation
    c.truncation = m.cols - 1;
    c.entries = std::move(m);
    return c;
  }
  if (args.weights.empty())
    throw tmd::validation_error("reconstruction needs --matrix or --weights");
  manifest.input(args.weights);
  const tmd::ModeWeights normalized = tmd::io::read_weights_json(args.weights).normalized();
  return tmd::conditional_matrix(normalized.weights, args.n_max);
}

void run_reconstruct(const ReconstructArgs& args, ManifestBuilder& manifest) {
  const tmd::Method method = tmd::method_from_name(args.method);

  tmd::CountHistogram hist;
  if (is_stdout(args.hist)) {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    const std::string text = buffer.str();
    manifest.input_text("<stdin>", text);
    std::istringstream in(text);
    hist = tmd::io::read_histogram_csv(in);
  } else {
    manifest.input(args.hist);
    hist = tmd::io::read_histogram_csv(args.hist);
  }
  manifest.param("method", args.method);
  manifest.param("eta", tmd::io::format_double(args.eta));

  tmd::ReconstructionResult result;
  tmd::ConditionalMatrix c;
  tmd::LossMatrix l;
  const bool needs_matrix = method != tmd::Method::binomial_fit;
  if (needs_matrix) {
    c = load_conditional(args, manifest);
    if (hist.tallies.size() < c.entries.rows) hist.tallies.resize(c.entries.rows, 0);
    l = tmd::loss_matrix(args.eta, c.truncation);
  }

  switch (method) {
    case tmd::Method::binomial_fit: {
      const std::size_t modes = args.modes.value_or(hist.tallies.size() - 1);
      manifest.param("modes", std::to_string(modes));
      result = tmd::fit_binomial(hist, modes);
      break;
    }
    case tmd::Method::poisson_forward_fit:
      result = tmd::fit_poisson_forward(hist, c, l);
      break;
    case tmd::Method::inversion:
      result = tmd::invert(hist, c, l);
      break;
    case tmd::Method::max_likelihood:
      result = tmd::ml_reconstruct(hist, matmul(c.entries, l.entries));
      break;
  }

  if (args.error_bars > 0) {
    manifest.seed(args.seed);
    manifest.param("error_bars", std::to_string(args.error_bars));
    // Fits resample from the fitted model; inversion/ML bootstrap the data.
    tmd::Distribution base;
    if (method == tmd::Method::binomial_fit)
      base = tmd::binomial_count_model(result.mu_estimate.value_or(0.0),
                                       args.modes.value_or(hist.tallies.size() - 1));
    else if (method == tmd::Method::poisson_forward_fit)
      base = tmd::forward(c, l, tmd::poisson_distribution(result.mu_estimate.value_or(0.0),
                                                          c.truncation))
                 .normalized();
    else
      base = hist.probabilities();
    auto pipeline = [&](const tmd::CountHistogram& h) {
      switch (method) {
        case tmd::Method::binomial_fit:
          return tmd::fit_binomial(h, args.modes.value_or(hist.tallies.size() - 1));
        case tmd::Method::poisson_forward_fit: return tmd::fit_poisson_forward(h, c, l);
        case tmd::Method::inversion: return tmd::invert(h, c, l);
        case tmd::Method::max_likelihood:
          return tmd::ml_reconstruct(h, matmul(c.entries, l.entries));
      }
      throw tmd::validation_error("unreachable");
    };
    const tmd::McErrorBars bars =
        tmd::mc_error_bars(base, pipeline, hist.pulses, args.error_bars, args.seed);
    result.error_bars = bars.stddev;
  }

  if (std::filesystem::path(args.out).extension() == ".csv")
    tmd::io::write_result_csv(args.out, result);
  else
    tmd::io::write_result_json(args.out, result);
  manifest.emit(args.out);

  if (!result.diagnostics.clean()) {
    std::string flags;
    for (const auto& f : result.diagnostics.to_strings()) flags += (flags.empty() ? "" : ", ") + f;
    warn("reconstruction carries diagnostics: " + flags);
  }
  if (result.mu_estimate)
    progress("method " + args.method +
             ": mu_estimate = " + tmd::io::format_double(*result.mu_estimate) +
             ", residual = " + tmd::io::format_double(result.residual));
  else
    progress("method " + args.method +
             ": residual = " + tmd::io::format_double(result.residual));
}

// --- bayes ---

struct BayesArgs {
  std::optional<double> prior_coherent;
  std::optional<int> prior_fock;
  std::string prior_file;
  std::string matrix;
  double eta = 1.0;
  std::string out;
};

void run_bayes(const BayesArgs& args, ManifestBuilder& manifest) {
  const int priors = int(args.prior_coherent.has_value()) + int(args.prior_fock.has_value()) +
                     int(!args.prior_file.empty());
  if (priors != 1)
    throw tmd::validation_error(
        "give exactly one prior: --prior-coherent, --prior-fock or --prior");

  manifest.input(args.matrix);
  tmd::ConditionalMatrix c;
  if (std::filesystem::path(args.matrix).extension() == ".json")
    c = tmd::io::read_conditional_matrix_json(args.matrix);
  else {
    tmd::Matrix m = tmd::io::read_matrix_csv(args.matrix);
    c.mode_count = m.rows - 1;
    c.truncation = m.cols - 1;
    c.entries = std::move(m);
  }
  const tmd::LossMatrix l = tmd::loss_matrix(args.eta, c.truncation);
  manifest.param("eta", tmd::io::format_double(args.eta));

  tmd::Distribution prior;
  if (args.prior_coherent) {
    prior = tmd::poisson_distribution(*args.prior_coherent, c.truncation);
    const double tail = prior.tail_mass.value_or(0.0);
    if (tail > 1e-9) prior = prior.normalized();
    manifest.param("prior", "coherent:" + tmd::io::format_double(*args.prior_coherent));
  } else if (args.prior_fock) {
    prior = tmd::Distribution::delta(static_cast<std::size_t>(*args.prior_fock), c.truncation,
                                     tmd::DistKind::photon_number);
    manifest.param("prior", "fock:" + std::to_string(*args.prior_fock));
  } else {
    manifest.input(args.prior_file);
    prior = tmd::io::read_distribution_json(args.prior_file);
    manifest.param("prior", "file");
  }

  const tmd::BayesTable table = tmd::bayes_table(prior, c, l);
  tmd::io::write_bayes_csv(args.out, table);
  manifest.emit(args.out);
  std::size_t defined = 0;
  for (bool d : table.defined) defined += d ? 1 : 0;
  progress("bayes table over n = 0.." + std::to_string(table.entries.rows - 1) + ", " +
           std::to_string(defined) + " defined count columns");
}

// --- fock sweep ---

struct FockArgs {
  std::size_t modes = 16;
  std::vector<int> j_values;
  std::string eta_grid = "0.1:1.0:10";
  std::string out;
};

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0, stop = 0;
  int count = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3 || count < 1)
    throw tmd::validation_error("--eta-grid must be start:stop:count (got '" + spec + "')");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        count == 1 ? start : start + (stop - start) * i / (count - 1);
  return grid;
}

void run_fock(const FockArgs& args, ManifestBuilder& manifest) {
  std::vector<int> j_values = args.j_values;
  if (j_values.empty())
    for (std::size_t j = 1; j <= args.modes; ++j) j_values.push_back(static_cast<int>(j));
  const std::vector<double> etas = parse_grid(args.eta_grid);
  manifest.param("modes", std::to_string(args.modes));
  manifest.param("eta_grid", args.eta_grid);
  const auto rows = tmd::sweep_fock_diagonal(args.modes, j_values, etas);
  tmd::io::write_fock_sweep_csv(args.out, rows);
  manifest.emit(args.out);
  progress("swept " + std::to_string(rows.size()) + " (j, eta) points");
}

// --- timing ---

struct TimingArgs {
  std::string config;
  std::string out;
};

void run_timing(const TimingArgs& args, ManifestBuilder& manifest) {
  manifest.input(args.config);
  const tmd::DetectorConfig config = tmd::io::read_detector_config(args.config);
  const tmd::TimingReport report = tmd::timing(config);
  tmd::io::write_timing_json(args.out, report);
  manifest.emit(args.out);
  progress("max repetition rate " + tmd::io::format_double(report.max_rep_rate_hz / 1e6) +
           " MHz over " + std::to_string(report.stages) + " stages" +
           (report.deadtime_violation ? " (deadtime violation)" : ""));
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--json-errors") g_json_errors = true;

  CLI::App app{"Time-multiplexed click-detector statistics toolkit"};
  app.set_version_flag("--version", TMD_VERSION);
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "Suppress progress output on stderr");
  bool json_errors_flag = false;
  app.add_flag("--json-errors", json_errors_flag, "Emit errors as JSON on stderr");
  std::string kernel_override;
  app.add_option("--kernel", kernel_override, "Force a compute kernel (scalar, avx2)");

  WeightsArgs weights_args;
  auto* weights_cmd =
      app.add_subcommand("weights", "Mode weights from a device description or TOA events");
  weights_cmd->add_option("--config", weights_args.config, "Detector description JSON");
  weights_cmd->add_option("--toa", weights_args.toa, "Time-of-arrival event CSV");
  weights_cmd->add_option("--gates", weights_args.gates, "Gate windows JSON");
  weights_cmd->add_option("--eta", weights_args.eta,
                          "Total efficiency the ingested weights should sum to");
  weights_cmd->add_option("--out", weights_args.out, "Output weights JSON")->required();

  MatrixArgs matrix_args;
  auto* matrix_cmd = app.add_subcommand("matrix", "Conditional count-statistics matrix");
  matrix_cmd->add_option("weights", matrix_args.weights, "Mode weights JSON")->required();
  matrix_cmd->add_option("--nmax", matrix_args.n_max, "Photon-number truncation")->required();
  matrix_cmd->add_option("--out", matrix_args.out, "Output CSV/JSON ('-' for stdout CSV)")
      ->required();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Seeded single-shot Monte Carlo");
  sim_cmd->add_option("--coherent", sim_args.coherent, "Coherent source mean photon number");
  sim_cmd->add_option("--fock", sim_args.fock, "Fock source photon number");
  sim_cmd->add_option("--custom", sim_args.custom, "Custom photon distribution JSON");
  sim_cmd->add_option("--config", sim_args.config, "Detector description JSON");
  sim_cmd->add_option("--weights", sim_args.weights, "Mode weights JSON");
  sim_cmd->add_option("--eta", sim_args.eta, "Detection efficiency (with --weights)");
  sim_cmd->add_option("--pulses", sim_args.pulses, "Trigger count")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed")->envname("TMD_SEED");
  sim_cmd->add_option("--dark", sim_args.dark, "Dark count probability per mode per pulse");
  sim_cmd->add_option("--records", sim_args.records, "Also write per-pulse records (JSON lines)");
  sim_cmd->add_option("--out", sim_args.out, "Output histogram CSV ('-' for stdout)")->required();

  ReconstructArgs rec_args;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Infer the photon-number distribution");
  rec_cmd->add_option("hist", rec_args.hist, "Histogram CSV ('-' for stdin)");
  rec_cmd->add_option("--method", rec_args.method, "invert | ml | poisson-fit | binom-fit")
      ->required();
  rec_cmd->add_option("--matrix", rec_args.matrix, "Conditional matrix CSV/JSON");
  rec_cmd->add_option("--weights", rec_args.weights, "Mode weights JSON (build matrix)");
  rec_cmd->add_option("--nmax", rec_args.n_max, "Truncation when building from weights");
  rec_cmd->add_option("--eta", rec_args.eta, "Detection efficiency for the loss matrix");
  rec_cmd->add_option("--modes", rec_args.modes, "Mode count for binom-fit");
  rec_cmd->add_option("--error-bars", rec_args.error_bars,
                      "Monte Carlo replicates for per-bin error bars");
  rec_cmd->add_option("--seed", rec_args.seed, "RNG seed for error bars")->envname("TMD_SEED");
  rec_cmd->add_option("--out", rec_args.out, "Output result JSON")->required();

  BayesArgs bayes_args;
  auto* bayes_cmd = app.add_subcommand("bayes", "Single-shot confidence table p(n|k)");
  bayes_cmd->add_option("--prior-coherent", bayes_args.prior_coherent, "Coherent prior mean");
  bayes_cmd->add_option("--prior-fock", bayes_args.prior_fock, "Fock prior photon number");
  bayes_cmd->add_option("--prior", bayes_args.prior_file, "Prior distribution JSON");
  bayes_cmd->add_option("--matrix", bayes_args.matrix, "Conditional matrix CSV/JSON")->required();
  bayes_cmd->add_option("--eta", bayes_args.eta, "Detection efficiency");
  bayes_cmd->add_option("--out", bayes_args.out, "Output table CSV")->required();

  FockArgs fock_args;
  auto* fock_cmd = app.add_subcommand("fock", "All-detected diagonal sweep vs closed form");
  fock_cmd->add_option("--modes", fock_args.modes, "Mode count");
  fock_cmd->add_option("--n", fock_args.j_values, "Photon numbers j (default 1..modes)");
  fock_cmd->add_option("--eta-grid", fock_args.eta_grid, "Efficiency grid start:stop:count");
  fock_cmd->add_option("--out", fock_args.out, "Output sweep CSV")->required();

  TimingArgs timing_args;
  auto* timing_cmd = app.add_subcommand("timing", "Repetition-rate budget of a device");
  timing_cmd->add_option("config", timing_args.config, "Detector description JSON")->required();
  timing_cmd->add_option("--out", timing_args.out, "Output report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!kernel_override.empty()) tmd::kern::select(kernel_override);
    ManifestBuilder manifest(join_args(argc, argv));
    if (app.got_subcommand(weights_cmd)) run_weights(weights_args, manifest);
    else if (app.got_subcommand(matrix_cmd)) run_matrix(matrix_args, manifest);
    else if (app.got_subcommand(sim_cmd)) run_simulate(sim_args, manifest);
    else if (app.got_subcommand(rec_cmd)) run_reconstruct(rec_args, manifest);
    else if (app.got_subcommand(bayes_cmd)) run_bayes(bayes_args, manifest);
    else if (app.got_subcommand(fock_cmd)) run_fock(fock_args, manifest);
    else if (app.got_subcommand(timing_cmd)) run_timing(timing_args, manifest);
  } catch (const tmd::validation_error& e) {
    report_error(e.what(), 2);
    return 2;
  } catch (const tmd::numerical_error& e) {
    report_error(e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    report_error(e.what(), 3);
    return 3;
  }
  return 0;
}
