#include "tmd/io.hpp"

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tmd/errors.hpp"

namespace tmd::io {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void require_schema(const json& j, const std::filesystem::path& path) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != 1)
    throw validation_error(path.string() + ": missing or unsupported schema (expected 1)");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("line " + std::to_string(line_no) + ": not a count: '" + s + "'");
  }
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string fnv1a64_hex(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a64_hex(const std::string& s) { return fnv1a64_hex(s.data(), s.size()); }

std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  return fnv1a64_hex(content);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- DetectorConfig ---

DetectorConfig read_detector_config(const std::filesystem::path& path) {
  const json j = load_json(path);
  require_schema(j, path);
  DetectorConfig config;
  try {
    config.stages = j.at("stages").get<int>();
    if (j.contains("coupler_ratios"))
      config.coupler_ratios = j["coupler_ratios"].get<std::vector<double>>();
    if (j.contains("fiber_transmission"))
      config.fiber_transmission = j["fiber_transmission"].get<double>();
    if (j.contains("detector_efficiency"))
      config.detector_efficiency = j["detector_efficiency"].get<double>();
    if (j.contains("base_delay_ns")) config.base_delay_ns = j["base_delay_ns"].get<double>();
    if (j.contains("deadtime_ns")) config.deadtime_ns = j["deadtime_ns"].get<double>();
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

void write_detector_config(const std::filesystem::path& path, const DetectorConfig& config) {
  json j{{"schema", 1},
         {"stages", config.stages},
         {"fiber_transmission", config.fiber_transmission},
         {"detector_efficiency", config.detector_efficiency},
         {"base_delay_ns", config.base_delay_ns},
         {"deadtime_ns", config.deadtime_ns}};
  if (!config.coupler_ratios.empty()) j["coupler_ratios"] = config.coupler_ratios;
  save_json(path, j);
}

// --- ModeWeights ---

ModeWeights read_weights_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  require_schema(j, path);
  ModeWeights weights;
  try {
    weights.weights = j.at("weights").get<std::vector<double>>();
    weights.loss_fraction = j.value("loss_fraction", 0.0);
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  weights.validate();
  return weights;
}

void write_weights_json(const std::filesystem::path& path, const ModeWeights& weights,
                        const RejectionReport* rejection) {
  json j{{"schema", 1}, {"weights", weights.weights}, {"loss_fraction", weights.loss_fraction}};
  if (rejection != nullptr)
    j["rejection_report"] = {{"events_total", rejection->events_total},
                             {"events_out_of_window", rejection->events_out_of_window},
                             {"out_of_window_fraction", rejection->out_of_window_fraction()}};
  save_json(path, j);
}

GateSpec read_gates_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  GateSpec gates;
  try {
    for (const auto& w : j) {
      if (!w.is_array() || w.size() != 2)
        throw validation_error(path.string() + ": each gate must be a [start_ns, end_ns] pair");
      gates.windows.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  gates.validate();
  return gates;
}

// --- Distribution ---

namespace {

json distribution_to_json(const Distribution& dist) {
  json j{{"schema", 1},
         {"kind", dist.kind == DistKind::photon_number ? "photon-number" : "count-number"},
         {"values", dist.values}};
  if (!dist.warnings.empty()) j["warnings"] = dist.warnings;
  if (dist.mu) j["mu"] = *dist.mu;
  if (dist.tail_mass) j["tail_mass"] = *dist.tail_mass;
  return j;
}

Distribution distribution_from_json(const json& j, const std::filesystem::path& path) {
  Distribution dist;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "photon-number")
      dist.kind = DistKind::photon_number;
    else if (kind == "count-number")
      dist.kind = DistKind::count_number;
    else
      throw validation_error(path.string() + ": unknown distribution kind '" + kind + "'");
    dist.values = j.at("values").get<std::vector<double>>();
    if (j.contains("warnings")) dist.warnings = j["warnings"].get<std::vector<std::string>>();
    if (j.contains("mu")) dist.mu = j["mu"].get<double>();
    if (j.contains("tail_mass")) dist.tail_mass = j["tail_mass"].get<double>();
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  return dist;
}

}  // namespace

Distribution read_distribution_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  require_schema(j, path);
  return distribution_from_json(j, path);
}

void write_distribution_json(const std::filesystem::path& path, const Distribution& dist) {
  save_json(path, distribution_to_json(dist));
}

// --- ReconstructionResult ---

void write_result_json(const std::filesystem::path& path, const ReconstructionResult& result) {
  json j{{"schema", 1},
         {"method", method_name(result.method)},
         {"rho", result.rho.values},
         {"residual", result.residual},
         {"diagnostics", result.diagnostics.to_strings()},
         {"iterations", result.iterations}};
  j["mu_estimate"] = result.mu_estimate ? json(*result.mu_estimate) : json(nullptr);
  j["error_bars"] = result.error_bars ? json(*result.error_bars) : json(nullptr);
  save_json(path, j);
}

ReconstructionResult read_result_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  require_schema(j, path);
  ReconstructionResult result;
  try {
    result.method = method_from_name(j.at("method").get<std::string>());
    result.rho.kind = DistKind::photon_number;
    result.rho.values = j.at("rho").get<std::vector<double>>();
    result.residual = j.at("residual").get<double>();
    result.iterations = j.value("iterations", std::size_t{0});
    if (j.contains("mu_estimate") && !j["mu_estimate"].is_null())
      result.mu_estimate = j["mu_estimate"].get<double>();
    if (j.contains("error_bars") && !j["error_bars"].is_null())
      result.error_bars = j["error_bars"].get<std::vector<double>>();
    for (const auto& d : j.value("diagnostics", std::vector<std::string>{})) {
      if (d == "negative_entries") result.diagnostics.negative_entries = true;
      if (d == "sum_deviation") result.diagnostics.sum_deviation = true;
      if (d == "condition_warning") result.diagnostics.condition_warning = true;
    }
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  return result;
}

void write_result_csv(const std::filesystem::path& path, const ReconstructionResult& result) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  const bool bars = result.error_bars.has_value();
  out << (bars ? "n,rho,stddev\n" : "n,rho\n");
  for (std::size_t n = 0; n < result.rho.values.size(); ++n) {
    out << n << ',' << format_double(result.rho.values[n]);
    if (bars)
      out << ',' << (n < result.error_bars->size() ? format_double((*result.error_bars)[n]) : "");
    out << '\n';
  }
  const auto flags = result.diagnostics.to_strings();
  if (!flags.empty()) {
    out << "# diagnostics:";
    for (const auto& f : flags) out << ' ' << f;
    out << '\n';
  }
}

void write_timing_json(const std::filesystem::path& path, const TimingReport& report) {
  save_json(path, json{{"schema", 1},
                       {"stages", report.stages},
                       {"delta_t_ns", report.delta_t_ns},
                       {"longest_path_ns", report.longest_path_ns},
                       {"max_rep_rate_hz", report.max_rep_rate_hz},
                       {"deadtime_violation", report.deadtime_violation}});
}

// --- Matrices ---

void write_matrix_json(const std::filesystem::path& path, const ConditionalMatrix& c) {
  std::vector<std::vector<double>> rows(c.entries.rows);
  for (std::size_t r = 0; r < c.entries.rows; ++r)
    rows[r].assign(c.entries.row(r), c.entries.row(r) + c.entries.cols);
  save_json(path, json{{"schema", 1},
                       {"kind", "conditional"},
                       {"mode_count", c.mode_count},
                       {"truncation", c.truncation},
                       {"entries", rows}});
}

ConditionalMatrix read_conditional_matrix_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  require_schema(j, path);
  ConditionalMatrix c;
  try {
    if (j.at("kind").get<std::string>() != "conditional")
      throw validation_error(path.string() + ": not a conditional matrix document");
    const auto rows = j.at("entries").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw validation_error(path.string() + ": empty matrix");
    c.entries = Matrix(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != c.entries.cols)
        throw validation_error(path.string() + ": ragged matrix rows");
      for (std::size_t col = 0; col < rows[r].size(); ++col) c.entries.at(r, col) = rows[r][col];
    }
    c.mode_count = j.at("mode_count").get<std::size_t>();
    c.truncation = j.at("truncation").get<std::size_t>();
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
  return c;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t c = 0; c < m.cols; ++c) out << (c ? "," : "") << c;
  out << '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c)
      out << (c ? "," : "") << format_double(m.at(r, c));
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  write_matrix_csv(out, m);
}

Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("matrix CSV is empty");
  const std::size_t cols = split_csv_line(line).size();
  std::vector<double> data;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols)
      throw validation_error("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " fields, got " +
                             std::to_string(fields.size()));
    for (const auto& f : fields) data.push_back(parse_double(f, line_no));
    ++rows;
  }
  if (rows == 0) throw validation_error("matrix CSV has no data rows");
  Matrix m(rows, cols);
  m.a = std::move(data);
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  try {
    return read_matrix_csv(in);
  } catch (const validation_error& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

void write_distribution_csv(const std::filesystem::path& path, const Distribution& dist) {
  Matrix m(1, dist.values.size());
  m.a = dist.values;
  write_matrix_csv(path, m);
}

// --- Histograms ---

void write_histogram_csv(std::ostream& out, const CountHistogram& hist) {
  out << "k,count\n";
  for (std::size_t k = 0; k < hist.tallies.size(); ++k) out << k << ',' << hist.tallies[k] << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const CountHistogram& hist) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  write_histogram_csv(out, hist);
}

CountHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"k", "count"})
    throw validation_error("histogram CSV must start with header 'k,count'");
  CountHistogram hist;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw validation_error("line " + std::to_string(line_no) + ": expected 'k,count'");
    const std::uint64_t k = parse_u64(fields[0], line_no);
    const std::uint64_t count = parse_u64(fields[1], line_no);
    if (hist.tallies.size() <= k) hist.tallies.resize(k + 1, 0);
    hist.tallies[k] += count;
  }
  if (hist.tallies.empty()) throw validation_error("histogram CSV has no data rows");
  hist.pulses = hist.total();
  return hist;
}

CountHistogram read_histogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  try {
    return read_histogram_csv(in);
  } catch (const validation_error& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

void write_bayes_csv(const std::filesystem::path& path, const BayesTable& table) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  bool first = true;
  for (std::size_t k = 0; k < table.defined.size(); ++k)
    if (table.defined[k]) {
      out << (first ? "" : ",") << k;
      first = false;
    }
  out << '\n';
  for (std::size_t n = 0; n < table.entries.rows; ++n) {
    first = true;
    for (std::size_t k = 0; k < table.defined.size(); ++k) {
      if (!table.defined[k]) continue;
      out << (first ? "" : ",") << format_double(table.entries.at(n, k));
      first = false;
    }
    out << '\n';
  }
}

// --- TOA events ---

std::vector<ToaEvent> read_toa_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"detector", "arrival_ns"})
    throw validation_error(path.string() + ": TOA CSV must start with header 'detector,arrival_ns'");
  std::vector<ToaEvent> events;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw validation_error(path.string() + ": line " + std::to_string(line_no) +
                             ": expected 'detector,arrival_ns'");
    ToaEvent ev;
    ev.detector = static_cast<int>(parse_u64(fields[0], line_no));
    ev.arrival_ns = parse_double(fields[1], line_no);
    events.push_back(ev);
  }
  return events;
}

void write_records_jsonl(const std::filesystem::path& path,
                         const std::vector<ShotRecord>& records) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  for (const ShotRecord& rec : records) {
    json j{{"pulse", rec.pulse},
           {"photons_in", rec.photons_in},
           {"photons_surviving", rec.photons_surviving},
           {"occupied_modes", rec.occupied_modes},
           {"counts", rec.counts}};
    out << j.dump() << '\n';
  }
}

void write_fock_sweep_csv(const std::filesystem::path& path,
                          const std::vector<FockSweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  out << "modes,j,eta,analytic,matrix\n";
  for (const FockSweepRow& row : rows)
    out << row.modes << ',' << row.j << ',' << format_double(row.eta) << ','
        << format_double(row.analytic) << ',' << format_double(row.from_matrix) << '\n';
}

// --- Manifest ---

void write_manifest(const std::filesystem::path& output_path, const RunManifest& manifest) {
  json inputs = json::array();
  for (const auto& [p, digest] : manifest.inputs)
    inputs.push_back(json{{"path", p}, {"digest", digest}});
  json j{{"schema", 1},
         {"tool", "tmd"},
         {"version", manifest.tool_version},
         {"command_line", manifest.command_line},
         {"timestamp", manifest.timestamp.empty() ? iso_timestamp() : manifest.timestamp},
         {"kernel", manifest.kernel},
         {"generator", manifest.generator},
         {"inputs", inputs},
         {"outputs", manifest.outputs},
         {"params_digest", manifest.params_digest}};
  j["seed"] = manifest.seed ? json(*manifest.seed) : json(nullptr);
  for (const auto& [key, value] : manifest.metadata) j[key] = value;
  save_json(output_path.string() + ".manifest.json", j);
}

}  // namespace tmd::io
