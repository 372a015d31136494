#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmd/detector_config.hpp"
#include "tmd/distribution.hpp"
#include "tmd/gating.hpp"
#include "tmd/histogram.hpp"
#include "tmd/matrix.hpp"
#include "tmd/mode_weights.hpp"
#include "tmd/reconstruct.hpp"
#include "tmd/simulate.hpp"
#include "tmd/timing.hpp"

// File formats. CSV numbers are printed with %.17g so they round-trip
// bit-exactly; JSON goes through nlohmann::json whose shortest-round-trip
// float printing is bit-exact by construction.

namespace tmd::io {

std::string fnv1a64_hex(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& s);
std::string digest_file(const std::filesystem::path& path);

std::string format_double(double v);  // %.17g

// --- JSON documents (schema: 1) ---
DetectorConfig read_detector_config(const std::filesystem::path& path);
void write_detector_config(const std::filesystem::path& path, const DetectorConfig& config);

ModeWeights read_weights_json(const std::filesystem::path& path);
void write_weights_json(const std::filesystem::path& path, const ModeWeights& weights,
                        const RejectionReport* rejection = nullptr);

GateSpec read_gates_json(const std::filesystem::path& path);

Distribution read_distribution_json(const std::filesystem::path& path);
void write_distribution_json(const std::filesystem::path& path, const Distribution& dist);

void write_result_json(const std::filesystem::path& path, const ReconstructionResult& result);
ReconstructionResult read_result_json(const std::filesystem::path& path);

// CSV flavor: `n,rho[,stddev]` rows, diagnostics as a trailing comment line.
void write_result_csv(const std::filesystem::path& path, const ReconstructionResult& result);

void write_timing_json(const std::filesystem::path& path, const TimingReport& report);

// Matrix JSON carries the metadata of whichever wrapper wrote it.
void write_matrix_json(const std::filesystem::path& path, const ConditionalMatrix& c);
ConditionalMatrix read_conditional_matrix_json(const std::filesystem::path& path);

// --- CSV ---
// Matrices and distributions: row-major, header row of column indices.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_distribution_csv(const std::filesystem::path& path, const Distribution& dist);

// Histograms: `k,count` rows.
void write_histogram_csv(std::ostream& out, const CountHistogram& hist);
void write_histogram_csv(const std::filesystem::path& path, const CountHistogram& hist);
CountHistogram read_histogram_csv(std::istream& in);
CountHistogram read_histogram_csv(const std::filesystem::path& path);

// Bayes tables: undefined count columns are omitted entirely; the header
// names the k value of each emitted column.
void write_bayes_csv(const std::filesystem::path& path, const BayesTable& table);

// TOA events: `detector,arrival_ns` rows.
std::vector<ToaEvent> read_toa_csv(const std::filesystem::path& path);

void write_records_jsonl(const std::filesystem::path& path,
                         const std::vector<ShotRecord>& records);

void write_fock_sweep_csv(const std::filesystem::path& path,
                          const std::vector<FockSweepRow>& rows);

// --- Run manifest ---
// Written as <output>.manifest.json next to every file a CLI command
// produces. input digests + params digest pin the run; identical digests
// imply byte-identical outputs.
struct RunManifest {
  std::string command_line;
  std::string tool_version;
  std::string timestamp;
  std::string kernel;
  std::string generator;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::string> outputs;
  std::string params_digest;
  std::vector<std::pair<std::string, std::string>> metadata;
};

void write_manifest(const std::filesystem::path& output_path, const RunManifest& manifest);

}  // namespace tmd::io
