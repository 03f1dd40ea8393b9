#pragma once

// Run directories: manifest.json, config.json, records.jsonl, summary.csv,
// series/*.tsv and a plotting stub. Reports are regenerated from the stored
// config and records alone.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mploc/experiments.hpp"

namespace mploc {

inline constexpr const char* kCodeVersion = "mploc 0.1.0";
inline constexpr const char* kOutputEnv = "MPLOC_OUT";

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::string kind;
  std::string digest;
  std::uint64_t seed = 0;
  long samples = 0;
  int threads = 1;
  std::string version = kCodeVersion;
  std::string started;
  std::string finished;
  double elapsed_seconds = 0.0;
  bool complete = false;
  std::string reason;  // why the run is incomplete
  long records_written = 0;
  Json config;         // resolved configuration, every knob present
};

Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

/// $MPLOC_OUT if set, else "runs".
std::filesystem::path default_output_root();

/// root/<kind>-<digest>/run-NNN, the first unused NNN.
std::filesystem::path new_run_dir(const std::filesystem::path& root, const ExperimentConfig& c);

/// Executes the experiment into a fresh run directory and returns it. On a
/// failing sample the records before it are kept, the manifest is marked
/// incomplete with the reason, and the error is rethrown.
std::filesystem::path execute_run(const ExperimentConfig& c, const std::filesystem::path& root, int threads);

/// summary.csv, series/<name>.tsv and plot.py under `dir`.
void write_report(const std::filesystem::path& dir, const Summary& s);

/// Reads a run directory, checks the manifest (complete, digest of the
/// stored config), summarizes records.jsonl and writes the report under
/// `out` (the run directory when empty). Throws ReportError.
Summary regenerate_report(const std::filesystem::path& run_dir, const std::filesystem::path& out = {});

std::vector<Record> read_records(const std::filesystem::path& file);

}  // namespace mploc
