#include "mploc/rundir.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "mploc/serialization.hpp"

namespace mploc {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& p, const Json& j) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << j.dump(2) << '\n';
  }
  fs::rename(tmp, p);
}

Json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ReportError("cannot read " + p.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(p.filename().string() + ": " + e.what());
  }
}

const char* kPlotStub = R"(#!/usr/bin/env python3
# Plots every series/*.tsv: first column against the others.
import csv
import glob
import os
import sys

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required")

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "series", "*.tsv"))):
    with open(path) as f:
        rows = list(csv.reader(f, delimiter="\t"))
    if len(rows) < 2:
        continue
    head, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
    fig, ax = plt.subplots()
    for j in range(1, len(head)):
        ax.plot([r[0] for r in data], [r[j] for r in data], ".-", label=head[j])
    ax.set_xlabel(head[0])
    ax.legend()
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)
)";

}  // namespace

Json manifest_to_json(const RunManifest& m) {
  return Json{{"kind", m.kind},
              {"digest", m.digest},
              {"seed", m.seed},
              {"samples", m.samples},
              {"threads", m.threads},
              {"version", m.version},
              {"started", m.started},
              {"finished", m.finished},
              {"elapsed_seconds", m.elapsed_seconds},
              {"complete", m.complete},
              {"reason", m.reason},
              {"records_written", m.records_written},
              {"paths", {{"config", "config.json"}, {"records", "records.jsonl"}, {"summary", "summary.csv"},
                         {"series", "series"}}},
              {"config", m.config}};
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.kind = j.at("kind").get<std::string>();
    m.digest = j.at("digest").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.samples = j.at("samples").get<long>();
    m.threads = j.value("threads", 1);
    m.version = j.at("version").get<std::string>();
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.elapsed_seconds = j.value("elapsed_seconds", 0.0);
    m.complete = j.at("complete").get<bool>();
    m.reason = j.value("reason", "");
    m.records_written = j.value("records_written", 0L);
    m.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("manifest: ") + e.what());
  }
  return m;
}

fs::path default_output_root() {
  const char* env = std::getenv(kOutputEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

fs::path new_run_dir(const fs::path& root, const ExperimentConfig& c) {
  const fs::path base = root / (c.kind + "-" + config_digest(config_to_json(c)));
  fs::create_directories(base);
  for (int i = 1; i < 100000; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "run-%03d", i);
    if (fs::create_directory(base / name)) return base / name;
  }
  throw std::runtime_error("no free run directory under " + base.string());
}

void write_report(const fs::path& dir, const Summary& s) {
  {
    std::ofstream os(dir / "summary.csv");
    write_summary_csv(os, s.values);
  }
  const fs::path series = dir / "series";
  fs::create_directories(series);
  for (const auto& [name, table] : s.series) {
    std::ofstream os(series / (name + ".tsv"));
    write_series_tsv(os, table);
  }
  std::ofstream os(dir / "plot.py");
  os << kPlotStub;
}

std::vector<Record> read_records(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw ReportError("cannot read " + file.string());
  std::vector<Record> out;
  std::string line;
  long n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(Record::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ReportError("records.jsonl line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

fs::path execute_run(const ExperimentConfig& c, const fs::path& root, int threads) {
  const fs::path dir = new_run_dir(root, c);
  RunManifest m;
  m.kind = c.kind;
  m.config = config_to_json(c);
  m.digest = config_digest(m.config);
  m.seed = c.seed;
  m.samples = c.samples;
  m.threads = threads;
  m.started = utc_now();
  write_json(dir / "config.json", m.config);
  write_json(dir / "manifest.json", manifest_to_json(m));

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Record> records;
  try {
    std::ofstream os(dir / "records.jsonl");
    run_samples(c, threads, [&](Record&& r) {
      os << r.dump() << '\n';
      os.flush();
      records.push_back(std::move(r));
    });
    if (!os) throw std::runtime_error("write to records.jsonl failed");
    write_report(dir, summarize(c, records));
    m.complete = true;
  } catch (const std::exception& e) {
    m.reason = e.what();
  }
  m.records_written = static_cast<long>(records.size());
  m.finished = utc_now();
  m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(dir / "manifest.json", manifest_to_json(m));
  if (!m.complete) throw std::runtime_error("run incomplete (" + dir.string() + "): " + m.reason);
  return dir;
}

Summary regenerate_report(const fs::path& run_dir, const fs::path& out) {
  const RunManifest m = manifest_from_json(read_json(run_dir / "manifest.json"));
  if (!m.complete) throw ReportError("run is incomplete: " + (m.reason.empty() ? "no completion mark" : m.reason));
  const Json stored = read_json(run_dir / "config.json");
  if (config_digest(stored) != m.digest) throw ReportError("config digest mismatch: config.json was modified");
  if (config_digest(m.config) != m.digest) throw ReportError("config digest mismatch: manifest config was modified");
  ExperimentConfig c;
  try {
    c = config_from_json(stored);
  } catch (const ConfigError& e) {
    throw ReportError(std::string("config.json: ") + e.what());
  }
  const auto records = read_records(run_dir / "records.jsonl");
  if (records.empty()) throw ReportError("no records in " + (run_dir / "records.jsonl").string());
  for (const auto& r : records)
    if (r.value("digest", "") != m.digest) throw ReportError("record digest does not match the manifest");
  Summary s = summarize(c, records);
  const fs::path target = out.empty() ? run_dir : out;
  fs::create_directories(target);
  write_report(target, s);
  return s;
}

}  // namespace mploc
