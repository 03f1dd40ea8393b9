#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mploc/rundir.hpp"
#include "mploc/serialization.hpp"

namespace {

using mploc::Json;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Parses a JSON file; diagnostics name the line of a syntax error.
Json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw mploc::ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw mploc::ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

int cmd_validate(const std::string& path) {
  mploc::ScaleParams p;
  try {
    const Json j = load_json(path);
    if (!j.is_object()) throw mploc::ConfigError("config must be a JSON object");
    const Json& section = j.contains("scale") ? j["scale"] : j;
    p = mploc::scale_params_from_json(section, true);
  } catch (const mploc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  const auto rep = mploc::validate_params(p);
  for (const auto& row : rep.rows)
    std::printf("%-4s %-28s %-4s lhs=%-14s rhs=%s\n", row.pass ? "ok" : "FAIL", row.name.c_str(),
                row.relation.c_str(), mploc::format_double(row.lhs).c_str(), mploc::format_double(row.rhs).c_str());
  std::printf("%s\n", rep.ok ? "all constraints hold" : "constraint violated");
  return rep.ok ? kOk : kFail;
}

int cmd_run(const std::string& kind, const std::string& config_path, const std::uint64_t* seed, const long* samples,
            const std::string& out, int threads) {
  const auto& kinds = mploc::experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    std::cerr << "error: unknown experiment kind '" << kind << "'; valid kinds:";
    for (const auto& k : kinds) std::cerr << ' ' << k;
    std::cerr << '\n';
    return kUsage;
  }
  mploc::ExperimentConfig c;
  try {
    Json j = config_path.empty() ? Json::object() : load_json(config_path);
    if (!j.is_object()) throw mploc::ConfigError("config must be a JSON object");
    if (j.contains("kind") && j["kind"] != kind)
      throw mploc::ConfigError("config kind '" + j["kind"].dump() + "' does not match '" + kind + "'");
    j["kind"] = kind;
    if (seed) j["seed"] = *seed;
    if (samples) j["samples"] = *samples;
    c = mploc::config_from_json(j);
  } catch (const mploc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  const auto root = out.empty() ? mploc::default_output_root() : std::filesystem::path(out);
  try {
    const auto dir = mploc::execute_run(c, root, threads);
    std::cout << dir.string() << '\n';
  } catch (const mploc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kOk;
}

int cmd_report(const std::string& dir) {
  try {
    const auto s = mploc::regenerate_report(dir);
    std::vector<std::pair<std::string, std::string>> rows;
    mploc::flatten(s.values, "", rows);
    for (const auto& [k, v] : rows) std::cout << k << ": " << v << '\n';
    std::cout << "series: " << s.series.size() << " table(s) under " << (std::filesystem::path(dir) / "series").string()
              << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo localization experiments for multi-particle alloy models"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check the scale parameters of a config against the constraint table");
  validate->add_option("config", validate_path, "JSON config (top-level 'scale' section or a bare scale object)")
      ->required();

  std::string kind, config_path, out;
  std::uint64_t seed = 0;
  long samples = 0;
  int threads = 1;
  auto* run = app.add_subcommand("run", "Run an experiment into a new run directory");
  run->add_option("kind", kind, "Experiment kind")->required();
  run->add_option("config", config_path, "JSON config overlaying the kind's defaults");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  auto* samples_opt = run->add_option("--samples", samples, "Number of disorder samples");
  run->add_option("--out", out, std::string("Output root (default $") + mploc::kOutputEnv + " or ./runs)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Regenerate the summary and series of a finished run");
  report->add_option("rundir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*validate) return cmd_validate(validate_path);
  if (*run)
    return cmd_run(kind, config_path, seed_opt->count() ? &seed : nullptr, samples_opt->count() ? &samples : nullptr,
                   out, threads);
  return cmd_report(report_dir);
}
