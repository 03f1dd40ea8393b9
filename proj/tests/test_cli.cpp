#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into the output.
Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" MPLOC_BIN "' " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

struct Workspace {
  fs::path root = fs::temp_directory_path() / ("mploc_cli_" + std::to_string(::getpid()));
  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(root / name) << text;
    return root / name;
  }
};

const char* kPassing = R"({"scale": {"zeta": 0.5, "tau": 2.5, "beta": 0.1, "alpha": 6, "K": 25, "P_star": 50,
  "m_star": 1.0, "L0": 16, "N_star": 2, "d": 1, "exponent_base": "four_alpha", "delta": 1.0}})";

}  // namespace

TEST_CASE("validate exit codes") {
  Workspace w;
  auto r = cli("validate " + w.write("ok.json", kPassing).string());
  CHECK(r.code == 0);
  CHECK(r.out.find("all constraints hold") != std::string::npos);

  std::string failing = kPassing;
  failing.replace(failing.find("\"tau\": 2.5"), 10, "\"tau\": 1.0");
  r = cli("validate " + w.write("fail.json", failing).string());
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL tau > max(1/zeta, 1)") != std::string::npos);

  r = cli("validate " + w.write("missing.json", R"({"scale": {"zeta": 0.5}})").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("missing key") != std::string::npos);

  r = cli("validate " + w.write("broken.json", "{\n\"scale\": {\n\"zeta\": ,\n}}").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("broken.json:3:") != std::string::npos);

  CHECK(cli("validate " + (w.root / "absent.json").string()).code == 2);
}

TEST_CASE("run is deterministic across repeats and thread counts") {
  Workspace w;
  const auto cfg = w.write("cfg.json", R"({"kind": "wegner", "L": 3})");
  const std::string out = " --out " + (w.root / "runs").string();
  const auto a = cli("run wegner " + cfg.string() + " --seed 7 --samples 100" + out);
  const auto b = cli("run wegner " + cfg.string() + " --seed 7 --samples 100" + out);
  const auto c = cli("run wegner " + cfg.string() + " --seed 7 --samples 100 --threads 8" + out);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(c.code == 0);
  const fs::path da = trim(a.out), db = trim(b.out), dc = trim(c.out);
  CHECK(da != db);
  CHECK(slurp(da / "records.jsonl") == slurp(db / "records.jsonl"));
  CHECK(slurp(da / "records.jsonl") == slurp(dc / "records.jsonl"));
  CHECK(slurp(da / "manifest.json").find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("run argument errors") {
  Workspace w;
  auto r = cli("run nosuch --out " + w.root.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("wegner") != std::string::npos);
  CHECK(r.out.find("scaling_step") != std::string::npos);

  const auto mismatch = w.write("ct.json", R"({"kind": "ct"})");
  CHECK(cli("run wegner " + mismatch.string() + " --out " + w.root.string()).code == 2);
  const auto unknown = w.write("typo.json", R"({"sampels": 3})");
  r = cli("run wegner " + unknown.string() + " --out " + w.root.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("sampels") != std::string::npos);
}

TEST_CASE("output root comes from the environment") {
  Workspace w;
  const auto r = cli("run srcm --samples 3", "MPLOC_OUT='" + (w.root / "env").string() + "'");
  REQUIRE(r.code == 0);
  CHECK(trim(r.out).rfind((w.root / "env").string(), 0) == 0);
}

TEST_CASE("report output and failure modes") {
  Workspace w;
  const std::string out = " --out " + w.root.string();
  auto r = cli("run wegner --samples 200 --seed 3" + out);
  REQUIRE(r.code == 0);
  const fs::path dir = trim(r.out);
  const auto rep = cli("report " + dir.string());
  CHECK(rep.code == 0);
  CHECK(rep.out.find("wegner_slope: ") != std::string::npos);
  const auto loglog = slurp(dir / "series" / "wegner_loglog.tsv");
  CHECK(loglog.rfind("log_s\tlog_p\tfit_log_p\n", 0) == 0);

  r = cli("run decay --samples 1" + out);
  REQUIRE(r.code == 0);
  const fs::path ddir = trim(r.out);
  const auto profile = slurp(ddir / "series" / "profile_s0_g16.0_e0.tsv");
  // Header plus one row per cell of the (2L+1)^2 ball, L = 12.
  CHECK(std::count(profile.begin(), profile.end(), '\n') == 1 + 25 * 25);

  std::ofstream(dir / "records.jsonl", std::ios::trunc).flush();
  CHECK(cli("report " + dir.string()).code == 1);

  auto manifest = slurp(ddir / "manifest.json");
  manifest.replace(manifest.find("\"complete\": true"), 16, "\"complete\": false");
  std::ofstream(ddir / "manifest.json") << manifest;
  r = cli("report " + ddir.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("incomplete") != std::string::npos);

  CHECK(cli("report " + (w.root / "nowhere").string()).code == 1);
}
