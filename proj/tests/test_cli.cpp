#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("INTLACE_BIN");
  REQUIRE(b != nullptr);
  return b;
}

int run(const std::string& args, std::string* output = nullptr) {
  std::string cmd = bin() + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  size_t k;
  while ((k = fread(buf, 1, sizeof(buf), p)) > 0) out.append(buf, k);
  int status = pclose(p);
  if (output) *output = out;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("list-experiments prints the full registry") {
  std::string out;
  CHECK(run("--list-experiments", &out) == 0);
  for (const char* name :
       {"green-sanity", "lattice-laplace", "mean-occupation", "constant-intensity-limit",
        "high-intensity-limit", "isomorphism-discrete", "vacant-set-capacity",
        "brownian-intensity", "brownian-laplace", "scaling-invariance",
        "variance-asymptotics", "wick-identities", "det2-mgf", "isomorphism-continuum-d3"})
    CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("usage and config errors exit with code 2") {
  CHECK(run("") == 2);
  fs::path dir = fresh_dir("intlace_cli_cfg");
  write_file(dir / "bad.cfg", "experiment = no-such-thing\n");
  CHECK(run("--config " + (dir / "bad.cfg").string()) == 2);
  write_file(dir / "syntax.cfg", "not a key value line\n");
  CHECK(run("--config " + (dir / "syntax.cfg").string()) == 2);
  write_file(dir / "unknown_key.cfg", "experiment = vacant-set-capacity\nbogus = 3\n");
  CHECK(run("--config " + (dir / "unknown_key.cfg").string()) == 2);
  CHECK(run("--config /nonexistent/path.cfg") == 2);
}

TEST_CASE("oracle domain violations exit with code 3") {
  fs::path dir = fresh_dir("intlace_cli_domain");
  // z beyond the admissible 0.5/norm bound trips the oracle domain check
  write_file(dir / "run.cfg",
             "experiment = lattice-laplace\nn = 512\nz_fractions = 3.0\n");
  std::string out;
  CHECK(run("--config " + (dir / "run.cfg").string() + " --out " + (dir / "o").string() +
                " --cache-dir " + (dir / "cache").string(),
            &out) == 3);
}

TEST_CASE("a small run emits reports, plot data, and is deterministic in workers") {
  fs::path dir = fresh_dir("intlace_cli_run");
  write_file(dir / "run.cfg", "experiment = lattice-laplace\nn = 2000\nseed = 99\n");
  std::string common = "--config " + (dir / "run.cfg").string() + " --cache-dir " +
                       (dir / "cache").string();
  std::string out;
  int rc1 = run(common + " --out " + (dir / "o1").string() + " --workers 1", &out);
  CHECK(rc1 == 0);
  int rc2 = run(common + " --out " + (dir / "o2").string() + " --workers 2", &out);
  CHECK(rc2 == 0);

  CHECK(fs::exists(dir / "o1" / "report.json"));
  CHECK(fs::exists(dir / "o1" / "report.csv"));
  CHECK(fs::exists(dir / "o1" / "plotdata" / "mgf_curve.csv"));
  // byte-identical irrespective of worker count
  CHECK(slurp(dir / "o1" / "report.json") == slurp(dir / "o2" / "report.json"));
  CHECK(slurp(dir / "o1" / "report.csv") == slurp(dir / "o2" / "report.csv"));

  // mgf curve has the z = 0 row with value exactly 1
  std::string curve = slurp(dir / "o1" / "plotdata" / "mgf_curve.csv");
  CHECK(curve.find("\n0,1,0,1\n") != std::string::npos);

  // seed override changes the report, config stays embedded
  int rc3 = run(common + " --out " + (dir / "o3").string() + " --workers 2 --seed 100", &out);
  CHECK(rc3 == 0);
  CHECK(slurp(dir / "o3" / "report.json") != slurp(dir / "o1" / "report.json"));
  CHECK(slurp(dir / "o1" / "report.json").find("\"n\": \"2000\"") != std::string::npos);
}

TEST_CASE("ladder plot rows increase in N") {
  fs::path dir = fresh_dir("intlace_cli_ladder");
  write_file(dir / "run.cfg",
             "experiment = high-intensity-limit\nmode = variance\nn = 1500\n"
             "N_list = 2 4\nseed = 7\n");
  std::string out;
  int rc = run("--config " + (dir / "run.cfg").string() + " --out " +
                   (dir / "o").string() + " --cache-dir " + (dir / "cache").string() +
                   " --workers 2",
               &out);
  CHECK(rc == 0);
  std::string ladder = slurp(dir / "o" / "plotdata" / "variance_ladder.csv");
  auto p2 = ladder.find("\n2,");
  auto p4 = ladder.find("\n4,");
  CHECK(p2 != std::string::npos);
  CHECK(p4 != std::string::npos);
  CHECK(p2 < p4);
}
