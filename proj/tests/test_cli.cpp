#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fracvar/mesh.hpp"
#include "fracvar/solvers.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string output;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("fracvar_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Outcome run(const std::string& args, const std::string& env = "") {
  const char* env_cli = std::getenv("FRACVAR_CLI_PATH");
  const std::string cli = env_cli ? env_cli : FRACVAR_CLI_PATH;
  const std::string cmd = "cd '" + scratch().string() + "' && " + env + " '" + cli + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, double> key_values(const fs::path& p) {
  std::ifstream in(p);
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (line.empty() || line[0] == '#' || comma == std::string::npos || line.rfind("key,", 0) == 0) continue;
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("validate reports constraint violations") {
  Outcome ok = run("validate");
  CHECK(ok.code == 0);
  CHECK(ok.output.find("ok: no diagnostics") != std::string::npos);

  Outcome q = run("validate --q 2");
  CHECK(q.code == 2);
  CHECK(q.output.find("q ∈ (p, p_s^*)") != std::string::npos);

  Outcome lambda = run("validate --lambda 0");
  CHECK(lambda.code == 2);
  CHECK(lambda.output.find("lambda > 0") != std::string::npos);

  Outcome edge = run("validate --Lambda 1.189207115002721");  // (4/2)^{1/4}
  CHECK(edge.code == 0);
  CHECK(edge.output.find("warning: Lambda") != std::string::npos);

  CHECK(run("validate --Lambda 0.5").code == 2);
  CHECK(run("validate --lambda 1e9").code == 2);
  CHECK(run("validate --set '[0:0.5]'").code == 2);
}

TEST_CASE("configuration errors and I/O errors") {
  CHECK(run("validate --n_elem abc").code == 2);
  CHECK(run("validate --phi cubic").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("validate --config missing.cfg").code == 4);
  write_file(scratch() / "bad.cfg", "q = 3\nbogus = 1\n");
  Outcome bad = run("validate --config bad.cfg");
  CHECK(bad.code == 2);
  CHECK(bad.output.find("bogus") != std::string::npos);
  CHECK(run("geometry --n_elem 16 --samples 20 --output /proc/forbidden").code == 4);
}

TEST_CASE("config file and overrides") {
  write_file(scratch() / "run.cfg", "# comment\nn_elem = 12\nq = 3\nsamples = 20\noutput = from_file\n");
  Outcome r = run("geometry --config run.cfg --q 3.5 --lambda_scale 0.5");
  CHECK(r.code == 0);
  const std::string echo = slurp(scratch() / "from_file" / "config_echo");
  CHECK(echo.rfind("# schema=1\n", 0) == 0);
  CHECK(echo.find("n_elem = 12\n") != std::string::npos);
  CHECK(echo.find("q = 3.5\n") != std::string::npos);
  CHECK(echo.find("kernel = standard\n") != std::string::npos);  // defaults echoed
  CHECK(echo.find("seed = 1\n") != std::string::npos);
}

TEST_CASE("geometry output matches the closed forms") {
  Outcome r = run("geometry --n_elem 16 --samples 50 --lambda_scale 0.5 --output geo");
  REQUIRE(r.code == 0);
  auto kv = key_values(scratch() / "geo" / "geometry.csv");
  REQUIRE(kv.count("lambda1"));
  const double l1 = fracvar::lambda1_threshold(2, 4, 1, kv["C4"], kv["C5"], kv["f_norm"]);
  CHECK(kv["lambda1"] == doctest::Approx(l1).epsilon(1e-15));
  CHECK(kv["lambda"] == doctest::Approx(0.5 * l1).epsilon(1e-15));
  CHECK(kv["r0"] == doctest::Approx(fracvar::r0_maximizer(2, 4, 1, kv["lambda"], kv["C5"])).epsilon(1e-15));
  CHECK(kv["sphere_min"] > std::max(0.0, kv["energy_u1"]));
  const std::string profile = slurp(scratch() / "geo" / "F_profile.csv");
  CHECK(profile.rfind("# schema=1\nr,F\n", 0) == 0);
  CHECK(std::count(profile.begin(), profile.end(), '\n') == 2 + 101);
}

TEST_CASE("solve-p2 artifacts, exit codes and determinism") {
  const std::string args = "solve-p2 --n_elem 16 --samples 50 --lambda_scale 0.5";
  REQUIRE(run(args + " --output p2a").code == 0);
  REQUIRE(run(args + " --output p2b", "FRACVAR_THREADS=3").code == 0);
  for (const char* f : {"solution.csv", "trace.csv", "summary.csv", "geometry.csv", "F_profile.csv"}) {
    const std::string a = slurp(scratch() / "p2a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(scratch() / "p2b" / f));
  }
  const std::string summary = slurp(scratch() / "p2a" / "summary.csv");
  CHECK(summary.rfind("converged,", 0) == 0);
  const std::string trace = slurp(scratch() / "p2a" / "trace.csv");
  CHECK(trace.rfind("# schema=1\niter,energy,residual,norm_W,norm_q\n", 0) == 0);
  std::ifstream sol(scratch() / "p2a" / "solution.csv");
  const fracvar::GridFunction u = fracvar::read_csv(sol);
  CHECK(u.mesh().n_elem() == 16);

  Outcome capped = run(args + " --max_iter 1 --output p2c");
  CHECK(capped.code == 3);
  CHECK(slurp(scratch() / "p2c" / "summary.csv").rfind("not_converged,1,", 0) == 0);
  CHECK(fs::exists(scratch() / "p2c" / "solution.csv"));

  CHECK(run("solve-p2 --n_elem 16 --samples 50 --lambda 1e9 --output p2d").code == 2);
}

TEST_CASE("other subcommands") {
  Outcome cap = run("capacity --n_elem 32 --q 2 --set '[0.4:0.6]+{0.8}' --output cap");
  CHECK(cap.code == 0);
  const std::string csv = slurp(scratch() / "cap" / "capacity.csv");
  CHECK(csv.find("set_description,q,s,n_elem,capacity_upper_bound\n[0.4:0.6]+{0.8},2,0.5,32,") != std::string::npos);
  CHECK(fs::exists(scratch() / "cap" / "capacity_phi.csv"));

  Outcome ker = run("check-kernel --phi perturbed --kernel perturbed --p 2.5 --output ker");
  CHECK(ker.code == 0);
  const std::string kc = slurp(scratch() / "ker" / "kernel_check.csv");
  CHECK(kc.find("phi,perturbed,") != std::string::npos);
  CHECK(kc.find("kernel,perturbed,") != std::string::npos);

  Outcome sm = run("sphere-min --n_elem 16 --q 3 --output sm");
  CHECK(sm.code == 0);
  CHECK(slurp(scratch() / "sm" / "summary.csv").rfind("converged,", 0) == 0);

  Outcome h = run("homotopy --n_elem 16 --q 3 --lambda_scale 0.5 --samples 50 --n_steps 12 --output hom");
  CHECK(h.code == 0);
  const std::string hc = slurp(scratch() / "hom" / "homotopy.csv");
  CHECK(hc.rfind("# schema=1\nstage,source_scale,cauchy,lambda_effective,iterations,residual,bound_chain_gap\n", 0) == 0);
  CHECK(std::count(hc.begin(), hc.end(), '\n') == 2 + 13);
}
