#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("specphase_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + SPECPHASE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

nlohmann::json json_of(const Run& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_CASE("gen writes a planted regular graph") {
  const fs::path g = scratch() / "regular.el";
  const Run r = cli("gen --regular -N 10000 -c 3 --p1 0.5 --gamma-struct 0.9 --seed 7 -o \"" + g.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("N=10000") != std::string::npos);
  CHECK(r.out.find("K=30000") != std::string::npos);
  CHECK(r.out.find("cross_edges=750") != std::string::npos);
  CHECK(slurp(g).rfind("# specphase-graph N=10000 K=30000", 0) == 0);

  // Same seed, same file.
  const fs::path again = scratch() / "regular2.el";
  REQUIRE(cli("gen --regular -N 10000 -c 3 --p1 0.5 --gamma-struct 0.9 --seed 7 -o \"" + again.string() + "\"").code ==
          0);
  CHECK(slurp(g) == slurp(again));
}

TEST_CASE("gen writes an SBM with the requested mean degree") {
  const fs::path g = scratch() / "sbm.el";
  const Run r = cli("gen --sbm -N 20000 --cin 9 --cout 3 --seed 1 -o \"" + g.string() + "\"");
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("K=");
  REQUIRE(pos != std::string::npos);
  const double k = std::stod(r.out.substr(pos + 2));
  CHECK(std::abs(k / 20000.0 - 6.0) < 0.1);
}

TEST_CASE("gen reports infeasible parameters with exit code 2") {
  const Run r = cli("gen --regular -N 6 -c 3 --gamma-struct 1");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(cli("gen --regular -N 100 -c 3 --gamma-struct 1.5").code == 2);
  CHECK(cli("gen -N 100").code == 2);
}

TEST_CASE("spectral on two disjoint K4") {
  std::string text = "# specphase-graph N=8 K=24\n";
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) text += std::to_string(base + i) + " " + std::to_string(base + j) + "\n";
    }
  }
  text += "# labels\n1\n1\n1\n1\n2\n2\n2\n2\n";
  const fs::path g = write_file("k4s.el", text);
  const fs::path vec = scratch() / "k4s.vec";
  const Run r = cli("spectral \"" + g.string() + "\" --theta 1 --eigenvector \"" + vec.string() + "\"");
  REQUIRE(r.code == 0);
  const auto j = json_of(r);
  CHECK(std::abs(j["lambda1"].get<double>() - 3.0) <= 1e-8);
  CHECK(j["overlap"].get<double>() == 1.0);
  CHECK(j["unpartitioned"].get<bool>() == false);
  CHECK(j["eigenvector_path"].get<std::string>() == vec.string());
  CHECK(slurp(vec).rfind("# lambda=", 0) == 0);
}

TEST_CASE("spectral on a triangle is unpartitioned") {
  const fs::path g = write_file("k3.el", "# specphase-graph N=3 K=6\n0 1\n0 2\n1 2\n");
  const Run r = cli("spectral \"" + g.string() + "\" --theta 1");
  REQUIRE(r.code == 0);
  const auto j = json_of(r);
  CHECK(std::abs(j["lambda1"].get<double>()) <= 1e-8);
  CHECK(j["unpartitioned"].get<bool>() == true);
  CHECK(j["overlap"].is_null());
}

TEST_CASE("spectral error exit codes") {
  CHECK(cli("spectral \"" + (scratch() / "missing.el").string() + "\"").code == 2);
  const fs::path bad = write_file("bad.el", "not a graph\n");
  CHECK(cli("spectral \"" + bad.string() + "\"").code == 2);
  const fs::path g = scratch() / "conv.el";
  REQUIRE(cli("gen --regular -N 2000 -c 3 --gamma-struct 0.5 --seed 3 -o \"" + g.string() + "\"").code == 0);
  const Run r = cli("spectral \"" + g.string() + "\" --tol 1e-300");
  CHECK(r.code == 1);
  CHECK(r.err.find("residual") != std::string::npos);
}

TEST_CASE("ema subcommand") {
  auto j = json_of(cli("ema --regular 3 --gamma-struct 0.5 --theta 1"));
  CHECK(j["phase"] == "U");
  CHECK(j["lambda1"].get<double>() == doctest::Approx(2.8284271).epsilon(1e-7));

  j = json_of(cli("ema --regular 3 --theta 1 --thresholds"));
  CHECK(j["gamma_star"].get<double>() == doctest::Approx(0.7071068).epsilon(1e-7));
  CHECK(j["theta_max"].get<double>() == doctest::Approx(0.0571910).epsilon(1e-6));

  j = json_of(cli("ema --poisson 6 --gamma-struct 0.9 --theta 1"));
  CHECK(j["phase"] == "D");
  CHECK(std::isfinite(j["phi"].get<double>()));
  CHECK(j["tail_cutoff"].get<int>() == 30);

  j = json_of(cli("ema --poisson 6 --size 20000 --cin-minus-cout 2 --theta 0.25"));
  CHECK(j["phase"] == "N");
  CHECK(j["gamma_struct"].get<double>() == doctest::Approx(1.0 / 6.0));

  const Run csv = cli("--format csv ema --regular 3 --gamma-struct 0.9");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.find("phase,D") != std::string::npos);

  CHECK(cli("ema --regular 3 --gamma-struct 1.5").code == 2);
  CHECK(cli("ema --gamma-struct 0.5").code == 2);
}

TEST_CASE("sweep subcommand") {
  const fs::path spec = write_file("sweep.txt",
                                   "ensemble = regular\nn = 400\ndegree = 3\naxis = gamma\naxis_min = 0.5\n"
                                   "axis_max = 1\naxis_steps = 2\ntheta = 1\nsamples = 2\nbase_seed = 4\n");
  const fs::path a = scratch() / "a.csv";
  const fs::path b = scratch() / "b.csv";
  REQUIRE(cli("sweep \"" + spec.string() + "\" --threads 1 -o \"" + a.string() + "\"").code == 0);
  REQUIRE(cli("--threads 4 sweep \"" + spec.string() + "\" -o \"" + b.string() + "\"").code == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text.rfind("ensemble,n,degree,", 0) == 0);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 1 + 2 * 3);

  const fs::path c = scratch() / "c.csv";
  REQUIRE(cli("sweep \"" + spec.string() + "\" --seed 5 -o \"" + c.string() + "\"").code == 0);
  CHECK(slurp(c) != text);

  const Run j = cli("--format json sweep \"" + spec.string() + "\"");
  REQUIRE(j.code == 0);
  CHECK(json_of(j).is_array());

  const fs::path bad = write_file("bad_sweep.txt", "n = 10\nbogus = 1\ntheta = 1\n");
  CHECK(cli("sweep \"" + bad.string() + "\"").code == 2);
}

TEST_CASE("phase-diagram subcommand") {
  const Run r = cli("phase-diagram --regular 3 --axis cin_minus_cout --axis-min 2 --axis-max 5 --axis-steps 2 "
                    "--theta-min 0.02 --theta-max 1 --theta-steps 2");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "gamma_struct,theta,phase,phi,lambda1,a_hat,m_hat_sq");
  std::vector<std::string> phases;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    phases.push_back(cell);
  }
  // θ = 0.02 then θ = 1; structure 2 then 5 (Γ = 1/3, 5/6). Both Γ values
  // lie below Γ_un(0.02) ≈ 0.936.
  CHECK(phases == std::vector<std::string>{"N", "N", "U", "D"});
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli("--no-such-flag").code == 2);
  CHECK(cli("gen --regular -N 10 --bogus").code == 2);
  CHECK(cli("--format xml ema --regular 3 --gamma-struct 0.5").code == 2);
  CHECK(cli("--help").code == 0);
}
