#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "spectral_corner/error.hpp"
#include "spectral_corner/io.hpp"

using namespace spectral;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Workdir {
  fs::path root;
  Workdir() {
    root = fs::temp_directory_path() / ("spectral-corner-cli-" + std::to_string(::getpid()));
    fs::create_directories(root);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout and stderr redirected to files; returns the exit code.
int run(const Workdir& w, const std::string& args, const std::string& tag = "run") {
  const std::string cmd = std::string(SPECTRAL_CORNER_BIN) + " " + args + " > " + (w.root / (tag + ".out")).string() +
                          " 2> " + (w.root / (tag + ".err")).string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSquare = R"({"kind": "rectangle", "params": {"a": 1, "b": 1}})";

}  // namespace

TEST_CASE("FNV-1a test vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  CHECK(input_hash(Json::parse(R"({"b": 1, "a": 2})")) == input_hash(Json::parse(R"({"a":2,"b":1})")));
}

TEST_CASE("domain documents") {
  const DomainSpec slit = parse_domain_spec(Json::parse(
      R"({"kind": "slit-polygon", "params": {"vertices": [[0,0],[1,0],[1,1],[0,1]]},
          "slits": [[[0.5,0],[0.5,0.5]]], "sigma": "0.2*x*y"})"));
  CHECK(slit.domain.area() == Approx(1));
  CHECK(slit.domain.slits().size() == 1);
  REQUIRE(slit.sigma);
  CHECK((*slit.sigma)(Point(0.5, 0.5)) == Approx(0.05));

  const DomainSpec cone = parse_domain_spec(Json::parse(R"({"kind": "sector", "params": {"alpha": 3}})"));
  CHECK(cone.domain.area() == Approx(1.5 * 3.141592653589793));

  for (const char* bad : {R"({"kind": "ellipse"})", R"({"kind": "rectangle", "params": {"a": 1}})",
                          R"({"kind": "disk", "params": {"R": -1}})",
                          R"({"kind": "disk", "slits": [[[0,0],[0.5,0]]]})",
                          R"({"kind": "rectangle", "params": {"a": 1, "b": 1}, "sigma": "x +"})"}) {
    CHECK_THROWS_AS(parse_domain_spec(Json::parse(bad)), InvalidInput);
  }
}

TEST_CASE("fit and zdet on the unit square") {
  const Workdir w;
  const fs::path sq = w.write("square.json", kSquare);
  const fs::path fit = w.root / "fit.json";
  REQUIRE(run(w, "fit --domain " + sq.string() + " --out " + fit.string()) == 0);
  const Json f = Json::parse(slurp(fit));
  CHECK(f["tool"] == "spectral-corner");
  CHECK(f["version"] == tool_version());
  CHECK(f["input_hash"].get<std::string>().size() == 16);
  // fit-all: every coefficient free, so a0 carries the remainder-basis bias
  CHECK(std::abs(f["result"]["fit"]["a0"]["value"].get<double>() - 0.25) < 5e-3);
  CHECK(std::abs(f["result"]["fit"]["a_m1"]["value"].get<double>() - 1 / (4 * 3.141592653589793)) < 1e-6);

  REQUIRE(run(w, "zdet --domain " + sq.string(), "zdet") == 0);
  const Json z = Json::parse(slurp(w.root / "zdet.out"));
  CHECK(z["result"]["zeta_prime0"]["value"].get<double>() == Approx(0.610245660528891).epsilon(1e-9));
  CHECK(z["result"].contains("budget"));
  CHECK(z["result"]["zdet"]["error"].get<double>() < 1e-8);
}

TEST_CASE("reruns are byte-identical") {
  const Workdir w;
  const fs::path slit = w.write(
      "slit.json", R"({"kind": "slit-polygon", "params": {"vertices": [[0,0],[1,0],[1,1],[0,1]]},
                       "slits": [[[0.5,0],[0.5,0.5]]]})");
  const std::string args = "mc --domain " + slit.string() + " --t 0.05 --samples 20000 --steps 16 --seed 9";
  REQUIRE(run(w, args, "a") == 0);
  REQUIRE(run(w, args, "b") == 0);
  CHECK(slurp(w.root / "a.out") == slurp(w.root / "b.out"));
  CHECK(slurp(w.root / "a.out").rfind("# spectral-corner", 0) == 0);

  const fs::path sq = w.write("square.json", kSquare);
  REQUIRE(run(w, "fit --domain " + sq.string(), "c") == 0);
  REQUIRE(run(w, "fit --domain " + sq.string(), "d") == 0);
  CHECK(slurp(w.root / "c.out") == slurp(w.root / "d.out"));
}

TEST_CASE("wedge table") {
  const Workdir w;
  REQUIRE(run(w, "wedge --alpha 3 --eps 1 --t 0.1", "wedge") == 0);
  const std::string csv = slurp(w.root / "wedge.out");
  CHECK(csv.find("alpha,eps,t,trace,A,bound,pass") != std::string::npos);
  CHECK(csv.find(",true") != std::string::npos);
}

TEST_CASE("exit codes and error records") {
  const Workdir w;
  CHECK(run(w, "fit --domain " + (w.root / "missing.json").string()) == 2);
  const fs::path bad = w.write("bad.json", R"({"kind": "disk", "params": {"R": 0}})");
  CHECK(run(w, "fit --domain " + bad.string(), "bad") == 2);
  const Json e = Json::parse(slurp(w.root / "bad.err"));
  CHECK(e["error"]["kind"] == "invalid_input");
  CHECK(e["error"]["stage"].get<std::string>().size() > 0);

  // A tolerance the truncated disk spectrum cannot meet.
  const fs::path disk = w.write("disk.json", R"({"kind": "disk", "params": {"R": 1}})");
  CHECK(run(w, "zdet --domain " + disk.string() + " --tol 1e-13", "strict") == 3);
  const Json n = Json::parse(slurp(w.root / "strict.err"));
  CHECK(n["error"]["kind"] == "numerical");
  CHECK(n["error"].contains("best_estimate"));
  CHECK(n["error"].contains("achieved"));
}
