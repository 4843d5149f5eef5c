// Output files are compared field by field against the files in this
// directory: comment and header lines exactly (with @VERSION@ substituted),
// numbers to a relative tolerance, '*' matching any number.

#include "hwiener/harness/cli.hpp"
#include "hwiener/harness/output.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace hwiener::harness;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(HWIENER_GOLDEN_DIR) + "/" + name);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << name);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  const std::string tag = "@VERSION@";
  for (auto pos = s.find(tag); pos != std::string::npos; pos = s.find(tag)) s.replace(pos, tag.size(), version_string());
  return s;
}

std::string run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  REQUIRE(run_cli(args, out, err) == 0);
  return out.str();
}

void compare_csv(const std::string& actual, const std::string& expected, double rel) {
  const auto a = split(actual, '\n');
  const auto e = split(expected, '\n');
  REQUIRE(a.size() == e.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (e[i].empty() || e[i][0] == '#' || !(std::isdigit(e[i][0]) || e[i][0] == '-')) {
      CHECK(a[i] == e[i]);
      continue;
    }
    const auto fa = split(a[i], ',');
    const auto fe = split(e[i], ',');
    REQUIRE(fa.size() == fe.size());
    for (std::size_t j = 0; j < fe.size(); ++j) {
      if (fe[j] == "*") continue;
      const double va = std::stod(fa[j]), ve = std::stod(fe[j]);
      CHECK_MESSAGE(std::abs(va - ve) <= rel * std::abs(ve) + 1e-300, "line " << i + 1 << " field " << j + 1);
    }
  }
}

}  // namespace

TEST_CASE("kernel grid against independent high-precision values") {
  compare_csv(run({"kernel", "--t", "0.5,1,2", "--z", "0,1,2.5", "--u", "0,0.5,-3"}), read_golden("kernel_grid.csv"),
              1e-9);
}

TEST_CASE("sample paths are frozen for a fixed seed") {
  compare_csv(run({"sample", "--paths", "2", "--intervals", "4", "--substeps", "8", "--seed", "17", "--t", "0.5"}),
              read_golden("sample_paths.csv"), 1e-12);
}

TEST_CASE("two-slice cylinder matches its symmetry oracle") {
  // Swapping x and y flips u and fixes the first box, so W = P(|x|, |y| <= 1) / 2.
  const auto text = run({"cylinder", "--file", std::string(HWIENER_GOLDEN_DIR) + "/cylinder_two_slice.cfg"});
  const auto lines = split(text, '\n');
  REQUIRE(lines.size() == 2);
  const auto prov = nlohmann::json::parse(lines[0]);
  CHECK(prov["record"] == "provenance");
  CHECK(prov["subcommand"] == "cylinder");
  CHECK(prov["config"]["cylinder.times"] == "0.5, 1");
  const auto rec = nlohmann::json::parse(lines[1]);
  CHECK(rec["record"] == "cylinder");
  CHECK(rec["method"] == "quadrature");
  const double oracle = 0.5 * std::pow(std::erf(1.0 / std::sqrt(2.0)), 2);
  CHECK(std::abs(rec["value"].get<double>() - oracle) <= rec["error"].get<double>() + 1e-6);
}

TEST_CASE("fk records carry the documented fields") {
  const auto text = run({"fk", "--set", "t=0.5", "--set", "f.kind=constant", "--set", "f.amplitude=2", "--set",
                         "V.value=0.5", "--set", "n_paths=200", "--set", "substeps=10", "--set", "reference=true"});
  const auto lines = split(text, '\n');
  REQUIRE(lines.size() == 3);
  const auto fk = nlohmann::json::parse(lines[1]);
  for (const char* key : {"record", "value", "stderr", "n_paths", "seed"}) CHECK(fk.contains(key));
  CHECK(fk["value"].get<double>() == doctest::Approx(2.0 * std::exp(-0.25)));
  const auto ref = nlohmann::json::parse(lines[2]);
  CHECK(ref["record"] == "reference");
  CHECK(ref["value"].get<double>() == doctest::Approx(2.0 * std::exp(-0.25)).epsilon(1e-5));
}
