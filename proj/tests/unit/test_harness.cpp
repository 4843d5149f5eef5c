#include "hwiener/harness/cli.hpp"
#include "hwiener/harness/output.hpp"
#include "hwiener/harness/run_config.hpp"
#include "hwiener/harness/validation.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hwiener::harness;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::parse(in);
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parsing: comments, whitespace, typed access") {
  const auto c = parse("# header\n n = 2 \nt=0.5, 1 ,2 # trailing\n\nname = hello world\nflag = true\n");
  CHECK(c.get_int("n") == 2);
  CHECK(c.get_doubles("t") == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.get_string("name") == "hello world");
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_double("missing", 3.5) == 3.5);
  CHECK_THROWS_AS(c.get_double("missing"), ConfigError);
  CHECK_THROWS_AS(c.get_int("t"), ConfigError);
  CHECK_THROWS_AS(c.get_double("name"), ConfigError);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/missing.cfg"), ConfigError);
  auto c = parse("box.1 = 0 1\nn = 1\n");
  CHECK_NOTHROW(c.require_known({"n", "box."}));
  CHECK_THROWS_AS(c.require_known({"n"}), ConfigError);
  CHECK_THROWS_AS(c.apply_overrides({"novalue"}), ConfigError);
  c.apply_overrides({"n=3"});
  CHECK(c.get_int("n") == 3);
}

TEST_CASE("infinite bounds parse") {
  CHECK(std::isinf(parse_double("inf", "x")));
  CHECK(parse_double("-inf", "x") < 0);
  CHECK_THROWS_AS(parse_double("1.5abc", "x"), ConfigError);
  CHECK(parse_doubles("1 -inf 2", "x", ' ').size() == 3);
}

TEST_CASE("canonical form is sorted and round-trips") {
  const auto c = parse("z = 1\na = 2\n");
  CHECK(c.canonical() == "a=2\nz=1\n");
  const auto again = parse("a = 2\nz = 1\n");
  CHECK(again.canonical() == c.canonical());
}

TEST_CASE("number formatting round-trips") {
  hwtest::Gen g(81);
  for (int k = 0; k < hwtest::kDraws; ++k) {
    const double v = g.uniform(-1, 1) * std::pow(10.0, g.integer(-30, 30));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("CSV header carries provenance then columns") {
  std::ostringstream out;
  write_csv_header(out, {"kernel", parse("t = 1\n")}, kernel_columns());
  CHECK(out.str() == "# tool: hwiener " + version_string() + "\n# subcommand: kernel\n# config: t=1\nt,|z|,u,p_t,est_tail_error\n");
  CHECK(sample_columns(2) == std::vector<std::string>{"path_id", "time", "x_1", "y_1", "x_2", "y_2", "u"});
}

TEST_CASE("suites map to criteria") {
  CHECK(suite_criteria("kernel") == std::vector<int>{1, 2, 3, 4});
  CHECK(suite_criteria("all").size() == kCriterionCount);
  CHECK_THROWS_AS(suite_criteria("bogus"), ConfigError);
}

TEST_CASE("cli: kernel at the origin") {
  const auto r = cli({"kernel", "--n", "1", "--t", "1", "--z", "0", "--u", "0"});
  CHECK(r.code == kExitOk);
  const auto last = r.out.substr(r.out.rfind("\n", r.out.size() - 2) + 1);
  CHECK(last.rfind("1,0,0,", 0) == 0);
  const double p = std::stod(last.substr(6));
  CHECK(p == doctest::Approx(1.0 / 64.0).epsilon(1e-10));
}

TEST_CASE("cli: exit codes") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"nosuch"}).code == kExitUsage);
  CHECK(cli({"kernel", "--bogus-flag"}).code == kExitUsage);
  const auto missing = cli({"fk", "--config", "missing.cfg"});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("\"kind\":\"config\"") != std::string::npos);
  CHECK(cli({"kernel", "--t", "-1"}).code == kExitConfig);
  CHECK(cli({"kernel", "--set", "unknown=1"}).code == kExitConfig);
  CHECK(cli({"validate", "--suite", "bogus"}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("cli: --set overrides the shorthand flag") {
  const auto r = cli({"kernel", "--t", "1", "--set", "t=2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("# config: t=2") != std::string::npos);
}

TEST_CASE("cli: validate writes records and a summary") {
  const auto r = cli({"validate", "--criteria", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("\"record\":\"provenance\"") != std::string::npos);
  CHECK(r.out.find("\"record\":\"criterion\"") != std::string::npos);
  CHECK(r.out.find("\"record\":\"summary\"") != std::string::npos);
}
