#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "bellforge/cli.hpp"
#include "bellforge/csv.hpp"

using namespace bellforge;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const std::string& stdin_text = {}) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::size_t at = 0;
  while (at < text.size()) {
    const auto end = text.find("\r\n", at);
    REQUIRE(end != std::string::npos);
    v.push_back(text.substr(at, end - at));
    at = end + 2;
  }
  return v;
}

const double kTsirelson = 2.0 * std::numbers::sqrt2;

const char* kUniform = R"({"p": {"11": [[0.25,0.25],[0.25,0.25]], "12": [[0.25,0.25],[0.25,0.25]],
                                 "21": [[0.25,0.25],[0.25,0.25]], "22": [[0.25,0.25],[0.25,0.25]]}})";

}  // namespace

TEST_CASE("chsh example reaches the Tsirelson value") {
  const auto r = invoke({"chsh", "--state", "psi-plus", "--kinds", "EEEE", "--angles", "0,22.5,45,67.5", "--degrees"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["schema_version"] == cli::kSchemaVersion);
  CHECK(std::abs(j["S"].get<double>() - kTsirelson) < 1e-9);
  CHECK(j["settings"]["b"]["theta"].get<double>() == doctest::Approx(std::numbers::pi / 8));
}

TEST_CASE("lhv verdicts from a file and from piped chsh output") {
  spit("uniform.json", kUniform);
  auto r = invoke({"lhv", "--behavior", "uniform.json"});
  REQUIRE(r.code == cli::kExitOk);
  auto j = json::parse(r.out);
  CHECK(j["verdict"] == "feasible");
  CHECK(j.contains("joint"));

  const auto chsh = invoke({"chsh", "--state", "singlet", "--kinds", "LLLL", "--angles", "0,22.5,45,67.5", "--degrees"});
  REQUIRE(chsh.code == cli::kExitOk);
  r = invoke({"lhv", "--from-state", "-"}, chsh.out);
  REQUIRE(r.code == cli::kExitOk);
  j = json::parse(r.out);
  CHECK(j["verdict"] == "infeasible");
  CHECK(std::abs(j["certificate"]["value"].get<double>() - kTsirelson) < 1e-6);
}

TEST_CASE("marginal-theorem example writes an increasing S column") {
  const auto r = invoke({"marginal-theorem", "--L", "10,100", "--sign", "+", "--format", "csv"});
  REQUIRE(r.code == cli::kExitOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "L,S");
  const double s10 = std::stod(rows[1].substr(rows[1].find(',') + 1));
  const double s100 = std::stod(rows[2].substr(rows[2].find(',') + 1));
  CHECK(s100 > s10);
  CHECK(s100 < kTsirelson);

  const auto minus = invoke({"marginal-theorem", "--L", "10", "--sign", "-", "--format", "csv"});
  REQUIRE(minus.code == cli::kExitOk);
  const auto mrows = lines(minus.out);
  CHECK(std::stod(mrows[1].substr(mrows[1].find(',') + 1)) == doctest::Approx(-s10).epsilon(1e-9));
}

TEST_CASE("ak-compare CSV header and line endings") {
  const auto r = invoke({"ak-compare", "--grid", "1024", "--out", "ak.csv"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j.contains("var_x1"));
  CHECK(j.contains("var_x2"));
  CHECK(j.contains("variance_residuals"));
  const auto text = slurp("ak.csv");
  const auto rows = lines(text);
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "q,p_ak,p_rs");
  CHECK(text.find('\n') == text.find("\r\n") + 1);
}

TEST_CASE("every JSON output carries the schema version") {
  spit("uniform.json", kUniform);
  const std::vector<std::vector<std::string>> runs = {
      {"chsh", "--optimize", "--kinds", "LELE"},
      {"lhv", "--behavior", "uniform.json"},
      {"rs1d", "--grid", "512"},
      {"rs2d", "--grid", "64"},
      {"marginal-theorem", "--L", "10", "--grid", "65536"},
      {"wigner", "--state", "excited", "--grid", "64"},
      {"parity-chsh", "--r", "0.5"},
      {"ak-compare", "--grid", "512"},
      {"waves", "dump", "--state", "gaussian", "--grid", "64", "--out", "dump.csv"},
  };
  for (const auto& args : runs) {
    const auto r = invoke(args);
    INFO(args[0]);
    REQUIRE(r.code == cli::kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["schema_version"] == cli::kSchemaVersion);
  }
  CHECK(lines(slurp("dump.csv"))[0] == "x,density");
}

TEST_CASE("repeated runs are byte-identical") {
  const std::vector<std::vector<std::string>> runs = {
      {"chsh", "--optimize", "--kinds", "ELEL", "--seed", "9"},
      {"rs1d", "--psi", "two-gaussian", "--grid", "1024", "--mc-samples", "20000", "--seed", "5"},
      {"rs2d", "--grid", "64", "--mc-samples", "5000", "--seed", "3", "--swap-check"},
      {"parity-chsh", "--r", "1", "--family", "general", "--seed", "2"},
      {"wigner", "--state", "psi-minus:3", "--grid", "16", "--format", "csv"},
  };
  for (const auto& args : runs) {
    INFO(args[0]);
    const auto a = invoke(args);
    const auto b = invoke(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
  REQUIRE(invoke({"rs1d", "--grid", "512", "--out", "rs_a.csv"}).code == cli::kExitOk);
  REQUIRE(invoke({"rs1d", "--grid", "512", "--out", "rs_b.csv"}).code == cli::kExitOk);
  CHECK(slurp("rs_a.csv") == slurp("rs_b.csv"));
}

TEST_CASE("validation failures exit 2") {
  spit("broken.json", "{\"p\": ");
  spit("short.json", R"({"p": {"11": [[1,0],[0,0]]}})");
  spit("unnormalized.json", R"({"amplitudes": [[1,0],[0,0],[0,0],[1,0]]})");
  const std::vector<std::vector<std::string>> runs = {
      {},
      {"nosuch"},
      {"chsh", "--angles", "0,1"},
      {"chsh", "--kinds", "EEXE", "--optimize"},
      {"chsh", "--state", "unnormalized.json", "--optimize"},
      {"chsh", "--state", "missing.json", "--optimize"},
      {"lhv", "--behavior", "broken.json"},
      {"lhv", "--behavior", "short.json"},
      {"lhv"},
      {"rs1d", "--grid", "1000"},
      {"rs1d", "--epsilon", "2"},
      {"rs2d", "--ordering", "qq"},
      {"rs2d", "--gauss", "1,2,3"},
      {"marginal-theorem", "--sign", "x"},
      {"parity-chsh"},
      {"parity-chsh", "--r", "1", "--alphas", "0,1,zz,0"},
      {"ak-compare", "--b", "-1"},
      {"waves", "dump", "--state", "gaussian"},
      {"--format", "xml", "chsh", "--optimize"},
  };
  for (const auto& args : runs) {
    const std::string label = args.empty() ? std::string("(none)") : args[0] + (args.size() > 1 ? " " + args[1] : "");
    INFO(label);
    const auto r = invoke(args);
    CHECK(r.code == cli::kExitInput);
    CHECK_FALSE(r.err.empty());
  }
}

TEST_CASE("numerical failures exit 3") {
  auto r = invoke({"rs1d", "--psi", "two-gaussian", "--grid", "32"});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(json::parse(r.out)["pass"] == false);
  r = invoke({"rs1d", "--psi", "two-gaussian", "--grid", "16"});
  CHECK(r.code == cli::kExitNumerical);
}

TEST_CASE("wigner of the first excited state dips to -1/pi") {
  const auto r = invoke({"wigner", "--state", "excited"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j["W_origin"].get<double>() + 1.0 / std::numbers::pi) < 1e-4);
  CHECK(j["hudson"]["is_gaussian"] == false);
}

TEST_CASE("csv quoting and number formatting") {
  CHECK(csv::quote("plain") == "plain");
  CHECK(csv::quote("a,b") == "\"a,b\"");
  CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv::quote("two\nlines") == "\"two\nlines\"");
  for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324}) CHECK(std::strtod(csv::format_number(v).c_str(), nullptr) == v);
  std::ostringstream s;
  csv::Writer w(s);
  w.header({"name", "value"});
  w.row(std::vector<std::string>{"x,y", "1"});
  CHECK(s.str() == "name,value\r\n\"x,y\",1\r\n");
}
