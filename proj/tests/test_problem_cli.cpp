#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mwrc/cli.hpp"
#include "mwrc/error.hpp"
#include "mwrc/problem.hpp"
#include "support/corpus.hpp"

using namespace mwrc;

namespace {

std::string fixture(const std::string& name) {
  return std::string(MWRC_FIXTURE_DIR) + "/" + name;
}

// Scratch directory for generated problem files and reports.
struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    static int counter = 0;
    dir = std::filesystem::temp_directory_path() /
          ("mwrc_cli_test_" + std::to_string(++counter));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  std::string file(const std::string& name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    return path.string();
  }
  std::string path(const std::string& name) { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliOutcome {
  int code = -1;
  std::string out;
  std::string err;
};

CliOutcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliOutcome r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("fixture files load into the expected shapes") {
  const Problem xr = load_problem(fixture("xor_triple.json"));
  CHECK(xr.source.L == 3);
  CHECK(xr.channel.has_value());
  CHECK(xr.channel->q == 2);
  CHECK(xr.has_sim);
  CHECK(xr.sim.m == 6);
  CHECK(xr.sim.kappa == 1.3);
  CHECK(xr.sim.mode == SimMode::ideal_channel);

  // the sparse form reproduces the dense table exactly
  const Problem pp = load_problem(fixture("pair_plus_solo.json"));
  CHECK(pp.source.probs == corpus::pair_plus_solo().probs);
  CHECK_FALSE(pp.has_sim);

  const Problem ind = load_problem(fixture("independent_bits.json"));
  CHECK(ind.sim.mode == SimMode::symbol_level);
  REQUIRE(ind.sim.binning_rates.has_value());
  CHECK(ind.sim.binning_rates->size() == 3);

  const Problem id = load_problem(fixture("identical_triple.json"));
  CHECK(id.channel->q == 3);
  CHECK(id.source.probs[0] == 0.5);
  CHECK(id.source.probs[7] == 0.5);
}

TEST_CASE("parse errors carry the origin and the right code") {
  const auto expect_parse_error = [](const std::string& text,
                                     const std::string& fragment) {
    try {
      parse_problem(text, "doc");
      FAIL_CHECK("expected a parse error for: " << fragment);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::parse_error);
      CHECK_MESSAGE(contains(e.message(), "doc"), e.message());
      CHECK_MESSAGE(contains(e.message(), fragment), e.message());
    }
  };

  expect_parse_error("not json at all", "invalid JSON");
  expect_parse_error("[1,2]", "top level");
  expect_parse_error("{}", "missing field 'source'");
  expect_parse_error(R"({"version": 2, "source": {}})", "version");
  expect_parse_error(R"({"source": {"alphabet_sizes": [2,2]}})",
                     "either 'probs' or 'sparse_probs'");
  expect_parse_error(
      R"({"source": {"alphabet_sizes": [2,0], "probs": [1.0]}})", "positive");
  expect_parse_error(
      R"({"source": {"alphabet_sizes": [2,2], "probs": ["a", "b"]}})", "numbers");

  // sparse key shapes
  const std::string head = R"({"source": {"alphabet_sizes": [2,2,2], "sparse_probs": {)";
  const std::string tail = R"(: 1.0}}})";
  expect_parse_error(head + R"("0,0")" + tail, "too few symbols");
  expect_parse_error(head + R"("0,0,0,0")" + tail, "trailing content");
  expect_parse_error(head + R"("0,2,0")" + tail, "outside alphabet");
  expect_parse_error(head + R"("0;0;0")" + tail, "too few symbols");
  expect_parse_error(head + R"("x,0,0")" + tail, "malformed");

  expect_parse_error(
      R"({"source": {"alphabet_sizes": [2,2], "probs": [0.25,0.25,0.25,0.25]},
          "sim": {"mystery": 3}})",
      "unknown field 'mystery'");
  expect_parse_error(
      R"({"source": {"alphabet_sizes": [2,2], "probs": [0.25,0.25,0.25,0.25]},
          "sim": {"mode": "quantum"}})",
      "'ideal' or 'symbol'");

  // channel/source user-count mismatch
  expect_parse_error(
      R"({"source": {"alphabet_sizes": [2,2], "probs": [0.25,0.25,0.25,0.25]},
          "channel": {"q": 2, "noise_relay": [1.0, 0.0],
                      "noise_users": [[1.0,0.0],[1.0,0.0],[1.0,0.0]]}})",
      "noise pmfs");
}

TEST_CASE("validation failures keep their own codes under a path prefix") {
  try {
    parse_problem(
        R"({"source": {"alphabet_sizes": [2,2], "probs": [0.5, 0.6, -0.1, 0.0]}})",
        "bad.json");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::negative_probability);
    CHECK(contains(e.message(), "bad.json"));
  }
  try {
    parse_problem(
        R"({"source": {"alphabet_sizes": [2,2], "probs": [0.5,0.5,0.5,0.5]}})",
        "bad.json");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::sum_not_one);
    CHECK(std::string(e.what()).rfind("SumNotOne", 0) == 0);
  }

  const Problem no_channel = parse_problem(
      R"({"source": {"alphabet_sizes": [2,2], "probs": [0.25,0.25,0.25,0.25]}})",
      "doc");
  CHECK_THROWS_AS(require_channel(no_channel, "kappa"), Error);
}

TEST_CASE("load_problem reports unreadable paths") {
  try {
    load_problem("/nonexistent/nowhere.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(contains(e.message(), "nowhere.json"));
  }
}

TEST_CASE("analyze reports the known fixtures and exits 0 either way") {
  const auto xr = run_cli({"analyze", fixture("xor_triple.json")});
  CHECK(xr.code == 0);
  CHECK(contains(xr.out, "abcmi overall: HOLDS"));
  CHECK(contains(xr.out, "r = [0.500000000, 0.500000000, 0.500000000]"));
  CHECK(contains(xr.out, "kappa_star = 1.000000000"));
  CHECK(contains(xr.out, "C1 PASS, C2 PASS"));
  CHECK(xr.err.empty());

  const auto ind = run_cli({"analyze", fixture("independent_bits.json")});
  CHECK(ind.code == 0);
  CHECK(contains(ind.out, "r = [1.000000000, 1.000000000, 1.000000000]"));
  CHECK(contains(ind.out, "kappa_star = 2.000000000"));

  // a failing verdict is still a successful analysis
  const auto pp = run_cli({"analyze", fixture("pair_plus_solo.json")});
  CHECK(pp.code == 0);
  CHECK(contains(pp.out, "abcmi overall: FAILS"));
}

TEST_CASE("abcmi and rates exit 1 on negative verdicts") {
  CHECK(run_cli({"abcmi", fixture("xor_triple.json")}).code == 0);
  CHECK(run_cli({"rates", fixture("xor_triple.json")}).code == 0);

  const auto ab = run_cli({"abcmi", fixture("pair_plus_solo.json")});
  CHECK(ab.code == 1);
  CHECK(contains(ab.out, "violated"));

  const auto ra = run_cli({"rates", fixture("pair_plus_solo.json")});
  CHECK(ra.code == 1);
  CHECK(contains(ra.out, "C1 FAIL, C2 PASS"));
}

TEST_CASE("kappa prints both threshold numbers") {
  const auto xr = run_cli({"kappa", fixture("xor_triple.json")});
  CHECK(xr.code == 0);
  CHECK(contains(xr.out, "kappa_star = 1.000000000"));
  CHECK(contains(xr.out, "min feasible kappa = 1.000000000"));

  const auto pp = run_cli({"kappa", fixture("pair_plus_solo.json")});
  CHECK(pp.code == 0);
  CHECK(contains(pp.out, "min feasible kappa = 1.5000000"));
}

TEST_CASE("feasible: 0 when the regions meet, 1 when they do not, 2 on bad kappa") {
  const auto yes = run_cli({"feasible", fixture("xor_triple.json"), "--kappa", "1.0"});
  CHECK(yes.code == 0);
  CHECK(contains(yes.out, "FEASIBLE"));
  CHECK(contains(yes.out, "witness r = ["));

  const auto no = run_cli({"feasible", fixture("xor_triple.json"), "--kappa", "0.5"});
  CHECK(no.code == 1);
  CHECK(contains(no.out, "INFEASIBLE"));

  const auto bad = run_cli({"feasible", fixture("xor_triple.json"), "--kappa", "0"});
  CHECK(bad.code == 2);
  CHECK(contains(bad.err, "ParameterOutOfRange"));
}

TEST_CASE("simulate honours file defaults and flag overrides") {
  const auto base = run_cli({"simulate", fixture("xor_triple.json"), "--trials", "200"});
  CHECK(base.code == 0);
  CHECK(contains(base.out, "mode: ideal m=6 kappa=1.300000000 trials=200 seed=7"));
  CHECK(contains(base.out, "delivered: yes"));

  const auto denied = run_cli(
      {"simulate", fixture("xor_triple.json"), "--kappa", "0.8", "--trials", "50"});
  CHECK(denied.code == 0);
  CHECK(contains(denied.out, "delivered: no"));
  CHECK(contains(denied.out, "pe_overall = 1.000000000"));

  const auto rates_override =
      run_cli({"simulate", fixture("xor_triple.json"), "--trials", "50",
               "--rates", "1,1,1", "--no-dither", "--seed", "99"});
  CHECK(rates_override.code == 0);
  CHECK(contains(rates_override.out, "dither=off"));
  CHECK(contains(rates_override.out, "seed=99"));
}

TEST_CASE("a kappa comma list produces a monotone sweep table") {
  TempDir tmp;
  const std::string report = tmp.path("sweep.json");
  const auto sw = run_cli({"simulate", fixture("xor_triple.json"), "--kappa",
                           "0.8,1.0,1.3", "--trials", "300", "--out", report});
  CHECK(sw.code == 0);
  CHECK(contains(sw.out, "kappa         delivered  pe_overall"));

  const auto j = nlohmann::json::parse(slurp(report));
  REQUIRE(j["sweep"].size() == 3);
  CHECK(j["config"]["kappa_list"].size() == 3);
  const double pe08 = j["sweep"][0]["pe_overall"].get<double>();
  const double pe10 = j["sweep"][1]["pe_overall"].get<double>();
  const double pe13 = j["sweep"][2]["pe_overall"].get<double>();
  CHECK(pe08 == 1.0);
  CHECK_FALSE(j["sweep"][0]["delivered"].get<bool>());
  CHECK(pe08 >= pe10);
  CHECK(pe10 >= pe13);
  CHECK(pe13 < 0.2);
}

TEST_CASE("machine-readable reports are byte-stable across runs") {
  TempDir tmp;
  const std::string a = tmp.path("a.json"), b = tmp.path("b.json");
  const std::vector<std::string> args = {
      "simulate", fixture("xor_triple.json"), "--trials", "100", "--seed", "21"};
  auto with_out = [&](const std::string& path) {
    auto v = args;
    v.push_back("--out");
    v.push_back(path);
    return run_cli(v);
  };
  const auto ra = with_out(a);
  const auto rb = with_out(b);
  CHECK(ra.code == 0);
  CHECK(rb.code == 0);
  CHECK(ra.out == rb.out);
  CHECK(slurp(a) == slurp(b));

  // the report parses and echoes the verdict fields
  const auto j = nlohmann::json::parse(slurp(a));
  CHECK(j["command"] == "simulate");
  CHECK(j["result"]["trials_run"] == 100);
  CHECK(j["result"]["pe_overall"].is_number());
}

TEST_CASE("analyze --out emits a parseable full report") {
  TempDir tmp;
  const std::string path = tmp.path("analysis.json");
  const auto r = run_cli({"analyze", fixture("xor_triple.json"), "--out", path});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(path));
  CHECK(j["abcmi"]["overall"].get<bool>());
  CHECK(j["rates"]["c1"].get<bool>());
  CHECK(j["rates"]["c2"].get<bool>());
  CHECK(j["kappa_star"].get<double>() == doctest::Approx(1.0));
  CHECK(j["entropies"]["{1,2,3}"].get<double>() == doctest::Approx(2.0));
  CHECK(j["atoms"]["{1,2,3}"].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("simulate rejects oversize blocks with a tractability error") {
  const auto r = run_cli({"simulate", fixture("xor_triple.json"), "--m", "20",
                          "--mode", "symbol"});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "TractabilityExceeded"));
}

TEST_CASE("usage and file errors exit 2; help exits 0") {
  TempDir tmp;

  const auto sum = run_cli(
      {"analyze",
       tmp.file("bad_sum.json",
                R"({"source": {"alphabet_sizes": [2,2], "probs": [0.5,0.5,0.5,0.5]}})")});
  CHECK(sum.code == 2);
  CHECK(sum.err.rfind("SumNotOne", 0) == 0);

  const auto nochan = run_cli(
      {"kappa",
       tmp.file("nochan.json",
                R"({"source": {"alphabet_sizes": [2,2],
                               "probs": [0.25,0.25,0.25,0.25]}})")});
  CHECK(nochan.code == 2);
  CHECK(contains(nochan.err, "ParseError"));
  CHECK(contains(nochan.err, "channel"));

  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"analyze"}).code == 2);  // missing required argument
  CHECK(run_cli({"analyze", "/nonexistent/x.json"}).code == 2);

  const auto help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(contains(help.out, "analyze"));
  CHECK(contains(help.out, "simulate"));
  const auto subhelp = run_cli({"simulate", "--help"});
  CHECK(subhelp.code == 0);
  CHECK(contains(subhelp.out, "--kappa"));
}

TEST_CASE("MWRC_THREADS steers the worker count without changing results") {
  const std::vector<std::string> args = {"simulate", fixture("xor_triple.json"),
                                         "--trials", "90", "--m", "5"};
  const auto solo = run_cli(args);
  REQUIRE(solo.code == 0);

  setenv("MWRC_THREADS", "3", 1);
  const auto env3 = run_cli(args);
  unsetenv("MWRC_THREADS");
  CHECK(env3.code == 0);
  CHECK(env3.out == solo.out);

  setenv("MWRC_THREADS", "not-a-number", 1);
  const auto junk = run_cli(args);
  unsetenv("MWRC_THREADS");
  CHECK(junk.code == 0);
  CHECK(junk.out == solo.out);

  const auto flag = run_cli({"simulate", fixture("xor_triple.json"), "--trials",
                             "90", "--m", "5", "--threads", "2"});
  CHECK(flag.code == 0);
  CHECK(flag.out == solo.out);
}
