#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "recbf/config.hpp"
#include "recbf/error.hpp"
#include "recbf/experiments.hpp"
#include "support.hpp"

using namespace recbf;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "experiment": "small",
  "seed": 7,
  "system": {"builtin": "double_integrator"},
  "nominal": {"kind": "linear_feedback", "gain": [[1.0, 2.0]], "target": [0.0, 0.0]},
  "sim": {"dt": 0.01, "horizon": 0.5},
  "initial_conditions": [[0.0, 0.5], [0.5, -0.5]],
  "sample_initial_conditions": {"count": 2, "region": "safe"},
  "levelsets": [{"name": "h", "field": "h",
                 "x_axis": {"coordinate": 0, "lo": -1.5, "hi": 1.5, "resolution": 11},
                 "y_axis": {"coordinate": 1, "lo": -4.0, "hi": 4.0, "resolution": 9}}],
  "verify": {"checks": ["relative_degree", "lemma1"], "resolution": 21}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: no error
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("recbf_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> listing(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("configs round-trip through canonical JSON") {
  std::vector<std::string> texts{kSmall};
  for (const auto& name : experiment_names()) texts.push_back(pinned_config(name));
  for (const auto& t : texts) {
    const RunConfig c = parse_run_config(t);
    const std::string canon = to_json(c);
    CHECK(to_json(parse_run_config(canon)) == canon);
  }
}

TEST_CASE("shipped config files equal the embedded pinned configs") {
  const std::vector<std::string> names = experiment_names();
  CHECK(names.size() == 7);
  for (const auto& name : names) {
    const fs::path p = fs::path(RECBF_SOURCE_DIR) / "configs" / (name + ".json");
    REQUIRE(fs::exists(p));
    CHECK(slurp(p) == pinned_config(name));
    CHECK(parse_run_config(pinned_config(name)).experiment == name);
  }
}

TEST_CASE("unknown experiments are reported") {
  try {
    pinned_config("nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownExperiment);
  }
}

TEST_CASE("malformed configs are rejected with the config code") {
  CHECK(code_of("{") == ErrorCode::Config);
  CHECK(code_of("[]") == ErrorCode::Config);
  CHECK(code_of(R"({"experiment": "a", "bogus": 1})") == ErrorCode::Config);
  CHECK(code_of(R"({"seed": "x"})") == ErrorCode::Config);
  CHECK(code_of(R"({"seed": -1})") == ErrorCode::Config);
  CHECK(code_of(R"({"experiment": "a/b"})") == ErrorCode::Config);
  CHECK(code_of(R"({"experiment": ""})") == ErrorCode::Config);
  CHECK(code_of(R"({"sim": {"dt": 0}})") == ErrorCode::Config);
  CHECK(code_of(R"({"sim": {"dt": 0.1, "extra": 1}})") == ErrorCode::Config);
  CHECK(code_of(R"({"barrier": {"kind": "magic"}})") == ErrorCode::Config);
  CHECK(code_of(R"({"filter": {"mode": "qp"}})") == ErrorCode::Config);
  CHECK(code_of(R"({"filter": {"alpha": {"kind": "cubic"}}})") == ErrorCode::Config);
  CHECK(code_of(R"({"nominal": {"kind": "mpc"}})") == ErrorCode::Config);
  CHECK(code_of(R"({"verify": {"checks": ["theorem9"]}})") == ErrorCode::Config);
  CHECK(code_of(R"({"levelsets": [{"name": "a", "field": "q",
      "x_axis": {"lo": 0, "hi": 1}, "y_axis": {"coordinate": 1, "lo": 0, "hi": 1}}]})") == ErrorCode::Config);
  CHECK(code_of(R"({"sample_initial_conditions": {"count": 1, "region": "edge"}})") == ErrorCode::Config);
  CHECK(code_of(R"({"system": {"builtin": "x", "polynomial": {}}})") == ErrorCode::Config);
  CHECK(code_of(R"({"experiment": "ok"})") == ErrorCode::Io);
}

TEST_CASE("class-K specs") {
  ClassKSpec s;
  s.kind = "signed_square";
  s.coeff = 2.0;
  CHECK(s.to_alpha()(0.5) == doctest::Approx(0.5));
  CHECK(s.to_rectifier()(-1.0) == doctest::Approx(2.0));
  s.epsilon = 0.1;
  CHECK_THROWS_AS(s.to_alpha(), Error);
  CHECK(s.to_rectifier()(0.1) == 0.0);
}

TEST_CASE("builtin names map to the expected barriers and errors") {
  RunConfig c = parse_run_config(R"({"system": {"builtin": "submarine"}})");
  CHECK_THROWS_AS(build_scenario(c), Error);
  // The HOCBF filter mode needs an HOCBF barrier.
  c = parse_run_config(R"({"filter": {"mode": "hocbf"}})");
  CHECK_THROWS_AS(build_scenario(c), Error);
  c = parse_run_config(R"({"barrier": {"kind": "hocbf", "alphas": [{"kind": "linear", "coeff": 1}]},
                           "filter": {"mode": "hocbf"}})");
  CHECK(build_scenario(c).barrier->kind() == BarrierKind::HOCBF);
}

TEST_CASE("polynomial systems from config") {
  // x1' = x2, x2' = u with psi = 1 - x1^2: the double integrator spelled out.
  const char* text = R"({
    "system": {"polynomial": {"name": "di", "n": 2, "m": 1,
                              "f": [[{"coeff": 1, "powers": [0, 1]}], []],
                              "g": [[[]], [[{"coeff": 1, "powers": [0, 0]}]]],
                              "domain": [[-1.5, 1.5], [-4, 4]]},
               "constraint": {"psi": [{"coeff": 1, "powers": [0, 0]}, {"coeff": -1, "powers": [2, 0]}],
                              "relative_degree": 2}},
    "barrier": {"kind": "recbf2", "alphas": [{"kind": "linear", "coeff": 1}],
                "gammas": [{"kind": "signed_square", "coeff": 1}]}
  })";
  const RunConfig c = parse_run_config(text);
  const Scenario s = build_scenario(c);
  CHECK(s.system->name() == "di");
  CHECK(s.constraint.relative_degree == 2);
  const Problem ref = builtin("double_integrator");
  const Barrier b(ref.default_barrier, ref.system);
  testing::Sampler rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{rng.uniform(-1.5, 1.5), rng.uniform(-4.0, 4.0)};
    CHECK(s.barrier->value(x) == doctest::Approx(b.value(x)).epsilon(1e-12));
    const std::vector<double> u{0.3};
    CHECK(s.system->dynamics(x, u) == ref.system->dynamics(x, u));
  }
  CHECK(to_json(parse_run_config(to_json(c))) == to_json(c));
  // A polynomial model without a constraint cannot build a barrier.
  CHECK_THROWS_AS(build_scenario(parse_run_config(R"({
    "system": {"polynomial": {"n": 1, "m": 1, "f": [[]], "g": [[[]]]}}})")), Error);
}

TEST_CASE("seeded sampling is deterministic and respects the region") {
  RunConfig c = parse_run_config(kSmall);
  c.sample.count = 25;
  const Scenario s = build_scenario(c);
  const auto a = resolve_initial_conditions(c, s);
  const auto b = resolve_initial_conditions(c, s);
  REQUIRE(a.size() == 27);
  CHECK(a == b);
  CHECK(a[0] == c.initial_conditions[0]);
  CHECK(a[1] == c.initial_conditions[1]);
  for (std::size_t i = 2; i < a.size(); ++i) CHECK(s.barrier->set_value(a[i]) >= 0.0);

  c.sample.region = "unsafe";
  for (const auto& x : resolve_initial_conditions(c, s)) {
    if (x != c.initial_conditions[0] && x != c.initial_conditions[1]) CHECK(s.barrier->set_value(x) < 0.0);
  }
  c.sample.region = "safe";
  c.seed = 8;
  CHECK(resolve_initial_conditions(c, s) != a);
}

TEST_CASE("run and bundle layout") {
  const RunConfig c = parse_run_config(kSmall);
  const RunResult r = run(c);
  CHECK(r.trajectories.size() == 4);
  CHECK(r.grids.size() == 1);
  CHECK(r.reports.size() == 2);
  CHECK_FALSE(r.safety_event());
  CHECK(r.verified());

  TempDir a("bundle_a");
  TempDir b("bundle_b");
  const fs::path dir = write_bundle(r, a.path);
  CHECK(dir == a.path / "small");
  const std::vector<std::string> expected{
      "config.json",          "events.json",          "grids/h.csv",
      "grids/h.json",         "trajectories/traj_000.csv", "trajectories/traj_001.csv",
      "trajectories/traj_002.csv", "trajectories/traj_003.csv", "verify/lemma1.json",
      "verify/relative_degree.json"};
  CHECK(listing(dir) == expected);
  CHECK(parse_run_config(slurp(dir / "config.json")).experiment == "small");
  const std::string events = slurp(dir / "events.json");
  CHECK(events.find("\"termination\"") != std::string::npos);
  CHECK(events.find("\"completed\"") != std::string::npos);

  // A second run gives byte-identical files.
  write_bundle(run(c, RunOptions{true, true, true, 3}), b.path);
  for (const auto& f : expected) CHECK(slurp(a.path / "small" / f) == slurp(b.path / "small" / f));
}

TEST_CASE("run options select the stages") {
  const RunConfig c = parse_run_config(kSmall);
  const RunResult sim = run(c, RunOptions{true, false, false, 1});
  CHECK(sim.grids.empty());
  CHECK(sim.reports.empty());
  const RunResult ver = run(c, RunOptions{false, false, true, 1});
  CHECK(ver.trajectories.empty());
  CHECK(ver.reports.size() == 2);
}

TEST_CASE("an empty initial-condition list still writes a bundle") {
  const RunConfig c = parse_run_config(R"({"experiment": "empty", "sim": {"horizon": 0.1}})");
  const RunResult r = run(c);
  CHECK(r.trajectories.empty());
  CHECK_FALSE(r.safety_event());
  TempDir t("empty");
  const fs::path dir = write_bundle(r, t.path);
  CHECK(fs::exists(dir / "events.json"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("a safety event is reported for the HOCBF failure example") {
  RunConfig c = parse_run_config(pinned_config("ex1_hocbf_failure"));
  c.initial_conditions = {{-1.2, 3.0}};
  c.levelsets.clear();
  const RunResult r = run(c, RunOptions{true, false, false, 1});
  REQUIRE(r.trajectories.size() == 1);
  CHECK(r.safety_event());
  CHECK(events_json(r).find("\"safety_event\": true") != std::string::npos);
}
