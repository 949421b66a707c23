#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coxcontract/config.hpp"
#include "coxcontract/experiment.hpp"

using namespace coxcontract;

namespace {

const char* kBaseConfig = R"(
# experiment fixture
model.kind = sgcp
model.lamstar.shape = 2.0
model.lamstar.rate = 0.5
model.lengthscale.a = 2.0
model.lengthscale.b = 1.0
grid.d = 1
grid.m = 16
lambda0.kind = offset_sin2
lambda0.offset = 2.0
lambda0.amplitude = 1.0
lambda0.frequency = 1.0
filters.kind = alternating
filters.levels = 1.0, 0.5
schedule = 4, 8
M = 1.0
alpha = 1.0
replications = 2
root_seed = 314159
mcmc.iterations = 400
mcmc.burn_in = 100
mcmc.thin = 5
mcmc.chains = 1
ledger.L8 = 2.0
ledger.L9 = 7.0
ledger.L10 = 9.0
ledger.kappa_tail = 0.5
ledger.tau = 1.0
)";

std::filesystem::path temp_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / ("coxcontract_test_" + leaf);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("flat config parsing") {
  const auto cfg = ConfigMap::parse("a.b = 3.5 # comment\n\n# full line comment\nname = hello\n");
  CHECK(cfg.get_double("a.b") == 3.5);
  CHECK(cfg.get_string("name") == "hello");
  CHECK(cfg.get_double("missing", 7.0) == 7.0);
  CHECK_THROWS_WITH_AS((void)cfg.get_double("zzz"), doctest::Contains("zzz"), std::runtime_error);
  CHECK_THROWS_WITH_AS((void)cfg.get_double("name"), doctest::Contains("name"),
                       std::runtime_error);
  CHECK_THROWS_AS((void)ConfigMap::parse("not a pair\n"), std::runtime_error);
  CHECK(ConfigMap::parse("x = 1").hash() != ConfigMap::parse("x = 2").hash());
}

TEST_CASE("experiment config materialization") {
  const auto cfg = ExperimentConfig::from_config(ConfigMap::parse(kBaseConfig));
  CHECK(cfg.model.kind == ModelKind::sgcp);
  CHECK(cfg.grid.points_per_axis() == 16);
  CHECK(cfg.n_schedule == std::vector<int>{4, 8});
  CHECK(cfg.root_seed == 314159);
  CHECK(cfg.ledger.L9 == 7.0);
  CHECK(cfg.ledger.alpha == 1.0);  // mirrored from the top level

  const auto lambda0 = cfg.lambda0.materialize(cfg.grid);
  double top = 0.0;
  for (double v : lambda0.values) top = std::max(top, v);
  CHECK(top <= 3.0);
  CHECK(top > 2.9);

  const auto filters = cfg.filters.materialize(4);
  const double x[] = {0.1};
  CHECK(filters[0](x) == 1.0);
  CHECK(filters[1](x) == 0.5);
  CHECK(filters[2](x) == 1.0);

  CHECK_THROWS_AS((void)ExperimentConfig::from_config(
                      ConfigMap::parse("model.kind = lgcp\n")),
                  std::runtime_error);
  CHECK_THROWS_AS((void)ExperimentConfig::from_config(
                      ConfigMap::parse("schedule = 8, 4\n")),
                  std::runtime_error);
}

TEST_CASE("rates driver matches the formula layer") {
  std::string text = kBaseConfig;
  text += "schedule = 10, 100, 1000\n";
  const auto raw = ConfigMap::parse(text);
  const auto cfg = ExperimentConfig::from_config(raw);
  const auto dir = temp_dir("rates");
  run_rates(cfg, dir);
  const std::string contents = slurp(dir / "rates.csv");
  CHECK(contents.find("# coxcontract rates") == 0);
  CHECK(contents.find("root_seed=314159") != std::string::npos);

  // parse rows and compare epsilon against the direct formula
  std::istringstream is(contents);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("model", 0) == 0) continue;
    std::istringstream row(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(row, tok, ',')) cols.push_back(tok);
    REQUIRE(cols.size() >= 13);
    const auto n = static_cast<std::int64_t>(std::stod(cols[1]));
    const double eps = std::stod(cols[7]);
    const double expected = epsilon_n(ModelKind::sgcp, n, 1.0, 1);
    CHECK(std::abs(eps - expected) <= 1e-12 * expected);
    ++rows;
  }
  CHECK(rows == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulate driver is deterministic byte for byte") {
  const auto raw = ConfigMap::parse(kBaseConfig);
  const auto cfg = ExperimentConfig::from_config(raw);
  const auto dir1 = temp_dir("sim1");
  const auto dir2 = temp_dir("sim2");
  run_simulate(cfg, dir1);
  run_simulate(cfg, dir2);
  for (const char* name : {"dataset_n4.csv", "dataset_n8.csv", "lambda0.csv"}) {
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
    CHECK(slurp(dir1 / name).rfind("# coxcontract simulate", 0) == 0);
  }
  // longer schedule extends the shorter one's realisations: the n=4 block of
  // dataset_n8 equals dataset_n4's rows
  const std::string d4 = slurp(dir1 / "dataset_n4.csv");
  const std::string d8 = slurp(dir1 / "dataset_n8.csv");
  std::istringstream i4(d4);
  std::istringstream i8(d8);
  std::string l4;
  std::string l8;
  while (std::getline(i4, l4)) {
    REQUIRE(std::getline(i8, l8));
    CHECK(l4 == l8);
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("check driver emits the report and derived prior constants") {
  std::string text;
  text += "model.kind = sgcp\n";
  text += "grid.d = 1\n";
  text += "grid.m = 8\n";
  text += "alpha = 1.0\n";
  text += "check.model = sgcp\n";
  text += "check.n = 100\n";
  text += "check.n_max = 2000\n";
  text += "lengthscale.a = 1.0\n";
  text += "lengthscale.b = 1.0\n";
  text += "ledger.c0 = 1\nledger.c1 = 1\nledger.c2 = 1\nledger.c3 = 1\n";
  text += "ledger.c4 = 2\nledger.c5 = 5\n";
  text += "ledger.kappa_tail = 0.5\n";
  text += "ledger.L8 = 11\nledger.L9 = 7\nledger.L10 = 30\n";
  text += "ledger.sup_g0 = 1\nledger.sup_lambda0 = 1\nledger.lambda0_min = 0.1\n";
  text += "ledger.C = 1\nledger.J = 2\nledger.M = 4\n";
  const auto raw = ConfigMap::parse(text);
  const auto cfg = ExperimentConfig::from_config(raw);
  // derived q1 for Gamma(1,1), d=1 is 0; D1 = 1
  const auto dir = temp_dir("check");
  const auto outcome = run_check(cfg, raw, dir);
  CHECK(outcome.summary.find("gamma_prior_constants: (1, 1, 1, 1, 0, 0)") != std::string::npos);
  const std::string report = slurp(dir / "conditions.csv");
  CHECK(report.find("gamma_prior_constants C1=1") != std::string::npos);
  CHECK(report.find("SGCP3,100") != std::string::npos);
  CHECK(report.find("condition,n,lhs,rhs,holds,minimal_n") != std::string::npos);
  CHECK(report.find("# thresholds n1=") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("plot driver renders an svg from a curve csv") {
  const auto dir = temp_dir("plot");
  {
    std::ofstream curve(dir / "curve.csv");
    curve << "# synthetic\nn,radius,mass_outside,median_distance,replications\n";
    curve << "4,1.0,0.5,0.9,3\n8,0.8,0.3,0.7,3\n16,0.6,0.1,0.5,3\n";
  }
  const auto cfg = ExperimentConfig::from_config(ConfigMap::parse(kBaseConfig));
  run_plot(dir / "curve.csv", dir, cfg);
  const std::string svg = slurp(dir / "plot.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("median_distance") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  std::filesystem::remove_all(dir);
}
