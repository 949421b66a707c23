#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "coxcontract/metrics.hpp"
#include "coxcontract/rng.hpp"
#include "support/stats_oracles.hpp"

using namespace coxcontract;

namespace {

GridField random_field(const Grid& g, Rng& rng, double lo = 0.05, double hi = 6.0) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(lo, hi);
  return GridField(g, v);
}

std::vector<FilterSpec> random_filters(Rng& rng, int count) {
  std::vector<FilterSpec> f;
  for (int i = 0; i < count; ++i) f.push_back(FilterSpec::constant(rng.uniform(0.05, 1.0)));
  return f;
}

// Independent per-filter L2 of sqrt differences, written directly.
double sqrt_l2_term(const GridField& lam, const GridField& lam0, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double dv = std::sqrt(lam.values[k] * g[k]) - std::sqrt(lam0.values[k] * g[k]);
    s += dv * dv;
  }
  return std::sqrt(s * lam.grid.cell_volume());
}

}  // namespace

TEST_CASE("averaged norms on constants") {
  Grid g(1, 64);
  const auto four = GridField::constant(g, 4.0);
  const auto one = GridField::constant(g, 1.0);
  const std::vector<FilterSpec> unit{FilterSpec::constant(1.0)};

  CHECK(gamma_inf(four, four, unit) == 0.0);
  CHECK(gamma_inf(four, one, unit) == doctest::Approx(3.0));
  const std::vector<FilterSpec> two{FilterSpec::constant(1.0), FilterSpec::constant(0.5)};
  CHECK(gamma_inf(four, one, two) == doctest::Approx(2.25));

  CHECK(gamma_l2(four, four, unit) == 0.0);
  CHECK(gamma_sqrt_l2(four, four, unit) == 0.0);
  CHECK(gamma_l2(four, one, unit) == doctest::Approx(3.0));
  CHECK(gamma_sqrt_l2(four, one, unit) == doctest::Approx(1.0));
  const std::vector<FilterSpec> quarter{FilterSpec::constant(1.0), FilterSpec::constant(0.25)};
  CHECK(gamma_l2(four, one, quarter) == doctest::Approx(1.875));
  CHECK(gamma_sqrt_l2(four, one, quarter) == doctest::Approx(0.75));

  Grid other(1, 65);
  CHECK_THROWS_AS((void)gamma_inf(four, GridField::constant(other, 1.0), unit),
                  std::invalid_argument);
}

TEST_CASE("hellinger closed form") {
  Grid g(1, 64);
  const auto four = GridField::constant(g, 4.0);
  const auto one = GridField::constant(g, 1.0);
  const std::vector<FilterSpec> unit{FilterSpec::constant(1.0)};
  CHECK(hellinger_n(four, four, unit) == 0.0);
  // h^2 = 2(1 - e^{-1/2})
  const double h2 = 2.0 * (1.0 - std::exp(-0.5));
  CHECK(h2 == doctest::Approx(0.7869386805747332).epsilon(1e-12));
  CHECK(hellinger_n(four, one, unit) == doctest::Approx(std::sqrt(h2)).epsilon(1e-12));
  CHECK(hellinger_n(four, one, unit) == doctest::Approx(0.887095643419994).epsilon(1e-9));
}

TEST_CASE("kl and variance closed forms") {
  Grid g(1, 64);
  const auto four = GridField::constant(g, 4.0);
  const auto one = GridField::constant(g, 1.0);
  const std::vector<FilterSpec> unit{FilterSpec::constant(1.0)};
  CHECK(kl_n(four, four, unit) == 0.0);
  CHECK(var_n(four, four, unit) == 0.0);
  // candidate 4, truth 1: 3 + log(1/4); variance log^2 4
  CHECK(kl_n(four, one, unit) == doctest::Approx(3.0 + std::log(0.25)).epsilon(1e-12));
  CHECK(var_n(four, one, unit) ==
        doctest::Approx(std::log(4.0) * std::log(4.0)).epsilon(1e-12));
  // candidate vanishing where the truth is positive -> +infinity
  const auto zero = GridField::constant(g, 0.0);
  CHECK(kl_n(zero, one, unit) == std::numeric_limits<double>::infinity());
  CHECK(var_n(zero, one, unit) == std::numeric_limits<double>::infinity());
}

TEST_CASE("sandwich, kl, and log bounds on a randomized corpus") {
  // 1000 randomized per-cell-constant positive pairs with 1..5 filters; the
  // quadrature is exact for such fields so the inequalities hold to slack.
  Rng rng(818);
  Grid g(1, 24);
  constexpr double slack = 1e-9;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto lam = random_field(g, rng);
    const auto lam0 = random_field(g, rng);
    const auto filters = random_filters(rng, 1 + static_cast<int>(rng.uniform() * 5.0));
    const auto gammas = filter_node_values(filters, g);
    const auto n = static_cast<double>(filters.size());

    const double h = hellinger_n(lam, lam0, gammas);
    double capped = 0.0;
    double sq_sum = 0.0;
    double log_bound = 0.0;
    for (const auto& gn : gammas) {
      const double term = sqrt_l2_term(lam, lam0, gn);
      capped += std::min(term, 1.0);
      sq_sum += term * term;
      double s = 0.0;
      for (std::size_t k = 0; k < gn.size(); ++k) {
        const double big = std::max(lam.values[k], lam0.values[k]);
        const double lg = std::log(lam.values[k] / lam0.values[k]);
        s += gn[k] * big * lg * lg;
      }
      log_bound += s * g.cell_volume();
    }
    capped /= n;
    sq_sum /= n;
    log_bound /= (4.0 * n);

    // lower/upper sandwich around h_n
    CHECK(h >= capped / std::sqrt(2.0) - slack);
    CHECK(h <= std::sqrt(2.0) * capped + slack);

    // KL bounded by 3x the squared root-L2 average plus the variance term
    const double kl = kl_n(lam, lam0, gammas);
    const double v = var_n(lam, lam0, gammas);
    CHECK(kl <= 3.0 * sq_sum + v + slack);

    // squared root-L2 average bounded by the max-weighted squared log
    CHECK(sq_sum <= log_bound + slack);

    // hellinger symmetry
    CHECK(hellinger_n(lam0, lam, gammas) == doctest::Approx(h).epsilon(1e-12));

    // removing the filters never decreases the sup norm average
    const std::vector<FilterSpec> ones(filters.size(), FilterSpec::constant(1.0));
    CHECK(gamma_inf(lam, lam0, filter_node_values(ones, g)) >=
          gamma_inf(lam, lam0, gammas) - slack);
  }
}

TEST_CASE("square difference bound for uniformly close fields") {
  // ||w1 - w2||_inf <= c implies ||w1^2 - w2^2||_inf <= 2c ||w2||_inf + c^2,
  // exactly representable with per-cell-constant fields.
  Rng rng(55);
  Grid g(1, 32);
  for (int trial = 0; trial < 300; ++trial) {
    const auto w2 = random_field(g, rng, -3.0, 3.0);
    const double c = rng.uniform(0.01, 2.0);
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = w2.values[k] + rng.uniform(-c, c);
    const GridField w1(g, v);
    REQUIRE(sup_diff(w1, w2) <= c);
    std::vector<double> sq1(g.size());
    std::vector<double> sq2(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      sq1[k] = w1.values[k] * w1.values[k];
      sq2[k] = w2.values[k] * w2.values[k];
    }
    double sup_w2 = 0.0;
    for (double x : w2.values) sup_w2 = std::max(sup_w2, std::abs(x));
    CHECK(sup_diff(GridField(g, sq1), GridField(g, sq2)) <= 2.0 * c * sup_w2 + c * c + 1e-12);
  }
}

TEST_CASE("monte carlo hellinger agrees with the closed form") {
  Grid g(1, 16);
  const auto four = GridField::constant(g, 4.0);
  const auto one = GridField::constant(g, 1.0);

  // identical rates: estimate ~ 0
  {
    Rng rng(8);
    const auto mc = monte_carlo_hellinger(four, four, {FilterSpec::constant(1.0)}, 20000, rng);
    CHECK(std::abs(mc.estimate) <= 3.0 * std::max(mc.std_error, 1e-12));
  }

  // constant case: h^2 = 2(1 - e^{-1/2})
  {
    Rng rng(9);
    const auto mc = monte_carlo_hellinger(four, one, {FilterSpec::constant(1.0)}, 100000, rng);
    CHECK(std::abs(mc.estimate - 0.7869386805747332) < 3.0 * mc.std_error);
    CHECK(mc.std_error < 0.01);
  }

  // two filters {1, 0.25}: compare against the deterministic value
  {
    Rng rng(10);
    const std::vector<FilterSpec> filters{FilterSpec::constant(1.0), FilterSpec::constant(0.25)};
    const double h = hellinger_n(four, one, filters);
    const auto mc = monte_carlo_hellinger(four, one, filters, 100000, rng);
    CHECK(std::abs(mc.estimate - h * h) < 3.0 * mc.std_error);
  }
}

TEST_CASE("distance report bundles the six columns") {
  Grid g(1, 32);
  const auto four = GridField::constant(g, 4.0);
  const auto one = GridField::constant(g, 1.0);
  const auto r = distance_report(four, one, {FilterSpec::constant(1.0)});
  CHECK(r.gamma_inf == doctest::Approx(3.0));
  CHECK(r.gamma_l2 == doctest::Approx(3.0));
  CHECK(r.gamma_sqrt_l2 == doctest::Approx(1.0));
  CHECK(r.hellinger == doctest::Approx(0.887095643419994).epsilon(1e-9));
  CHECK(r.kl == doctest::Approx(1.6137056388801094).epsilon(1e-9));
  CHECK(r.variance == doctest::Approx(1.9218120556728056).epsilon(1e-9));
  CHECK(r.hellinger <= std::sqrt(2.0));
}
