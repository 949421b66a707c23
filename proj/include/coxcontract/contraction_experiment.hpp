#pragma once

// The measured side of the contraction statements: simulate datasets of
// growing n, fit the posterior, and record the mass outside sqrt(2) M eps_n
// balls plus the posterior median distance, per schedule entry, averaged
// over replications. Cells (n, replication) are independent and parallelize;
// each derives its own streams from the root seed, so the curve is
// bit-reproducible regardless of worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "coxcontract/contraction.hpp"
#include "coxcontract/inference.hpp"
#include "coxcontract/metrics.hpp"
#include "coxcontract/parallel.hpp"
#include "coxcontract/point_process.hpp"

namespace coxcontract {

using FilterFamilyFn = std::function<std::vector<FilterSpec>(int n)>;

struct ContractionSetup {
  ModelSpec model;
  GridField lambda0 = GridField::constant(Grid(1, 1), 1.0);
  FilterFamilyFn filter_family;
  std::vector<int> n_schedule;
  double M = 1.0;
  double alpha = 1.0;
  McmcConfig mcmc;
  int replications = 1;
  std::uint64_t root_seed = 0;
  unsigned workers = 1;
  BallMetric metric = BallMetric::gamma_sqrt_l2;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median_of: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Curve plus the six-column distance report of the posterior mean rate for
/// every (schedule row, replication) cell.
struct ContractionRun {
  ContractionCurve curve;
  std::vector<std::vector<DistanceReport>> mean_rate_reports;
};

inline ContractionRun run_contraction_experiment_full(const ContractionSetup& setup) {
  if (setup.n_schedule.empty())
    throw std::invalid_argument("run_contraction_experiment: empty schedule");
  for (std::size_t i = 1; i < setup.n_schedule.size(); ++i)
    if (setup.n_schedule[i] <= setup.n_schedule[i - 1])
      throw std::invalid_argument("run_contraction_experiment: schedule must increase");
  if (!(setup.M > 0.0)) throw std::invalid_argument("run_contraction_experiment: M must be positive");
  if (setup.replications < 1)
    throw std::invalid_argument("run_contraction_experiment: replications must be >= 1");
  setup.model.validate();

  const std::size_t n_rows = setup.n_schedule.size();
  const auto reps = static_cast<std::size_t>(setup.replications);
  double sup_lambda0 = 0.0;
  for (double v : setup.lambda0.values) sup_lambda0 = std::max(sup_lambda0, v);

  ContractionRun run;
  ContractionCurve& curve = run.curve;
  curve.rows.resize(n_rows);
  curve.median_by_replication.assign(n_rows, std::vector<double>(reps, 0.0));
  curve.mass_by_replication.assign(n_rows, std::vector<double>(reps, 0.0));
  run.mean_rate_reports.assign(n_rows, std::vector<DistanceReport>(reps));

  const int d = setup.lambda0.grid.dimension();
  parallel_for_index(n_rows * reps, setup.workers, [&](std::size_t cell) {
    const std::size_t row = cell / reps;
    const std::size_t rep = cell % reps;
    const int n = setup.n_schedule[row];
    const double radius =
        std::sqrt(2.0) * setup.M * epsilon_n(setup.model.kind, n, setup.alpha, d, sup_lambda0);

    const auto filters = setup.filter_family(n);
    if (static_cast<int>(filters.size()) != n)
      throw std::invalid_argument("run_contraction_experiment: filter family size mismatch");
    const std::uint64_t data_seed = Rng::derive_seed(setup.root_seed, "contract-data", cell);
    const auto data = simulate_dataset(setup.lambda0, filters, data_seed);

    McmcConfig cfg = setup.mcmc;
    cfg.seed = Rng::derive_seed(setup.root_seed, "contract-mcmc", cell);
    cfg.workers = 1;
    const PosteriorSamples post = run_mcmc(data, filters, setup.model, setup.lambda0.grid, cfg);

    const auto dists =
        posterior_distances(post, setup.model, setup.lambda0, filters, setup.metric);
    std::size_t outside = 0;
    for (double v : dists)
      if (v >= radius) ++outside;
    curve.mass_by_replication[row][rep] =
        static_cast<double>(outside) / static_cast<double>(dists.size());
    curve.median_by_replication[row][rep] = median_of(dists);

    std::vector<double> mean_rate(setup.lambda0.grid.size(), 0.0);
    for (const auto& state : post.samples) {
      const GridField r = link_rate(state, setup.model);
      for (std::size_t k = 0; k < mean_rate.size(); ++k) mean_rate[k] += r.values[k];
    }
    for (auto& v : mean_rate) v /= static_cast<double>(post.samples.size());
    run.mean_rate_reports[row][rep] =
        distance_report(GridField(setup.lambda0.grid, std::move(mean_rate)), setup.lambda0, filters);
  });

  for (std::size_t row = 0; row < n_rows; ++row) {
    const int n = setup.n_schedule[row];
    ContractionRow& r = curve.rows[row];
    r.n = n;
    r.radius = std::sqrt(2.0) * setup.M * epsilon_n(setup.model.kind, n, setup.alpha, d, sup_lambda0);
    r.replications = setup.replications;
    double mass = 0.0;
    double med = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      mass += curve.mass_by_replication[row][rep];
      med += curve.median_by_replication[row][rep];
    }
    r.mass_outside = mass / static_cast<double>(reps);
    r.median_distance = med / static_cast<double>(reps);
  }
  return run;
}

inline ContractionCurve run_contraction_experiment(const ContractionSetup& setup) {
  return run_contraction_experiment_full(setup).curve;
}

/// Qualitative comparison of the two models' median distances at one n.
struct ModelOrderingReport {
  double sgcp_median = 0.0;
  double qgcp_median = 0.0;
  double sgcp_ci_lo = 0.0, sgcp_ci_hi = 0.0;
  double qgcp_ci_lo = 0.0, qgcp_ci_hi = 0.0;
  bool intervals_overlap = false;
  bool conclusive = false;       // intervals disjoint
  bool qgcp_not_tighter = false; // qgcp median >= sgcp median
};

/// Percentile-bootstrap CI of the median (deterministic for a fixed seed).
inline std::pair<double, double> bootstrap_median_ci(const std::vector<double>& values,
                                                     double level, int resamples,
                                                     std::uint64_t seed) {
  if (values.size() < 2) throw std::invalid_argument("bootstrap_median_ci: need >= 2 values");
  Rng rng(seed);
  std::vector<double> medians(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (auto& med : medians) {
    for (auto& v : draw)
      v = values[static_cast<std::size_t>(rng.uniform() * static_cast<double>(values.size()))];
    med = median_of(draw);
  }
  std::sort(medians.begin(), medians.end());
  const double tail = (1.0 - level) / 2.0;
  const auto lo = static_cast<std::size_t>(tail * (resamples - 1));
  const auto hi = static_cast<std::size_t>((1.0 - tail) * (resamples - 1));
  return {medians[lo], medians[hi]};
}

inline ModelOrderingReport compare_model_ordering(const std::vector<double>& sgcp_medians,
                                                  const std::vector<double>& qgcp_medians,
                                                  std::uint64_t seed) {
  ModelOrderingReport r;
  r.sgcp_median = median_of(sgcp_medians);
  r.qgcp_median = median_of(qgcp_medians);
  std::tie(r.sgcp_ci_lo, r.sgcp_ci_hi) = bootstrap_median_ci(sgcp_medians, 0.95, 2000, seed);
  std::tie(r.qgcp_ci_lo, r.qgcp_ci_hi) = bootstrap_median_ci(qgcp_medians, 0.95, 2000, seed + 1);
  r.intervals_overlap = !(r.sgcp_ci_hi < r.qgcp_ci_lo || r.qgcp_ci_hi < r.sgcp_ci_lo);
  r.conclusive = !r.intervals_overlap;
  r.qgcp_not_tighter = r.qgcp_median >= r.sgcp_median;
  return r;
}

}  // namespace coxcontract
