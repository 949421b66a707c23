#pragma once

// Filter-averaged distances between rate functions and the deterministic
// Hellinger / KL / variance expressions for filtered NHPP laws:
//
//   gamma_inf      (1/n) sum_j sup |lam g_j - lam0 g_j|
//   gamma_l2       (1/n) sum_j ||lam g_j - lam0 g_j||_2
//   gamma_sqrt_l2  (1/n) sum_j ||sqrt(lam g_j) - sqrt(lam0 g_j)||_2
//   h_n^2          (1/n) sum_j 2 (1 - exp(-1/2 int (sqrt(lam g_j)-sqrt(lam0 g_j))^2))
//   k_n            (1/n) sum_j [ int (lam - lam0) g_j + int lam0 g_j log(lam0/lam) ]
//   v_n            (1/n) sum_j int lam0 g_j log^2(lam0/lam)
//
// with ||f||_2 = sqrt(int f^2). Argument convention: (candidate, truth); the
// truth generates expectations in k_n/v_n, and +infinity is a representable
// value (candidate vanishing where the truth is positive). Summation is in
// fixed filter order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "coxcontract/gcp_models.hpp"
#include "coxcontract/grid.hpp"
#include "coxcontract/point_process.hpp"
#include "coxcontract/rng.hpp"

namespace coxcontract {

/// Nodewise gamma values for each filter; precompute once for hot loops.
inline std::vector<std::vector<double>> filter_node_values(const std::vector<FilterSpec>& filters,
                                                           const Grid& grid) {
  std::vector<std::vector<double>> out;
  out.reserve(filters.size());
  for (const auto& f : filters) out.push_back(f.node_values(grid));
  return out;
}

namespace detail {

inline void require_filters(const std::vector<std::vector<double>>& gammas) {
  if (gammas.empty()) throw std::invalid_argument("metrics: need at least one filter");
}

}  // namespace detail

inline double gamma_inf(const GridField& lam, const GridField& lam0,
                        const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "gamma_inf");
  detail::require_filters(gamma_nodes);
  double total = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      s = std::max(s, std::abs((lam.values[k] - lam0.values[k]) * g[k]));
    total += s;
  }
  return total / static_cast<double>(gamma_nodes.size());
}

inline double gamma_l2(const GridField& lam, const GridField& lam0,
                       const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "gamma_l2");
  detail::require_filters(gamma_nodes);
  const double vol = lam.grid.cell_volume();
  double total = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double dv = (lam.values[k] - lam0.values[k]) * g[k];
      s += dv * dv;
    }
    total += std::sqrt(s * vol);
  }
  return total / static_cast<double>(gamma_nodes.size());
}

inline double gamma_sqrt_l2(const GridField& lam, const GridField& lam0,
                            const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "gamma_sqrt_l2");
  detail::require_filters(gamma_nodes);
  validate_rate(lam, "gamma_sqrt_l2 (candidate)");
  validate_rate(lam0, "gamma_sqrt_l2 (truth)");
  const double vol = lam.grid.cell_volume();
  double total = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double dv = std::sqrt(lam.values[k] * g[k]) - std::sqrt(lam0.values[k] * g[k]);
      s += dv * dv;
    }
    total += std::sqrt(s * vol);
  }
  return total / static_cast<double>(gamma_nodes.size());
}

/// Averaged Hellinger distance h (not squared).
inline double hellinger_n(const GridField& lam, const GridField& lam0,
                          const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "hellinger_n");
  detail::require_filters(gamma_nodes);
  validate_rate(lam, "hellinger_n (candidate)");
  validate_rate(lam0, "hellinger_n (truth)");
  const double vol = lam.grid.cell_volume();
  double h2 = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double dv = std::sqrt(lam.values[k] * g[k]) - std::sqrt(lam0.values[k] * g[k]);
      s += dv * dv;
    }
    h2 += 2.0 * (1.0 - std::exp(-0.5 * s * vol));
  }
  h2 /= static_cast<double>(gamma_nodes.size());
  return std::sqrt(h2);
}

inline double kl_n(const GridField& lam, const GridField& lam0,
                   const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "kl_n");
  detail::require_filters(gamma_nodes);
  validate_rate(lam, "kl_n (candidate)");
  validate_rate(lam0, "kl_n (truth)");
  const double vol = lam.grid.cell_volume();
  double total = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double truth = lam0.values[k] * g[k];
      s += (lam.values[k] - lam0.values[k]) * g[k];
      if (truth > 0.0) {
        if (lam.values[k] <= 0.0) return std::numeric_limits<double>::infinity();
        s += truth * std::log(lam0.values[k] / lam.values[k]);
      }
    }
    total += s * vol;
  }
  return total / static_cast<double>(gamma_nodes.size());
}

inline double var_n(const GridField& lam, const GridField& lam0,
                    const std::vector<std::vector<double>>& gamma_nodes) {
  require_same_grid(lam, lam0, "var_n");
  detail::require_filters(gamma_nodes);
  validate_rate(lam, "var_n (candidate)");
  validate_rate(lam0, "var_n (truth)");
  const double vol = lam.grid.cell_volume();
  double total = 0.0;
  for (const auto& g : gamma_nodes) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double truth = lam0.values[k] * g[k];
      if (truth > 0.0) {
        if (lam.values[k] <= 0.0) return std::numeric_limits<double>::infinity();
        const double lg = std::log(lam0.values[k] / lam.values[k]);
        s += truth * lg * lg;
      }
    }
    total += s * vol;
  }
  return total / static_cast<double>(gamma_nodes.size());
}

// Convenience overloads evaluating filters on the grid first.
inline double gamma_inf(const GridField& lam, const GridField& lam0,
                        const std::vector<FilterSpec>& filters) {
  return gamma_inf(lam, lam0, filter_node_values(filters, lam.grid));
}
inline double gamma_l2(const GridField& lam, const GridField& lam0,
                       const std::vector<FilterSpec>& filters) {
  return gamma_l2(lam, lam0, filter_node_values(filters, lam.grid));
}
inline double gamma_sqrt_l2(const GridField& lam, const GridField& lam0,
                            const std::vector<FilterSpec>& filters) {
  return gamma_sqrt_l2(lam, lam0, filter_node_values(filters, lam.grid));
}
inline double hellinger_n(const GridField& lam, const GridField& lam0,
                          const std::vector<FilterSpec>& filters) {
  return hellinger_n(lam, lam0, filter_node_values(filters, lam.grid));
}
inline double kl_n(const GridField& lam, const GridField& lam0,
                   const std::vector<FilterSpec>& filters) {
  return kl_n(lam, lam0, filter_node_values(filters, lam.grid));
}
inline double var_n(const GridField& lam, const GridField& lam0,
                    const std::vector<FilterSpec>& filters) {
  return var_n(lam, lam0, filter_node_values(filters, lam.grid));
}

struct DistanceReport {
  double gamma_inf = 0.0;
  double gamma_l2 = 0.0;
  double gamma_sqrt_l2 = 0.0;
  double hellinger = 0.0;
  double kl = 0.0;
  double variance = 0.0;
};

inline DistanceReport distance_report(const GridField& lam, const GridField& lam0,
                                      const std::vector<FilterSpec>& filters) {
  const auto gammas = filter_node_values(filters, lam.grid);
  DistanceReport r;
  r.gamma_inf = gamma_inf(lam, lam0, gammas);
  r.gamma_l2 = gamma_l2(lam, lam0, gammas);
  r.gamma_sqrt_l2 = gamma_sqrt_l2(lam, lam0, gammas);
  r.hellinger = hellinger_n(lam, lam0, gammas);
  r.kl = kl_n(lam, lam0, gammas);
  r.variance = var_n(lam, lam0, gammas);
  return r;
}

/// Monte-Carlo estimate of h_n^2: simulate realisations from the truth
/// lam0*gamma_j (per-cell-constant surrogate, matching the quadrature in the
/// deterministic expression) and average 2(1 - sqrt(likelihood ratio)).
/// Independent oracle for hellinger_n.
struct McHellinger {
  double estimate = 0.0;   // of h_n^2
  double std_error = 0.0;  // Monte-Carlo standard error of the estimate
};

inline McHellinger monte_carlo_hellinger(const GridField& lam, const GridField& lam0,
                                         const std::vector<FilterSpec>& filters,
                                         std::size_t replications, Rng& rng) {
  require_same_grid(lam, lam0, "monte_carlo_hellinger");
  if (filters.empty()) throw std::invalid_argument("monte_carlo_hellinger: need filters");
  if (replications < 1) throw std::invalid_argument("monte_carlo_hellinger: replications >= 1");
  validate_rate(lam, "monte_carlo_hellinger (candidate)");
  validate_rate(lam0, "monte_carlo_hellinger (truth)");

  const Grid& grid = lam.grid;
  const double vol = grid.cell_volume();
  const std::size_t n = filters.size();
  double h2 = 0.0;
  double var_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto gnodes = filters[j].node_values(grid);
    std::vector<double> truth_rate(grid.size());
    double compensator = 0.0;  // int (lam - lam0) gamma_j
    for (std::size_t k = 0; k < grid.size(); ++k) {
      truth_rate[k] = lam0.values[k] * gnodes[k];
      compensator += (lam.values[k] - lam0.values[k]) * gnodes[k];
    }
    compensator *= vol;
    const GridField truth_field(grid, std::move(truth_rate));

    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      const PointSet pts = simulate_nhpp(truth_field, rng);
      double log_ratio = -compensator;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t k = grid.nearest_node(pts.point(i));
        if (lam.values[k] <= 0.0) {
          log_ratio = -std::numeric_limits<double>::infinity();
          break;
        }
        log_ratio += std::log(lam.values[k] / lam0.values[k]);
      }
      const double y = 2.0 * (1.0 - std::exp(0.5 * log_ratio));
      const double delta = y - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (y - mean);
    }
    h2 += mean;
    if (replications > 1)
      var_sum += m2 / static_cast<double>(replications - 1) / static_cast<double>(replications);
  }
  McHellinger out;
  out.estimate = h2 / static_cast<double>(n);
  out.std_error = std::sqrt(var_sum) / static_cast<double>(n);
  return out;
}

}  // namespace coxcontract
