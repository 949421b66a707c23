#pragma once

// Posterior sampling for both models on the grid.
//
// Update cycle per iteration:
//   (i)   latent field: slice sampling on the ellipse through the current
//         field and a fresh prior draw (likelihood-only acceptance with a
//         shrinking bracket; leaves the prior-times-likelihood invariant),
//   (ii)  inverse lengthscale: random walk on log l in whitened coordinates
//         (g = L_l z with z fixed), so the acceptance ratio needs only the
//         likelihood and the lengthscale hyperprior,
//   (iii) SGCP only: random walk on log lamstar with its Gamma prior.
//
// Chains run on independent derived streams and are merged in chain order,
// so results are bit-reproducible for a fixed seed and config.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxcontract/gcp_models.hpp"
#include "coxcontract/gp_prior.hpp"
#include "coxcontract/grid.hpp"
#include "coxcontract/log.hpp"
#include "coxcontract/metrics.hpp"
#include "coxcontract/parallel.hpp"
#include "coxcontract/point_process.hpp"
#include "coxcontract/rng.hpp"
#include "coxcontract/special_functions.hpp"

namespace coxcontract {

struct McmcConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 10;
  int chains = 4;
  int ellipse_max_shrink = 64;
  double lengthscale_step = 0.5;
  double lamstar_step = 0.4;
  std::uint64_t seed = 0;
  bool ablate_lengthscale_update = false;  // negative control for calibration runs
  unsigned workers = 1;                    // chains run in parallel up to this

  void validate() const {
    if (iterations <= 0) throw std::invalid_argument("McmcConfig: iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations)
      throw std::invalid_argument("McmcConfig: need 0 <= burn_in < iterations");
    if (thin < 1) throw std::invalid_argument("McmcConfig: thin must be >= 1");
    if (chains < 1) throw std::invalid_argument("McmcConfig: chains must be >= 1");
    if (ellipse_max_shrink < 1)
      throw std::invalid_argument("McmcConfig: ellipse_max_shrink must be >= 1");
    if (!(lengthscale_step > 0.0) || !(lamstar_step > 0.0))
      throw std::invalid_argument("McmcConfig: step sizes must be positive");
  }

  int samples_per_chain() const { return (iterations - burn_in) / thin; }
};

struct BlockAcceptance {
  double latent_field = 0.0;
  double lengthscale = 0.0;
  double lamstar = 0.0;
};

struct PosteriorSamples {
  std::vector<LatentState> samples;  // chain-major
  std::vector<int> chain_ids;
  std::vector<BlockAcceptance> per_chain;
};

namespace detail {

/// Data reduced to what the likelihood needs: per-point (node, gamma at the
/// exact location) and the aggregated compensator weights sum_j gamma_j per
/// node. log L(rate) = sum_pts log(gamma rate[node]) - vol * sum_k w_k rate_k.
class LikelihoodCache {
 public:
  LikelihoodCache(const Grid& grid, const std::vector<Realisation>& data,
                  const std::vector<FilterSpec>& filters)
      : volume_(grid.cell_volume()), weights_(grid.size(), 0.0) {
    for (const auto& f : filters) {
      const auto nodes = f.node_values(grid);
      for (std::size_t k = 0; k < nodes.size(); ++k) weights_[k] += nodes[k];
    }
    for (const auto& realisation : data) {
      const int j = realisation.filter_index;
      if (j < 1 || static_cast<std::size_t>(j) > filters.size())
        throw std::out_of_range("run_mcmc: filter index " + std::to_string(j) + " outside 1.." +
                                std::to_string(filters.size()));
      const FilterSpec& gamma = filters[static_cast<std::size_t>(j - 1)];
      for (std::size_t i = 0; i < realisation.observed.size(); ++i) {
        const auto x = realisation.observed.point(i);
        point_nodes_.push_back(grid.nearest_node(x));
        point_gammas_.push_back(gamma(x));
      }
    }
  }

  double log_likelihood(std::span<const double> rate) const {
    double total = 0.0;
    for (std::size_t p = 0; p < point_nodes_.size(); ++p) {
      const double v = point_gammas_[p] * rate[point_nodes_[p]];
      if (v <= 0.0) return -std::numeric_limits<double>::infinity();
      total += std::log(v);
    }
    double comp = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) comp += weights_[k] * rate[k];
    return total - comp * volume_;
  }

 private:
  double volume_;
  std::vector<double> weights_;
  std::vector<std::size_t> point_nodes_;
  std::vector<double> point_gammas_;
};

inline void link_rate_values(ModelKind kind, std::span<const double> g, double lamstar,
                             std::span<double> rate) {
  if (kind == ModelKind::sgcp) {
    for (std::size_t k = 0; k < g.size(); ++k) rate[k] = lamstar * sigmoid(g[k]);
  } else {
    for (std::size_t k = 0; k < g.size(); ++k) rate[k] = g[k] * g[k];
  }
}

struct ChainResult {
  std::vector<LatentState> samples;
  BlockAcceptance acceptance;
};

inline ChainResult run_chain(const LikelihoodCache& lik, const ModelSpec& model, const Grid& grid,
                             const McmcConfig& cfg, int chain_id) {
  Rng rng = Rng::derive(cfg.seed, "chain", static_cast<std::uint64_t>(chain_id));
  const std::size_t nodes = grid.size();
  const int d = grid.dimension();

  double l = lengthscale_median(model.lengthscale_prior, d);
  GpCholesky chol = gp_cholesky(grid, KernelSpec{l, model.kernel_jitter});
  std::vector<double> z(nodes);
  for (auto& v : z) v = rng.normal();
  double lamstar = model.kind == ModelKind::sgcp ? model.lamstar_prior->mean() : 1.0;

  std::vector<double> g(nodes);
  std::vector<double> rate(nodes);
  chol.factor.multiply(z, g);
  link_rate_values(model.kind, g, lamstar, rate);
  double loglik = lik.log_likelihood(rate);
  if (!std::isfinite(loglik))
    throw std::runtime_error("run_mcmc: non-finite log-likelihood at initialization (l=" +
                             std::to_string(l) + ", lamstar=" + std::to_string(lamstar) + ")");

  std::vector<double> nu(nodes);
  std::vector<double> z_prop(nodes);
  std::vector<double> g_prop(nodes);
  std::vector<double> rate_prop(nodes);

  long ess_accepts = 0;
  long ls_accepts = 0;
  long ls_proposals = 0;
  long lam_accepts = 0;
  constexpr int kWarnWindow = 500;
  int window_ls_accepts = 0;
  bool warned = false;

  ChainResult out;
  out.samples.reserve(static_cast<std::size_t>(cfg.samples_per_chain()));

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    // (i) Elliptical slice update of the whitened field.
    {
      for (auto& v : nu) v = rng.normal();
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      const double log_y = loglik + std::log(u);
      double theta = rng.uniform(0.0, 6.283185307179586477);
      double lo = theta - 6.283185307179586477;
      double hi = theta;
      bool accepted = false;
      for (int k = 0; k < cfg.ellipse_max_shrink; ++k) {
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (std::size_t i = 0; i < nodes; ++i) z_prop[i] = z[i] * ct + nu[i] * st;
        chol.factor.multiply(z_prop, g_prop);
        link_rate_values(model.kind, g_prop, lamstar, rate_prop);
        const double cand = lik.log_likelihood(rate_prop);
        if (cand > log_y) {
          z.swap(z_prop);
          g.swap(g_prop);
          rate.swap(rate_prop);
          loglik = cand;
          accepted = true;
          break;
        }
        if (theta < 0.0)
          lo = theta;
        else
          hi = theta;
        theta = rng.uniform(lo, hi);
      }
      if (accepted) ++ess_accepts;
    }

    // (ii) Random walk on log l; field re-expressed through fixed z.
    if (!cfg.ablate_lengthscale_update) {
      ++ls_proposals;
      const double l_prop = l * std::exp(cfg.lengthscale_step * rng.normal());
      GpCholesky chol_prop = gp_cholesky(grid, KernelSpec{l_prop, model.kernel_jitter});
      chol_prop.factor.multiply(z, g_prop);
      link_rate_values(model.kind, g_prop, lamstar, rate_prop);
      const double cand = lik.log_likelihood(rate_prop);
      const double log_ratio = cand - loglik +
                               lengthscale_log_density(model.lengthscale_prior, d, l_prop) -
                               lengthscale_log_density(model.lengthscale_prior, d, l) +
                               std::log(l_prop) - std::log(l);
      if (std::isfinite(log_ratio) && std::log(rng.uniform()) < log_ratio) {
        l = l_prop;
        chol = std::move(chol_prop);
        g.swap(g_prop);
        rate.swap(rate_prop);
        loglik = cand;
        ++ls_accepts;
        ++window_ls_accepts;
      }
      if (iter % kWarnWindow == 0) {
        if (window_ls_accepts == 0 && !warned) {
          log_line("run_mcmc: zero lengthscale acceptance over a " +
                   std::to_string(kWarnWindow) + "-iteration window (chain " +
                   std::to_string(chain_id) + ")");
          warned = true;
        }
        window_ls_accepts = 0;
      }
    }

    // (iii) SGCP: random walk on log lamstar.
    if (model.kind == ModelKind::sgcp) {
      const double lam_prop = lamstar * std::exp(cfg.lamstar_step * rng.normal());
      link_rate_values(model.kind, g, lam_prop, rate_prop);
      const double cand = lik.log_likelihood(rate_prop);
      const auto& pr = *model.lamstar_prior;
      const double log_prior_ratio = (pr.shape - 1.0) * (std::log(lam_prop) - std::log(lamstar)) -
                                     pr.rate * (lam_prop - lamstar);
      const double log_ratio =
          cand - loglik + log_prior_ratio + std::log(lam_prop) - std::log(lamstar);
      if (std::isfinite(log_ratio) && std::log(rng.uniform()) < log_ratio) {
        lamstar = lam_prop;
        rate.swap(rate_prop);
        loglik = cand;
        ++lam_accepts;
      }
    }

    if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      LatentState state{GridField(grid, g), l, std::nullopt};
      if (model.kind == ModelKind::sgcp) state.lamstar = lamstar;
      out.samples.push_back(std::move(state));
    }
  }

  const double iters = static_cast<double>(cfg.iterations);
  out.acceptance.latent_field = static_cast<double>(ess_accepts) / iters;
  out.acceptance.lengthscale =
      ls_proposals > 0 ? static_cast<double>(ls_accepts) / static_cast<double>(ls_proposals) : 0.0;
  out.acceptance.lamstar =
      model.kind == ModelKind::sgcp ? static_cast<double>(lam_accepts) / iters : 0.0;
  return out;
}

}  // namespace detail

inline PosteriorSamples run_mcmc(const std::vector<Realisation>& data,
                                 const std::vector<FilterSpec>& filters, const ModelSpec& model,
                                 const Grid& grid, const McmcConfig& cfg) {
  cfg.validate();
  model.validate();
  const detail::LikelihoodCache lik(grid, data, filters);

  std::vector<detail::ChainResult> results(static_cast<std::size_t>(cfg.chains));
  parallel_for_index(static_cast<std::size_t>(cfg.chains), cfg.workers, [&](std::size_t c) {
    results[c] = detail::run_chain(lik, model, grid, cfg, static_cast<int>(c));
  });

  PosteriorSamples out;
  out.samples.reserve(static_cast<std::size_t>(cfg.chains) *
                      static_cast<std::size_t>(cfg.samples_per_chain()));
  for (int c = 0; c < cfg.chains; ++c) {
    auto& chain = results[static_cast<std::size_t>(c)];
    out.per_chain.push_back(chain.acceptance);
    for (auto& s : chain.samples) {
      out.samples.push_back(std::move(s));
      out.chain_ids.push_back(c);
    }
  }
  return out;
}

enum class BallMetric { gamma_sqrt_l2, hellinger };

/// Fraction of posterior samples whose linked rate is at metric-distance
/// >= radius from lambda0.
inline double posterior_mass_outside(const PosteriorSamples& samples, const ModelSpec& model,
                                     const GridField& lambda0,
                                     const std::vector<FilterSpec>& filters, double radius,
                                     BallMetric metric) {
  if (samples.samples.empty()) throw std::invalid_argument("posterior_mass_outside: no samples");
  if (!(radius >= 0.0)) throw std::invalid_argument("posterior_mass_outside: radius must be >= 0");
  const auto gammas = filter_node_values(filters, lambda0.grid);
  std::size_t outside = 0;
  for (const auto& state : samples.samples) {
    const GridField rate = link_rate(state, model);
    const double dist = metric == BallMetric::gamma_sqrt_l2 ? gamma_sqrt_l2(rate, lambda0, gammas)
                                                            : hellinger_n(rate, lambda0, gammas);
    if (dist >= radius) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(samples.samples.size());
}

/// Distances of every posterior sample's rate to lambda0 under the ball metric.
inline std::vector<double> posterior_distances(const PosteriorSamples& samples,
                                               const ModelSpec& model, const GridField& lambda0,
                                               const std::vector<FilterSpec>& filters,
                                               BallMetric metric) {
  const auto gammas = filter_node_values(filters, lambda0.grid);
  std::vector<double> out;
  out.reserve(samples.samples.size());
  for (const auto& state : samples.samples) {
    const GridField rate = link_rate(state, model);
    out.push_back(metric == BallMetric::gamma_sqrt_l2 ? gamma_sqrt_l2(rate, lambda0, gammas)
                                                      : hellinger_n(rate, lambda0, gammas));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation-based calibration
// ---------------------------------------------------------------------------

struct SbcTable {
  std::vector<std::string> names;        // l, lamstar (SGCP), rate@<node>...
  std::vector<std::vector<int>> ranks;   // per name, per replication
  int posterior_draws = 0;
  std::vector<std::size_t> probe_nodes;
};

/// For each replication: draw a state from the prior, simulate a dataset,
/// run the sampler, and record the rank of each true scalar summary among
/// the posterior draws. Calibrated samplers give uniform ranks on
/// {0..posterior_draws}.
inline SbcTable simulation_based_calibration(const ModelSpec& model, const Grid& grid,
                                             const std::vector<FilterSpec>& filters,
                                             const McmcConfig& config, int sbc_replications,
                                             std::vector<std::size_t> probe_nodes = {},
                                             unsigned workers = 1) {
  model.validate();
  config.validate();
  if (sbc_replications < 100)
    throw std::invalid_argument("simulation_based_calibration: need >= 100 replications");
  if (probe_nodes.empty())
    probe_nodes = {grid.size() / 4, grid.size() / 2, 3 * grid.size() / 4};
  for (std::size_t p : probe_nodes)
    if (p >= grid.size())
      throw std::invalid_argument("simulation_based_calibration: probe node out of range");

  SbcTable table;
  table.probe_nodes = probe_nodes;
  table.names.push_back("l");
  if (model.kind == ModelKind::sgcp) table.names.push_back("lamstar");
  for (std::size_t p : probe_nodes) table.names.push_back("rate@" + std::to_string(p));
  table.posterior_draws = config.samples_per_chain() * config.chains;
  table.ranks.assign(table.names.size(),
                     std::vector<int>(static_cast<std::size_t>(sbc_replications), 0));

  const int d = grid.dimension();
  parallel_for_index(static_cast<std::size_t>(sbc_replications), workers, [&](std::size_t rep) {
    Rng rng = Rng::derive(config.seed, "sbc", rep);
    const double l_true = sample_lengthscale(model.lengthscale_prior, d, rng);
    const GpCholesky chol = gp_cholesky(grid, KernelSpec{l_true, model.kernel_jitter});
    const GridField g_true = sample_gp(chol, rng);
    LatentState truth{g_true, l_true, std::nullopt};
    if (model.kind == ModelKind::sgcp)
      truth.lamstar = rng.gamma(model.lamstar_prior->shape, model.lamstar_prior->rate);
    const GridField rate_true = link_rate(truth, model);

    const auto data = simulate_dataset(rate_true, filters, rng.next_u64());
    McmcConfig rep_cfg = config;
    rep_cfg.seed = rng.next_u64();
    rep_cfg.workers = 1;
    const PosteriorSamples post = run_mcmc(data, filters, model, grid, rep_cfg);

    std::vector<double> truths;
    truths.push_back(l_true);
    if (model.kind == ModelKind::sgcp) truths.push_back(*truth.lamstar);
    for (std::size_t p : probe_nodes) truths.push_back(rate_true.values[p]);

    std::vector<int> below(truths.size(), 0);
    for (const auto& state : post.samples) {
      std::size_t idx = 0;
      if (state.l < truths[idx]) ++below[idx];
      ++idx;
      if (model.kind == ModelKind::sgcp) {
        if (*state.lamstar < truths[idx]) ++below[idx];
        ++idx;
      }
      for (std::size_t p : probe_nodes) {
        const double rv = model.kind == ModelKind::sgcp ? *state.lamstar * sigmoid(state.g.values[p])
                                                        : state.g.values[p] * state.g.values[p];
        if (rv < truths[idx]) ++below[idx];
        ++idx;
      }
    }
    for (std::size_t s = 0; s < below.size(); ++s) table.ranks[s][rep] = below[s];
  });
  return table;
}

struct UniformityTest {
  double statistic = 0.0;
  double p_value = 0.0;
  int bins = 0;
};

/// Chi-square test of rank uniformity over {0..n_draws} with equal-width bins.
inline UniformityTest chi_square_uniformity(const std::vector<int>& ranks, int n_draws, int bins) {
  if (bins < 2) throw std::invalid_argument("chi_square_uniformity: need >= 2 bins");
  if (ranks.empty()) throw std::invalid_argument("chi_square_uniformity: no ranks");
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (int r : ranks) {
    auto b = static_cast<std::size_t>((static_cast<long long>(r) * bins) / (n_draws + 1));
    if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
    ++counts[b];
  }
  const double expected = static_cast<double>(ranks.size()) / bins;
  double stat = 0.0;
  for (int c : counts) {
    const double dv = c - expected;
    stat += dv * dv / expected;
  }
  return UniformityTest{stat, chi_square_sf(stat, bins - 1), bins};
}

/// Classic Gelman-Rubin potential scale reduction over per-chain draws.
inline double potential_scale_reduction(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("potential_scale_reduction: need >= 2 chains");
  const auto m = static_cast<double>(chains.size());
  const auto n = static_cast<double>(chains.front().size());
  for (const auto& c : chains)
    if (c.size() != chains.front().size() || c.size() < 2)
      throw std::invalid_argument("potential_scale_reduction: chains must share a length >= 2");
  std::vector<double> means;
  double grand = 0.0;
  for (const auto& c : chains) {
    double s = 0.0;
    for (double v : c) s += v;
    means.push_back(s / n);
    grand += s / n;
  }
  grand /= m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  double w = 0.0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    double s = 0.0;
    for (double v : chains[c]) s += (v - means[c]) * (v - means[c]);
    w += s / (n - 1.0);
  }
  w /= m;
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

}  // namespace coxcontract
