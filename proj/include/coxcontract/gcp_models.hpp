#pragma once

// The two prior-model links (SGCP: lamstar * sigmoid(g), QGCP: g^2), the
// filtered-data log-likelihood, and the Gamma tail check on the lamstar
// hyperprior.
//
// Likelihood convention: sum_j [ sum_{x in X_j} log(gamma_j(x) rate(x))
// - integral gamma_j rate ], additive constants independent of the rate
// dropped. Configurations with zero likelihood return -infinity.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "coxcontract/gp_prior.hpp"
#include "coxcontract/grid.hpp"
#include "coxcontract/point_process.hpp"
#include "coxcontract/special_functions.hpp"

namespace coxcontract {

enum class ModelKind { sgcp, qgcp };

inline const char* model_name(ModelKind k) { return k == ModelKind::sgcp ? "sgcp" : "qgcp"; }

struct GammaDistSpec {
  double shape = 2.0;
  double rate = 1.0;

  void validate() const {
    if (!(shape > 0.0 && rate > 0.0))
      throw std::invalid_argument("GammaDistSpec: shape and rate must be positive");
  }
  double mean() const { return shape / rate; }
};

struct ModelSpec {
  ModelKind kind = ModelKind::sgcp;
  std::optional<GammaDistSpec> lamstar_prior;  // SGCP only
  LengthscalePrior lengthscale_prior;
  double kernel_jitter = 1e-8;

  void validate() const {
    lengthscale_prior.validate();
    if (!(kernel_jitter > 0.0)) throw std::invalid_argument("ModelSpec: jitter must be positive");
    if (kind == ModelKind::sgcp) {
      if (!lamstar_prior) throw std::invalid_argument("ModelSpec: SGCP requires a lamstar prior");
      lamstar_prior->validate();
    } else if (lamstar_prior) {
      throw std::invalid_argument("ModelSpec: QGCP forbids a lamstar prior");
    }
  }
};

/// One point of the latent space: field g on the grid, inverse lengthscale l,
/// and (SGCP only) the rate ceiling lamstar.
struct LatentState {
  GridField g;
  double l = 1.0;
  std::optional<double> lamstar;

  void validate_for(const ModelSpec& model) const {
    if (!(l > 0.0)) throw std::invalid_argument("LatentState: l must be positive");
    const bool want = model.kind == ModelKind::sgcp;
    if (want != lamstar.has_value())
      throw std::invalid_argument("LatentState: lamstar present iff model is SGCP");
    if (lamstar && !(*lamstar > 0.0))
      throw std::invalid_argument("LatentState: lamstar must be positive");
  }
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Nodewise link: SGCP -> lamstar * sigmoid(g); QGCP -> g^2.
inline GridField link_rate(const LatentState& state, const ModelSpec& model) {
  model.validate();
  state.validate_for(model);
  std::vector<double> rate(state.g.values.size());
  if (model.kind == ModelKind::sgcp) {
    const double peak = *state.lamstar;
    for (std::size_t k = 0; k < rate.size(); ++k) rate[k] = peak * sigmoid(state.g.values[k]);
  } else {
    for (std::size_t k = 0; k < rate.size(); ++k) rate[k] = state.g.values[k] * state.g.values[k];
  }
  return GridField(state.g.grid, std::move(rate));
}

inline double log_likelihood(const GridField& rate, const std::vector<Realisation>& data,
                             const std::vector<FilterSpec>& filters) {
  validate_rate(rate, "log_likelihood");
  double total = 0.0;
  for (const auto& realisation : data) {
    const int j = realisation.filter_index;
    if (j < 1 || static_cast<std::size_t>(j) > filters.size())
      throw std::out_of_range("log_likelihood: filter index " + std::to_string(j) +
                              " outside 1.." + std::to_string(filters.size()));
    const FilterSpec& gamma = filters[static_cast<std::size_t>(j - 1)];
    for (std::size_t i = 0; i < realisation.observed.size(); ++i) {
      const auto x = realisation.observed.point(i);
      const double value = gamma(x) * rate.at_point(x);
      if (value <= 0.0) return -std::numeric_limits<double>::infinity();
      total += std::log(value);
    }
    // Compensator integral of gamma_j * rate.
    const auto gamma_nodes = gamma.node_values(rate.grid);
    double s = 0.0;
    for (std::size_t k = 0; k < gamma_nodes.size(); ++k) s += gamma_nodes[k] * rate.values[k];
    total -= s * rate.grid.cell_volume();
  }
  return total;
}

/// True iff the Gamma(shape,rate) upper tail is dominated by
/// C0 * exp(-c0 * t^kappa) at every threshold t.
inline bool lamstar_tail_check(const GammaDistSpec& prior, double c0, double C0, double kappa,
                               std::span<const double> thresholds) {
  prior.validate();
  if (!(c0 > 0.0 && C0 > 0.0 && kappa > 0.0))
    throw std::invalid_argument("lamstar_tail_check: constants must be positive");
  for (double t : thresholds) {
    const double tail = gamma_upper_tail(prior.shape, prior.rate, t);
    const double bound = t <= 0.0 ? C0 : C0 * std::exp(-c0 * std::pow(t, kappa));
    // boundary equality (e.g. an exactly exponential tail) up to rounding
    if (tail > bound && tail - bound > 1e-9 * std::max(tail, bound)) return false;
  }
  return true;
}

}  // namespace coxcontract
