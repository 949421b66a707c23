#pragma once

// Squared-exponential GP machinery on the grid: dense covariance, Cholesky
// factorization with jitter escalation, prior draws, and the Gamma hyperprior
// on the inverse lengthscale together with its derived envelope constants.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxcontract/grid.hpp"
#include "coxcontract/log.hpp"
#include "coxcontract/rng.hpp"
#include "coxcontract/special_functions.hpp"

namespace coxcontract {

struct KernelSpec {
  double inverse_lengthscale = 1.0;  // l in exp(-l^2 ||s-s'||^2)
  double jitter = 1e-8;

  void validate() const {
    if (!(inverse_lengthscale > 0.0)) throw std::invalid_argument("KernelSpec: l must be positive");
    if (!(jitter > 0.0)) throw std::invalid_argument("KernelSpec: jitter must be positive");
  }
};

/// Gamma(a,b) prior on l^d (shape a, rate b).
struct LengthscalePrior {
  double a = 2.0;
  double b = 1.0;

  void validate() const {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("LengthscalePrior: a,b must be positive");
  }
};

/// Dense symmetric matrix, row-major.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

/// Lower-triangular Cholesky factor.
class CholeskyFactor {
 public:
  static std::optional<CholeskyFactor> compute(const SymMatrix& m) {
    const std::size_t n = m.size();
    CholeskyFactor f;
    f.n_ = n;
    f.l_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = m(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= f.l_[i * n + k] * f.l_[j * n + k];
        if (i == j) {
          if (!(s > 0.0)) return std::nullopt;
          f.l_[i * n + i] = std::sqrt(s);
        } else {
          f.l_[i * n + j] = s / f.l_[j * n + j];
        }
      }
    }
    return f;
  }

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return l_[i * n_ + j]; }

  /// out = L * z.
  void multiply(std::span<const double> z, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      const double* row = l_.data() + i * n_;
      for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
      out[i] = s;
    }
  }

  /// Solve L w = y (forward substitution).
  void solve_lower(std::span<const double> y, std::span<double> w) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = y[i];
      const double* row = l_.data() + i * n_;
      for (std::size_t k = 0; k < i; ++k) s -= row[k] * w[k];
      w[i] = s / row[i];
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> l_;
};

/// Covariance entry (i,j) = exp(-l^2 ||s_i - s_j||^2) + jitter [i=j].
inline SymMatrix se_covariance(const Grid& grid, const KernelSpec& kernel) {
  kernel.validate();
  const std::size_t n = grid.size();
  const double l2 = kernel.inverse_lengthscale * kernel.inverse_lengthscale;
  SymMatrix cov(n);
  std::vector<double> xi(static_cast<std::size_t>(grid.dimension()));
  std::vector<double> xj(static_cast<std::size_t>(grid.dimension()));
  for (std::size_t i = 0; i < n; ++i) {
    grid.node(i, xi);
    cov(i, i) = 1.0 + kernel.jitter;
    for (std::size_t j = 0; j < i; ++j) {
      grid.node(j, xj);
      double sq = 0.0;
      for (std::size_t a = 0; a < xi.size(); ++a) {
        const double dv = xi[a] - xj[a];
        sq += dv * dv;
      }
      const double v = std::exp(-l2 * sq);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

/// Cholesky of the SE covariance with jitter escalation x10 up to 1e-4.
struct GpCholesky {
  Grid grid;
  CholeskyFactor factor;
  double jitter_used = 0.0;
  int escalations = 0;
};

inline GpCholesky gp_cholesky(const Grid& grid, KernelSpec kernel) {
  kernel.validate();
  int escalations = 0;
  for (double jitter = kernel.jitter; jitter <= 1e-4 * (1.0 + 1e-12); jitter *= 10.0) {
    KernelSpec trial = kernel;
    trial.jitter = jitter;
    if (auto f = CholeskyFactor::compute(se_covariance(grid, trial))) {
      if (escalations > 0)
        log_line("gp_cholesky: jitter escalated to " + std::to_string(jitter) + " at l=" +
                 std::to_string(kernel.inverse_lengthscale));
      return GpCholesky{grid, std::move(*f), jitter, escalations};
    }
    ++escalations;
  }
  throw std::runtime_error("gp_cholesky: factorization failed after jitter escalation (l=" +
                           std::to_string(kernel.inverse_lengthscale) +
                           ", m=" + std::to_string(grid.points_per_axis()) + ")");
}

/// Zero-mean GP draw g = L z, z ~ N(0, I).
inline GridField sample_gp(const GpCholesky& chol, Rng& rng) {
  const std::size_t n = chol.grid.size();
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  std::vector<double> g(n);
  chol.factor.multiply(z, g);
  return GridField(chol.grid, std::move(g));
}

/// Draw l with l^d ~ Gamma(a,b).
inline double sample_lengthscale(const LengthscalePrior& prior, int d, Rng& rng) {
  prior.validate();
  if (d < 1) throw std::invalid_argument("sample_lengthscale: d must be >= 1");
  return std::pow(rng.gamma(prior.a, prior.b), 1.0 / d);
}

/// Median of the implied prior on l.
inline double lengthscale_median(const LengthscalePrior& prior, int d) {
  prior.validate();
  return std::pow(gamma_quantile(prior.a, prior.b, 0.5), 1.0 / d);
}

/// log density of l under the Gamma(a,b) prior on l^d:
/// pi_l(x) = (b^a d / Gamma(a)) x^{da-1} exp(-b x^d).
inline double lengthscale_log_density(const LengthscalePrior& prior, int d, double l) {
  prior.validate();
  if (!(l > 0.0)) return -std::numeric_limits<double>::infinity();
  return prior.a * std::log(prior.b) + std::log(static_cast<double>(d)) - std::lgamma(prior.a) +
         (d * prior.a - 1.0) * std::log(l) - prior.b * std::pow(l, d);
}

/// Envelope constants of the lengthscale-prior condition for the Gamma case:
/// C1 = C2 = b^a d / Gamma(a), D1 = D2 = b, q1 = d a - 1, q2 = 0.
struct GammaPriorConstants {
  double C1, C2, D1, D2, q1, q2;
};

inline GammaPriorConstants gamma_prior_constants(const LengthscalePrior& prior, int d) {
  prior.validate();
  if (d < 1) throw std::invalid_argument("gamma_prior_constants: d must be >= 1");
  const double c = std::pow(prior.b, prior.a) * d / std::tgamma(prior.a);
  return GammaPriorConstants{c, c, prior.b, prior.b, d * prior.a - 1.0, 0.0};
}

}  // namespace coxcontract
