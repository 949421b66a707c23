#pragma once

// Rate formulas for the two models and the scalar sequences defining the
// sieves, evaluated in long double.
//
//   QGCP: rho = (1+d)/(4+d/alpha), ball width exponent alpha/(4 alpha + d)
//   SGCP: rho = (1+d)/(2+d/alpha), ball width exponent alpha/(2 alpha + d)
//
// The sequence set (delta, delta_bar, zeta, beta, kappa, chi, lambda) follows
// the finite-n restatement, which writes the QGCP delta prefactor with
// ||g_0||_inf; the main-text form with 2 sqrt(||lambda_0||_inf) is available
// behind SequenceVariant::maintext. The fit against measured curves is a
// plain least-squares slope in log-log coordinates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxcontract/constant_ledger.hpp"
#include "coxcontract/gcp_models.hpp"

namespace coxcontract {

enum class SequenceVariant { appendix, maintext };

inline double rho(ModelKind model, double alpha, int d) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rho: alpha must be positive");
  if (d < 1) throw std::invalid_argument("rho: d must be >= 1");
  const double dd = static_cast<double>(d);
  return model == ModelKind::qgcp ? (1.0 + dd) / (4.0 + dd / alpha)
                                  : (1.0 + dd) / (2.0 + dd / alpha);
}

/// Contraction ball width. QGCP requires sup_lambda0 (its leading prefactor).
inline double epsilon_n(ModelKind model, std::int64_t n, double alpha, int d,
                        double sup_lambda0 = std::numeric_limits<double>::quiet_NaN()) {
  if (n < 3) throw std::invalid_argument("epsilon_n: n must be >= 3");
  if (!(alpha > 0.0)) throw std::invalid_argument("epsilon_n: alpha must be positive");
  if (d < 1) throw std::invalid_argument("epsilon_n: d must be >= 1");
  const long double dd = d;
  const long double nn = static_cast<long double>(n);
  const long double ln = std::log(nn);
  const long double r = rho(model, alpha, d);
  if (model == ModelKind::sgcp) {
    return static_cast<double>(std::pow(nn, -alpha / (2.0L * alpha + dd)) *
                               std::pow(ln, r + dd + 1.0L));
  }
  if (std::isnan(sup_lambda0) || sup_lambda0 < 0.0)
    throw std::invalid_argument("epsilon_n: QGCP requires sup_lambda0 >= 0");
  const long double first = 2.0L * std::sqrt(static_cast<long double>(sup_lambda0)) *
                            std::pow(nn, -alpha / (4.0L * alpha + dd)) *
                            std::pow(ln, r + dd + 1.0L);
  const long double second = std::pow(nn, -2.0L * alpha / (4.0L * alpha + dd)) *
                             std::pow(ln, 2.0L * r + 2.0L * dd + 2.0L);
  return static_cast<double>(first + second);
}

struct RateSequences {
  ModelKind model = ModelKind::sgcp;
  std::int64_t n = 0;
  double alpha = 0.0;
  int d = 1;
  double rho = 0.0;
  double delta_n = 0.0;
  double delta_bar_n = 0.0;
  double epsilon_n = 0.0;  // max(delta_n, delta_bar_n)
  double zeta_n = 0.0;
  double beta_n = 0.0;
  double kappa_n = 0.0;
  double chi_n = 0.0;
  std::optional<double> lambda_n;  // SGCP only
};

inline RateSequences rate_sequences(ModelKind model, std::int64_t n, const ConstantLedger& lg,
                                    SequenceVariant variant = SequenceVariant::appendix) {
  if (n < 3) throw std::invalid_argument("rate_sequences: n must be >= 3");
  lg.require({{"alpha", lg.alpha}, {"d", lg.d}, {"tau", lg.tau}}, "rate_sequences");
  const int d = lg.dim();
  const long double dd = d;
  const long double a = lg.alpha;
  const long double nn = static_cast<long double>(n);
  const long double ln = std::log(nn);
  const long double r = rho(model, lg.alpha, d);

  RateSequences out;
  out.model = model;
  out.n = n;
  out.alpha = lg.alpha;
  out.d = d;
  out.rho = static_cast<double>(r);

  if (model == ModelKind::qgcp) {
    lg.require({{"L2", lg.L2}, {"L3", lg.L3}, {"L4", lg.L4}, {"L5", lg.L5}, {"L6", lg.L6},
                {"L7", lg.L7}},
               "rate_sequences (QGCP)");
    long double pre;
    if (variant == SequenceVariant::appendix) {
      lg.require({{"sup_g0", lg.sup_g0}}, "rate_sequences (QGCP, appendix variant)");
      pre = 2.0L * static_cast<long double>(lg.sup_g0);
    } else {
      lg.require({{"sup_lambda0", lg.sup_lambda0}, {"sup_g0", lg.sup_g0}},
                 "rate_sequences (QGCP, maintext variant)");
      pre = 2.0L * std::sqrt(static_cast<long double>(lg.sup_lambda0));
    }
    const long double A1 = std::pow(nn, -a / (4.0L * a + dd));
    const long double A2 = std::pow(nn, -2.0L * a / (4.0L * a + dd));
    out.delta_n = static_cast<double>(pre * A1 * std::pow(ln, r) + A2 * std::pow(ln, 2.0L * r));
    out.delta_bar_n = static_cast<double>(pre * A1 * std::pow(ln, r + dd + 1.0L) +
                                          A2 * std::pow(ln, 2.0L * r + 2.0L * dd + 2.0L));
    const long double denom = dd * (4.0L * a + dd);
    out.zeta_n = static_cast<double>(
        lg.L2 * std::pow(nn, (2.0L * a + dd) / denom) * std::pow(ln, 2.0L * r / dd) +
        lg.L3 * std::pow(nn, (a + dd) / denom) * std::pow(ln, 3.0L * r / dd) +
        lg.L4 * std::pow(nn, dd / denom) * std::pow(ln, 4.0L * r / dd));
    const long double half = 2.0L * (4.0L * a + dd);
    const long double logoff = (dd + 1.0L) / 2.0L;
    out.beta_n = static_cast<double>(
        lg.L5 * std::pow(nn, (2.0L * a + dd) / half) * std::pow(ln, 2.0L * r + logoff) +
        lg.L6 * std::pow(nn, (a + dd) / half) * std::pow(ln, 3.0L * r + logoff) +
        lg.L7 * std::pow(nn, dd / half) * std::pow(ln, 4.0L * r + logoff));
    out.kappa_n = out.delta_bar_n / 3.0;
    out.chi_n = out.delta_bar_n / (6.0 * lg.tau * std::sqrt(static_cast<double>(d)) * out.beta_n);
  } else {
    lg.require({{"L8", lg.L8}, {"L9", lg.L9}, {"L10", lg.L10}, {"kappa_tail", lg.kappa_tail}},
               "rate_sequences (SGCP)");
    const long double kt = lg.kappa_tail;
    const long double A1 = std::pow(nn, -a / (2.0L * a + dd));
    out.delta_n = static_cast<double>(A1 * std::pow(ln, r));
    out.delta_bar_n = static_cast<double>(A1 * std::pow(ln, r + dd + 1.0L));
    out.zeta_n = static_cast<double>(lg.L8 * std::pow(nn, 1.0L / (2.0L * a + dd)) *
                                     std::pow(ln, 2.0L * r / dd));
    out.beta_n = static_cast<double>(lg.L9 * std::pow(nn, dd / (2.0L * (2.0L * a + dd))) *
                                     std::pow(ln, dd + 1.0L + 2.0L * r));
    out.lambda_n = static_cast<double>(lg.L10 * std::pow(nn, dd / (kt * (2.0L * a + dd))) *
                                       std::pow(ln, 4.0L * r / kt));
    out.kappa_n = out.delta_bar_n / 3.0;
    out.chi_n = out.kappa_n / (2.0 * lg.tau * std::sqrt(static_cast<double>(d)) * out.beta_n);
  }
  out.epsilon_n = std::max(out.delta_n, out.delta_bar_n);
  return out;
}

/// Measured contraction curve: one row per schedule entry.
struct ContractionRow {
  std::int64_t n = 0;
  double radius = 0.0;
  double mass_outside = 0.0;     // averaged over replications
  double median_distance = 0.0;  // per-replication medians, averaged
  int replications = 0;
};

struct ContractionCurve {
  std::vector<ContractionRow> rows;
  // Per-(row, replication) detail, schedule-major.
  std::vector<std::vector<double>> median_by_replication;
  std::vector<std::vector<double>> mass_by_replication;
};

struct SlopeFit {
  double slope = 0.0;
  int used_rows = 0;
  int excluded_rows = 0;  // non-positive field values, excluded from the fit
};

enum class CurveField { mass_outside, median_distance };

inline SlopeFit fit_loglog_slope(const ContractionCurve& curve, CurveField field) {
  std::vector<double> xs;
  std::vector<double> ys;
  int excluded = 0;
  for (const auto& row : curve.rows) {
    const double v = field == CurveField::mass_outside ? row.mass_outside : row.median_distance;
    if (v > 0.0) {
      xs.push_back(std::log(static_cast<double>(row.n)));
      ys.push_back(std::log(v));
    } else {
      ++excluded;
    }
  }
  if (xs.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: fewer than 3 usable rows (" +
                                std::to_string(xs.size()) + " usable, " + std::to_string(excluded) +
                                " excluded)");
  double xbar = 0.0;
  double ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(xs.size());
  ybar /= static_cast<double>(xs.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return SlopeFit{num / den, static_cast<int>(xs.size()), excluded};
}

}  // namespace coxcontract
