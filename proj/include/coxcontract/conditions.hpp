#pragma once

// Numerical audit of the finite-n conditions: the constant constraints on
// L2..L10, the per-n condition lists for both models, minimal-n scans, and
// the generic contraction bound with its thresholds.
//
// Conditions comparing a polynomial against exp(c5 n delta_n^2) are evaluated
// in the log domain (flagged on the record) since the right side overflows
// long before n reaches 10^6. Everything else is evaluated directly in long
// double. Equality boundaries are reported with a 1e-9 relative tolerance.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coxcontract/constant_ledger.hpp"
#include "coxcontract/contraction.hpp"
#include "coxcontract/log.hpp"

namespace coxcontract {

struct ConditionRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool log_domain = false;  // lhs/rhs reported as natural logs
  std::string note;
  std::optional<std::int64_t> minimal_n;
};

struct ConditionReport {
  ModelKind model = ModelKind::sgcp;
  std::int64_t n = 0;
  std::vector<ConditionRecord> conditions;
  std::vector<ConditionRecord> constraints;

  bool all_hold() const {
    for (const auto& c : conditions)
      if (!c.holds) return false;
    for (const auto& c : constraints)
      if (!c.holds) return false;
    return true;
  }
};

namespace detail {

constexpr double kBoundaryTol = 1e-9;

inline ConditionRecord strict(std::string name, double lhs, double rhs) {
  return ConditionRecord{std::move(name), lhs, rhs, lhs > rhs, false, {}, std::nullopt};
}

inline ConditionRecord weak(std::string name, double lhs, double rhs) {
  const bool holds = lhs >= rhs || std::abs(lhs - rhs) <= kBoundaryTol * std::max(std::abs(lhs), std::abs(rhs));
  return ConditionRecord{std::move(name), lhs, rhs, holds, false, {}, std::nullopt};
}

inline ConditionRecord weak_le(std::string name, double lhs, double rhs, bool log_domain = false) {
  const bool holds = lhs <= rhs || std::abs(lhs - rhs) <= kBoundaryTol * std::max(std::abs(lhs), std::abs(rhs));
  return ConditionRecord{std::move(name), lhs, rhs, holds, log_domain, {}, std::nullopt};
}

inline ConditionRecord strict_lt(std::string name, double lhs, double rhs) {
  return ConditionRecord{std::move(name), lhs, rhs, lhs < rhs, false, {}, std::nullopt};
}

constexpr double kSigmoidSqrtLipschitz = 0.17677669529663688;  // 2^{-5/2}

}  // namespace detail

enum class Sgcp8Exponent { rho_rate, kappa_tail };

/// Constant constraints on L2..L7 (QGCP) or L8..L10 (SGCP), plus the generic
/// c4/c5 requirements shared by both.
inline ConditionReport check_constant_constraints(const ConstantLedger& lg, ModelKind model,
                                                  SequenceVariant variant = SequenceVariant::appendix) {
  ConditionReport report;
  report.model = model;
  report.n = 0;
  auto& out = report.constraints;

  lg.require({{"alpha", lg.alpha}, {"d", lg.d}, {"c2", lg.c2}, {"c4", lg.c4}, {"c5", lg.c5},
              {"D1", lg.D1}},
             "check_constant_constraints");
  const int d = lg.dim();
  const double dd = lg.d;
  const double r = rho(model, lg.alpha, d);
  out.push_back(detail::strict("c5_gt_c2_plus_2", lg.c5, lg.c2 + 2.0));
  out.push_back(detail::strict("c4_gt_1", lg.c4, 1.0));

  if (model == ModelKind::qgcp) {
    lg.require({{"L2", lg.L2}, {"L3", lg.L3}, {"L4", lg.L4}, {"L5", lg.L5}, {"L6", lg.L6},
                {"L7", lg.L7}, {"q1", lg.q1}},
               "check_constant_constraints (QGCP)");
    double g0;
    if (variant == SequenceVariant::appendix) {
      lg.require({{"sup_g0", lg.sup_g0}}, "check_constant_constraints (QGCP)");
      g0 = lg.sup_g0;
    } else {
      lg.require({{"sup_lambda0", lg.sup_lambda0}}, "check_constant_constraints (QGCP)");
      g0 = std::sqrt(lg.sup_lambda0);
    }
    out.push_back(detail::weak("L2_lower", lg.L2, 8.0 * lg.c5 * g0 * g0 / lg.D1));
    out.push_back(detail::weak("L3_lower", lg.L3, 8.0 * lg.c5 * g0 / lg.D1));
    out.push_back(detail::weak("L4_lower", lg.L4, 2.0 * lg.c5 / lg.D1));
    out.push_back(detail::strict("L234_sum", lg.L2 + lg.L3 + lg.L4,
                                 std::max(lg.A, std::exp(1.0))));
    const double z1 = std::pow(3.0 / lg.L1, 1.5) * std::pow(dd, 0.25) * std::sqrt(2.0 * lg.tau);
    const double rhs_l2l5 = std::pow(8.0 * std::max(1.0, g0) / z1, 2.0);
    out.push_back(detail::strict("L2L5cubed", lg.L2 * lg.L5 * lg.L5 * lg.L5, rhs_l2l5));
    out.push_back(detail::strict("L567_sum", lg.L5 + lg.L6 + lg.L7,
                                 4.0 * lg.L1 * std::max(1.0, g0) / (3.0 * std::sqrt(lg.mu_norm))));
    const double k1 = std::log(3.0 * (lg.L2 + lg.L3 + lg.L4) / std::min(1.0, 2.0 * g0)) +
                      (2.0 * lg.alpha * dd + 2.0 * lg.alpha + dd) / (4.0 * lg.alpha * dd + dd * dd) +
                      (4.0 * r - r / dd - dd - 1.0);
    const double ln3 = std::log(3.0);
    auto entropy_bound = [&](double Lsmall, double logpow) {
      return std::sqrt(16.0 * lg.K5 * std::pow(Lsmall, dd) * std::pow(k1, 1.0 + dd) /
                       std::pow(ln3, logpow));
    };
    out.push_back(detail::weak(
        "L5_lower", lg.L5,
        std::max(entropy_bound(lg.L2, 2.0 * r), std::sqrt(32.0 * g0 * g0 * lg.c5))));
    out.push_back(detail::weak(
        "L6_lower", lg.L6, std::max(entropy_bound(lg.L3, 3.0 * r), std::sqrt(32.0 * g0 * lg.c5))));
    out.push_back(detail::weak(
        "L7_lower", lg.L7, std::max(entropy_bound(lg.L4, 4.0 * r), std::sqrt(8.0 * lg.c5))));
  } else {
    lg.require({{"L8", lg.L8}, {"L9", lg.L9}, {"L10", lg.L10}, {"c0", lg.c0}},
               "check_constant_constraints (SGCP)");
    const double c = detail::kSigmoidSqrtLipschitz;
    out.push_back(detail::strict(
        "L8_lower", lg.L8,
        std::max({lg.A, 1.0, std::pow(2.0 * lg.c5 / lg.D1, 1.0 / dd)})));
    out.push_back(detail::weak("L9_lower", lg.L9, std::sqrt(8.0 * lg.c5)));
    out.push_back(detail::strict("L10_lower", lg.L10, std::pow(lg.c5 / lg.c0, 1.0 / r)));
    out.push_back(detail::strict("L8L9cubedL10_32", lg.L8 * std::pow(lg.L9, 3.0) * std::pow(lg.L10, 1.5),
                                 2.0 / (std::pow(6.0 * c * lg.L1, 1.5) * lg.tau * std::sqrt(dd))));
    out.push_back(detail::strict("L9sqrtL10", lg.L9 * std::sqrt(lg.L10),
                                 1.0 / (6.0 * c * lg.L1 * std::sqrt(lg.mu_norm))));
  }
  return report;
}

inline ConditionReport check_qgcp_conditions(const ConstantLedger& lg, std::int64_t n,
                                             SequenceVariant variant = SequenceVariant::appendix) {
  if (n < 3) throw std::invalid_argument("check_qgcp_conditions: n must be >= 3");
  lg.require({{"q1", lg.q1}, {"q2", lg.q2}, {"c5", lg.c5}, {"D1", lg.D1}},
             "check_qgcp_conditions");
  ConditionReport report = check_constant_constraints(lg, ModelKind::qgcp, variant);
  report.n = n;
  if (!report.all_hold())
    log_line("check_qgcp_conditions: constant constraints fail; evaluating conditions anyway");

  const RateSequences s = rate_sequences(ModelKind::qgcp, n, lg, variant);
  const double dd = lg.d;
  const double nd2 = static_cast<double>(n) * s.delta_n * s.delta_n;
  const double ndbar2 = static_cast<double>(n) * s.delta_bar_n * s.delta_bar_n;
  auto& out = report.conditions;

  out.push_back(detail::strict("QGCP1", s.zeta_n, std::max(lg.A, 1.0)));
  const double ent = std::pow(3.0 / lg.L1, 1.5) * std::pow(dd, 0.25) *
                     std::pow(s.beta_n, 1.5) * std::sqrt(2.0 * lg.tau * s.zeta_n);
  out.push_back(detail::strict("QGCP2", ent, 2.0 * std::pow(s.delta_bar_n, 1.5)));
  out.push_back(detail::strict("QGCP3", (3.0 / lg.L1) * s.beta_n * std::sqrt(lg.mu_norm),
                               s.delta_bar_n));
  out.push_back(detail::weak_le(
      "QGCP4",
      lg.m_vdv * std::pow(s.zeta_n, dd) *
          std::pow(std::log(ent / std::pow(s.delta_bar_n, 1.5)), 1.0 + dd),
      ndbar2));
  out.push_back(detail::weak_le(
      "QGCP5", 2.0 * std::log(6.0 * s.beta_n * std::sqrt(lg.mu_norm) / (lg.L1 * s.delta_bar_n)),
      ndbar2));
  out.push_back(detail::strict(
      "QGCP6", s.beta_n * s.beta_n,
      16.0 * lg.K5 * std::pow(s.zeta_n, dd) *
          std::pow(std::log(3.0 * s.zeta_n / s.delta_bar_n), 1.0 + dd)));
  out.push_back(detail::weak("QGCP7",
                             lg.D1 * std::pow(s.zeta_n, dd) * std::pow(std::log(s.zeta_n), lg.q2),
                             2.0 * lg.c5 * nd2));
  out.push_back(detail::weak("QGCP8", s.beta_n * s.beta_n, 8.0 * lg.c5 * nd2));
  {
    auto rec = detail::weak_le("QGCP9", (lg.q1 - dd + 1.0) * std::log(s.zeta_n), lg.c5 * nd2, true);
    rec.note = "log-domain";
    out.push_back(std::move(rec));
  }
  return report;
}

inline ConditionReport check_sgcp_conditions(const ConstantLedger& lg, std::int64_t n,
                                             Sgcp8Exponent exponent = Sgcp8Exponent::rho_rate) {
  if (n < 3) throw std::invalid_argument("check_sgcp_conditions: n must be >= 3");
  lg.require({{"q1", lg.q1}, {"c0", lg.c0}, {"c5", lg.c5}, {"D1", lg.D1}},
             "check_sgcp_conditions");
  ConditionReport report = check_constant_constraints(lg, ModelKind::sgcp);
  report.n = n;
  if (!report.all_hold())
    log_line("check_sgcp_conditions: constant constraints fail; evaluating conditions anyway");

  const RateSequences s = rate_sequences(ModelKind::sgcp, n, lg);
  const double dd = lg.d;
  const double c = detail::kSigmoidSqrtLipschitz;
  const double lam = *s.lambda_n;
  const double nd2 = static_cast<double>(n) * s.delta_n * s.delta_n;
  const double ndbar2 = static_cast<double>(n) * s.delta_bar_n * s.delta_bar_n;
  auto& out = report.conditions;

  const double ent = std::pow(6.0 * c * lg.L1, 1.5) * std::pow(dd, 0.25) *
                     std::pow(s.beta_n, 1.5) * std::pow(lam, 0.75) *
                     std::sqrt(2.0 * lg.tau * s.zeta_n);
  out.push_back(detail::strict("SGCP1", ent, 2.0 * std::pow(s.delta_bar_n, 1.5)));
  out.push_back(detail::strict("SGCP2", 6.0 * c * lg.L1 * s.beta_n * std::sqrt(lam * lg.mu_norm),
                               s.delta_bar_n));
  out.push_back(detail::strict("SGCP3", s.zeta_n, std::max(lg.A, 1.0)));
  out.push_back(detail::strict_lt(
      "SGCP4",
      lg.m_vdv * std::pow(s.zeta_n, dd) *
          std::pow(std::log(ent / std::pow(s.delta_bar_n, 1.5)), 1.0 + dd),
      lg.K3 * ndbar2));
  out.push_back(detail::strict_lt(
      "SGCP5",
      2.0 * std::log(12.0 * c * lg.L1 * s.beta_n * std::sqrt(lam * lg.mu_norm) / s.delta_bar_n),
      lg.K4 * ndbar2));
  out.push_back(detail::strict_lt(
      "SGCP6", std::log(2.0 * lg.L1 * std::sqrt(lam) / s.delta_bar_n), lg.K5 * ndbar2));
  out.push_back(detail::strict(
      "SGCP7", s.beta_n * s.beta_n,
      16.0 * lg.K5 * std::pow(s.zeta_n, dd) *
          std::pow(std::log(std::sqrt(lam) * s.zeta_n / s.delta_bar_n), 1.0 + dd)));
  {
    const double expo = exponent == Sgcp8Exponent::rho_rate ? s.rho : lg.kappa_tail;
    auto rec = detail::strict("SGCP8", lg.c0 * std::pow(lam, expo), lg.c5 * nd2);
    if (!(expo / lg.kappa_tail > 1.0))
      rec.note = "constant-rule inapplicable (exponent ratio <= 1); direct evaluation";
    out.push_back(std::move(rec));
  }
  out.push_back(detail::weak("SGCP9", lg.D1 * std::pow(s.zeta_n, dd), 2.0 * lg.c5 * nd2));
  {
    auto rec = detail::weak_le("SGCP10", (lg.q1 - dd + 1.0) * std::log(s.zeta_n), lg.c5 * nd2, true);
    rec.note = "log-domain";
    out.push_back(std::move(rec));
  }
  out.push_back(detail::weak("SGCP11", s.beta_n * s.beta_n, 8.0 * lg.c5 * nd2));
  return report;
}

/// Smallest n in [3, n_max] from which `holds(n)` stays true through n_max
/// (conservative monotone-tail scan), or nullopt.
inline std::optional<std::int64_t> minimal_n_scan(const std::function<bool(std::int64_t)>& holds,
                                                  std::int64_t n_max) {
  if (n_max < 3) throw std::invalid_argument("minimal_n_scan: n_max must be >= 3");
  std::optional<std::int64_t> best;
  for (std::int64_t n = n_max; n >= 3; --n) {
    if (!holds(n)) break;
    best = n;
  }
  return best;
}

/// Named-condition scan. Names: QGCP1..QGCP9, SGCP1..SGCP11.
inline std::optional<std::int64_t> minimal_n(std::string_view condition_name,
                                             const ConstantLedger& lg, std::int64_t n_max,
                                             SequenceVariant variant = SequenceVariant::appendix,
                                             Sgcp8Exponent exponent = Sgcp8Exponent::rho_rate) {
  const bool qgcp = condition_name.rfind("QGCP", 0) == 0;
  const bool sgcp = condition_name.rfind("SGCP", 0) == 0;
  if (!qgcp && !sgcp)
    throw std::invalid_argument("minimal_n: unknown condition " + std::string(condition_name));
  auto holds = [&](std::int64_t n) {
    const ConditionReport rep = qgcp ? check_qgcp_conditions(lg, n, variant)
                                     : check_sgcp_conditions(lg, n, exponent);
    for (const auto& c : rep.conditions)
      if (c.name == condition_name) return c.holds;
    throw std::invalid_argument("minimal_n: unknown condition " + std::string(condition_name));
  };
  return minimal_n_scan(holds, n_max);
}

/// Four-term right side of the generic contraction bound at a given n eps^2.
inline double contraction_bound(const ConstantLedger& lg, std::int64_t n, double epsilon) {
  lg.require({{"C", lg.C}, {"J", lg.J}, {"M", lg.M}, {"c1", lg.c1}, {"c2", lg.c2}, {"c3", lg.c3}},
             "contraction_bound");
  if (!(lg.C > 0.0)) throw std::invalid_argument("contraction_bound: C must be positive");
  if (!(lg.J >= 1.0)) throw std::invalid_argument("contraction_bound: J must be >= 1");
  if (!(lg.M >= 2.0)) throw std::invalid_argument("contraction_bound: M must be >= 2");
  const double x = static_cast<double>(n) * epsilon * epsilon;
  const double term1 = 1.0 / (lg.C * lg.C * x);
  const double term2 = std::exp(-lg.M * lg.M * x / 4.0);
  const double term3 = 2.0 * std::exp(-(lg.M * lg.M / 2.0 - lg.c3) * x);
  const double term4 =
      (2.0 / lg.c1) * std::exp(-(lg.c2 * lg.M * lg.M * lg.J * lg.J / 4.0 - lg.C - 1.0) * x);
  return term1 + term2 + term3 + term4;
}

/// Thresholds n1..n3 of the generic bound; K fixed to 1/2.
struct BoundThresholds {
  std::optional<std::int64_t> n1, n2, n3;
};

inline BoundThresholds contraction_bound_thresholds(const ConstantLedger& lg,
                                              const std::function<double(std::int64_t)>& eps,
                                              std::int64_t n_max) {
  lg.require({{"lambda0_min", lg.lambda0_min}, {"M", lg.M}}, "contraction_bound_thresholds");
  if (n_max < 3) throw std::invalid_argument("contraction_bound_thresholds: n_max must be >= 3");
  constexpr double K = 0.5;
  BoundThresholds out;
  const double ln2 = std::log(2.0);
  for (std::int64_t n = 3; n <= n_max; ++n) {
    const double e = eps(n);
    if (!out.n1 && e <= lg.lambda0_min) out.n1 = n;
    if (!out.n2 && e <= 1.0 / (std::sqrt(2.0) * lg.M)) out.n2 = n;
    if (!out.n3 && static_cast<double>(n) * e * e * K * lg.M * lg.M / 4.0 >= ln2) out.n3 = n;
    if (out.n1 && out.n2 && out.n3) break;
  }
  return out;
}

}  // namespace coxcontract
