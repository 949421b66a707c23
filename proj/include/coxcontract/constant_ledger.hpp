#pragma once

// Every named constant the finite-n theory references, as one flat record.
// Theory constants that no computation can supply (K2..K5, m, A, H, tau,
// ||mu||) default to the documented example value 1.0; quantities that depend
// on the problem instance default to NaN and must be supplied.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace coxcontract {

struct ConstantLedger {
  static constexpr double unset = std::numeric_limits<double>::quiet_NaN();

  double alpha = unset;  // Holder smoothness
  double d = unset;      // domain dimension

  // Sieve-sequence constants. L1 is pinned by the entropy argument.
  double L1 = 1.0 / (36.0 * std::sqrt(2.0));
  double L2 = unset, L3 = unset, L4 = unset, L5 = unset, L6 = unset, L7 = unset;
  double L8 = unset, L9 = unset, L10 = unset;

  // Constants of the generic contraction bound.
  double c0 = unset, c1 = unset, c2 = unset, c3 = unset, c4 = unset, c5 = unset;
  double C0 = unset;

  // Lengthscale-prior envelope.
  double C1 = unset, C2 = unset, D1 = unset, D2 = unset, q1 = unset, q2 = 0.0;

  // Theory constants from the GP concentration results; example default 1.0.
  double K2 = 1.0, K3 = 1.0, K4 = 1.0, K5 = 1.0;
  double m_vdv = 1.0;  // entropy-bound constant "m"
  double A = 1.0;
  double H = 1.0;
  double tau = 1.0;      // sqrt of the spectral measure's second moment
  double mu_norm = 1.0;  // total mass of the spectral measure

  double kappa_tail = unset;  // tail exponent of the lamstar prior condition

  // Instance quantities.
  double sup_lambda0 = unset;  // ||lambda_0||_inf
  double sup_g0 = unset;       // ||g_0||_inf
  double lambda0_min = unset;

  // Free constants of the bound.
  double C = unset, J = unset, M = unset;

  /// Throws naming every listed entry that is unset (NaN).
  void require(const std::vector<std::pair<const char*, double>>& entries, const char* who) const {
    std::string missing;
    for (const auto& [name, value] : entries) {
      if (std::isnan(value)) {
        if (!missing.empty()) missing += ", ";
        missing += name;
      }
    }
    if (!missing.empty())
      throw std::invalid_argument(std::string(who) + ": missing ledger entries: " + missing);
  }

  int dim() const {
    if (std::isnan(d) || d < 1.0) throw std::invalid_argument("ledger: d must be set and >= 1");
    return static_cast<int>(d);
  }
};

/// Populate from flat `key = value` text keys ("L2", "c5", "sup_g0", ...).
inline ConstantLedger ledger_from_map(const std::map<std::string, double>& kv) {
  ConstantLedger lg;
  auto take = [&](const char* key, double& slot) {
    auto it = kv.find(key);
    if (it != kv.end()) slot = it->second;
  };
  take("alpha", lg.alpha);
  take("d", lg.d);
  take("L1", lg.L1);
  take("L2", lg.L2);
  take("L3", lg.L3);
  take("L4", lg.L4);
  take("L5", lg.L5);
  take("L6", lg.L6);
  take("L7", lg.L7);
  take("L8", lg.L8);
  take("L9", lg.L9);
  take("L10", lg.L10);
  take("c0", lg.c0);
  take("c1", lg.c1);
  take("c2", lg.c2);
  take("c3", lg.c3);
  take("c4", lg.c4);
  take("c5", lg.c5);
  take("C0", lg.C0);
  take("C1", lg.C1);
  take("C2", lg.C2);
  take("D1", lg.D1);
  take("D2", lg.D2);
  take("q1", lg.q1);
  take("q2", lg.q2);
  take("K2", lg.K2);
  take("K3", lg.K3);
  take("K4", lg.K4);
  take("K5", lg.K5);
  take("m_vdv", lg.m_vdv);
  take("A", lg.A);
  take("H", lg.H);
  take("tau", lg.tau);
  take("mu_norm", lg.mu_norm);
  take("kappa_tail", lg.kappa_tail);
  take("sup_lambda0", lg.sup_lambda0);
  take("sup_g0", lg.sup_g0);
  take("lambda0_min", lg.lambda0_min);
  take("C", lg.C);
  take("J", lg.J);
  take("M", lg.M);
  return lg;
}

}  // namespace coxcontract
