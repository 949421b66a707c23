#pragma once

// Test-only statistical oracles, independent of the library's computation
// paths: Poisson pmf, chi-square goodness of fit, Kolmogorov-Smirnov, and
// summary helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "coxcontract/special_functions.hpp"

namespace testsupport {

inline double poisson_pmf(std::uint64_t k, double mean) {
  return std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Chi-square GOF p-value of observed counts against Poisson(mean).
/// Tail categories merged until each expected count is >= 5.
inline double poisson_gof_pvalue(const std::vector<std::uint64_t>& draws, double mean) {
  std::map<std::uint64_t, std::size_t> counts;
  std::uint64_t max_k = 0;
  for (auto k : draws) {
    ++counts[k];
    max_k = std::max(max_k, k);
  }
  const double total = static_cast<double>(draws.size());

  // Build contiguous categories 0..max_k, then merge sparse cells from both ends.
  std::vector<double> expected;
  std::vector<double> observed;
  for (std::uint64_t k = 0; k <= max_k; ++k) {
    expected.push_back(total * poisson_pmf(k, mean));
    const auto it = counts.find(k);
    observed.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
  }
  // The last cell is the open category [max_k, inf).
  expected.back() = total;
  for (std::size_t i = 0; i + 1 < expected.size(); ++i) expected.back() -= expected[i];

  std::vector<double> eo_exp;
  std::vector<double> eo_obs;
  double acc_e = 0.0;
  double acc_o = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    acc_e += expected[i];
    acc_o += observed[i];
    if (acc_e >= 5.0) {
      eo_exp.push_back(acc_e);
      eo_obs.push_back(acc_o);
      acc_e = acc_o = 0.0;
    }
  }
  if (acc_e > 0.0) {
    if (eo_exp.empty()) {
      eo_exp.push_back(acc_e);
      eo_obs.push_back(acc_o);
    } else {
      eo_exp.back() += acc_e;
      eo_obs.back() += acc_o;
    }
  }
  if (eo_exp.size() < 2) throw std::runtime_error("poisson_gof_pvalue: degenerate binning");
  double stat = 0.0;
  for (std::size_t i = 0; i < eo_exp.size(); ++i) {
    const double dv = eo_obs[i] - eo_exp[i];
    stat += dv * dv / eo_exp[i];
  }
  return coxcontract::chi_square_sf(stat, static_cast<double>(eo_exp.size() - 1));
}

/// Asymptotic Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_tail(double lambda) {
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                        std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * lambda * lambda);
    s += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

/// One-sample KS p-value of draws against a CDF.
template <typename Cdf>
double ks_test_pvalue(std::vector<double> draws, Cdf cdf) {
  std::sort(draws.begin(), draws.end());
  const auto n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace testsupport
