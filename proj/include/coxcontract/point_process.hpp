#pragma once

// Exact NHPP simulation by thinning against the rate's grid maximum, plus
// independent per-point filtering. Together these produce one filtered
// dataset: n independent realisations with rates gamma_j * lambda0.
//
// Per-realisation streams are derived by counter from the dataset seed, so
// growing n leaves earlier realisations untouched.

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coxcontract/grid.hpp"
#include "coxcontract/rng.hpp"

namespace coxcontract {

/// Finite point set in [0,1]^d, stored flat with stride d.
class PointSet {
 public:
  explicit PointSet(int dimension) : d_(dimension) {
    if (d_ < 1) throw std::invalid_argument("PointSet: dimension must be >= 1");
  }

  int dimension() const { return d_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(d_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }

  void add(std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(d_))
      throw std::invalid_argument("PointSet::add: wrong coordinate count");
    for (double c : x) {
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("PointSet::add: coordinate outside [0,1]");
      coords_.push_back(c);
    }
  }

 private:
  int d_;
  std::vector<double> coords_;
};

/// Parametric filtering function gamma: [0,1]^d -> [0,1]. The parametric
/// families vary along the first coordinate; validity is checked exactly at
/// construction (range analysis, no sampling needed).
class FilterSpec {
 public:
  enum class Kind { constant, piecewise_constant, sinusoidal };

  static FilterSpec constant(double p) {
    check_unit(p, "FilterSpec::constant");
    FilterSpec f;
    f.kind_ = Kind::constant;
    f.levels_ = {p};
    return f;
  }

  /// Piecewise-constant in the first coordinate: value levels[i] on
  /// [breaks[i-1], breaks[i]) with breaks[-1]=0, breaks[end]=1.
  static FilterSpec piecewise_constant(std::vector<double> breakpoints, std::vector<double> levels) {
    if (levels.size() != breakpoints.size() + 1)
      throw std::invalid_argument("FilterSpec::piecewise_constant: need one more level than breakpoints");
    double prev = 0.0;
    for (double b : breakpoints) {
      if (!(b > prev && b < 1.0))
        throw std::invalid_argument("FilterSpec::piecewise_constant: breakpoints must increase within (0,1)");
      prev = b;
    }
    for (double v : levels) check_unit(v, "FilterSpec::piecewise_constant");
    FilterSpec f;
    f.kind_ = Kind::piecewise_constant;
    f.breakpoints_ = std::move(breakpoints);
    f.levels_ = std::move(levels);
    return f;
  }

  /// offset + amplitude * sin(2*pi*frequency*x1); range checked exactly.
  static FilterSpec sinusoidal(double amplitude, double frequency, double offset) {
    check_unit(offset - std::abs(amplitude), "FilterSpec::sinusoidal (minimum)");
    check_unit(offset + std::abs(amplitude), "FilterSpec::sinusoidal (maximum)");
    FilterSpec f;
    f.kind_ = Kind::sinusoidal;
    f.amplitude_ = amplitude;
    f.frequency_ = frequency;
    f.offset_ = offset;
    return f;
  }

  Kind kind() const { return kind_; }

  double operator()(std::span<const double> x) const {
    const double s = x.empty() ? 0.0 : x[0];
    switch (kind_) {
      case Kind::constant:
        return levels_[0];
      case Kind::piecewise_constant: {
        std::size_t i = 0;
        while (i < breakpoints_.size() && s >= breakpoints_[i]) ++i;
        return levels_[i];
      }
      case Kind::sinusoidal:
        return offset_ + amplitude_ * std::sin(6.283185307179586477 * frequency_ * s);
    }
    return 0.0;
  }

  /// gamma evaluated at every grid node (row-major).
  std::vector<double> node_values(const Grid& grid) const {
    std::vector<double> v(grid.size());
    std::vector<double> x(static_cast<std::size_t>(grid.dimension()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      grid.node(k, x);
      v[k] = (*this)(x);
    }
    return v;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::constant:
        return "constant(" + std::to_string(levels_[0]) + ")";
      case Kind::piecewise_constant:
        return "piecewise_constant(" + std::to_string(levels_.size()) + " levels)";
      case Kind::sinusoidal:
        return "sinusoidal(a=" + std::to_string(amplitude_) + ",f=" + std::to_string(frequency_) +
               ",o=" + std::to_string(offset_) + ")";
    }
    return {};
  }

 private:
  FilterSpec() = default;

  static void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument(std::string(what) + ": values must lie in [0,1]");
  }

  Kind kind_ = Kind::constant;
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double offset_ = 0.0;
};

/// One filtered observation: point set plus the 1-based filter index.
struct Realisation {
  PointSet observed;
  int filter_index = 1;
};

/// Thinning simulation: N ~ Poisson(max rate), uniform proposals, keep with
/// probability rate(nearest node)/max. Exact for the per-cell-constant rate.
inline PointSet simulate_nhpp(const GridField& rate, Rng& rng) {
  validate_rate(rate, "simulate_nhpp");
  const int d = rate.grid.dimension();
  PointSet out(d);
  double rate_max = 0.0;
  for (double v : rate.values) rate_max = std::max(rate_max, v);
  if (rate_max == 0.0) return out;

  const std::uint64_t proposals = rng.poisson(rate_max);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::uint64_t i = 0; i < proposals; ++i) {
    for (auto& c : x) c = rng.uniform();
    const double r = rate.values[rate.grid.nearest_node(x)];
    if (rng.uniform() * rate_max < r) out.add(x);
  }
  return out;
}

/// Independent per-point retention with probability gamma evaluated at the
/// exact location; order preserved.
inline PointSet apply_filter(const PointSet& raw, const FilterSpec& gamma, Rng& rng) {
  PointSet out(raw.dimension());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto x = raw.point(i);
    if (rng.uniform() < gamma(x)) out.add(x);
  }
  return out;
}

/// n filtered realisations; realisation j uses the stream (seed, "realisation", j).
inline std::vector<Realisation> simulate_dataset(const GridField& lambda0,
                                                 const std::vector<FilterSpec>& filters,
                                                 std::uint64_t seed) {
  if (filters.empty()) throw std::invalid_argument("simulate_dataset: need at least one filter");
  std::vector<Realisation> data;
  data.reserve(filters.size());
  for (std::size_t j = 0; j < filters.size(); ++j) {
    Rng stream = Rng::derive(seed, "realisation", j);
    PointSet raw = simulate_nhpp(lambda0, stream);
    data.push_back(Realisation{apply_filter(raw, filters[j], stream), static_cast<int>(j + 1)});
  }
  return data;
}

/// Dataset CSV: one row per point, columns realisation_index, coord_1..coord_d.
inline void write_dataset_csv(std::ostream& os, const std::vector<Realisation>& data, int dimension) {
  os << "realisation_index";
  for (int a = 1; a <= dimension; ++a) os << ",coord_" << a;
  os << "\n";
  os.precision(17);
  for (const auto& r : data) {
    for (std::size_t i = 0; i < r.observed.size(); ++i) {
      os << r.filter_index;
      for (double c : r.observed.point(i)) os << "," << c;
      os << "\n";
    }
  }
}

}  // namespace coxcontract
