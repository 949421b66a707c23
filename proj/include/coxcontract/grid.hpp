#pragma once

// Regular cell-center lattice on [0,1]^d and functions sampled on it.
//
// Quadrature is the midpoint rule: exact for fields constant per cell, error
// O(m^-2) otherwise. Point locations are resolved by nearest-node lookup
// (O(m^-1) bias); nodes lie strictly inside the open cube.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coxcontract {

class Grid {
 public:
  Grid(int dimension, int points_per_axis) : d_(dimension), m_(points_per_axis) {
    if (d_ < 1) throw std::invalid_argument("Grid: dimension must be >= 1");
    if (m_ < 1) throw std::invalid_argument("Grid: points per axis must be >= 1");
    size_ = 1;
    for (int k = 0; k < d_; ++k) {
      if (size_ > 1000000u / static_cast<std::size_t>(m_))
        throw std::invalid_argument("Grid: node count m^d too large");
      size_ *= static_cast<std::size_t>(m_);
    }
  }

  int dimension() const { return d_; }
  int points_per_axis() const { return m_; }
  std::size_t size() const { return size_; }
  double cell_volume() const { return 1.0 / static_cast<double>(size_); }

  /// Cell-center coordinates of node k (row-major, axis 0 slowest).
  std::vector<double> node(std::size_t k) const {
    std::vector<double> x(static_cast<std::size_t>(d_));
    node(k, x);
    return x;
  }

  void node(std::size_t k, std::span<double> out) const {
    for (int axis = d_ - 1; axis >= 0; --axis) {
      const std::size_t i = k % static_cast<std::size_t>(m_);
      k /= static_cast<std::size_t>(m_);
      out[static_cast<std::size_t>(axis)] = (static_cast<double>(i) + 0.5) / m_;
    }
  }

  /// Index of the node whose cell contains x (coordinates clamped to [0,1]).
  std::size_t nearest_node(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(d_))
      throw std::invalid_argument("Grid::nearest_node: wrong coordinate count");
    std::size_t k = 0;
    for (int axis = 0; axis < d_; ++axis) {
      double c = std::clamp(x[static_cast<std::size_t>(axis)], 0.0, 1.0);
      auto i = static_cast<long>(std::floor(c * m_));
      i = std::clamp(i, 0l, static_cast<long>(m_) - 1);
      k = k * static_cast<std::size_t>(m_) + static_cast<std::size_t>(i);
    }
    return k;
  }

  friend bool operator==(const Grid& a, const Grid& b) { return a.d_ == b.d_ && a.m_ == b.m_; }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  int d_;
  int m_;
  std::size_t size_;
};

struct GridField {
  Grid grid;
  std::vector<double> values;

  GridField(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("GridField: values length must equal node count");
  }

  static GridField constant(const Grid& g, double value) {
    return GridField(g, std::vector<double>(g.size(), value));
  }

  static GridField from_function(const Grid& g,
                                 const std::function<double(std::span<const double>)>& f) {
    std::vector<double> v(g.size());
    std::vector<double> x(static_cast<std::size_t>(g.dimension()));
    for (std::size_t k = 0; k < g.size(); ++k) {
      g.node(k, x);
      v[k] = f(x);
    }
    return GridField(g, std::move(v));
  }

  double at_point(std::span<const double> x) const { return values[grid.nearest_node(x)]; }
};

/// Throws unless every value is finite and >= 0 (the "rate" tag contract).
inline void validate_rate(const GridField& f, const char* what = "rate field") {
  for (double v : f.values) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string(what) + ": values must be finite and non-negative");
  }
}

inline void require_same_grid(const GridField& f, const GridField& h, const char* op) {
  if (f.grid != h.grid)
    throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

/// Midpoint-rule integral over [0,1]^d.
inline double quadrature(const GridField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

inline double sup_diff(const GridField& f, const GridField& h) {
  require_same_grid(f, h, "sup_diff");
  double s = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k)
    s = std::max(s, std::abs(f.values[k] - h.values[k]));
  return s;
}

inline double l2_diff(const GridField& f, const GridField& h) {
  require_same_grid(f, h, "l2_diff");
  double s = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double dv = f.values[k] - h.values[k];
    s += dv * dv;
  }
  return std::sqrt(s * f.grid.cell_volume());
}

/// CSV form: `# d=<d> m=<m>` then one value per line in row-major node order.
/// Additional leading `#` comment lines (provenance) are permitted.
inline void write_field_csv(std::ostream& os, const GridField& f) {
  os << "# d=" << f.grid.dimension() << " m=" << f.grid.points_per_axis() << "\n";
  os.precision(17);
  for (double v : f.values) os << v << "\n";
}

inline GridField read_field_csv(std::istream& is) {
  std::string line;
  int d = 0;
  int m = 0;
  bool have_header = false;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      int pd = 0;
      int pm = 0;
      if (std::sscanf(line.c_str(), "# d=%d m=%d", &pd, &pm) == 2) {
        d = pd;
        m = pm;
        have_header = true;
      }
      continue;
    }
    values.push_back(std::stod(line));
  }
  if (!have_header) throw std::runtime_error("read_field_csv: missing `# d= m=` header");
  return GridField(Grid(d, m), std::move(values));
}

}  // namespace coxcontract
