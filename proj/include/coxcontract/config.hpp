#pragma once

// Flat `key = value` configuration text: one namespace with dotted keys,
// `#` comments, no sections. Typed getters raise errors naming the field.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxcontract/conditions.hpp"
#include "coxcontract/constant_ledger.hpp"
#include "coxcontract/contraction.hpp"
#include "coxcontract/gcp_models.hpp"
#include "coxcontract/grid.hpp"
#include "coxcontract/inference.hpp"
#include "coxcontract/point_process.hpp"

namespace coxcontract {

class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text) {
    ConfigMap cfg;
    cfg.raw_text_ = text;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static ConfigMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config: missing field `" + key + "`");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::int64_t get_int(const std::string& key) const {
    const double v = get_double(key);
    const auto i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v)
      throw std::runtime_error("config: field `" + key + "` must be an integer");
    return i;
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return std::stoull(get_string(key));
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    std::istringstream is(get_string(key));
    std::string tok;
    while (std::getline(is, tok, ',')) {
      const std::string t = trim(tok);
      if (!t.empty()) out.push_back(to_double(key, t));
    }
    if (out.empty()) throw std::runtime_error("config: field `" + key + "` has no values");
    return out;
  }

  std::vector<int> get_ints(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_doubles(key)) out.push_back(static_cast<int>(v));
    return out;
  }

  /// Every numeric key under a prefix, with the prefix stripped.
  std::map<std::string, double> numeric_group(const std::string& prefix) const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : values_) {
      if (k.rfind(prefix, 0) == 0) {
        try {
          out[k.substr(prefix.size())] = std::stod(v);
        } catch (...) {
          throw std::runtime_error("config: field `" + k + "` must be numeric");
        }
      }
    }
    return out;
  }

  const std::string& raw_text() const { return raw_text_; }

  /// FNV-1a hash of the raw config text, for provenance headers.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : raw_text_) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
  }

  static double to_double(const std::string& key, const std::string& value) {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size())
        throw std::runtime_error("config: field `" + key + "` is not a number: " + value);
      return v;
    } catch (const std::runtime_error&) {
      throw;
    } catch (...) {
      throw std::runtime_error("config: field `" + key + "` is not a number: " + value);
    }
  }

  std::map<std::string, std::string> values_;
  std::string raw_text_;
};

// ---------------------------------------------------------------------------
// Named analytic families
// ---------------------------------------------------------------------------

/// lambda0 families: constant(level), linear(intercept, slope),
/// offset_sin2(offset, amplitude, frequency) = offset + amp sin^2(2 pi f s1).
struct Lambda0Family {
  std::string kind = "constant";
  double level = 1.0;
  double intercept = 0.0;
  double slope = 1.0;
  double offset = 2.0;
  double amplitude = 1.0;
  double frequency = 1.0;

  GridField materialize(const Grid& grid) const {
    GridField out = [&] {
      if (kind == "constant") return GridField::constant(grid, level);
      if (kind == "linear")
        return GridField::from_function(
            grid, [&](std::span<const double> x) { return intercept + slope * x[0]; });
      if (kind == "offset_sin2")
        return GridField::from_function(grid, [&](std::span<const double> x) {
          const double s = std::sin(6.283185307179586477 * frequency * x[0]);
          return offset + amplitude * s * s;
        });
      throw std::runtime_error("config: unknown lambda0.kind `" + kind + "`");
    }();
    validate_rate(out, "lambda0");
    return out;
  }

  static Lambda0Family from_config(const ConfigMap& cfg) {
    Lambda0Family f;
    f.kind = cfg.get_string("lambda0.kind", "constant");
    f.level = cfg.get_double("lambda0.level", 1.0);
    f.intercept = cfg.get_double("lambda0.intercept", 0.0);
    f.slope = cfg.get_double("lambda0.slope", 1.0);
    f.offset = cfg.get_double("lambda0.offset", 2.0);
    f.amplitude = cfg.get_double("lambda0.amplitude", 1.0);
    f.frequency = cfg.get_double("lambda0.frequency", 1.0);
    return f;
  }
};

/// Filter families (rule n -> list of filters): constant(level),
/// alternating(levels), sinusoidal(amplitude, frequency, offset).
struct FilterFamily {
  std::string kind = "constant";
  double level = 1.0;
  std::vector<double> levels{1.0};
  double amplitude = 0.25;
  double frequency = 1.0;
  double offset = 0.5;

  std::vector<FilterSpec> materialize(int n) const {
    if (n < 1) throw std::runtime_error("filter family: n must be >= 1");
    std::vector<FilterSpec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      if (kind == "constant")
        out.push_back(FilterSpec::constant(level));
      else if (kind == "alternating")
        out.push_back(FilterSpec::constant(levels[static_cast<std::size_t>(j) % levels.size()]));
      else if (kind == "sinusoidal")
        out.push_back(FilterSpec::sinusoidal(amplitude, frequency, offset));
      else
        throw std::runtime_error("config: unknown filters.kind `" + kind + "`");
    }
    return out;
  }

  static FilterFamily from_config(const ConfigMap& cfg) {
    FilterFamily f;
    f.kind = cfg.get_string("filters.kind", "constant");
    f.level = cfg.get_double("filters.level", 1.0);
    if (cfg.has("filters.levels")) f.levels = cfg.get_doubles("filters.levels");
    f.amplitude = cfg.get_double("filters.amplitude", 0.25);
    f.frequency = cfg.get_double("filters.frequency", 1.0);
    f.offset = cfg.get_double("filters.offset", 0.5);
    return f;
  }
};

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  ModelSpec model;
  Grid grid{1, 64};
  Lambda0Family lambda0;
  FilterFamily filters;
  std::vector<int> n_schedule{4, 8, 16, 32, 64};
  double M = 1.0;
  double alpha = 1.0;
  McmcConfig mcmc;
  int replications = 1;
  std::string output_dir = ".";
  std::uint64_t root_seed = 0;
  ConstantLedger ledger;
  SequenceVariant variant = SequenceVariant::appendix;
  Sgcp8Exponent sgcp8_exponent = Sgcp8Exponent::rho_rate;
  int fit_n = 0;                // realisation count for `fit` (0: schedule front)
  int sbc_replications = 0;     // `fit` runs SBC when positive
  std::vector<std::size_t> probe_nodes;
  std::int64_t check_n = 1000;
  std::int64_t check_n_max = 100000;
  std::uint64_t config_hash = 0;

  static ExperimentConfig from_config(const ConfigMap& cfg) {
    ExperimentConfig e;
    const std::string kind = cfg.get_string("model.kind", "sgcp");
    if (kind == "sgcp") {
      e.model.kind = ModelKind::sgcp;
      e.model.lamstar_prior = GammaDistSpec{cfg.get_double("model.lamstar.shape", 2.0),
                                            cfg.get_double("model.lamstar.rate", 0.5)};
    } else if (kind == "qgcp") {
      e.model.kind = ModelKind::qgcp;
    } else {
      throw std::runtime_error("config: model.kind must be sgcp or qgcp");
    }
    e.model.lengthscale_prior = LengthscalePrior{cfg.get_double("model.lengthscale.a", 2.0),
                                                 cfg.get_double("model.lengthscale.b", 1.0)};
    e.model.kernel_jitter = cfg.get_double("model.jitter", 1e-8);
    e.model.validate();

    const auto d = static_cast<int>(cfg.get_int("grid.d", 1));
    const auto m = static_cast<int>(cfg.get_int("grid.m", d == 1 ? 256 : 64));
    e.grid = Grid(d, m);

    e.lambda0 = Lambda0Family::from_config(cfg);
    e.filters = FilterFamily::from_config(cfg);
    if (cfg.has("schedule")) e.n_schedule = cfg.get_ints("schedule");
    for (std::size_t i = 1; i < e.n_schedule.size(); ++i)
      if (e.n_schedule[i] <= e.n_schedule[i - 1])
        throw std::runtime_error("config: schedule must be strictly increasing");
    e.M = cfg.get_double("M", 1.0);
    e.alpha = cfg.get_double("alpha", 1.0);
    e.replications = static_cast<int>(cfg.get_int("replications", 1));
    e.output_dir = cfg.get_string("output_dir", ".");
    e.root_seed = cfg.get_u64("root_seed", 0);

    e.mcmc.iterations = static_cast<int>(cfg.get_int("mcmc.iterations", 20000));
    e.mcmc.burn_in = static_cast<int>(cfg.get_int("mcmc.burn_in", 5000));
    e.mcmc.thin = static_cast<int>(cfg.get_int("mcmc.thin", 10));
    e.mcmc.chains = static_cast<int>(cfg.get_int("mcmc.chains", 4));
    e.mcmc.ellipse_max_shrink = static_cast<int>(cfg.get_int("mcmc.ellipse_max_shrink", 64));
    e.mcmc.lengthscale_step = cfg.get_double("mcmc.lengthscale_step", 0.5);
    e.mcmc.lamstar_step = cfg.get_double("mcmc.lamstar_step", 0.4);
    e.mcmc.seed = cfg.get_u64("mcmc.seed", e.root_seed);
    e.mcmc.validate();

    e.ledger = ledger_from_map(cfg.numeric_group("ledger."));
    if (std::isnan(e.ledger.alpha)) e.ledger.alpha = e.alpha;
    if (std::isnan(e.ledger.d)) e.ledger.d = static_cast<double>(d);

    const std::string variant = cfg.get_string("variant", "appendix");
    if (variant == "appendix")
      e.variant = SequenceVariant::appendix;
    else if (variant == "maintext")
      e.variant = SequenceVariant::maintext;
    else
      throw std::runtime_error("config: variant must be appendix or maintext");

    const std::string expo = cfg.get_string("sgcp8_exponent", "rho");
    if (expo == "rho")
      e.sgcp8_exponent = Sgcp8Exponent::rho_rate;
    else if (expo == "kappa")
      e.sgcp8_exponent = Sgcp8Exponent::kappa_tail;
    else
      throw std::runtime_error("config: sgcp8_exponent must be rho or kappa");

    e.fit_n = static_cast<int>(cfg.get_int("fit.n", 0));
    e.sbc_replications = static_cast<int>(cfg.get_int("fit.sbc_replications", 0));
    if (cfg.has("probe_nodes"))
      for (int p : cfg.get_ints("probe_nodes")) e.probe_nodes.push_back(static_cast<std::size_t>(p));
    e.check_n = cfg.get_int("check.n", 1000);
    e.check_n_max = cfg.get_int("check.n_max", 100000);
    e.config_hash = cfg.hash();
    return e;
  }
};

}  // namespace coxcontract
