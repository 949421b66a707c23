#pragma once

// Batch drivers behind the CLI subcommands. Every output file starts with a
// provenance comment header (tool, subcommand, config hash, root seed).

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "coxcontract/conditions.hpp"
#include "coxcontract/config.hpp"
#include "coxcontract/contraction_experiment.hpp"
#include "coxcontract/gp_prior.hpp"
#include "coxcontract/inference.hpp"
#include "coxcontract/metrics.hpp"
#include "coxcontract/svg.hpp"

namespace coxcontract {

inline std::string hex_u64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline void write_provenance(std::ostream& os, const std::string& subcommand,
                             const ExperimentConfig& cfg) {
  os << "# coxcontract " << subcommand << "\n";
  os << "# config_hash=" << hex_u64(cfg.config_hash) << " root_seed=" << cfg.root_seed << "\n";
}

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& subcommand, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out.precision(17);
  write_provenance(out, subcommand, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// simulate: one dataset CSV per schedule entry
// ---------------------------------------------------------------------------

inline std::vector<std::string> run_simulate(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out_dir) {
  const GridField lambda0 = cfg.lambda0.materialize(cfg.grid);
  std::vector<std::string> written;
  // One dataset seed for all entries: a longer schedule extends, rather than
  // reshuffles, the shorter one's realisations.
  const std::uint64_t seed = Rng::derive_seed(cfg.root_seed, "simulate", 0);
  for (const int n : cfg.n_schedule) {
    const auto filters = cfg.filters.materialize(n);
    const auto data = simulate_dataset(lambda0, filters, seed);
    const std::string name = "dataset_n" + std::to_string(n) + ".csv";
    auto out = open_output(out_dir, name, "simulate", cfg);
    write_dataset_csv(out, data, cfg.grid.dimension());
    written.push_back(name);
  }
  // The discretized truth, for downstream distance evaluation.
  auto truth = open_output(out_dir, "lambda0.csv", "simulate", cfg);
  write_field_csv(truth, lambda0);
  written.push_back("lambda0.csv");
  return written;
}

// ---------------------------------------------------------------------------
// rates: the scalar sequences over the schedule
// ---------------------------------------------------------------------------

inline std::string run_rates(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  auto out = open_output(out_dir, "rates.csv", "rates", cfg);
  out << "model,n,alpha,d,rho,delta_n,delta_bar_n,epsilon_n,zeta_n,beta_n,kappa_n,chi_n,lambda_n\n";
  for (const int n : cfg.n_schedule) {
    const auto s = rate_sequences(cfg.model.kind, n, cfg.ledger, cfg.variant);
    out << model_name(s.model) << "," << s.n << "," << s.alpha << "," << s.d << "," << s.rho << ","
        << s.delta_n << "," << s.delta_bar_n << "," << s.epsilon_n << "," << s.zeta_n << ","
        << s.beta_n << "," << s.kappa_n << "," << s.chi_n << ",";
    if (s.lambda_n) out << *s.lambda_n;
    out << "\n";
  }
  return "rates.csv";
}

// ---------------------------------------------------------------------------
// fit: posterior CSV (+ distances, + optional SBC ranks)
// ---------------------------------------------------------------------------

inline std::vector<std::string> run_fit(const ExperimentConfig& cfg,
                                        const std::filesystem::path& out_dir, unsigned workers) {
  const GridField lambda0 = cfg.lambda0.materialize(cfg.grid);
  const int n = cfg.fit_n > 0 ? cfg.fit_n : cfg.n_schedule.front();
  const auto filters = cfg.filters.materialize(n);
  const auto data =
      simulate_dataset(lambda0, filters, Rng::derive_seed(cfg.root_seed, "simulate", 0));

  McmcConfig mcmc = cfg.mcmc;
  mcmc.workers = workers;
  const auto post = run_mcmc(data, filters, cfg.model, cfg.grid, mcmc);

  std::vector<std::size_t> probes = cfg.probe_nodes;
  if (probes.empty())
    probes = {cfg.grid.size() / 4, cfg.grid.size() / 2, 3 * cfg.grid.size() / 4};

  std::vector<std::string> written;
  {
    auto out = open_output(out_dir, "posterior.csv", "fit", cfg);
    out << "chain,iteration,l,lamstar";
    for (std::size_t p : probes) out << ",g_node_" << p;
    out << "\n";
    int draw_in_chain = 0;
    int last_chain = -1;
    for (std::size_t i = 0; i < post.samples.size(); ++i) {
      if (post.chain_ids[i] != last_chain) {
        last_chain = post.chain_ids[i];
        draw_in_chain = 0;
      }
      out << post.chain_ids[i] << "," << draw_in_chain++ << "," << post.samples[i].l << ",";
      if (post.samples[i].lamstar) out << *post.samples[i].lamstar;
      for (std::size_t p : probes) out << "," << post.samples[i].g.values[p];
      out << "\n";
    }
    written.push_back("posterior.csv");
  }
  {
    std::vector<double> mean_rate(cfg.grid.size(), 0.0);
    for (const auto& s : post.samples) {
      const GridField r = link_rate(s, cfg.model);
      for (std::size_t k = 0; k < mean_rate.size(); ++k) mean_rate[k] += r.values[k];
    }
    for (auto& v : mean_rate) v /= static_cast<double>(post.samples.size());
    const auto report =
        distance_report(GridField(cfg.grid, std::move(mean_rate)), lambda0, filters);
    auto out = open_output(out_dir, "distances.csv", "fit", cfg);
    out << "gamma_inf,gamma_l2,gamma_sqrt_l2,hellinger,kl,variance\n";
    out << report.gamma_inf << "," << report.gamma_l2 << "," << report.gamma_sqrt_l2 << ","
        << report.hellinger << "," << report.kl << "," << report.variance << "\n";
    written.push_back("distances.csv");
  }
  if (cfg.sbc_replications > 0) {
    const auto table = simulation_based_calibration(cfg.model, cfg.grid, filters, cfg.mcmc,
                                                    cfg.sbc_replications, probes, workers);
    auto out = open_output(out_dir, "sbc_ranks.csv", "fit", cfg);
    out << "replication";
    for (const auto& name : table.names) out << "," << name;
    out << "\n";
    for (int rep = 0; rep < cfg.sbc_replications; ++rep) {
      out << rep;
      for (std::size_t s = 0; s < table.names.size(); ++s)
        out << "," << table.ranks[s][static_cast<std::size_t>(rep)];
      out << "\n";
    }
    auto summary = open_output(out_dir, "sbc_summary.csv", "fit", cfg);
    summary << "summary,chi_square,p_value,bins,posterior_draws\n";
    for (std::size_t s = 0; s < table.names.size(); ++s) {
      const auto t = chi_square_uniformity(table.ranks[s], table.posterior_draws, 10);
      summary << table.names[s] << "," << t.statistic << "," << t.p_value << "," << t.bins << ","
              << table.posterior_draws << "\n";
    }
    written.push_back("sbc_ranks.csv");
    written.push_back("sbc_summary.csv");
  }
  return written;
}

// ---------------------------------------------------------------------------
// contract: curve CSV + per-cell details + SVG
// ---------------------------------------------------------------------------

inline ContractionSetup contraction_setup_from(const ExperimentConfig& cfg, unsigned workers) {
  ContractionSetup setup;
  setup.model = cfg.model;
  setup.lambda0 = cfg.lambda0.materialize(cfg.grid);
  const FilterFamily family = cfg.filters;
  setup.filter_family = [family](int n) { return family.materialize(n); };
  setup.n_schedule = cfg.n_schedule;
  setup.M = cfg.M;
  setup.alpha = cfg.alpha;
  setup.mcmc = cfg.mcmc;
  setup.replications = cfg.replications;
  setup.root_seed = cfg.root_seed;
  setup.workers = workers;
  return setup;
}

inline std::vector<std::string> write_contract_outputs(const ContractionRun& run,
                                                       const ExperimentConfig& cfg,
                                                       const std::filesystem::path& out_dir) {
  std::vector<std::string> written;
  {
    auto out = open_output(out_dir, "curve.csv", "contract", cfg);
    out << "n,radius,mass_outside,median_distance,replications\n";
    for (const auto& row : run.curve.rows)
      out << row.n << "," << row.radius << "," << row.mass_outside << "," << row.median_distance
          << "," << row.replications << "\n";
    written.push_back("curve.csv");
  }
  {
    auto out = open_output(out_dir, "details.csv", "contract", cfg);
    out << "n,replication,median_distance,mass_outside,"
        << "gamma_inf,gamma_l2,gamma_sqrt_l2,hellinger,kl,variance\n";
    for (std::size_t row = 0; row < run.curve.rows.size(); ++row)
      for (std::size_t rep = 0; rep < run.curve.median_by_replication[row].size(); ++rep) {
        const auto& r = run.mean_rate_reports[row][rep];
        out << run.curve.rows[row].n << "," << rep << ","
            << run.curve.median_by_replication[row][rep] << ","
            << run.curve.mass_by_replication[row][rep] << "," << r.gamma_inf << "," << r.gamma_l2
            << "," << r.gamma_sqrt_l2 << "," << r.hellinger << "," << r.kl << "," << r.variance
            << "\n";
      }
    written.push_back("details.csv");
  }
  {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "curve.svg");
    out.precision(12);
    SvgSeries median{"median_distance", {}};
    SvgSeries mass{"mass_outside", {}};
    SvgSeries radius{"radius", {}};
    for (const auto& row : run.curve.rows) {
      median.points.emplace_back(static_cast<double>(row.n), row.median_distance);
      mass.points.emplace_back(static_cast<double>(row.n), row.mass_outside);
      radius.points.emplace_back(static_cast<double>(row.n), row.radius);
    }
    write_loglog_svg(out, "posterior contraction", "n", {median, mass, radius},
                     {"coxcontract contract", "config_hash=" + hex_u64(cfg.config_hash),
                      "root_seed=" + std::to_string(cfg.root_seed)});
    written.push_back("curve.svg");
  }
  return written;
}

inline std::vector<std::string> run_contract(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out_dir,
                                             unsigned workers) {
  const auto run = run_contraction_experiment_full(contraction_setup_from(cfg, workers));
  return write_contract_outputs(run, cfg, out_dir);
}

// ---------------------------------------------------------------------------
// check: constants + conditions + thresholds report
// ---------------------------------------------------------------------------

inline std::string condition_csv_row(const ConditionRecord& rec, std::int64_t n) {
  std::ostringstream os;
  os.precision(17);
  os << rec.name << "," << n << "," << rec.lhs << "," << rec.rhs << ","
     << (rec.holds ? "true" : "false") << ",";
  if (rec.minimal_n)
    os << *rec.minimal_n;
  else
    os << "none";
  return os.str();
}

struct CheckOutcome {
  std::vector<std::string> files;
  std::string summary;
  bool all_hold = true;
};

inline CheckOutcome run_check(const ExperimentConfig& cfg, const ConfigMap& raw,
                              const std::filesystem::path& out_dir) {
  CheckOutcome outcome;
  std::ostringstream summary;
  auto out = open_output(out_dir, "conditions.csv", "check", cfg);

  // Derived lengthscale-prior envelope, when the Gamma parameters are given.
  ConstantLedger lg = cfg.ledger;
  if (raw.has("lengthscale.a") && raw.has("lengthscale.b")) {
    const LengthscalePrior prior{raw.get_double("lengthscale.a"), raw.get_double("lengthscale.b")};
    const auto k = gamma_prior_constants(prior, cfg.grid.dimension());
    out << "# gamma_prior_constants C1=" << k.C1 << " C2=" << k.C2 << " D1=" << k.D1
        << " D2=" << k.D2 << " q1=" << k.q1 << " q2=" << k.q2 << "\n";
    summary << "gamma_prior_constants: (" << k.C1 << ", " << k.C2 << ", " << k.D1 << ", " << k.D2
            << ", " << k.q1 << ", " << k.q2 << ")\n";
    if (std::isnan(lg.C1)) lg.C1 = k.C1;
    if (std::isnan(lg.C2)) lg.C2 = k.C2;
    if (std::isnan(lg.D1)) lg.D1 = k.D1;
    if (std::isnan(lg.D2)) lg.D2 = k.D2;
    if (std::isnan(lg.q1)) lg.q1 = k.q1;
    lg.q2 = k.q2;
  }

  out << "condition,n,lhs,rhs,holds,minimal_n\n";
  const std::string which = raw.get_string("check.model", model_name(cfg.model.kind));
  const std::int64_t n = cfg.check_n;
  std::vector<ModelKind> kinds;
  if (which == "both")
    kinds = {ModelKind::qgcp, ModelKind::sgcp};
  else if (which == "qgcp")
    kinds = {ModelKind::qgcp};
  else if (which == "sgcp")
    kinds = {ModelKind::sgcp};
  else
    throw std::runtime_error("config: check.model must be qgcp, sgcp, or both");

  for (const ModelKind kind : kinds) {
    ConditionReport rep = kind == ModelKind::qgcp
                              ? check_qgcp_conditions(lg, n, cfg.variant)
                              : check_sgcp_conditions(lg, n, cfg.sgcp8_exponent);
    summary << model_name(kind) << " constants:\n";
    for (const auto& c : rep.constraints) {
      out << condition_csv_row(c, 0) << "\n";
      summary << "  " << c.name << ": " << (c.holds ? "holds" : "FAILS") << "\n";
      outcome.all_hold = outcome.all_hold && c.holds;
    }
    summary << model_name(kind) << " conditions at n=" << n << ":\n";
    for (auto& c : rep.conditions) {
      c.minimal_n = minimal_n(c.name, lg, cfg.check_n_max, cfg.variant, cfg.sgcp8_exponent);
      out << condition_csv_row(c, n) << "\n";
      summary << "  " << c.name << ": " << (c.holds ? "holds" : "FAILS") << " (minimal n ";
      if (c.minimal_n)
        summary << *c.minimal_n;
      else
        summary << "not found <= " << cfg.check_n_max;
      summary << ")";
      if (!c.note.empty()) summary << " [" << c.note << "]";
      summary << "\n";
      outcome.all_hold = outcome.all_hold && c.holds;
    }
  }

  // Generic-bound thresholds and value, when the free constants are present.
  if (!std::isnan(lg.C) && !std::isnan(lg.J) && !std::isnan(lg.M) && !std::isnan(lg.lambda0_min) &&
      !std::isnan(lg.sup_lambda0)) {
    const ModelKind kind = kinds.front();
    auto eps = [&](std::int64_t nn) {
      return epsilon_n(kind, nn, lg.alpha, lg.dim(), lg.sup_lambda0);
    };
    const auto t = contraction_bound_thresholds(lg, eps, cfg.check_n_max);
    auto fmt = [](const std::optional<std::int64_t>& v) {
      return v ? std::to_string(*v) : std::string("none");
    };
    summary << "bound thresholds: n1=" << fmt(t.n1) << " n2=" << fmt(t.n2) << " n3=" << fmt(t.n3)
            << "\n";
    out << "# thresholds n1=" << fmt(t.n1) << " n2=" << fmt(t.n2) << " n3=" << fmt(t.n3) << "\n";
    summary << "bound value at n=" << n << ": " << contraction_bound(lg, n, eps(n)) << "\n";
  }

  outcome.files.push_back("conditions.csv");
  outcome.summary = summary.str();
  return outcome;
}

// ---------------------------------------------------------------------------
// plot: SVG from an existing curve CSV
// ---------------------------------------------------------------------------

inline std::string run_plot(const std::filesystem::path& curve_csv,
                            const std::filesystem::path& out_dir, const ExperimentConfig& cfg) {
  std::ifstream in(curve_csv);
  if (!in) throw std::runtime_error("cannot open curve csv: " + curve_csv.string());
  std::string line;
  SvgSeries median{"median_distance", {}};
  SvgSeries mass{"mass_outside", {}};
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream row(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(row, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() < 4) throw std::runtime_error("plot: malformed curve row: " + line);
    median.points.emplace_back(vals[0], vals[3]);
    mass.points.emplace_back(vals[0], vals[2]);
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "plot.svg");
  out.precision(12);
  write_loglog_svg(out, "contraction curve", "n", {median, mass},
                   {"coxcontract plot", "config_hash=" + hex_u64(cfg.config_hash),
                    "root_seed=" + std::to_string(cfg.root_seed)});
  return "plot.svg";
}

}  // namespace coxcontract
