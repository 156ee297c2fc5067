#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "friedrichs/config_io.hpp"
#include "friedrichs/lattice_oracle.hpp"
#include "friedrichs/spectral.hpp"

#ifndef FRIEDRICHS_VERSION
#define FRIEDRICHS_VERSION "0.0.0"
#endif

namespace friedrichs::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::string builtin = "cubic";
  std::string out;
  int grid = 0;
  double tol = 0.0;
};

ConfigFile resolve_config(const Globals& g) {
  ConfigFile cfg;
  if (!g.config.empty()) {
    cfg = load_config(g.config);
  } else if (g.builtin == "cubic") {
    cfg.model = builtin_cubic();
  } else if (g.builtin == "cubic-vanishing") {
    cfg.model = builtin_cubic_vanishing();
  } else if (g.builtin == "cubic-trig") {
    cfg.model = cubic_as_trig_poly();
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown builtin model '" + g.builtin + "'");
  }
  if (g.grid > 0) cfg.quadrature.grid = g.grid;
  if (g.tol > 0.0) cfg.quadrature.rel_tol = g.tol;
  validate(cfg.quadrature);
  return cfg;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json metadata(const ConfigFile& cfg) {
  return {{"version", FRIEDRICHS_VERSION},
          {"config_hash", hex64(fnv1a(serialize_config(cfg)))},
          {"family", cfg.model.family == Family::TwoParticle ? "two_particle" : "trig_poly"},
          {"quadrature", to_json(cfg.quadrature)}};
}

json matrix_json(const Mat3& a) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({a(i, 0), a(i, 1), a(i, 2)});
  return rows;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void emit(const Globals& g, const std::string& name, const json& doc, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  out << text;
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    std::ofstream f(fs::path(g.out) / (name + ".json"), std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidInput, "cannot write to output directory '" + g.out + "'");
    f << text;
  }
}

int thread_count(std::size_t tasks) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("FRIEDRICHS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(1, tasks)));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// -------------------------------------------------------------- commands

int cmd_threshold(const Globals& g, const std::string& p_text, std::ostream& out) {
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const TorusVector p = parse_point(p_text);
  SpectralProblem sp(model, p, cfg.quadrature);
  const auto& cp = sp.critical_point();
  const OmegaValue om = sp.threshold_omega();
  json doc = {{"p", p.components()},
              {"q0", cp.q0.components()},
              {"M", cp.M},
              {"m", cp.m},
              {"hessian", matrix_json(cp.hessian)},
              {"hessian_eigenvalues", {cp.hessian_eigenvalues[0], cp.hessian_eigenvalues[1], cp.hessian_eigenvalues[2]}},
              {"mu_threshold", 1.0 / om.value},
              {"omega_threshold", om.value},
              {"estimated_error", om.estimated_error},
              {"ball_radius", sp.integrator().rho()},
              {"metadata", metadata(cfg)}};
  emit(g, "threshold", doc, out);
  return kSuccess;
}

int cmd_eigenvalue(const Globals& g, const std::string& p_text, const std::string& mu_text, bool expansion,
                   std::ostream& out) {
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const TorusVector p = parse_point(p_text);
  const MuSpec ms = parse_mu_spec(mu_text);
  SpectralProblem sp(model, p, cfg.quadrature);
  json doc = to_json(sp.report(ms.resolve(sp.mu_threshold()), expansion));
  doc["mu_spec"] = ms.text;
  doc["metadata"] = metadata(cfg);
  emit(g, "eigenvalue", doc, out);
  return kSuccess;
}

int cmd_classify(const Globals& g, const std::string& p_text, const std::string& mu_text, bool at_threshold,
                 std::ostream& out) {
  if (at_threshold == !mu_text.empty()) {
    throw Error(ErrorCode::InvalidInput, "classify needs exactly one of --mu or --at-threshold");
  }
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const TorusVector p = parse_point(p_text);
  SpectralProblem sp(model, p, cfg.quadrature);
  const double mu = at_threshold ? sp.mu_threshold() : parse_mu_spec(mu_text).resolve(sp.mu_threshold());
  const ClassificationResult c = sp.classify(mu);
  json doc = {{"p", p.components()},
              {"mu", mu},
              {"mu_threshold", c.mu_threshold},
              {"classification", std::string(to_string(c.label))},
              {"phi_at_q0", c.phi_at_q0},
              {"phi_sup", c.phi_sup},
              {"l2_divergence_exponent", opt(c.l2_exponent)},
              {"l1_divergence_exponent", opt(c.l1_exponent)},
              {"metadata", metadata(cfg)}};
  emit(g, "classify", doc, out);
  return kSuccess;
}

int cmd_expansion(const Globals& g, const std::string& p_text, std::ostream& out) {
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const TorusVector p = parse_point(p_text);
  SpectralProblem sp(model, p, cfg.quadrature);
  const ExpansionFit f = sp.expansion_fit();
  json doc = {{"p", p.components()},
              {"a", f.a},
              {"b", f.b},
              {"c", f.c},
              {"tau0_fit", f.tau0_fit},
              {"tau0_closed", f.tau0_closed},
              {"residual", f.residual},
              {"sample_scale", f.sample_scale},
              {"sqrt_term_ratio", f.sqrt_term_ratio},
              {"window", {f.window_lo, f.window_hi}},
              {"metadata", metadata(cfg)}};
  emit(g, "expansion", doc, out);
  return kSuccess;
}

int cmd_oracle(const Globals& g, const std::string& p_text, const std::string& mu_text, const std::vector<int>& sizes,
               int dense, std::ostream& out) {
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const TorusVector p = parse_point(p_text);
  const MuSpec ms = parse_mu_spec(mu_text);
  SpectralProblem sp(model, p, cfg.quadrature);
  const double mu = ms.resolve(sp.mu_threshold());
  const std::optional<double> E = sp.solve_eigenvalue(mu);

  json rows = json::array();
  const ConvergenceReport rep = convergence_report(model, p, mu, sizes, E.value_or(0.0));
  for (const auto& r : rep.rows) {
    json row = {{"N", r.N}, {"root", opt(r.root)}};
    row["abs_dev"] = E && r.root ? json(r.abs_dev) : json(nullptr);
    row["rel_dev"] = E && r.root ? json(r.rel_dev) : json(nullptr);
    rows.push_back(row);
  }
  json doc = {{"p", p.components()},
              {"mu", mu},
              {"mu_spec", ms.text},
              {"mu_threshold", sp.mu_threshold()},
              {"continuum_E", opt(E)},
              {"rows", rows},
              {"decreasing_in_trend", E ? json(rep.decreasing_in_trend()) : json(nullptr)},
              {"metadata", metadata(cfg)}};
  if (dense > 0) {
    const OracleResult d = dense_spectrum(model, p, mu, dense);
    doc["dense"] = {{"N", d.N},
                    {"min_diag", d.min_diag},
                    {"max_diag", d.max_diag},
                    {"min_eig", opt(d.min_eig)},
                    {"max_eig", opt(d.max_eig)},
                    {"above_max_diag", d.above_max_diag},
                    {"lowest", d.lowest},
                    {"highest", d.highest}};
  }
  emit(g, "oracle", doc, out);
  if (!g.out.empty() && E) {
    std::ofstream f(fs::path(g.out) / "oracle.csv", std::ios::binary);
    write_csv(f, rep);
  }
  return kSuccess;
}

struct SweepRow {
  std::string p_text[3];
  std::string M, m, mu_p, mu_spec, mu, E, cls, tau0_fit, tau0_closed, oracle_root, error;
  bool ok = false;
  ErrorCode code = ErrorCode::Internal;
};

int cmd_sweep(const Globals& g, const std::string& path_text, const std::string& points_text, int samples,
              const std::string& mu_text, const std::vector<std::string>& outputs, std::ostream& out,
              std::ostream& err) {
  if (g.out.empty()) throw Error(ErrorCode::InvalidInput, "sweep needs --out DIR");
  if (outputs.empty()) throw Error(ErrorCode::InvalidInput, "sweep needs at least one output");
  bool want_expansion = false, want_oracle = false;
  for (const auto& o : outputs) {
    if (o == "expansion") {
      want_expansion = true;
    } else if (o == "oracle") {
      want_oracle = true;
    } else if (o != "threshold" && o != "eigenvalue" && o != "classify") {
      throw Error(ErrorCode::InvalidInput, "unknown sweep output '" + o + "'");
    }
  }
  if (path_text.empty() == points_text.empty()) {
    throw Error(ErrorCode::InvalidInput, "sweep needs exactly one of --path or --points");
  }
  const ConfigFile cfg = resolve_config(g);
  const DispersionModel model = model_from_config(cfg.model);
  const std::vector<TorusVector> points =
      path_text.empty() ? sample_path(parse_waypoints(points_text), 1) : sample_path(parse_waypoints(path_text), samples);
  const std::vector<MuSpec> mus = parse_mu_list(mu_text);

  std::vector<std::vector<SweepRow>> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const TorusVector& p = points[i];
      std::vector<SweepRow>& block = rows[i];
      block.resize(mus.size());
      for (std::size_t k = 0; k < mus.size(); ++k) {
        for (int c = 0; c < 3; ++c) block[k].p_text[c] = format_double(p[c]);
        block[k].mu_spec = mus[k].text;
      }
      std::optional<SpectralProblem> sp;
      std::string fit_fit, fit_closed, fit_error;
      try {
        sp.emplace(model, p, cfg.quadrature);
        const double mu_p = sp->mu_threshold();
        for (auto& r : block) {
          r.M = format_double(sp->critical_point().M);
          r.m = format_double(sp->critical_point().m);
          r.mu_p = format_double(mu_p);
        }
        if (want_expansion) {
          fit_closed = format_double(tau0_closed_form(model, sp->critical_point()));
          try {
            fit_fit = format_double(sp->expansion_fit().tau0_fit);
          } catch (const Error& e) {
            fit_error = e.what();
          }
        }
      } catch (const Error& e) {
        for (auto& r : block) {
          r.error = e.what();
          r.code = e.code();
        }
        continue;
      }
      for (std::size_t k = 0; k < mus.size(); ++k) {
        SweepRow& r = block[k];
        try {
          const double mu = mus[k].resolve(sp->mu_threshold());
          r.mu = format_double(mu);
          const std::optional<double> E = sp->solve_eigenvalue(mu);
          if (E) r.E = format_double(*E);
          r.cls = std::string(to_string(sp->classify(mu).label));
          if (want_expansion) {
            r.tau0_fit = fit_fit;
            r.tau0_closed = fit_closed;
            r.error = fit_error;
          }
          if (want_oracle) {
            const OracleResult o = secular_root(model, p, mu, 64);
            if (o.secular_root) r.oracle_root = format_double(*o.secular_root);
          }
          r.ok = r.error.empty();
        } catch (const Error& e) {
          r.error = e.what();
          r.code = e.code();
        }
      }
    }
  };
  const int nthreads = thread_count(points.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  fs::create_directories(g.out);
  const fs::path csv_path = fs::path(g.out) / "sweep.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error(ErrorCode::InvalidInput, "cannot write " + csv_path.string());
  csv << "p1,p2,p3,M,m,mu_threshold,mu_spec,mu,E,classification";
  if (want_expansion) csv << ",tau0_fit,tau0_closed";
  if (want_oracle) csv << ",oracle_root_N64";
  csv << ",error\n";
  std::size_t ok = 0, total = 0;
  std::optional<ErrorCode> first_error;
  for (const auto& block : rows) {
    for (const auto& r : block) {
      ++total;
      if (r.ok) {
        ++ok;
      } else if (!first_error) {
        first_error = r.code;
      }
      csv << r.p_text[0] << ',' << r.p_text[1] << ',' << r.p_text[2] << ',' << r.M << ',' << r.m << ',' << r.mu_p
          << ',' << csv_field(r.mu_spec) << ',' << r.mu << ',' << r.E << ',' << r.cls;
      if (want_expansion) csv << ',' << r.tau0_fit << ',' << r.tau0_closed;
      if (want_oracle) csv << ',' << r.oracle_root;
      csv << ',' << csv_field(r.error) << '\n';
    }
  }
  csv.close();

  json pts = json::array();
  for (const auto& p : points) pts.push_back(p.components());
  json mu_list = json::array();
  for (const auto& m : mus) mu_list.push_back(m.text);
  json manifest = {{"version", FRIEDRICHS_VERSION},
                   {"config", to_json(cfg)},
                   {"config_hash", hex64(fnv1a(serialize_config(cfg)))},
                   {"quadrature", to_json(cfg.quadrature)},
                   {"outputs", outputs},
                   {"mu", mu_list},
                   {"points", pts},
                   {"rows", total},
                   {"failed_rows", total - ok},
                   {"row_order", "p-major, mu-minor"},
                   {"csv", "sweep.csv"}};
  std::ofstream mf(fs::path(g.out) / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  out << json{{"rows", total}, {"failed_rows", total - ok}, {"csv", csv_path.string()}}.dump() << "\n";
  if (ok == 0) {
    err << "error: every sweep row failed\n";
    return first_error ? exit_code_for(*first_error) : kNumerical;
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bound states and threshold resonances of rank-one lattice operators", "friedrichs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON model config file");
  app.add_option("--builtin", g.builtin, "Builtin model when no config is given: cubic, cubic-vanishing, cubic-trig");
  app.add_option("--out", g.out, "Directory for output files");
  app.add_option("--grid", g.grid, "Quadrature grid points per axis")->check(CLI::Range(16, 4096));
  app.add_option("--tol", g.tol, "Quadrature relative tolerance")->check(CLI::PositiveNumber);

  std::string p_text = "0,0,0";
  std::string mu_text;
  bool at_threshold = false;
  bool expansion_flag = false;

  auto* threshold = app.add_subcommand("threshold", "Band edge and coupling threshold mu(p)");
  threshold->add_option("--p", p_text, "Quasi-momentum x,y,z (pi allowed, e.g. pi/2,0,0)");

  auto* eigen = app.add_subcommand("eigenvalue", "Eigenvalue above the band and its report");
  eigen->add_option("--p", p_text, "Quasi-momentum x,y,z");
  eigen->add_option("--mu", mu_text, "Coupling: absolute value or xK for K * mu(p)")->required();
  eigen->add_flag("--expansion", expansion_flag, "Also fit the threshold expansion");

  auto* classify = app.add_subcommand("classify", "Regular point, resonance, threshold eigenvalue or bound state");
  classify->add_option("--p", p_text, "Quasi-momentum x,y,z");
  classify->add_option("--mu", mu_text, "Coupling: absolute value or xK");
  classify->add_flag("--at-threshold", at_threshold, "Use mu = mu(p) exactly");

  auto* expansion = app.add_subcommand("expansion", "Square-root expansion of Omega at the band edge");
  expansion->add_option("--p", p_text, "Quasi-momentum x,y,z");

  std::string oracle_mu = "x2";
  std::vector<int> sizes{16, 32, 64};
  int dense = 0;
  auto* oracle = app.add_subcommand("oracle", "Finite-lattice secular roots and dense spectra");
  oracle->add_option("--p", p_text, "Quasi-momentum x,y,z");
  oracle->add_option("--mu", oracle_mu, "Coupling: absolute value or xK");
  oracle->add_option("--sizes", sizes, "Lattice sizes N")->delimiter(',')->check(CLI::Range(2, 512));
  oracle->add_option("--dense", dense, "Also diagonalize the N^3 matrix (N <= 12)")->check(CLI::Range(2, 12));

  std::string path_text, points_text;
  int samples = 9;
  std::string sweep_mu = "x0.5,x1,x2";
  std::vector<std::string> outputs{"threshold", "eigenvalue", "classify"};
  auto* sweep = app.add_subcommand("sweep", "Sweep over quasi-momenta and couplings");
  sweep->add_option("--path", path_text, "Waypoints x,y,z;x,y,z;...");
  sweep->add_option("--points", points_text, "Explicit points x,y,z;x,y,z;...");
  sweep->add_option("--samples", samples, "Samples per path segment")->check(CLI::PositiveNumber);
  sweep->add_option("--mu", sweep_mu, "Couplings, comma separated, absolute or xK");
  sweep->add_option("--outputs", outputs, "threshold,eigenvalue,classify,expansion,oracle")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*threshold) return cmd_threshold(g, p_text, out);
    if (*eigen) return cmd_eigenvalue(g, p_text, mu_text, expansion_flag, out);
    if (*classify) return cmd_classify(g, p_text, mu_text, at_threshold, out);
    if (*expansion) return cmd_expansion(g, p_text, out);
    if (*oracle) return cmd_oracle(g, p_text, oracle_mu, sizes, dense, out);
    if (*sweep) return cmd_sweep(g, path_text, points_text, samples, sweep_mu, outputs, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsageError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("friedrichs");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace friedrichs::cli
