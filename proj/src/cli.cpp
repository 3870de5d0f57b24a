#include "twogamma/cli.hpp"
#include "twogamma/config.hpp"
#include "twogamma/constants.hpp"
#include "twogamma/output.hpp"
#include "twogamma/spectrum.hpp"
#include "twogamma/twophoton.hpp"
#include "twogamma/version.hpp"
#include "CLI11.hpp"
#include "json.hpp"
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace twogamma {

namespace {

class ConvergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flags shared by every subcommand
struct Flags {
  std::string config;
  std::optional<std::string> Z, transition, y, format, out_dir;
  std::optional<int> theta_points, lmax, splines;
  std::optional<double> rmax;
  bool dipole_only{false};
  // dotted-name overrides, in registration order
  std::vector<std::pair<std::string, std::optional<std::string>>> dotted;
};

void add_flags(CLI::App *app, Flags &f) {
  app->add_option("--config", f.config, "JSON run configuration")
      ->check(CLI::ExistingFile);
  app->add_option("--Z", f.Z, "nuclear charge(s), comma separated");
  app->add_option("--transition", f.transition,
                  "transition label(s), comma separated");
  app->add_option("--y", f.y, "energy sharing value(s), comma separated");
  app->add_option("--theta-points", f.theta_points, "number of theta points");
  app->add_option("--lmax", f.lmax, "highest photon multipole");
  app->add_flag("--dipole-only", f.dipole_only,
                "dipole approximation only (2E1 or E1M1)");
  app->add_option("--splines", f.splines, "number of B-splines");
  app->add_option("--rmax", f.rmax, "box radius, units a0/Z");
  app->add_option("--out-dir", f.out_dir, "output directory");
  app->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  const auto keys = config_keys();
  f.dotted.reserve(keys.size());
  for (const auto &k : keys) {
    if (k.find('.') == std::string::npos)
      continue; // Z, transition, y have their own flags
    f.dotted.emplace_back(k, std::nullopt);
    app->add_option("--" + k, f.dotted.back().second)->group("Config keys");
  }
}

RunConfig resolve(const Flags &f) {
  std::string text;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in)
      throw ConfigError("cannot read configuration file '" + f.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<std::pair<std::string, std::string>> ov;
  for (const auto &[k, v] : f.dotted)
    if (v)
      ov.emplace_back(k, *v);
  if (f.Z)
    ov.emplace_back("Z", *f.Z);
  if (f.transition) {
    // labels contain spaces; always treat as comma-separated strings
    nlohmann::json arr = nlohmann::json::array();
    std::stringstream ss(*f.transition);
    std::string item;
    while (std::getline(ss, item, ','))
      arr.push_back(item);
    ov.emplace_back("transition", arr.dump());
  }
  if (f.y)
    ov.emplace_back("y", *f.y);
  if (f.theta_points)
    ov.emplace_back("theta.points", std::to_string(*f.theta_points));
  if (f.lmax)
    ov.emplace_back("truncation.L_max", std::to_string(*f.lmax));
  if (f.dipole_only)
    ov.emplace_back("truncation.modes", "[\"dipole\"]");
  if (f.splines)
    ov.emplace_back("basis.n_splines", std::to_string(*f.splines));
  if (f.rmax)
    ov.emplace_back("basis.r_max", format_g17(*f.rmax));
  if (f.out_dir)
    ov.emplace_back("output.dir", nlohmann::json(*f.out_dir).dump());
  if (f.format)
    ov.emplace_back("output.format", nlohmann::json(*f.format).dump());
  return apply_overrides(text, ov);
}

void set_workers() {
  const char *env = std::getenv("TWOGAMMA_WORKERS");
  if (!env || !*env)
    return;
  char *end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096)
    throw ConfigError(std::string("TWOGAMMA_WORKERS must be a positive "
                                  "integer, got '") +
                      env + "'");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

std::string out_path(const RunConfig &cfg, const std::string &name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void make_out_dir(const RunConfig &cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + cfg.out_dir +
                      "': " + ec.message());
}

double max_rel_shift(const std::vector<double> &a,
                     const std::vector<double> &b) {
  double scale = 0.0, d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return scale > 0.0 ? d / scale : d;
}

//==============================================================================
int cmd_correlate(const RunConfig &cfg, std::ostream &out) {
  const auto theta = cfg.theta_grid();
  const std::vector<double> t90{constants::pi / 2.0};
  std::vector<CorrelationRecord> records;
  for (int Z : cfg.Z) {
    for (const auto &label : cfg.transitions) {
      const auto tr = cfg.transition(label, Z);
      for (auto mode : cfg.modes) {
        const auto trunc = cfg.truncation(mode);
        TwoPhotonEngine eng(tr, cfg.basis, trunc, cfg.engine_options());
        std::unique_ptr<TwoPhotonEngine> eng_L, eng_N;
        if (cfg.convergence_check) {
          if (mode == TruncationMode::full) {
            auto t2 = trunc;
            t2.L_max += 2;
            eng_L = std::make_unique<TwoPhotonEngine>(tr, cfg.basis, t2,
                                                      cfg.engine_options());
          }
          auto b2 = cfg.basis;
          b2.n_splines *= 2;
          eng_N = std::make_unique<TwoPhotonEngine>(tr, b2, trunc,
                                                    cfg.engine_options());
        }
        const auto diag = eng.diagnostics();
        for (double y : cfg.y) {
          CorrelationRecord r;
          r.result = eng.correlation_function(y, theta);
          r.theta_deg = cfg.theta_grid_deg();
          r.mode = mode;
          r.W90 = eng.correlation_function(y, t90).W.front();
          r.basis_retries = eng.basis_retries();
          r.diagnostics = diag;
          if (cfg.convergence_check) {
            r.shift_lmax =
                eng_L ? max_rel_shift(r.result.W,
                                      eng_L->correlation_function(y, theta).W)
                      : 0.0;
            r.shift_basis = max_rel_shift(
                r.result.W, eng_N->correlation_function(y, theta).W);
            if (r.shift_lmax > cfg.convergence_tol_lmax ||
                r.shift_basis > cfg.convergence_tol_basis) {
              std::ostringstream os;
              os << "not converged: " << correlation_stem(r)
                 << " shift(L_max+2) = " << r.shift_lmax << " (tol "
                 << cfg.convergence_tol_lmax << "), shift(2 n_splines) = "
                 << r.shift_basis << " (tol " << cfg.convergence_tol_basis
                 << ")";
              throw ConvergenceError(os.str());
            }
          }
          records.push_back(std::move(r));
        }
      }
    }
  }
  make_out_dir(cfg);
  for (const auto &r : records) {
    const auto stem = correlation_stem(r);
    if (cfg.format == "csv") {
      write_text(out_path(cfg, stem + ".csv"), correlation_csv(r));
      write_text(out_path(cfg, stem + ".json"), correlation_json(r, cfg, false));
      out << out_path(cfg, stem + ".csv") << "\n";
    } else {
      write_text(out_path(cfg, stem + ".json"), correlation_json(r, cfg, true));
      out << out_path(cfg, stem + ".json") << "\n";
    }
  }
  return exit_ok;
}

int cmd_rate(const RunConfig &cfg, std::ostream &out) {
  std::vector<RateRecord> records;
  for (int Z : cfg.Z)
    for (const auto &label : cfg.transitions)
      for (auto mode : cfg.modes) {
        TwoPhotonEngine eng(cfg.transition(label, Z), cfg.basis,
                            cfg.truncation(mode), cfg.engine_options());
        RateRecord r;
        r.transition = eng.transition();
        r.mode = mode;
        r.rate = eng.total_rate(cfg.rate_y_points);
        r.transition_energy = eng.transition_energy();
        r.basis_fingerprint = eng.basis_params().fingerprint();
        r.basis_retries = eng.basis_retries();
        r.diagnostics = eng.diagnostics();
        records.push_back(std::move(r));
      }
  make_out_dir(cfg);
  for (const auto &r : records) {
    const auto stem = rate_stem(r);
    if (cfg.format == "csv") {
      write_text(out_path(cfg, stem + ".csv"), rate_csv(r));
      write_text(out_path(cfg, stem + ".json"), rate_json(r, cfg, false));
    } else {
      write_text(out_path(cfg, stem + ".json"), rate_json(r, cfg, true));
    }
    out << "Z=" << r.transition.Z << " " << r.transition.label << " ["
        << to_string(r.mode) << "] total rate = " << format_g17(r.rate.total)
        << " s^-1\n";
  }
  return exit_ok;
}

int cmd_spectrum_check(const RunConfig &cfg, std::ostream &out) {
  // kappa range: intermediate j up to j_max + L_max for j_0 = 1/2 initial
  // states, i.e. |kappa| <= L_max + 1
  const int kmax = cfg.L_max + 1;
  bool ok = true;
  nlohmann::ordered_json doc;
  doc["program"] = "twogamma";
  doc["version"] = version;
  doc["kind"] = "spectrum_check";
  doc["config"] = nlohmann::json::parse(config_to_json(cfg));
  for (int Z : cfg.Z) {
    auto &zj = doc["Z" + std::to_string(Z)];
    out << "Z = " << Z << "  basis " << cfg.basis.fingerprint() << "\n";
    if (cfg.basis.n_splines < cfg.basis.order + 1) {
      std::ostringstream os;
      os << "  FAIL under-resolved basis: n_splines = " << cfg.basis.n_splines
         << " < order + 1 = " << cfg.basis.order + 1
         << " (no bound states representable)";
      out << os.str() << "\n";
      zj["failure"] = os.str().substr(2);
      ok = false;
      continue;
    }
    DiracBasis basis(Z, cfg.basis);
    for (int ak = 1; ak <= kmax; ++ak)
      for (int kappa : {-ak, ak}) {
        SpectrumReport rep;
        try {
          rep = spectrum_report(build_spectrum(basis, kappa), basis,
                                cfg.spectrum_n_check);
        } catch (const SpectrumError &e) {
          out << "  kappa = " << kappa << "  FAIL " << e.what() << "\n";
          zj["kappa" + std::to_string(kappa)] = {{"failure", e.what()}};
          ok = false;
          continue;
        }
        const bool pass = rep.passed();
        ok = ok && pass;
        out << "  " << rep.summary() << "  " << (pass ? "PASS" : "FAIL")
            << "\n";
        zj["kappa" + std::to_string(kappa)] = {
            {"n_states", rep.n_states},
            {"n_negative", rep.n_negative},
            {"n_bound", rep.n_bound},
            {"n_positive", rep.n_positive},
            {"orthonormality_residual", rep.orthonormality_residual},
            {"bound_energy_error", rep.bound_energy_error},
            {"completeness_defect", rep.completeness_defect},
            {"n_compared", rep.n_compared},
            {"spurious_states", rep.spurious_states},
            {"passed", pass}};
      }
  }
  out << "kappa range |kappa| <= " << kmax << "\n";
  out << (ok ? "spectrum-check: PASS" : "spectrum-check: FAIL") << "\n";
  doc["passed"] = ok;
  make_out_dir(cfg);
  write_text(out_path(cfg, "spectrum_check.json"), doc.dump(2) + "\n");
  return ok ? exit_ok : exit_convergence;
}

} // namespace

//==============================================================================
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Relativistic two-photon decay: angular correlations and rates "
               "of hydrogen- and helium-like ions"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  Flags fc, fr, fs;
  auto *sc = app.add_subcommand("correlate", "angular correlation W(theta, y)");
  auto *sr = app.add_subcommand("rate", "spectral distribution and total rate");
  auto *ss = app.add_subcommand("spectrum-check", "finite-basis diagnostics");
  add_flags(sc, fc);
  add_flags(sr, fr);
  add_flags(ss, fs);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return exit_config;
  }

  try {
    set_workers();
    if (sc->parsed())
      return cmd_correlate(resolve(fc), out);
    if (sr->parsed())
      return cmd_rate(resolve(fr), out);
    return cmd_spectrum_check(resolve(fs), out);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const PhysicsDomainError &e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const PoleError &e) {
    err << "pole diagnostic: " << e.what() << " (kappa = " << e.kappa
        << ", E_nu = " << format_g17(e.energy)
        << ", omega = " << format_g17(e.omega)
        << ", denominator = " << format_g17(e.denominator) << ")\n";
    return exit_pole;
  } catch (const ConvergenceError &e) {
    err << "convergence failure: " << e.what() << "\n";
    return exit_convergence;
  } catch (const SpectrumError &e) {
    err << "convergence failure: " << e.what() << "\n";
    return exit_convergence;
  } catch (const ResolutionError &e) {
    err << "convergence failure: " << e.what() << "\n";
    return exit_convergence;
  } catch (const std::invalid_argument &e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }
}

} // namespace twogamma
