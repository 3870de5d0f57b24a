#pragma once
#include "twogamma/spectrum.hpp"
#include "twogamma/twophoton.hpp"
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twogamma {

//! Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! One truncation mode requested by a run: "full" (all multipoles up to
//! L_max) or "dipole".
enum class TruncationMode { full, dipole };
std::string to_string(TruncationMode m);

//==============================================================================
//! Complete, validated run configuration. Every field has a default; a JSON
//! file and dotted-name overrides ("basis.n_splines=120") fill it in.
struct RunConfig {
  std::vector<int> Z{92};
  std::vector<std::string> transitions{"1s2s 1S0"};
  std::vector<double> y{0.5};

  int theta_points{181};
  double theta_min_deg{0.0};
  double theta_max_deg{180.0};

  int L_max{5};
  std::vector<TruncationMode> modes{TruncationMode::full};
  bool include_negative_energy{true};
  std::vector<std::string> channels;

  BasisParams basis;
  double energy_override_keV{0.0};
  double pole_epsilon{1.0e-6};
  double y_min{0.01};

  int rate_y_points{25};

  //! also recompute with L_max + 2 and doubled n_splines; record shifts
  bool convergence_check{false};
  double convergence_tol_lmax{1.0e-3};
  double convergence_tol_basis{5.0e-3};

  int spectrum_n_check{3};

  std::string out_dir{"out"};
  std::string format{"csv"};

  //! theta grid in degrees (points == 1 gives the midpoint)
  std::vector<double> theta_grid_deg() const;
  //! same grid in radians
  std::vector<double> theta_grid() const;
  Truncation truncation(TruncationMode m) const;
  EngineOptions engine_options() const;
  //! transition with the energy override applied
  TransitionSpec transition(const std::string &label, int Z) const;
};

//! Default configuration as JSON (documents every recognised key).
std::string default_config_json();

//! Parse a JSON document on top of the defaults. Unknown keys and type
//! errors throw ConfigError.
RunConfig config_from_json(const std::string &json_text);
//! Read and parse a config file; ConfigError if unreadable.
RunConfig config_from_file(const std::string &path);

//! Apply "dotted.key" = value overrides to a JSON document and re-parse.
//! Values are JSON literals ("120", "true", "[54,79]", "\"csv\"") or bare
//! strings; comma-separated numbers become arrays for list-valued keys.
RunConfig apply_overrides(const std::string &json_text,
                          const std::vector<std::pair<std::string,
                                                      std::string>> &overrides);

//! Resolved configuration as JSON (for provenance sidecars).
std::string config_to_json(const RunConfig &cfg);

//! All dotted leaf keys of the configuration schema.
std::vector<std::string> config_keys();

//! Check ranges and cross-field consistency; throws ConfigError.
void validate(const RunConfig &cfg);

} // namespace twogamma
