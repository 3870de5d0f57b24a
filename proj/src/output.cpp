#include "twogamma/output.hpp"
#include "twogamma/constants.hpp"
#include "twogamma/version.hpp"
#include "json.hpp"
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twogamma {

using json = nlohmann::ordered_json;

std::string format_g17(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string slug(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '/')
      out += '-';
    else
      out += c;
  }
  return out;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double deg(double rad) { return rad * 180.0 / constants::pi; }

// JSON numbers: keep nan/inf representable
json num(double x) {
  if (std::isfinite(x))
    return x;
  return format_g17(x);
}

json transition_json(const TransitionSpec &t, double dE) {
  return {{"label", t.label},
          {"Z", t.Z},
          {"ion", t.helium_like() ? "helium_like" : "hydrogen_like"},
          {"J_initial", t.twice_Ji / 2.0},
          {"J_final", t.twice_Jf / 2.0},
          {"energy_mc2", dE},
          {"energy_keV", dE * constants::mc2_keV},
          {"energy_override", t.energy_override > 0.0}};
}

json diagnostics_json(const TwoPhotonEngine::Diagnostics &d) {
  return {{"orthonormality_residual", d.orthonormality},
          {"bound_energy_error", d.bound_energy},
          {"completeness_defect", d.completeness},
          {"spurious_gap_states", d.spurious_states}};
}

} // namespace

//==============================================================================
std::string correlation_csv(const CorrelationRecord &r) {
  std::string s = "theta_deg,W_absolute,W_normalized_at_90deg\n";
  const auto &res = r.result;
  for (std::size_t i = 0; i < res.theta.size(); ++i) {
    const double th =
        i < r.theta_deg.size() ? r.theta_deg[i] : deg(res.theta[i]);
    const double norm = r.W90 != 0.0 ? res.W[i] / r.W90 : std::nan("");
    s += format_g17(th) + "," + format_g17(res.W[i]) + "," +
         format_g17(norm) + "\n";
  }
  return s;
}

std::string rate_csv(const RateRecord &r) {
  std::string s = "y,dW_dy,weight\n";
  for (std::size_t i = 0; i < r.rate.y.size(); ++i)
    s += format_g17(r.rate.y[i]) + "," + format_g17(r.rate.dWdy[i]) + "," +
         format_g17(r.rate.weight[i]) + "\n";
  return s;
}

std::string correlation_stem(const CorrelationRecord &r) {
  return "W_Z" + std::to_string(r.result.transition.Z) + "_" +
         slug(r.result.transition.label) + "_y" + short_num(r.result.y) + "_" +
         to_string(r.mode);
}

std::string rate_stem(const RateRecord &r) {
  return "rate_Z" + std::to_string(r.transition.Z) + "_" +
         slug(r.transition.label) + "_" + to_string(r.mode);
}

std::string correlation_json(const CorrelationRecord &r, const RunConfig &cfg,
                             bool with_data) {
  const auto &res = r.result;
  json j;
  j["program"] = "twogamma";
  j["version"] = version;
  j["kind"] = "angular_correlation";
  j["transition"] = transition_json(res.transition, res.transition_energy);
  j["y"] = res.y;
  j["photon_energies_keV"] = {res.y * res.transition_energy * constants::mc2_keV,
                              (1.0 - res.y) * res.transition_energy *
                                  constants::mc2_keV};
  j["mode"] = to_string(r.mode);
  j["truncation"] = res.truncation.describe();
  j["basis"] = res.basis_fingerprint;
  j["basis_retries"] = r.basis_retries;
  j["diagnostics"] = diagnostics_json(r.diagnostics);
  j["W_90deg"] = r.W90;
  if (r.shift_lmax >= 0.0)
    j["convergence"] = {{"shift_L_max_plus_2", r.shift_lmax},
                        {"shift_n_splines_doubled", r.shift_basis}};
  j["units"] = {{"theta", "deg"}, {"W", "s^-1"}};
  j["columns"] = {"theta_deg", "W_absolute", "W_normalized_at_90deg"};
  j["config"] = json::parse(config_to_json(cfg));
  if (with_data) {
    json rows = json::array();
    for (std::size_t i = 0; i < res.theta.size(); ++i)
      rows.push_back({num(i < r.theta_deg.size() ? r.theta_deg[i]
                                                 : deg(res.theta[i])),
                      num(res.W[i]),
                      num(r.W90 != 0.0 ? res.W[i] / r.W90 : std::nan(""))});
    j["data"] = rows;
  }
  return j.dump(2) + "\n";
}

std::string rate_json(const RateRecord &r, const RunConfig &cfg,
                      bool with_data) {
  json j;
  j["program"] = "twogamma";
  j["version"] = version;
  j["kind"] = "total_rate";
  j["transition"] = transition_json(r.transition, r.transition_energy);
  j["mode"] = to_string(r.mode);
  j["basis"] = r.basis_fingerprint;
  j["basis_retries"] = r.basis_retries;
  j["diagnostics"] = diagnostics_json(r.diagnostics);
  j["total_rate_per_s"] = r.rate.total;
  j["y_quadrature"] = "gauss_legendre";
  j["units"] = {{"dW_dy", "s^-1"}, {"total", "s^-1"}};
  j["columns"] = {"y", "dW_dy", "weight"};
  j["config"] = json::parse(config_to_json(cfg));
  if (with_data) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.rate.y.size(); ++i)
      rows.push_back({r.rate.y[i], num(r.rate.dWdy[i]), r.rate.weight[i]});
    j["data"] = rows;
  }
  return j.dump(2) + "\n";
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out)
    throw std::runtime_error("error writing '" + path + "'");
}

} // namespace twogamma
