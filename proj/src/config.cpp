#include "twogamma/config.hpp"
#include "twogamma/constants.hpp"
#include "json.hpp"
#include <cmath>
#include <fstream>
#include <sstream>

namespace twogamma {

using json = nlohmann::ordered_json;

std::string to_string(TruncationMode m) {
  return m == TruncationMode::full ? "full" : "dipole";
}

//==============================================================================
std::vector<double> RunConfig::theta_grid_deg() const {
  if (theta_points == 1)
    return {0.5 * (theta_min_deg + theta_max_deg)};
  std::vector<double> t(static_cast<std::size_t>(theta_points));
  for (int i = 0; i < theta_points; ++i)
    t[static_cast<std::size_t>(i)] =
        theta_min_deg + (theta_max_deg - theta_min_deg) * i / (theta_points - 1.0);
  return t;
}

std::vector<double> RunConfig::theta_grid() const {
  auto t = theta_grid_deg();
  for (auto &x : t)
    x *= constants::pi / 180.0;
  return t;
}

Truncation RunConfig::truncation(TruncationMode m) const {
  Truncation t;
  t.L_max = L_max;
  t.dipole_only = (m == TruncationMode::dipole);
  t.include_negative_energy = include_negative_energy;
  t.channels = channels;
  return t;
}

EngineOptions RunConfig::engine_options() const {
  EngineOptions o;
  o.pole_epsilon = pole_epsilon;
  return o;
}

TransitionSpec RunConfig::transition(const std::string &label, int z) const {
  auto t = parse_transition(label, z);
  if (energy_override_keV > 0.0)
    t.energy_override = energy_override_keV / constants::mc2_keV;
  return t;
}

//==============================================================================
namespace {

json defaults_json() {
  RunConfig d;
  json j;
  j["Z"] = d.Z;
  j["transition"] = d.transitions;
  j["y"] = d.y;
  j["theta"] = {{"points", d.theta_points},
                {"min_deg", d.theta_min_deg},
                {"max_deg", d.theta_max_deg}};
  j["truncation"] = {{"L_max", d.L_max},
                     {"modes", json::array({"full"})},
                     {"include_negative_energy", d.include_negative_energy},
                     {"channels", json::array()}};
  j["basis"] = {{"n_splines", d.basis.n_splines},
                {"order", d.basis.order},
                {"r_max", d.basis.r_max},
                {"r_first", d.basis.r_first},
                {"h_scale", d.basis.h_scale},
                {"points_per_interval", d.basis.points_per_interval},
                {"nucleus", "point"},
                {"nuclear_radius_fm", d.basis.nuclear_radius_fm}};
  j["physics"] = {{"energy_override_keV", d.energy_override_keV},
                  {"pole_epsilon", d.pole_epsilon},
                  {"y_min", d.y_min}};
  j["rate"] = {{"y_points", d.rate_y_points}};
  j["convergence"] = {{"check", d.convergence_check},
                      {"tol_lmax", d.convergence_tol_lmax},
                      {"tol_basis", d.convergence_tol_basis}};
  j["spectrum_check"] = {{"n_check", d.spectrum_n_check}};
  j["output"] = {{"dir", d.out_dir}, {"format", d.format}};
  return j;
}

void collect_keys(const json &j, const std::string &prefix,
                  std::vector<std::string> &out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      collect_keys(*it, key, out);
    else
      out.push_back(key);
  }
}

// keys that hold lists but may be given as a scalar
bool list_key(const std::string &k) {
  return k == "Z" || k == "transition" || k == "y" || k == "truncation.modes" ||
         k == "truncation.channels";
}

// reject keys not present in the schema
void check_keys(const json &user, const json &schema, const std::string &path) {
  if (!user.is_object())
    throw ConfigError("configuration " +
                      (path.empty() ? std::string("root") : "'" + path + "'") +
                      " must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key()))
      throw ConfigError("unknown configuration key '" + key + "'");
    if (schema[it.key()].is_object())
      check_keys(*it, schema[it.key()], key);
  }
}

void merge(json &base, const json &user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) &&
        base[it.key()].is_object())
      merge(base[it.key()], *it);
    else
      base[it.key()] = *it;
  }
}

template <class T> T get(const json &j, const std::string &key) {
  try {
    return j.get<T>();
  } catch (const std::exception &) {
    throw ConfigError("configuration key '" + key + "' has the wrong type (" +
                      std::string(j.type_name()) + ")");
  }
}

template <class T> std::vector<T> get_list(const json &j, const std::string &key) {
  if (j.is_array()) {
    std::vector<T> out;
    for (const auto &e : j)
      out.push_back(get<T>(e, key));
    return out;
  }
  return {get<T>(j, key)};
}

int get_int(const json &j, const std::string &key) {
  if (j.is_number_integer())
    return j.get<int>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 1e9)
      return static_cast<int>(v);
  }
  throw ConfigError("configuration key '" + key + "' must be an integer");
}

RunConfig from_json(const json &j) {
  RunConfig c;
  if (j["Z"].is_array()) {
    c.Z.clear();
    for (const auto &e : j["Z"])
      c.Z.push_back(get_int(e, "Z"));
  } else {
    c.Z = {get_int(j["Z"], "Z")};
  }
  c.transitions = get_list<std::string>(j["transition"], "transition");
  c.y = get_list<double>(j["y"], "y");
  const auto &th = j["theta"];
  c.theta_points = get_int(th["points"], "theta.points");
  c.theta_min_deg = get<double>(th["min_deg"], "theta.min_deg");
  c.theta_max_deg = get<double>(th["max_deg"], "theta.max_deg");
  const auto &tr = j["truncation"];
  c.L_max = get_int(tr["L_max"], "truncation.L_max");
  c.modes.clear();
  for (const auto &m : get_list<std::string>(tr["modes"], "truncation.modes")) {
    if (m == "full")
      c.modes.push_back(TruncationMode::full);
    else if (m == "dipole")
      c.modes.push_back(TruncationMode::dipole);
    else
      throw ConfigError("truncation.modes: unknown mode '" + m +
                        "' (use \"full\" or \"dipole\")");
  }
  c.include_negative_energy =
      get<bool>(tr["include_negative_energy"], "truncation.include_negative_energy");
  c.channels = get_list<std::string>(tr["channels"], "truncation.channels");
  const auto &b = j["basis"];
  c.basis.n_splines = get_int(b["n_splines"], "basis.n_splines");
  c.basis.order = get_int(b["order"], "basis.order");
  c.basis.r_max = get<double>(b["r_max"], "basis.r_max");
  c.basis.r_first = get<double>(b["r_first"], "basis.r_first");
  c.basis.h_scale = get<double>(b["h_scale"], "basis.h_scale");
  c.basis.points_per_interval =
      get_int(b["points_per_interval"], "basis.points_per_interval");
  const auto nuc = get<std::string>(b["nucleus"], "basis.nucleus");
  if (nuc == "point")
    c.basis.nucleus = NucleusModel::point;
  else if (nuc == "uniform_sphere")
    c.basis.nucleus = NucleusModel::uniform_sphere;
  else
    throw ConfigError("basis.nucleus: unknown model '" + nuc +
                      "' (use \"point\" or \"uniform_sphere\")");
  c.basis.nuclear_radius_fm =
      get<double>(b["nuclear_radius_fm"], "basis.nuclear_radius_fm");
  const auto &ph = j["physics"];
  c.energy_override_keV =
      get<double>(ph["energy_override_keV"], "physics.energy_override_keV");
  c.pole_epsilon = get<double>(ph["pole_epsilon"], "physics.pole_epsilon");
  c.y_min = get<double>(ph["y_min"], "physics.y_min");
  c.rate_y_points = get_int(j["rate"]["y_points"], "rate.y_points");
  const auto &cv = j["convergence"];
  c.convergence_check = get<bool>(cv["check"], "convergence.check");
  c.convergence_tol_lmax = get<double>(cv["tol_lmax"], "convergence.tol_lmax");
  c.convergence_tol_basis =
      get<double>(cv["tol_basis"], "convergence.tol_basis");
  c.spectrum_n_check =
      get_int(j["spectrum_check"]["n_check"], "spectrum_check.n_check");
  c.out_dir = get<std::string>(j["output"]["dir"], "output.dir");
  c.format = get<std::string>(j["output"]["format"], "output.format");
  validate(c);
  return c;
}

json parse_text(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") +
                      e.what());
  }
}

json merged(const json &user) {
  const json schema = defaults_json();
  check_keys(user, schema, "");
  json j = schema;
  merge(j, user);
  return j;
}

// value text -> JSON: literal if it parses, comma list, else string
json override_value(const std::string &key, const std::string &text) {
  try {
    auto v = json::parse(text);
    if (list_key(key) && !v.is_array())
      return json::array({v});
    return v;
  } catch (const json::parse_error &) {
  }
  if (list_key(key)) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        arr.push_back(json::parse(item));
      } catch (const json::parse_error &) {
        arr.push_back(item);
      }
    }
    return arr;
  }
  return text;
}

} // namespace

//==============================================================================
std::string default_config_json() { return defaults_json().dump(2); }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  collect_keys(defaults_json(), "", out);
  return out;
}

RunConfig config_from_json(const std::string &json_text) {
  return from_json(merged(parse_text(json_text)));
}

RunConfig config_from_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

RunConfig apply_overrides(
    const std::string &json_text,
    const std::vector<std::pair<std::string, std::string>> &overrides) {
  json user = json_text.empty() ? json::object() : parse_text(json_text);
  const auto keys = config_keys();
  for (const auto &[key, value] : overrides) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown configuration key '" + key + "'");
    json *node = &user;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.'))
      parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
        (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = override_value(key, value);
  }
  return from_json(merged(user));
}

std::string config_to_json(const RunConfig &c) {
  json j;
  j["Z"] = c.Z;
  j["transition"] = c.transitions;
  j["y"] = c.y;
  j["theta"] = {{"points", c.theta_points},
                {"min_deg", c.theta_min_deg},
                {"max_deg", c.theta_max_deg}};
  json modes = json::array();
  for (auto m : c.modes)
    modes.push_back(to_string(m));
  j["truncation"] = {{"L_max", c.L_max},
                     {"modes", modes},
                     {"include_negative_energy", c.include_negative_energy},
                     {"channels", c.channels}};
  j["basis"] = {
      {"n_splines", c.basis.n_splines},
      {"order", c.basis.order},
      {"r_max", c.basis.r_max},
      {"r_first", c.basis.r_first},
      {"h_scale", c.basis.h_scale},
      {"points_per_interval", c.basis.points_per_interval},
      {"nucleus",
       c.basis.nucleus == NucleusModel::point ? "point" : "uniform_sphere"},
      {"nuclear_radius_fm", c.basis.nuclear_radius_fm}};
  j["physics"] = {{"energy_override_keV", c.energy_override_keV},
                  {"pole_epsilon", c.pole_epsilon},
                  {"y_min", c.y_min}};
  j["rate"] = {{"y_points", c.rate_y_points}};
  j["convergence"] = {{"check", c.convergence_check},
                      {"tol_lmax", c.convergence_tol_lmax},
                      {"tol_basis", c.convergence_tol_basis}};
  j["spectrum_check"] = {{"n_check", c.spectrum_n_check}};
  j["output"] = {{"dir", c.out_dir}, {"format", c.format}};
  return j.dump(2);
}

//==============================================================================
void validate(const RunConfig &c) {
  auto fail = [](const std::string &m) { throw ConfigError(m); };
  if (c.Z.empty())
    fail("Z: at least one nuclear charge is required");
  for (int z : c.Z)
    if (z < 1 || z * constants::alpha >= 1.0)
      fail("Z = " + std::to_string(z) +
           " out of range (1 <= Z and Z alpha < 1 for a point nucleus)");
  if (c.transitions.empty())
    fail("transition: at least one transition is required");
  for (const auto &t : c.transitions)
    for (int z : c.Z) {
      try {
        parse_transition(t, z);
      } catch (const std::invalid_argument &e) {
        fail(std::string("transition: ") + e.what());
      }
    }
  if (!(c.y_min > 0.0 && c.y_min < 0.5))
    fail("physics.y_min must lie in (0, 0.5)");
  if (c.y.empty())
    fail("y: at least one energy sharing value is required");
  for (double y : c.y)
    if (!(y >= c.y_min && y <= 1.0 - c.y_min))
      fail("y = " + std::to_string(y) + " outside [y_min, 1 - y_min]");
  if (c.theta_points < 1)
    fail("theta.points must be >= 1");
  if (!(c.theta_min_deg >= 0.0 && c.theta_max_deg <= 180.0 &&
        c.theta_min_deg <= c.theta_max_deg))
    fail("theta range must satisfy 0 <= min_deg <= max_deg <= 180");
  if (c.theta_points > 1 && c.theta_min_deg == c.theta_max_deg)
    fail("theta: several points need min_deg < max_deg");
  if (c.L_max < 1 || c.L_max > 12)
    fail("truncation.L_max must lie in 1..12");
  if (c.modes.empty())
    fail("truncation.modes: at least one mode is required");
  for (const auto &ch : c.channels) {
    if (ch.size() < 2 || (ch[0] != 'E' && ch[0] != 'M'))
      fail("truncation.channels: '" + ch + "' is not a multipole like E1, M2");
    try {
      std::size_t pos = 0;
      const int L = std::stoi(ch.substr(1), &pos);
      if (pos != ch.size() - 1 || L < 1)
        fail("truncation.channels: '" + ch + "' is not a multipole");
    } catch (const std::logic_error &) {
      fail("truncation.channels: '" + ch + "' is not a multipole");
    }
  }
  if (c.basis.order < 3 || c.basis.order > 15)
    fail("basis.order must lie in 3..15");
  if (c.basis.n_splines < 1 || c.basis.n_splines > 2000)
    fail("basis.n_splines must lie in 1..2000");
  if (!(c.basis.r_max > 0.0) || !(c.basis.r_first > 0.0) ||
      !(c.basis.r_first < c.basis.r_max))
    fail("basis: need 0 < r_first < r_max");
  if (!(c.basis.h_scale > 0.0))
    fail("basis.h_scale must be > 0");
  if (c.basis.points_per_interval < 0)
    fail("basis.points_per_interval must be >= 0 (0 = automatic)");
  if (c.basis.nuclear_radius_fm < 0.0)
    fail("basis.nuclear_radius_fm must be >= 0");
  if (c.energy_override_keV < 0.0)
    fail("physics.energy_override_keV must be >= 0 (0 = one-electron energies)");
  if (!(c.pole_epsilon > 0.0 && c.pole_epsilon < 0.1))
    fail("physics.pole_epsilon must lie in (0, 0.1)");
  if (c.rate_y_points < 2 || c.rate_y_points > 400)
    fail("rate.y_points must lie in 2..400");
  if (!(c.convergence_tol_lmax > 0.0) || !(c.convergence_tol_basis > 0.0))
    fail("convergence tolerances must be > 0");
  if (c.spectrum_n_check < 1)
    fail("spectrum_check.n_check must be >= 1");
  if (c.out_dir.empty())
    fail("output.dir must not be empty");
  if (c.format != "csv" && c.format != "json")
    fail("output.format must be \"csv\" or \"json\"");
}

} // namespace twogamma
