#include "hwiloc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace hwiloc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s.empty()) throw ConfigError("expected a number, got an empty value");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("trailing characters in number '" + s + "'");
  return v;
}

long long parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected an unsigned seed, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("expected an unsigned seed, got '" + s + "'");
  return v;
}

int parse_count(const std::string& raw) {
  const long long v = parse_integer(raw);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("integer out of range: " + raw);
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_real(item));
  return out;
}

OutputSet parse_outputs(const std::string& raw) {
  OutputSet o{false, false, false, false, false, false, false, false};
  std::stringstream ss(raw);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::string name = trim(item);
    if (name == "CRB-M2") o.crb_m2 = true;
    else if (name == "CRB-M1") o.crb_m1 = true;
    else if (name == "LB") o.lb = true;
    else if (name == "AEB") o.aeb = true;
    else if (name == "DEB") o.deb = true;
    else if (name == "PEB") o.peb = true;
    else if (name == "MMLE-RMSE") o.mmle_rmse = true;
    else if (name == "MLE-RMSE") o.mle_rmse = true;
    else throw ConfigError("unknown output '" + name + "'");
  }
  // bound kinds without a scalar selection mean all three scalars
  if (!o.aeb && !o.deb && !o.peb) o.aeb = o.deb = o.peb = true;
  return o;
}

std::string render_outputs(const OutputSet& o) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(o.crb_m2, "CRB-M2");
  add(o.crb_m1, "CRB-M1");
  add(o.lb, "LB");
  add(o.aeb, "AEB");
  add(o.deb, "DEB");
  add(o.peb, "PEB");
  add(o.mmle_rmse, "MMLE-RMSE");
  add(o.mle_rmse, "MLE-RMSE");
  return s;
}

PilotPolicy parse_policy(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "auto") return PilotPolicy::Auto;
  if (s == "fixed") return PilotPolicy::Fixed;
  if (s == "resample") return PilotPolicy::Resample;
  throw ConfigError("pilots must be auto, fixed or resample");
}

const char* policy_name(PilotPolicy p) {
  switch (p) {
    case PilotPolicy::Auto: return "auto";
    case PilotPolicy::Fixed: return "fixed";
    case PilotPolicy::Resample: return "resample";
  }
  return "auto";
}

// Indexed keys such as pa_beta3; returns -1 if `key` does not start with `prefix`.
int indexed_key(const std::string& key, const std::string& prefix) {
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return -1;
  const std::string digits = key.substr(prefix.size());
  for (char ch : digits)
    if (!std::isdigit(static_cast<unsigned char>(ch))) return -1;
  return std::stoi(digits);
}

std::vector<cd> assemble_indexed(const std::map<int, cd>& entries, int first, const char* what) {
  std::vector<cd> out;
  int expect = first;
  for (const auto& [idx, value] : entries) {
    if (idx != expect) throw ConfigError(std::string(what) + " indices must be contiguous from " +
                                         std::to_string(first));
    out.push_back(value);
    ++expect;
  }
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace

cd parse_complex(const std::string& raw) {
  std::string s = trim(raw);
  std::string compact;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
  if (compact.empty()) throw ConfigError("expected a complex number, got an empty value");
  if (compact.back() != 'j' && compact.back() != 'i') return {parse_real(compact), 0.0};
  compact.pop_back();
  // split at the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t i = compact.size(); i-- > 1;) {
    if ((compact[i] == '+' || compact[i] == '-') && compact[i - 1] != 'e' && compact[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    if (compact.empty() || compact == "+") return {0.0, 1.0};
    if (compact == "-") return {0.0, -1.0};
    return {0.0, parse_real(compact)};
  }
  const std::string re = compact.substr(0, split);
  std::string im = compact.substr(split);
  if (im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_real(re), parse_real(im)};
}

std::string format_complex(cd value) {
  std::string s = format_double(value.real());
  const double im = value.imag();
  if (std::signbit(im))
    s += "-" + format_double(-im);
  else
    s += "+" + format_double(im);
  return s + "j";
}

ExperimentSpec parse_config(std::istream& in, ExperimentSpec spec) {
  using Setter = std::function<void(const std::string&)>;
  std::map<int, cd> mc, pa;
  bool mc_seen = false, pa_seen = false;
  SystemConfig& sys = spec.system;
  ImpairmentConfig& imp = spec.impairments;
  EstimatorConfig& est = spec.estimator;

  const std::map<std::string, Setter> keys = {
      {"system.antennas", [&](const std::string& v) { sys.antennas = parse_count(v); }},
      {"system.transmissions", [&](const std::string& v) { sys.transmissions = parse_count(v); }},
      {"system.subcarriers", [&](const std::string& v) { sys.subcarriers = parse_count(v); }},
      {"system.cp_length", [&](const std::string& v) { sys.cp_length = parse_count(v); }},
      {"system.carrier_hz", [&](const std::string& v) { sys.carrier_hz = parse_real(v); }},
      {"system.bandwidth_hz", [&](const std::string& v) { sys.bandwidth_hz = parse_real(v); }},
      {"system.load_ohm", [&](const std::string& v) { sys.load_ohm = parse_real(v); }},
      {"system.noise_psd_dbm_hz", [&](const std::string& v) { sys.noise_psd_dbm_hz = parse_real(v); }},
      {"system.noise_figure_db", [&](const std::string& v) { sys.noise_figure_db = parse_real(v); }},
      {"system.tx_power_dbm", [&](const std::string& v) { sys.tx_power_dbm = parse_real(v); }},
      {"system.pilot_seed", [&](const std::string& v) { sys.pilot_seed = parse_seed(v); }},
      {"system.combiner_seed", [&](const std::string& v) { sys.combiner_seed = parse_seed(v); }},
      {"impairments.sigma_pn_deg", [&](const std::string& v) { imp.sigma_pn = deg2rad(parse_real(v)); }},
      {"impairments.sigma_cfo", [&](const std::string& v) { imp.sigma_cfo = parse_real(v); }},
      {"impairments.sigma_mc", [&](const std::string& v) { imp.sigma_mc = parse_real(v); }},
      {"impairments.x_clip", [&](const std::string& v) { imp.x_clip = parse_real(v); }},
      {"ue.x_m", [&](const std::string& v) { spec.position.x() = parse_real(v); }},
      {"ue.y_m", [&](const std::string& v) { spec.position.y() = parse_real(v); }},
      {"ue.gain_phase_rad", [&](const std::string& v) { spec.gain_phase = parse_real(v); }},
      {"estimator.angle_min_deg", [&](const std::string& v) { est.angle_min = deg2rad(parse_real(v)); }},
      {"estimator.angle_max_deg", [&](const std::string& v) { est.angle_max = deg2rad(parse_real(v)); }},
      {"estimator.angle_step_deg", [&](const std::string& v) { est.angle_step = deg2rad(parse_real(v)); }},
      {"estimator.range_min_m", [&](const std::string& v) { est.range_min = parse_real(v); }},
      {"estimator.range_max_m", [&](const std::string& v) { est.range_max = parse_real(v); }},
      {"estimator.range_step_m", [&](const std::string& v) { est.range_step = parse_real(v); }},
      {"estimator.max_iterations", [&](const std::string& v) { est.max_iterations = parse_count(v); }},
      {"estimator.gradient_tolerance", [&](const std::string& v) { est.gradient_tolerance = parse_real(v); }},
      {"estimator.armijo_slope", [&](const std::string& v) { est.armijo_slope = parse_real(v); }},
      {"estimator.step_shrink", [&](const std::string& v) { est.step_shrink = parse_real(v); }},
      {"estimator.initial_step_m", [&](const std::string& v) { est.initial_step = parse_real(v); }},
      {"estimator.fd_step", [&](const std::string& v) { est.fd_step = parse_real(v); }},
      {"experiment.sweep", [&](const std::string& v) { spec.axis = parse_axis(trim(v)); }},
      {"experiment.values", [&](const std::string& v) { spec.values = parse_list(v); }},
      {"experiment.realizations", [&](const std::string& v) { spec.realizations = parse_count(v); }},
      {"experiment.trials", [&](const std::string& v) { spec.trials = parse_count(v); }},
      {"experiment.seed", [&](const std::string& v) { spec.seed = parse_seed(v); }},
      {"experiment.pilots", [&](const std::string& v) { spec.pilots = parse_policy(v); }},
      {"experiment.outputs", [&](const std::string& v) { spec.outputs = parse_outputs(v); }},
      {"experiment.crb_fd_step", [&](const std::string& v) { spec.fd_step = parse_real(v); }},
  };
  const std::vector<std::string> sections = {"system", "impairments", "ue", "estimator", "experiment"};

  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ConfigError(at + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected key=value");
    if (section.empty()) throw ConfigError(at + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (section == "impairments") {
        if (const int i = indexed_key(key, "mc_c"); i >= 0) {
          mc_seen = true;
          if (!mc.emplace(i, parse_complex(value)).second) throw ConfigError("duplicate key " + key);
          continue;
        }
        if (const int i = indexed_key(key, "pa_beta"); i >= 0) {
          pa_seen = true;
          if (!pa.emplace(i, parse_complex(value)).second) throw ConfigError("duplicate key " + key);
          continue;
        }
      }
      const auto it = keys.find(section + "." + key);
      if (it == keys.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      it->second(value);
    } catch (const ConfigError& e) {
      throw ConfigError(at + e.what());
    }
  }
  if (mc_seen) imp.mc_coeffs = assemble_indexed(mc, 1, "mc_c");
  if (pa_seen) imp.pa_coeffs = assemble_indexed(pa, 0, "pa_beta");
  spec.validate();
  return spec;
}

ExperimentSpec parse_config_string(const std::string& text, ExperimentSpec base) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

ExperimentSpec load_config(const std::string& path, ExperimentSpec base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

std::string render_config(const ExperimentSpec& spec) {
  std::ostringstream o;
  const SystemConfig& s = spec.system;
  const ImpairmentConfig& i = spec.impairments;
  const EstimatorConfig& e = spec.estimator;
  o << "[system]\n"
    << "antennas=" << s.antennas << "\n"
    << "transmissions=" << s.transmissions << "\n"
    << "subcarriers=" << s.subcarriers << "\n"
    << "cp_length=" << s.cp_length << "\n"
    << "carrier_hz=" << fmt(s.carrier_hz) << "\n"
    << "bandwidth_hz=" << fmt(s.bandwidth_hz) << "\n"
    << "load_ohm=" << fmt(s.load_ohm) << "\n"
    << "noise_psd_dbm_hz=" << fmt(s.noise_psd_dbm_hz) << "\n"
    << "noise_figure_db=" << fmt(s.noise_figure_db) << "\n"
    << "tx_power_dbm=" << fmt(s.tx_power_dbm) << "\n"
    << "pilot_seed=" << s.pilot_seed << "\n"
    << "combiner_seed=" << s.combiner_seed << "\n\n";
  o << "[impairments]\n"
    << "sigma_pn_deg=" << fmt(rad2deg(i.sigma_pn)) << "\n"
    << "sigma_cfo=" << fmt(i.sigma_cfo) << "\n"
    << "sigma_mc=" << fmt(i.sigma_mc) << "\n";
  for (std::size_t n = 0; n < i.mc_coeffs.size(); ++n)
    o << "mc_c" << n + 1 << "=" << format_complex(i.mc_coeffs[n]) << "\n";
  for (std::size_t q = 0; q < i.pa_coeffs.size(); ++q)
    o << "pa_beta" << q << "=" << format_complex(i.pa_coeffs[q]) << "\n";
  o << "x_clip=" << fmt(i.x_clip) << "\n\n";
  o << "[ue]\n"
    << "x_m=" << fmt(spec.position.x()) << "\n"
    << "y_m=" << fmt(spec.position.y()) << "\n"
    << "gain_phase_rad=" << fmt(spec.gain_phase) << "\n\n";
  o << "[estimator]\n"
    << "angle_min_deg=" << fmt(rad2deg(e.angle_min)) << "\n"
    << "angle_max_deg=" << fmt(rad2deg(e.angle_max)) << "\n"
    << "angle_step_deg=" << fmt(rad2deg(e.angle_step)) << "\n"
    << "range_min_m=" << fmt(e.range_min) << "\n"
    << "range_max_m=" << fmt(e.range_max) << "\n"
    << "range_step_m=" << fmt(e.range_step) << "\n"
    << "max_iterations=" << e.max_iterations << "\n"
    << "gradient_tolerance=" << fmt(e.gradient_tolerance) << "\n"
    << "armijo_slope=" << fmt(e.armijo_slope) << "\n"
    << "step_shrink=" << fmt(e.step_shrink) << "\n"
    << "initial_step_m=" << fmt(e.initial_step) << "\n"
    << "fd_step=" << fmt(e.fd_step) << "\n\n";
  o << "[experiment]\n"
    << "sweep=" << axis_name(spec.axis) << "\n"
    << "values=";
  for (std::size_t n = 0; n < spec.values.size(); ++n) o << (n ? "," : "") << fmt(spec.values[n]);
  o << "\n"
    << "realizations=" << spec.realizations << "\n"
    << "trials=" << spec.trials << "\n"
    << "seed=" << spec.seed << "\n"
    << "pilots=" << policy_name(spec.pilots) << "\n"
    << "outputs=" << render_outputs(spec.outputs) << "\n"
    << "crb_fd_step=" << fmt(spec.fd_step) << "\n";
  return o.str();
}

}  // namespace hwiloc
