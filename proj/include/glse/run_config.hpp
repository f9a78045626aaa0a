#pragma once

// Line-based experiment configuration:
//
//   [experiment]
//   n_antennas = 64
//   inv_load = 2, 2.5, 3
//   papr_db = 3, inf
//   ...
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glse/errors.hpp"
#include "glse/sim.hpp"

namespace glse {

struct RunConfig {
  ExperimentSpec spec;
  std::string output = "sweep.csv";
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_real(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": not a number: '" + t + "'");
  }
  if (pos != t.size()) throw InvalidConfig(key + ": trailing characters in '" + t + "'");
  return d;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || t[0] == '-') throw InvalidConfig(key + ": expected a non-negative integer");
  std::size_t pos = 0;
  unsigned long long u = 0;
  try {
    u = std::stoull(t, &pos, 0);
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": not an integer: '" + t + "'");
  }
  if (pos != t.size()) throw InvalidConfig(key + ": trailing characters in '" + t + "'");
  return u;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  const std::string t = trim(v);
  if (t.empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InvalidConfig(key + ": expected true or false");
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_num(v[i]);
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
  RunConfig rc;
  ExperimentSpec& sp = rc.spec;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidConfig(where + "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "tuning" && section != "engine" &&
          section != "output") {
        throw InvalidConfig(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig(where + "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw InvalidConfig(where + "key outside of a section");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw InvalidConfig(where + "duplicate key " + full);

    try {
      if (full == "experiment.n_antennas") {
        sp.n_antennas = detail::parse_uint(full, val);
      } else if (full == "experiment.inv_load") {
        sp.inv_load = detail::parse_list(full, val);
      } else if (full == "experiment.rho") {
        sp.rho = detail::parse_real(full, val);
      } else if (full == "experiment.p_avg") {
        sp.p_avg = detail::parse_real(full, val);
      } else if (full == "experiment.eta") {
        sp.eta = detail::parse_list(full, val);
      } else if (full == "experiment.papr_db") {
        sp.papr_db = detail::parse_list(full, val);
      } else if (full == "experiment.trials") {
        sp.trials = detail::parse_uint(full, val);
      } else if (full == "experiment.seed") {
        sp.seed = detail::parse_uint(full, val);
      } else if (full == "tuning.papr_xi") {
        if (val == "printed") sp.papr_xi = PaprXiForm::Printed;
        else if (val == "decoupled") sp.papr_xi = PaprXiForm::Decoupled;
        else throw InvalidConfig(full + ": expected printed or decoupled");
      } else if (full == "tuning.allow_negative_lambda") {
        sp.allow_negative_lambda = detail::parse_bool(full, val);
      } else if (full == "engine.max_iter") {
        sp.engine.max_iter = static_cast<int>(detail::parse_uint(full, val));
      } else if (full == "engine.tol") {
        sp.engine.tol = detail::parse_real(full, val);
      } else if (full == "engine.damping") {
        sp.engine.damping = detail::parse_real(full, val);
      } else if (full == "engine.divergence_threshold") {
        sp.engine.divergence_threshold = detail::parse_real(full, val);
      } else if (full == "engine.input_threshold") {
        if (val == "exact") sp.engine.input = InputThreshold::Exact;
        else if (val == "closed") sp.engine.input = InputThreshold::ClosedForm;
        else throw InvalidConfig(full + ": expected exact or closed");
      } else if (full == "output.path") {
        rc.output = val;
      } else {
        throw InvalidConfig("unknown key " + full);
      }
    } catch (const InvalidConfig& e) {
      throw InvalidConfig(where + e.what());
    }
  }
  sp.validate();
  return rc;
}

inline RunConfig parse_run_config(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

inline void write_run_config(std::ostream& os, const RunConfig& rc) {
  const ExperimentSpec& sp = rc.spec;
  using detail::fmt_list;
  using detail::fmt_num;
  os << "[experiment]\n"
     << "n_antennas = " << sp.n_antennas << '\n'
     << "inv_load = " << fmt_list(sp.inv_load) << '\n'
     << "rho = " << fmt_num(sp.rho) << '\n'
     << "p_avg = " << fmt_num(sp.p_avg) << '\n'
     << "eta = " << fmt_list(sp.eta) << '\n'
     << "papr_db = " << fmt_list(sp.papr_db) << '\n'
     << "trials = " << sp.trials << '\n'
     << "seed = " << sp.seed << '\n'
     << "\n[tuning]\n"
     << "papr_xi = " << (sp.papr_xi == PaprXiForm::Printed ? "printed" : "decoupled") << '\n'
     << "allow_negative_lambda = " << (sp.allow_negative_lambda ? "true" : "false") << '\n'
     << "\n[engine]\n"
     << "max_iter = " << sp.engine.max_iter << '\n'
     << "tol = " << fmt_num(sp.engine.tol) << '\n'
     << "damping = " << fmt_num(sp.engine.damping) << '\n'
     << "divergence_threshold = " << fmt_num(sp.engine.divergence_threshold) << '\n'
     << "input_threshold = " << (sp.engine.input == InputThreshold::Exact ? "exact" : "closed")
     << '\n'
     << "\n[output]\n"
     << "path = " << rc.output << '\n';
}

inline std::string to_string(const RunConfig& rc) {
  std::ostringstream os;
  write_run_config(os, rc);
  return os.str();
}

}  // namespace glse
