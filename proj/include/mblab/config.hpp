// config.hpp
// Flat sectioned key-value run configuration (INI style): easy to diff and
// to hash, which is what the reproducibility contract wants.  Keys are
// addressed as "section.key"; '#' and ';' start comments.

#pragma once

#include <filesystem>
#include <map>
#include <sstream>

#include "mblab/solvers.hpp"

namespace mblab {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& w) : std::runtime_error("config: " + w) {}
};

class Ini {
 public:
  static Ini parse_text(const std::string& text) {
    Ini ini;
    ini.raw_ = text;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      size_t cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return std::string();
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("bad section header at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value at line " + std::to_string(lineno));
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
      ini.kv_[section.empty() ? key : section + "." + key] = val;
    }
    return ini;
  }

  static Ini parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str());
  }

  const std::string& raw() const { return raw_; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  }
  std::string get(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }
  long long get_int(const std::string& key) const { return to_int(key, get(key)); }
  long long get_int(const std::string& key, long long dflt) const {
    return has(key) ? to_int(key, get(key)) : dflt;
  }
  double get_double(const std::string& key) const { return to_double(key, get(key)); }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? to_double(key, get(key)) : dflt;
  }
  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(get(key));
    while (std::getline(is, item, ',')) {
      size_t a = item.find_first_not_of(" \t");
      size_t b = item.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      out.push_back(item.substr(a, b - a + 1));
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
  }
  std::vector<int> get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& s : get_list(key)) out.push_back(static_cast<int>(to_int(key, s)));
    return out;
  }
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(to_double(key, s));
    return out;
  }

 private:
  static long long to_int(const std::string& key, const std::string& s) {
    try {
      size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (...) {
      throw ConfigError("key '" + key + "': not an integer: '" + s + "'");
    }
  }
  static double to_double(const std::string& key, const std::string& s) {
    try {
      size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (...) {
      throw ConfigError("key '" + key + "': not a number: '" + s + "'");
    }
  }

  std::map<std::string, std::string> kv_;
  std::string raw_;
};

// --- assembly of engine objects from the config ------------------------------

inline RotationVector rotation_from(const Ini& ini) {
  return RotationVector::parse(ini.get_list("rotation.alpha"));
}

inline PotentialSpec potential_from(const Ini& ini, int n) {
  PotentialSpec pot = PotentialSpec::zero(n);
  long long terms = ini.get_int("potential.terms", 0);
  for (long long t = 1; t <= terms; ++t) {
    std::string p = "potential.term" + std::to_string(t) + ".";
    double coeff = ini.get_double(p + "coeff");
    std::vector<int> xfreq(n, 0);
    std::vector<FactorKind> xkind(n, FactorKind::cos);
    if (ini.has(p + "xfreq")) {
      auto xs = ini.get_int_list(p + "xfreq");
      if (static_cast<int>(xs.size()) != n)
        throw ConfigError(p + "xfreq must list " + std::to_string(n) + " frequencies");
      xfreq = xs;
      auto ks = ini.get_list(p + "xkind");
      if (ks.size() != xs.size()) throw ConfigError(p + "xkind must match xfreq");
      for (size_t i = 0; i < ks.size(); ++i) xkind[i] = factor_kind_from_string(ks[i]);
    }
    int ufreq = static_cast<int>(ini.get_int(p + "ufreq", 0));
    FactorKind ukind = factor_kind_from_string(ini.get(p + "ukind", "one_minus_cos"));
    pot.add_product_term(coeff, xfreq, xkind, ufreq, ukind);
  }
  return pot;
}

inline SolverConfig solver_from(const Ini& ini, unsigned long long seed_override,
                                bool has_override) {
  SolverConfig cfg;
  cfg.max_iters = ini.get_int("solver.max_iters", cfg.max_iters);
  cfg.residual_tol = ini.get_double("solver.residual_tol", cfg.residual_tol);
  cfg.energy_tol = ini.get_double("solver.energy_tol", cfg.energy_tol);
  cfg.relaxation = ini.get_double("solver.relaxation", cfg.relaxation);
  cfg.scheme = scheme_from_string(ini.get("solver.scheme", "gauss_seidel_monotone"));
  cfg.seed = has_override ? seed_override
                          : static_cast<unsigned long long>(ini.get_int("run.seed", 0));
  if (cfg.residual_tol <= 0 || cfg.energy_tol <= 0)
    throw ConfigError("solver tolerances must be positive");
  if (cfg.relaxation <= 0 || cfg.relaxation >= 2)
    throw ConfigError("solver.relaxation must lie in (0, 2)");
  return cfg;
}

// Field source: "const:<value>" or "file:<path>" (bare paths also accepted).
// File fields on a smaller periodic domain are unrolled onto the target
// cylinder, so pipeline outputs chain into later runs directly.
inline Field field_from_source(const std::string& src, const DomainSpec& dom) {
  if (src.rfind("const:", 0) == 0) {
    double v = 0.0;
    try {
      v = std::stod(src.substr(6));
    } catch (...) {
      throw ConfigError("bad constant field '" + src + "'");
    }
    return Field(dom, v);
  }
  std::string path = src.rfind("file:", 0) == 0 ? src.substr(5) : src;
  if (!std::filesystem::exists(path)) throw ConfigError("field file not found: " + path);
  Field f = read_field(path);
  if (f.domain() == dom) return f;
  try {
    return extend_to_cylinder(f, dom);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field " + path + " does not fit the configured domain: " + e.what());
  }
}

}  // namespace mblab
