// report.hpp
// JSON serialization of results and the run manifest.

#pragma once

#include <chrono>
#include <json.hpp>

#include "mblab/config.hpp"
#include "mblab/verify.hpp"

namespace mblab {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

inline json to_json(const RenormValue& rv) {
  json j;
  j["total"] = rv.total;
  j["converged"] = rv.converged;
  j["tail_bound"] = rv.tail_bound;
  json terms = json::object();
  for (const auto& [key, val] : rv.window_terms) {
    std::string k;
    for (size_t i = 0; i < key.size(); ++i) k += (i ? "," : "") + std::to_string(key[i]);
    terms[k.empty() ? "0" : k] = val;
  }
  j["window_terms"] = terms;
  return j;
}

inline json to_json(const IntegerLattice& lat) {
  json j;
  j["dim"] = lat.dim;
  j["rank"] = lat.rank();
  json basis = json::array();
  for (const auto& b : lat.basis) {
    json row = json::array();
    for (long long x : b) row.push_back(x);
    basis.push_back(row);
  }
  j["basis"] = basis;
  return j;
}

inline json to_json(const DirectionSystem& sys) {
  json j;
  j["t"] = sys.t;
  json d1 = json::array();
  for (const auto& e : sys.dir1) d1.push_back(e.str());
  j["dir1"] = d1;
  if (sys.dir2) {
    json d2 = json::array();
    for (long long x : *sys.dir2) d2.push_back(x);
    j["dir2"] = d2;
  }
  json lats = json::array();
  for (const auto& lat : sys.lattices) lats.push_back(to_json(lat));
  j["lattices"] = lats;
  return j;
}

inline json to_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["measured"] = c.measured;
  j["threshold"] = c.threshold;
  j["details"] = c.details;
  return j;
}

inline json to_json(const VerificationReport& rep) {
  json j;
  j["overall"] = rep.overall;
  json cs = json::array();
  for (const auto& c : rep.checks) cs.push_back(to_json(c));
  j["checks"] = cs;
  return j;
}

inline std::string render_table(const VerificationReport& rep) {
  std::ostringstream os;
  os << "check                 status  measured      threshold     details\n";
  for (const auto& c : rep.checks) {
    char line[512];
    std::snprintf(line, sizeof(line), "%-21s %-7s %-13.6g %-13.6g %s\n", c.name.c_str(),
                  c.passed ? "pass" : "FAIL", c.measured, c.threshold, c.details.c_str());
    os << line;
  }
  os << (rep.overall ? "overall: pass\n" : "overall: FAIL\n");
  return os.str();
}

inline json to_json(const GapReport& rep, const std::vector<std::string>& field_refs = {}) {
  json j;
  j["classification"] = to_string(rep.classification);
  j["max_width"] = rep.max_width;
  j["shift_bound"] = rep.shift_bound;
  j["persistence_bound"] = rep.persistence_bound;
  json gs = json::array();
  for (size_t i = 0; i < rep.gaps.size(); ++i) {
    const Gap& g = rep.gaps[i];
    json gj;
    gj["lower"] = g.lower;
    gj["upper"] = g.upper;
    gj["width"] = g.width;
    auto vec = [](const IntVec& v) {
      json a = json::array();
      for (long long x : v) a.push_back(x);
      return a;
    };
    gj["rep_lower_shift"] = vec(g.rep_lower);
    gj["rep_upper_shift"] = vec(g.rep_upper);
    if (2 * i + 1 < field_refs.size()) {
      gj["rep_lower_file"] = field_refs[2 * i];
      gj["rep_upper_file"] = field_refs[2 * i + 1];
    }
    gs.push_back(gj);
  }
  j["gaps"] = gs;
  return j;
}

inline json solve_summary(const SolveResult& res) {
  json j;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["residual"] = res.residual;
  j["energy"] = to_json(res.energy);
  return j;
}

inline uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Wall-clock phase timings collected by the pipelines.
class Stopwatch {
 public:
  void start(const std::string& phase) {
    phase_ = phase;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    auto dt = std::chrono::steady_clock::now() - t0_;
    timings_[phase_] +=
        std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
  }
  const std::map<std::string, long long>& timings() const { return timings_; }

 private:
  std::string phase_;
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, long long> timings_;
};

inline void write_manifest(const std::string& path, const Ini& ini,
                           const std::vector<std::string>& outputs, const Stopwatch& sw) {
  json j;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(ini.raw())));
  j["config_fnv1a"] = hash;
  j["version"] = kVersion;
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o);
  j["outputs"] = outs;
  json t = json::object();
  for (const auto& [k, v] : sw.timings()) t[k] = v;
  j["timings_ms"] = t;
  write_json_file(path, j);
}

}  // namespace mblab
