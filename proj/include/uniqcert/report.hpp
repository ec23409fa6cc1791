#ifndef UNIQCERT_REPORT_HPP
#define UNIQCERT_REPORT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uniqcert/certify.hpp"
#include "uniqcert/config.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/probe.hpp"
#include "uniqcert/solve.hpp"

namespace uniqcert {

/// JSON has no NaN/inf; represent the rare non-finite diagnostic as text
/// rather than emitting null.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return detail::number_to_string(v);
}

inline nlohmann::json json_number_list(const std::vector<double>& xs) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : xs) arr.push_back(json_number(x));
  return arr;
}

inline nlohmann::json to_json(const ConstantEstimate& c) {
  nlohmann::json j;
  j["value"] = json_number(c.value);
  j["provenance"] = provenance_name(c.provenance);
  return j;
}

inline nlohmann::json to_json(const HypothesisCertificate& cert) {
  nlohmann::json j;
  j["alpha"] = json_number(cert.alpha);
  j["gamma"] = to_json(cert.gamma);
  j["beta"] = to_json(cert.beta);
  j["delta"] = to_json(cert.delta);
  if (cert.c_m) {
    nlohmann::json cm;
    cm["value"] = json_number(cert.c_m->value);
    cm["exact"] = cert.c_m->exact;
    cm["samples"] = cert.c_m->samples;
    j["c_m"] = cm;
  }
  nlohmann::json cond;
  cond["A2"] = cert.a2_pass ? "PASS" : "FAIL";
  cond["N1"] = cert.n1_pass ? "PASS" : "FAIL";
  cond["N2i"] = cert.n2i_pass ? "PASS" : "FAIL";
  cond["N2ii"] = cert.n2ii_pass ? "PASS" : "FAIL";
  cond["P3"] = cert.p3_pass ? "PASS" : "FAIL";
  j["conditions"] = cond;
  nlohmann::json margins;
  margins["alpha_minus_gamma"] = json_number(cert.margin_alpha_gamma);
  margins["one_minus_beta"] = json_number(cert.margin_beta);
  j["margins"] = margins;
  j["overall"] = cert.overall;
  j["notes"] = nlohmann::json::array({cert.a1_note, cert.n1_note, cert.p2m_note});
  return j;
}

inline nlohmann::json to_json(const SolveReport& rep) {
  nlohmann::json j;
  j["verdict"] = verdict_name(rep.verdict);
  j["iterations"] = rep.iterations;
  j["final_relative_residual"] = json_number(rep.final_relative_residual);
  j["residual_norms"] = json_number_list(rep.residual_norms);
  j["step_lengths"] = json_number_list(rep.step_lengths);
  j["phi_values"] = json_number_list(rep.phi_values);
  if (rep.min_rayleigh) j["min_rayleigh"] = json_number(*rep.min_rayleigh);
  if (rep.monitor_floor) {
    j["monitor_floor"] = json_number(*rep.monitor_floor);
    j["sigma_bound_ok"] = rep.sigma_bound_ok;
  }
  j["solution_norm_h"] = json_number(norm_h(rep.solution));
  j["solution_norm_inf"] = json_number(norm_inf(rep.solution));
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline nlohmann::json to_json(const UniquenessReport& rep) {
  nlohmann::json j;
  j["verdict"] = rep.verdict;
  j["starts"] = rep.starts;
  j["seed"] = rep.seed;
  j["amplitude"] = json_number(rep.amplitude);
  j["max_pairwise_discrepancy"] = json_number(rep.max_pairwise_discrepancy);
  nlohmann::json runs = nlohmann::json::array();
  for (const StartSummary& s : rep.runs) {
    nlohmann::json r;
    r["index"] = s.index;
    r["verdict"] = s.verdict;
    r["iterations"] = s.iterations;
    r["final_relative_residual"] = json_number(s.final_relative_residual);
    if (s.min_rayleigh) r["min_rayleigh"] = json_number(*s.min_rayleigh);
    r["solution_norm_h"] = json_number(s.solution_norm_h);
    if (!s.error.empty()) r["error"] = s.error;
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j;
}

struct StudyLevel {
  std::array<int, 3> counts{1, 1, 1};
  int dimension = 1;
  double h_max = 0.0;
  double error = 0.0;
  std::string solve_verdict;
};

struct StudyReport {
  std::vector<StudyLevel> levels;
  std::vector<double> orders;
  bool ok = false;
};

inline nlohmann::json to_json(const StudyReport& rep) {
  nlohmann::json j;
  nlohmann::json levels = nlohmann::json::array();
  for (const StudyLevel& lv : rep.levels) {
    nlohmann::json l;
    nlohmann::json counts = nlohmann::json::array();
    for (int k = 0; k < lv.dimension; ++k) counts.push_back(lv.counts[static_cast<std::size_t>(k)]);
    l["counts"] = counts;
    l["h_max"] = json_number(lv.h_max);
    l["error"] = json_number(lv.error);
    l["solve_verdict"] = lv.solve_verdict;
    levels.push_back(l);
  }
  j["levels"] = levels;
  j["orders"] = json_number_list(rep.orders);
  j["verdict"] = rep.ok ? "ok" : "not-converged";
  return j;
}

/// FNV-1a over the canonical re-serialization of the parsed config, so
/// whitespace or key order in the source file never changes the digest.
inline std::string config_digest(const ProblemConfig& cfg) {
  const std::string bytes = canonical_config_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string render_report(const nlohmann::json& j) {
  return j.dump(2) + "\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << text;
  if (!out) throw IoError("failed writing output file: " + path);
}

/// CSV dump: index coordinates, spatial coordinates, value; rows in flat
/// index order (axis 0 fastest).
inline void write_field_csv(const std::string& path, const GridField& f) {
  static const char* idx_names[3] = {"i", "j", "k"};
  static const char* coord_names[3] = {"x", "y", "z"};
  const int m = f.domain.dimension;
  std::string out;
  for (int k = 0; k < m; ++k) {
    out += idx_names[k];
    out += ',';
  }
  for (int k = 0; k < m; ++k) {
    out += coord_names[k];
    out += ',';
  }
  out += "value\n";
  const int n = f.domain.interior_count();
  for (int i = 0; i < n; ++i) {
    const std::array<int, 3> idx = f.domain.multi_index(i);
    const std::array<double, 3> x = f.domain.node_coords(i);
    for (int k = 0; k < m; ++k) {
      out += std::to_string(idx[static_cast<std::size_t>(k)]);
      out += ',';
    }
    for (int k = 0; k < m; ++k) {
      out += detail::number_to_string(x[static_cast<std::size_t>(k)]);
      out += ',';
    }
    out += detail::number_to_string(f.values[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace uniqcert

#endif  // UNIQCERT_REPORT_HPP
