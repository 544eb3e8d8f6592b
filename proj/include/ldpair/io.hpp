#pragma once

// Serialization glue: CSV and JSON emitters for the public artifact types,
// CSV readers for measures, and the FNV-1a config digest stamped into every
// output. Floats are printed with std::to_chars (shortest round-trip), so
// identical runs produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "energy.hpp"
#include "ensemble.hpp"
#include "experiment.hpp"
#include "kernel.hpp"
#include "measure.hpp"

namespace ldpair {

using json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_hex(const std::string& s) {
  static const char* hexd = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hexd[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

// ---- AtomicMeasure ----------------------------------------------------------

inline std::string atomic_to_csv(const AtomicMeasure& nu) {
  std::string out = "atom,weight\n";
  for (std::size_t i = 0; i < nu.atoms.size(); ++i)
    out += fmt(nu.atoms[i]) + "," + fmt(nu.weights[i]) + "\n";
  return out;
}

inline json atomic_to_json(const AtomicMeasure& nu) {
  return json{{"atoms", nu.atoms}, {"weights", nu.weights}};
}

inline AtomicMeasure atomic_from_csv(std::istream& in) {
  std::vector<double> a, w;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("atom", 0) == 0) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("measure CSV: expected 'atom,weight', got: " + line);
    a.push_back(std::stod(line.substr(0, comma)));
    w.push_back(std::stod(line.substr(comma + 1)));
  }
  return atomic(a, w);
}

inline AtomicMeasure atomic_from_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open measure CSV: " + path);
  return atomic_from_csv(f);
}

// Bivariate atoms as rows "x,y,weight" (for the non-product divergence input).
inline BivariateAtomic bivariate_from_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open bivariate CSV: " + path);
  std::vector<std::array<double, 3>> pts;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
    std::istringstream ls(line);
    std::array<double, 3> row{};
    char c1 = 0, c2 = 0;
    if (!(ls >> row[0] >> c1 >> row[1] >> c2 >> row[2]) || c1 != ',' || c2 != ',')
      throw std::invalid_argument("bivariate CSV: expected 'x,y,weight', got: " + line);
    pts.push_back(row);
  }
  if (pts.empty()) throw std::invalid_argument("bivariate CSV: no rows in " + path);
  return bivariate_from_points(pts);
}

// ---- GriddedDensity ---------------------------------------------------------

inline std::string density_to_csv(const GriddedDensity& d) {
  std::string out = "x,density\n";
  for (std::size_t i = 0; i < d.values.size(); ++i)
    out += fmt(d.node(i)) + "," + fmt(d.values[i]) + "\n";
  return out;
}

// ---- Ensemble ----------------------------------------------------------------

inline std::string ensemble_to_csv(const Ensemble& e) {
  std::string out = "index,x,y\n";
  for (int i = 0; i < e.n; ++i)
    out += std::to_string(i) + "," + fmt(e.x[i]) + "," + fmt(e.y[i]) + "\n";
  return out;
}

inline json ensemble_sidecar(const Ensemble& e, const std::string& kernel_spec,
                             const std::string& config_digest) {
  return json{{"kernel", kernel_spec},
              {"n", e.n},
              {"seed", e.seed_info.seed},
              {"stream", e.seed_info.stream},
              {"replica", e.seed_info.replica},
              {"method", e.seed_info.method},
              {"config_digest", config_digest}};
}

// ---- reports -------------------------------------------------------------------

inline std::string decay_to_csv(const DecayReport& rep) {
  std::string out = "n,p_hat,stderr,neg_log_p_over_n2,reference,predicted_rate\n";
  for (const DecayRow& r : rep.rows)
    out += std::to_string(r.n) + "," + fmt(r.p_hat) + "," + fmt(r.stderr_p) + "," +
           fmt(r.neg_log_p_over_n2) + "," + fmt(r.reference) + "," +
           fmt(rep.predicted) + "\n";
  return out;
}

inline json decay_to_json(const DecayReport& rep) {
  json rows = json::array();
  for (const DecayRow& r : rep.rows)
    rows.push_back(json{{"n", r.n},
                        {"p_hat", r.p_hat},
                        {"stderr", r.stderr_p},
                        {"neg_log_p_over_n2", r.neg_log_p_over_n2},
                        {"reference", r.reference}});
  return json{{"method", rep.method == DecayMethod::direct_mc ? "direct_mc"
                                                              : "exact_gaussian_tail"},
              {"predicted_rate", rep.predicted},
              {"rows", rows}};
}

inline json assumption_to_json(const AssumptionReport& rep) {
  json malpha = json::array();
  for (const auto& [alpha, value] : rep.M_alpha)
    malpha.push_back(json{{"alpha", alpha}, {"M_alpha", value}});
  return json{{"A1", verdict_name(rep.a1)}, {"A2", verdict_name(rep.a2)},
              {"A3", verdict_name(rep.a3)}, {"A4", verdict_name(rep.a4)},
              {"A5", verdict_name(rep.a5)}, {"M_alpha", malpha},
              {"notes", rep.notes}};
}

}  // namespace ldpair
