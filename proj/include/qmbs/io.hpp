#pragma once

// JSON and CSV serialization. Numbers in CSV are printed with %.17g so equal
// inputs give byte-identical files.

#include <json.hpp>

#include <complex>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"
#include "qmbs/lattice.hpp"
#include "qmbs/rng.hpp"

namespace qmbs {

using json = nlohmann::json;

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Minimal CSV writer: header on construction, one row per call.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) { write_row(header); }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    write_row({cell(values)...});
  }

 private:
  static std::string cell(double v) { return fmt_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostream& os_;
};

// ---------------------------------------------------------------------------
// Lattice and couplings. Matrices are row-major nested arrays; complex
// matrices are {"re": [[...]], "im": [[...]]}.

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) throw ConfigError("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

inline json to_json(const LatticeSpec& spec) {
  json j;
  j["n_sites"] = spec.n_sites;
  j["geometry_tag"] = spec.geometry_tag;
  json bonds = json::array();
  for (auto [a, b] : spec.bonds) bonds.push_back({a, b});
  j["bonds"] = bonds;
  j["labels"] = spec.labels ? json(*spec.labels) : json(nullptr);
  return j;
}

inline LatticeSpec lattice_from_json(const json& j) {
  LatticeSpec spec;
  spec.n_sites = j.at("n_sites").get<int>();
  spec.geometry_tag = j.value("geometry_tag", std::string{});
  for (const auto& b : j.at("bonds")) spec.bonds.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
  if (j.contains("labels") && !j["labels"].is_null()) spec.labels = j["labels"].get<std::vector<int>>();
  validate(spec);
  return spec;
}

inline json interval_json(Interval r) { return json::array({r.lo, r.hi}); }
inline Interval interval_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("interval must be a two-element array [lo, hi]");
  Interval r{j[0].get<double>(), j[1].get<double>()};
  if (r.hi < r.lo) throw ConfigError("interval has hi < lo");
  return r;
}

inline json to_json(const CouplingSet& cs) {
  json j;
  j["mode"] = cs.mode == CouplingMode::bipartite ? "bipartite" : "nonbipartite";
  j["q_power"] = cs.q_power;
  j["seed"] = cs.seed;
  j["rng"] = std::string(kRngAlgorithm);
  j["t_range"] = interval_json(cs.t_range);
  j["a_range"] = interval_json(cs.a_range);
  j["b_range"] = cs.b_range ? interval_json(*cs.b_range) : json(nullptr);
  j["T"] = {{"re", matrix_to_json(cs.T.real())}, {"im", matrix_to_json(cs.T.imag())}};
  j["Q"] = matrix_to_json(cs.Q);
  j["K"] = cs.K ? matrix_to_json(*cs.K) : json(nullptr);
  j["A"] = std::vector<double>(cs.A.data(), cs.A.data() + cs.A.size());
  j["B"] = cs.B ? json(std::vector<double>(cs.B->data(), cs.B->data() + cs.B->size())) : json(nullptr);
  return j;
}

inline CouplingSet couplings_from_json(const json& j) {
  CouplingSet cs;
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "bipartite" && mode != "nonbipartite") throw ConfigError("unknown coupling mode '" + mode + "'");
  cs.mode = mode == "bipartite" ? CouplingMode::bipartite : CouplingMode::nonbipartite;
  cs.q_power = j.value("q_power", 1);
  cs.seed = j.at("seed").get<std::uint64_t>();
  cs.t_range = interval_from_json(j.at("t_range"));
  cs.a_range = interval_from_json(j.at("a_range"));
  if (j.contains("b_range") && !j["b_range"].is_null()) cs.b_range = interval_from_json(j["b_range"]);
  const Eigen::MatrixXd re = matrix_from_json(j.at("T").at("re")), im = matrix_from_json(j.at("T").at("im"));
  cs.T = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
  cs.Q = matrix_from_json(j.at("Q"));
  if (j.contains("K") && !j["K"].is_null()) cs.K = matrix_from_json(j["K"]);
  const auto a = j.at("A").get<std::vector<double>>();
  cs.A = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  if (j.contains("B") && !j["B"].is_null()) {
    const auto b = j["B"].get<std::vector<double>>();
    cs.B = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  return cs;
}

// ---------------------------------------------------------------------------
// States: config bitstring (site 1 leftmost), Re, Im.

inline void write_state_csv(std::ostream& os, const StateVector& psi, bool skip_zeros = true) {
  CsvWriter w(os, {"config", "re", "im"});
  const auto& configs = psi.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Complex a = psi.amplitudes[static_cast<Eigen::Index>(i)];
    if (skip_zeros && a == Complex{}) continue;
    w.row(config_bitstring(configs[i], psi.n_sites()), a.real(), a.imag());
  }
}

inline json to_json(const StateVector& psi) {
  json amps = json::array();
  const auto& configs = psi.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Complex a = psi.amplitudes[static_cast<Eigen::Index>(i)];
    if (a == Complex{}) continue;
    amps.push_back({config_bitstring(configs[i], psi.n_sites()), a.real(), a.imag()});
  }
  return {{"n_sites", psi.n_sites()}, {"n_particles", psi.n_particles()}, {"amplitudes", amps}};
}

inline StateVector state_from_json(const json& j) {
  StateVector psi(make_basis(j.at("n_sites").get<int>(), j.at("n_particles").get<int>()));
  for (const auto& e : j.at("amplitudes")) {
    const auto idx = psi.basis->find(parse_bitstring(e.at(0).get<std::string>()));
    if (!idx) throw ConfigError("state amplitude outside its sector");
    psi.amplitudes[static_cast<Eigen::Index>(*idx)] = Complex(e.at(1).get<double>(), e.at(2).get<double>());
  }
  return psi;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << content;
}

}  // namespace qmbs
