#pragma once

// Command-line driver: one JSON config in, CSV tables and *.meta.json sidecars out.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qmbs/qmbs.hpp"

#ifndef QMBS_GIT_DESCRIBE
#define QMBS_GIT_DESCRIBE "unknown"
#endif

namespace qmbs::cli {

inline constexpr int kSchemaVersion = 1;

struct LatticeConfig {
  std::string kind;  // chain | rectangular | triangular | custom
  int length = 0;
  int rows = 0;
  int cols = 0;
  Boundary boundary = Boundary::open;
  int n_sites = 0;
  std::vector<Bond> bonds;
};

struct QuenchConfig {
  double t_min = 0.1;
  double t_max = 100.0;
  int n_times = 200;
  std::vector<InitialState> initial_states{InitialState::product, InitialState::uniform_pair};
};

struct RunConfig {
  json raw;
  LatticeConfig lattice_cfg;
  LatticeSpec lattice;
  CouplingMode mode = CouplingMode::bipartite;
  int q_power = 1;
  Interval t_range{0.5, 1.5};
  Interval a_range{-0.5, 0.5};
  std::optional<Interval> b_range;
  std::uint64_t seed = 1;
  int seeds = 1;
  std::optional<int> n_particles;
  std::size_t dense_cap = 20000;
  int bins = 40;
  double s_max = 4.0;
  QuenchConfig quench;
  int threads = 1;

  [[nodiscard]] int sector() const { return n_particles.value_or(lattice.n_sites / 2); }
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config error at '" + path + "': " + msg);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "required field is missing");
  return obj.at(key);
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(path + "." + k, "unknown field");
}

inline int get_int(const json& j, const std::string& path, int lo, int hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > hi) fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline Interval get_interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "expected a two-element numeric array [lo, hi]");
  Interval r{j[0].get<double>(), j[1].get<double>()};
  if (r.hi < r.lo) fail(path, "hi < lo");
  return r;
}

inline Boundary get_boundary(const json& obj, const std::string& path) {
  if (!obj.contains("boundary")) return Boundary::open;
  const auto& b = obj["boundary"];
  if (!b.is_string() || (b != "open" && b != "periodic")) fail(path + ".boundary", "expected \"open\" or \"periodic\"");
  return b == "open" ? Boundary::open : Boundary::periodic;
}

inline LatticeConfig parse_lattice(const json& j) {
  const std::string path = "lattice";
  LatticeConfig lc;
  const auto& kind = require(j, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "expected a string");
  lc.kind = kind.get<std::string>();
  if (lc.kind == "chain") {
    check_keys(j, {"kind", "length", "boundary"}, path);
    lc.length = get_int(require(j, "length", path), path + ".length", 2, kMaxSites);
    lc.boundary = get_boundary(j, path);
  } else if (lc.kind == "rectangular") {
    check_keys(j, {"kind", "rows", "cols", "boundary"}, path);
    lc.rows = get_int(require(j, "rows", path), path + ".rows", 1, kMaxSites);
    lc.cols = get_int(require(j, "cols", path), path + ".cols", 1, kMaxSites);
    lc.boundary = get_boundary(j, path);
  } else if (lc.kind == "triangular") {
    check_keys(j, {"kind", "rows", "cols"}, path);
    lc.rows = get_int(require(j, "rows", path), path + ".rows", 2, kMaxSites);
    lc.cols = get_int(require(j, "cols", path), path + ".cols", 2, kMaxSites);
  } else if (lc.kind == "custom") {
    check_keys(j, {"kind", "n_sites", "bonds"}, path);
    lc.n_sites = get_int(require(j, "n_sites", path), path + ".n_sites", 1, kMaxSites);
    const auto& bonds = require(j, "bonds", path);
    if (!bonds.is_array()) fail(path + ".bonds", "expected an array of [x, y] index pairs");
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      const std::string bp = path + ".bonds[" + std::to_string(i) + "]";
      if (!bonds[i].is_array() || bonds[i].size() != 2) fail(bp, "expected an [x, y] index pair");
      lc.bonds.emplace_back(get_int(bonds[i][0], bp + "[0]", 0, lc.n_sites - 1), get_int(bonds[i][1], bp + "[1]", 0, lc.n_sites - 1));
    }
  } else {
    fail(path + ".kind", "unknown lattice kind '" + lc.kind + "' (chain, rectangular, triangular, custom)");
  }
  return lc;
}

inline LatticeSpec build_lattice(const LatticeConfig& lc) {
  if (lc.kind == "chain") return build_chain(lc.length, lc.boundary);
  if (lc.kind == "rectangular") return build_rectangular(lc.rows, lc.cols, lc.boundary);
  if (lc.kind == "triangular") return build_triangular(lc.rows, lc.cols);
  return build_custom(lc.n_sites, lc.bonds, "custom-" + std::to_string(lc.n_sites));
}

inline InitialState parse_initial_state(const json& j, const std::string& path) {
  if (j == "product") return InitialState::product;
  if (j == "uniform_pair") return InitialState::uniform_pair;
  fail(path, "expected \"product\" or \"uniform_pair\"");
}

}  // namespace detail

/// Validates and resolves a config document. Every failure is a ConfigError
/// whose message names the offending field.
inline RunConfig parse_config(const json& doc) {
  using namespace detail;
  RunConfig cfg;
  cfg.raw = doc;
  check_keys(doc, {"schema_version", "lattice", "couplings", "seed", "seeds", "n_particles", "dense_cap", "threads",
                   "levelstats", "quench"},
             "$");
  const int version = get_int(require(doc, "schema_version", "$"), "$.schema_version", 0, 1 << 20);
  if (version != kSchemaVersion)
    fail("$.schema_version", "unsupported version " + std::to_string(version) + " (this build reads " +
                                 std::to_string(kSchemaVersion) + ")");

  cfg.lattice_cfg = parse_lattice(require(doc, "lattice", "$"));
  try {
    cfg.lattice = build_lattice(cfg.lattice_cfg);
  } catch (const Error& e) {
    fail("lattice", e.what());
  }

  const auto& c = require(doc, "couplings", "$");
  check_keys(c, {"mode", "q_power", "t_range", "a_range", "b_range"}, "couplings");
  const auto& mode = require(c, "mode", "couplings");
  if (mode != "bipartite" && mode != "nonbipartite") fail("couplings.mode", "expected \"bipartite\" or \"nonbipartite\"");
  cfg.mode = mode == "bipartite" ? CouplingMode::bipartite : CouplingMode::nonbipartite;
  if (cfg.mode == CouplingMode::nonbipartite) {
    if (!c.contains("q_power")) fail("couplings.q_power", "required when mode is \"nonbipartite\" (a positive odd integer)");
    cfg.q_power = get_int(c["q_power"], "couplings.q_power", 1, 99);
    if (cfg.q_power % 2 == 0) fail("couplings.q_power", "must be odd, got " + std::to_string(cfg.q_power));
  } else {
    if (c.contains("q_power")) fail("couplings.q_power", "only meaningful when mode is \"nonbipartite\"");
    if (!cfg.lattice.bipartite()) fail("couplings.mode", "lattice '" + cfg.lattice.geometry_tag + "' is not bipartite");
  }
  if (c.contains("t_range")) cfg.t_range = get_interval(c["t_range"], "couplings.t_range");
  if (c.contains("a_range")) cfg.a_range = get_interval(c["a_range"], "couplings.a_range");
  if (c.contains("b_range")) {
    cfg.b_range = get_interval(c["b_range"], "couplings.b_range");
    if (!(cfg.b_range->lo > 0.0)) fail("couplings.b_range", "parent weights must be positive (lo > 0)");
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || (!doc["seed"].is_number_unsigned() && doc["seed"].get<long long>() < 0))
      fail("$.seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("seeds")) cfg.seeds = get_int(doc["seeds"], "$.seeds", 1, 100000);
  if (doc.contains("n_particles")) cfg.n_particles = get_int(doc["n_particles"], "$.n_particles", 0, cfg.lattice.n_sites);
  if (doc.contains("dense_cap")) cfg.dense_cap = static_cast<std::size_t>(get_int(doc["dense_cap"], "$.dense_cap", 1, 1 << 30));
  if (doc.contains("threads")) cfg.threads = get_int(doc["threads"], "$.threads", 1, 1024);

  if (doc.contains("levelstats")) {
    const auto& l = doc["levelstats"];
    check_keys(l, {"bins", "s_max"}, "levelstats");
    if (l.contains("bins")) cfg.bins = get_int(l["bins"], "levelstats.bins", 1, 100000);
    if (l.contains("s_max")) {
      cfg.s_max = get_number(l["s_max"], "levelstats.s_max");
      if (!(cfg.s_max > 0.0)) fail("levelstats.s_max", "must be positive");
    }
  }
  if (doc.contains("quench")) {
    const auto& q = doc["quench"];
    check_keys(q, {"t_min", "t_max", "n_times", "initial_states"}, "quench");
    if (q.contains("t_min")) cfg.quench.t_min = get_number(q["t_min"], "quench.t_min");
    if (q.contains("t_max")) cfg.quench.t_max = get_number(q["t_max"], "quench.t_max");
    if (q.contains("n_times")) cfg.quench.n_times = get_int(q["n_times"], "quench.n_times", 2, 1000000);
    if (!(cfg.quench.t_min > 0.0) || !(cfg.quench.t_max > cfg.quench.t_min))
      fail("quench", "time grid needs 0 < t_min < t_max");
    if (q.contains("initial_states")) {
      const auto& s = q["initial_states"];
      if (!s.is_array() || s.empty()) fail("quench.initial_states", "expected a nonempty array");
      cfg.quench.initial_states.clear();
      for (std::size_t i = 0; i < s.size(); ++i)
        cfg.quench.initial_states.push_back(parse_initial_state(s[i], "quench.initial_states[" + std::to_string(i) + "]"));
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

struct Overrides {
  std::optional<int> seeds;
  std::optional<int> threads;
  std::optional<std::size_t> dense_cap;
};

inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seeds) {
    if (*o.seeds < 1) throw ConfigError("--seeds must be >= 1");
    cfg.seeds = *o.seeds;
  }
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *o.threads;
  }
  if (o.dense_cap) cfg.dense_cap = *o.dense_cap;
}

// ---------------------------------------------------------------------------
// Per-seed work. Each task fills a SeedOutput; files are written afterwards in
// seed order, so the thread count never changes any byte of the tables.

struct SeedOutput {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> files;  // per-seed artifacts
  std::vector<std::vector<std::string>> rows;  // rows of the aggregate table
  json summary;
  double seconds = 0.0;
};

inline CouplingSet draw(const RunConfig& cfg, std::uint64_t seed, bool with_b = false) {
  SamplingOptions opts;
  opts.mode = cfg.mode;
  opts.q_power = cfg.q_power;
  if (with_b) opts.b_range = cfg.b_range.value_or(cfg.t_range);
  return sample_couplings(cfg.lattice, cfg.t_range, cfg.a_range, seed, opts);
}

inline DenseOptions dense_options(const RunConfig& cfg) {
  DenseOptions d;
  d.dense_cap = cfg.dense_cap;
  return d;
}

inline std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

inline std::string csv_string(const std::vector<std::string>& header, const std::function<void(CsvWriter&)>& body) {
  std::ostringstream os;
  CsvWriter w(os, header);
  body(w);
  return os.str();
}

inline std::string f17(double v) { return fmt_double(v); }

inline const StateVector& scar_in_sector(const ScarTower& tower, int n_particles) {
  const StateVector* psi = tower.in_sector(n_particles);
  if (!psi)
    throw InvalidParameter("no scar tower state in sector N = " + std::to_string(n_particles) +
                           " (the tower lives at N = n_sites - 2k)");
  return *psi;
}

struct Subcommand {
  std::string name;
  std::string description;
  std::string columns;  // printed in --help
  std::vector<std::string> aggregate_header;
  std::function<SeedOutput(const RunConfig&, std::uint64_t)> per_seed;
  std::function<void(const RunConfig&, const std::vector<SeedOutput>&, std::map<std::string, std::string>&, json&)> finish;
};

inline SeedOutput levelstats_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutput out;
  const CouplingSet cs = draw(cfg, seed);
  const auto h = build_hamiltonian(cs, make_basis(cfg.lattice.n_sites, cfg.sector()));
  const auto spec = diagonalize(h, false, dense_options(cfg));
  LevelStatsOptions lo;
  lo.bins = cfg.bins;
  lo.s_max = cfg.s_max;
  const LevelStats st = level_statistics(spec.eigenvalues, lo);
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(cs).dump(1) + "\n";
  out.files["levelstats_spacings_" + seed_tag(seed) + ".csv"] = csv_string({"i", "s"}, [&](CsvWriter& w) {
    for (std::size_t i = 0; i < st.spacings.size(); ++i) w.row(static_cast<long long>(i), st.spacings[i]);
  });
  out.files["levelstats_ratios_" + seed_tag(seed) + ".csv"] = csv_string({"i", "r"}, [&](CsvWriter& w) {
    for (std::size_t i = 0; i < st.ratios.size(); ++i) w.row(static_cast<long long>(i), st.ratios[i]);
  });
  out.rows.push_back({std::to_string(seed), std::to_string(spec.eigenvalues.size()), std::to_string(st.window.lo),
                      std::to_string(st.window.hi), f17(st.mean_r), f17(st.mean_spacing), std::to_string(st.ratios.size()),
                      std::to_string(st.zero_spacings), std::to_string(st.skipped_ratios)});
  out.summary = {{"spacings", st.spacings}, {"ratios", st.ratios}};
  return out;
}

inline void levelstats_finish(const RunConfig& cfg, const std::vector<SeedOutput>& seeds, std::map<std::string, std::string>& files,
                              json& meta) {
  std::vector<double> all_s, means;
  double sum_r = 0.0;
  std::size_t count_r = 0;
  for (const auto& s : seeds) {
    const auto sp = s.summary["spacings"].get<std::vector<double>>();
    const auto rs = s.summary["ratios"].get<std::vector<double>>();
    all_s.insert(all_s.end(), sp.begin(), sp.end());
    for (double r : rs) sum_r += r;
    count_r += rs.size();
    double m = 0.0;
    for (double r : rs) m += r;
    means.push_back(rs.empty() ? 0.0 : m / static_cast<double>(rs.size()));
  }
  const double pooled = count_r ? sum_r / static_cast<double>(count_r) : 0.0;
  double se = 0.0;
  if (means.size() > 1) {
    double mm = 0.0;
    for (double m : means) mm += m;
    mm /= static_cast<double>(means.size());
    double var = 0.0;
    for (double m : means) var += (m - mm) * (m - mm);
    var /= static_cast<double>(means.size() - 1);
    se = std::sqrt(var / static_cast<double>(means.size()));
  }
  const Histogram hist = make_histogram(all_s, 0.0, cfg.s_max, cfg.bins);
  files["levelstats_hist.csv"] = csv_string({"s_lo", "s_hi", "count", "density", "goe", "gue", "poisson"}, [&](CsvWriter& w) {
    for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
      const double mid = 0.5 * (hist.edges[b] + hist.edges[b + 1]);
      w.row(hist.edges[b], hist.edges[b + 1], static_cast<long long>(hist.counts[b]), hist.density(b),
            reference_distribution(Ensemble::goe, mid), reference_distribution(Ensemble::gue, mid),
            reference_distribution(Ensemble::poisson, mid));
    }
  });
  files["levelstats_pooled.csv"] = csv_string({"seeds", "ratios", "mean_r", "standard_error", "goe", "gue", "poisson"}, [&](CsvWriter& w) {
    w.row(static_cast<long long>(seeds.size()), static_cast<long long>(count_r), pooled, se, reference_mean_r(Ensemble::goe),
          reference_mean_r(Ensemble::gue), reference_mean_r(Ensemble::poisson));
  });
  meta["pooled_mean_r"] = pooled;
  meta["pooled_standard_error"] = se;
}

/// Full spectrum with eigenvectors of H in the configured sector, plus the scar.
struct EigenContext {
  CouplingSet cs;
  SpectrumResult spec;
  ScarTower tower;
  const StateVector* scar = nullptr;
};

inline EigenContext eigen_context(const RunConfig& cfg, std::uint64_t seed) {
  EigenContext ctx;
  ctx.cs = draw(cfg, seed);
  const int n = cfg.lattice.n_sites, m = cfg.sector();
  if ((n - m) % 2 != 0)
    throw InvalidParameter("sector N = " + std::to_string(m) + " holds no scar on " + std::to_string(n) +
                           " sites; pick N with n_sites - N even");
  ctx.spec = diagonalize(build_hamiltonian(ctx.cs, make_basis(n, m)), true, dense_options(cfg));
  ctx.tower = build_scar_tower(ctx.cs);
  ctx.scar = &scar_in_sector(ctx.tower, m);
  return ctx;
}

inline SeedOutput scatter_seed(const RunConfig& cfg, std::uint64_t seed, bool correlator) {
  SeedOutput out;
  const EigenContext ctx = eigen_context(cfg, seed);
  const auto& V = *ctx.spec.eigenvectors;
  const Eigen::VectorXcd overlaps = V.adjoint() * ctx.scar->amplitudes;
  const LevelWindow win = middle_half(static_cast<std::size_t>(ctx.spec.eigenvalues.size()));
  const PartitionMap map(*ctx.spec.basis, half_system(cfg.lattice.n_sites));
  const std::string name = correlator ? "corr_scatter_" : "ee_scatter_";
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(ctx.cs).dump(1) + "\n";
  out.files[name + seed_tag(seed) + ".csv"] =
      csv_string({"index", "energy", correlator ? "correlator" : "entropy", "scar_overlap", "middle_half"}, [&](CsvWriter& w) {
        for (Eigen::Index i = 0; i < ctx.spec.eigenvalues.size(); ++i) {
          const StateVector psi = eigenstate(ctx.spec, i);
          const double value = correlator ? bond_density_expectation(psi, cfg.lattice.bonds) : entanglement_entropy(psi, map);
          const bool in = static_cast<std::size_t>(i) >= win.lo && static_cast<std::size_t>(i) < win.hi;
          w.row(static_cast<long long>(i), ctx.spec.eigenvalues[i], value, std::norm(overlaps[i]), in ? 1 : 0);
        }
      });
  Eigen::Index best = 0;
  overlaps.cwiseAbs2().maxCoeff(&best);
  const double scar_value = correlator ? bond_density_expectation(*ctx.scar, cfg.lattice.bonds) : entanglement_entropy(*ctx.scar, map);
  out.rows.push_back({std::to_string(seed), std::to_string(ctx.spec.eigenvalues.size()), std::to_string(best),
                      f17(ctx.spec.eigenvalues[best]), f17(std::norm(overlaps[best])), f17(scar_value)});
  return out;
}

inline SeedOutput quench_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutput out;
  const EigenContext ctx = eigen_context(cfg, seed);
  const int n = cfg.lattice.n_sites, m = cfg.sector();
  const auto times = log_time_grid(cfg.quench.t_min, cfg.quench.t_max, cfg.quench.n_times);
  const Bipartition part = half_system(n);
  const double baseline = (m > 0 && m < n) ? average_random_entropy(n, m) : 0.0;
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(ctx.cs).dump(1) + "\n";
  for (InitialState kind : cfg.quench.initial_states) {
    const StateVector psi0 = kind == InitialState::product ? product_state(n, m) : uniform_pair_state(cfg.lattice, (n - m) / 2);
    const QuenchTrace tr = evolve(ctx.spec, psi0, times, part, kind);
    const double overlap2 = std::norm(inner(*ctx.scar, psi0));
    out.files[std::string("quench_") + to_string(kind) + "_" + seed_tag(seed) + ".csv"] =
        csv_string({"t", "fidelity", "entropy", "norm", "baseline"}, [&](CsvWriter& w) {
          for (std::size_t i = 0; i < tr.times.size(); ++i) w.row(tr.times[i], tr.fidelity[i], tr.entropy[i], tr.norm[i], baseline);
        });
    out.rows.push_back({std::to_string(seed), to_string(kind), f17(overlap2), f17(overlap2 * overlap2),
                        f17(*std::min_element(tr.fidelity.begin(), tr.fidelity.end())), f17(tr.entropy.back()), f17(baseline)});
  }
  return out;
}

inline SeedOutput scar_verify_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutput out;
  const CouplingSet cs = draw(cfg, seed);
  const int n = cfg.lattice.n_sites;
  const OperatorFamily q_ops = build_q_family(cs);
  const ScarTower tower = build_scar_tower(q_ops, filled_state(n));
  const OperatorFamily h_ops = build_family(n, all_sectors(n), [&](BasisPtr b) { return build_hamiltonian(cs, std::move(b)); });
  json report;
  report["seed"] = seed;
  report["k_max"] = tower.k_max;
  report["terminated_early"] = tower.terminated_early;
  double h_norm = 0.0;
  for (const auto& [m, op] : h_ops) h_norm = std::max(h_norm, spectral_norm_estimate(op));
  report["h_norm"] = h_norm;
  json residuals = json::array();
  for (int k = 0; k <= tower.k_max; ++k) {
    const StateVector& psi = tower.at(k);
    const double res = verify_scar(family_at(h_ops, psi.n_particles()), psi, h_norm);
    residuals.push_back(res);
    out.rows.push_back({std::to_string(seed), std::to_string(k), std::to_string(psi.n_particles()),
                        std::to_string(psi.basis->size()), f17(res), f17(tower.raw_norms[static_cast<std::size_t>(k)])});
    std::ostringstream os;
    write_state_csv(os, psi);
    out.files["tower_" + seed_tag(seed) + "_k" + std::to_string(k) + ".csv"] = os.str();
  }
  report["residuals"] = residuals;
  const Rsga1Report rs = verify_rsga1(h_ops, q_ops, filled_state(n));
  report["rsga1"] = {{"cond_i", rs.cond_i}, {"cond_ii", rs.cond_ii}, {"cond_iii", rs.cond_iii}, {"pass", rs.pass()}};
  if (cfg.lattice.bipartite() && cfg.mode == CouplingMode::bipartite && n >= 3) {
    const int m = std::clamp(cfg.sector(), 2, n - 1);
    const PairingDecomposition pd = pairing_decomposition(cs, *cfg.lattice.labels);
    const PairingReport pr = verify_pairing(pd, cs, m);
    report["pairing"] = {{"n_particles", m},
                         {"rank", pd.rank},
                         {"epsilons", std::vector<double>(pd.epsilons.data(), pd.epsilons.data() + pd.epsilons.size())},
                         {"hop_residual", pr.hop_residual},
                         {"q_residual", pr.q_residual},
                         {"pair_commutator_residual", pr.pair_commutator_residual},
                         {"anticommutator_residual", pr.anticommutator_residual},
                         {"orthogonality_residual", pr.orthogonality_residual},
                         {"spectrum_pairing_residual", pr.spectrum_pairing_residual},
                         {"pass", pr.pass()}};
  } else {
    report["pairing"] = nullptr;
  }
  out.files["scar_verify_" + seed_tag(seed) + ".json"] = report.dump(1) + "\n";
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(cs).dump(1) + "\n";
  return out;
}

inline SeedOutput parent_census_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutput out;
  const CouplingSet cs = draw(cfg, seed, true);
  CensusOptions co;
  co.dense = dense_options(cfg);
  const Census census = zero_mode_census(cs, cfg.lattice, co);
  out.files["parent_census_" + seed_tag(seed) + ".csv"] =
      csv_string({"n_particles", "dim", "zero_count", "min_eigenvalue", "threshold"}, [&](CsvWriter& w) {
        for (const auto& sc : census.sectors)
          w.row(sc.n_particles, static_cast<long long>(sc.dim), sc.zero_count, sc.min_eigenvalue, sc.threshold);
      });
  const auto& hy = census.hypotheses;
  json report;
  report["seed"] = seed;
  report["total_zero_modes"] = census.total;
  report["expected"] = census.expected;
  report["global_norm"] = census.global_norm;
  report["hypotheses"] = hy ? json{{"equal_sublattices", hy->equal_sublattices},
                                   {"regular", hy->regular},
                                   {"connected", hy->connected},
                                   {"sigma_min", hy->sigma_min},
                                   {"all", hy->all()}}
                            : json(nullptr);
  json sectors = json::array();
  for (const auto& sc : census.sectors)
    sectors.push_back({{"n_particles", sc.n_particles}, {"dim", sc.dim}, {"zero_count", sc.zero_count},
                       {"min_eigenvalue", sc.min_eigenvalue}, {"threshold", sc.threshold}});
  report["sectors"] = sectors;
  out.files["parent_census_" + seed_tag(seed) + ".json"] = report.dump(1) + "\n";
  out.rows.push_back({std::to_string(seed), std::to_string(census.total), std::to_string(census.expected),
                      hy ? std::to_string(static_cast<int>(hy->all())) : "", census.total == census.expected ? "1" : "0"});
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(cs).dump(1) + "\n";
  return out;
}

inline SeedOutput ph_check_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutput out;
  const CouplingSet cs = draw(cfg, seed);
  const int n = cfg.lattice.n_sites;
  const ModelTerms orig = model_terms(cs);
  const ModelTerms dual = particle_hole_transform(orig);
  const ScarTower tower = build_scar_tower(cs);
  std::vector<SectorOperator> dual_ops;
  double dual_norm = 0.0;
  for (int m = 0; m <= n; ++m) {
    dual_ops.push_back(build_model_hamiltonian(dual, make_basis(n, m)));
    dual_norm = std::max(dual_norm, spectral_norm_estimate(dual_ops.back()));
  }
  for (int m = 0; m <= n; ++m) {
    const auto e1 = diagonalize(build_model_hamiltonian(orig, make_basis(n, m)), false, dense_options(cfg)).eigenvalues;
    const auto e2 = diagonalize(dual_ops[static_cast<std::size_t>(n - m)], false, dense_options(cfg)).eigenvalues;
    const double diff = (e1 - e2).cwiseAbs().maxCoeff();
    double tower_res = -1.0;
    if (const StateVector* psi = tower.in_sector(m)) {
      const StateVector dual_psi = apply_particle_hole_adjoint(*psi);
      tower_res = verify_scar(dual_ops[static_cast<std::size_t>(n - m)], dual_psi, dual_norm);
    }
    out.rows.push_back({std::to_string(seed), std::to_string(m), std::to_string(n - m), std::to_string(e1.size()), f17(diff),
                        tower_res < 0.0 ? "" : f17(tower_res)});
  }
  out.files["couplings_" + seed_tag(seed) + ".json"] = to_json(cs).dump(1) + "\n";
  return out;
}

inline const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> subs = [] {
    std::vector<Subcommand> v;
    v.push_back({"levelstats", "Level-spacing statistics of H in sector N, pooled over seeds",
                 "levelstats.csv: seed,dim,window_begin,window_end,mean_r,mean_spacing,ratios,zero_spacings,skipped_ratios\n"
                 "levelstats_pooled.csv: seeds,ratios,mean_r,standard_error,goe,gue,poisson\n"
                 "levelstats_hist.csv: s_lo,s_hi,count,density,goe,gue,poisson\n"
                 "levelstats_spacings_seed<S>.csv: i,s\n"
                 "levelstats_ratios_seed<S>.csv: i,r",
                 {"seed", "dim", "window_begin", "window_end", "mean_r", "mean_spacing", "ratios", "zero_spacings", "skipped_ratios"},
                 levelstats_seed, levelstats_finish});
    v.push_back({"ee-scatter", "Half-system entanglement entropy of every eigenstate in sector N",
                 "ee-scatter.csv: seed,dim,scar_index,scar_energy,scar_overlap,scar_value\n"
                 "ee_scatter_seed<S>.csv: index,energy,entropy,scar_overlap,middle_half",
                 {"seed", "dim", "scar_index", "scar_energy", "scar_overlap", "scar_value"},
                 [](const RunConfig& c, std::uint64_t s) { return scatter_seed(c, s, false); }, nullptr});
    v.push_back({"corr-scatter", "Bond-averaged density correlator of every eigenstate in sector N",
                 "corr-scatter.csv: seed,dim,scar_index,scar_energy,scar_overlap,scar_value\n"
                 "corr_scatter_seed<S>.csv: index,energy,correlator,scar_overlap,middle_half",
                 {"seed", "dim", "scar_index", "scar_energy", "scar_overlap", "scar_value"},
                 [](const RunConfig& c, std::uint64_t s) { return scatter_seed(c, s, true); }, nullptr});
    v.push_back({"quench", "Fidelity and entanglement after a quench from product and uniform-pair states",
                 "quench.csv: seed,initial_state,scar_overlap_sq,fidelity_bound,min_fidelity,final_entropy,baseline\n"
                 "quench_<state>_seed<S>.csv: t,fidelity,entropy,norm,baseline",
                 {"seed", "initial_state", "scar_overlap_sq", "fidelity_bound", "min_fidelity", "final_entropy", "baseline"},
                 quench_seed, nullptr});
    v.push_back({"scar-verify", "Scar tower residuals, restricted spectrum generating algebra and pairing checks",
                 "scar-verify.csv: seed,k,n_particles,dim,residual,raw_norm\n"
                 "tower_seed<S>_k<k>.csv: config,re,im\n"
                 "scar_verify_seed<S>.json: residual report",
                 {"seed", "k", "n_particles", "dim", "residual", "raw_norm"}, scar_verify_seed, nullptr});
    v.push_back({"parent-census", "Zero modes of the parent Hamiltonian across the whole Fock space",
                 "parent-census.csv: seed,total_zero_modes,expected,hypotheses_hold,match\n"
                 "parent_census_seed<S>.csv: n_particles,dim,zero_count,min_eigenvalue,threshold\n"
                 "parent_census_seed<S>.json: census report with hypothesis checks",
                 {"seed", "total_zero_modes", "expected", "hypotheses_hold", "match"}, parent_census_seed, nullptr});
    v.push_back({"ph-check", "Spectra of H and its particle-hole twin, sector by sector",
                 "ph-check.csv: seed,n_particles,dual_n_particles,dim,max_eigenvalue_diff,dual_tower_residual",
                 {"seed", "n_particles", "dual_n_particles", "dim", "max_eigenvalue_diff", "dual_tower_residual"},
                 ph_check_seed, nullptr});
    return v;
  }();
  return subs;
}

inline const Subcommand& find_subcommand(const std::string& name) {
  for (const auto& s : subcommands())
    if (s.name == name) return s;
  throw ConfigError("unknown subcommand '" + name + "'");
}

/// Runs one subcommand and writes its artifacts into out_dir. Returns the
/// names of the files written, sorted.
inline std::vector<std::string> run(const std::string& name, const RunConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const Subcommand& sub = find_subcommand(name);
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<SeedOutput> results(static_cast<std::size_t>(cfg.seeds));
  std::vector<std::string> errors(results.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      const std::uint64_t seed = cfg.seed + i;
      const auto s0 = std::chrono::steady_clock::now();
      try {
        results[i] = sub.per_seed(cfg, seed);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      results[i].seed = seed;
      results[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.threads, cfg.seeds));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw Error("seed " + std::to_string(cfg.seed + i) + ": " + errors[i]);

  std::map<std::string, std::string> files;
  for (const auto& r : results)
    for (const auto& [fname, content] : r.files) files[fname] = content;
  files[name + ".csv"] = csv_string(sub.aggregate_header, [&](CsvWriter& w) {
    for (const auto& r : results)
      for (const auto& row : r.rows) w.write_row(row);
  });
  json meta;
  if (sub.finish) sub.finish(cfg, results, files, meta);

  meta["subcommand"] = name;
  meta["git_describe"] = QMBS_GIT_DESCRIBE;
  meta["rng"] = std::string(kRngAlgorithm);
  meta["schema_version"] = kSchemaVersion;
  meta["seed"] = cfg.seed;
  meta["seeds"] = cfg.seeds;
  meta["threads"] = n_threads;
  meta["dense_cap"] = cfg.dense_cap;
  meta["lattice"] = to_json(cfg.lattice);
  meta["n_particles"] = cfg.sector();
  if (name == "quench") meta["uniform_pair_k"] = (cfg.lattice.n_sites - cfg.sector()) / 2;
  meta["config"] = cfg.raw;
  json timings = json::object();
  for (const auto& r : results) timings[seed_tag(r.seed)] = r.seconds;
  timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  meta["timings_seconds"] = timings;

  std::vector<std::string> written;
  for (const auto& [fname, content] : files) {
    write_text_file((fs::path(out_dir) / fname).string(), content);
    written.push_back(fname);
  }
  const std::string meta_name = name + ".meta.json";
  write_text_file((fs::path(out_dir) / meta_name).string(), meta.dump(1) + "\n");
  written.push_back(meta_name);
  std::sort(written.begin(), written.end());
  return written;
}

/// Full command-line entry point; returns the process exit status.
inline int main_entry(int argc, char** argv, std::ostream& err = std::cerr) {
  CLI::App app{"qmbs: scarred spinless-fermion models, exact diagonalization and diagnostics"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  Overrides ov;
  std::optional<int> seeds, threads;
  std::optional<std::size_t> dense_cap;
  for (const auto& s : subcommands()) {
    auto* sc = app.add_subcommand(s.name, s.description);
    sc->add_option("--config", config_path, "JSON config (see schema/config.schema.json)")->required();
    sc->add_option("--out", out_dir, "output directory (created if missing)");
    sc->add_option("--seeds", seeds, "number of consecutive seeds, starting at the config seed");
    sc->add_option("--threads", threads, "worker threads for multi-seed sweeps");
    sc->add_option("--dense-cap", dense_cap, "largest sector dimension handed to the dense solver");
    sc->footer("Output tables:\n" + s.columns);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  ov.seeds = seeds;
  ov.threads = threads;
  ov.dense_cap = dense_cap;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, ov);
    run(name, cfg, out_dir);
  } catch (const ConfigError& e) {
    err << "qmbs: " << e.what() << "\n";
    return 2;
  } catch (const CapacityExceeded& e) {
    err << "qmbs: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "qmbs: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qmbs::cli
