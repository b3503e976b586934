#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcls/error.hpp"
#include "pcls/model.hpp"
#include "pcls/montecarlo.hpp"
#include "pcls/spectral.hpp"

namespace pcls::io {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Row-major CSV; metadata as '#' comment lines, then a header row holding the grid.
inline void write_cov_csv(std::ostream& os, const CovMatrix& c) {
  os << "# min_eigenvalue=" << fmt(c.min_eigenvalue) << "\n# trace=" << fmt(c.trace)
     << "\n# repaired=" << (c.repaired ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) os << (i ? "," : "") << fmt(c.grid[i]);
  os << "\n";
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < c.values.cols(); ++k) os << (k ? "," : "") << fmt(c.values(i, k));
    os << "\n";
  }
}

inline nlohmann::json cov_to_json(const CovMatrix& c) {
  nlohmann::json j;
  j["grid"] = c.grid;
  j["min_eigenvalue"] = c.min_eigenvalue;
  j["trace"] = c.trace;
  j["repaired"] = c.repaired;
  auto& rows = j["values"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(c.values.cols()));
    for (Eigen::Index k = 0; k < c.values.cols(); ++k) r[static_cast<std::size_t>(k)] = c.values(i, k);
    rows.push_back(r);
  }
  return j;
}

/// CSV with one row per path; header row = grid.
inline void write_ensemble_csv(std::ostream& os, const Ensemble& e) {
  os << "# seed=" << e.seed << "\n# fingerprint=" << e.fingerprint << "\n# method=" << to_string(e.method)
     << "\n";
  for (std::size_t i = 0; i < e.grid.size(); ++i) os << (i ? "," : "") << fmt(e.grid[i]);
  os << "\n";
  for (Eigen::Index p = 0; p < e.paths.rows(); ++p) {
    for (Eigen::Index i = 0; i < e.paths.cols(); ++i) os << (i ? "," : "") << fmt(e.paths(p, i));
    os << "\n";
  }
}

inline constexpr char kEnsembleMagic[8] = {'P', 'C', 'L', 'S', 'E', 'N', 'S', '1'};

/// Binary column format, host byte order:
///   magic "PCLSENS1" | u64 n_grid | u64 n_paths | u64 seed | 16-byte fingerprint
///   | n_grid f64 grid | n_grid columns of n_paths f64 values.
/// Size: 48 + 8 n_grid (1 + n_paths) bytes.
inline void write_ensemble_binary(std::ostream& os, const Ensemble& e) {
  const auto put = [&](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
  put(kEnsembleMagic, 8);
  const std::uint64_t ng = e.grid.size(), np = e.n_paths(), seed = e.seed;
  put(&ng, 8);
  put(&np, 8);
  put(&seed, 8);
  char fp[16] = {};
  std::memcpy(fp, e.fingerprint.data(), std::min<std::size_t>(16, e.fingerprint.size()));
  put(fp, 16);
  put(e.grid.data(), 8 * ng);
  std::vector<double> col(np);
  for (std::uint64_t i = 0; i < ng; ++i) {
    for (std::uint64_t p = 0; p < np; ++p) col[p] = e.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
    put(col.data(), 8 * np);
  }
}

inline Ensemble read_ensemble_binary(std::istream& is) {
  const auto get = [&](void* p, std::size_t n) {
    if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) throw Error("truncated ensemble file");
  };
  char magic[8];
  get(magic, 8);
  if (std::memcmp(magic, kEnsembleMagic, 8) != 0) throw Error("not a PCLS ensemble file");
  std::uint64_t ng = 0, np = 0, seed = 0;
  get(&ng, 8);
  get(&np, 8);
  get(&seed, 8);
  char fp[17] = {};
  get(fp, 16);
  Ensemble e;
  e.seed = seed;
  e.fingerprint = fp;
  e.grid.resize(ng);
  get(e.grid.data(), 8 * ng);
  e.paths.resize(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(ng));
  std::vector<double> col(np);
  for (std::uint64_t i = 0; i < ng; ++i) {
    get(col.data(), 8 * np);
    for (std::uint64_t p = 0; p < np; ++p) e.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = col[p];
  }
  return e;
}

inline nlohmann::json mc_report_to_json(const McReport& r) {
  nlohmann::json j;
  j["pairs_checked"] = r.pairs_checked;
  j["failures"] = r.failures;
  j["within_3se"] = r.within_3se;
  j["max_abs_z"] = r.max_abs_z;
  j["z"] = r.z_threshold;
  j["n_paths"] = r.n_paths;
  j["seed"] = r.seed;
  j["method"] = to_string(r.method);
  j["fingerprint"] = r.fingerprint;
  auto& es = j["entries"] = nlohmann::json::array();
  for (const auto& e : r.entries)
    es.push_back({{"i", e.i}, {"k", e.k}, {"t", e.t}, {"u", e.u}, {"estimate", e.estimate},
                  {"standard_error", e.standard_error}, {"expected", e.expected}, {"z", e.z}});
  return j;
}

/// Spectral dump rows: j,k,lambda,mass_re,mass_im,kind with kind in {F, Theta}.
inline void write_spectral_dump(std::ostream& os, const SpectralModel& sm, double t, double u) {
  const auto& part = sm.model().partition();
  const std::size_t j = part.block_of(t), k = part.block_of(u);
  os << "j,k,lambda,mass_re,mass_im,kind\n";
  const auto rows = [&](const std::vector<SpectralMass>& ms, const char* kind) {
    for (const auto& m : ms)
      os << j << "," << k << "," << fmt(m.lambda) << "," << fmt(m.mass.real()) << "," << fmt(m.mass.imag())
         << "," << kind << "\n";
  };
  rows(sm.F_kernel(j, k, t, u), "F");
  rows(sm.theta_kernel(j, k, t, u), "Theta");
}

}  // namespace pcls::io
