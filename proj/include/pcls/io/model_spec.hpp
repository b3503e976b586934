#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcls/error.hpp"
#include "pcls/excov.hpp"
#include "pcls/model.hpp"
#include "pcls/pc_component.hpp"
#include "pcls/stationary.hpp"

namespace pcls::io {

using json = nlohmann::json;

/// Optional run defaults carried by a spec file; CLI flags override them.
struct RunDefaults {
  std::optional<std::string> grid;  ///< "start:stop:step"
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> tol_psd;
  std::optional<double> tol_spec_atomic;
  std::optional<double> tol_spec_density;
  std::optional<double> z;
};

struct ModelSpec {
  PCLSModel model;
  RunDefaults defaults;
};

constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string at(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}
inline std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SpecError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SpecError(at(path, key), "missing required field");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SpecError(path, "expected a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw SpecError(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

inline std::vector<double> positive(const json& v, const std::string& path) {
  auto xs = numbers(v, path);
  for (double x : xs)
    if (!(x > 0.0)) throw SpecError(path, "entries must be positive");
  return xs;
}

inline ExpConvexCov parse_psi(const json& j, const std::string& path) {
  const auto& type = field(j, "type", path);
  if (!type.is_string()) throw SpecError(at(path, "type"), "expected a string");
  const auto t = type.get<std::string>();
  if (t == "laplace_mixture") {
    auto w = positive(field(j, "weights", path), at(path, "weights"));
    auto r = numbers(field(j, "rates", path), at(path, "rates"));
    if (w.size() != r.size()) throw SpecError(at(path, "rates"), "needs one rate per weight");
    try {
      return ExpConvexCov(LaplaceMixture{std::move(w), std::move(r)});
    } catch (const DomainError& e) {
      throw SpecError(at(path, "rates"), e.what());
    }
  }
  if (t == "closed_form") {
    const auto& name = field(j, "name", path);
    if (!name.is_string()) throw SpecError(at(path, "name"), "expected a string");
    try {
      return ExpConvexCov::closed_form(name.get<std::string>());
    } catch (const DomainError& e) {
      throw SpecError(at(path, "name"), e.what());
    }
  }
  throw SpecError(at(path, "type"), "unknown psi type '" + t + "'");
}

inline StationaryCov parse_gamma(const json& j, const std::string& path) {
  const auto& fam = field(j, "family", path);
  if (!fam.is_string()) throw SpecError(at(path, "family"), "expected a string");
  const auto f = fam.get<std::string>();
  const auto pos = [&](const char* key) {
    const double v = number(field(j, key, path), at(path, key));
    if (!(v > 0.0)) throw SpecError(at(path, key), "must be positive");
    return v;
  };
  if (f == "exponential") return Exponential{pos("theta"), pos("sigma2")};
  if (f == "squared_exponential") return SquaredExp{pos("ell"), pos("sigma2")};
  if (f == "cosine_mixture") {
    auto m = positive(field(j, "masses", path), at(path, "masses"));
    auto w = numbers(field(j, "frequencies", path), at(path, "frequencies"));
    if (w.size() != m.size()) throw SpecError(at(path, "frequencies"), "needs one frequency per mass");
    for (double x : w)
      if (!(x >= 0.0)) throw SpecError(at(path, "frequencies"), "frequencies must be >= 0");
    return CosineMixture{std::move(m), std::move(w)};
  }
  throw SpecError(at(path, "family"), "unknown stationary family '" + f + "'");
}

inline PCSequenceSpec parse_pc(const json& j, std::size_t period) {
  const std::string path = "pc";
  if (!j.is_object()) throw SpecError(path, "expected an object");
  if (j.contains("sigma")) {
    auto sigma = positive(j["sigma"], "pc.sigma");
    if (sigma.size() != period)
      throw SpecError("pc.sigma", "needs one entry per block of the period (" + std::to_string(period) + ")");
    const double rho = number(field(j, "rho", path), "pc.rho");
    if (!(std::abs(rho) < 1.0)) throw SpecError("pc.rho", "must lie in (-1, 1)");
    try {
      return PCSequenceSpec(ParametricPc{std::move(sigma), rho});
    } catch (const DomainError& e) {
      throw SpecError(path, e.what());
    }
  }
  if (j.contains("base_matrix")) {
    const auto& rows = j["base_matrix"];
    if (!rows.is_array() || rows.empty()) throw SpecError("pc.base_matrix", "expected a nonempty matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd base(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto rp = at("pc.base_matrix", static_cast<std::size_t>(r));
      auto vals = numbers(rows[static_cast<std::size_t>(r)], rp);
      if (static_cast<Eigen::Index>(vals.size()) != n) throw SpecError(rp, "matrix must be square");
      for (Eigen::Index c = 0; c < n; ++c) base(r, c) = vals[static_cast<std::size_t>(c)];
    }
    const auto& kp = field(j, "periods", path);
    if (!kp.is_number_integer() || kp.get<long long>() < 1)
      throw SpecError("pc.periods", "expected a positive integer");
    try {
      return PCSequenceSpec(ExplicitPc{std::move(base), kp.get<std::size_t>()}, period);
    } catch (const DomainError& e) {
      throw SpecError("pc.base_matrix", e.what());
    }
  }
  throw SpecError(path, "expected either sigma/rho or base_matrix/periods");
}

inline RunDefaults parse_defaults(const json& j) {
  RunDefaults d;
  if (!j.is_object()) throw SpecError("defaults", "expected an object");
  if (j.contains("grid")) {
    if (!j["grid"].is_string()) throw SpecError("defaults.grid", "expected \"start:stop:step\"");
    d.grid = j["grid"].get<std::string>();
  }
  const auto count = [&](const char* key) -> std::optional<std::uint64_t> {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j[key];
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))
      return v.get<std::uint64_t>();
    throw SpecError(at("defaults", key), "expected a nonnegative integer");
  };
  d.seed = count("seed");
  if (auto p = count("paths")) d.paths = static_cast<std::size_t>(*p);
  const auto opt_num = [&](const char* key, std::optional<double>& out) {
    if (j.contains(key)) out = number(j[key], at("defaults", key));
  };
  opt_num("tol_psd", d.tol_psd);
  opt_num("tol_spec_atomic", d.tol_spec_atomic);
  opt_num("tol_spec_density", d.tol_spec_density);
  opt_num("z", d.z);
  return d;
}

}  // namespace detail

/// Builds a model from a parsed spec document. Throws SpecError located at the
/// offending JSON path.
inline ModelSpec parse_model_spec(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw SpecError("$", "spec must be a JSON object");
  const auto& schema = field(doc, "schema", "");
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion)
    throw SpecError("schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

  const auto& pj = field(doc, "partition", "");
  auto lengths = positive(field(pj, "lengths", "partition"), "partition.lengths");
  if (pj.contains("period")) {
    const auto& per = pj["period"];
    if (!per.is_number_integer() || per.get<long long>() != static_cast<long long>(lengths.size()))
      throw SpecError("partition.period", "must equal the number of lengths");
  }
  Partition partition(std::move(lengths));
  const std::size_t T = partition.period();

  ModelFlags flags;
  flags.include_ls = doc.contains("ls");
  flags.include_pc = doc.contains("pc");
  if (doc.contains("flags")) {
    const auto& fj = doc["flags"];
    if (!fj.is_object()) throw SpecError("flags", "expected an object");
    for (const char* key : {"include_ls", "include_pc"}) {
      if (!fj.contains(key)) continue;
      if (!fj[key].is_boolean()) throw SpecError(at("flags", key), "expected a boolean");
    }
    if (fj.contains("include_ls")) flags.include_ls = fj["include_ls"].get<bool>();
    if (fj.contains("include_pc")) flags.include_pc = fj["include_pc"].get<bool>();
  }
  if (flags.include_ls && !doc.contains("ls")) throw SpecError("ls", "include_ls is set but the ls section is missing");
  if (flags.include_pc && !doc.contains("pc")) throw SpecError("pc", "include_pc is set but the pc section is missing");
  if (!flags.include_ls && !flags.include_pc) throw SpecError("flags", "at least one component must be enabled");

  std::vector<ExpConvexCov> psi;
  std::vector<StationaryCov> gamma;
  if (doc.contains("ls")) {
    const auto& lj = doc["ls"];
    if (!lj.is_object()) throw SpecError("ls", "expected an object");
    if (lj.contains("periodic_reuse")) {
      if (!lj["periodic_reuse"].is_boolean()) throw SpecError("ls.periodic_reuse", "expected a boolean");
      flags.periodic_reuse = lj["periodic_reuse"].get<bool>();
    }
    const auto& ps = field(lj, "psi", "ls");
    const auto& gs = field(lj, "gamma", "ls");
    if (!ps.is_array() || ps.empty()) throw SpecError("ls.psi", "expected a nonempty array");
    if (!gs.is_array() || gs.empty()) throw SpecError("ls.gamma", "expected a nonempty array");
    for (std::size_t i = 0; i < ps.size(); ++i) psi.push_back(parse_psi(ps[i], at("ls.psi", i)));
    for (std::size_t i = 0; i < gs.size(); ++i) gamma.push_back(parse_gamma(gs[i], at("ls.gamma", i)));
    if (flags.periodic_reuse) {
      if (psi.size() != T) throw SpecError("ls.psi", "needs one entry per block of the period (" + std::to_string(T) + ")");
      if (gamma.size() != T) throw SpecError("ls.gamma", "needs one entry per block of the period (" + std::to_string(T) + ")");
    }
  }
  std::optional<PCSequenceSpec> pc;
  if (doc.contains("pc")) pc.emplace(parse_pc(doc["pc"], T));

  RunDefaults defaults;
  if (doc.contains("defaults")) defaults = parse_defaults(doc["defaults"]);

  try {
    return {PCLSModel(std::move(partition), std::move(psi), std::move(gamma), std::move(pc), flags), defaults};
  } catch (const DomainError& e) {
    throw SpecError("$", e.what());
  }
}

inline ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("$", "cannot read spec file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError("$", std::string("JSON parse error: ") + e.what());
  }
  return parse_model_spec(doc);
}

}  // namespace pcls::io
