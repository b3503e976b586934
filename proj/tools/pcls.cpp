// pcls: command-line front end for PC-LS models.
//
// Exit codes: 0 ok, 2 usage or spec error, 3 non-PSD model, 4 unsupported
// method, 5 numeric failure (including a check that ran and did not pass).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcls/io/export.hpp"
#include "pcls/io/model_spec.hpp"
#include "pcls/pcls.hpp"

namespace {

using nlohmann::json;
using namespace pcls;

constexpr double kTolPsd = 1e-8;
constexpr double kTolSpecAtomic = 1e-8;
constexpr double kTolSpecDensity = 1e-4;
constexpr double kZ = 4.0;
constexpr std::uint64_t kSeed = 12345;
constexpr std::size_t kPaths = 100000;

enum Exit { kOk = 0, kUsage = 2, kNonPsd = 3, kUnsupported = 4, kNumeric = 5 };

struct Common {
  std::string spec;
  std::string grid;
  std::string points;
  std::string out;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("--grid expects start:stop:step, got '" + text + "'");
    }
  }
  if (parts.size() != 3) throw DomainError("--grid expects start:stop:step, got '" + text + "'");
  return uniform_grid(parts[0], parts[1], parts[2]);
}

std::vector<double> read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read points file '" + path + "'");
  std::vector<double> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        pts.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw DomainError("points file: cannot parse '" + tok + "'");
      }
    }
  }
  return pts;
}

std::vector<double> resolve_grid(const Common& c, const io::ModelSpec& spec) {
  if (!c.points.empty()) return read_points(c.points);
  if (!c.grid.empty()) return parse_grid(c.grid);
  if (spec.defaults.grid) return parse_grid(*spec.defaults.grid);
  throw DomainError("no time grid: pass --grid start:stop:step or --points FILE");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <class Fn>
void with_output(const std::string& path, bool binary, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw DomainError("cannot write '" + path + "'");
  fn(f);
  if (!f) throw NumericError("write to '" + path + "' failed");
}

void add_common(CLI::App* cmd, Common& c, bool grid) {
  cmd->add_option("spec", c.spec, "Model spec file (JSON)")->required();
  if (grid) {
    cmd->add_option("--grid", c.grid, "Uniform time grid start:stop:step (inclusive)");
    cmd->add_option("--points", c.points, "File of time points (whitespace or comma separated)");
  }
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
}

int cmd_validate(const Common& c) {
  const auto spec = io::load_model_spec(c.spec);
  const auto& m = spec.model;
  json diag = {{"valid", true}, {"spec", c.spec}, {"fingerprint", model_fingerprint(m)},
               {"period", m.partition().period()}, {"span", m.partition().span()}};
  if (m.flags().include_ls) {
    // exponential convexity spot check on a few points of the first period
    std::vector<double> pts;
    for (double x = 0.0; x <= m.partition().span() + 1e-12; x += 0.25 * m.partition().span()) pts.push_back(x);
    auto& checks = diag["psi_gram_checks"] = json::array();
    for (std::size_t i = 0; i < m.psi_list().size(); ++i) {
      const auto rep = gram_psd_check(m.psi_list()[i], pts, 1e-10);
      checks.push_back({{"index", i}, {"pass", rep.pass}, {"min_eigenvalue", rep.min_eigenvalue}});
      if (!rep.pass)
        throw SpecError("ls.psi[" + std::to_string(i) + "]", "Gram spot check failed: psi is not exponentially convex");
    }
  }
  if (m.has_pc()) diag["pc_sequence_psd"] = true;
  with_output(c.out, false, [&](std::ostream& os) { os << diag.dump(2) << "\n"; });
  return kOk;
}

int cmd_cov(const Common& c, bool repair, std::optional<double> tol, const std::string& format) {
  const auto spec = io::load_model_spec(c.spec);
  const auto grid = resolve_grid(c, spec);
  CovOptions opt;
  opt.repair = repair;
  opt.tol = tol.value_or(spec.defaults.tol_psd.value_or(kTolPsd));
  const auto cov = spec.model.cov_matrix(grid, opt);
  const bool as_json = format == "json" || (format.empty() && ends_with(c.out, ".json"));
  with_output(c.out, false, [&](std::ostream& os) {
    if (as_json) {
      auto j = io::cov_to_json(cov);
      j["pass"] = true;
      j["tol"] = opt.tol;
      os << j.dump() << "\n";
    } else {
      os << "# pass=true\n# tol=" << io::fmt(opt.tol) << "\n";
      io::write_cov_csv(os, cov);
    }
  });
  std::fprintf(stderr, "cov: %zux%zu, min eigenvalue %.6e, trace %.6e%s\n", grid.size(), grid.size(),
               cov.min_eigenvalue, cov.trace, cov.repaired ? ", repaired" : "");
  return kOk;
}

int cmd_simulate(const Common& c, std::optional<std::size_t> paths, std::optional<std::uint64_t> seed,
                 const std::string& method, const std::string& format) {
  const auto spec = io::load_model_spec(c.spec);
  const auto grid = resolve_grid(c, spec);
  const std::size_t n = paths.value_or(spec.defaults.paths.value_or(kPaths));
  const std::uint64_t s = seed.value_or(spec.defaults.seed.value_or(kSeed));
  SimulationOptions opt;
  opt.tol = spec.defaults.tol_psd.value_or(kTolPsd);
  const auto e = simulate(spec.model, grid, n, s, parse_method(method), opt);
  const bool as_csv = format == "csv" || (format.empty() && ends_with(c.out, ".csv"));
  if (!as_csv && (c.out.empty() || c.out == "-"))
    throw DomainError("binary ensemble output needs --out FILE (or --format csv)");
  with_output(c.out, !as_csv, [&](std::ostream& os) {
    if (as_csv) io::write_ensemble_csv(os, e);
    else io::write_ensemble_binary(os, e);
  });
  std::fprintf(stderr, "simulate: %zu paths x %zu points, method %s, seed %llu, fingerprint %s\n", n, grid.size(),
               to_string(e.method), static_cast<unsigned long long>(s), e.fingerprint.c_str());
  return kOk;
}

int cmd_spectral_check(const Common& c, std::size_t pairs, std::optional<std::uint64_t> seed,
                       std::optional<double> tol, std::optional<double> horizon) {
  if (pairs == 0) throw DomainError("--pairs must be >= 1");
  const auto spec = io::load_model_spec(c.spec);
  const auto& m = spec.model;
  std::optional<SpectralModel> sm;
  try {
    sm.emplace(m, DiscreteSpectralGrid{}, horizon.value_or(0.0));
  } catch (const CoverageError& e) {
    throw CoverageError(std::string(e.what()) +
                            "; widen the frequency grid (density tails need half width with tail mass < 1e-6)",
                        e.tail_mass());
  }
  const bool atomic = sm->atomic();
  const double t = tol.value_or(atomic ? spec.defaults.tol_spec_atomic.value_or(kTolSpecAtomic)
                                       : spec.defaults.tol_spec_density.value_or(kTolSpecDensity));
  std::mt19937_64 rng(seed.value_or(spec.defaults.seed.value_or(kSeed)));
  std::uniform_real_distribution<double> draw(0.0, sm->horizon());
  const auto point = [&] {
    double x = 0.0;
    while (!(x > 0.0)) x = draw(rng);
    return x;
  };
  double max_dev = 0.0, max_rel = 0.0, max_literal = 0.0;
  json rows = json::array();
  for (std::size_t i = 0; i < pairs; ++i) {
    const double a = point(), b = point();
    const double truth = m.total_cov(a, b);
    const double rec = sm->reconstruct_cov(a, b);
    const double lit = std::abs(sm->reconstruct(a, b, PhaseConvention::Unconjugated) - cplx(truth, 0.0));
    const double dev = std::abs(rec - truth);
    max_dev = std::max(max_dev, dev);
    max_rel = std::max(max_rel, dev / (1.0 + std::abs(truth)));
    max_literal = std::max(max_literal, lit);
    rows.push_back({{"t", a}, {"u", b}, {"total_cov", truth}, {"reconstructed", rec}, {"deviation", dev}});
  }
  const bool pass = max_rel <= t;
  json rep = {{"pass", pass},
              {"pairs", pairs},
              {"spectrum", atomic ? "atomic" : "density"},
              {"tol", t},
              {"max_abs_deviation", max_dev},
              {"max_scaled_deviation", max_rel},
              {"phase_convention", to_string(PhaseConvention::ConjugateSecond)},
              {"unconjugated_max_abs_deviation", max_literal},
              {"horizon", sm->horizon()},
              {"entries", rows}};
  if (sm->lift()) rep["pc_lift"] = {{"points", sm->lift()->points()}, {"residual", sm->lift()->residual}};
  with_output(c.out, false, [&](std::ostream& os) { os << rep.dump(2) << "\n"; });
  std::fprintf(stderr, "spectral-check: %s, max |reconstruct - total| / (1 + |total|) = %.3e (tol %.1e)\n",
               pass ? "pass" : "FAIL", max_rel, t);
  return pass ? kOk : kNumeric;
}

int cmd_mc_check(const Common& c, std::optional<std::size_t> paths, std::optional<std::uint64_t> seed,
                 std::optional<double> z, const std::string& method) {
  const auto spec = io::load_model_spec(c.spec);
  const auto grid = resolve_grid(c, spec);
  const std::size_t n = paths.value_or(spec.defaults.paths.value_or(kPaths));
  if (n < 2) throw DomainError("--paths must be >= 2 for an empirical covariance");
  const double zz = z.value_or(spec.defaults.z.value_or(kZ));
  SimulationOptions opt;
  opt.tol = spec.defaults.tol_psd.value_or(kTolPsd);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = mc_check(spec.model, grid, n, seed.value_or(spec.defaults.seed.value_or(kSeed)), zz,
                            parse_method(method), opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto j = io::mc_report_to_json(rep);
  j["pass"] = rep.failures == 0;
  j["seconds"] = secs;
  with_output(c.out, false, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  std::fprintf(stderr, "mc-check: %zu pairs, %zu failures (|z| > %g), %zu within 3 SE, max |z| %.3f, %.1fs\n",
               rep.pairs_checked, rep.failures, zz, rep.within_3se, rep.max_abs_z, secs);
  return rep.failures == 0 ? kOk : kNumeric;
}

int cmd_spectral_dump(const Common& c, double t, double u) {
  const auto spec = io::load_model_spec(c.spec);
  const SpectralModel sm(spec.model, DiscreteSpectralGrid{}, std::max({t, u, 2.0 * spec.model.partition().span()}));
  with_output(c.out, false, [&](std::ostream& os) { io::write_spectral_dump(os, sm, t, u); });
  return kOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::fprintf(stderr, "pcls: %s: %s\n", kind, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcls: covariance, spectral and Monte Carlo tools for PC-LS process models"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 2 usage/spec error, 3 non-PSD model, 4 unsupported method, 5 numeric failure.\n"
      "PCLS_THREADS caps worker threads.");

  Common c;
  bool repair = false;
  std::optional<double> tol, z, horizon;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::string method = "joint_factorization", format;
  std::size_t pairs = 50;
  double dump_t = 1.0, dump_u = 1.5;

  auto* validate = app.add_subcommand("validate", "Parse and check a model spec; prints JSON diagnostics");
  add_common(validate, c, false);

  auto* cov = app.add_subcommand("cov", "Covariance matrix on a grid (CSV, or JSON with --format json / .json)");
  add_common(cov, c, true);
  cov->add_flag("--repair", repair, "Clip negative eigenvalues within tolerance");
  cov->add_option("--tol", tol, "PSD tolerance relative to the trace (default 1e-8)");
  cov->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "Sample paths (binary column file, or CSV with --format csv / .csv)");
  add_common(sim, c, true);
  sim->add_option("--paths", paths, "Number of paths (default 100000)");
  sim->add_option("--seed", seed, "Master seed (default 12345)");
  sim->add_option("--method", method, "joint_factorization or component_wise")->capture_default_str();
  sim->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

  auto* spec_check = app.add_subcommand("spectral-check", "Compare spectral reconstruction with the covariance");
  add_common(spec_check, c, false);
  spec_check->add_option("--pairs", pairs, "Random (t, u) pairs")->capture_default_str();
  spec_check->add_option("--seed", seed, "Seed for the pairs (default 12345)");
  spec_check->add_option("--tol", tol, "Tolerance on |diff| / (1 + |cov|) (default 1e-8 atomic, 1e-4 density)");
  spec_check->add_option("--horizon", horizon, "Pairs drawn from (0, horizon] (default two periods)");

  auto* mc = app.add_subcommand("mc-check", "Monte Carlo check of empirical against model covariances");
  add_common(mc, c, true);
  mc->add_option("--paths", paths, "Number of paths (default 100000)");
  mc->add_option("--seed", seed, "Master seed (default 12345)");
  mc->add_option("--z", z, "Failure threshold on |z| (default 4)");
  mc->add_option("--method", method, "joint_factorization or component_wise")->capture_default_str();

  auto* dump = app.add_subcommand("spectral-dump", "F and Theta kernel masses at (t, u) as CSV");
  add_common(dump, c, false);
  dump->add_option("--t", dump_t, "First time point")->capture_default_str();
  dump->add_option("--u", dump_u, "Second time point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(c);
    if (cov->parsed()) return cmd_cov(c, repair, tol, format);
    if (sim->parsed()) return cmd_simulate(c, paths, seed, method, format);
    if (spec_check->parsed()) return cmd_spectral_check(c, pairs, seed, tol, horizon);
    if (mc->parsed()) return cmd_mc_check(c, paths, seed, z, method);
    if (dump->parsed()) return cmd_spectral_dump(c, dump_t, dump_u);
  } catch (const SpecError& e) {
    const json diag = {{"valid", false}, {"path", e.path()}, {"message", e.what()}};
    std::cout << diag.dump(2) << "\n";
    return report("spec error", e, kUsage);
  } catch (const NonPsdModel& e) {
    std::fprintf(stderr, "pcls: min eigenvalue %.6e\n", e.min_eigenvalue());
    return report("non-PSD model", e, kNonPsd);
  } catch (const UnsupportedMethod& e) {
    return report("unsupported method", e, kUnsupported);
  } catch (const DomainError& e) {
    return report("error", e, kUsage);
  } catch (const NumericError& e) {
    return report("numeric failure", e, kNumeric);
  } catch (const RangeError& e) {
    return report("numeric failure", e, kNumeric);
  } catch (const std::exception& e) {
    return report("error", e, kNumeric);
  }
  return kUsage;
}
