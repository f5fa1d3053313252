#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "tbprop/bench.hpp"
#include "tbprop/correlations.hpp"
#include "tbprop/fock.hpp"
#include "tbprop/gaussian.hpp"
#include "tbprop/io.hpp"
#include "tbprop/propagator.hpp"
#include "tbprop/sequences.hpp"
#include "tbprop/wigner.hpp"

namespace tbprop::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kVerifyFailed = 3,
  kInvalidInput = 4,
  kNumericFailure = 5,
  kResourceFailure = 6,
};

class VerifyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string subcommand;
  json arguments = json::object();
  std::optional<LatticeSpec> spec;
  std::optional<std::uint64_t> seed;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

/// "a:b" -> (a, b).
inline std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) throw ValidationError(what + " must look like a:b, got '" + text + "'");
  const auto a = parse_list(text.substr(0, colon), what), b = parse_list(text.substr(colon + 1), what);
  if (a.size() != 1 || b.size() != 1) throw ValidationError(what + " must look like a:b, got '" + text + "'");
  return {a[0], b[0]};
}

inline std::size_t as_mode_number(double v, const std::string& what) {
  if (v < 1 || v != std::floor(v)) throw ValidationError(what + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

inline json manifest(const Context& ctx, const std::vector<std::string>& outputs) {
  json m{{"format", "tbprop-manifest/1"},
         {"subcommand", ctx.subcommand},
         {"arguments", ctx.arguments},
         {"version", kVersion},
         {"outputs", outputs}};
  m["spec_hash"] = ctx.spec ? json(spec_hash(*ctx.spec)) : json(nullptr);
  m["spec"] = ctx.spec ? to_json(*ctx.spec) : json(nullptr);
  m["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
  return m;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot write '" + path + "'");
  f << content;
  if (!f) throw ResourceError("failed writing '" + path + "'");
}

/// Writes content to path (plus a manifest sidecar) or to stdout when path is empty.
inline void emit(Context& ctx, const std::string& path, const std::string& content, const json& extra = json::object()) {
  if (path.empty()) {
    ctx.out << content;
    return;
  }
  write_file(path, content);
  json m = manifest(ctx, {path});
  if (!extra.empty()) m["results"] = extra;
  write_file(path + ".manifest.json", m.dump(2) + "\n");
}

inline void verify_report(Context& ctx, const std::string& what, double deviation, double tolerance) {
  const bool ok = deviation <= tolerance;
  ctx.err << "verify " << what << ": max deviation " << num(deviation) << " (tolerance " << tolerance << ") "
          << (ok ? "ok" : "FAILED") << "\n";
  if (!ok) throw VerifyFailure(what + " deviates from its oracle by " + num(deviation));
}

inline Method parse_method(const std::string& m) {
  if (m == "auto") return Method::Auto;
  if (m == "open") return Method::Open;
  if (m == "closed-trig") return Method::ClosedTrig;
  if (m == "closed-bessel") return Method::ClosedBessel;
  if (m == "oracle") return Method::Oracle;
  throw ValidationError("unknown method '" + m + "'");
}

inline SqueezeProfile parse_profile(const std::string& text, const LatticeSpec& spec) {
  auto xi = parse_list(text, "--xi");
  if (xi.size() == 1 && spec.n_modes > 1) xi.assign(spec.n_modes, xi[0]);
  if (xi.size() != spec.n_modes) {
    throw ValidationError("--xi needs " + std::to_string(spec.n_modes) + " values (or one to broadcast)");
  }
  return SqueezeProfile::real(xi);
}

inline double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------- propagate

struct PropagateArgs {
  std::string spec, method = "auto", out;
  double t = 0.0, tail_tol = 1e-12, verify_tol = 1e-8;
  std::size_t max_terms = 256;
  bool verify = false;
};

inline int cmd_propagate(Context& ctx, const PropagateArgs& a) {
  ctx.spec = load_spec(a.spec);
  ctx.arguments = {{"spec", a.spec}, {"t", a.t}, {"method", a.method}, {"tail_tol", a.tail_tol},
                   {"max_terms", a.max_terms}, {"verify", a.verify}};
  const auto m = propagate(*ctx.spec, a.t, parse_method(a.method), BesselSeriesConfig{a.tail_tol, a.max_terms});
  json j = to_json(m);
  j["unitarity_residual"] = m.unitarity_residual();
  if (a.verify) {
    const auto ref = exp_oracle(build_coupling_matrix(*ctx.spec), a.t);
    verify_report(ctx, "transfer matrix", (m.entries() - ref.entries()).cwiseAbs().maxCoeff(), a.verify_tol);
  }
  j["manifest"] = manifest(ctx, a.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.out});
  emit(ctx, a.out, j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- squeeze

struct SqueezeArgs {
  std::string spec, xi, out;
  double t_max = 1.0, dt = 0.01, verify_tol = 1e-8;
  bool verify = false;
};

inline int cmd_squeeze(Context& ctx, const SqueezeArgs& a) {
  ctx.spec = load_spec(a.spec);
  ctx.arguments = {{"spec", a.spec}, {"xi", a.xi}, {"t_max", a.t_max}, {"dt", a.dt}, {"verify", a.verify}};
  const auto& spec = *ctx.spec;
  const auto prof = parse_profile(a.xi, spec);
  detail::require(a.dt > 0 && a.t_max >= 0, "--dt must be positive and --t-max nonnegative");
  const auto steps = static_cast<std::size_t>(std::llround(a.t_max / a.dt));
  detail::require(steps < 10'000'000, "--t-max / --dt gives too many rows");
  const std::size_t n = spec.n_modes;
  const auto v0 = initial_covariance(prof);

  std::vector<std::string> rows(steps + 1);
  std::vector<double> deviation(steps + 1, 0.0);
  parallel_for(steps + 1, [&](std::size_t k) {
    const double t = std::min(a.t_max, static_cast<double>(k) * a.dt);
    const auto v = evolve_covariance(v0, propagate(spec, t));
    std::string row = num(t);
    for (std::size_t j = 1; j <= n; ++j) row += "," + num(single_mode_squeezing(v, Mode(j)));
    for (std::size_t j = 1; j <= n; ++j) row += "," + num(v.mean_photon_number(Mode(j)));
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) row += "," + num(two_mode_squeezing(v, Mode(i), Mode(j)));
    }
    rows[k] = row + "\n";
    if (a.verify) {
      const auto ref = evolve_covariance(v0, exp_oracle(build_coupling_matrix(spec), t));
      deviation[k] = max_abs(v.entries() - ref.entries());
    }
  });

  std::string csv = "# format=tbprop-squeeze/1\nt";
  for (std::size_t j = 1; j <= n; ++j) csv += ",var_" + std::to_string(j);
  for (std::size_t j = 1; j <= n; ++j) csv += ",n_" + std::to_string(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) csv += ",var_" + std::to_string(i) + "_" + std::to_string(j);
  }
  csv += "\n";
  for (const auto& r : rows) csv += r;

  if (a.verify) {
    verify_report(ctx, "covariance trajectory", *std::max_element(deviation.begin(), deviation.end()), a.verify_tol);
    const bool small = n <= 3 && std::all_of(prof.xi.begin(), prof.xi.end(), [](Complex z) { return std::abs(z) <= 0.3; });
    if (small) {
      const auto st = fock_evolve(spec, prof, 20, a.t_max);
      const auto v = evolve_covariance(v0, propagate(spec, a.t_max));
      const auto photons = fock_mean_photon_numbers(st);
      double worst = 0.0;
      for (std::size_t j = 1; j <= n; ++j) worst = std::max(worst, std::abs(photons[j - 1] - v.mean_photon_number(Mode(j))));
      verify_report(ctx, "photon numbers vs truncated Fock", worst, 1e-6);
    }
  }
  emit(ctx, a.out, csv);
  return kOk;
}

// ---------------------------------------------------------------- cancel

struct CancelArgs {
  std::string spec, anchor = "1:0.1", t_range = "0:1", out;
  std::size_t grid = 2001;
  bool verify = false;
};

inline int cmd_cancel(Context& ctx, const CancelArgs& a) {
  ctx.spec = load_spec(a.spec);
  ctx.arguments = {{"spec", a.spec}, {"anchor", a.anchor}, {"t_range", a.t_range}, {"grid", a.grid}, {"verify", a.verify}};
  const auto& spec = *ctx.spec;
  const auto [am, av] = parse_pair(a.anchor, "--anchor");
  const auto [lo, hi] = parse_pair(a.t_range, "--t-range");
  CancellationOptions opts;
  opts.grid_points = a.grid;
  const auto res = solve_cancellation(spec, {lo, hi}, {Mode(as_mode_number(am, "anchor mode")), av}, opts);

  json j{{"format", "tbprop-cancel/1"}, {"found", res.found}, {"roots", res.roots}};
  if (res.found) {
    j["t_star"] = res.t_star;
    j["xi"] = res.profile.real_parts();
    j["residual_max"] = res.residual_max;
    const auto v = evolve_covariance(initial_covariance(res.profile), propagate(spec, res.t_star));
    std::vector<double> single;
    for (std::size_t m = 1; m <= spec.n_modes; ++m) single.push_back(single_mode_squeezing(v, Mode(m)));
    j["single_mode_min_variance"] = single;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= spec.n_modes; ++i) {
      for (std::size_t k = i + 1; k <= spec.n_modes; ++k) best = std::min(best, two_mode_squeezing(v, Mode(i), Mode(k)));
    }
    j["two_mode_min_variance"] = std::isfinite(best) ? json(best) : json(nullptr);
    if (a.verify) {
      const auto ref = exp_oracle(build_coupling_matrix(spec), res.t_star);
      verify_report(ctx, "cancellation residual", cancellation_residual(res.profile, ref).cwiseAbs().maxCoeff(),
                    opts.residual_tolerance);
    }
  } else if (a.verify) {
    ctx.err << "verify cancellation: no root in range, nothing to check\n";
  }
  j["manifest"] = manifest(ctx, a.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.out});
  if (!a.out.empty()) {
    ctx.out << (res.found ? "t* = " + num(res.t_star) : std::string("no cancellation time in range")) << "\n";
  }
  emit(ctx, a.out, j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- wigner

struct WignerArgs {
  std::string spec, xi, axes = "q1,p1", range = "-5:5", uniform_phases, out;
  std::size_t add_mode = 0, points = 201;
  bool add_uniform = false, subtract = false, gaussian_only = false, verify = false;
  double t = 0.0, verify_tol = 1e-9;
};

inline int cmd_wigner(Context& ctx, const WignerArgs& a) {
  ctx.spec = load_spec(a.spec);
  ctx.arguments = {{"spec", a.spec}, {"xi", a.xi}, {"add_mode", a.add_mode}, {"add_uniform", a.add_uniform},
                   {"subtract", a.subtract}, {"uniform_phases", a.uniform_phases}, {"t", a.t}, {"axes", a.axes},
                   {"range", a.range}, {"points", a.points}, {"gaussian_only", a.gaussian_only}, {"verify", a.verify}};
  const auto& spec = *ctx.spec;
  const auto prof = parse_profile(a.xi, spec);
  detail::require((a.add_mode > 0) != a.add_uniform, "give exactly one of --add-mode or --add-uniform");
  const auto sign = a.subtract ? ExcitationSign::Subtracted : ExcitationSign::Added;
  std::vector<double> phases;
  if (!a.uniform_phases.empty()) phases = parse_list(a.uniform_phases, "--uniform-phases");
  const auto g = a.add_uniform ? ExcitationVector::uniform(spec.n_modes, sign, phases)
                               : ExcitationVector::single_mode(Mode(a.add_mode), spec.n_modes, sign);
  const auto comma = a.axes.find(',');
  detail::require(comma != std::string::npos, "--axes must look like q3,p3");
  const auto ax = QuadratureAxis::parse(a.axes.substr(0, comma)), bx = QuadratureAxis::parse(a.axes.substr(comma + 1));
  const auto [lo, hi] = parse_pair(a.range, "--range");
  detail::require(hi > lo && a.points >= 2, "--range must be increasing and --points at least 2");
  const GridAxisSpec grid{lo, hi, a.points};

  const auto v0 = initial_covariance(prof);
  const auto kernel = build_kernel(v0, g, propagate(spec, a.t));
  const auto w = marginal_2d(kernel, ax, bx, grid, grid, !a.gaussian_only);

  if (a.verify) {
    const auto ref_kernel = build_kernel(v0, g, exp_oracle(build_coupling_matrix(spec), a.t));
    const auto ref = marginal_2d(ref_kernel, ax, bx, grid, grid, !a.gaussian_only);
    verify_report(ctx, "wigner grid", max_abs(w.values - ref.values), a.verify_tol);
    if (spec.n_modes == 1 && !a.gaussian_only) {
      auto psi = prepare_fock_state(prof, FockBasis(1, 30));
      psi = a.subtract ? apply_annihilation(psi, g.coefficients()) : apply_creation(psi, g.coefficients());
      psi = fock_evolve_state(spec, psi, a.t);
      double worst = 0.0;
      const std::size_t stride = std::max<std::size_t>(1, a.points / 10);
      for (std::size_t i = 0; i < a.points; i += stride) {
        for (std::size_t k = 0; k < a.points; k += stride) {
          RVector y(2);
          y(static_cast<Eigen::Index>(ax.index(1))) = w.a_values[i];
          y(static_cast<Eigen::Index>(bx.index(1))) = w.b_values[k];
          worst = std::max(worst, std::abs(fock_wigner(psi, y) -
                                           w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
        }
      }
      verify_report(ctx, "wigner vs truncated Fock", worst, 1e-4);
    }
  }

  std::string csv = "# format=tbprop-wigner/1 sign=" + std::string(to_string(sign)) + "\n" + ax.label() + "," +
                    bx.label() + ",W\n";
  for (std::size_t i = 0; i < w.a_values.size(); ++i) {
    for (std::size_t k = 0; k < w.b_values.size(); ++k) {
      csv += num(w.a_values[i]) + "," + num(w.b_values[k]) + "," +
             num(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) + "\n";
    }
  }
  emit(ctx, a.out, csv, {{"min", w.values.minCoeff()}, {"max", w.values.maxCoeff()}});
  return kOk;
}

// ---------------------------------------------------------------- corr

struct CorrArgs {
  std::string spec, initial, disorder = "single", out;
  double t = 0.0, epsilon = 0.0;
  std::size_t realizations = 100;
  std::uint64_t seed = 42;
  bool verify = false;
};

inline TwoPhotonInitial parse_initial(const std::string& text, std::size_t n_modes) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos || (kind != "prod" && kind != "sup")) {
    throw ValidationError("--initial must look like prod:k0, sup:k0 or sup:k,l");
  }
  const auto modes = parse_list(text.substr(colon + 1), "--initial");
  detail::require(modes.size() == 1 || modes.size() == 2, "--initial takes one or two modes");
  const Mode k(as_mode_number(modes[0], "--initial mode"));
  const Mode l = modes.size() == 2 ? Mode(as_mode_number(modes[1], "--initial mode")) : Mode(k.number() + 1);
  check_mode(k, n_modes, "--initial");
  check_mode(l, n_modes, "--initial");
  detail::require(k != l, "--initial needs two distinct modes");
  return kind == "prod" ? TwoPhotonInitial::product(k, l) : TwoPhotonInitial::superposition(k, l);
}

inline int cmd_corr(Context& ctx, const CorrArgs& a) {
  ctx.spec = load_spec(a.spec);
  ctx.seed = a.seed;
  ctx.arguments = {{"spec", a.spec}, {"t", a.t}, {"initial", a.initial}, {"epsilon", a.epsilon},
                   {"realizations", a.realizations}, {"seed", a.seed}, {"disorder", a.disorder}, {"verify", a.verify}};
  const auto& spec = *ctx.spec;
  const auto init = parse_initial(a.initial, spec.n_modes);
  detail::require(a.disorder == "single" || a.disorder == "all", "--disorder must be single or all");
  const Mode lo(std::min(init.k.number(), init.l.number()));
  const bool adjacent = std::max(init.k.number(), init.l.number()) == lo.number() + 1;

  CorrelationMatrix gamma;
  std::optional<RMatrix> se;
  std::optional<RMatrix> analytic;
  const auto exact = CorrelationMatrix{detail::gamma_from_transfer(propagate(spec, a.t).entries(), init), a.t};
  if (a.epsilon == 0.0) {
    gamma = exact;
  } else {
    DisorderTarget target = AllLinks{};
    if (a.disorder == "single") target = SingleLink{lo};
    auto ens = gamma_disorder_ensemble(spec, a.t, init, {a.epsilon, a.realizations, a.seed}, target);
    gamma = ens.mean;
    se = ens.standard_error;
    if (init.kind == TwoPhotonInitial::Kind::Superposition && adjacent && spec.topology == Topology::Open) {
      analytic = gamma_disorder_analytic(spec, a.t, lo, a.epsilon).gamma;
    }
  }

  if (a.verify) {
    const auto oracle = two_excitation_evolve(spec, init, a.t);
    verify_report(ctx, "gamma at the nominal phases", max_abs(exact.gamma - oracle.gamma), 1e-10);
    if (analytic && se) {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < gamma.gamma.rows(); ++i) {
        for (Eigen::Index j = 0; j < gamma.gamma.cols(); ++j) {
          const double d = std::abs(gamma.gamma(i, j) - (*analytic)(i, j));
          worst = std::max(worst, d / std::max((*se)(i, j), 1e-12));
        }
      }
      verify_report(ctx, "ensemble vs analytic average (standard errors)", worst, 4.0);
    }
  }

  const auto cs = cauchy_schwarz_max(gamma);
  std::string csv = "# format=tbprop-gamma/1\n";
  csv += "# cauchy_schwarz_max=" + (cs ? num(*cs) : std::string("undefined")) + "\n";
  for (Eigen::Index i = 0; i < gamma.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < gamma.gamma.cols(); ++j) csv += (j ? "," : "") + num(gamma.gamma(i, j));
    csv += "\n";
  }
  json results{{"cauchy_schwarz_max", cs ? json(*cs) : json(nullptr)},
               {"method", a.epsilon == 0.0 ? "exact" : "ensemble"}};
  auto rows = [](const RMatrix& m) {
    json r = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      r.push_back(row);
    }
    return r;
  };
  if (se) results["standard_error"] = rows(*se);
  if (analytic) results["analytic_average"] = rows(*analytic);
  emit(ctx, a.out, csv, results);
  return kOk;
}

// ---------------------------------------------------------------- paths

struct PathsArgs {
  std::string topology = "open", out;
  std::size_t n = 0, i = 1, j = 1, max_m = 12;
  bool verify = false;
};

inline int cmd_paths(Context& ctx, const PathsArgs& a) {
  ctx.arguments = {{"topology", a.topology}, {"N", a.n}, {"i", a.i}, {"j", a.j}, {"max_m", a.max_m}, {"verify", a.verify}};
  detail::require(a.topology == "open" || a.topology == "closed", "--topology must be open or closed");
  const auto topo = a.topology == "open" ? Topology::Open : Topology::Closed;
  std::string csv = "# format=tbprop-paths/1\nm,count\n";
  for (std::size_t m = 0; m <= a.max_m; ++m) {
    const PathCountQuery q{Mode(a.i), Mode(a.j), m, topo, a.n};
    const BigInt c = path_count(q);
    if (a.verify) {
      const BigInt ref = path_count_oracle(q);
      if (c != ref) throw VerifyFailure("path count differs from walk enumeration at m=" + std::to_string(m));
    }
    csv += std::to_string(m) + "," + c.str() + "\n";
  }
  if (a.verify) ctx.err << "verify path counts: exact match ok\n";
  emit(ctx, a.out, csv);
  return kOk;
}

// ---------------------------------------------------------------- sequences

struct SequencesArgs {
  std::size_t n = 2, count = 20;
  std::string format = "csv", out;
  bool verify = false;
};

inline int cmd_sequences(Context& ctx, const SequencesArgs& a) {
  ctx.arguments = {{"N", a.n}, {"count", a.count}, {"format", a.format}, {"verify", a.verify}};
  detail::require(a.format == "csv" || a.format == "json", "--format must be csv or json");
  detail::require(a.count >= 1, "--count must be positive");
  const auto seq = generating_sequence(a.n, a.count);
  if (a.verify) {
    const std::size_t checked = std::min<std::size_t>(a.count, detail::kMaxExactOrder / 2 + 1);
    const auto c = bch_coefficients(LatticeSpec::open(a.n), Mode(1), Mode(1), 2 * (checked - 1));
    for (std::size_t k = 0; k < checked; ++k) {
      if (c[2 * k] != seq.term(k)) throw VerifyFailure("sequence term " + std::to_string(k) + " differs from BCH series");
    }
    ctx.err << "verify sequence: first " << checked << " terms match the BCH series ok\n";
  }
  std::string content;
  if (a.format == "csv") {
    content = "# format=tbprop-sequence/1\nj,term\n";
    for (std::size_t k = 0; k < a.count; ++k) content += std::to_string(k) + "," + seq.term(k).str() + "\n";
  } else {
    json j{{"format", "tbprop-sequence/1"}, {"N", a.n}, {"offset", seq.offset()}};
    std::vector<std::string> q, terms;
    for (const auto& v : seq.recursion_coeffs()) q.push_back(v.str());
    for (std::size_t k = 0; k < a.count; ++k) terms.push_back(seq.term(k).str());
    j["recursion"] = q;
    j["terms"] = terms;
    content = j.dump(2) + "\n";
  }
  emit(ctx, a.out, content);
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string n = "2,3,4", times = "0.5,1", out;
  std::size_t cutoff = 20, reps = 7, warmup = 1, max_dim = 4'000'000;
  double xi = 0.2;
};

inline int cmd_bench(Context& ctx, const BenchArgs& a) {
  ctx.arguments = {{"n", a.n}, {"cutoff", a.cutoff}, {"reps", a.reps}, {"warmup", a.warmup}, {"times", a.times},
                   {"xi", a.xi}, {"max_dim", a.max_dim}};
  std::vector<BenchCase> cases;
  for (double n : parse_list(a.n, "--n")) {
    BenchCase c;
    c.n_modes = as_mode_number(n, "--n");
    c.cutoff = a.cutoff;
    c.repetitions = a.reps;
    c.warmup = a.warmup;
    c.times = parse_list(a.times, "--times");
    c.xi.assign(c.n_modes, a.xi);
    cases.push_back(std::move(c));
  }
  FockOptions opts;
  opts.max_dimension = a.max_dim;
  const auto report = run_benchmark(cases, opts);
  for (const auto& c : report.cases) {
    ctx.err << "N=" << c.config.n_modes << " dim=" << (c.dimension ? std::to_string(*c.dimension) : "overflow")
            << " analytic=" << num(c.analytic.median_s) << "s fock="
            << (c.fock ? num(c.fock->median_s) + "s" : c.fock_status)
            << (c.speedup ? " speedup=" + num(*c.speedup) : std::string()) << "\n";
  }
  json j = to_json(report);
  j["manifest"] = manifest(ctx, a.out.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.out});
  emit(ctx, a.out, j.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------- dispatch

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Validation:
    case ErrorKind::Unsupported:
      return kInvalidInput;
    case ErrorKind::Numeric:
      return kNumericFailure;
    case ErrorKind::Resource:
      return kResourceFailure;
  }
  return kFailure;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Analytic evolution of tight-binding lattices and its quantum-optics applications", "tbprop"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  PropagateArgs pa;
  auto* propagate_cmd = app.add_subcommand("propagate", "Transfer matrix A = exp(-i t C)");
  propagate_cmd->add_option("--spec", pa.spec, "Lattice spec JSON")->required();
  propagate_cmd->add_option("--t", pa.t, "Evolution time")->required();
  propagate_cmd->add_option("--method", pa.method, "auto|open|closed-trig|closed-bessel|oracle")->capture_default_str();
  propagate_cmd->add_option("--tail-tol", pa.tail_tol, "Bessel series tail tolerance")->capture_default_str();
  propagate_cmd->add_option("--max-terms", pa.max_terms, "Bessel series term budget")->capture_default_str();
  propagate_cmd->add_option("--out", pa.out, "Output JSON (stdout if omitted)");
  propagate_cmd->add_flag("--verify", pa.verify, "Compare with the dense exponential");
  propagate_cmd->add_option("--verify-tol", pa.verify_tol)->capture_default_str();

  SqueezeArgs sa;
  auto* squeeze_cmd = app.add_subcommand("squeeze", "Single- and two-mode squeezing along t");
  squeeze_cmd->add_option("--spec", sa.spec)->required();
  squeeze_cmd->add_option("--xi", sa.xi, "Comma-separated real squeezing per mode")->required();
  squeeze_cmd->add_option("--t-max", sa.t_max)->capture_default_str();
  squeeze_cmd->add_option("--dt", sa.dt)->capture_default_str();
  squeeze_cmd->add_option("--out", sa.out);
  squeeze_cmd->add_flag("--verify", sa.verify);
  squeeze_cmd->add_option("--verify-tol", sa.verify_tol)->capture_default_str();

  CancelArgs ca;
  auto* cancel_cmd = app.add_subcommand("cancel", "Find t and a mirror-symmetric profile with no single-mode squeezing");
  cancel_cmd->add_option("--spec", ca.spec)->required();
  cancel_cmd->add_option("--anchor", ca.anchor, "mode:value fixing the profile scale")->capture_default_str();
  cancel_cmd->add_option("--t-range", ca.t_range, "lo:hi")->capture_default_str();
  cancel_cmd->add_option("--grid", ca.grid, "Scan points")->capture_default_str();
  cancel_cmd->add_option("--out", ca.out);
  cancel_cmd->add_flag("--verify", ca.verify);

  WignerArgs wa;
  auto* wigner_cmd = app.add_subcommand("wigner", "2-D marginal of a photon-added/subtracted squeezed state");
  wigner_cmd->add_option("--spec", wa.spec)->required();
  wigner_cmd->add_option("--xi", wa.xi)->required();
  auto* add_mode = wigner_cmd->add_option("--add-mode", wa.add_mode, "Excite a single mode");
  auto* add_uniform = wigner_cmd->add_flag("--add-uniform", wa.add_uniform, "Excite all modes equally");
  add_mode->excludes(add_uniform);
  wigner_cmd->add_option("--uniform-phases", wa.uniform_phases, "Per-mode phases for --add-uniform");
  wigner_cmd->add_flag("--subtract", wa.subtract, "Subtract instead of add");
  wigner_cmd->add_option("--t", wa.t)->capture_default_str();
  wigner_cmd->add_option("--axes", wa.axes, "e.g. q3,p3")->capture_default_str();
  wigner_cmd->add_option("--range", wa.range, "lo:hi for both axes")->capture_default_str();
  wigner_cmd->add_option("--points", wa.points)->capture_default_str();
  wigner_cmd->add_flag("--gaussian-only", wa.gaussian_only, "Drop the excitation term");
  wigner_cmd->add_option("--out", wa.out);
  wigner_cmd->add_flag("--verify", wa.verify);
  wigner_cmd->add_option("--verify-tol", wa.verify_tol)->capture_default_str();

  CorrArgs ra;
  auto* corr_cmd = app.add_subcommand("corr", "Two-photon correlations, optionally with phase disorder");
  corr_cmd->add_option("--spec", ra.spec)->required();
  corr_cmd->add_option("--t", ra.t)->required();
  corr_cmd->add_option("--initial", ra.initial, "prod:k0 | sup:k0 | sup:k,l")->required();
  corr_cmd->add_option("--epsilon", ra.epsilon, "Phase standard deviation")->capture_default_str();
  corr_cmd->add_option("--realizations", ra.realizations)->capture_default_str();
  corr_cmd->add_option("--seed", ra.seed)->capture_default_str();
  corr_cmd->add_option("--disorder", ra.disorder, "single|all")->capture_default_str();
  corr_cmd->add_option("--out", ra.out);
  corr_cmd->add_flag("--verify", ra.verify);

  PathsArgs ta;
  auto* paths_cmd = app.add_subcommand("paths", "Walk counts between two sites");
  paths_cmd->add_option("--topology", ta.topology)->capture_default_str();
  paths_cmd->add_option("--N", ta.n)->required();
  paths_cmd->add_option("--i", ta.i)->capture_default_str();
  paths_cmd->add_option("--j", ta.j)->capture_default_str();
  paths_cmd->add_option("--max-m", ta.max_m)->capture_default_str();
  paths_cmd->add_option("--out", ta.out);
  paths_cmd->add_flag("--verify", ta.verify);

  SequencesArgs qa;
  auto* seq_cmd = app.add_subcommand("sequences", "Integer sequence behind the open chain's diagonal entries");
  seq_cmd->add_option("--N", qa.n)->required();
  seq_cmd->add_option("--count", qa.count)->capture_default_str();
  seq_cmd->add_option("--format", qa.format, "csv|json")->capture_default_str();
  seq_cmd->add_option("--out", qa.out);
  seq_cmd->add_flag("--verify", qa.verify);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Time the covariance path against the truncated-Fock solver");
  bench_cmd->add_option("--n", ba.n, "Comma-separated chain lengths")->capture_default_str();
  bench_cmd->add_option("--cutoff", ba.cutoff)->capture_default_str();
  bench_cmd->add_option("--reps", ba.reps)->capture_default_str();
  bench_cmd->add_option("--warmup", ba.warmup)->capture_default_str();
  bench_cmd->add_option("--times", ba.times)->capture_default_str();
  bench_cmd->add_option("--xi", ba.xi, "Squeezing on every mode")->capture_default_str();
  bench_cmd->add_option("--max-dim", ba.max_dim, "Fock dimension budget")->capture_default_str();
  bench_cmd->add_option("--out", ba.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Context ctx{out, err, app.get_subcommands().front()->get_name(), json::object(), std::nullopt, std::nullopt};
  try {
    if (propagate_cmd->parsed()) return cmd_propagate(ctx, pa);
    if (squeeze_cmd->parsed()) return cmd_squeeze(ctx, sa);
    if (cancel_cmd->parsed()) return cmd_cancel(ctx, ca);
    if (wigner_cmd->parsed()) return cmd_wigner(ctx, wa);
    if (corr_cmd->parsed()) return cmd_corr(ctx, ra);
    if (paths_cmd->parsed()) return cmd_paths(ctx, ta);
    if (seq_cmd->parsed()) return cmd_sequences(ctx, qa);
    if (bench_cmd->parsed()) return cmd_bench(ctx, ba);
  } catch (const VerifyFailure& e) {
    err << "tbprop: verification failed: " << e.what() << "\n";
    return kVerifyFailed;
  } catch (const Error& e) {
    err << "tbprop: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "tbprop: unexpected failure: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace tbprop::cli
