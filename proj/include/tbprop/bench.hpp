#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbprop/fock.hpp"
#include "tbprop/gaussian.hpp"
#include "tbprop/parallel.hpp"

namespace tbprop {

struct BenchCase {
  std::size_t n_modes = 2;
  std::size_t cutoff = 20;
  /// Real squeezing per mode; empty means 0.2 everywhere.
  std::vector<double> xi;
  std::vector<double> times{0.5, 1.0};
  std::size_t repetitions = 7;
  std::size_t warmup = 1;
  double coupling = 1.0;

  void validate() const {
    detail::require(n_modes >= 1, "bench case needs at least one mode");
    detail::require(repetitions >= 5, "bench case needs at least 5 repetitions");
    detail::require(!times.empty(), "bench case needs at least one time");
    detail::require(xi.empty() || xi.size() == n_modes, "squeeze profile length must equal mode count");
  }

  std::vector<double> profile() const { return xi.empty() ? std::vector<double>(n_modes, 0.2) : xi; }
};

struct TimingStats {
  double median_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  std::size_t samples = 0;
};

struct BenchCaseReport {
  BenchCase config;
  /// Truncated Fock dimension (cutoff + 1)^N; absent when it overflows.
  std::optional<std::size_t> dimension;
  TimingStats analytic;
  std::optional<TimingStats> fock;
  std::string fock_status = "ok";
  /// Largest photon-number disagreement between the two paths before timing.
  std::optional<double> agreement;
  std::optional<double> speedup;
};

struct BenchReport {
  std::vector<BenchCaseReport> cases;
  std::string compiler;
  std::size_t hardware_threads = 0;
  std::string timestamp_utc;
};

/// Per-mode photon numbers followed by per-mode minimum variances.
struct BenchObservables {
  std::vector<double> photons;
  std::vector<double> min_variance;
};

namespace detail {

template <class F>
TimingStats time_it(F&& work, std::size_t warmup, std::size_t reps) {
  using clock = std::chrono::steady_clock;
  for (std::size_t w = 0; w < warmup; ++w) work();
  // Batch fast calls so one sample spans at least a millisecond.
  std::size_t batch = 1;
  for (;;) {
    const auto start = clock::now();
    for (std::size_t b = 0; b < batch; ++b) work();
    const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
    if (elapsed >= 1e-3 || batch >= (1u << 20)) break;
    batch *= 4;
  }
  std::vector<double> samples;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = clock::now();
    for (std::size_t b = 0; b < batch; ++b) work();
    samples.push_back(std::chrono::duration<double>(clock::now() - start).count() / static_cast<double>(batch));
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return {median, samples.front(), samples.back(), n};
}

inline std::vector<BenchObservables> analytic_path(const LatticeSpec& spec, const SqueezeProfile& prof,
                                                   const std::vector<double>& times) {
  std::vector<BenchObservables> out;
  const auto v0 = initial_covariance(prof);
  for (double t : times) {
    const auto v = evolve_covariance(v0, open_transfer(spec, t));
    BenchObservables obs;
    for (std::size_t j = 1; j <= spec.n_modes; ++j) {
      obs.photons.push_back(v.mean_photon_number(Mode(j)));
      obs.min_variance.push_back(single_mode_squeezing(v, Mode(j)));
    }
    out.push_back(std::move(obs));
  }
  return out;
}

inline std::vector<BenchObservables> fock_path(const LatticeSpec& spec, const SqueezeProfile& prof,
                                               const std::vector<double>& times, std::size_t cutoff,
                                               const FockOptions& opts) {
  std::vector<BenchObservables> out;
  for (double t : times) {
    const auto st = fock_evolve(spec, prof, cutoff, t, opts);
    BenchObservables obs;
    obs.photons = fock_mean_photon_numbers(st);
    for (std::size_t j = 1; j <= spec.n_modes; ++j) obs.min_variance.push_back(fock_single_mode_squeezing(st, Mode(j)));
    out.push_back(std::move(obs));
  }
  return out;
}

inline std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Times the covariance path against the truncated-Fock solver on the same observables.
/// Refuses to start while other library work is running in the process, and checks that
/// both paths agree on photon numbers to 1e-6 before any timing.
inline BenchCaseReport run_bench_case(const BenchCase& c, const FockOptions& opts = {}) {
  c.validate();
  if (detail::activity_counter().load() > 0) {
    throw ResourceError("benchmark refuses to run while other library work shares the process");
  }
  detail::ActivityScope scope;
  const auto spec = LatticeSpec::open(c.n_modes, c.coupling);
  const auto prof = SqueezeProfile::real(c.profile());

  BenchCaseReport rep;
  rep.config = c;
  try {
    rep.dimension = FockBasis(c.n_modes, c.cutoff).dimension();
  } catch (const ResourceError&) {
  }

  const auto exact = detail::analytic_path(spec, prof, c.times);
  rep.analytic = detail::time_it([&] { detail::analytic_path(spec, prof, c.times); }, c.warmup, c.repetitions);

  if (!rep.dimension || *rep.dimension > opts.max_dimension) {
    rep.fock_status = "infeasible";
    return rep;
  }
  const auto brute = detail::fock_path(spec, prof, c.times, c.cutoff, opts);
  double worst = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    for (std::size_t j = 0; j < c.n_modes; ++j) {
      worst = std::max(worst, std::abs(exact[k].photons[j] - brute[k].photons[j]));
    }
  }
  rep.agreement = worst;
  if (!(worst <= 1e-6)) {
    throw NumericError("analytic and Fock paths disagree on photon numbers by " + std::to_string(worst) +
                       "; refusing to time wrong answers");
  }
  rep.fock = detail::time_it([&] { detail::fock_path(spec, prof, c.times, c.cutoff, opts); }, c.warmup, c.repetitions);
  rep.speedup = rep.fock->median_s / rep.analytic.median_s;
  return rep;
}

inline BenchReport run_benchmark(const std::vector<BenchCase>& cases, const FockOptions& opts = {}) {
  BenchReport report;
  report.compiler = __VERSION__;
  report.hardware_threads = std::thread::hardware_concurrency();
  report.timestamp_utc = detail::utc_now();
  for (const auto& c : cases) report.cases.push_back(run_bench_case(c, opts));
  return report;
}

/// Median analytic-path seconds for each chain length, one time point per call.
inline std::vector<std::pair<double, double>> analytic_scaling(const std::vector<std::size_t>& sizes,
                                                               std::size_t reps = 7) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : sizes) {
    const auto spec = LatticeSpec::open(n);
    const auto prof = SqueezeProfile::real(std::vector<double>(n, 0.2));
    const std::vector<double> times{0.7};
    const auto stats = detail::time_it([&] { detail::analytic_path(spec, prof, times); }, 1, reps);
    pts.emplace_back(static_cast<double>(n), stats.median_s);
  }
  return pts;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_exponent(const std::vector<std::pair<double, double>>& pts) {
  detail::require(pts.size() >= 2, "need at least two points to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    detail::require(x > 0 && y > 0, "fit needs positive data");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline nlohmann::json to_json(const TimingStats& s) {
  return {{"median_s", s.median_s}, {"min_s", s.min_s}, {"max_s", s.max_s}, {"samples", s.samples}};
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases) {
    nlohmann::json j{{"n_modes", c.config.n_modes},
                     {"cutoff", c.config.cutoff},
                     {"xi", c.config.profile()},
                     {"times", c.config.times},
                     {"repetitions", c.config.repetitions},
                     {"warmup", c.config.warmup},
                     {"analytic", to_json(c.analytic)},
                     {"fock_status", c.fock_status}};
    j["dimension"] = c.dimension ? nlohmann::json(*c.dimension) : nlohmann::json(nullptr);
    j["fock"] = c.fock ? to_json(*c.fock) : nlohmann::json(nullptr);
    j["agreement"] = c.agreement ? nlohmann::json(*c.agreement) : nlohmann::json(nullptr);
    j["speedup"] = c.speedup ? nlohmann::json(*c.speedup) : nlohmann::json(nullptr);
    cases.push_back(std::move(j));
  }
  return {{"schema", "tbprop-bench/1"},
          {"machine", {{"compiler", r.compiler}, {"hardware_threads", r.hardware_threads}}},
          {"timestamp_utc", r.timestamp_utc},
          {"observables", "per-mode photon number and minimum single-mode variance at each time"},
          {"cases", cases}};
}

}  // namespace tbprop
