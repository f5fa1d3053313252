#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tbprop/propagator.hpp"

namespace tbprop {

inline nlohmann::json to_json(const LatticeSpec& spec) {
  return {{"n_modes", spec.n_modes},
          {"topology", to_string(spec.topology)},
          {"amplitude", spec.amplitude},
          {"phases", spec.phases}};
}

/// Accepts {"n_modes", "topology", "amplitude", "phases"}; amplitude defaults to 1 and phases to zeros.
inline LatticeSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("lattice spec must be a JSON object");
  try {
    LatticeSpec spec;
    spec.n_modes = j.at("n_modes").get<std::size_t>();
    const std::string topo = j.value("topology", std::string("open"));
    if (topo == "open") {
      spec.topology = Topology::Open;
    } else if (topo == "closed") {
      spec.topology = Topology::Closed;
    } else {
      throw ValidationError("topology must be \"open\" or \"closed\", got \"" + topo + "\"");
    }
    spec.amplitude = j.value("amplitude", 1.0);
    if (j.contains("phases")) {
      spec.phases = j.at("phases").get<std::vector<double>>();
    } else {
      spec.phases.assign(spec.expected_phase_count(), 0.0);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed lattice spec: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LatticeSpec load_spec(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
  return spec_from_json(j);
}

/// Entries as row-major re/im arrays.
inline nlohmann::json to_json(const TransferMatrix& a) {
  std::vector<double> re, im;
  for (Eigen::Index r = 0; r < a.entries().rows(); ++r) {
    for (Eigen::Index c = 0; c < a.entries().cols(); ++c) {
      re.push_back(a.entries()(r, c).real());
      im.push_back(a.entries()(r, c).imag());
    }
  }
  return {{"format", "tbprop-matrix/1"},
          {"n", a.size()},
          {"t", a.time()},
          {"provenance", to_string(a.provenance())},
          {"re", re},
          {"im", im}};
}

/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
inline std::string spec_hash(const LatticeSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_json(spec).dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tbprop
