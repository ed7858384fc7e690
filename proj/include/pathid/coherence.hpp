// Path-length feasibility for the four-crystal path identity layout: photon
// paths must agree within the down-conversion coherence length, pump arms
// within the pump coherence length.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathid/fock.hpp"

namespace pathid {

struct CoherenceSpec {
  std::array<double, 4> pump_arms{};      // lp1..lp4
  std::array<double, 4> photon_paths{};   // l1..l4
  double coherence_length_spdc = 0.0;
  double coherence_length_pump = 0.0;
  double epsilon = 0.1;  // |difference| <= epsilon * coherence length
};

/// A single |difference| <= budget requirement.
struct CoherenceConstraint {
  std::string name;
  double difference = 0.0;
  double budget = 0.0;
};

struct ConstraintResult {
  std::string name;
  double difference = 0.0;
  double budget = 0.0;
  double margin = 0.0;  // 1 - |difference| / budget; negative when violated
  bool satisfied = false;
};

struct CoherenceReport {
  bool pass = true;
  std::vector<ConstraintResult> constraints;

  std::vector<ConstraintResult> violations() const {
    std::vector<ConstraintResult> out;
    for (const auto& c : constraints)
      if (!c.satisfied) out.push_back(c);
    return out;
  }

  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) m = std::min(m, c.margin);
    return m;
  }
};

inline CoherenceReport check_constraints(const std::vector<CoherenceConstraint>& constraints) {
  CoherenceReport report;
  for (const auto& c : constraints) {
    if (!(c.budget > 0.0)) throw std::invalid_argument("constraint '" + c.name + "' needs a positive budget");
    ConstraintResult r{c.name, c.difference, c.budget, 1.0 - std::abs(c.difference) / c.budget, false};
    r.satisfied = std::abs(c.difference) <= c.budget;
    report.pass = report.pass && r.satisfied;
    report.constraints.push_back(std::move(r));
  }
  return report;
}

inline void validate(const CoherenceSpec& spec) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  for (double x : spec.pump_arms)
    if (!positive(x)) throw std::invalid_argument("pump arm lengths must be positive");
  for (double x : spec.photon_paths)
    if (!positive(x)) throw std::invalid_argument("photon path lengths must be positive");
  if (!positive(spec.coherence_length_spdc) || !positive(spec.coherence_length_pump))
    throw std::invalid_argument("coherence lengths must be positive");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");
}

inline std::vector<CoherenceConstraint> coherence_constraints(const CoherenceSpec& spec) {
  const double spdc = spec.epsilon * spec.coherence_length_spdc;
  const double pump = spec.epsilon * spec.coherence_length_pump;
  const auto& l = spec.photon_paths;
  const auto& p = spec.pump_arms;
  auto li = [](int i) { return "l" + std::to_string(i + 1); };
  auto lpi = [](int i) { return "lp" + std::to_string(i + 1); };

  std::vector<CoherenceConstraint> out;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) out.push_back({li(i) + "-" + li(j), l[i] - l[j], spdc});
  out.push_back({"lp1-lp2", p[0] - p[1], pump});
  out.push_back({"lp3-lp4", p[2] - p[3], pump});
  for (int arm : {2, 3})
    for (int i = 0; i < 4; ++i) out.push_back({lpi(arm) + "-" + li(i), p[arm] - l[i], pump});
  return out;
}

inline CoherenceReport check_coherence(const CoherenceSpec& spec) {
  validate(spec);
  return check_constraints(coherence_constraints(spec));
}

/// key=value lines, '#' comments. Keys lp1..lp4, l1..l4, lc_spdc, lc_pump,
/// epsilon (optional).
inline CoherenceSpec parse_coherence_spec(const std::string& text) {
  CoherenceSpec spec;
  std::map<std::string, double*> slots{{"lc_spdc", &spec.coherence_length_spdc},
                                       {"lc_pump", &spec.coherence_length_pump},
                                       {"epsilon", &spec.epsilon}};
  for (int i = 0; i < 4; ++i) {
    slots["lp" + std::to_string(i + 1)] = &spec.pump_arms[i];
    slots["l" + std::to_string(i + 1)] = &spec.photon_paths[i];
  }
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": " + msg);
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto slot = slots.find(key);
    if (slot == slots.end()) fail("unknown key '" + key + "'");
    if (seen[key]) fail("duplicate key '" + key + "'");
    double parsed = 0.0;
    if (!detail::parse_double(value, parsed)) fail("malformed number '" + value + "'");
    *slot->second = parsed;
    seen[key] = true;
  }
  for (const auto& [key, slot] : slots)
    if (key != "epsilon" && !seen[key]) throw std::invalid_argument("missing key '" + key + "'");
  return spec;
}

}  // namespace pathid
