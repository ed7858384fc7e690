// Target states, fidelity, Schmidt-rank vectors, generation efficiency and
// the layout generators for GHZ states and arbitrary two-photon states.

#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathid/experiment.hpp"
#include "pathid/fock.hpp"

namespace pathid {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Default path names a, b, c, ... for n parties.
inline std::vector<std::string> default_paths(int n) {
  std::vector<std::string> paths;
  for (int i = 0; i < n; ++i) {
    if (i < 26) paths.emplace_back(1, static_cast<char>('a' + i));
    else paths.push_back("p" + std::to_string(i));
  }
  return paths;
}

/// One photon per path, in the given modes.
inline Occupation product_occupation(const std::vector<std::string>& paths, const std::vector<int>& modes) {
  if (paths.size() != modes.size()) throw std::invalid_argument("paths and modes differ in length");
  Occupation occ;
  for (std::size_t i = 0; i < paths.size(); ++i) occ.add({paths[i], modes[i]}, 1);
  return occ;
}

inline StateVector ghz_target(int n, int d, const std::vector<std::string>& paths) {
  if (n < 2 || d < 2) throw std::invalid_argument("ghz_target needs n >= 2 and d >= 2");
  if (static_cast<int>(paths.size()) != n) throw std::invalid_argument("ghz_target needs exactly n paths");
  StateVector s;
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) s.accumulate(product_occupation(paths, std::vector<int>(n, k)), amp);
  return s;
}

inline StateVector ghz_target(int n, int d) { return ghz_target(n, d, default_paths(n)); }

/// (1/sqrt n) sum_k |H..V_k..H>.
inline StateVector w_target(int n, const std::vector<std::string>& paths) {
  if (n < 3) throw std::invalid_argument("w_target needs n >= 3");
  if (static_cast<int>(paths.size()) != n) throw std::invalid_argument("w_target needs exactly n paths");
  StateVector s;
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    std::vector<int> modes(n, kH);
    modes[k] = kV;
    s.accumulate(product_occupation(paths, modes), amp);
  }
  return s;
}

inline StateVector w_target(int n) { return w_target(n, default_paths(n)); }

/// |<target|state>|^2 after normalizing both.
inline double fidelity(const StateVector& state, const StateVector& target) {
  const double ns = squared_norm(state);
  const double nt = squared_norm(target);
  if (ns == 0.0 || nt == 0.0) throw std::domain_error("fidelity of the zero state");
  return std::norm(inner_product(target, state)) / (ns * nt);
}

// ---------------------------------------------------------------------------
// Schmidt-rank vector

inline constexpr double kRankTolerance = 1e-10;

struct SchmidtRankVector {
  std::vector<int> ranks;  // one per party, in party order

  std::vector<int> sorted_descending() const {
    auto r = ranks;
    std::sort(r.begin(), r.end(), std::greater<>());
    return r;
  }
  bool operator==(const SchmidtRankVector&) const = default;
};

inline std::string to_string(const SchmidtRankVector& srv) {
  std::string out;
  for (int r : srv.sorted_descending()) out += (out.empty() ? "" : " ") + std::to_string(r);
  return out;
}

/// Number of singular values above tolerance.
inline int numerical_rank(const Eigen::MatrixXcd& m, double tolerance = kRankTolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tolerance) ++rank;
  return rank;
}

/// Ranks of each party's reduced state (party vs. everything else). Every
/// term must hold exactly one photon per party.
inline SchmidtRankVector schmidt_rank_vector(const StateVector& state, const std::vector<Detector>& parties,
                                             double tolerance = kRankTolerance) {
  if (state.is_zero()) throw std::domain_error("Schmidt-rank vector of the zero state");
  const StateVector psi = normalized(state);
  SchmidtRankVector srv;
  for (const auto& party : parties) {
    std::map<ModeLabel, Eigen::Index> rows;
    std::map<Occupation, Eigen::Index> cols;
    std::vector<std::tuple<Eigen::Index, Eigen::Index, Amplitude>> entries;
    for (const auto& [occ, amp] : psi.terms()) {
      Occupation rest;
      std::optional<ModeLabel> local;
      int photons = 0;
      for (const auto& [label, n] : occ.entries()) {
        if (std::find(party.paths.begin(), party.paths.end(), label.path) != party.paths.end()) {
          photons += n;
          local = label;
        } else {
          rest.add(label, n);
        }
      }
      if (photons != 1) throw std::invalid_argument("state is not in one-photon-per-party form");
      auto r = rows.try_emplace(*local, static_cast<Eigen::Index>(rows.size())).first->second;
      auto c = cols.try_emplace(rest, static_cast<Eigen::Index>(cols.size())).first->second;
      entries.emplace_back(r, c, amp);
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (const auto& [r, c, a] : entries) m(r, c) += a;
    srv.ranks.push_back(numerical_rank(m, tolerance));
  }
  return srv;
}

inline SchmidtRankVector schmidt_rank_vector(const StateVector& state, const std::vector<std::string>& parties,
                                             double tolerance = kRankTolerance) {
  return schmidt_rank_vector(state, std::vector<Detector>(parties.begin(), parties.end()), tolerance);
}

// ---------------------------------------------------------------------------
// Efficiency

/// d / (n d / 2)^(n/2): d valid patterns out of c^(n/2) ordered crystal
/// combinations with c = n d / 2.
inline Rational efficiency_formula(int n, int d) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("efficiency formula needs even n >= 2");
  if (d < 2) throw std::invalid_argument("efficiency formula needs d >= 2");
  const std::int64_t crystals = static_cast<std::int64_t>(n) * d / 2;
  std::int64_t combos = 1;
  for (int i = 0; i < n / 2; ++i) {
    if (combos > INT64_MAX / crystals) throw std::overflow_error("efficiency formula overflows int64");
    combos *= crystals;
  }
  return Rational(d, combos);
}

/// Best rational approximation with denominator <= max_denominator, if one
/// lies within tolerance of x.
inline std::optional<Rational> rationalize(double x, std::int64_t max_denominator = 1'000'000,
                                           double tolerance = 1e-12) {
  if (!std::isfinite(x)) return std::nullopt;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (std::abs(a) > 9e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t p2 = ai * p1 + p0;
    const std::int64_t q2 = ai * q1 + q0;
    if (q2 > max_denominator) break;
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tolerance * std::max(1.0, std::abs(x)))
      return Rational(p1, q1);
    const double frac = r - a;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

struct SimulatedEfficiency {
  double value = 0.0;
  std::optional<Rational> exact;  // set when value is a small-denominator rational to 1e-12
};

/// Valid n-fold mass over the whole n-photon mass, at leading order in g: the
/// creation-only expansion to n/2 pairs keeps the bosonic enhancement of
/// repeated emission but none of the O(g^2) vacuum corrections.
inline SimulatedEfficiency efficiency_simulated(const Experiment& exp) {
  const int n = static_cast<int>(exp.click_count());
  RunOptions opts;
  opts.include_annihilation = false;
  opts.max_pairs_override = (n + 1) / 2;
  opts.order_override = std::max(exp.expansion_order, (n + 1) / 2);
  const StateVector full = run(exp, opts);
  const auto selected = post_select(full, exp);
  SimulatedEfficiency out;
  out.value = success_fraction(full, selected, n);
  out.exact = rationalize(out.value);
  return out;
}

struct EfficiencyReport {
  int n = 0;
  int d = 0;
  Rational formula_value;
  std::optional<SimulatedEfficiency> simulated;

  /// Explains how the two values are counted when both are present.
  std::string discrepancy_note() const {
    if (!simulated) return {};
    const int crystals = n * d / 2;
    return "formula counts c^(n/2) ordered crystal combinations (c=" + std::to_string(crystals) +
           "); the simulation weighs each multiset of firing crystals by its amplitude, "
           "including bosonic enhancement of repeated emission";
  }
};

inline EfficiencyReport efficiency_report(int n, int d, const Experiment* simulate = nullptr) {
  EfficiencyReport report{n, d, efficiency_formula(n, d), std::nullopt};
  if (simulate) report.simulated = efficiency_simulated(*simulate);
  return report;
}

// ---------------------------------------------------------------------------
// Layout generators

using Matching = std::vector<std::pair<int, int>>;

/// First d rounds of the circle-method 1-factorization of K_n: pairwise
/// edge-disjoint perfect matchings of vertices 0..n-1.
inline std::vector<Matching> ghz_matchings(int n, int d) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("ghz layout needs even n >= 2");
  if (d < 1) throw std::invalid_argument("ghz layout needs d >= 1");
  if (d > n - 1) throw std::invalid_argument("1-factorization exhausted: d must be <= n - 1");
  const int m = n - 1;
  std::vector<Matching> rounds;
  for (int r = 0; r < d; ++r) {
    Matching matching;
    matching.push_back({std::min(r, m), std::max(r, m)});
    for (int k = 1; k < n / 2; ++k) {
      int u = (r + k) % m;
      int v = ((r - k) % m + m) % m;
      matching.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(matching.begin(), matching.end());
    rounds.push_back(std::move(matching));
  }
  return rounds;
}

/// d layers of crystals, one perfect matching each, with every path shifted
/// by +1 between layers; the first layer ends up in mode d-1 and the last in 0.
inline Experiment ghz_layout(int n, int d, const std::vector<std::string>& paths, double g = kDefaultGain) {
  if (static_cast<int>(paths.size()) != n) throw std::invalid_argument("ghz layout needs exactly n paths");
  Experiment exp;
  const auto rounds = ghz_matchings(n, d);
  for (std::size_t layer = 0; layer < rounds.size(); ++layer) {
    for (const auto& [u, v] : rounds[layer]) exp.elements.push_back(Crystal{{paths[u], 0}, {paths[v], 0}, g, {}});
    if (layer + 1 < rounds.size())
      for (const auto& p : paths) exp.elements.push_back(ModeShifter{p, 1});
  }
  for (const auto& p : paths) exp.detectors.emplace_back(p);
  return exp;
}

inline Experiment ghz_layout(int n, int d) { return ghz_layout(n, d, default_paths(n)); }

struct TwoPhotonOptions {
  double max_gain = kDefaultGain;  // gain of the crystal with the largest |c_k|
  int order = 2;
  bool include_annihilation = true;
  std::string path_a = "a";
  std::string path_b = "b";
};

/// Post-selected amplitude ratio <1,1|U|0> / <0|U|0> of one crystal on
/// vacuum, with the expansion the experiment will use.
inline double emission_ratio(double g, const TwoPhotonOptions& opts) {
  ExpansionOptions expansion{opts.order, opts.include_annihilation, 2};
  const Crystal c{{"a", 0}, {"b", 0}, g, {}};
  const StateVector out = apply_crystal(StateVector::vacuum(0.0), c, expansion);
  const Amplitude stay = out.amplitude({});
  const Amplitude emit = out.amplitude(make_occupation({{{"a", 0}, 1}, {{"b", 0}, 1}}));
  return (emit / stay).real();
}

/// Chain of d crystals on (a, b) with +1 mode shifters and a phase shifter on
/// b between them, so the two-fold state is proportional to sum_k c_k |k, k>.
/// Gains are solved so each term's amplitude is exactly |c_k| relative.
inline Experiment two_photon_builder(const std::vector<Amplitude>& coefficients, const TwoPhotonOptions& opts = {}) {
  const int d = static_cast<int>(coefficients.size());
  if (d < 2) throw std::invalid_argument("two-photon builder needs at least two coefficients");
  double largest = 0.0;
  for (const auto& c : coefficients) largest = std::max(largest, std::abs(c));
  if (!(largest > 0.0)) throw std::invalid_argument("two-photon builder needs a nonzero coefficient vector");
  if (!(opts.max_gain > 0.0) || opts.max_gain > kMaxGain) throw std::invalid_argument("max_gain out of range");

  const double top_ratio = emission_ratio(opts.max_gain, opts);
  auto solve_gain = [&](double magnitude) {
    if (magnitude == largest) return opts.max_gain;
    const double target = top_ratio * magnitude / largest;
    double lo = 0.0, hi = opts.max_gain;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (emission_ratio(mid, opts) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  auto wrap = [](double phi) {
    double w = std::fmod(phi, 2.0 * std::numbers::pi);
    if (w < 0) w += 2.0 * std::numbers::pi;
    return w;
  };

  // Crystal j (application order) ends in mode d-1-j.
  std::vector<double> theta(d);
  for (int k = 0; k < d; ++k) theta[k] = std::abs(coefficients[k]) > 0.0 ? std::arg(coefficients[k]) : 0.0;
  auto accumulated = [&](int j) { return j == d - 1 ? 0.0 : theta[d - 1 - j] - theta[0]; };

  Experiment exp;
  exp.expansion_order = opts.order;
  for (int j = 0; j < d; ++j) {
    const double magnitude = std::abs(coefficients[d - 1 - j]);
    if (magnitude > 0.0)
      exp.elements.push_back(Crystal{{opts.path_a, 0}, {opts.path_b, 0}, solve_gain(magnitude), {}});
    if (j + 1 < d) {
      exp.elements.push_back(ModeShifter{opts.path_a, 1});
      exp.elements.push_back(ModeShifter{opts.path_b, 1});
      const double phi = wrap(accumulated(j) - accumulated(j + 1));
      if (phi != 0.0) exp.elements.push_back(PhaseShifter{opts.path_b, phi});
    }
  }
  if (const double global = wrap(theta[0]); global != 0.0) exp.elements.push_back(PhaseShifter{opts.path_b, global});
  exp.detectors = {Detector{opts.path_a}, Detector{opts.path_b}};
  return exp;
}

/// sum_k c_k |k_a, k_b>.
inline StateVector two_photon_target(const std::vector<Amplitude>& coefficients, const std::string& a = "a",
                                     const std::string& b = "b") {
  StateVector s;
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    s.accumulate(product_occupation({a, b}, {static_cast<int>(k), static_cast<int>(k)}), coefficients[k]);
  return s;
}

}  // namespace pathid
