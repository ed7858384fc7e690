// Optical elements acting on Fock states: down-conversion crystals, mode and
// phase shifters, misalignment beam splitters and path relabeling.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pathid/fock.hpp"

namespace pathid {

inline constexpr double kMaxGain = 0.5;
inline constexpr double kGainWarnThreshold = 0.2;
inline constexpr double kDefaultGain = 0.1;

/// Single-mode pair source emitting one photon into out_a and one into out_b.
struct Crystal {
  ModeLabel out_a;
  ModeLabel out_b;
  double g = kDefaultGain;
  std::optional<int> order;  // falls back to the experiment's expansion order

  bool operator==(const Crystal&) const = default;
};

/// Source emitting sum_l a+(A, base_a + l) a+(B, base_b + l) over mode_list.
/// With zero base modes this is the plain high-dimensional pair source.
struct MultimodeCrystal {
  ModeLabel out_a;
  ModeLabel out_b;
  std::vector<int> modes;
  double g = kDefaultGain;
  std::optional<int> order;

  bool operator==(const MultimodeCrystal&) const = default;
};

struct ModeShifter {
  std::string path;
  int delta = 1;
  bool operator==(const ModeShifter&) const = default;
};

struct PhaseShifter {
  std::string path;
  double phi = 0.0;
  bool operator==(const PhaseShifter&) const = default;
};

/// Imperfect overlap: a variable beam splitter into a fresh loss path.
struct Misalignment {
  std::string path;
  double T = 1.0;

  double reflectivity() const { return std::sqrt(std::max(0.0, 1.0 - T * T)); }
  bool operator==(const Misalignment&) const = default;
};

/// Path identity: every photon of from_path continues in to_path.
struct Relabel {
  std::string from_path;
  std::string to_path;
  bool operator==(const Relabel&) const = default;
};

using Element = std::variant<Crystal, MultimodeCrystal, ModeShifter, PhaseShifter, Misalignment, Relabel>;

struct ExpansionOptions {
  int default_order = 2;
  // Off gives the creation-only expansion 1 + g A+B+ + (g^2/2)(A+B+)^2 + ...
  bool include_annihilation = true;
  // Terms with more photons are dropped after the element.
  std::optional<int> max_photons;
};

/// Throws std::invalid_argument for parameter values outside the model.
/// Returns warnings for values that are legal but leave the perturbative regime.
inline std::vector<std::string> validate(const Element& element);

namespace detail {

inline void check_path(const std::string& path, const char* what) {
  if (!is_valid_path(path)) throw std::invalid_argument(std::string(what) + ": invalid path '" + path + "'");
}

inline void check_gain(double g, std::optional<int> order, std::vector<std::string>& warnings) {
  if (!(g > 0.0) || g > kMaxGain)
    throw std::invalid_argument("crystal gain g must be in (0, " + format_double(kMaxGain) + "], got " + format_double(g));
  if (g > kGainWarnThreshold) warnings.push_back("gain g=" + format_double(g) + " is outside the g << 1 regime");
  if (order && *order < 1) throw std::invalid_argument("crystal expansion order must be >= 1");
}

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

using LabelPair = std::pair<ModeLabel, ModeLabel>;

// X|psi> for X = sum (A+ B+ - A B) over the label pairs. Terms whose photon
// number exceeds cap are skipped.
inline StateVector apply_pair_generator(const StateVector& state, const std::vector<LabelPair>& pairs,
                                        bool annihilation, int cap) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    const int total = occ.total();
    for (const auto& [A, B] : pairs) {
      const int na = occ.count(A);
      const int nb = occ.count(B);
      if (total + 2 <= cap) {
        Occupation up = occ;
        up.add(A, 1);
        up.add(B, 1);
        out.accumulate_raw(up, amp * std::sqrt(static_cast<double>((na + 1) * (nb + 1))));
      }
      if (annihilation && na > 0 && nb > 0 && total - 2 <= cap) {
        Occupation down = occ;
        down.add(A, -1);
        down.add(B, -1);
        out.accumulate_raw(down, -amp * std::sqrt(static_cast<double>(na * nb)));
      }
    }
  }
  out.prune();
  return out;
}

// sum_{k=0}^{order} g^k/k! X^k |psi>.
inline StateVector apply_pair_source(const StateVector& state, const std::vector<LabelPair>& pairs, double g,
                                     int order, const ExpansionOptions& opts) {
  constexpr int kUnbounded = 1 << 29;
  const int cap = opts.max_photons.value_or(kUnbounded);
  StateVector result = state;
  StateVector power = state;
  double coeff = 1.0;
  for (int k = 1; k <= order; ++k) {
    // Terms more than 2*(order-k) photons above the cap cannot come back.
    const int reach = cap >= kUnbounded ? kUnbounded : cap + 2 * (order - k);
    power = apply_pair_generator(power, pairs, opts.include_annihilation, reach);
    coeff *= g / k;
    for (const auto& [occ, amp] : power.terms()) result.accumulate_raw(occ, coeff * amp);
  }
  if (opts.max_photons) result = truncate_photons(result, *opts.max_photons);
  result.prune();
  return result;
}

}  // namespace detail

inline std::vector<std::string> validate(const Element& element) {
  std::vector<std::string> warnings;
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, Crystal>) {
          detail::check_path(e.out_a.path, "crystal");
          detail::check_path(e.out_b.path, "crystal");
          if (e.out_a == e.out_b) throw std::invalid_argument("crystal outputs must be distinct modes");
          detail::check_gain(e.g, e.order, warnings);
        } else if constexpr (std::is_same_v<E, MultimodeCrystal>) {
          detail::check_path(e.out_a.path, "crystal");
          detail::check_path(e.out_b.path, "crystal");
          if (e.modes.empty()) throw std::invalid_argument("multimode crystal needs a nonempty mode list");
          if (e.out_a.path == e.out_b.path && e.out_a.mode == e.out_b.mode)
            throw std::invalid_argument("crystal outputs must be distinct modes");
          detail::check_gain(e.g, e.order, warnings);
        } else if constexpr (std::is_same_v<E, ModeShifter>) {
          detail::check_path(e.path, "shift");
        } else if constexpr (std::is_same_v<E, PhaseShifter>) {
          detail::check_path(e.path, "phase");
          if (!std::isfinite(e.phi)) throw std::invalid_argument("phase must be finite");
        } else if constexpr (std::is_same_v<E, Misalignment>) {
          detail::check_path(e.path, "misalign");
          if (!(e.T >= 0.0 && e.T <= 1.0)) throw std::invalid_argument("transmissivity T must be in [0, 1]");
        } else if constexpr (std::is_same_v<E, Relabel>) {
          detail::check_path(e.from_path, "relabel");
          detail::check_path(e.to_path, "relabel");
        }
      },
      element);
  return warnings;
}

inline StateVector apply_crystal(const StateVector& state, const Crystal& crystal, const ExpansionOptions& opts = {}) {
  const int order = crystal.order.value_or(opts.default_order);
  return detail::apply_pair_source(state, {{crystal.out_a, crystal.out_b}}, crystal.g, order, opts);
}

inline StateVector apply_multimode_crystal(const StateVector& state, const MultimodeCrystal& mc,
                                           const ExpansionOptions& opts = {}) {
  if (mc.modes.empty()) throw std::invalid_argument("multimode crystal needs a nonempty mode list");
  std::vector<detail::LabelPair> pairs;
  pairs.reserve(mc.modes.size());
  for (int l : mc.modes)
    pairs.push_back({{mc.out_a.path, mc.out_a.mode + l}, {mc.out_b.path, mc.out_b.mode + l}});
  const int order = mc.order.value_or(opts.default_order);
  return detail::apply_pair_source(state, pairs, mc.g, order, opts);
}

inline StateVector apply_mode_shift(const StateVector& state, const ModeShifter& shifter) {
  if (shifter.delta == 0) return state;
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    Occupation next;
    for (const auto& [label, n] : occ.entries())
      next.add(label.path == shifter.path ? ModeLabel{label.path, label.mode + shifter.delta} : label, n);
    out.accumulate_raw(next, amp);
  }
  return out;
}

inline StateVector apply_phase_shift(const StateVector& state, const PhaseShifter& ps) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    const int n = occ.total_in_path(ps.path);
    out.accumulate(occ, n == 0 ? amp : amp * std::polar(1.0, ps.phi * n));
  }
  return out;
}

/// Substitutes a+(path,m) -> T a+(path,m) + R a+(loss,m) in every term.
/// loss must be a loss-namespaced path that no term occupies yet.
inline StateVector apply_misalignment(const StateVector& state, const Misalignment& mis, const std::string& loss) {
  if (!(mis.T >= 0.0 && mis.T <= 1.0)) throw std::invalid_argument("transmissivity T must be in [0, 1]");
  if (!is_loss_path(loss) || !is_valid_path(loss)) throw std::invalid_argument("misalignment needs a loss path, got '" + loss + "'");
  if (mis.T == 1.0) return state;
  const double T = mis.T;
  const double R = mis.reflectivity();
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    Occupation rest;
    std::vector<Occupation::Entry> moving;
    for (const auto& [label, n] : occ.entries()) {
      if (label.path == mis.path) moving.push_back({label, n});
      else rest.add(label, n);
    }
    if (moving.empty()) {
      out.accumulate_raw(occ, amp);
      continue;
    }
    std::vector<std::pair<Occupation, Amplitude>> partial{{rest, amp}};
    for (const auto& [label, n] : moving) {
      if (occ.count({loss, label.mode}) != 0) throw std::invalid_argument("loss path '" + loss + "' is already occupied");
      std::vector<std::pair<Occupation, Amplitude>> next;
      for (const auto& [base, a] : partial) {
        for (int kept = 0; kept <= n; ++kept) {
          const double factor = std::sqrt(detail::binomial(n, kept)) * std::pow(T, kept) * std::pow(R, n - kept);
          if (factor == 0.0) continue;
          Occupation o = base;
          o.add(label, kept);
          o.add({loss, label.mode}, n - kept);
          next.push_back({std::move(o), a * factor});
        }
      }
      partial = std::move(next);
    }
    for (const auto& [o, a] : partial) out.accumulate_raw(o, a);
  }
  out.prune();
  return out;
}

/// Moves every photon of from_path into to_path. Photons landing in an
/// occupied mode pick up the bosonic factor sqrt(C(n1 + n2, n1)).
inline StateVector apply_relabel(const StateVector& state, const Relabel& r) {
  if (r.from_path == r.to_path) return state;
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    Occupation next;
    double factor = 1.0;
    std::vector<Occupation::Entry> moved;
    for (const auto& [label, n] : occ.entries()) {
      if (label.path == r.from_path) moved.push_back({{r.to_path, label.mode}, n});
      else next.add(label, n);
    }
    for (const auto& [label, n] : moved) {
      const int existing = next.count(label);
      factor *= std::sqrt(detail::binomial(existing + n, n));
      next.add(label, n);
    }
    out.accumulate_raw(next, amp * factor);
  }
  out.prune();
  return out;
}


}  // namespace pathid
