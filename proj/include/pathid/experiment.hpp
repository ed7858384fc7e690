// Experiments: an ordered element list run from vacuum, followed by
// n-fold coincidence post-selection.

#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathid/elements.hpp"
#include "pathid/fock.hpp"

namespace pathid {

/// One detector click: exactly one photon across the listed paths. Almost
/// always a single path; alternatives model "either a or c" events.
struct Detector {
  std::vector<std::string> paths;

  Detector() = default;
  Detector(std::string path) : paths{std::move(path)} {}  // NOLINT(google-explicit-constructor)
  Detector(std::vector<std::string> alternatives) : paths(std::move(alternatives)) {}  // NOLINT

  bool single() const { return paths.size() == 1; }
  bool operator==(const Detector&) const = default;
};

struct Experiment {
  std::vector<Element> elements;
  std::vector<Detector> detectors;    // the parties
  std::vector<std::string> triggers;  // must click, not parties
  std::optional<int> max_pairs;       // truncation; defaults to ceil(clicks / 2)
  int expansion_order = 2;

  std::size_t click_count() const { return detectors.size() + triggers.size(); }
  int effective_max_pairs() const {
    return max_pairs.value_or(static_cast<int>((click_count() + 1) / 2));
  }

  /// Detectors followed by triggers, each as a click group.
  std::vector<Detector> clicks() const {
    std::vector<Detector> out = detectors;
    for (const auto& t : triggers) out.emplace_back(t);
    return out;
  }

  std::vector<std::string> detector_paths() const {
    std::vector<std::string> out;
    for (const auto& d : detectors) out.insert(out.end(), d.paths.begin(), d.paths.end());
    return out;
  }

  bool operator==(const Experiment&) const = default;
};

struct RunOptions {
  bool include_annihilation = true;
  bool strict = false;  // reject elements touching paths nothing has declared
  std::optional<int> order_override{};
  std::optional<int> max_pairs_override{};
  double prune_epsilon = kDefaultPruneEpsilon;
};

struct PostSelectionResult {
  StateVector state;           // normalized, or zero
  double success_weight = 0.0;  // squared norm of the selected part before normalization
};

/// Throws std::invalid_argument when the experiment breaks its invariants.
inline void validate(const Experiment& exp) {
  std::set<std::string> seen;
  auto check = [&](const std::string& p) {
    if (!is_valid_path(p) || is_loss_path(p)) throw std::invalid_argument("invalid detector path '" + p + "'");
    if (!seen.insert(p).second) throw std::invalid_argument("detector path '" + p + "' listed twice");
  };
  for (const auto& d : exp.detectors) {
    if (d.paths.empty()) throw std::invalid_argument("empty detector group");
    for (const auto& p : d.paths) check(p);
  }
  for (const auto& t : exp.triggers) check(t);
  if (exp.expansion_order < 1) throw std::invalid_argument("expansion order must be >= 1");
  if (exp.max_pairs && *exp.max_pairs < 0) throw std::invalid_argument("pairs must be >= 0");
  for (const auto& e : exp.elements) validate(e);
}

namespace detail {

inline void check_declared(const std::set<std::string>& declared, const std::string& path, const char* what) {
  if (!declared.contains(path))
    throw std::invalid_argument(std::string(what) + " references undeclared path '" + path + "'");
}

}  // namespace detail

/// Applies the elements in order to vacuum, truncating to max_pairs photon
/// pairs after every crystal. Misalignments get loss paths loss#1, loss#2, ...
/// in element order.
inline StateVector run(const Experiment& exp, const RunOptions& opts = {}) {
  validate(exp);
  const int max_pairs = opts.max_pairs_override.value_or(exp.effective_max_pairs());
  ExpansionOptions expansion;
  expansion.default_order = opts.order_override.value_or(exp.expansion_order);
  expansion.include_annihilation = opts.include_annihilation;
  expansion.max_photons = 2 * max_pairs;

  std::set<std::string> declared;
  for (const auto& p : exp.detector_paths()) declared.insert(p);
  for (const auto& p : exp.triggers) declared.insert(p);

  StateVector state = StateVector::vacuum(opts.prune_epsilon);
  int loss_counter = 0;
  for (const auto& element : exp.elements) {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, Crystal> || std::is_same_v<E, MultimodeCrystal>) {
            auto source = e;
            if (opts.order_override) source.order.reset();
            if constexpr (std::is_same_v<E, Crystal>) state = apply_crystal(state, source, expansion);
            else state = apply_multimode_crystal(state, source, expansion);
            declared.insert(e.out_a.path);
            declared.insert(e.out_b.path);
          } else if constexpr (std::is_same_v<E, ModeShifter>) {
            if (opts.strict) detail::check_declared(declared, e.path, "shift");
            state = apply_mode_shift(state, e);
          } else if constexpr (std::is_same_v<E, PhaseShifter>) {
            if (opts.strict) detail::check_declared(declared, e.path, "phase");
            state = apply_phase_shift(state, e);
          } else if constexpr (std::is_same_v<E, Misalignment>) {
            if (opts.strict) detail::check_declared(declared, e.path, "misalign");
            state = apply_misalignment(state, e, loss_path(++loss_counter));
          } else if constexpr (std::is_same_v<E, Relabel>) {
            if (opts.strict) detail::check_declared(declared, e.from_path, "relabel");
            state = apply_relabel(state, e);
            declared.insert(e.to_path);
          }
        },
        element);
  }
  state.set_pair_order(max_pairs);
  return state;
}

/// True when occ has exactly one photon per click group and none elsewhere,
/// loss paths included.
inline bool is_coincidence(const Occupation& occ, std::span<const Detector> clicks) {
  std::vector<int> counts(clicks.size(), 0);
  for (const auto& [label, n] : occ.entries()) {
    bool matched = false;
    for (std::size_t i = 0; i < clicks.size() && !matched; ++i) {
      if (std::find(clicks[i].paths.begin(), clicks[i].paths.end(), label.path) != clicks[i].paths.end()) {
        counts[i] += n;
        matched = true;
      }
    }
    if (!matched) return false;
  }
  return std::all_of(counts.begin(), counts.end(), [](int c) { return c == 1; });
}

inline PostSelectionResult post_select(const StateVector& state, std::span<const Detector> clicks) {
  StateVector selected = state.empty_like();
  for (const auto& [occ, amp] : state.terms())
    if (is_coincidence(occ, clicks)) selected.accumulate_raw(occ, amp);
  PostSelectionResult result;
  result.success_weight = squared_norm(selected);
  result.state = result.success_weight > 0.0 ? normalized(selected) : selected;
  return result;
}

inline PostSelectionResult post_select(const StateVector& state, const std::vector<std::string>& detector_paths) {
  std::vector<Detector> clicks(detector_paths.begin(), detector_paths.end());
  return post_select(state, std::span<const Detector>(clicks));
}

inline PostSelectionResult post_select(const StateVector& state, const Experiment& exp) {
  const auto clicks = exp.clicks();
  return post_select(state, std::span<const Detector>(clicks));
}

/// Squared norm of the terms holding exactly n photons outside loss paths.
inline double n_photon_mass(const StateVector& state, int n) {
  double mass = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    int detected = 0;
    for (const auto& [label, count] : occ.entries())
      if (!is_loss_path(label.path)) detected += count;
    if (detected == n) mass += std::norm(amp);
  }
  return mass;
}

/// Fraction of the n-photon sector that lands as a valid n-fold coincidence.
inline double success_fraction(const StateVector& full, const PostSelectionResult& selected, int n) {
  const double denominator = n_photon_mass(full, n);
  if (!(denominator > 0.0)) throw std::domain_error("no n-photon component");
  return selected.success_weight / denominator;
}

}  // namespace pathid
