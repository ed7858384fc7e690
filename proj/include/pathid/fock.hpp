// Sparse multi-mode bosonic Fock states.
//
// A StateVector is a superposition of occupation patterns over (path, mode)
// labels. Creation and annihilation carry the exact bosonic sqrt(n) factors.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <compare>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace pathid {

using Amplitude = std::complex<double>;

inline constexpr double kDefaultPruneEpsilon = 1e-14;
inline constexpr std::string_view kLossPrefix = "loss#";

// Polarization aliases for the internal-mode integer.
inline constexpr int kH = 0;
inline constexpr int kV = 1;

inline bool is_loss_path(std::string_view path) { return path.starts_with(kLossPrefix); }

inline std::string loss_path(int index) { return std::string(kLossPrefix) + std::to_string(index); }

/// A path identifier is nonempty and free of the characters the text
/// formats use as separators. '#' is reserved for loss paths.
inline bool is_valid_path(std::string_view path) {
  if (path.empty()) return false;
  if (is_loss_path(path)) return path.size() > kLossPrefix.size();
  for (char c : path) {
    if (c == ':' || c == '*' || c == '|' || c == ',' || c == '#' || c == '=' ||
        std::isspace(static_cast<unsigned char>(c)))
      return false;
  }
  return true;
}

struct ModeLabel {
  std::string path;
  int mode = 0;

  auto operator<=>(const ModeLabel&) const = default;
  bool operator==(const ModeLabel&) const = default;
};

inline std::string to_string(const ModeLabel& label) {
  return label.path + ":" + std::to_string(label.mode);
}

/// Occupation pattern: sorted (label, count) entries, counts always >= 1.
class Occupation {
 public:
  using Entry = std::pair<ModeLabel, int>;

  Occupation() = default;

  int count(const ModeLabel& label) const {
    auto it = find(label);
    return it != entries_.end() && it->first == label ? it->second : 0;
  }

  /// Adds delta photons to label. Throws if the count would go negative.
  void add(const ModeLabel& label, int delta) {
    auto it = find(label);
    if (it != entries_.end() && it->first == label) {
      it->second += delta;
      if (it->second < 0) throw std::logic_error("negative photon number at " + to_string(label));
      if (it->second == 0) entries_.erase(it);
    } else if (delta > 0) {
      entries_.insert(it, {label, delta});
    } else if (delta < 0) {
      throw std::logic_error("negative photon number at " + to_string(label));
    }
  }

  int total() const {
    int n = 0;
    for (const auto& [label, count] : entries_) n += count;
    return n;
  }

  int total_in_path(std::string_view path) const {
    int n = 0;
    for (const auto& [label, count] : entries_)
      if (label.path == path) n += count;
    return n;
  }

  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  auto operator<=>(const Occupation&) const = default;
  bool operator==(const Occupation&) const = default;

 private:
  std::vector<Entry>::iterator find(const ModeLabel& label) {
    return std::lower_bound(entries_.begin(), entries_.end(), label,
                            [](const Entry& e, const ModeLabel& l) { return e.first < l; });
  }
  std::vector<Entry>::const_iterator find(const ModeLabel& label) const {
    return std::lower_bound(entries_.begin(), entries_.end(), label,
                            [](const Entry& e, const ModeLabel& l) { return e.first < l; });
  }

  std::vector<Entry> entries_;
};

/// Builds an occupation from (label, count) pairs; counts of repeated labels add.
inline Occupation make_occupation(std::initializer_list<Occupation::Entry> entries) {
  Occupation occ;
  for (const auto& [label, count] : entries) occ.add(label, count);
  return occ;
}

struct FockTerm {
  Occupation occupations;
  Amplitude amplitude;
};

/// Sparse superposition of Fock basis states keyed by occupation pattern.
///
/// Amplitudes with magnitude <= prune_epsilon are dropped whenever a term is
/// written, so the default-constructed value is the zero vector.
class StateVector {
 public:
  using TermMap = std::map<Occupation, Amplitude>;

  StateVector() = default;
  explicit StateVector(double prune_epsilon) : epsilon_(prune_epsilon) {}

  static StateVector vacuum(double prune_epsilon = kDefaultPruneEpsilon) {
    StateVector s(prune_epsilon);
    s.terms_.emplace(Occupation{}, Amplitude{1.0, 0.0});
    return s;
  }

  static StateVector basis(const Occupation& occ, Amplitude amp = 1.0,
                           double prune_epsilon = kDefaultPruneEpsilon) {
    StateVector s(prune_epsilon);
    s.accumulate(occ, amp);
    return s;
  }

  /// Adds amp to the amplitude of occ, merging and pruning.
  void accumulate(const Occupation& occ, Amplitude amp) {
    auto [it, inserted] = terms_.try_emplace(occ, amp);
    if (!inserted) it->second += amp;
    if (std::abs(it->second) <= epsilon_) terms_.erase(it);
  }

  /// Inserts without pruning; callers finish with prune().
  void accumulate_raw(const Occupation& occ, Amplitude amp) {
    auto [it, inserted] = terms_.try_emplace(occ, amp);
    if (!inserted) it->second += amp;
  }

  void prune() {
    std::erase_if(terms_, [this](const auto& kv) { return std::abs(kv.second) <= epsilon_; });
  }

  Amplitude amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Amplitude{} : it->second;
  }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  double prune_epsilon() const { return epsilon_; }
  void set_prune_epsilon(double eps) {
    epsilon_ = eps;
    prune();
  }

  /// Highest photon-pair number retained by truncation (0 when never truncated).
  int pair_order() const { return pair_order_; }
  void set_pair_order(int order) { pair_order_ = order; }

  std::vector<FockTerm> to_terms() const {
    std::vector<FockTerm> out;
    out.reserve(terms_.size());
    for (const auto& [occ, amp] : terms_) out.push_back({occ, amp});
    return out;
  }

  /// Same prune epsilon and pair order, no terms.
  StateVector empty_like() const {
    StateVector s(epsilon_);
    s.pair_order_ = pair_order_;
    return s;
  }

  bool operator==(const StateVector& other) const { return terms_ == other.terms_; }

 private:
  TermMap terms_;
  double epsilon_ = kDefaultPruneEpsilon;
  int pair_order_ = 0;
};

inline StateVector vacuum() { return StateVector::vacuum(); }

inline StateVector apply_create(const StateVector& state, const ModeLabel& label) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    const int n = occ.count(label);
    Occupation next = occ;
    next.add(label, 1);
    out.accumulate_raw(next, amp * std::sqrt(static_cast<double>(n + 1)));
  }
  out.prune();
  return out;
}

inline StateVector apply_annihilate(const StateVector& state, const ModeLabel& label) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms()) {
    const int n = occ.count(label);
    if (n == 0) continue;
    Occupation next = occ;
    next.add(label, -1);
    out.accumulate_raw(next, amp * std::sqrt(static_cast<double>(n)));
  }
  out.prune();
  return out;
}

inline StateVector add(const StateVector& s1, const StateVector& s2) {
  StateVector out = s1;
  out.set_pair_order(std::max(s1.pair_order(), s2.pair_order()));
  for (const auto& [occ, amp] : s2.terms()) out.accumulate(occ, amp);
  return out;
}

inline StateVector scale(const StateVector& s, Amplitude c) {
  StateVector out = s.empty_like();
  for (const auto& [occ, amp] : s.terms()) out.accumulate(occ, amp * c);
  return out;
}

inline StateVector operator+(const StateVector& a, const StateVector& b) { return add(a, b); }
inline StateVector operator-(const StateVector& a, const StateVector& b) { return add(a, scale(b, -1.0)); }
inline StateVector operator*(Amplitude c, const StateVector& s) { return scale(s, c); }

/// <s1|s2>, antilinear in the first argument.
inline Amplitude inner_product(const StateVector& s1, const StateVector& s2) {
  const auto& small = s1.size() <= s2.size() ? s1 : s2;
  const auto& large = s1.size() <= s2.size() ? s2 : s1;
  Amplitude sum{};
  for (const auto& [occ, amp] : small.terms()) {
    auto it = large.terms().find(occ);
    if (it == large.terms().end()) continue;
    sum += &small == &s1 ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return sum;
}

inline double squared_norm(const StateVector& s) {
  double sum = 0.0;
  for (const auto& [occ, amp] : s.terms()) sum += std::norm(amp);
  return sum;
}

inline double norm(const StateVector& s) { return std::sqrt(squared_norm(s)); }

/// Returns s / |s|; throws on the zero vector.
inline StateVector normalized(const StateVector& s) {
  const double n = norm(s);
  if (n == 0.0) throw std::domain_error("cannot normalize the zero state");
  return scale(s, 1.0 / n);
}

/// Drops every term with more than 2 * max_pairs photons.
inline StateVector truncate_pairs(const StateVector& state, int max_pairs) {
  if (max_pairs < 0) throw std::invalid_argument("max_pairs must be >= 0");
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms())
    if (occ.total() <= 2 * max_pairs) out.accumulate_raw(occ, amp);
  out.set_pair_order(max_pairs);
  return out;
}

/// Drops every term with more than max_photons photons.
inline StateVector truncate_photons(const StateVector& state, int max_photons) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms())
    if (occ.total() <= max_photons) out.accumulate_raw(occ, amp);
  return out;
}

/// Terms with exactly n photons.
inline StateVector photon_sector(const StateVector& state, int n) {
  StateVector out = state.empty_like();
  for (const auto& [occ, amp] : state.terms())
    if (occ.total() == n) out.accumulate_raw(occ, amp);
  return out;
}

// ---------------------------------------------------------------------------
// Text serialization: one line per term, "re im : n*path:mode ...", in the
// canonical term order. Doubles use the shortest round-trip representation.

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline std::string to_string(const Occupation& occ) {
  std::string out;
  for (const auto& [label, count] : occ.entries()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(count) + "*" + to_string(label);
  }
  return out;
}

inline std::string serialize_state(const StateVector& state) {
  std::string out;
  for (const auto& [occ, amp] : state.terms()) {
    out += detail::format_double(amp.real());
    out += ' ';
    out += detail::format_double(amp.imag());
    out += " :";
    if (!occ.empty()) {
      out += ' ';
      out += to_string(occ);
    }
    out += '\n';
  }
  return out;
}

/// Inverse of serialize_state. Blank lines and '#' comments are ignored.
inline StateVector parse_state(std::string_view text, double prune_epsilon = kDefaultPruneEpsilon) {
  StateVector state(prune_epsilon);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos && (hash == 0 || std::isspace(static_cast<unsigned char>(line[hash - 1]))))
      line = line.substr(0, hash);
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("state line " + std::to_string(line_no) + ": " + why);
    };
    if (tokens.size() < 3 || tokens[2] != ":") fail("expected 're im : occupations'");
    double re = 0, im = 0;
    if (!detail::parse_double(tokens[0], re) || !detail::parse_double(tokens[1], im)) fail("malformed amplitude");
    Occupation occ;
    for (std::size_t k = 3; k < tokens.size(); ++k) {
      auto tok = tokens[k];
      auto star = tok.find('*');
      auto colon = tok.rfind(':');
      if (star == std::string_view::npos || colon == std::string_view::npos || colon < star) fail("malformed occupation '" + std::string(tok) + "'");
      int count = 0, mode = 0;
      std::string path(tok.substr(star + 1, colon - star - 1));
      if (!detail::parse_int(tok.substr(0, star), count) || count < 1) fail("bad photon count");
      if (!detail::parse_int(tok.substr(colon + 1), mode)) fail("bad mode");
      if (!is_valid_path(path)) fail("bad path '" + path + "'");
      occ.add({path, mode}, count);
    }
    state.accumulate(occ, {re, im});
  }
  return state;
}

}  // namespace pathid
