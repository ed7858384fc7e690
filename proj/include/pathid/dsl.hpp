// Line-oriented experiment description language.
//
//   crystal <pA>:<m> <pB>:<m> [g=<float>] [modes=<m1,m2,...>] [order=<int>]
//   shift <path> <int>
//   phase <path> <angle>          angle: float, or pi, pi/4, -3pi/2, 2*pi/3
//   misalign <path> T=<float>
//   relabel <from> <to>
//   detectors <p>...              a|c is one detector that either path fires
//   trigger <p>...                heralding clicks that are not parties
//   order <int>
//   pairs <int>
//
// Modes accept H and V for 0 and 1. '#' starts a comment.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathid/elements.hpp"
#include "pathid/experiment.hpp"
#include "pathid/fock.hpp"

namespace pathid::dsl {

struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 0;
  bool operator==(const SourceSpan&) const = default;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::string expected;
};

inline std::string to_string(const ParseError& e) {
  std::string out = std::to_string(e.span.line) + ":" + std::to_string(e.span.column) + ": " + e.message;
  if (!e.expected.empty()) out += " (expected " + e.expected + ")";
  return out;
}

struct ParseResult {
  std::optional<Experiment> experiment;
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;

  bool ok() const { return experiment.has_value(); }
};

class ParseFailure : public std::runtime_error {
 public:
  explicit ParseFailure(std::vector<ParseError> errors)
      : std::runtime_error(summary(errors)), errors_(std::move(errors)) {}
  const std::vector<ParseError>& errors() const { return errors_; }

 private:
  static std::string summary(const std::vector<ParseError>& errors) {
    std::string out;
    for (const auto& e : errors) out += (out.empty() ? "" : "\n") + to_string(e);
    return out;
  }
  std::vector<ParseError> errors_;
};

namespace detail {

struct Token {
  std::string_view text;
  int column = 1;
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

inline bool parse_mode(std::string_view text, int& mode) {
  if (text == "H") return mode = kH, true;
  if (text == "V") return mode = kV, true;
  return pathid::detail::parse_int(text, mode);
}

// [-][k][*]pi[/m] or a plain float.
inline bool parse_angle(std::string_view text, double& out) {
  if (pathid::detail::parse_double(text, out)) return std::isfinite(out);
  const auto pi_at = text.find("pi");
  if (pi_at == std::string_view::npos) return false;
  std::string_view head = text.substr(0, pi_at);
  std::string_view tail = text.substr(pi_at + 2);
  double sign = 1.0;
  if (!head.empty() && head.front() == '-') sign = -1.0, head.remove_prefix(1);
  if (!head.empty() && head.back() == '*') head.remove_suffix(1);
  double k = 1.0;
  if (!head.empty() && !pathid::detail::parse_double(head, k)) return false;
  double m = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') return false;
    if (!pathid::detail::parse_double(tail.substr(1), m) || m == 0.0) return false;
  }
  out = sign * k * std::numbers::pi / m;
  return std::isfinite(out);
}

class LineParser {
 public:
  LineParser(int line_no, std::vector<Token> tokens, std::vector<ParseError>& errors)
      : line_(line_no), tokens_(std::move(tokens)), errors_(errors) {}

  const std::vector<Token>& tokens() const { return tokens_; }

  void error(const Token& tok, std::string message, std::string expected = {}) {
    errors_.push_back({{line_, tok.column, static_cast<int>(tok.text.size())}, std::move(message), std::move(expected)});
  }

  // Error pointing just past the last token.
  void error_at_end(std::string message, std::string expected) {
    const auto& last = tokens_.back();
    errors_.push_back({{line_, last.column + static_cast<int>(last.text.size()), 0}, std::move(message), std::move(expected)});
  }

  bool arity(std::size_t min_args, std::size_t max_args, const char* expected) {
    const std::size_t args = tokens_.size() - 1;
    if (args < min_args) {
      error_at_end("missing argument to '" + std::string(tokens_[0].text) + "'", expected);
      return false;
    }
    if (args > max_args) {
      error(tokens_[max_args + 1], "unexpected token '" + std::string(tokens_[max_args + 1].text) + "'", "end of line");
      return false;
    }
    return true;
  }

  std::optional<std::string> path(const Token& tok) {
    if (!is_valid_path(tok.text) || is_loss_path(tok.text)) {
      error(tok, "invalid path '" + std::string(tok.text) + "'", "path name");
      return std::nullopt;
    }
    return std::string(tok.text);
  }

  std::optional<ModeLabel> label(const Token& tok) {
    const auto colon = tok.text.rfind(':');
    if (colon == std::string_view::npos) {
      error(tok, "malformed mode label '" + std::string(tok.text) + "'", "<path>:<mode>");
      return std::nullopt;
    }
    const std::string_view p = tok.text.substr(0, colon);
    int mode = 0;
    if (!is_valid_path(p) || is_loss_path(p)) {
      error(tok, "invalid path '" + std::string(p) + "'", "path name");
      return std::nullopt;
    }
    if (!parse_mode(tok.text.substr(colon + 1), mode)) {
      error(tok, "malformed mode '" + std::string(tok.text.substr(colon + 1)) + "'", "integer, H or V");
      return std::nullopt;
    }
    return ModeLabel{std::string(p), mode};
  }

  std::optional<int> integer(const Token& tok, std::string_view text) {
    int v = 0;
    if (!pathid::detail::parse_int(text, v)) {
      error(tok, "malformed integer '" + std::string(text) + "'", "integer");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> real(const Token& tok, std::string_view text) {
    double v = 0;
    if (!pathid::detail::parse_double(text, v) || !std::isfinite(v)) {
      error(tok, "malformed number '" + std::string(text) + "'", "float");
      return std::nullopt;
    }
    return v;
  }

 private:
  int line_;
  std::vector<Token> tokens_;
  std::vector<ParseError>& errors_;
};

}  // namespace detail

/// All diagnostics of the file are collected in one pass; the experiment is
/// only returned when there are none.
inline ParseResult parse(std::string_view text) {
  ParseResult result;
  auto& errors = result.errors;
  Experiment exp;
  std::optional<int> detectors_line, trigger_line, order_line, pairs_line;
  int line_no = 0;

  auto once = [&](std::optional<int>& seen, detail::LineParser& lp, const char* what) {
    if (seen) {
      lp.error(lp.tokens()[0], std::string("duplicate ") + what + " statement (first on line " + std::to_string(*seen) + ")");
      return false;
    }
    seen = line_no;
    return true;
  };

  while (true) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    auto tokens = detail::tokenize(line);
    if (!tokens.empty()) {
      detail::LineParser lp(line_no, std::move(tokens), errors);
      const auto& t = lp.tokens();
      const std::string_view kw = t[0].text;

      if (kw == "crystal") {
        if (lp.tokens().size() >= 3) {
          auto a = lp.label(t[1]);
          auto b = lp.label(t[2]);
          double g = kDefaultGain;
          std::optional<int> order;
          std::optional<std::vector<int>> modes;
          bool ok = a && b;
          std::set<std::string_view> keys;
          for (std::size_t k = 3; k < t.size(); ++k) {
            const auto eq = t[k].text.find('=');
            const std::string_view key = t[k].text.substr(0, eq);
            const std::string_view value = eq == std::string_view::npos ? std::string_view{} : t[k].text.substr(eq + 1);
            if (eq == std::string_view::npos || (key != "g" && key != "modes" && key != "order")) {
              lp.error(t[k], "unknown crystal option '" + std::string(t[k].text) + "'", "g=, modes= or order=");
              ok = false;
              continue;
            }
            if (!keys.insert(key).second) {
              lp.error(t[k], "duplicate crystal option '" + std::string(key) + "'");
              ok = false;
              continue;
            }
            if (key == "g") {
              auto v = lp.real(t[k], value);
              if (!v) ok = false;
              else if (!(*v > 0.0) || *v > kMaxGain) {
                lp.error(t[k], "gain g must be in (0, " + pathid::detail::format_double(kMaxGain) + "]", "float in (0, 0.5]");
                ok = false;
              } else {
                g = *v;
                if (g > kGainWarnThreshold)
                  result.warnings.push_back(std::to_string(line_no) + ":" + std::to_string(t[k].column) +
                                            ": gain g=" + pathid::detail::format_double(g) + " is outside the g << 1 regime");
              }
            } else if (key == "order") {
              auto v = lp.integer(t[k], value);
              if (!v) ok = false;
              else if (*v < 1) {
                lp.error(t[k], "expansion order must be >= 1", "positive integer");
                ok = false;
              } else {
                order = *v;
              }
            } else {
              std::vector<int> list;
              std::string_view rest = value;
              bool good = !rest.empty();
              while (good && !rest.empty()) {
                const auto comma = rest.find(',');
                int m = 0;
                good = detail::parse_mode(rest.substr(0, comma), m);
                list.push_back(m);
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                if (comma != std::string_view::npos && rest.empty()) good = false;
              }
              if (!good) {
                lp.error(t[k], "malformed mode list '" + std::string(value) + "'", "comma-separated modes");
                ok = false;
              } else {
                modes = std::move(list);
              }
            }
          }
          if (a && b && *a == *b) {
            lp.error(t[2], "crystal outputs must be distinct modes");
            ok = false;
          }
          if (ok) {
            if (modes) exp.elements.push_back(MultimodeCrystal{*a, *b, *modes, g, order});
            else exp.elements.push_back(Crystal{*a, *b, g, order});
          }
        } else {
          lp.arity(2, 5, "<path>:<mode>");
        }
      } else if (kw == "shift") {
        if (lp.arity(2, 2, "<path> <int>")) {
          auto p = lp.path(t[1]);
          auto d = lp.integer(t[2], t[2].text);
          if (p && d) exp.elements.push_back(ModeShifter{*p, *d});
        }
      } else if (kw == "phase") {
        if (lp.arity(2, 2, "<path> <angle>")) {
          auto p = lp.path(t[1]);
          double phi = 0;
          const bool good = detail::parse_angle(t[2].text, phi);
          if (!good) lp.error(t[2], "malformed angle '" + std::string(t[2].text) + "'", "float or multiple of pi");
          if (p && good) exp.elements.push_back(PhaseShifter{*p, phi});
        }
      } else if (kw == "misalign") {
        if (lp.arity(2, 2, "<path> T=<float>")) {
          auto p = lp.path(t[1]);
          std::optional<double> T;
          if (!t[2].text.starts_with("T=")) {
            lp.error(t[2], "expected transmissivity", "T=<float>");
          } else if ((T = lp.real(t[2], t[2].text.substr(2)))) {
            if (!(*T >= 0.0 && *T <= 1.0)) {
              lp.error(t[2], "transmissivity T must be in [0, 1]", "float in [0, 1]");
              T.reset();
            }
          }
          if (p && T) exp.elements.push_back(Misalignment{*p, *T});
        }
      } else if (kw == "relabel") {
        if (lp.arity(2, 2, "<from> <to>")) {
          auto from = lp.path(t[1]);
          auto to = lp.path(t[2]);
          if (from && to) exp.elements.push_back(Relabel{*from, *to});
        }
      } else if (kw == "detectors" || kw == "trigger") {
        const bool is_detectors = kw == "detectors";
        if (lp.arity(1, 1 << 20, "<path>") && once(is_detectors ? detectors_line : trigger_line, lp, is_detectors ? "detectors" : "trigger")) {
          for (std::size_t k = 1; k < t.size(); ++k) {
            std::vector<std::string> group;
            std::string_view rest = t[k].text;
            bool good = true;
            while (good) {
              const auto bar = rest.find('|');
              const std::string_view p = rest.substr(0, bar);
              if (!is_valid_path(p) || is_loss_path(p)) good = false;
              else group.emplace_back(p);
              if (bar == std::string_view::npos) break;
              rest = rest.substr(bar + 1);
            }
            if (!good || (!is_detectors && group.size() != 1)) {
              lp.error(t[k], "invalid " + std::string(kw) + " path '" + std::string(t[k].text) + "'",
                       is_detectors ? "path or path|path" : "path name");
              continue;
            }
            if (is_detectors) exp.detectors.emplace_back(std::move(group));
            else exp.triggers.push_back(group.front());
          }
        }
      } else if (kw == "order" || kw == "pairs") {
        const bool is_order = kw == "order";
        if (lp.arity(1, 1, "<int>") && once(is_order ? order_line : pairs_line, lp, is_order ? "order" : "pairs")) {
          auto v = lp.integer(t[1], t[1].text);
          if (v && is_order && *v < 1) lp.error(t[1], "expansion order must be >= 1", "positive integer");
          else if (v && !is_order && *v < 0) lp.error(t[1], "pairs must be >= 0", "non-negative integer");
          else if (v && is_order) exp.expansion_order = *v;
          else if (v) exp.max_pairs = *v;
        }
      } else {
        lp.error(t[0], "unknown keyword '" + std::string(kw) + "'",
                 "crystal, shift, phase, misalign, relabel, detectors, trigger, order or pairs");
      }
    }
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }

  if (!detectors_line) errors.push_back({{line_no, 1, 0}, "missing detectors statement", "detectors <path>..."});

  if (errors.empty()) {
    try {
      validate(exp);
      result.experiment = std::move(exp);
    } catch (const std::invalid_argument& e) {
      errors.push_back({{*detectors_line, 1, 0}, e.what(), {}});
    }
  }
  return result;
}

inline Experiment parse_or_throw(std::string_view text) {
  auto result = parse(text);
  if (!result.ok()) throw ParseFailure(std::move(result.errors));
  return std::move(*result.experiment);
}

namespace detail {

inline std::string label_text(const ModeLabel& l) { return l.path + ":" + std::to_string(l.mode); }

inline std::string crystal_options(double g, const std::optional<int>& order) {
  std::string out = " g=" + pathid::detail::format_double(g);
  if (order) out += " order=" + std::to_string(*order);
  return out;
}

}  // namespace detail

/// Canonical text: order, pairs (when set), detectors, trigger (when set),
/// then one line per element.
inline std::string serialize(const Experiment& exp) {
  std::string out = "order " + std::to_string(exp.expansion_order) + "\n";
  if (exp.max_pairs) out += "pairs " + std::to_string(*exp.max_pairs) + "\n";
  out += "detectors";
  for (const auto& d : exp.detectors) {
    out += ' ';
    for (std::size_t i = 0; i < d.paths.size(); ++i) out += (i ? "|" : "") + d.paths[i];
  }
  out += '\n';
  if (!exp.triggers.empty()) {
    out += "trigger";
    for (const auto& t : exp.triggers) out += " " + t;
    out += '\n';
  }
  for (const auto& element : exp.elements) {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, Crystal>) {
            out += "crystal " + detail::label_text(e.out_a) + " " + detail::label_text(e.out_b) +
                   detail::crystal_options(e.g, e.order);
          } else if constexpr (std::is_same_v<E, MultimodeCrystal>) {
            out += "crystal " + detail::label_text(e.out_a) + " " + detail::label_text(e.out_b) +
                   detail::crystal_options(e.g, e.order) + " modes=";
            for (std::size_t i = 0; i < e.modes.size(); ++i) out += (i ? "," : "") + std::to_string(e.modes[i]);
          } else if constexpr (std::is_same_v<E, ModeShifter>) {
            out += "shift " + e.path + " " + std::to_string(e.delta);
          } else if constexpr (std::is_same_v<E, PhaseShifter>) {
            out += "phase " + e.path + " " + pathid::detail::format_double(e.phi);
          } else if constexpr (std::is_same_v<E, Misalignment>) {
            out += "misalign " + e.path + " T=" + pathid::detail::format_double(e.T);
          } else if constexpr (std::is_same_v<E, Relabel>) {
            out += "relabel " + e.from_path + " " + e.to_path;
          }
        },
        element);
    out += '\n';
  }
  return out;
}

}  // namespace pathid::dsl
