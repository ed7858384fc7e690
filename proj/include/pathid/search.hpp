// Seeded rejection sampling over random element lists. Each trial draws from
// its own generator derived from (seed, trial index), so hit lists do not
// depend on how trials are spread across workers.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <iterator>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pathid/analysis.hpp"
#include "pathid/dsl.hpp"
#include "pathid/experiment.hpp"

namespace pathid::search {

/// One sampleable element kind with its discrete parameter choices.
struct PoolEntry {
  enum class Kind { Crystal, MultimodeCrystal, Shift, Phase, Misalign, Relabel };

  Kind kind = Kind::Crystal;
  std::vector<int> modes{0};       // crystal: port modes drawn independently from this list
  int dimension = 2;               // multimode crystal: modes 0..dimension-1
  std::vector<int> shifts{1};      // shift deltas
  std::vector<double> values{};    // phases or transmissivities

  static PoolEntry crystal(int mode) { return {Kind::Crystal, {mode}, 2, {}, {}}; }
  static PoolEntry crystal(std::vector<int> modes) { return {Kind::Crystal, std::move(modes), 2, {}, {}}; }
  static PoolEntry multimode(int dimension) { return {Kind::MultimodeCrystal, {0}, dimension, {}, {}}; }
  static PoolEntry shift(std::vector<int> deltas = {1}) { return {Kind::Shift, {}, 0, std::move(deltas), {}}; }
  static PoolEntry phase(std::vector<double> phis) { return {Kind::Phase, {}, 0, {}, std::move(phis)}; }
  static PoolEntry misalign(std::vector<double> Ts) { return {Kind::Misalign, {}, 0, {}, std::move(Ts)}; }
  static PoolEntry relabel() { return {Kind::Relabel, {}, 0, {}, {}}; }
};

struct Acceptance {
  enum class Kind { Fidelity, SchmidtRank };

  Kind kind = Kind::Fidelity;
  StateVector target;
  double threshold = 1.0 - 1e-6;
  std::vector<int> srv;  // sorted descending

  static Acceptance fidelity(StateVector target, double threshold = 1.0 - 1e-6) {
    return {Kind::Fidelity, std::move(target), threshold, {}};
  }
  static Acceptance schmidt_rank(std::vector<int> ranks) {
    std::sort(ranks.begin(), ranks.end(), std::greater<>());
    return {Kind::SchmidtRank, {}, 1.0, std::move(ranks)};
  }
};

struct SearchConfig {
  std::vector<PoolEntry> pool;
  std::vector<std::string> paths{"a", "b", "c", "d"};  // paths the sampler draws from
  std::vector<Detector> detectors{Detector{"a"}, Detector{"b"}, Detector{"c"}, Detector{"d"}};
  std::vector<std::string> triggers;
  std::vector<Element> prefix;  // fixed elements placed before the sampled ones
  int min_elements = 1;
  int max_elements = 4;
  std::uint64_t budget = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double gain = kDefaultGain;
  int expansion_order = 2;
  std::optional<int> max_pairs;
  bool include_annihilation = true;
  Acceptance acceptance;
};

struct SearchHit {
  Experiment experiment;
  double score = 0.0;
  std::uint64_t trial_index = 0;
};

inline void validate(const SearchConfig& config) {
  if (config.pool.empty()) throw std::invalid_argument("search pool is empty");
  if (config.budget < 1) throw std::invalid_argument("search budget must be >= 1");
  if (config.min_elements < 0 || config.max_elements < config.min_elements)
    throw std::invalid_argument("need 0 <= min_elements <= max_elements");
  if (!(config.acceptance.threshold > 0.0 && config.acceptance.threshold <= 1.0))
    throw std::invalid_argument("acceptance threshold must be in (0, 1]");
  if (config.paths.size() < 2) throw std::invalid_argument("search needs at least two paths");
  for (const auto& e : config.pool) {
    if ((e.kind == PoolEntry::Kind::Crystal && e.modes.empty()) ||
        (e.kind == PoolEntry::Kind::MultimodeCrystal && e.dimension < 1) ||
        (e.kind == PoolEntry::Kind::Shift && e.shifts.empty()) ||
        ((e.kind == PoolEntry::Kind::Phase || e.kind == PoolEntry::Kind::Misalign) && e.values.empty()))
      throw std::invalid_argument("pool entry has no parameter choices");
  }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

namespace detail {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& choices) {
  std::uniform_int_distribution<std::size_t> dist(0, choices.size() - 1);
  return choices[dist(rng)];
}

inline std::pair<std::string, std::string> pick_two(std::mt19937_64& rng, const std::vector<std::string>& paths) {
  std::uniform_int_distribution<std::size_t> first(0, paths.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, paths.size() - 2);
  const std::size_t i = first(rng);
  std::size_t j = second(rng);
  if (j >= i) ++j;
  return {paths[i], paths[j]};
}

}  // namespace detail

inline Experiment random_setup(std::mt19937_64& rng, const SearchConfig& config) {
  Experiment exp;
  exp.detectors = config.detectors;
  exp.triggers = config.triggers;
  exp.expansion_order = config.expansion_order;
  exp.max_pairs = config.max_pairs;
  exp.elements = config.prefix;

  std::uniform_int_distribution<int> count(config.min_elements, config.max_elements);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const PoolEntry& entry = detail::pick(rng, config.pool);
    switch (entry.kind) {
      case PoolEntry::Kind::Crystal: {
        auto [p, q] = detail::pick_two(rng, config.paths);
        const int ma = detail::pick(rng, entry.modes);
        const int mb = detail::pick(rng, entry.modes);
        exp.elements.push_back(Crystal{{p, ma}, {q, mb}, config.gain, {}});
        break;
      }
      case PoolEntry::Kind::MultimodeCrystal: {
        auto [p, q] = detail::pick_two(rng, config.paths);
        std::vector<int> modes(entry.dimension);
        for (int l = 0; l < entry.dimension; ++l) modes[l] = l;
        exp.elements.push_back(MultimodeCrystal{{p, 0}, {q, 0}, modes, config.gain, {}});
        break;
      }
      case PoolEntry::Kind::Shift:
        exp.elements.push_back(ModeShifter{detail::pick(rng, config.paths), detail::pick(rng, entry.shifts)});
        break;
      case PoolEntry::Kind::Phase:
        exp.elements.push_back(PhaseShifter{detail::pick(rng, config.paths), detail::pick(rng, entry.values)});
        break;
      case PoolEntry::Kind::Misalign:
        exp.elements.push_back(Misalignment{detail::pick(rng, config.paths), detail::pick(rng, entry.values)});
        break;
      case PoolEntry::Kind::Relabel: {
        auto [p, q] = detail::pick_two(rng, config.paths);
        exp.elements.push_back(Relabel{p, q});
        break;
      }
    }
  }
  return exp;
}

struct EvaluateOptions {
  bool include_annihilation = true;
};

/// Fidelity with the target, or 1/0 for an exact SRV match over the detector
/// parties (triggers count as environment). A setup whose post-selection keeps
/// nothing scores 0.
inline double evaluate(const Experiment& exp, const Acceptance& acceptance, const EvaluateOptions& opts = {}) {
  if (exp.click_count() == 0) return 0.0;
  RunOptions run_opts;
  run_opts.include_annihilation = opts.include_annihilation;
  const auto selected = post_select(run(exp, run_opts), exp);
  if (!(selected.success_weight > 0.0)) return 0.0;
  if (acceptance.kind == Acceptance::Kind::Fidelity) return fidelity(selected.state, acceptance.target);
  try {
    return schmidt_rank_vector(selected.state, exp.detectors).sorted_descending() == acceptance.srv ? 1.0 : 0.0;
  } catch (const std::invalid_argument&) {
    return 0.0;
  }
}

inline bool accepts(const Acceptance& acceptance, double score) {
  return acceptance.kind == Acceptance::Kind::Fidelity ? score >= acceptance.threshold : score == 1.0;
}

/// Setup drawn for a given trial, independent of any other trial.
inline Experiment trial_setup(const SearchConfig& config, std::uint64_t trial) {
  auto rng = trial_rng(config.seed, trial);
  return random_setup(rng, config);
}

inline std::vector<SearchHit> search(const SearchConfig& config) {
  validate(config);
  const EvaluateOptions eval{config.include_annihilation};
  const unsigned workers = std::max(1u, config.workers);
  std::atomic<std::uint64_t> next{0};
  std::vector<std::vector<SearchHit>> found(workers);
  std::mutex error_mutex;
  std::exception_ptr error;

  auto work = [&](unsigned w) {
    try {
      for (std::uint64_t trial = next++; trial < config.budget; trial = next++) {
        Experiment exp = trial_setup(config, trial);
        const double score = evaluate(exp, config.acceptance, eval);
        if (accepts(config.acceptance, score)) found[w].push_back({std::move(exp), score, trial});
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = config.budget;
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<SearchHit> hits;
  for (auto& v : found) std::move(v.begin(), v.end(), std::back_inserter(hits));
  std::sort(hits.begin(), hits.end(), [](const auto& x, const auto& y) { return x.trial_index < y.trial_index; });
  return hits;
}

/// Comma-separated pool tokens: crystal:H, crystal:V, crystal:0-2 (port modes
/// drawn from a range), multimode:3, shift:1, shift:-1, phase:pi/2,
/// misalign:0.9, relabel.
inline std::vector<PoolEntry> parse_pool(std::string_view text) {
  std::vector<PoolEntry> pool;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view tok = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto colon = tok.find(':');
    const std::string_view kind = tok.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : tok.substr(colon + 1);
    auto fail = [&] { throw std::invalid_argument("bad pool entry '" + std::string(tok) + "'"); };
    int a = 0, b = 0;
    double x = 0;
    if (kind == "crystal") {
      const auto dash = arg.find('-', 1);
      if (dash != std::string_view::npos) {
        if (!dsl::detail::parse_mode(arg.substr(0, dash), a) || !dsl::detail::parse_mode(arg.substr(dash + 1), b) || b < a) fail();
        std::vector<int> modes;
        for (int m = a; m <= b; ++m) modes.push_back(m);
        pool.push_back(PoolEntry::crystal(modes));
      } else {
        if (!dsl::detail::parse_mode(arg, a)) fail();
        pool.push_back(PoolEntry::crystal(a));
      }
    } else if (kind == "multimode") {
      if (!pathid::detail::parse_int(arg, a) || a < 1) fail();
      pool.push_back(PoolEntry::multimode(a));
    } else if (kind == "shift") {
      if (arg.empty()) a = 1;
      else if (!pathid::detail::parse_int(arg, a)) fail();
      pool.push_back(PoolEntry::shift({a}));
    } else if (kind == "phase") {
      if (!dsl::detail::parse_angle(arg, x)) fail();
      pool.push_back(PoolEntry::phase({x}));
    } else if (kind == "misalign") {
      if (!pathid::detail::parse_double(arg, x) || x < 0.0 || x > 1.0) fail();
      pool.push_back(PoolEntry::misalign({x}));
    } else if (kind == "relabel" && arg.empty()) {
      pool.push_back(PoolEntry::relabel());
    } else {
      fail();
    }
  }
  if (pool.empty()) throw std::invalid_argument("empty pool");
  return pool;
}

}  // namespace pathid::search
