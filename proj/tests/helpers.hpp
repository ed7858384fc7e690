#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "pathid/pathid.hpp"

namespace testing_helpers {

inline std::string corpus_path(const std::string& name) { return std::string(PATHID_EXPERIMENTS_DIR) + "/" + name; }

inline std::string read_corpus(const std::string& name) {
  std::ifstream in(corpus_path(name));
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline pathid::Experiment load(const std::string& name) { return pathid::dsl::parse_or_throw(read_corpus(name)); }

inline const std::vector<std::string>& corpus_files() {
  static const std::vector<std::string> files{
      "induced_coherence.exp", "ghz4_polarization.exp", "ghz6_polarization.exp", "w4.exp",
      "ghz4_dim3.exp",         "two_photon_dim4.exp",   "ghz6_dim5.exp",         "srv_422.exp",
      "multimode_pair.exp",    "srv_3322.exp",          "ghz4_cross.exp"};
  return files;
}

inline void set_transmissivity(pathid::Experiment& exp, double T) {
  for (auto& e : exp.elements)
    if (auto* m = std::get_if<pathid::Misalignment>(&e)) m->T = T;
}

inline void set_gain(pathid::Experiment& exp, double g) {
  for (auto& e : exp.elements) {
    if (auto* c = std::get_if<pathid::Crystal>(&e)) c->g = g;
    if (auto* c = std::get_if<pathid::MultimodeCrystal>(&e)) c->g = g;
  }
}

// Small random superposition over a fixed label set, counts 0..max_count.
inline pathid::StateVector random_state(std::mt19937_64& rng, const std::vector<pathid::ModeLabel>& labels,
                                        int terms = 6, int max_count = 3) {
  std::uniform_int_distribution<int> count(0, max_count);
  std::normal_distribution<double> gauss;
  pathid::StateVector s;
  for (int t = 0; t < terms; ++t) {
    pathid::Occupation occ;
    for (const auto& l : labels) occ.add(l, count(rng));
    s.accumulate(occ, {gauss(rng), gauss(rng)});
  }
  return s;
}

inline double distance(const pathid::StateVector& a, const pathid::StateVector& b) {
  return pathid::norm(a - b);
}

}  // namespace testing_helpers
