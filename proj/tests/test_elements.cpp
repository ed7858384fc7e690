#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace pathid;
using testing_helpers::distance;
using testing_helpers::random_state;

namespace {

const ModeLabel aH{"a", kH};
const ModeLabel bH{"b", kH};

Occupation pair(const ModeLabel& x, const ModeLabel& y, int n = 1) { return make_occupation({{x, n}, {y, n}}); }

// Hand expansion of sum_k g^k/k! (a+b+)^k |vac> with a+ applied k times.
StateVector creation_series(const std::vector<std::pair<ModeLabel, ModeLabel>>& pairs, double g, int order) {
  StateVector result = vacuum();
  StateVector power = vacuum();
  double coeff = 1.0;
  for (int k = 1; k <= order; ++k) {
    StateVector next;
    for (const auto& [x, y] : pairs) next = next + apply_create(apply_create(power, x), y);
    power = next;
    coeff *= g / k;
    result = result + scale(power, coeff);
  }
  return result;
}

}  // namespace

TEST(Crystal, FirstOrderOnVacuum) {
  ExpansionOptions opts{1, true, std::nullopt};
  auto s = apply_crystal(vacuum(), Crystal{aH, bH, 0.1, {}}, opts);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.amplitude({}), Amplitude(1.0));
  EXPECT_DOUBLE_EQ(s.amplitude(pair(aH, bH)).real(), 0.1);
}

TEST(Crystal, SecondOrderOnVacuum) {
  const double g = 0.1;
  auto s = apply_crystal(vacuum(), Crystal{aH, bH, g, {}});
  // X^2|0> = 2|2,2> - |0>
  EXPECT_NEAR(s.amplitude({}).real(), 1.0 - g * g / 2, 1e-16);
  EXPECT_NEAR(s.amplitude(pair(aH, bH)).real(), g, 1e-16);
  EXPECT_NEAR(s.amplitude(pair(aH, bH, 2)).real(), g * g, 1e-16);
  EXPECT_EQ(s.size(), 3u);
}

TEST(Crystal, ThirdOrderFiringAmplitude) {
  const double g = 0.1;
  auto s = apply_crystal(vacuum(), Crystal{aH, bH, g, 3});
  // X^3|0> = 6|3,3> - 5|1,1>
  EXPECT_NEAR(s.amplitude(pair(aH, bH)).real(), g - 5 * g * g * g / 6, 1e-16);
  EXPECT_NEAR(s.amplitude(pair(aH, bH, 3)).real(), g * g * g, 1e-16);
}

TEST(Crystal, StimulatedEmissionDressing) {
  const double g = 0.1;
  auto seeded = StateVector::basis(make_occupation({{bH, 1}}));
  auto s = apply_crystal(seeded, Crystal{aH, bH, g, {}});
  // <1_b| X^2 |1_b> = -(n_a n_b + (n_a+1)(n_b+1)) = -2
  EXPECT_NEAR(s.amplitude(make_occupation({{bH, 1}})).real(), 1.0 - g * g, 1e-16);
  EXPECT_NEAR(s.amplitude(make_occupation({{aH, 1}, {bH, 2}})).real(), g * std::sqrt(2.0), 1e-16);
}

TEST(Crystal, CreationOnlyMatchesOperatorSeries) {
  ExpansionOptions opts{3, false, std::nullopt};
  auto s = apply_crystal(vacuum(), Crystal{aH, bH, 0.2, {}}, opts);
  EXPECT_LT(distance(s, creation_series({{aH, bH}}, 0.2, 3)), 1e-15);
}

TEST(Crystal, DisjointCrystalsGiveProductTerm) {
  const double g = 0.1;
  const ModeLabel c{"c", 0}, d{"d", 0};
  auto s = apply_crystal(apply_crystal(vacuum(), Crystal{aH, bH, g, {}}), Crystal{c, d, g, {}});
  auto occ = make_occupation({{aH, 1}, {bH, 1}, {c, 1}, {d, 1}});
  EXPECT_NEAR(s.amplitude(occ).real(), g * g, 1e-16);
}

TEST(Crystal, LowOrderUnitarity) {
  for (double g : {0.5, 0.2, 0.1, 0.01}) {
    auto s = apply_crystal(vacuum(), Crystal{aH, bH, g, {}});
    EXPECT_LE(std::abs(norm(s) - 1.0), std::pow(g, 4)) << g;
  }
}

TEST(Crystal, PhotonCapDropsHighTerms) {
  ExpansionOptions opts{2, true, 2};
  auto s = apply_crystal(vacuum(), Crystal{aH, bH, 0.1, {}}, opts);
  EXPECT_EQ(s.size(), 2u);
  // The vacuum correction travels through the 2-photon term and survives.
  EXPECT_NEAR(s.amplitude({}).real(), 1.0 - 0.005, 1e-16);
}

TEST(MultimodeCrystal, FirstOrderIsHighDimensionalPair) {
  const double g = 0.1;
  ExpansionOptions opts{1, true, std::nullopt};
  auto s = apply_multimode_crystal(vacuum(), MultimodeCrystal{{"a", 0}, {"b", 0}, {0, 1, 2}, g, {}}, opts);
  for (int l = 0; l < 3; ++l) EXPECT_DOUBLE_EQ(s.amplitude(pair({"a", l}, {"b", l})).real(), g);
  EXPECT_EQ(s.size(), 4u);
}

TEST(MultimodeCrystal, SingleModeReducesToCrystal) {
  auto s = apply_multimode_crystal(vacuum(), MultimodeCrystal{aH, bH, {0}, 0.1, {}});
  EXPECT_EQ(s, apply_crystal(vacuum(), Crystal{aH, bH, 0.1, {}}));
}

TEST(MultimodeCrystal, FourPhotonPartIsSquaredSum) {
  const double g = 0.1;
  auto s = apply_multimode_crystal(vacuum(), MultimodeCrystal{{"a", 0}, {"b", 0}, {0, 1, 2}, g, {}});
  std::vector<std::pair<ModeLabel, ModeLabel>> pairs;
  for (int l = 0; l < 3; ++l) pairs.push_back({{"a", l}, {"b", l}});
  auto oracle = photon_sector(creation_series(pairs, g, 2), 4);
  EXPECT_LT(distance(photon_sector(s, 4), oracle), 1e-16);
  EXPECT_EQ(photon_sector(s, 4).size(), 6u);
}

TEST(MultimodeCrystal, ModesAreOffsetsFromBase) {
  ExpansionOptions opts{1, true, std::nullopt};
  auto s = apply_multimode_crystal(vacuum(), MultimodeCrystal{{"a", 2}, {"b", -1}, {0, 1}, 0.1, {}}, opts);
  EXPECT_DOUBLE_EQ(s.amplitude(pair({"a", 3}, {"b", 0})).real(), 0.1);
  EXPECT_DOUBLE_EQ(s.amplitude(pair({"a", 2}, {"b", -1})).real(), 0.1);
}

TEST(ModeShifter, ShiftsAllPhotonsInPath) {
  auto one = StateVector::basis(make_occupation({{{"a", 0}, 1}}));
  EXPECT_EQ(apply_mode_shift(one, {"a", 1}), StateVector::basis(make_occupation({{{"a", 1}, 1}})));
  EXPECT_EQ(apply_mode_shift(one, {"a", 0}), one);
  auto two = StateVector::basis(make_occupation({{{"a", 0}, 2}}));
  EXPECT_EQ(apply_mode_shift(two, {"a", 1}), StateVector::basis(make_occupation({{{"a", 1}, 2}})));
  EXPECT_EQ(apply_mode_shift(one, {"b", 1}), one);
}

TEST(PhaseShifter, PhasePerPhoton) {
  auto one = StateVector::basis(make_occupation({{{"b", 0}, 1}}));
  auto s = apply_phase_shift(one, {"b", std::numbers::pi / 2});
  EXPECT_NEAR(std::abs(s.amplitude(make_occupation({{{"b", 0}, 1}})) - Amplitude(0, 1)), 0.0, 1e-16);
  EXPECT_EQ(apply_phase_shift(one, {"b", 0.0}), one);
  auto two = StateVector::basis(make_occupation({{{"b", 0}, 2}}));
  auto t = apply_phase_shift(two, {"b", std::numbers::pi / 2});
  EXPECT_NEAR(std::abs(t.amplitude(make_occupation({{{"b", 0}, 2}})) - Amplitude(-1, 0)), 0.0, 1e-15);
}

TEST(Misalignment, SinglePhoton) {
  auto one = StateVector::basis(make_occupation({{{"a", 0}, 1}}));
  EXPECT_EQ(apply_misalignment(one, {"a", 1.0}, loss_path(1)), one);
  auto s = apply_misalignment(one, {"a", 0.9}, loss_path(1));
  EXPECT_DOUBLE_EQ(s.amplitude(make_occupation({{{"a", 0}, 1}})).real(), 0.9);
  EXPECT_NEAR(s.amplitude(make_occupation({{{"loss#1", 0}, 1}})).real(), std::sqrt(0.19), 1e-16);
}

TEST(Misalignment, TwoPhotonsMatchBinomialOracle) {
  const double T = 0.7, R = std::sqrt(1 - T * T);
  auto two = StateVector::basis(make_occupation({{{"a", 0}, 2}}));
  auto s = apply_misalignment(two, {"a", T}, loss_path(4));
  // (T a+ + R l+)^2 |0> / sqrt(2)
  StateVector oracle;
  const ModeLabel a{"a", 0}, l{"loss#4", 0};
  oracle = oracle + scale(apply_create(apply_create(vacuum(), a), a), T * T);
  oracle = oracle + scale(apply_create(apply_create(vacuum(), a), l), 2 * T * R);
  oracle = oracle + scale(apply_create(apply_create(vacuum(), l), l), R * R);
  oracle = scale(oracle, 1 / std::sqrt(2.0));
  EXPECT_LT(distance(s, oracle), 1e-15);
  EXPECT_NEAR(s.amplitude(make_occupation({{a, 1}, {l, 1}})).real(), std::sqrt(2.0) * T * R, 1e-15);
}

TEST(Misalignment, RejectsBadLossPath) {
  auto one = StateVector::basis(make_occupation({{{"a", 0}, 1}}));
  EXPECT_THROW(apply_misalignment(one, {"a", 0.5}, "b"), std::invalid_argument);
  auto occupied = StateVector::basis(make_occupation({{{"a", 0}, 1}, {{"loss#1", 0}, 1}}));
  EXPECT_THROW(apply_misalignment(occupied, {"a", 0.5}, loss_path(1)), std::invalid_argument);
  EXPECT_THROW(apply_misalignment(one, {"a", 1.5}, loss_path(1)), std::invalid_argument);
}

TEST(Relabel, MergesWithBosonicFactor) {
  auto b = StateVector::basis(make_occupation({{{"b", 0}, 1}}));
  EXPECT_EQ(apply_relabel(b, {"b", "d"}), StateVector::basis(make_occupation({{{"d", 0}, 1}})));
  EXPECT_EQ(apply_relabel(b, {"x", "d"}), b);
  auto bd = StateVector::basis(make_occupation({{{"b", 0}, 1}, {{"d", 0}, 1}}));
  // a+_d a+_d |0> = sqrt(2) |2_d>
  auto oracle = apply_create(apply_create(vacuum(), {"d", 0}), {"d", 0});
  EXPECT_LT(distance(apply_relabel(bd, {"b", "d"}), oracle), 1e-15);
}

TEST(Validate, ParameterRanges) {
  EXPECT_THROW(validate(Element{Crystal{aH, bH, 0.6, {}}}), std::invalid_argument);
  EXPECT_THROW(validate(Element{Crystal{aH, bH, 0.0, {}}}), std::invalid_argument);
  EXPECT_THROW(validate(Element{Crystal{aH, aH, 0.1, {}}}), std::invalid_argument);
  EXPECT_THROW(validate(Element{Crystal{aH, bH, 0.1, 0}}), std::invalid_argument);
  EXPECT_EQ(validate(Element{Crystal{aH, bH, 0.3, {}}}).size(), 1u);
  EXPECT_TRUE(validate(Element{Crystal{aH, bH, 0.1, {}}}).empty());
  EXPECT_THROW(validate(Element{Misalignment{"a", -0.1}}), std::invalid_argument);
  EXPECT_THROW(validate(Element{MultimodeCrystal{aH, bH, {}, 0.1, {}}}), std::invalid_argument);
  EXPECT_THROW(validate(Element{ModeShifter{"", 1}}), std::invalid_argument);
  Misalignment m{"a", 0.6};
  EXPECT_NEAR(m.T * m.T + m.reflectivity() * m.reflectivity(), 1.0, 1e-16);
}

// Properties.

TEST(ElementsProperty, MisalignmentPreservesNorm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  const std::vector<ModeLabel> labels{{"a", 0}, {"a", 1}, {"b", 0}};
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_state(rng, labels);
    auto out = apply_misalignment(s, {"a", t(rng)}, loss_path(1));
    EXPECT_NEAR(norm(out), norm(s), 1e-12 * norm(s));
  }
}

TEST(ElementsProperty, DisjointCrystalsCommute) {
  std::mt19937_64 rng(4);
  const std::vector<ModeLabel> labels{{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}};
  const Crystal x{{"a", 0}, {"b", 0}, 0.1, {}};
  const Crystal y{{"c", 0}, {"d", 0}, 0.15, {}};
  for (bool annihilation : {true, false}) {
    ExpansionOptions opts{2, annihilation, 8};
    for (int trial = 0; trial < 30; ++trial) {
      auto s = random_state(rng, labels, 4, 1);
      auto xy = apply_crystal(apply_crystal(s, x, opts), y, opts);
      auto yx = apply_crystal(apply_crystal(s, y, opts), x, opts);
      EXPECT_LT(distance(xy, yx), 1e-15 * (1 + norm(s)));
    }
  }
}

TEST(ElementsProperty, ShiftAndPhaseCommuteOnDisjointPaths) {
  std::mt19937_64 rng(5);
  const std::vector<ModeLabel> labels{{"a", 0}, {"a", 2}, {"b", 1}};
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_state(rng, labels);
    auto sp = apply_phase_shift(apply_mode_shift(s, {"a", 3}), {"b", 0.7});
    auto ps = apply_mode_shift(apply_phase_shift(s, {"b", 0.7}), {"a", 3});
    EXPECT_EQ(sp, ps);
    EXPECT_EQ(apply_mode_shift(apply_mode_shift(s, {"a", 3}), {"a", -3}), s);
  }
}
