#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace pathid;
using testing_helpers::load;
using testing_helpers::read_corpus;

namespace {

dsl::ParseError first_error(std::string_view text) {
  auto r = dsl::parse(text);
  EXPECT_FALSE(r.ok()) << text;
  return r.errors.empty() ? dsl::ParseError{} : r.errors.front();
}

}  // namespace

TEST(Dsl, ParsesStatements) {
  auto exp = dsl::parse_or_throw(
      "# comment\n"
      "order 3\n"
      "pairs 2\n"
      "crystal a:H b:V g=0.05 order=1\n"
      "shift a -1\n"
      "phase b pi/2\n"
      "misalign a T=0.9\n"
      "relabel b c\n"
      "detectors a c\n");
  EXPECT_EQ(exp.expansion_order, 3);
  EXPECT_EQ(exp.max_pairs, 2);
  ASSERT_EQ(exp.elements.size(), 5u);
  EXPECT_EQ(std::get<Crystal>(exp.elements[0]), (Crystal{{"a", kH}, {"b", kV}, 0.05, 1}));
  EXPECT_EQ(std::get<ModeShifter>(exp.elements[1]), (ModeShifter{"a", -1}));
  EXPECT_DOUBLE_EQ(std::get<PhaseShifter>(exp.elements[2]).phi, std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(std::get<Misalignment>(exp.elements[3]).T, 0.9);
  EXPECT_EQ(std::get<Relabel>(exp.elements[4]).to_path, "c");
  EXPECT_EQ(exp.detectors.size(), 2u);
}

TEST(Dsl, ModeAliasesAndAngles) {
  auto a = dsl::parse_or_throw("crystal a:H b:V\ndetectors a b\n");
  auto b = dsl::parse_or_throw("crystal a:0 b:1\ndetectors a b\n");
  EXPECT_EQ(a, b);
  for (auto [text, value] : std::vector<std::pair<std::string, double>>{
           {"pi", std::numbers::pi}, {"-3pi/2", -1.5 * std::numbers::pi}, {"2*pi/3", 2 * std::numbers::pi / 3},
           {"0.25", 0.25}, {"pi/4", std::numbers::pi / 4}}) {
    auto exp = dsl::parse_or_throw("phase a " + text + "\ndetectors a\n");
    EXPECT_NEAR(std::get<PhaseShifter>(exp.elements[0]).phi, value, 1e-15) << text;
  }
}

TEST(Dsl, WhitespaceAndCommentsNormalize) {
  auto a = dsl::parse_or_throw("crystal a:0 b:0 g=0.1\ndetectors a b\n");
  auto b = dsl::parse_or_throw("\n   crystal\ta:0    b:0  g=0.1   # pump\n\n detectors a  b\r\n");
  EXPECT_EQ(a, b);
  EXPECT_EQ(dsl::serialize(a), dsl::serialize(b));
}

TEST(Dsl, DetectorGroupsAndTriggers) {
  auto exp = dsl::parse_or_throw("crystal a:0 d:0\ncrystal c:0 d:0\ndetectors a|c d\ntrigger t\n");
  ASSERT_EQ(exp.detectors.size(), 2u);
  EXPECT_EQ(exp.detectors[0].paths, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(exp.triggers, (std::vector<std::string>{"t"}));
}

TEST(Dsl, MultimodeCrystal) {
  auto exp = dsl::parse_or_throw("crystal a:0 b:0 modes=0,1,2\ndetectors a b\n");
  const auto& m = std::get<MultimodeCrystal>(exp.elements.at(0));
  EXPECT_EQ(m.modes, (std::vector<int>{0, 1, 2}));
}

TEST(DslErrors, EmptyFile) {
  auto e = first_error("");
  EXPECT_EQ(e.message, "missing detectors statement");
  EXPECT_EQ(e.span.column, 1);
}

TEST(DslErrors, TransmissivityOutOfRange) {
  auto e = first_error("crystal a:0 b:0\nmisalign a T=1.5\ndetectors a b\n");
  EXPECT_EQ(e.span, (dsl::SourceSpan{2, 12, 5}));
  EXPECT_NE(e.message.find("transmissivity"), std::string::npos);
  EXPECT_EQ(dsl::to_string(e).substr(0, 5), "2:12:");
}

TEST(DslErrors, UnknownKeyword) {
  auto e = first_error("detectors a\nbeamsplitter a b\n");
  EXPECT_EQ(e.span, (dsl::SourceSpan{2, 1, 12}));
  EXPECT_NE(e.message.find("unknown keyword"), std::string::npos);
}

TEST(DslErrors, MalformedNumber) {
  auto e = first_error("crystal a:0 b:0 g=0.1x\ndetectors a b\n");
  EXPECT_EQ(e.span.line, 1);
  EXPECT_EQ(e.span.column, 17);
  EXPECT_NE(e.message.find("malformed number"), std::string::npos);
  EXPECT_EQ(first_error("shift a two\ndetectors a\n").span.column, 9);
}

TEST(DslErrors, DuplicateStatements) {
  auto e = first_error("detectors a b\ncrystal a:0 b:0\ndetectors a b\n");
  EXPECT_EQ(e.span.line, 3);
  EXPECT_NE(e.message.find("duplicate detectors"), std::string::npos);
  EXPECT_NE(first_error("order 2\norder 3\ndetectors a\n").message.find("duplicate order"), std::string::npos);
}

TEST(DslErrors, ReportsEveryBadLine) {
  auto r = dsl::parse("crystal a:0 b:0 g=2\nphase a nope\nshift\ndetectors a b\n");
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.errors[0].span.line, 1);
  EXPECT_EQ(r.errors[1].span.line, 2);
  EXPECT_EQ(r.errors[2].span.line, 3);
  EXPECT_THROW(dsl::parse_or_throw("shift\n"), dsl::ParseFailure);
}

TEST(DslSerialize, EmptyExperiment) {
  Experiment exp;
  exp.detectors = {Detector{"a"}, Detector{"b"}};
  const auto text = dsl::serialize(exp);
  EXPECT_EQ(text, "order 2\ndetectors a b\n");
  EXPECT_EQ(dsl::parse_or_throw(text), exp);
}

TEST(DslSerialize, GeneratedLayoutRoundTrip) {
  auto layout = ghz_layout(4, 3);
  EXPECT_EQ(dsl::parse_or_throw(dsl::serialize(layout)), layout);
  auto builder = two_photon_builder({{0.3, 0.1}, {0.0, 0.0}, {-0.2, 0.5}});
  EXPECT_EQ(dsl::parse_or_throw(dsl::serialize(builder)), builder);
}

class CorpusRoundTrip : public ::testing::TestWithParam<std::string> {};

TEST_P(CorpusRoundTrip, ParseSerializeParse) {
  auto exp = load(GetParam());
  const auto text = dsl::serialize(exp);
  auto again = dsl::parse_or_throw(text);
  EXPECT_EQ(again, exp);
  EXPECT_EQ(dsl::serialize(again), text);
  EXPECT_EQ(serialize_state(run(again)), serialize_state(run(exp)));
}

INSTANTIATE_TEST_SUITE_P(Corpus, CorpusRoundTrip, ::testing::ValuesIn(testing_helpers::corpus_files()),
                         [](const auto& info) { return info.param.substr(0, info.param.find('.')); });

TEST(DslProperty, RandomExperimentsRoundTrip) {
  std::mt19937_64 rng(77);
  search::SearchConfig cfg;
  cfg.pool = search::parse_pool("crystal:H,crystal:V,crystal:0-2,multimode:3,shift:1,phase:pi/3,misalign:0.9,relabel");
  cfg.max_elements = 8;
  for (int trial = 0; trial < 200; ++trial) {
    auto exp = search::random_setup(rng, cfg);
    EXPECT_EQ(dsl::parse_or_throw(dsl::serialize(exp)), exp) << dsl::serialize(exp);
  }
}
