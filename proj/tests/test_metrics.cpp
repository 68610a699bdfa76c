#include <doctest.h>

#include <cmath>

#include "openeye/metrics.hpp"
#include "openeye/study.hpp"

using namespace openeye;
using namespace openeye::study;

namespace {

struct Oracle {
  double accuracy, precision, recall, f;
  bool p_undef, r_undef, f_undef;
};

// Definition formulas evaluated directly.
Oracle oracle(long tp, long fp, long tn, long fn) {
  Oracle o{};
  const long total = tp + fp + tn + fn;
  o.accuracy = total ? double(tp + tn) / double(total) : 0.0;
  o.p_undef = tp + fp == 0;
  o.r_undef = tp + fn == 0;
  o.precision = o.p_undef ? 0.0 : double(tp) / double(tp + fp);
  o.recall = o.r_undef ? 0.0 : double(tp) / double(tp + fn);
  o.f_undef = o.precision + o.recall == 0.0;
  o.f = o.f_undef ? 0.0 : 2 * o.precision * o.recall / (o.precision + o.recall);
  return o;
}

std::vector<Response> responses(int tp, int fp, int tn, int fn, LabelMap& labels) {
  std::vector<Response> out;
  int n = 0;
  auto add = [&](Label truth, Label verdict, int count) {
    for (int i = 0; i < count; ++i) {
      const std::string id = "img" + std::to_string(n++);
      labels[id] = truth;
      out.push_back({id, verdict, Stage::Stage1, 0});
    }
  };
  add(Label::Fake, Label::Fake, tp);
  add(Label::Real, Label::Fake, fp);
  add(Label::Real, Label::Real, tn);
  add(Label::Fake, Label::Real, fn);
  return out;
}

}  // namespace

TEST_CASE("metrics examples") {
  SUBCASE("perfect classifier") {
    const auto m = metrics_from_confusion({10, 0, 10, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f_score == 1.0);
    CHECK(m.degenerate_flags.empty());
  }
  SUBCASE("everything called fake") {
    LabelMap labels;
    const auto rs = responses(10, 10, 0, 0, labels);
    const auto m = compute_metrics(rs, labels);
    CHECK(m.confusion == ConfusionMatrix{10, 10, 0, 0});
    CHECK(m.accuracy == 0.5);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 1.0);
    CHECK(std::abs(m.f_score - 2.0 / 3.0) <= 1e-15);
  }
  SUBCASE("mixed") {
    const auto m = metrics_from_confusion({7, 2, 8, 3});
    CHECK(m.accuracy == 0.75);
    CHECK(std::abs(m.precision - 7.0 / 9.0) <= 1e-15);
    CHECK(std::abs(m.recall - 0.7) <= 1e-15);
    CHECK(std::abs(m.f_score - 14.0 / 19.0) <= 1e-15);
  }
  SUBCASE("degenerate flags") {
    const auto none_called_fake = metrics_from_confusion({0, 0, 10, 10});
    CHECK(none_called_fake.degenerate_flags ==
          std::set<DegenerateFlag>{DegenerateFlag::PrecisionUndefined, DegenerateFlag::FUndefined});
    const auto no_fakes = metrics_from_confusion({0, 5, 5, 0});
    CHECK(no_fakes.degenerate_flags ==
          std::set<DegenerateFlag>{DegenerateFlag::RecallUndefined, DegenerateFlag::FUndefined});
    const auto all_wrong = metrics_from_confusion({0, 4, 0, 6});
    CHECK(all_wrong.degenerate_flags == std::set<DegenerateFlag>{DegenerateFlag::FUndefined});
    CHECK(all_wrong.precision == 0.0);
    CHECK(all_wrong.recall == 0.0);
    const auto empty = metrics_from_confusion({});
    CHECK(empty.accuracy == 0.0);
    CHECK(empty.degenerate_flags.size() == 3);
  }
}

TEST_CASE("property: compute_metrics equals the definition formulas for every matrix up to 20") {
  for (int tp = 0; tp <= 20; ++tp)
    for (int fp = 0; tp + fp <= 20; ++fp)
      for (int tn = 0; tp + fp + tn <= 20; ++tn)
        for (int fn = 0; tp + fp + tn + fn <= 20; ++fn) {
          LabelMap labels;
          const auto m = compute_metrics(responses(tp, fp, tn, fn, labels), labels);
          const auto o = oracle(tp, fp, tn, fn);
          REQUIRE(m.confusion == ConfusionMatrix{std::uint32_t(tp), std::uint32_t(fp), std::uint32_t(tn), std::uint32_t(fn)});
          REQUIRE(std::abs(m.accuracy - o.accuracy) <= 1e-12);
          REQUIRE(std::abs(m.precision - o.precision) <= 1e-12);
          REQUIRE(std::abs(m.recall - o.recall) <= 1e-12);
          REQUIRE(std::abs(m.f_score - o.f) <= 1e-12);
          REQUIRE(m.degenerate_flags.count(DegenerateFlag::PrecisionUndefined) == o.p_undef);
          REQUIRE(m.degenerate_flags.count(DegenerateFlag::RecallUndefined) == o.r_undef);
          REQUIRE(m.degenerate_flags.count(DegenerateFlag::FUndefined) == o.f_undef);
        }
}

TEST_CASE("compute_metrics requires labels") {
  LabelMap labels;
  auto rs = responses(1, 1, 1, 1, labels);
  labels.erase("img0");
  try {
    compute_metrics(rs, labels);
    FAIL("expected MissingLabel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingLabel);
  }
}

TEST_CASE("metric_deltas are stage3 minus stage1") {
  const auto a = metrics_from_confusion({5, 5, 5, 5});
  const auto b = metrics_from_confusion({6, 4, 6, 4});
  const auto d = metric_deltas(a, b);
  CHECK(d.accuracy == b.accuracy - a.accuracy);
  CHECK(d.precision == b.precision - a.precision);
  CHECK(d.recall == b.recall - a.recall);
  CHECK(d.f_score == b.f_score - a.f_score);
  CHECK(std::abs(d.accuracy - 0.1) <= 1e-15);
}
