// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "builders.hpp"
#include "doctest.h"
#include "evspot/error.hpp"
#include "evspot/metrics.hpp"
#include "evspot/synthgen.hpp"
#include "oracles.hpp"

using namespace evspot;
using testing_support::ev;
using testing_support::make_doc;

namespace {

const Taxonomy& soccer() {
  static const Taxonomy tax = Taxonomy::bundled("soccer");
  return tax;
}

const char* kRec = "ball_reception";
const char* kKick = "static_ball_action/kick-off";
const char* kFoul = "referee_decision/foul";
const char* kFree = "static_ball_action/free-kick";

}  // namespace

TEST_CASE("ratios") {
  CHECK_FALSE(make_ratio(0, 0).has_value());
  CHECK(make_ratio(1, 4).value() == 0.25);
  CHECK_FALSE(f1_score(std::nullopt, 0.5).has_value());
  CHECK(f1_score(0.0, 0.0).value() == 0.0);
  CHECK(f1_score(1.0, 0.5).value() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tolerance windows") {
  auto tol = ToleranceSpec::from_taxonomy(soccer());
  CHECK(tol.window(kRec) == doctest::Approx(0.44));
  CHECK(tol.radius(kRec) == doctest::Approx(0.22));
  CHECK(tol.within(0.22, kRec));
  CHECK_FALSE(tol.within(0.23, kRec));
  CHECK(tol.window("@game_status") == doctest::Approx(6.04));
  CHECK(tol.window("ball_release/intentional/pass/intercepted") == doctest::Approx(0.44));
  tol.set_mode(HalfWidthMode::kFull);
  CHECK(tol.radius(kRec) == doctest::Approx(0.44));

  const auto parsed =
      ToleranceSpec::parse(R"({"mode":"full","windows":{"ball_reception":1.5}})", soccer());
  CHECK(parsed.mode() == HalfWidthMode::kFull);
  CHECK(parsed.window(kRec) == 1.5);
  CHECK(parsed.window("possession_change") == doctest::Approx(2.04));
  CHECK_THROWS_AS(ToleranceSpec::parse(R"({"windows":{"nothing":1}})", soccer()), ConfigError);
  CHECK(ToleranceSpec::parse(tol.to_json(), soccer()).windows() == tol.windows());
}

TEST_CASE("nnm lets one reference absorb several predictions") {
  const auto ref = make_doc("r", 20, {ev(1, kRec), ev(5, kRec), ev(9, kRec)});
  const auto pred = make_doc("p", 20, {ev(1.1, kRec), ev(0.9, kRec), ev(5.3, kRec), ev(12, kRec)});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  const auto r = nnm_match(pred, ref, soccer(), CategorySelector(kRec), tol);
  CHECK(r.num_pred == 4);
  CHECK(r.num_ref == 3);
  CHECK(r.tp == 2);
  CHECK(r.fp == 2);
  CHECK(r.matched_ref == 1);
  CHECK(r.fn == 2);
  CHECK(r.precision().value() == 0.5);
  CHECK(r.recall().value() == doctest::Approx(1.0 / 3.0));
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0].ref.t == 1.0);
  CHECK(r.pairs[1].ref.t == 1.0);
}

TEST_CASE("nnm ties prefer the earlier reference") {
  const auto ref = make_doc("r", 20, {ev(1.0, kRec), ev(1.4, kRec)});
  const auto pred = make_doc("p", 20, {ev(1.2, kRec)});
  const auto r = nnm_match(pred, ref, soccer(), CategorySelector(kRec), ToleranceSpec::from_taxonomy(soccer()));
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].ref.t == 1.0);
  CHECK(r.matched_ref == 2);
}

TEST_CASE("nnm selector covers descendants") {
  const auto ref = make_doc("r", 20, {ev(1, "ball_release/intentional/pass/intercepted"),
                                      ev(5, "ball_release/intentional/shot/blocked")});
  const auto pred = make_doc("p", 20, {ev(1, "ball_release/intentional/pass/off_target")});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  const auto r = nnm_match(pred, ref, soccer(), CategorySelector("ball_release/intentional"), tol);
  CHECK(r.tp == 1);
  CHECK(r.fn == 1);
  const auto leaf =
      nnm_match(pred, ref, soccer(), CategorySelector("ball_release/intentional/pass/intercepted"), tol);
  CHECK(leaf.tp == 0);
  CHECK(leaf.fn == 1);
}

TEST_CASE("nnm against the all-pairs oracle") {
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto model = MatchModel::defaults("soccer");
    model.duration = 200;
    model.min_sequences = 4;
    model.max_sequences = 6;
    model.seed = seed;
    const auto ref = generate_match(model, soccer());
    NoiseModel noise;
    noise.jitter_sd = 0.3;
    noise.miss_rate = 0.1;
    noise.spurious_per_minute = 3;
    noise.confusion_rate = 0.1;
    noise.seed = seed;
    const auto pred = perturb(ref, noise, soccer());
    for (const char* cat : {kRec, "ball_release", "ball_release/intentional/pass", "@game_status"}) {
      const auto r = nnm_match(pred, ref, soccer(), CategorySelector(cat), tol);
      const auto o = oracle::nnm(pred, ref, soccer(), cat, tol.radius(cat));
      CHECK(r.tp == o.tp);
      CHECK(r.fp == o.fp);
      CHECK(r.matched_ref == o.matched_ref);
      CHECK(r.fn == o.fn);
    }
  }
}

TEST_CASE("scm counts per sequence and pairs by order") {
  // Sequence 1 has two receptions on both sides, the second outside the
  // window. Sequence 2 has one reception in the reference and two in the
  // prediction, so it is inconsistent.
  const auto ref = make_doc("r", 60,
                            {ev(1, kKick), ev(2, kRec), ev(4, kRec), ev(10, kFoul), ev(15, kFree),
                             ev(17, kRec), ev(30, kFoul)});
  const auto pred = make_doc("p", 60,
                             {ev(1, kKick), ev(2.1, kRec), ev(5, kRec), ev(10, kFoul), ev(15, kFree),
                              ev(17, kRec), ev(18, kRec), ev(30, kFoul)});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  const auto r = scm_match(pred, ref, soccer(), CategorySelector(kRec), tol);
  CHECK(r.total_sequences == 2);
  CHECK(r.consistent_sequences == 1);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.matched_ref == 1);
  CHECK(r.fn == 1);
  CHECK(r.num_ref == 3);
  CHECK(r.num_pred == 4);
  CHECK(r.consistent_ref_events == 2);
  CHECK(r.consistent_pred_events == 2);
  CHECK(r.consistent_event_fraction().value() == doctest::Approx(2.0 / 3.0));
  CHECK(r.consistent_pred_fraction().value() == 0.5);

  const auto o = oracle::scm(pred, ref, soccer(), kRec, tol.radius(kRec));
  CHECK(o.tp == r.tp);
  CHECK(o.consistent_sequences == r.consistent_sequences);

  const auto nn = nnm_match(pred, ref, soccer(), CategorySelector(kRec), tol);
  // 5 vs 4 and 18 vs 17 are outside the window either way.
  CHECK(nn.tp == 2);
}

TEST_CASE("scm requires equal sequence counts") {
  const auto ref = make_doc("r", 60, {ev(1, kKick), ev(10, kFoul), ev(15, kFree), ev(30, kFoul)});
  const auto pred = make_doc("p", 60, {ev(1, kKick), ev(30, kFoul)});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  CHECK_THROWS_AS(scm_match(pred, ref, soccer(), CategorySelector(kRec), tol), DomainError);
}

TEST_CASE("boundary adoption fills in a missing status pair") {
  const auto ref = make_doc("r", 60,
                            {ev(1, kKick), ev(3, kRec), ev(10, kFoul), ev(15, kFree), ev(20, kRec),
                             ev(30, kFoul)});
  const auto pred = make_doc("p", 60, {ev(1.5, kKick), ev(3.1, kRec), ev(20, kRec), ev(31, kFoul)});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  const auto al = scm_align_boundaries(pred, ref, soccer(), tol);
  REQUIRE(al.ok);
  CHECK(al.adopted_into_pred == 2);
  CHECK(al.adopted_into_ref == 0);
  REQUIRE(al.borders.size() == 2);
  CHECK(al.borders[0].first.start == 1.5);
  CHECK(al.borders[0].second.start == 1.0);
  const auto r = scm_match(al.pred, al.ref, soccer(), CategorySelector(kRec), tol);
  CHECK(r.consistent_sequences == 2);
  CHECK(r.tp == 2);
  CHECK(r.adopted_events == 2);
  // Adopted status events are not scored.
  const auto s = scm_match(al.pred, al.ref, soccer(), CategorySelector("@game_status"), tol);
  CHECK(s.num_pred == 2);
  CHECK(s.num_ref == 4);
}

TEST_CASE("scm with attribute partitions") {
  const auto ref = make_doc("r", 60,
                            {ev(1, kKick), ev(2, kRec, {{"player", "A1"}}), ev(4, kRec, {{"player", "A2"}}),
                             ev(30, kFoul)});
  const auto pred = make_doc("p", 60,
                             {ev(1, kKick), ev(2, kRec, {{"player", "A1"}}), ev(4, kRec, {{"player", "A3"}}),
                              ev(30, kFoul)});
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  const auto plain = scm_match(pred, ref, soccer(), CategorySelector(kRec), tol);
  CHECK(plain.tp == 2);
  const auto by_player = scm_match_with_attributes(pred, ref, soccer(), CategorySelector(kRec), tol, {"player"});
  CHECK(by_player.tp == 1);
  CHECK(by_player.consistent_sequences == 0);
}

TEST_CASE("scm against the brute-force oracle") {
  const auto tol = ToleranceSpec::from_taxonomy(soccer());
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto model = MatchModel::defaults("soccer");
    model.duration = 240;
    model.min_sequences = 5;
    model.max_sequences = 8;
    model.seed = seed;
    const auto ref = generate_match(model, soccer());
    NoiseModel noise;
    noise.jitter_sd = 0.2;
    noise.status_jitter_sd = 0.5;
    noise.miss_rate = 0.05;
    noise.spurious_per_minute = 1;
    noise.seed = seed + 100;
    const auto al = scm_align_boundaries(perturb(ref, noise, soccer()), ref, soccer(), tol);
    REQUIRE(al.ok);
    for (const char* cat : {kRec, "ball_release", "ball_release/intentional/pass", "possession_change"}) {
      const auto r = scm_match(al.pred, al.ref, soccer(), CategorySelector(cat), tol);
      const auto o = oracle::scm(al.pred, al.ref, soccer(), cat, tol.radius(cat));
      CHECK(r.tp == o.tp);
      CHECK(r.fp == o.fp);
      CHECK(r.fn == o.fn);
      CHECK(r.consistent_sequences == o.consistent_sequences);
      CHECK(r.consistent_ref_events == o.consistent_ref);
      CHECK(r.consistent_pred_events == o.consistent_pred);
    }
  }
}

TEST_CASE("temporal iou") {
  const std::vector<Interval> a{{0, 2, "active"}};
  const std::vector<Interval> b{{1, 3, "active"}};
  CHECK(temporal_iou(a, b).value() == doctest::Approx(1.0 / 3.0));
  CHECK(temporal_iou(a, a).value() == 1.0);
  CHECK_FALSE(temporal_iou({}, {}).has_value());
  CHECK(temporal_iou(a, {}).value() == 0.0);
  CHECK(temporal_iou({{0, 1, "x"}, {1, 2, "x"}}, a).value() == 1.0);
  CHECK_THROWS_AS(temporal_iou({{0, 2, "x"}, {1, 3, "x"}}, a), DomainError);
  CHECK(aggregated_iou({a, b, {{0, 3, "active"}}}).value() == doctest::Approx(1.0 / 3.0));

  const std::vector<Interval> mixed{{0, 1, "active"}, {1, 4, "inactive"}, {4, 6, "active"}};
  const auto only = filter_state(mixed, "active");
  REQUIRE(only.size() == 2);
  CHECK(only[1].start == 4);
}

TEST_CASE("pairwise temporal iou over documents") {
  const auto d1 = make_doc("a", 20,
                           {ev(0, kKick), ev(0, "possession_change", {{"team", "A"}}),
                            ev(5, "possession_change", {{"team", "B"}}), ev(10, kFoul)});
  const auto d2 = make_doc("b", 20,
                           {ev(0, kKick), ev(0, "possession_change", {{"team", "A"}}),
                            ev(6, "possession_change", {{"team", "B"}}), ev(12, kFoul)});
  const auto status = pairwise_tiou({d1, d2}, soccer(), PathGroup::kGameStatus, "active");
  REQUIRE(status.values.size() == 1);
  CHECK(status.values[0].value() == doctest::Approx(10.0 / 12.0));
  CHECK(status.std.value() == 0.0);
  // Possession: A agrees on [0,5], B on [6,20] over a covered union of [0,20].
  const auto poss = pairwise_tiou({d1, d2}, soccer(), PathGroup::kPossession, "");
  CHECK(poss.values[0].value() == doctest::Approx(19.0 / 20.0));
  const auto three = pairwise_tiou({d1, d2, d1}, soccer(), PathGroup::kGameStatus, "active");
  CHECK(three.values.size() == 3);
  CHECK(three.aggregated.value() == doctest::Approx(10.0 / 12.0));
}

TEST_CASE("average precision hand examples") {
  CHECK(average_precision({{1, 0.9}, {5, 0.8}, {9, 0.7}}, {1, 9}, 0.5).value() ==
        doctest::Approx(0.5 + 0.5 * 2.0 / 3.0));
  CHECK(average_precision({{1, 0.9}, {9, 0.8}}, {1, 9}, 0.5).value() == 1.0);
  // A duplicate cannot claim a used reference.
  CHECK(average_precision({{1, 0.9}, {1.1, 0.8}}, {1, 9}, 0.5).value() == 0.5);
  CHECK(average_precision({}, {1}, 0.5).value() == 0.0);
  CHECK_FALSE(average_precision({{1, 1}}, {}, 0.5).has_value());

  const auto ref = make_doc("r", 20, {ev(1, kRec), ev(9, kRec)});
  auto pred = make_doc("p", 20, {ev(1.2, kRec, {{"score", "0.9"}}), ev(9.8, kRec, {{"score", "0.6"}})});
  const auto ap = average_precision_over_tolerances(pred, ref, soccer(), CategorySelector(kRec), {0.5, 2.0});
  REQUIRE(ap.ap.size() == 2);
  CHECK(ap.ap[0].value() == 0.5);
  CHECK(ap.ap[1].value() == 1.0);
  CHECK(ap.mean.value() == 0.75);
  pred.events[0].attributes.clear();
  CHECK_THROWS_AS(average_precision_over_tolerances(pred, ref, soccer(), CategorySelector(kRec), {1.0}),
                  DomainError);
}
