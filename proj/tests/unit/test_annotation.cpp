// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <string>

#include "doctest.h"
#include "evspot/annotation.hpp"
#include "evspot/error.hpp"
#include "evspot/taxonomy.hpp"

using namespace evspot;

namespace {

const char* kMatch =
    "# evspot events v1\n"
    "@doc annotator=ann match_id=m1 t_begin=0 t_end=60 fps=25 initial_status=inactive\n"
    "t_seconds=1.000 category=static_ball_action/kick-off\n"
    "t_seconds=1.000 category=ball_release/intentional/pass/successful_untouched player=A1\n"
    "t_seconds=1.000 category=possession_change team=A\n"
    "t_seconds=2.480 category=ball_reception player=A2\n"
    "t_seconds=5.000 category=ball_release/intentional/shot/off_target player=A2\n"
    "t_seconds=5.000 category=referee_decision/ball_out_of_field\n"
    "t_seconds=9.000 category=static_ball_action/goal-kick\n"
    "t_seconds=9.000 category=ball_release/intentional/pass/intercepted player=B1\n"
    "t_seconds=9.000 category=possession_change team=B\n"
    "t_seconds=10.000 category=ball_reception player=A4\n"
    "t_seconds=10.000 category=possession_change team=A\n"
    "t_seconds=20.000 category=referee_decision/foul\n";

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST_CASE("parse reads header and events") {
  const auto doc = parse_annotations(kMatch);
  CHECK(doc.annotator == "ann");
  CHECK(doc.match_id == "m1");
  CHECK(doc.t_end == 60.0);
  CHECK(doc.fps.value() == 25.0);
  CHECK(doc.initial_status.value() == "inactive");
  REQUIRE(doc.events.size() == 12);
  CHECK(doc.events[3].category == "ball_reception");
  CHECK(*doc.events[3].attribute("player") == "A2");
  CHECK(doc.events[3].annotator == "ann");
  CHECK(doc.events[3].match_id == "m1");
  CHECK(std::is_sorted(doc.events.begin(), doc.events.end(), event_less));
}

TEST_CASE("serialize then parse is the identity") {
  auto doc = parse_annotations(kMatch);
  doc.events[3].attributes["note"] = "two words=50% off";
  doc.events[4].adopted = true;
  const auto text = serialize_annotations(doc);
  CHECK(text.find("two%20words%3D50%25%20off") != std::string::npos);
  CHECK(parse_annotations(text) == doc);
  CHECK(serialize_annotations(parse_annotations(text)) == text);
}

TEST_CASE("malformed lines carry their line number") {
  try {
    parse_annotations("@doc t_begin=0 t_end=5\nt_seconds=abc category=x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_annotations("t_seconds=1 category=x note=%4\n"), ParseError);
  CHECK_THROWS_AS(parse_annotations("t_seconds=1 category=x broken\n"), ParseError);
}

TEST_CASE("frame grid snapping") {
  const std::string on_grid = "@doc t_begin=0 t_end=5 fps=25\nt_seconds=1.040 category=ball_reception\n";
  const auto doc = parse_annotations(on_grid, {true});
  CHECK(doc.events[0].t == frame_time(26, 25.0));
  const std::string off_grid = "@doc t_begin=0 t_end=5 fps=25\nt_seconds=1.013 category=ball_reception\n";
  CHECK(parse_annotations(off_grid).events[0].t == doctest::Approx(1.013));
  CHECK_THROWS_AS(parse_annotations(off_grid, {true}), ParseError);
}

TEST_CASE("csv profile") {
  const auto doc = parse_annotations(
      "t_seconds,category,attributes,annotator,match_id\n"
      "3.5,ball_reception,player=A3;pixel_location=10x20,x,m\n"
      "1.0,possession_change,team=A,x,m\n");
  REQUIRE(doc.events.size() == 2);
  CHECK(doc.events[0].t == 1.0);
  CHECK(*doc.events[1].attribute("pixel_location") == "10x20");
  CHECK(doc.annotator == "x");
  CHECK(doc.t_end == 3.5);
  CHECK_THROWS_AS(parse_annotations("t_seconds,category,attributes,annotator,match_id\n1,a,,x\n"),
                  ParseError);
}

TEST_CASE("validation rules") {
  const auto tax = Taxonomy::bundled("soccer");
  auto doc = parse_annotations(kMatch);
  CHECK(validate(doc, tax).empty());

  auto bad = doc;
  bad.events.push_back({12.0, "ball_release/nope", {}, "ann", "m1", false});
  CHECK(has_rule(validate(bad, tax), "unknown_category"));

  bad = doc;
  bad.events.push_back({12.0, "possession_change", {}, "ann", "m1", false});
  bad.sort();
  CHECK(has_rule(validate(bad, tax), "missing_attribute"));

  bad = doc;
  bad.events.push_back({70.0, "ball_reception", {}, "ann", "m1", false});
  CHECK(has_rule(validate(bad, tax), "out_of_segment"));

  bad = doc;
  bad.events.push_back({2.48, "ball_release/intentional/shot/blocked", {}, "ann", "m1", false});
  bad.sort();
  const auto v = validate(bad, tax);
  CHECK(std::count_if(v.begin(), v.end(), [](const Violation& x) { return x.rule == "exclusion_clash"; }) == 1);

  bad = doc;
  bad.events.push_back({7.0, "referee_decision/foul", {}, "ann", "m1", false});
  bad.sort();
  CHECK(has_rule(validate(bad, tax), "status_alternation"));

  bad = doc;
  bad.events.push_back({11.0, "possession_change", {{"team", "A"}}, "ann", "m1", false});
  bad.sort();
  CHECK(has_rule(validate(bad, tax), "possession_repeat"));
}

TEST_CASE("game status intervals and sequences") {
  const auto tax = Taxonomy::bundled("soccer");
  const auto doc = parse_annotations(kMatch);
  const auto iv = derive_intervals(doc, tax, PathGroup::kGameStatus);
  REQUIRE(iv.size() == 5);
  CHECK(iv[0] == Interval{0, 1, "inactive"});
  CHECK(iv[1] == Interval{1, 5, "active"});
  CHECK(iv[3] == Interval{9, 20, "active"});
  CHECK(iv[4] == Interval{20, 60, "inactive"});

  const auto seqs = segment_sequences(doc, tax);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].events.size() == 6);
  CHECK(seqs[0].events.front().t == 1.0);
  CHECK(seqs[0].events.back().category == "referee_decision/ball_out_of_field");
  CHECK(seqs[1].events.size() == 6);

  const auto poss = derive_intervals(doc, tax, PathGroup::kPossession);
  REQUIRE(poss.size() == 4);
  CHECK(poss[0].state == "none");
  CHECK(poss[1].state == "A");
  CHECK(poss[2] == Interval{9, 10, "B"});
}

TEST_CASE("shared boundary goes to the opening sequence") {
  const auto tax = Taxonomy::bundled("soccer");
  const auto doc = parse_annotations(
      "@doc t_begin=0 t_end=30 initial_status=inactive\n"
      "t_seconds=1 category=static_ball_action/kick-off\n"
      "t_seconds=5 category=referee_decision/foul\n"
      "t_seconds=5 category=static_ball_action/free-kick\n"
      "t_seconds=5 category=ball_release/intentional/pass/intercepted\n"
      "t_seconds=9 category=referee_decision/foul\n");
  const auto seqs = segment_sequences(doc, tax);
  REQUIRE(seqs.size() == 2);
  REQUIRE(seqs[0].events.size() == 2);
  CHECK(seqs[0].events[1].category == "referee_decision/foul");
  REQUIRE(seqs[1].events.size() == 3);
  CHECK(seqs[1].events[0].t == 5.0);
}

TEST_CASE("initial status is inferred from the first status event") {
  const auto tax = Taxonomy::bundled("soccer");
  const auto doc = parse_annotations(
      "@doc t_begin=0 t_end=30\n"
      "t_seconds=4 category=referee_decision/foul\n");
  CHECK(initial_game_status(doc, tax) == "active");
  const auto seqs = segment_sequences(doc, tax);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].interval == Interval{0, 4, "active"});
}
