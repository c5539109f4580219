// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "evspot/annotation.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

struct TimelineGlyph {
  double t = 0.0;
  std::string category;
  std::string color;
  std::string shape;  // "bar" (status), "square" (possession), "dot"
  std::map<std::string, std::string> attributes;
};

struct TimelineLane {
  std::string annotator;
  std::vector<TimelineGlyph> glyphs;
  std::vector<Interval> active;  // empty when the status chain is broken
};

struct Timeline {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<TimelineLane> lanes;
  std::map<std::string, std::string> colors;  // legend
};

// Stable "#rrggbb" derived from the category name.
std::string category_color(std::string_view category);

/// One lane per document, in input order.
Timeline build_timeline(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy);
std::string timeline_to_json(const Timeline& timeline);
std::string timeline_to_svg(const Timeline& timeline);

}  // namespace evspot
