// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/core.h>

#include "json.hpp"

#include "evspot/error.hpp"

namespace evspot {
namespace {

constexpr double kLeft = 140.0;
constexpr double kPlotWidth = 1000.0;
constexpr double kLaneHeight = 48.0;
constexpr double kTop = 30.0;

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span) {
  const double raw = span / 10.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string category_color(std::string_view category) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : category) {
    h ^= c;
    h *= 16777619u;
  }
  // HSL with fixed saturation and lightness.
  const double hue = static_cast<double>(h % 360u);
  const double s = 0.65, l = 0.45;
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  const double x = c * (1.0 - std::abs(std::fmod(hue / 60.0, 2.0) - 1.0));
  const double m = l - c / 2.0;
  double r = 0, g = 0, b = 0;
  if (hue < 60) { r = c; g = x; }
  else if (hue < 120) { r = x; g = c; }
  else if (hue < 180) { g = c; b = x; }
  else if (hue < 240) { g = x; b = c; }
  else if (hue < 300) { r = x; b = c; }
  else { r = c; b = x; }
  auto channel = [&](double v) { return static_cast<int>(std::lround((v + m) * 255.0)); };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(r), channel(g), channel(b));
}

Timeline build_timeline(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy) {
  Timeline tl;
  if (!docs.empty()) {
    tl.t_begin = docs.front().t_begin;
    tl.t_end = docs.front().t_end;
  }
  for (const auto& d : docs) {
    tl.t_begin = std::min(tl.t_begin, d.t_begin);
    tl.t_end = std::max(tl.t_end, d.t_end);
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    AnnotationDoc d = docs[i];
    d.sort();
    TimelineLane lane;
    lane.annotator = d.annotator.empty() ? "annotator" + std::to_string(i + 1) : d.annotator;
    for (const auto& e : d.events) {
      TimelineGlyph g;
      g.t = e.t;
      g.category = e.category;
      g.color = category_color(e.category);
      g.attributes = e.attributes;
      g.shape = "dot";
      if (taxonomy.contains(e.category)) {
        if (taxonomy.status_effect(e.category) != StatusEffect::kNone) {
          g.shape = "bar";
        } else if (taxonomy.node(e.category).path_group == PathGroup::kPossession) {
          g.shape = "square";
        }
      }
      tl.colors[e.category] = g.color;
      lane.glyphs.push_back(std::move(g));
    }
    try {
      for (const auto& iv : derive_intervals(d, taxonomy, PathGroup::kGameStatus)) {
        if (iv.state == kActive) lane.active.push_back(iv);
      }
    } catch (const DomainError&) {
      lane.active.clear();
    }
    tl.lanes.push_back(std::move(lane));
  }
  return tl;
}

std::string timeline_to_json(const Timeline& timeline) {
  using nlohmann::json;
  json j;
  j["t_begin"] = timeline.t_begin;
  j["t_end"] = timeline.t_end;
  j["colors"] = timeline.colors;
  json lanes = json::array();
  for (const auto& lane : timeline.lanes) {
    json glyphs = json::array();
    for (const auto& g : lane.glyphs) {
      glyphs.push_back({{"t", g.t}, {"category", g.category}, {"color", g.color}, {"shape", g.shape},
                        {"attributes", g.attributes}});
    }
    json active = json::array();
    for (const auto& iv : lane.active) active.push_back({iv.start, iv.end});
    lanes.push_back({{"annotator", lane.annotator}, {"events", glyphs}, {"active", active}});
  }
  j["lanes"] = lanes;
  return j.dump(2) + "\n";
}

std::string timeline_to_svg(const Timeline& timeline) {
  const double span = std::max(timeline.t_end - timeline.t_begin, 1e-6);
  auto x_of = [&](double t) { return kLeft + (t - timeline.t_begin) / span * kPlotWidth; };
  const double height = kTop + kLaneHeight * static_cast<double>(timeline.lanes.size()) + 40.0 +
                        16.0 * static_cast<double>(timeline.colors.size());
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      kLeft + kPlotWidth + 20.0, height);
  for (std::size_t i = 0; i < timeline.lanes.size(); ++i) {
    const auto& lane = timeline.lanes[i];
    const double y = kTop + kLaneHeight * static_cast<double>(i);
    const double mid = y + kLaneHeight / 2.0;
    out += fmt::format("  <text x=\"4\" y=\"{:.1f}\">{}</text>\n", mid + 4.0, escape_xml(lane.annotator));
    for (const auto& iv : lane.active) {
      out += fmt::format(
          "  <rect x=\"{:.2f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.1f}\" fill=\"#eeeeee\"/>\n",
          x_of(iv.start), y + 4.0, x_of(iv.end) - x_of(iv.start), kLaneHeight - 8.0);
    }
    out += fmt::format("  <line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#999\"/>\n", kLeft,
                       mid, kLeft + kPlotWidth, mid);
    for (const auto& g : lane.glyphs) {
      const double x = x_of(g.t);
      const std::string title = fmt::format("<title>{:.3f} {}</title>", g.t, escape_xml(g.category));
      if (g.shape == "bar") {
        out += fmt::format("  <rect x=\"{:.2f}\" y=\"{:.1f}\" width=\"2\" height=\"{:.1f}\" fill=\"{}\">{}</rect>\n",
                           x - 1.0, y + 4.0, kLaneHeight - 8.0, g.color, title);
      } else if (g.shape == "square") {
        out += fmt::format("  <rect x=\"{:.2f}\" y=\"{:.1f}\" width=\"6\" height=\"6\" fill=\"{}\">{}</rect>\n",
                           x - 3.0, mid - 14.0, g.color, title);
      } else {
        out += fmt::format("  <circle cx=\"{:.2f}\" cy=\"{:.1f}\" r=\"3.5\" fill=\"{}\">{}</circle>\n", x, mid,
                           g.color, title);
      }
    }
  }
  const double axis_y = kTop + kLaneHeight * static_cast<double>(timeline.lanes.size()) + 8.0;
  out += fmt::format("  <line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#000\"/>\n", kLeft,
                     axis_y, kLeft + kPlotWidth, axis_y);
  const double step = nice_step(span);
  for (double t = std::ceil(timeline.t_begin / step) * step; t <= timeline.t_end + 1e-9; t += step) {
    out += fmt::format("  <text x=\"{:.2f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n", x_of(t),
                       axis_y + 14.0, t);
  }
  double ly = axis_y + 34.0;
  for (const auto& [cat, color] : timeline.colors) {
    out += fmt::format("  <circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"4\" fill=\"{}\"/>\n", kLeft, ly - 4.0, color);
    out += fmt::format("  <text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kLeft + 10.0, ly, escape_xml(cat));
    ly += 16.0;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace evspot
