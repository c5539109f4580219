// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/annotation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "evspot/error.hpp"

namespace evspot {
namespace {

constexpr std::string_view kCsvHeader = "t_seconds,category,attributes,annotator,match_id";
const std::set<std::string, std::less<>> kReservedEventKeys = {"t_seconds", "category", "annotator",
                                                               "match_id", "adopted"};

std::string encode_value(std::string_view v) {
  std::string out;
  for (unsigned char c : v) {
    if (c == '%' || c == '=' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c < 0x20) {
      out += fmt::format("%{:02X}", c);
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string decode_value(std::string_view v, std::size_t line) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '%') {
      out += v[i];
      continue;
    }
    if (i + 2 >= v.size()) {
      throw ParseError(line, "truncated percent escape");
    }
    unsigned value = 0;
    auto [p, ec] = std::from_chars(v.data() + i + 1, v.data() + i + 3, value, 16);
    if (ec != std::errc() || p != v.data() + i + 3) throw ParseError(line, "bad percent escape");
    out += static_cast<char>(value);
    i += 2;
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line, std::string_view what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "unparseable number for " + std::string(what) + ": '" +
                               std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::pair<std::string, std::string> split_pair(std::string_view token, std::size_t line) {
  auto eq = token.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ParseError(line, "malformed field '" + std::string(token) + "', expected name=value");
  }
  return {decode_value(token.substr(0, eq), line), decode_value(token.substr(eq + 1), line)};
}

// Snaps onto the frame grid when t is a frame time at full precision or at
// the 3-decimal precision the canonical format writes.
double snap_to_frame(double t, double fps, bool strict, std::size_t line) {
  const double frames = t * fps;
  const long long f = std::llround(frames);
  const double ft = frame_time(f, fps);
  if (std::abs(frames - static_cast<double>(f)) <= 1e-6 || format_seconds(ft) == format_seconds(t)) {
    return ft;
  }
  if (strict) {
    throw ParseError(line, "timestamp " + format_seconds(t) + " is not on the " +
                               fmt::format("{}", fps) + " fps frame grid");
  }
  return t;
}

struct LineCursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t number = 0;

  bool next(std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  }
};

void finish_doc(AnnotationDoc& doc, bool have_segment, const ParseOptions& options,
                const std::vector<std::size_t>& lines) {
  for (std::size_t i = 0; i < doc.events.size(); ++i) {
    EventRecord& e = doc.events[i];
    if (doc.fps) e.t = snap_to_frame(e.t, *doc.fps, options.strict_frames, lines[i]);
    if (e.annotator.empty()) e.annotator = doc.annotator;
    if (e.match_id.empty()) e.match_id = doc.match_id;
  }
  if (!have_segment) {
    doc.t_begin = 0.0;
    doc.t_end = 0.0;
    for (const auto& e : doc.events) doc.t_end = std::max(doc.t_end, e.t);
  }
  if (doc.annotator.empty() && !doc.events.empty()) doc.annotator = doc.events.front().annotator;
  if (doc.match_id.empty() && !doc.events.empty()) doc.match_id = doc.events.front().match_id;
  doc.sort();
}

AnnotationDoc parse_csv(LineCursor cursor, const ParseOptions& options) {
  AnnotationDoc doc;
  std::vector<std::size_t> lines;
  std::string_view line;
  while (cursor.next(line)) {
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto cols = split_char(body, ',');
    if (cols.size() != 5) {
      throw ParseError(cursor.number, "expected 5 comma-separated columns, got " +
                                          std::to_string(cols.size()));
    }
    EventRecord e;
    e.t = parse_number(trim(cols[0]), cursor.number, "t_seconds");
    if (e.t < 0.0) throw ParseError(cursor.number, "negative timestamp");
    e.category = std::string(trim(cols[1]));
    if (e.category.empty()) throw ParseError(cursor.number, "empty category");
    std::string_view attrs = trim(cols[2]);
    if (!attrs.empty()) {
      for (auto kv : split_char(attrs, ';')) {
        if (trim(kv).empty()) continue;
        auto [k, v] = split_pair(trim(kv), cursor.number);
        e.attributes[k] = v;
      }
    }
    e.annotator = std::string(trim(cols[3]));
    e.match_id = std::string(trim(cols[4]));
    doc.events.push_back(std::move(e));
    lines.push_back(cursor.number);
  }
  finish_doc(doc, false, options, lines);
  return doc;
}

}  // namespace

const std::string* EventRecord::attribute(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

bool event_less(const EventRecord& a, const EventRecord& b) {
  return std::tie(a.t, a.category, a.attributes, a.annotator, a.match_id, a.adopted) <
         std::tie(b.t, b.category, b.attributes, b.annotator, b.match_id, b.adopted);
}

void AnnotationDoc::sort() { std::stable_sort(events.begin(), events.end(), event_less); }

double frame_time(long long frame, double fps, double offset) {
  return offset + static_cast<double>(frame) / fps;
}

std::string format_seconds(double t) {
  if (t == 0.0) t = 0.0;  // no "-0.000"
  return fmt::format("{:.3f}", t);
}

AnnotationDoc parse_annotations(std::string_view text, const ParseOptions& options) {
  LineCursor cursor{text};
  {
    // The CSV profile is recognised by its header on the first content line.
    LineCursor probe = cursor;
    std::string_view line;
    while (probe.next(line)) {
      std::string_view body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      if (body == kCsvHeader) return parse_csv(probe, options);
      break;
    }
  }

  AnnotationDoc doc;
  bool have_begin = false;
  bool have_end = false;
  bool seen_meta = false;
  std::vector<std::size_t> lines;
  std::string_view line;
  while (cursor.next(line)) {
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto tokens = split_ws(body);
    if (tokens.front() == "@doc") {
      if (seen_meta) throw ParseError(cursor.number, "duplicate @doc line");
      seen_meta = true;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        auto [k, v] = split_pair(tokens[i], cursor.number);
        if (k == "annotator") {
          doc.annotator = v;
        } else if (k == "match_id") {
          doc.match_id = v;
        } else if (k == "t_begin") {
          doc.t_begin = parse_number(v, cursor.number, k);
          have_begin = true;
        } else if (k == "t_end") {
          doc.t_end = parse_number(v, cursor.number, k);
          have_end = true;
        } else if (k == "fps") {
          double fps = parse_number(v, cursor.number, k);
          if (!(fps > 0.0)) throw ParseError(cursor.number, "fps must be positive");
          doc.fps = fps;
        } else if (k == "initial_status") {
          if (v != kActive && v != kInactive) {
            throw ParseError(cursor.number, "initial_status must be active or inactive");
          }
          doc.initial_status = v;
        } else if (k == "initial_possession") {
          doc.initial_possession = v;
        } else {
          throw ParseError(cursor.number, "unknown @doc field '" + k + "'");
        }
      }
      if (have_begin != have_end) throw ParseError(cursor.number, "t_begin and t_end go together");
      if (have_begin && (doc.t_begin < 0.0 || doc.t_end < doc.t_begin)) {
        throw ParseError(cursor.number, "invalid segment bounds");
      }
      continue;
    }
    if (tokens.front().front() == '@') {
      throw ParseError(cursor.number, "unknown directive '" + std::string(tokens.front()) + "'");
    }

    EventRecord e;
    bool have_t = false;
    std::set<std::string> seen_keys;
    for (auto token : tokens) {
      auto [k, v] = split_pair(token, cursor.number);
      if (!seen_keys.insert(k).second) throw ParseError(cursor.number, "duplicate field '" + k + "'");
      if (k == "t_seconds") {
        e.t = parse_number(v, cursor.number, k);
        if (e.t < 0.0) throw ParseError(cursor.number, "negative timestamp");
        have_t = true;
      } else if (k == "category") {
        e.category = v;
      } else if (k == "annotator") {
        e.annotator = v;
      } else if (k == "match_id") {
        e.match_id = v;
      } else if (k == "adopted") {
        if (v != "0" && v != "1") throw ParseError(cursor.number, "adopted must be 0 or 1");
        e.adopted = v == "1";
      } else {
        e.attributes[k] = v;
      }
    }
    if (!have_t) throw ParseError(cursor.number, "missing t_seconds");
    if (e.category.empty()) throw ParseError(cursor.number, "missing category");
    doc.events.push_back(std::move(e));
    lines.push_back(cursor.number);
  }
  finish_doc(doc, have_begin, options, lines);
  return doc;
}

AnnotationDoc load_annotations(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open event file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_annotations(ss.str(), options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + std::string(e.what()));
  }
}

std::string serialize_annotations(const AnnotationDoc& doc) {
  AnnotationDoc sorted = doc;
  sorted.sort();
  std::string out = "# evspot events v1\n@doc";
  if (!doc.annotator.empty()) out += " annotator=" + encode_value(doc.annotator);
  if (!doc.match_id.empty()) out += " match_id=" + encode_value(doc.match_id);
  out += " t_begin=" + format_seconds(doc.t_begin) + " t_end=" + format_seconds(doc.t_end);
  if (doc.fps) out += fmt::format(" fps={}", *doc.fps);
  if (doc.initial_status) out += " initial_status=" + encode_value(*doc.initial_status);
  if (doc.initial_possession) out += " initial_possession=" + encode_value(*doc.initial_possession);
  out += '\n';
  for (const auto& e : sorted.events) {
    out += "t_seconds=" + format_seconds(e.t) + " category=" + encode_value(e.category);
    if (!e.annotator.empty()) out += " annotator=" + encode_value(e.annotator);
    if (!e.match_id.empty()) out += " match_id=" + encode_value(e.match_id);
    if (e.adopted) out += " adopted=1";
    for (const auto& [k, v] : e.attributes) {
      if (kReservedEventKeys.count(k)) {
        throw DomainError("attribute name '" + k + "' collides with a reserved field");
      }
      out += ' ' + encode_value(k) + '=' + encode_value(v);
    }
    out += '\n';
  }
  return out;
}

void save_annotations(const std::string& path, const AnnotationDoc& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write event file '" + path + "'");
  out << serialize_annotations(doc);
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<Violation> validate(const AnnotationDoc& doc, const Taxonomy& taxonomy) {
  std::vector<Violation> out;
  auto add = [&](std::string rule, const EventRecord& e, std::string message) {
    out.push_back({std::move(rule), e.t, e.category, std::move(message)});
  };

  AnnotationDoc sorted = doc;
  sorted.sort();
  const auto& events = sorted.events;

  for (const auto& e : events) {
    if (!taxonomy.contains(e.category)) {
      add("unknown_category", e, "category '" + e.category + "' is not in the taxonomy");
      continue;
    }
    for (const auto& a : taxonomy.effective_attributes(e.category)) {
      if (a.required && !e.attribute(a.name)) {
        add("missing_attribute", e, "required attribute '" + a.name + "' is missing");
      }
    }
    if (e.t < doc.t_begin || e.t > doc.t_end) {
      add("out_of_segment", e, "timestamp outside segment [" + format_seconds(doc.t_begin) + ", " +
                                   format_seconds(doc.t_end) + "]");
    }
  }

  // Exact timestamp equality; fps snapping already happened at parse time.
  for (std::size_t g = 0; g < taxonomy.exclusion_groups().size(); ++g) {
    const EventRecord* prev = nullptr;
    for (const auto& e : events) {
      auto groups = taxonomy.exclusion_groups_of(e.category);
      if (std::find(groups.begin(), groups.end(), g) == groups.end()) continue;
      if (prev && prev->t == e.t) {
        add("exclusion_clash", e, "shares its timestamp with '" + prev->category +
                                      "' from the same exclusion group");
      }
      prev = &e;
    }
  }

  std::optional<StatusEffect> last_effect;
  if (doc.initial_status) {
    last_effect = *doc.initial_status == kActive ? StatusEffect::kActivate : StatusEffect::kDeactivate;
  }
  std::optional<std::string> last_team = doc.initial_possession;
  for (const auto& e : events) {
    if (!taxonomy.contains(e.category)) continue;
    const StatusEffect effect = taxonomy.status_effect(e.category);
    if (effect != StatusEffect::kNone) {
      if (last_effect && *last_effect == effect) {
        add("status_alternation", e,
            effect == StatusEffect::kDeactivate
                ? "play is deactivated twice without an activating event between"
                : "play is activated twice without a deactivating event between");
      }
      last_effect = effect;
    }
    if (taxonomy.node(e.category).path_group == PathGroup::kPossession) {
      if (const std::string* team = e.attribute(kTeamAttribute)) {
        if (last_team && *last_team == *team) {
          add("possession_repeat", e, "possession assigned to '" + *team + "' twice in a row");
        }
        last_team = *team;
      }
    }
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& a, const Violation& b) { return a.t < b.t; });
  return out;
}

std::string initial_game_status(const AnnotationDoc& doc, const Taxonomy& taxonomy) {
  if (doc.initial_status) return *doc.initial_status;
  for (const auto& e : doc.events) {
    if (!taxonomy.contains(e.category)) continue;
    switch (taxonomy.status_effect(e.category)) {
      case StatusEffect::kActivate: return std::string(kInactive);
      case StatusEffect::kDeactivate: return std::string(kActive);
      case StatusEffect::kNone: break;
    }
  }
  return std::string(kInactive);
}

std::vector<Interval> derive_intervals(const AnnotationDoc& doc, const Taxonomy& taxonomy,
                                       PathGroup group) {
  if (group != PathGroup::kGameStatus && group != PathGroup::kPossession) {
    throw DomainError("intervals exist only for game_status and possession");
  }
  AnnotationDoc sorted = doc;
  sorted.sort();

  std::vector<Interval> out;
  std::string state = group == PathGroup::kGameStatus
                          ? initial_game_status(sorted, taxonomy)
                          : doc.initial_possession.value_or(std::string(kNoPossession));
  double start = doc.t_begin;

  for (const auto& e : sorted.events) {
    if (!taxonomy.contains(e.category)) continue;
    std::string next;
    if (group == PathGroup::kGameStatus) {
      const StatusEffect effect = taxonomy.status_effect(e.category);
      if (effect == StatusEffect::kNone) continue;
      next = std::string(effect == StatusEffect::kActivate ? kActive : kInactive);
      if (next == state) {
        throw DomainError("game status alternation broken at t=" + format_seconds(e.t) + " ('" +
                          e.category + "')");
      }
    } else {
      if (taxonomy.node(e.category).path_group != PathGroup::kPossession) continue;
      const std::string* team = e.attribute(kTeamAttribute);
      if (!team) {
        throw DomainError("possession change at t=" + format_seconds(e.t) + " has no team");
      }
      if (*team == state) {
        throw DomainError("possession assigned to '" + *team + "' twice in a row at t=" +
                          format_seconds(e.t));
      }
      next = *team;
    }
    if (e.t < doc.t_begin || e.t > doc.t_end) {
      throw DomainError("event at t=" + format_seconds(e.t) + " lies outside the segment");
    }
    if (e.t > start) out.push_back({start, e.t, state});
    start = e.t;
    state = std::move(next);
  }
  if (doc.t_end > start) out.push_back({start, doc.t_end, state});
  return out;
}

std::vector<Sequence> segment_sequences(const AnnotationDoc& doc, const Taxonomy& taxonomy) {
  std::vector<Sequence> seqs;
  for (const auto& iv : derive_intervals(doc, taxonomy, PathGroup::kGameStatus)) {
    if (iv.state != kActive) continue;
    Sequence s;
    s.index = static_cast<int>(seqs.size());
    s.interval = iv;
    seqs.push_back(std::move(s));
  }
  if (seqs.empty()) return seqs;

  AnnotationDoc sorted = doc;
  sorted.sort();
  for (const auto& e : sorted.events) {
    StatusEffect effect = taxonomy.contains(e.category) ? taxonomy.status_effect(e.category)
                                                        : StatusEffect::kNone;
    // First sequence whose end is >= t; at a shared boundary the next one
    // opens at t and takes everything but the closing event.
    auto it = std::lower_bound(seqs.begin(), seqs.end(), e.t, [](const Sequence& s, double t) {
      return s.interval.end < t;
    });
    if (it == seqs.end() || it->interval.start > e.t) continue;
    if (effect != StatusEffect::kDeactivate && it->interval.end == e.t) {
      auto next = std::next(it);
      if (next != seqs.end() && next->interval.start == e.t) it = next;
    }
    it->events.push_back(e);
  }
  return seqs;
}

}  // namespace evspot
