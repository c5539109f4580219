// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evspot/taxonomy.hpp"

namespace evspot {

struct EventRecord {
  double t = 0.0;  // seconds
  std::string category;
  std::map<std::string, std::string> attributes;
  std::string annotator;
  std::string match_id;
  // Copied from the other annotation during sequence boundary alignment.
  bool adopted = false;

  const std::string* attribute(std::string_view name) const;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Total order used for documents: time, then category, then the rest.
bool event_less(const EventRecord& a, const EventRecord& b);

struct AnnotationDoc {
  std::vector<EventRecord> events;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::optional<double> fps;
  std::string match_id;
  std::string annotator;
  std::optional<std::string> initial_status;      // "active" | "inactive"
  std::optional<std::string> initial_possession;  // team label

  void sort();

  friend bool operator==(const AnnotationDoc&, const AnnotationDoc&) = default;
};

/// Time of a frame index; every frame-grid timestamp in the library goes
/// through this so equal frames compare equal as doubles.
double frame_time(long long frame, double fps, double offset = 0.0);

/// Fixed 3-decimal rendering used by the canonical event format.
std::string format_seconds(double t);

struct ParseOptions {
  // Reject timestamps that are not on the fps grid instead of keeping them.
  bool strict_frames = false;
};

/// Reads the line-oriented event format or the CSV import profile.
/// Throws ParseError with the offending line number.
AnnotationDoc parse_annotations(std::string_view text, const ParseOptions& options = {});
AnnotationDoc load_annotations(const std::string& path, const ParseOptions& options = {});

/// Canonical form: sorted events, fixed key order, 3-decimal timestamps.
std::string serialize_annotations(const AnnotationDoc& doc);
void save_annotations(const std::string& path, const AnnotationDoc& doc);

struct Violation {
  std::string rule;  // unknown_category, missing_attribute, exclusion_clash, ...
  double t = 0.0;
  std::string category;
  std::string message;
};

/// Structural rule check. Violations are data; this never throws for
/// rule breaches.
std::vector<Violation> validate(const AnnotationDoc& doc, const Taxonomy& taxonomy);

struct Interval {
  double start = 0.0;
  double end = 0.0;
  std::string state;

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr std::string_view kActive = "active";
inline constexpr std::string_view kInactive = "inactive";
inline constexpr std::string_view kNoPossession = "none";
inline constexpr std::string_view kTeamAttribute = "team";

/// Tiles [t_begin, t_end] with state intervals for game_status
/// ("active"/"inactive") or possession (team labels). Throws DomainError on
/// broken alternation or events outside the segment.
std::vector<Interval> derive_intervals(const AnnotationDoc& doc, const Taxonomy& taxonomy,
                                       PathGroup group);

/// The game status the document starts in.
std::string initial_game_status(const AnnotationDoc& doc, const Taxonomy& taxonomy);

struct Sequence {
  int index = 0;
  Interval interval;
  std::vector<EventRecord> events;
};

/// One sequence per active interval. An event exactly on a boundary shared by
/// two sequences goes to the one it opens, except deactivating status events
/// which stay with the sequence they close.
std::vector<Sequence> segment_sequences(const AnnotationDoc& doc, const Taxonomy& taxonomy);

}  // namespace evspot
