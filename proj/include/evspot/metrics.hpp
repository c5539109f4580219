// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evspot/annotation.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

// A ratio whose denominator may be zero; nullopt means undefined.
using Ratio = std::optional<double>;
Ratio make_ratio(double numerator, double denominator);
Ratio f1_score(Ratio precision, Ratio recall);

// Slack on tolerance comparisons so 3-decimal timestamps on the window edge
// still match.
inline constexpr double kTimeEpsilon = 1e-9;

enum class HalfWidthMode { kHalf, kFull };

/// Per-category evaluation windows. Each entry is a full window length
/// w_eval; in kHalf mode events match iff |dt| <= w_eval / 2.
class ToleranceSpec {
 public:
  ToleranceSpec() = default;

  /// Windows for every node with an (inherited) default, plus "@group"
  /// entries holding the largest root window of each path group.
  static ToleranceSpec from_taxonomy(const Taxonomy& taxonomy,
                                     HalfWidthMode mode = HalfWidthMode::kHalf);
  /// Taxonomy defaults overridden by a JSON document
  /// {"mode": "half"|"full", "windows": {"<selector>": seconds}}.
  /// Unknown selectors are a ConfigError.
  static ToleranceSpec parse(std::string_view document, const Taxonomy& taxonomy);
  static ToleranceSpec load_file(const std::string& path, const Taxonomy& taxonomy);

  void set_window(const std::string& selector, double w_eval);
  void set_mode(HalfWidthMode mode) { mode_ = mode; }
  HalfWidthMode mode() const noexcept { return mode_; }

  bool has_window(std::string_view selector) const;
  /// Throws DomainError when no window is known.
  double window(std::string_view selector) const;
  /// Largest |dt| still counted as a match.
  double radius(std::string_view selector) const;
  bool within(double dt, std::string_view selector) const;

  const std::map<std::string, double, std::less<>>& windows() const noexcept { return windows_; }
  std::string to_json() const;

 private:
  std::map<std::string, double, std::less<>> windows_;
  HalfWidthMode mode_ = HalfWidthMode::kHalf;
};

enum class MatchMode { kNnm, kScm };
std::string_view to_string(MatchMode mode);

struct MatchedPair {
  EventRecord pred;
  EventRecord ref;
  bool within_tolerance = true;
  int sequence = -1;  // scm only
};

/// Outcome of matching one category between a prediction and a reference.
///
/// Prediction-side counts (tp, fp) give precision; reference-side counts
/// (matched_ref, fn) give recall. Under SCM both sides only cover consistent
/// sequences, so tp == matched_ref.
struct MatchResult {
  std::string category;
  MatchMode mode = MatchMode::kNnm;
  std::vector<MatchedPair> pairs;
  std::vector<EventRecord> unmatched_pred;
  std::vector<EventRecord> unmatched_ref;

  std::size_t num_pred = 0;
  std::size_t num_ref = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t matched_ref = 0;
  std::size_t fn = 0;

  std::size_t consistent_pred_events = 0;
  std::size_t consistent_ref_events = 0;
  std::size_t consistent_sequences = 0;
  std::size_t total_sequences = 0;
  std::size_t adopted_events = 0;
  // Per-event problems such as a missing partition attribute.
  std::vector<std::string> issues;

  Ratio precision() const { return make_ratio(tp, tp + fp); }
  Ratio recall() const { return make_ratio(matched_ref, matched_ref + fn); }
  Ratio f1() const { return f1_score(precision(), recall()); }
  Ratio consistent_event_fraction() const { return make_ratio(consistent_ref_events, num_ref); }
  Ratio consistent_pred_fraction() const { return make_ratio(consistent_pred_events, num_pred); }
};

/// |A ∩ B| / |A ∪ B| over the time covered by two interval lists. Intervals
/// within one list must not overlap (touching is fine); undefined when both
/// unions are empty.
Ratio temporal_iou(const std::vector<Interval>& a, const std::vector<Interval>& b);
/// Intersection of all unions over union of all unions.
Ratio aggregated_iou(const std::vector<std::vector<Interval>>& lists);
std::vector<Interval> filter_state(const std::vector<Interval>& intervals, std::string_view state);

struct TiouSummary {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<Ratio> values;
  Ratio mean;
  Ratio std;  // population standard deviation over defined pair values
  Ratio aggregated;
};

/// Temporal IoU for every unordered annotation pair. With a state (e.g.
/// "active") only that state counts; with an empty state every label except
/// "none" counts and overlapping time must carry the same label (possession).
TiouSummary pairwise_tiou(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy,
                          PathGroup group, std::string_view state);

/// Nearest-neighbour matching. Each prediction pairs with the nearest
/// reference inside the window (earlier reference on ties), so a reference may
/// absorb several predictions. A reference counts as recalled when at least
/// one prediction lies inside its window.
MatchResult nnm_match(const AnnotationDoc& pred, const AnnotationDoc& ref, const Taxonomy& taxonomy,
                      const CategorySelector& category, const ToleranceSpec& tol);

struct ScoredTime {
  double t = 0.0;
  double score = 0.0;
};

struct ApResult {
  std::vector<double> windows;
  std::vector<Ratio> ap;
  Ratio mean;
};

/// Average precision at one window: predictions ranked by score (earlier on
/// ties) are matched one-to-one to the nearest free reference; the area under
/// the interpolated precision/recall curve is returned.
Ratio average_precision(std::vector<ScoredTime> predictions, std::vector<double> references,
                        double radius);

/// AP for each window length and their mean. Prediction scores come from the
/// "score" attribute; a missing or unparseable score is a DomainError.
ApResult average_precision_over_tolerances(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                           const Taxonomy& taxonomy,
                                           const CategorySelector& category,
                                           const std::vector<double>& windows,
                                           HalfWidthMode mode = HalfWidthMode::kHalf);

struct AlignmentResult {
  AnnotationDoc pred;
  AnnotationDoc ref;
  // Sequence intervals paired by index: (pred, ref).
  std::vector<std::pair<Interval, Interval>> borders;
  std::size_t adopted_into_pred = 0;
  std::size_t adopted_into_ref = 0;
  bool ok = true;
  std::string problem;
};

/// Pairs game-status events of both documents in chronological order
/// (same effect, inside the window of the reference event) and copies every
/// unpaired one into the other document, flagged as adopted. When the result
/// would break status alternation the inputs are returned unchanged with
/// ok == false.
AlignmentResult scm_align_boundaries(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                     const Taxonomy& taxonomy, const ToleranceSpec& tol_status);

/// Sequence consistency matching on aligned documents. Per sequence the
/// category's events are counted on both sides; equal counts are paired in
/// order of occurrence and each pair is a true positive iff inside the
/// window, otherwise one false positive plus one false negative. Sequences
/// with unequal counts are left out and lower the consistent fraction.
/// Throws DomainError when the two documents have different sequence counts.
MatchResult scm_match(const AnnotationDoc& pred, const AnnotationDoc& ref, const Taxonomy& taxonomy,
                      const CategorySelector& category, const ToleranceSpec& tol);

/// scm_match with every sequence further split by equal values of the given
/// attributes (e.g. the passing player). Events lacking an attribute are
/// reported in issues and never paired.
MatchResult scm_match_with_attributes(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                      const Taxonomy& taxonomy, const CategorySelector& category,
                                      const ToleranceSpec& tol,
                                      const std::vector<std::string>& attribute_keys);

struct MetricReport {
  std::string category;
  MatchMode mode = MatchMode::kNnm;
  std::size_t num_pred = 0;
  std::size_t num_ref = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t matched_ref = 0;
  std::size_t fn = 0;
  std::size_t consistent_pred_events = 0;
  std::size_t consistent_ref_events = 0;
  std::size_t consistent_sequences = 0;
  std::size_t total_sequences = 0;
  std::size_t adopted_events = 0;
  Ratio precision;
  Ratio recall;
  Ratio f1;
  Ratio consistent_fraction;       // reference side
  Ratio consistent_pred_fraction;  // prediction side
  std::optional<ApResult> ap;
};

/// Sums the counts of the given results and derives the ratios.
MetricReport report(const std::vector<MatchResult>& results);

}  // namespace evspot
