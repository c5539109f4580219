// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evspot/annotation.hpp"
#include "evspot/metrics.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

/// Per-frame confidences for several categories.
///
/// File format:
///   #meta fps=25 offset=0.000
///   frame,<category>,<category>,...
///   0,0.01,0.00
/// Frame indices must be consecutive integers.
struct ScoreStream {
  double fps = 25.0;
  double offset = 0.0;
  long long first_frame = 0;
  std::vector<std::string> categories;
  std::vector<std::vector<double>> scores;  // [frame - first_frame][category]

  std::size_t num_frames() const noexcept { return scores.size(); }
  double time(std::size_t row) const;
  std::size_t column(std::string_view category) const;  // throws DomainError
};

ScoreStream parse_scores(std::string_view text);
ScoreStream load_scores(const std::string& path);
std::string serialize_scores(const ScoreStream& stream);

struct Peak {
  double t = 0.0;
  double score = 0.0;
  long long frame = 0;
};

enum class NmsWidth {
  kHalf,  // suppress frames within ±w_nms/2
  kFull,  // suppress frames within ±w_nms
};

/// Greedy global-maximum suppression over frames with positive score.
/// Ties go to the earlier frame; output is sorted by time.
std::vector<Peak> nms_peaks(const ScoreStream& stream, std::string_view category, double w_nms,
                            NmsWidth width = NmsWidth::kHalf);

struct SpotParams {
  double w_nms = 1.0;
  double tau = 0.5;
};

struct SpotterConfig {
  std::map<std::string, SpotParams> categories;
  NmsWidth width = NmsWidth::kHalf;

  /// {"categories": {"<id>": {"w_nms": s, "tau": t}}, "nms_width": "half"|"full"}
  static SpotterConfig parse(std::string_view document);
  static SpotterConfig load_file(const std::string& path);
  std::string to_json() const;
};

/// Peaks with score >= tau for every stream category, as a sorted document
/// whose events carry a "score" attribute.
AnnotationDoc spot(const ScoreStream& stream, const SpotterConfig& config, const Taxonomy& taxonomy);

struct SearchSpace {
  std::vector<double> w_nms{0.2, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> tau{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  // Optional per-category replacement grids.
  std::map<std::string, SearchSpace> per_category;

  const SearchSpace& for_category(const std::string& category) const;

  /// {"w_nms": [...], "tau": [...], "categories": {"<id>": {"w_nms": [...], "tau": [...]}}}
  static SearchSpace parse(std::string_view document);
  static SearchSpace load_file(const std::string& path);
};

struct TuneResult {
  SpotterConfig config;
  std::map<std::string, double> f1;  // undefined F1 counts as 0
};

/// Exhaustive per-category grid search maximising NN F1 against the
/// reference. Ties prefer the larger w_nms, then the larger tau.
TuneResult tune(const ScoreStream& stream, const AnnotationDoc& reference, const Taxonomy& taxonomy,
                const std::vector<std::string>& categories, const ToleranceSpec& tol,
                const SearchSpace& space = {}, unsigned jobs = 1);

}  // namespace evspot
