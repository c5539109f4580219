// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evspot/annotation.hpp"
#include "evspot/metrics.hpp"
#include "evspot/spotting.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

/// Seeded generator with distribution code of its own, so equal seeds give
/// equal streams on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  long long uniform_int(long long lo, long long hi);  // inclusive
  bool bernoulli(double p);
  double normal(double mean = 0.0, double sd = 1.0);
  double exponential(double rate);
  long long poisson(double mean);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<long long>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

using Mixture = std::vector<std::pair<std::string, double>>;

/// Draws from a mixture without replacement out of a shuffled bag whose slot
/// counts follow the weights, refilling when empty. Long runs hit the
/// proportions closely.
class ShuffleBag {
 public:
  static constexpr int kSlots = 4096;

  explicit ShuffleBag(const Mixture& mixture);
  const std::string& draw(Rng& rng);

 private:
  std::vector<std::string> slots_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct MatchModel {
  double fps = 25.0;
  double duration = 900.0;  // seconds
  int min_sequences = 20;
  int max_sequences = 30;
  double active_share = 0.6;           // of the segment
  double min_sequence_length = 4.0;    // seconds
  double min_inactive_gap = 2.0;       // seconds
  double event_rate = 0.6;             // individual events per second of play
  double min_event_gap = 0.4;          // seconds between individual events
  int max_events_per_sequence = 0;     // 0 = unbounded
  int players_per_team = 11;
  double reception_probability = 0.6;  // used only when no reception bag is derived
  std::optional<std::pair<double, double>> reception_counts;  // (receptions, releases)
  Mixture release_mixture;
  Mixture deactivate_mixture;
  Mixture activate_mixture;
  // Releases after which a team-mate receives; other releases hand the ball
  // to the opponent, unintentional ones to either team.
  std::vector<std::string> keep_possession;
  std::string reception_category = "ball_reception";
  std::string possession_category = "possession_change";
  std::string opening_category;  // first sequence; empty = draw from the mixture
  std::string match_id = "synthetic";
  std::string annotator = "generator";
  std::uint64_t seed = 42;

  /// Mixture defaults for the bundled sports.
  static MatchModel defaults(std::string_view sport);
  /// Overrides on top of defaults(sport) where sport comes from the document
  /// or the fallback.
  static MatchModel parse(std::string_view document, std::string_view fallback_sport);
  static MatchModel load_file(const std::string& path, std::string_view fallback_sport);
  std::string to_json() const;
};

/// A valid match: status events alternating from an inactive start, one
/// opening set piece with a release at the same timestamp per sequence,
/// alternating releases and receptions and possession changes on turnovers.
/// Throws ConfigError for infeasible parameters.
AnnotationDoc generate_match(const MatchModel& model, const Taxonomy& taxonomy);

struct NoiseModel {
  double jitter_sd = 0.0;         // individual and possession events, seconds
  double status_jitter_sd = 0.0;  // status events, seconds
  double miss_rate = 0.0;         // individual events
  double status_miss_rate = 0.0;  // per internal boundary; drops a deactivate/activate pair
  double spurious_per_minute = 0.0;
  double confusion_rate = 0.0;
  int confusion_depth = 3;  // depth of the node swapped for a sibling
  double block_shift_probability = 0.0;
  double block_length = 20.0;  // seconds
  double block_offset = 0.5;   // seconds
  std::string annotator = "perturbed";
  std::uint64_t seed = 7;

  bool is_zero() const;
  static NoiseModel parse(std::string_view document);
  static NoiseModel load_file(const std::string& path);
  std::string to_json() const;
};

/// Noisy copy of a valid document. With all-zero noise the input comes back
/// unchanged apart from the annotator name.
AnnotationDoc perturb(const AnnotationDoc& doc, const NoiseModel& noise, const Taxonomy& taxonomy);

struct BiasDemoResult {
  int duplicates = 0;
  std::string category;
  AnnotationDoc reference;
  AnnotationDoc prediction;
  MetricReport nn;
  MetricReport sc;
};

/// Reference passes in two sequences and a prediction repeating every pass
/// `duplicates` extra times a few frames away (at most 10 extra copies).
BiasDemoResult bias_demo(std::uint64_t seed, int duplicates, const Taxonomy& taxonomy);

enum class StreamShape { kSpike, kBlur, kNoisy };

struct StreamOptions {
  StreamShape shape = StreamShape::kSpike;
  double fps = 25.0;
  double blur_sd = 0.2;     // seconds
  double peak = 1.0;
  double noise_level = 0.2;  // upper bound of background noise
  std::uint64_t seed = 1;
};

/// Score stream over the document segment with one column per category
/// (selector semantics) that peaks at every matching event.
ScoreStream score_stream_from_doc(const AnnotationDoc& doc, const Taxonomy& taxonomy,
                                  const std::vector<std::string>& categories,
                                  const StreamOptions& options = {});

}  // namespace evspot
