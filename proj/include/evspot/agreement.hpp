// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evspot/annotation.hpp"
#include "evspot/metrics.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

struct AgreementOptions {
  std::optional<int> rollup_depth;
  bool with_nn = true;
  bool with_sc = true;
  // Worker threads for directed pairs; 0 picks the hardware concurrency.
  unsigned jobs = 1;
};

/// One directed comparison: docs[pred] evaluated against docs[ref].
struct PairEntry {
  std::size_t pred = 0;
  std::size_t ref = 0;
  std::map<std::string, MetricReport> nn;  // by category
  std::map<std::string, MetricReport> sc;
  // Set when boundary alignment failed; sc is then empty.
  std::string sc_problem;
};

struct ModeSummary {
  Ratio precision;
  Ratio recall;
  Ratio f1;
  Ratio consistent_fraction;
  Ratio consistent_pred_fraction;
};

struct CategorySummary {
  ModeSummary nn;
  ModeSummary sc;
};

struct CountStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct AgreementReport {
  std::vector<std::string> annotators;
  std::vector<std::string> categories;
  std::vector<PairEntry> pairs;
  // individual[i][category]: annotator i as predictor, averaged over its
  // references. Annotators that never predict have empty maps.
  std::vector<std::map<std::string, CategorySummary>> individual;
  // Mean over the annotators that predict.
  std::map<std::string, CategorySummary> mean;
  std::map<std::string, CountStats> num_events;

  const PairEntry* pair(std::size_t pred, std::size_t ref) const;
};

/// Every annotator against every other one, in both directions.
AgreementReport pairwise_agreement(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy,
                                   const std::vector<std::string>& categories,
                                   const ToleranceSpec& tol, const AgreementOptions& options = {});

/// One predictor against several references; annotator 0 is the predictor.
AgreementReport one_vs_many(const AnnotationDoc& pred, const std::vector<AnnotationDoc>& refs,
                            const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                            const ToleranceSpec& tol, const AgreementOptions& options = {});

/// NN and SC reports for one pred/ref pair; shared by eval and agreement.
PairEntry evaluate_pair(const AnnotationDoc& pred, const AnnotationDoc& ref,
                        const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                        const ToleranceSpec& tol, bool with_nn = true, bool with_sc = true,
                        const std::vector<std::string>& attribute_keys = {});

}  // namespace evspot
