// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evspot/agreement.hpp"
#include "evspot/metrics.hpp"

namespace evspot {

// Percent with one decimal, "-" when undefined.
std::string format_percent(Ratio r);

/// Aligned text table: one row per category with the window, event counts,
/// NN precision/recall and SC precision/recall. SC cells carry the
/// consistent-event percentage in brackets: prediction side next to
/// precision, reference side next to recall.
std::string render_table(const PairEntry& entry, const std::vector<std::string>& categories,
                         const ToleranceSpec& tol);
std::string pair_to_json(const PairEntry& entry, const std::vector<std::string>& categories,
                         const ToleranceSpec& tol, const std::optional<TiouSummary>& status_iou = {},
                         const std::optional<TiouSummary>& possession_iou = {});

/// Mean table, per-annotator table and directed pair matrices.
std::string render_agreement(const AgreementReport& report, const ToleranceSpec& tol);
std::string agreement_to_json(const AgreementReport& report, const ToleranceSpec& tol,
                              const std::optional<TiouSummary>& status_iou = {},
                              const std::optional<TiouSummary>& possession_iou = {});

}  // namespace evspot
