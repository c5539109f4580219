// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "evspot/annotation.hpp"
#include "evspot/taxonomy.hpp"

namespace evspot {

// Replaces every category by its ancestor at min(depth, own depth).
// Throws DomainError for categories missing from the taxonomy.
AnnotationDoc rollup(const AnnotationDoc& doc, const Taxonomy& taxonomy, int depth);

}  // namespace evspot
