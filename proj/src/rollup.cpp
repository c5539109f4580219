// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/rollup.hpp"

#include <algorithm>

#include "evspot/error.hpp"

namespace evspot {

AnnotationDoc rollup(const AnnotationDoc& doc, const Taxonomy& taxonomy, int depth) {
  if (depth < 0) throw DomainError("roll-up depth must be >= 0");
  AnnotationDoc out = doc;
  for (auto& e : out.events) {
    if (!taxonomy.contains(e.category)) {
      throw DomainError("cannot roll up unknown category '" + e.category + "'");
    }
    e.category = taxonomy.ancestor_at(e.category, std::min(depth, taxonomy.depth(e.category)));
  }
  out.sort();
  return out;
}

}  // namespace evspot
