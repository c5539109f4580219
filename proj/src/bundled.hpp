// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evspot::detail {

// Generated at configure time from data/taxonomies/*.taxonomy.
std::optional<std::string_view> bundled_taxonomy_text(std::string_view name);
std::vector<std::string> bundled_taxonomy_names();

}  // namespace evspot::detail
