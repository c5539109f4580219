// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace evspot {

// Hex SHA-256 of a file's bytes; throws IoError when unreadable.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

/// Record of the command that produced an output directory. Holds no
/// wall-clock data, so equal runs write equal manifests.
struct RunManifest {
  std::vector<std::string> command;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::string taxonomy_sport;
  std::string taxonomy_version;
  std::string tolerance_json;  // empty when not applicable
  std::vector<std::string> outputs;
  std::string tool_version;
  std::optional<std::uint64_t> seed;

  void add_input(const std::string& path);
  std::string to_json() const;
  void write(const std::string& directory) const;  // <directory>/manifest.json
};

}  // namespace evspot
