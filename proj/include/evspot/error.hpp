// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evspot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid taxonomy, tolerance, model or spotter configuration.
class ConfigError : public Error {
 public:
  ConfigError(std::string node_id, const std::string& what)
      : Error(node_id.empty() ? what : what + " (node '" + node_id + "')"),
        node_id_(std::move(node_id)) {}

  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

// Malformed input document. line() is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input is well-formed but violates a domain rule required by an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace evspot
