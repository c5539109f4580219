// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/manifest.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/core.h>
#include <openssl/evp.h>

#include "json.hpp"

#include "evspot/error.hpp"

namespace evspot {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void RunManifest::add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }

std::string RunManifest::to_json() const {
  using nlohmann::json;
  json j;
  j["command"] = command;
  json in = json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"sha256", digest}});
  j["inputs"] = in;
  j["taxonomy"] = {{"sport", taxonomy_sport}, {"version", taxonomy_version}};
  j["tolerance"] = tolerance_json.empty() ? json(nullptr) : json::parse(tolerance_json);
  j["outputs"] = outputs;
  j["tool_version"] = tool_version;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& directory) const {
  const std::string path = directory + "/manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_json();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace evspot
