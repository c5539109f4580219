// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evspot {

enum class PathGroup { kGameStatus, kPossession, kIndividualBall, kOther };
enum class TimestampKind { kInstant, kIntervalBoundary };
enum class StatusEffect { kNone, kActivate, kDeactivate };
enum class ValueKind { kString, kNumber, kPixelCoordinate, kPlayerId };

std::string_view to_string(PathGroup g);
std::string_view to_string(TimestampKind k);
std::string_view to_string(StatusEffect e);
std::string_view to_string(ValueKind k);
PathGroup parse_path_group(std::string_view s);
TimestampKind parse_timestamp_kind(std::string_view s);
StatusEffect parse_status_effect(std::string_view s);
ValueKind parse_value_kind(std::string_view s);

struct AttributeDef {
  std::string name;
  ValueKind value_kind = ValueKind::kString;
  bool required = false;

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

// One category as written in the config. Inherited properties (window,
// attributes, status effect) are resolved through Taxonomy, not stored here.
struct TaxonomyNode {
  std::string id;
  std::string label;
  std::optional<std::string> parent;
  PathGroup path_group = PathGroup::kOther;
  TimestampKind timestamp_kind = TimestampKind::kInstant;
  std::optional<double> w_eval_default;
  std::vector<AttributeDef> attributes;
  StatusEffect status_effect = StatusEffect::kNone;

  // Last slug of the id.
  std::string_view slug() const;

  friend bool operator==(const TaxonomyNode&, const TaxonomyNode&) = default;
};

/// Immutable category forest for one sport.
///
/// Node ids are slash-separated paths ("ball_release/intentional/pass");
/// depth counts edges from the root of the node's tree, so a root has depth 0.
/// A path group may hold several roots: "ball_reception" and "ball_release"
/// are both depth-0 nodes of the individual_ball group.
class Taxonomy {
 public:
  Taxonomy() = default;

  /// Parses and validates a JSON taxonomy document. Throws ConfigError on
  /// duplicate ids, orphan parents, cyclic parent chains, inconsistent path
  /// encoding, path-group mismatches and attribute redefinitions.
  static Taxonomy parse(std::string_view document);
  static Taxonomy load_file(const std::string& path);
  /// "soccer" or "handball".
  static Taxonomy bundled(std::string_view sport);
  static std::vector<std::string> bundled_names();

  /// Canonical JSON; parse(serialize()) reproduces the node map.
  std::string serialize() const;

  const std::string& sport() const noexcept { return sport_; }
  const std::string& version() const noexcept { return version_; }
  const std::map<std::string, TaxonomyNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::set<std::string>>& exclusion_groups() const noexcept {
    return exclusion_groups_;
  }

  bool contains(std::string_view id) const;
  /// Throws DomainError for unknown ids.
  const TaxonomyNode& node(std::string_view id) const;

  int depth(std::string_view id) const;
  int max_depth() const noexcept { return max_depth_; }
  std::string ancestor_at(std::string_view id, int depth) const;
  bool is_same_or_descendant(std::string_view id, std::string_view ancestor) const;
  std::vector<std::string> children(std::string_view id) const;
  std::vector<std::string> roots(PathGroup group) const;
  std::vector<std::string> leaves() const;
  std::vector<std::string> leaves_under(std::string_view id) const;

  /// Window from the node or its nearest ancestor that defines one.
  std::optional<double> effective_w_eval(std::string_view id) const;
  /// Attributes declared on the node and all its ancestors.
  std::vector<AttributeDef> effective_attributes(std::string_view id) const;
  StatusEffect status_effect(std::string_view id) const;

  /// Indexes of the exclusion groups the category takes part in. A category
  /// belongs to a group when the group contains it, one of its descendants,
  /// or one of its ancestors.
  std::vector<std::size_t> exclusion_groups_of(std::string_view id) const;

 private:
  void build_index();

  std::string sport_;
  std::string version_;
  std::map<std::string, TaxonomyNode> nodes_;
  std::vector<std::set<std::string>> exclusion_groups_;
  std::map<std::string, int, std::less<>> depth_;
  std::map<std::string, std::vector<std::string>, std::less<>> children_;
  int max_depth_ = 0;
};

/// Names which events an evaluation considers: a node id selects the node's
/// subtree, "@game_status" style names select a whole path group.
class CategorySelector {
 public:
  CategorySelector() = default;
  explicit CategorySelector(std::string name);

  const std::string& name() const noexcept { return name_; }
  bool is_group() const noexcept { return group_.has_value(); }
  std::optional<PathGroup> group() const noexcept { return group_; }

  /// False for unknown categories.
  bool matches(const Taxonomy& taxonomy, std::string_view category) const;
  /// Throws DomainError when the selector names nothing in the taxonomy.
  void check(const Taxonomy& taxonomy) const;
  /// Human label: node label or the group name.
  std::string label(const Taxonomy& taxonomy) const;

  friend bool operator==(const CategorySelector&, const CategorySelector&) = default;

 private:
  std::string name_;
  std::optional<PathGroup> group_;
};

}  // namespace evspot
