// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bundled.hpp"
#include "evspot/error.hpp"

namespace evspot {
namespace {

using nlohmann::json;

int count_segments(std::string_view id) {
  return static_cast<int>(std::count(id.begin(), id.end(), '/'));
}

std::string parent_of_path(std::string_view id) {
  auto pos = id.rfind('/');
  return pos == std::string_view::npos ? std::string() : std::string(id.substr(0, pos));
}

bool valid_slug(std::string_view slug) {
  if (slug.empty()) return false;
  return std::all_of(slug.begin(), slug.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

TimestampKind default_kind(PathGroup g) {
  return (g == PathGroup::kGameStatus || g == PathGroup::kPossession)
             ? TimestampKind::kIntervalBoundary
             : TimestampKind::kInstant;
}

// Raw node as read from the document, before inheritance is applied.
struct RawNode {
  TaxonomyNode node;
  bool has_group = false;
  bool has_kind = false;
};

}  // namespace

std::string_view to_string(PathGroup g) {
  switch (g) {
    case PathGroup::kGameStatus: return "game_status";
    case PathGroup::kPossession: return "possession";
    case PathGroup::kIndividualBall: return "individual_ball";
    case PathGroup::kOther: return "other";
  }
  return "other";
}

std::string_view to_string(TimestampKind k) {
  return k == TimestampKind::kInstant ? "instant" : "interval_boundary";
}

std::string_view to_string(StatusEffect e) {
  switch (e) {
    case StatusEffect::kNone: return "none";
    case StatusEffect::kActivate: return "activate";
    case StatusEffect::kDeactivate: return "deactivate";
  }
  return "none";
}

std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::kString: return "string";
    case ValueKind::kNumber: return "number";
    case ValueKind::kPixelCoordinate: return "pixel_coordinate";
    case ValueKind::kPlayerId: return "player_id";
  }
  return "string";
}

PathGroup parse_path_group(std::string_view s) {
  if (s == "game_status") return PathGroup::kGameStatus;
  if (s == "possession") return PathGroup::kPossession;
  if (s == "individual_ball") return PathGroup::kIndividualBall;
  if (s == "other") return PathGroup::kOther;
  throw ConfigError("", "unknown path_group '" + std::string(s) + "'");
}

TimestampKind parse_timestamp_kind(std::string_view s) {
  if (s == "instant") return TimestampKind::kInstant;
  if (s == "interval_boundary") return TimestampKind::kIntervalBoundary;
  throw ConfigError("", "unknown timestamp_kind '" + std::string(s) + "'");
}

StatusEffect parse_status_effect(std::string_view s) {
  if (s == "none") return StatusEffect::kNone;
  if (s == "activate") return StatusEffect::kActivate;
  if (s == "deactivate") return StatusEffect::kDeactivate;
  throw ConfigError("", "unknown status_effect '" + std::string(s) + "'");
}

ValueKind parse_value_kind(std::string_view s) {
  if (s == "string") return ValueKind::kString;
  if (s == "number") return ValueKind::kNumber;
  if (s == "pixel_coordinate") return ValueKind::kPixelCoordinate;
  if (s == "player_id") return ValueKind::kPlayerId;
  throw ConfigError("", "unknown value_kind '" + std::string(s) + "'");
}

std::string_view TaxonomyNode::slug() const {
  std::string_view v = id;
  auto pos = v.rfind('/');
  return pos == std::string_view::npos ? v : v.substr(pos + 1);
}

Taxonomy Taxonomy::parse(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("taxonomy is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "taxonomy document must be an object");

  Taxonomy tax;
  tax.sport_ = doc.value("sport", "");
  tax.version_ = doc.value("version", "");

  std::map<std::string, RawNode> raw;
  const json nodes = doc.value("nodes", json::array());
  if (!nodes.is_array()) throw ConfigError("", "'nodes' must be an array");

  for (const auto& jn : nodes) {
    if (!jn.is_object() || !jn.contains("id") || !jn["id"].is_string()) {
      throw ConfigError("", "every node needs a string 'id'");
    }
    RawNode rn;
    TaxonomyNode& n = rn.node;
    n.id = jn["id"].get<std::string>();
    try {
      n.label = jn.value("label", std::string(n.slug()));
      if (jn.contains("parent") && !jn["parent"].is_null()) n.parent = jn["parent"].get<std::string>();
      if (jn.contains("path_group")) {
        n.path_group = parse_path_group(jn["path_group"].get<std::string>());
        rn.has_group = true;
      }
      if (jn.contains("timestamp_kind")) {
        n.timestamp_kind = parse_timestamp_kind(jn["timestamp_kind"].get<std::string>());
        rn.has_kind = true;
      }
      if (jn.contains("w_eval") && !jn["w_eval"].is_null()) {
        n.w_eval_default = jn["w_eval"].get<double>();
        if (!(*n.w_eval_default > 0.0)) throw ConfigError(n.id, "w_eval must be positive");
      }
      if (jn.contains("status_effect")) {
        n.status_effect = parse_status_effect(jn["status_effect"].get<std::string>());
      }
      for (const auto& ja : jn.value("attributes", json::array())) {
        AttributeDef a;
        a.name = ja.at("name").get<std::string>();
        a.value_kind = parse_value_kind(ja.value("value_kind", "string"));
        a.required = ja.value("required", false);
        n.attributes.push_back(std::move(a));
      }
    } catch (const ConfigError& e) {
      if (!e.node_id().empty()) throw;
      throw ConfigError(n.id, e.what());
    } catch (const json::exception& e) {
      throw ConfigError(n.id, std::string("bad field: ") + e.what());
    }
    if (raw.count(n.id)) throw ConfigError(n.id, "duplicate node id");
    std::string id = n.id;
    raw.emplace(std::move(id), std::move(rn));
  }

  // Parent existence and cycles come before path encoding so that the error
  // names the real structural problem.
  for (const auto& [id, rn] : raw) {
    if (!rn.node.parent) continue;
    if (*rn.node.parent == id) throw ConfigError(id, "cyclic parent chain");
    if (!raw.count(*rn.node.parent)) {
      throw ConfigError(id, "parent '" + *rn.node.parent + "' does not exist");
    }
  }
  for (const auto& [id, rn] : raw) {
    std::set<std::string> seen{id};
    const RawNode* cur = &rn;
    while (cur->node.parent) {
      if (!seen.insert(*cur->node.parent).second) throw ConfigError(id, "cyclic parent chain");
      cur = &raw.at(*cur->node.parent);
    }
  }
  for (const auto& [id, rn] : raw) {
    const std::string expected_parent = parent_of_path(id);
    const std::string actual_parent = rn.node.parent.value_or("");
    if (expected_parent != actual_parent) {
      throw ConfigError(id, "id path does not match parent '" + actual_parent + "'");
    }
    if (!valid_slug(rn.node.slug())) throw ConfigError(id, "invalid slug");
  }

  // Parents precede children once ordered by depth.
  std::vector<std::string> order;
  for (const auto& [id, rn] : raw) order.push_back(id);
  std::stable_sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
    return count_segments(a) < count_segments(b);
  });

  for (const auto& id : order) {
    RawNode& rn = raw.at(id);
    TaxonomyNode& n = rn.node;
    if (n.parent) {
      const TaxonomyNode& p = tax.nodes_.at(*n.parent);
      if (rn.has_group && n.path_group != p.path_group) {
        throw ConfigError(id, "path_group differs from parent");
      }
      n.path_group = p.path_group;
      if (!rn.has_kind) n.timestamp_kind = p.timestamp_kind;
      std::string cur = *n.parent;
      while (!cur.empty()) {
        const TaxonomyNode& anc = tax.nodes_.at(cur);
        for (const auto& a : n.attributes) {
          for (const auto& b : anc.attributes) {
            if (a.name == b.name) {
              throw ConfigError(id, "attribute '" + a.name + "' redefines one inherited from '" +
                                        cur + "'");
            }
          }
        }
        cur = anc.parent.value_or("");
      }
    } else if (!rn.has_kind) {
      n.timestamp_kind = default_kind(n.path_group);
    }
    for (std::size_t i = 0; i < n.attributes.size(); ++i) {
      for (std::size_t j = i + 1; j < n.attributes.size(); ++j) {
        if (n.attributes[i].name == n.attributes[j].name) {
          throw ConfigError(id, "attribute '" + n.attributes[i].name + "' declared twice");
        }
      }
    }
    if (n.status_effect != StatusEffect::kNone && n.path_group != PathGroup::kGameStatus) {
      throw ConfigError(id, "status_effect is only valid in the game_status group");
    }
    tax.nodes_.emplace(id, n);
  }
  tax.build_index();

  if (doc.contains("exclusion_groups")) {
    for (const auto& jg : doc["exclusion_groups"]) {
      std::set<std::string> group;
      std::optional<PathGroup> pg;
      for (const auto& jm : jg) {
        const std::string m = jm.get<std::string>();
        auto it = tax.nodes_.find(m);
        if (it == tax.nodes_.end()) throw ConfigError(m, "exclusion group member does not exist");
        if (pg && *pg != it->second.path_group) {
          throw ConfigError(m, "exclusion group mixes path groups");
        }
        pg = it->second.path_group;
        group.insert(m);
      }
      if (!group.empty()) tax.exclusion_groups_.push_back(std::move(group));
    }
  } else {
    std::set<std::string> group;
    for (const auto& leaf : tax.leaves()) {
      if (tax.nodes_.at(leaf).path_group == PathGroup::kIndividualBall) group.insert(leaf);
    }
    if (!group.empty()) tax.exclusion_groups_.push_back(std::move(group));
  }
  return tax;
}

Taxonomy Taxonomy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Taxonomy Taxonomy::bundled(std::string_view sport) {
  auto text = detail::bundled_taxonomy_text(sport);
  if (!text) throw ConfigError("", "no bundled taxonomy named '" + std::string(sport) + "'");
  return parse(*text);
}

std::vector<std::string> Taxonomy::bundled_names() { return detail::bundled_taxonomy_names(); }

std::string Taxonomy::serialize() const {
  json doc;
  doc["sport"] = sport_;
  doc["version"] = version_;
  json nodes = json::array();
  for (const auto& [id, n] : nodes_) {
    json jn;
    jn["id"] = n.id;
    jn["label"] = n.label;
    if (n.parent) jn["parent"] = *n.parent;
    jn["path_group"] = to_string(n.path_group);
    jn["timestamp_kind"] = to_string(n.timestamp_kind);
    if (n.w_eval_default) jn["w_eval"] = *n.w_eval_default;
    if (n.status_effect != StatusEffect::kNone) jn["status_effect"] = to_string(n.status_effect);
    if (!n.attributes.empty()) {
      json attrs = json::array();
      for (const auto& a : n.attributes) {
        attrs.push_back({{"name", a.name}, {"value_kind", to_string(a.value_kind)},
                         {"required", a.required}});
      }
      jn["attributes"] = attrs;
    }
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = nodes;
  json groups = json::array();
  for (const auto& g : exclusion_groups_) groups.push_back(json(g));
  doc["exclusion_groups"] = groups;
  return doc.dump(2) + "\n";
}

void Taxonomy::build_index() {
  depth_.clear();
  children_.clear();
  max_depth_ = 0;
  for (const auto& [id, n] : nodes_) {
    int d = count_segments(id);
    depth_[id] = d;
    max_depth_ = std::max(max_depth_, d);
    children_[id];
    if (n.parent) children_[*n.parent].push_back(id);
  }
}

bool Taxonomy::contains(std::string_view id) const { return depth_.find(id) != depth_.end(); }

const TaxonomyNode& Taxonomy::node(std::string_view id) const {
  auto it = nodes_.find(std::string(id));
  if (it == nodes_.end()) throw DomainError("unknown category '" + std::string(id) + "'");
  return it->second;
}

int Taxonomy::depth(std::string_view id) const {
  auto it = depth_.find(id);
  if (it == depth_.end()) throw DomainError("unknown category '" + std::string(id) + "'");
  return it->second;
}

std::string Taxonomy::ancestor_at(std::string_view id, int depth) const {
  const int own = this->depth(id);
  if (depth < 0 || depth > own) {
    throw DomainError("depth " + std::to_string(depth) + " exceeds depth " +
                      std::to_string(own) + " of '" + std::string(id) + "'");
  }
  std::string_view v = id;
  for (int d = own; d > depth; --d) v = v.substr(0, v.rfind('/'));
  return std::string(v);
}

bool Taxonomy::is_same_or_descendant(std::string_view id, std::string_view ancestor) const {
  if (!contains(id) || !contains(ancestor)) return false;
  if (id.size() < ancestor.size() || id.substr(0, ancestor.size()) != ancestor) return false;
  return id.size() == ancestor.size() || id[ancestor.size()] == '/';
}

std::vector<std::string> Taxonomy::children(std::string_view id) const {
  auto it = children_.find(id);
  if (it == children_.end()) throw DomainError("unknown category '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> Taxonomy::roots(PathGroup group) const {
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes_) {
    if (!n.parent && n.path_group == group) out.push_back(id);
  }
  return out;
}

std::vector<std::string> Taxonomy::leaves() const {
  std::vector<std::string> out;
  for (const auto& [id, kids] : children_) {
    if (kids.empty()) out.push_back(id);
  }
  return out;
}

std::vector<std::string> Taxonomy::leaves_under(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& leaf : leaves()) {
    if (is_same_or_descendant(leaf, id)) out.push_back(leaf);
  }
  return out;
}

std::optional<double> Taxonomy::effective_w_eval(std::string_view id) const {
  const TaxonomyNode* n = &node(id);
  while (true) {
    if (n->w_eval_default) return n->w_eval_default;
    if (!n->parent) return std::nullopt;
    n = &nodes_.at(*n->parent);
  }
}

std::vector<AttributeDef> Taxonomy::effective_attributes(std::string_view id) const {
  std::vector<AttributeDef> out;
  const TaxonomyNode* n = &node(id);
  while (true) {
    out.insert(out.begin(), n->attributes.begin(), n->attributes.end());
    if (!n->parent) return out;
    n = &nodes_.at(*n->parent);
  }
}

StatusEffect Taxonomy::status_effect(std::string_view id) const {
  const TaxonomyNode* n = &node(id);
  while (true) {
    if (n->status_effect != StatusEffect::kNone) return n->status_effect;
    if (!n->parent) return StatusEffect::kNone;
    n = &nodes_.at(*n->parent);
  }
}

std::vector<std::size_t> Taxonomy::exclusion_groups_of(std::string_view id) const {
  std::vector<std::size_t> out;
  if (!contains(id)) return out;
  for (std::size_t i = 0; i < exclusion_groups_.size(); ++i) {
    for (const auto& m : exclusion_groups_[i]) {
      if (is_same_or_descendant(m, id) || is_same_or_descendant(id, m)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

CategorySelector::CategorySelector(std::string name) : name_(std::move(name)) {
  if (!name_.empty() && name_.front() == '@') {
    try {
      group_ = parse_path_group(std::string_view(name_).substr(1));
    } catch (const ConfigError&) {
      throw DomainError("unknown path group selector '" + name_ + "'");
    }
  }
}

bool CategorySelector::matches(const Taxonomy& taxonomy, std::string_view category) const {
  if (!taxonomy.contains(category)) return false;
  if (group_) return taxonomy.node(category).path_group == *group_;
  return taxonomy.is_same_or_descendant(category, name_);
}

void CategorySelector::check(const Taxonomy& taxonomy) const {
  if (group_) return;
  if (!taxonomy.contains(name_)) throw DomainError("unknown category '" + name_ + "'");
}

std::string CategorySelector::label(const Taxonomy& taxonomy) const {
  if (group_) return std::string(to_string(*group_));
  if (taxonomy.contains(name_)) return taxonomy.node(name_).label;
  return name_;
}

}  // namespace evspot
