// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "evspot/error.hpp"

namespace evspot {
namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

long long to_frame(double t, double fps) { return std::llround(t * fps); }

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view document, const char* what) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string(what) + " is not valid JSON: " + e.what());
  }
}

const Mixture kSoccerReleases = {
    {"ball_release/intentional/pass/intercepted", 83},
    {"ball_release/intentional/pass/off_target", 175},
    {"ball_release/intentional/pass/successful_deflected", 24},
    {"ball_release/intentional/pass/successful_untouched", 1064},
    {"ball_release/intentional/shot/blocked", 17},
    {"ball_release/intentional/shot/off_target", 8},
    {"ball_release/intentional/shot/successful", 6},
    {"ball_release/unintentional/other", 74},
    {"ball_release/unintentional/successful_interference", 80},
};
const Mixture kSoccerReferee = {
    {"referee_decision/ball_out_of_field", 101}, {"referee_decision/foul", 32},
    {"referee_decision/goal", 3},                {"referee_decision/other", 5},
    {"referee_decision/yellow", 1},
};
const Mixture kSoccerStatic = {
    {"static_ball_action/corner", 11},   {"static_ball_action/free-kick", 29},
    {"static_ball_action/game_start", 1}, {"static_ball_action/goal-kick", 18},
    {"static_ball_action/kick-off", 1},  {"static_ball_action/penalty", 1},
    {"static_ball_action/throw-in", 60},
};
const Mixture kHandballReleases = {
    {"ball_release/intentional/pass/intercepted", 14},
    {"ball_release/intentional/pass/off_target", 9},
    {"ball_release/intentional/pass/successful_deflected", 6},
    {"ball_release/intentional/pass/successful_untouched", 2263},
    {"ball_release/intentional/shot/blocked", 61},
    {"ball_release/intentional/shot/goal_frame", 8},
    {"ball_release/intentional/shot/off_target", 12},
    {"ball_release/intentional/shot/successful", 94},
    {"ball_release/unintentional/successful_interference", 3},
};
const Mixture kHandballReferee = {
    {"referee_decision/ball_out_of_field", 21}, {"referee_decision/foul", 114},
    {"referee_decision/goal", 86},              {"referee_decision/other", 10},
    {"referee_decision/two_min", 8},            {"referee_decision/yellow", 13},
};
const Mixture kHandballStatic = {
    {"static_ball_action/free-kick", 84}, {"static_ball_action/game_start", 2},
    {"static_ball_action/kick-off", 87},  {"static_ball_action/other", 6},
    {"static_ball_action/penalty", 11},   {"static_ball_action/throw-in", 17},
};

const std::vector<std::string> kKeepPossession = {
    "ball_release/intentional/pass/successful_deflected",
    "ball_release/intentional/pass/successful_untouched",
};

json mixture_json(const Mixture& m) {
  json j = json::object();
  for (const auto& [k, w] : m) j[k] = w;
  return j;
}

Mixture mixture_from(const json& j, const char* key) {
  if (!j.is_object()) throw ConfigError(key, "mixture must be an object of weights");
  Mixture m;
  for (const auto& [k, w] : j.items()) {
    if (!w.is_number() || w.get<double>() < 0.0) throw ConfigError(k, "mixture weight must be >= 0");
    m.emplace_back(k, w.get<double>());
  }
  return m;
}

void check_mixture(const Mixture& m, const Taxonomy& taxonomy, const char* what,
                   const std::function<bool(const std::string&)>& ok) {
  if (m.empty()) throw ConfigError(what, "mixture is empty");
  double total = 0.0;
  for (const auto& [id, w] : m) {
    if (!taxonomy.contains(id)) throw ConfigError(id, std::string("unknown category in ") + what);
    if (!ok(id)) throw ConfigError(id, std::string("category does not fit the ") + what);
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError(what, "mixture weights sum to zero");
}

// Splits `total` frames into `parts` lengths of at least `minimum` each.
std::vector<long long> split_frames(long long total, int parts, long long minimum, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(parts));
  double sum = 0.0;
  for (auto& x : w) {
    x = rng.uniform(0.5, 1.5);
    sum += x;
  }
  const long long extra = total - minimum * parts;
  std::vector<long long> out(static_cast<std::size_t>(parts));
  long long used = 0;
  for (int i = 0; i < parts; ++i) {
    out[i] = minimum + static_cast<long long>(std::floor(static_cast<double>(extra) * w[i] / sum));
    used += out[i];
  }
  for (int i = 0; used < total; ++i, ++used) ++out[static_cast<std::size_t>(i % parts)];
  return out;
}

bool in_any(const Taxonomy& taxonomy, const std::string& id, const std::vector<std::string>& roots) {
  return std::any_of(roots.begin(), roots.end(),
                     [&](const std::string& r) { return taxonomy.contains(r) && taxonomy.is_same_or_descendant(id, r); });
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

long long Rng::uniform_int(long long lo, long long hi) {
  if (hi < lo) throw DomainError("empty integer range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<long long>(engine_());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<long long>(x % span);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal(double mean, double sd) {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return mean + sd * z;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_normal_ = r * std::sin(kTwoPi * u2);
  return mean + sd * r * std::cos(kTwoPi * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

long long Rng::poisson(double mean) {
  if (mean < 0.0) throw DomainError("poisson mean must be >= 0");
  long long n = 0;
  // Split large means so exp(-mean) does not underflow.
  while (mean > 30.0) {
    n += poisson(30.0);
    mean -= 30.0;
  }
  const double limit = std::exp(-mean);
  double p = uniform();
  while (p > limit) {
    ++n;
    p *= uniform();
  }
  return n;
}

ShuffleBag::ShuffleBag(const Mixture& mixture) {
  double total = 0.0;
  for (const auto& [id, w] : mixture) total += w;
  if (mixture.empty() || !(total > 0.0)) throw ConfigError("", "mixture is empty");
  // Largest remainder apportionment of kSlots.
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  std::vector<int> counts(mixture.size());
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const double exact = mixture[i].second / total * kSlots;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < kSlots; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    for (int c = 0; c < counts[i]; ++c) slots_.push_back(mixture[i].first);
  }
  cursor_ = slots_.size();
  order_.resize(slots_.size());
}

const std::string& ShuffleBag::draw(Rng& rng) {
  if (cursor_ >= order_.size()) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    rng.shuffle(order_);
    cursor_ = 0;
  }
  return slots_[order_[cursor_++]];
}

MatchModel MatchModel::defaults(std::string_view sport) {
  MatchModel m;
  if (sport == "soccer") {
    m.release_mixture = kSoccerReleases;
    m.deactivate_mixture = kSoccerReferee;
    m.activate_mixture = kSoccerStatic;
    m.reception_counts = std::make_pair(923.0, 1531.0);
    m.players_per_team = 11;
  } else if (sport == "handball") {
    m.release_mixture = kHandballReleases;
    m.deactivate_mixture = kHandballReferee;
    m.activate_mixture = kHandballStatic;
    m.reception_counts = std::make_pair(2268.0, 2470.0);
    m.players_per_team = 7;
  } else {
    return m;
  }
  m.keep_possession = kKeepPossession;
  m.opening_category = "static_ball_action/game_start";
  return m;
}

MatchModel MatchModel::parse(std::string_view document, std::string_view fallback_sport) {
  const json j = parse_json(document, "match model");
  if (!j.is_object()) throw ConfigError("", "match model must be a JSON object");
  MatchModel m = defaults(j.value("sport", std::string(fallback_sport)));
  auto num = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      if (!j[key].is_number()) throw ConfigError(key, "expected a number");
      field = j[key].get<std::decay_t<decltype(field)>>();
    }
  };
  auto str = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j[key].get<std::string>();
  };
  num("fps", m.fps);
  num("duration", m.duration);
  num("min_sequences", m.min_sequences);
  num("max_sequences", m.max_sequences);
  num("active_share", m.active_share);
  num("min_sequence_length", m.min_sequence_length);
  num("min_inactive_gap", m.min_inactive_gap);
  num("event_rate", m.event_rate);
  num("min_event_gap", m.min_event_gap);
  num("max_events_per_sequence", m.max_events_per_sequence);
  num("players_per_team", m.players_per_team);
  num("reception_probability", m.reception_probability);
  num("seed", m.seed);
  if (j.contains("reception_counts")) {
    const auto& rc = j["reception_counts"];
    if (rc.is_null()) {
      m.reception_counts.reset();
    } else {
      if (!rc.is_array() || rc.size() != 2) throw ConfigError("reception_counts", "expected [receptions, releases]");
      m.reception_counts = std::make_pair(rc[0].get<double>(), rc[1].get<double>());
    }
  }
  if (j.contains("release_mixture")) m.release_mixture = mixture_from(j["release_mixture"], "release_mixture");
  if (j.contains("deactivate_mixture")) m.deactivate_mixture = mixture_from(j["deactivate_mixture"], "deactivate_mixture");
  if (j.contains("activate_mixture")) m.activate_mixture = mixture_from(j["activate_mixture"], "activate_mixture");
  if (j.contains("keep_possession")) m.keep_possession = j["keep_possession"].get<std::vector<std::string>>();
  str("reception_category", m.reception_category);
  str("possession_category", m.possession_category);
  str("opening_category", m.opening_category);
  str("match_id", m.match_id);
  str("annotator", m.annotator);
  return m;
}

MatchModel MatchModel::load_file(const std::string& path, std::string_view fallback_sport) {
  return parse(read_file(path, "match model"), fallback_sport);
}

std::string MatchModel::to_json() const {
  json j;
  j["fps"] = fps;
  j["duration"] = duration;
  j["min_sequences"] = min_sequences;
  j["max_sequences"] = max_sequences;
  j["active_share"] = active_share;
  j["min_sequence_length"] = min_sequence_length;
  j["min_inactive_gap"] = min_inactive_gap;
  j["event_rate"] = event_rate;
  j["min_event_gap"] = min_event_gap;
  j["max_events_per_sequence"] = max_events_per_sequence;
  j["players_per_team"] = players_per_team;
  j["reception_probability"] = reception_probability;
  j["reception_counts"] =
      reception_counts ? json::array({reception_counts->first, reception_counts->second}) : json(nullptr);
  j["release_mixture"] = mixture_json(release_mixture);
  j["deactivate_mixture"] = mixture_json(deactivate_mixture);
  j["activate_mixture"] = mixture_json(activate_mixture);
  j["keep_possession"] = keep_possession;
  j["reception_category"] = reception_category;
  j["possession_category"] = possession_category;
  j["opening_category"] = opening_category;
  j["match_id"] = match_id;
  j["annotator"] = annotator;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

AnnotationDoc generate_match(const MatchModel& model, const Taxonomy& taxonomy) {
  if (!(model.fps > 0.0)) throw ConfigError("fps", "must be positive");
  if (!(model.duration > 0.0)) throw ConfigError("duration", "must be positive");
  if (model.min_sequences < 1 || model.max_sequences < model.min_sequences) {
    throw ConfigError("min_sequences", "need 1 <= min_sequences <= max_sequences");
  }
  if (!(model.active_share > 0.0 && model.active_share < 1.0)) {
    throw ConfigError("active_share", "must lie in (0, 1)");
  }
  if (model.event_rate < 0.0) throw ConfigError("event_rate", "must be >= 0");
  if (model.min_event_gap * model.fps < 1.0 - 1e-9) {
    throw ConfigError("min_event_gap", "shorter than one frame; exclusive events would collide");
  }
  if (model.players_per_team < 2) throw ConfigError("players_per_team", "must be at least 2");
  if (model.max_events_per_sequence < 0) throw ConfigError("max_events_per_sequence", "must be >= 0");
  if (!model.reception_counts &&
      !(model.reception_probability >= 0.0 && model.reception_probability <= 1.0)) {
    throw ConfigError("reception_probability", "must lie in [0, 1]");
  }
  check_mixture(model.activate_mixture, taxonomy, "activate_mixture", [&](const std::string& id) {
    return taxonomy.status_effect(id) == StatusEffect::kActivate;
  });
  check_mixture(model.deactivate_mixture, taxonomy, "deactivate_mixture", [&](const std::string& id) {
    return taxonomy.status_effect(id) == StatusEffect::kDeactivate;
  });
  const bool with_play = model.event_rate > 0.0;
  if (with_play) {
    check_mixture(model.release_mixture, taxonomy, "release_mixture", [&](const std::string& id) {
      return taxonomy.node(id).path_group == PathGroup::kIndividualBall;
    });
    if (!taxonomy.contains(model.reception_category)) {
      throw ConfigError(model.reception_category, "reception category not in taxonomy");
    }
    if (!taxonomy.contains(model.possession_category) ||
        taxonomy.node(model.possession_category).path_group != PathGroup::kPossession) {
      throw ConfigError(model.possession_category, "possession category not in the possession group");
    }
  }
  if (!model.opening_category.empty() && taxonomy.contains(model.opening_category) &&
      taxonomy.status_effect(model.opening_category) != StatusEffect::kActivate) {
    throw ConfigError(model.opening_category, "opening category must activate play");
  }

  Rng rng(model.seed);
  const int n_seq = static_cast<int>(rng.uniform_int(model.min_sequences, model.max_sequences));
  const long long total = to_frame(model.duration, model.fps);
  const long long active = static_cast<long long>(std::llround(model.active_share * static_cast<double>(total)));
  const long long inactive = total - active;
  const long long min_seq = std::max<long long>(1, static_cast<long long>(std::ceil(model.min_sequence_length * model.fps - 1e-9)));
  const long long min_gap = std::max<long long>(1, static_cast<long long>(std::ceil(model.min_inactive_gap * model.fps - 1e-9)));
  const long long event_gap = static_cast<long long>(std::ceil(model.min_event_gap * model.fps - 1e-9));
  if (active < min_seq * n_seq || inactive < min_gap * (n_seq + 1)) {
    throw ConfigError("duration", "segment too short for the drawn number of sequences");
  }
  const auto lengths = split_frames(active, n_seq, min_seq, rng);
  const auto gaps = split_frames(inactive, n_seq + 1, min_gap, rng);

  ShuffleBag activate_bag(model.activate_mixture);
  ShuffleBag deactivate_bag(model.deactivate_mixture);
  std::optional<ShuffleBag> release_bag;
  std::optional<ShuffleBag> reception_bag;
  if (with_play) {
    release_bag.emplace(model.release_mixture);
    const auto [rec, rel] = model.reception_counts.value_or(
        std::make_pair(model.reception_probability, 1.0));
    reception_bag.emplace(Mixture{{"no", std::max(0.0, rel - rec)}, {"yes", rec}});
  }

  AnnotationDoc doc;
  doc.fps = model.fps;
  doc.t_begin = 0.0;
  doc.t_end = frame_time(total, model.fps);
  doc.match_id = model.match_id;
  doc.annotator = model.annotator;
  doc.initial_status = std::string(kInactive);

  auto emit = [&](long long frame, const std::string& category) -> EventRecord& {
    EventRecord e;
    e.t = frame_time(frame, model.fps);
    e.category = category;
    e.annotator = model.annotator;
    e.match_id = model.match_id;
    doc.events.push_back(std::move(e));
    return doc.events.back();
  };
  auto player = [&](const std::string& team, const std::string& avoid) {
    std::string id;
    do {
      id = team + std::to_string(rng.uniform_int(1, model.players_per_team));
    } while (id == avoid);
    return id;
  };
  auto other = [](const std::string& team) { return team == "A" ? std::string("B") : std::string("A"); };

  std::string possession;
  auto take_possession = [&](long long frame, const std::string& team) {
    if (team == possession) return;
    emit(frame, model.possession_category).attributes[std::string(kTeamAttribute)] = team;
    possession = team;
  };

  long long cursor = 0;
  for (int k = 0; k < n_seq; ++k) {
    cursor += gaps[static_cast<std::size_t>(k)];
    const long long start = cursor;
    cursor += lengths[static_cast<std::size_t>(k)];
    const long long end = cursor;

    const bool use_opening = k == 0 && !model.opening_category.empty() && taxonomy.contains(model.opening_category);
    emit(start, use_opening ? model.opening_category : activate_bag.draw(rng));

    if (with_play) {
      std::string team = rng.bernoulli(0.5) ? "A" : "B";
      take_possession(start, team);
      std::string holder = player(team, "");
      std::string last = release_bag->draw(rng);
      emit(start, last).attributes["player"] = holder;
      bool last_was_release = true;
      int count = 1;
      long long frame = start;
      while (model.max_events_per_sequence == 0 || count < model.max_events_per_sequence) {
        const long long next =
            frame + event_gap + static_cast<long long>(std::floor(rng.exponential(model.event_rate) * model.fps));
        if (next >= end) break;
        if (last_was_release) {
          std::string new_team;
          if (in_any(taxonomy, last, model.keep_possession)) {
            new_team = possession;
          } else if (last.find("unintentional") != std::string::npos) {
            new_team = rng.bernoulli(0.5) ? "A" : "B";
          } else {
            new_team = other(possession);
          }
          if (reception_bag->draw(rng) == "yes") {
            holder = player(new_team, new_team == possession ? holder : "");
            take_possession(next, new_team);
            emit(next, model.reception_category).attributes["player"] = holder;
            last_was_release = false;
          } else {
            // Loose ball: the next touch is another release.
            holder = player(new_team, "");
            take_possession(next, new_team);
            last = release_bag->draw(rng);
            emit(next, last).attributes["player"] = holder;
          }
        } else {
          last = release_bag->draw(rng);
          emit(next, last).attributes["player"] = holder;
          last_was_release = true;
        }
        ++count;
        frame = next;
      }
    }
    emit(end, deactivate_bag.draw(rng));
  }
  doc.sort();
  return doc;
}

bool NoiseModel::is_zero() const {
  return jitter_sd == 0.0 && status_jitter_sd == 0.0 && miss_rate == 0.0 && status_miss_rate == 0.0 &&
         spurious_per_minute == 0.0 && confusion_rate == 0.0 && block_shift_probability == 0.0;
}

NoiseModel NoiseModel::parse(std::string_view document) {
  const json j = parse_json(document, "noise model");
  if (!j.is_object()) throw ConfigError("", "noise model must be a JSON object");
  NoiseModel n;
  auto num = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      if (!j[key].is_number()) throw ConfigError(key, "expected a number");
      field = j[key].get<std::decay_t<decltype(field)>>();
    }
  };
  num("jitter_sd", n.jitter_sd);
  num("status_jitter_sd", n.status_jitter_sd);
  num("miss_rate", n.miss_rate);
  num("status_miss_rate", n.status_miss_rate);
  num("spurious_per_minute", n.spurious_per_minute);
  num("confusion_rate", n.confusion_rate);
  num("confusion_depth", n.confusion_depth);
  num("block_shift_probability", n.block_shift_probability);
  num("block_length", n.block_length);
  num("block_offset", n.block_offset);
  num("seed", n.seed);
  if (j.contains("annotator")) n.annotator = j["annotator"].get<std::string>();
  if (n.jitter_sd < 0.0 || n.status_jitter_sd < 0.0) throw ConfigError("jitter_sd", "must be >= 0");
  if (n.miss_rate < 0.0 || n.miss_rate > 1.0) throw ConfigError("miss_rate", "must lie in [0, 1]");
  if (n.status_miss_rate < 0.0 || n.status_miss_rate > 1.0) {
    throw ConfigError("status_miss_rate", "must lie in [0, 1]");
  }
  if (n.spurious_per_minute < 0.0) throw ConfigError("spurious_per_minute", "must be >= 0");
  if (n.confusion_rate < 0.0 || n.confusion_rate > 1.0) throw ConfigError("confusion_rate", "must lie in [0, 1]");
  if (n.block_shift_probability < 0.0 || n.block_shift_probability > 1.0) {
    throw ConfigError("block_shift_probability", "must lie in [0, 1]");
  }
  return n;
}

NoiseModel NoiseModel::load_file(const std::string& path) { return parse(read_file(path, "noise model")); }

std::string NoiseModel::to_json() const {
  json j;
  j["jitter_sd"] = jitter_sd;
  j["status_jitter_sd"] = status_jitter_sd;
  j["miss_rate"] = miss_rate;
  j["status_miss_rate"] = status_miss_rate;
  j["spurious_per_minute"] = spurious_per_minute;
  j["confusion_rate"] = confusion_rate;
  j["confusion_depth"] = confusion_depth;
  j["block_shift_probability"] = block_shift_probability;
  j["block_length"] = block_length;
  j["block_offset"] = block_offset;
  j["annotator"] = annotator;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

AnnotationDoc perturb(const AnnotationDoc& input, const NoiseModel& noise, const Taxonomy& taxonomy) {
  AnnotationDoc doc = input;
  doc.sort();
  const double fps = doc.fps.value_or(25.0);
  const long long first = to_frame(doc.t_begin, fps);
  const long long last = to_frame(doc.t_end, fps);
  Rng rng(noise.seed);

  std::vector<EventRecord> status, possession, individual, rest;
  for (auto& e : doc.events) {
    if (!taxonomy.contains(e.category)) {
      rest.push_back(std::move(e));
    } else if (taxonomy.status_effect(e.category) != StatusEffect::kNone) {
      status.push_back(std::move(e));
    } else if (taxonomy.node(e.category).path_group == PathGroup::kPossession) {
      possession.push_back(std::move(e));
    } else if (taxonomy.node(e.category).path_group == PathGroup::kIndividualBall) {
      individual.push_back(std::move(e));
    } else {
      rest.push_back(std::move(e));
    }
  }

  // Missed boundaries: drop a deactivating event together with the
  // activating event that follows it.
  {
    std::vector<EventRecord> kept;
    for (std::size_t i = 0; i < status.size(); ++i) {
      const bool pair = i + 1 < status.size() &&
                        taxonomy.status_effect(status[i].category) == StatusEffect::kDeactivate &&
                        taxonomy.status_effect(status[i + 1].category) == StatusEffect::kActivate;
      if (pair && rng.bernoulli(noise.status_miss_rate)) {
        ++i;
        continue;
      }
      kept.push_back(std::move(status[i]));
    }
    status = std::move(kept);
  }

  // Jitter that keeps the order of a chain intact.
  auto ordered_jitter = [&](std::vector<EventRecord>& chain, double sd) {
    long long prev = first - 1;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const long long orig = to_frame(chain[i].t, fps);
      const long long shift = std::llround(rng.normal(0.0, sd) * fps);
      const long long lo = std::max(prev + 1, first);
      const long long hi = std::min(i + 1 < chain.size() ? to_frame(chain[i + 1].t, fps) - 1 : last, last);
      const long long f = lo <= hi ? std::clamp(orig + shift, lo, hi) : orig;
      if (f != orig) chain[i].t = frame_time(f, fps);
      prev = to_frame(chain[i].t, fps);
    }
  };
  ordered_jitter(status, noise.status_jitter_sd);
  ordered_jitter(possession, noise.jitter_sd);

  {
    std::vector<EventRecord> kept;
    for (auto& e : individual) {
      const bool miss = rng.bernoulli(noise.miss_rate);
      const bool confuse = rng.bernoulli(noise.confusion_rate);
      const double shift = rng.normal(0.0, noise.jitter_sd);
      if (miss) continue;
      if (confuse) {
        const int d = noise.confusion_depth;
        if (d >= 1 && d <= taxonomy.depth(e.category)) {
          const std::string anc = taxonomy.ancestor_at(e.category, d);
          std::vector<std::string> siblings;
          const auto& parent = taxonomy.node(anc).parent;
          for (const auto& s : parent ? taxonomy.children(*parent) : taxonomy.roots(PathGroup::kIndividualBall)) {
            if (s != anc && taxonomy.node(s).path_group == PathGroup::kIndividualBall) siblings.push_back(s);
          }
          if (!siblings.empty()) {
            const std::string& s = siblings[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(siblings.size()) - 1))];
            if (anc == e.category) {
              e.category = s;
            } else {
              const auto leaves = taxonomy.leaves_under(s);
              e.category = leaves.empty() ? s
                                          : leaves[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(leaves.size()) - 1))];
            }
          }
        }
      }
      const long long df = std::llround(shift * fps);
      if (df != 0) e.t = frame_time(std::clamp(to_frame(e.t, fps) + df, first, last), fps);
      kept.push_back(std::move(e));
    }
    individual = std::move(kept);
  }

  if (rng.bernoulli(noise.block_shift_probability)) {
    const double span = std::max(0.0, (doc.t_end - doc.t_begin) - noise.block_length);
    const double start = doc.t_begin + rng.uniform(0.0, span);
    const long long df = std::llround(noise.block_offset * fps);
    for (auto& e : individual) {
      if (e.t >= start && e.t < start + noise.block_length && df != 0) {
        e.t = frame_time(std::clamp(to_frame(e.t, fps) + df, first, last), fps);
      }
    }
  }

  const long long n_spurious = rng.poisson(noise.spurious_per_minute * (doc.t_end - doc.t_begin) / 60.0);
  if (n_spurious > 0) {
    AnnotationDoc status_only = doc;
    status_only.events = status;
    std::vector<std::pair<long long, long long>> spans;
    for (const auto& iv : derive_intervals(status_only, taxonomy, PathGroup::kGameStatus)) {
      if (iv.state == kActive) spans.emplace_back(to_frame(iv.start, fps), to_frame(iv.end, fps));
    }
    if (spans.empty()) spans.emplace_back(first, last);
    long long frames = 0;
    for (const auto& [a, b] : spans) frames += b - a + 1;
    std::vector<std::string> leaves;
    for (const auto& l : taxonomy.leaves()) {
      if (taxonomy.node(l).path_group == PathGroup::kIndividualBall) leaves.push_back(l);
    }
    std::set<std::string> players;
    for (const auto& e : individual) {
      if (const auto* p = e.attribute("player")) players.insert(*p);
    }
    const std::vector<std::string> player_list(players.begin(), players.end());
    for (long long n = 0; n < n_spurious && !leaves.empty(); ++n) {
      long long pick = rng.uniform_int(0, frames - 1);
      long long frame = first;
      for (const auto& [a, b] : spans) {
        if (pick <= b - a) {
          frame = a + pick;
          break;
        }
        pick -= b - a + 1;
      }
      EventRecord e;
      e.t = frame_time(frame, fps);
      e.category = leaves[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(leaves.size()) - 1))];
      e.match_id = doc.match_id;
      e.annotator = doc.annotator;
      if (!player_list.empty()) {
        e.attributes["player"] =
            player_list[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(player_list.size()) - 1))];
      }
      individual.push_back(std::move(e));
    }
  }

  doc.events.clear();
  for (auto* part : {&status, &possession, &individual, &rest}) {
    for (auto& e : *part) doc.events.push_back(std::move(e));
  }
  doc.sort();

  // Exclusion repair: move clashing events to the next free frame.
  if (!taxonomy.exclusion_groups().empty()) {
    std::map<long long, std::set<std::size_t>> used;
    std::vector<EventRecord> kept;
    for (auto& e : doc.events) {
      const auto groups = taxonomy.contains(e.category) ? taxonomy.exclusion_groups_of(e.category)
                                                        : std::vector<std::size_t>{};
      if (groups.empty()) {
        kept.push_back(std::move(e));
        continue;
      }
      auto clashes = [&](long long f) {
        auto it = used.find(f);
        if (it == used.end()) return false;
        return std::any_of(groups.begin(), groups.end(), [&](std::size_t g) { return it->second.count(g) > 0; });
      };
      const long long orig = to_frame(e.t, fps);
      long long f = orig;
      while (f <= last && clashes(f)) ++f;
      if (f > last) continue;
      if (f != orig) e.t = frame_time(f, fps);
      for (std::size_t g : groups) used[f].insert(g);
      kept.push_back(std::move(e));
    }
    doc.events = std::move(kept);
    doc.sort();
  }

  if (!noise.annotator.empty()) {
    doc.annotator = noise.annotator;
    for (auto& e : doc.events) e.annotator = noise.annotator;
  }
  return doc;
}

BiasDemoResult bias_demo(std::uint64_t seed, int duplicates, const Taxonomy& taxonomy) {
  if (duplicates < 0 || duplicates > 10) throw DomainError("duplicates must lie in [0, 10]");
  BiasDemoResult out;
  out.duplicates = duplicates;

  std::string category = "ball_release/intentional/pass/successful_untouched";
  if (!taxonomy.contains(category)) {
    category.clear();
    for (const auto& l : taxonomy.leaves()) {
      if (taxonomy.node(l).path_group == PathGroup::kIndividualBall) {
        category = l;
        break;
      }
    }
  }
  std::string activate, deactivate;
  for (const auto& l : taxonomy.leaves()) {
    if (activate.empty() && taxonomy.status_effect(l) == StatusEffect::kActivate) activate = l;
    if (deactivate.empty() && taxonomy.status_effect(l) == StatusEffect::kDeactivate) deactivate = l;
  }
  if (category.empty() || activate.empty() || deactivate.empty()) {
    throw DomainError("taxonomy lacks the status and individual categories the demo needs");
  }
  out.category = category;

  const double fps = 25.0;
  const ToleranceSpec tol = ToleranceSpec::from_taxonomy(taxonomy);
  const long long reach = static_cast<long long>(std::floor(tol.radius(category) * fps + 1e-9));
  if ((duplicates + 1) / 2 > reach) throw DomainError("duplicates do not fit inside the tolerance window");

  Rng rng(seed);
  AnnotationDoc ref;
  ref.fps = fps;
  ref.t_begin = 0.0;
  ref.t_end = frame_time(60 * 25, fps);
  ref.match_id = "bias-demo";
  ref.annotator = "reference";
  ref.initial_status = std::string(kInactive);
  auto add = [&](AnnotationDoc& d, long long frame, const std::string& cat) {
    EventRecord e;
    e.t = frame_time(frame, fps);
    e.category = cat;
    e.annotator = d.annotator;
    e.match_id = d.match_id;
    d.events.push_back(std::move(e));
  };
  std::vector<long long> passes;
  for (const auto& [start, end] : {std::pair<long long, long long>{50, 625}, {750, 1375}}) {
    add(ref, start, activate);
    add(ref, end, deactivate);
    const long long n = rng.uniform_int(3, 6);
    long long frame = start + 25;
    for (long long i = 0; i < n; ++i) {
      frame += 25 + rng.uniform_int(0, 50);
      if (frame >= end - 25) break;
      add(ref, frame, category);
      passes.push_back(frame);
    }
  }
  ref.sort();

  AnnotationDoc pred = ref;
  pred.annotator = "prediction";
  for (auto& e : pred.events) e.annotator = pred.annotator;
  for (long long f : passes) {
    for (int j = 1; j <= duplicates; ++j) {
      const long long offset = (j + 1) / 2 * (j % 2 == 1 ? 1 : -1);
      add(pred, f + offset, category);
    }
  }
  pred.sort();

  const CategorySelector sel(category);
  out.nn = report({nnm_match(pred, ref, taxonomy, sel, tol)});
  const AlignmentResult aligned = scm_align_boundaries(pred, ref, taxonomy, tol);
  out.sc = report({scm_match(aligned.pred, aligned.ref, taxonomy, sel, tol)});
  out.reference = std::move(ref);
  out.prediction = std::move(pred);
  return out;
}

ScoreStream score_stream_from_doc(const AnnotationDoc& doc, const Taxonomy& taxonomy,
                                  const std::vector<std::string>& categories,
                                  const StreamOptions& options) {
  if (!(options.fps > 0.0)) throw DomainError("fps must be positive");
  ScoreStream s;
  s.fps = options.fps;
  s.offset = 0.0;
  s.categories = categories;
  s.first_frame = to_frame(doc.t_begin, options.fps);
  const long long last = to_frame(doc.t_end, options.fps);
  const std::size_t n = static_cast<std::size_t>(std::max<long long>(0, last - s.first_frame + 1));
  s.scores.assign(n, std::vector<double>(categories.size(), 0.0));
  Rng rng(options.seed);
  if (options.shape == StreamShape::kNoisy) {
    for (auto& row : s.scores) {
      for (auto& v : row) v = rng.uniform(0.0, options.noise_level);
    }
  }
  const double peak = std::clamp(options.peak, 0.0, 1.0);
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const CategorySelector sel(categories[c]);
    sel.check(taxonomy);
    for (const auto& e : doc.events) {
      if (e.adopted || !sel.matches(taxonomy, e.category)) continue;
      const long long f = to_frame(e.t, options.fps);
      if (f < s.first_frame || f > last) continue;
      const auto row = static_cast<std::size_t>(f - s.first_frame);
      if (options.shape == StreamShape::kBlur) {
        const double sd_frames = std::max(1e-9, options.blur_sd * options.fps);
        const auto reach = static_cast<long long>(std::ceil(4.0 * sd_frames));
        for (long long d = -reach; d <= reach; ++d) {
          const long long g = f + d;
          if (g < s.first_frame || g > last) continue;
          const double v = peak * std::exp(-0.5 * (d / sd_frames) * (d / sd_frames));
          auto& cell = s.scores[static_cast<std::size_t>(g - s.first_frame)][c];
          cell = std::max(cell, v);
        }
      } else {
        s.scores[row][c] = std::max(s.scores[row][c], peak);
      }
    }
  }
  return s;
}

}  // namespace evspot
