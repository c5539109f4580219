// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "evspot/error.hpp"

namespace evspot {
namespace {

using nlohmann::json;

std::vector<EventRecord> select_events(const AnnotationDoc& doc, const Taxonomy& taxonomy,
                                       const CategorySelector& category) {
  std::vector<EventRecord> out;
  for (const auto& e : doc.events) {
    if (!e.adopted && category.matches(taxonomy, e.category)) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), event_less);
  return out;
}

// Index of the nearest time in a sorted list, preferring the earlier one on
// exact ties; npos when the list is empty.
std::size_t nearest_index(const std::vector<double>& times, double t) {
  if (times.empty()) return std::string::npos;
  auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi == times.size()) return hi - 1;
  if (hi == 0) return 0;
  const double d_lo = t - times[hi - 1];
  const double d_hi = times[hi] - t;
  return d_lo <= d_hi ? hi - 1 : hi;
}

std::vector<Interval> normalized_union(const std::vector<Interval>& in) {
  std::vector<Interval> v;
  for (const auto& iv : in) {
    if (iv.end < iv.start) throw DomainError("interval ends before it starts");
    if (iv.end > iv.start) v.push_back(iv);
  }
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.start < out.back().end) {
      throw DomainError("overlapping intervals within one annotation");
    }
    if (!out.empty() && iv.start == out.back().end) {
      out.back().end = iv.end;
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double total_length(const std::vector<Interval>& v) {
  double s = 0.0;
  for (const auto& iv : v) s += iv.end - iv.start;
  return s;
}

double intersection_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].start, b[j].start);
    const double hi = std::min(a[i].end, b[j].end);
    if (hi > lo) s += hi - lo;
    if (a[i].end < b[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

struct StatusEvent {
  const EventRecord* event;
  StatusEffect effect;
};

std::vector<StatusEvent> status_events(const AnnotationDoc& doc, const Taxonomy& taxonomy) {
  std::vector<StatusEvent> out;
  for (const auto& e : doc.events) {
    if (!taxonomy.contains(e.category)) continue;
    const StatusEffect effect = taxonomy.status_effect(e.category);
    if (effect != StatusEffect::kNone) out.push_back({&e, effect});
  }
  return out;
}

std::string partition_key(const EventRecord& e, const std::vector<std::string>& keys,
                          bool& complete) {
  std::string key;
  complete = true;
  for (const auto& k : keys) {
    const std::string* v = e.attribute(k);
    if (!v) {
      complete = false;
      return {};
    }
    key += *v;
    key += '\x1f';
  }
  return key;
}

MatchResult scm_impl(const AnnotationDoc& pred, const AnnotationDoc& ref, const Taxonomy& taxonomy,
                     const CategorySelector& category, const ToleranceSpec& tol,
                     const std::vector<std::string>& attribute_keys) {
  category.check(taxonomy);
  const auto pred_seqs = segment_sequences(pred, taxonomy);
  const auto ref_seqs = segment_sequences(ref, taxonomy);
  if (pred_seqs.size() != ref_seqs.size()) {
    throw DomainError("sequence counts differ (" + std::to_string(pred_seqs.size()) + " vs " +
                      std::to_string(ref_seqs.size()) + "); align boundaries first");
  }

  MatchResult r;
  r.category = category.name();
  r.mode = MatchMode::kScm;
  r.total_sequences = ref_seqs.size();
  r.num_pred = select_events(pred, taxonomy, category).size();
  r.num_ref = select_events(ref, taxonomy, category).size();
  for (const auto& e : pred.events) r.adopted_events += e.adopted ? 1 : 0;
  for (const auto& e : ref.events) r.adopted_events += e.adopted ? 1 : 0;
  const double radius = tol.radius(category.name());

  auto in_sequence = [&](const Sequence& s) {
    std::vector<EventRecord> out;
    for (const auto& e : s.events) {
      if (!e.adopted && category.matches(taxonomy, e.category)) out.push_back(e);
    }
    return out;
  };

  std::size_t seen_pred = 0, seen_ref = 0;
  for (std::size_t k = 0; k < ref_seqs.size(); ++k) {
    const auto p_events = in_sequence(pred_seqs[k]);
    const auto r_events = in_sequence(ref_seqs[k]);
    seen_pred += p_events.size();
    seen_ref += r_events.size();

    // Partition by attribute values; without keys everything shares one bucket.
    std::map<std::string, std::pair<std::vector<EventRecord>, std::vector<EventRecord>>> parts;
    bool sequence_consistent = true;
    auto place = [&](const EventRecord& e, bool is_pred) {
      bool complete = true;
      std::string key = partition_key(e, attribute_keys, complete);
      if (!complete) {
        r.issues.push_back(std::string(is_pred ? "pred" : "ref") + " event at t=" +
                           format_seconds(e.t) + " (" + e.category + ") lacks attribute(s) for partitioning");
        (is_pred ? r.unmatched_pred : r.unmatched_ref).push_back(e);
        sequence_consistent = false;
        return;
      }
      auto& slot = parts[key];
      (is_pred ? slot.first : slot.second).push_back(e);
    };
    for (const auto& e : p_events) place(e, true);
    for (const auto& e : r_events) place(e, false);

    for (auto& [key, slot] : parts) {
      auto& [ps, rs] = slot;
      if (ps.size() != rs.size()) {
        sequence_consistent = false;
        r.unmatched_pred.insert(r.unmatched_pred.end(), ps.begin(), ps.end());
        r.unmatched_ref.insert(r.unmatched_ref.end(), rs.begin(), rs.end());
        continue;
      }
      r.consistent_pred_events += ps.size();
      r.consistent_ref_events += rs.size();
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const bool ok = std::abs(ps[i].t - rs[i].t) <= radius + kTimeEpsilon;
        r.pairs.push_back({ps[i], rs[i], ok, static_cast<int>(k)});
        if (ok) {
          ++r.tp;
          ++r.matched_ref;
        } else {
          ++r.fp;
          ++r.fn;
        }
      }
    }
    if (sequence_consistent) ++r.consistent_sequences;
  }

  // Events outside every sequence cannot be consistent.
  if (seen_pred < r.num_pred || seen_ref < r.num_ref) {
    auto collect_outside = [&](const AnnotationDoc& doc, const std::vector<Sequence>& seqs,
                               std::vector<EventRecord>& sink) {
      std::multiset<std::pair<double, std::string>> inside;
      for (const auto& s : seqs) {
        for (const auto& e : s.events) inside.insert({e.t, e.category});
      }
      for (const auto& e : select_events(doc, taxonomy, category)) {
        auto it = inside.find({e.t, e.category});
        if (it != inside.end()) {
          inside.erase(it);
        } else {
          sink.push_back(e);
        }
      }
    };
    collect_outside(pred, pred_seqs, r.unmatched_pred);
    collect_outside(ref, ref_seqs, r.unmatched_ref);
  }
  return r;
}

}  // namespace

Ratio make_ratio(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  return numerator / denominator;
}

Ratio f1_score(Ratio precision, Ratio recall) {
  if (!precision || !recall) return std::nullopt;
  if (*precision + *recall == 0.0) return 0.0;
  return 2.0 * *precision * *recall / (*precision + *recall);
}

std::string_view to_string(MatchMode mode) { return mode == MatchMode::kNnm ? "nn" : "sc"; }

ToleranceSpec ToleranceSpec::from_taxonomy(const Taxonomy& taxonomy, HalfWidthMode mode) {
  ToleranceSpec spec;
  spec.mode_ = mode;
  for (const auto& [id, n] : taxonomy.nodes()) {
    if (auto w = taxonomy.effective_w_eval(id)) spec.windows_[id] = *w;
  }
  for (PathGroup g : {PathGroup::kGameStatus, PathGroup::kPossession, PathGroup::kIndividualBall,
                      PathGroup::kOther}) {
    std::optional<double> best;
    for (const auto& root : taxonomy.roots(g)) {
      if (auto w = taxonomy.effective_w_eval(root)) best = std::max(best.value_or(0.0), *w);
    }
    if (best) spec.windows_["@" + std::string(to_string(g))] = *best;
  }
  return spec;
}

ToleranceSpec ToleranceSpec::parse(std::string_view document, const Taxonomy& taxonomy) {
  ToleranceSpec spec = from_taxonomy(taxonomy);
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("tolerance file is not valid JSON: ") + e.what());
  }
  if (doc.contains("mode")) {
    const std::string m = doc["mode"].get<std::string>();
    if (m == "half") {
      spec.mode_ = HalfWidthMode::kHalf;
    } else if (m == "full") {
      spec.mode_ = HalfWidthMode::kFull;
    } else {
      throw ConfigError("", "tolerance mode must be 'half' or 'full'");
    }
  }
  const json windows = doc.value("windows", json::object());
  for (const auto& [key, value] : windows.items()) {
    bool known = false;
    try {
      CategorySelector sel(key);
      known = sel.is_group() || taxonomy.contains(key);
    } catch (const DomainError&) {
      known = false;
    }
    if (!known) throw ConfigError(key, "unknown category in tolerance file");
    if (!value.is_number() || !(value.get<double>() > 0.0)) {
      throw ConfigError(key, "window must be a positive number");
    }
    spec.windows_[key] = value.get<double>();
  }
  return spec;
}

ToleranceSpec ToleranceSpec::load_file(const std::string& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tolerance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), taxonomy);
}

void ToleranceSpec::set_window(const std::string& selector, double w_eval) {
  if (!(w_eval > 0.0)) throw ConfigError(selector, "window must be positive");
  windows_[selector] = w_eval;
}

bool ToleranceSpec::has_window(std::string_view selector) const {
  return windows_.find(selector) != windows_.end();
}

double ToleranceSpec::window(std::string_view selector) const {
  auto it = windows_.find(selector);
  if (it == windows_.end()) {
    throw DomainError("no evaluation window for '" + std::string(selector) + "'");
  }
  return it->second;
}

double ToleranceSpec::radius(std::string_view selector) const {
  const double w = window(selector);
  return mode_ == HalfWidthMode::kHalf ? w / 2.0 : w;
}

bool ToleranceSpec::within(double dt, std::string_view selector) const {
  return std::abs(dt) <= radius(selector) + kTimeEpsilon;
}

std::string ToleranceSpec::to_json() const {
  json doc;
  doc["mode"] = mode_ == HalfWidthMode::kHalf ? "half" : "full";
  json w = json::object();
  for (const auto& [k, v] : windows_) w[k] = v;
  doc["windows"] = w;
  return doc.dump(2);
}

std::vector<Interval> filter_state(const std::vector<Interval>& intervals, std::string_view state) {
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (iv.state == state) out.push_back(iv);
  }
  return out;
}

Ratio temporal_iou(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  const auto ua = normalized_union(a);
  const auto ub = normalized_union(b);
  const double inter = intersection_length(ua, ub);
  const double uni = total_length(ua) + total_length(ub) - inter;
  return make_ratio(inter, uni);
}

Ratio aggregated_iou(const std::vector<std::vector<Interval>>& lists) {
  if (lists.empty()) return std::nullopt;
  std::vector<std::vector<Interval>> unions;
  std::vector<double> cuts;
  for (const auto& l : lists) {
    unions.push_back(normalized_union(l));
    for (const auto& iv : unions.back()) {
      cuts.push_back(iv.start);
      cuts.push_back(iv.end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    std::size_t covered = 0;
    for (const auto& u : unions) {
      for (const auto& iv : u) {
        if (iv.start <= mid && mid < iv.end) {
          ++covered;
          break;
        }
      }
    }
    const double len = cuts[i + 1] - cuts[i];
    if (covered == unions.size()) inter += len;
    if (covered > 0) uni += len;
  }
  return make_ratio(inter, uni);
}

namespace {

// Agreement of labelled tilings: time counts towards the intersection when
// every list carries the same counted label, towards the union when any does.
Ratio labelled_iou(const std::vector<const std::vector<Interval>*>& lists, std::string_view state) {
  auto counted = [&](const std::string& label) {
    return state.empty() ? label != kNoPossession : label == state;
  };
  std::vector<double> cuts;
  for (const auto* l : lists) {
    for (const auto& iv : *l) {
      cuts.push_back(iv.start);
      cuts.push_back(iv.end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    std::optional<std::string> common;
    bool all_same = true;
    bool any = false;
    for (const auto* l : lists) {
      const std::string* label = nullptr;
      for (const auto& iv : *l) {
        if (iv.start <= mid && mid < iv.end && counted(iv.state)) {
          label = &iv.state;
          break;
        }
      }
      if (!label) {
        all_same = false;
        continue;
      }
      any = true;
      if (!common) {
        common = *label;
      } else if (*common != *label) {
        all_same = false;
      }
    }
    const double len = cuts[i + 1] - cuts[i];
    if (all_same && common) inter += len;
    if (any) uni += len;
  }
  return make_ratio(inter, uni);
}

}  // namespace

TiouSummary pairwise_tiou(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy,
                          PathGroup group, std::string_view state) {
  if (docs.size() < 2) throw DomainError("temporal IoU needs at least two annotations");
  for (const auto& d : docs) {
    if (d.t_begin != docs.front().t_begin || d.t_end != docs.front().t_end) {
      throw DomainError("annotations cover different segments");
    }
  }
  std::vector<std::vector<Interval>> lists;
  for (const auto& d : docs) lists.push_back(derive_intervals(d, taxonomy, group));

  TiouSummary s;
  std::vector<double> defined;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      s.pairs.emplace_back(i, j);
      s.values.push_back(labelled_iou({&lists[i], &lists[j]}, state));
      if (s.values.back()) defined.push_back(*s.values.back());
    }
  }
  if (!defined.empty()) {
    const double mean = std::accumulate(defined.begin(), defined.end(), 0.0) / defined.size();
    double var = 0.0;
    for (double v : defined) var += (v - mean) * (v - mean);
    s.mean = mean;
    s.std = std::sqrt(var / defined.size());
  }
  std::vector<const std::vector<Interval>*> all;
  for (const auto& l : lists) all.push_back(&l);
  s.aggregated = labelled_iou(all, state);
  return s;
}

MatchResult nnm_match(const AnnotationDoc& pred, const AnnotationDoc& ref, const Taxonomy& taxonomy,
                      const CategorySelector& category, const ToleranceSpec& tol) {
  category.check(taxonomy);
  MatchResult r;
  r.category = category.name();
  r.mode = MatchMode::kNnm;
  const auto ps = select_events(pred, taxonomy, category);
  const auto rs = select_events(ref, taxonomy, category);
  r.num_pred = ps.size();
  r.num_ref = rs.size();
  const double radius = tol.radius(category.name());

  std::vector<double> ref_times, pred_times;
  for (const auto& e : rs) ref_times.push_back(e.t);
  for (const auto& e : ps) pred_times.push_back(e.t);

  for (const auto& p : ps) {
    const std::size_t k = nearest_index(ref_times, p.t);
    if (k != std::string::npos && std::abs(ref_times[k] - p.t) <= radius + kTimeEpsilon) {
      r.pairs.push_back({p, rs[k], true, -1});
      ++r.tp;
    } else {
      r.unmatched_pred.push_back(p);
      ++r.fp;
    }
  }
  for (const auto& e : rs) {
    const std::size_t k = nearest_index(pred_times, e.t);
    if (k != std::string::npos && std::abs(pred_times[k] - e.t) <= radius + kTimeEpsilon) {
      ++r.matched_ref;
    } else {
      r.unmatched_ref.push_back(e);
      ++r.fn;
    }
  }
  return r;
}

Ratio average_precision(std::vector<ScoredTime> predictions, std::vector<double> references,
                        double radius) {
  if (references.empty()) return std::nullopt;
  std::stable_sort(predictions.begin(), predictions.end(), [](const ScoredTime& a, const ScoredTime& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.t < b.t;
  });
  std::sort(references.begin(), references.end());
  std::vector<bool> used(references.size(), false);

  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < predictions.size(); ++rank) {
    const double t = predictions[rank].t;
    std::size_t best = std::string::npos;
    double best_d = 0.0;
    auto lo = std::lower_bound(references.begin(), references.end(), t - radius - kTimeEpsilon);
    for (auto it = lo; it != references.end() && *it <= t + radius + kTimeEpsilon; ++it) {
      const std::size_t k = static_cast<std::size_t>(it - references.begin());
      if (used[k]) continue;
      const double d = std::abs(*it - t);
      if (best == std::string::npos || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    if (best != std::string::npos) {
      used[best] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(references.size()));
  }
  // Monotone precision envelope, then sum over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

ApResult average_precision_over_tolerances(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                           const Taxonomy& taxonomy,
                                           const CategorySelector& category,
                                           const std::vector<double>& windows,
                                           HalfWidthMode mode) {
  category.check(taxonomy);
  std::vector<ScoredTime> scored;
  for (const auto& e : select_events(pred, taxonomy, category)) {
    const std::string* s = e.attribute("score");
    if (!s) throw DomainError("prediction at t=" + format_seconds(e.t) + " has no score");
    double v = 0.0;
    auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc() || p != s->data() + s->size()) {
      throw DomainError("prediction at t=" + format_seconds(e.t) + " has an unparseable score");
    }
    scored.push_back({e.t, v});
  }
  std::vector<double> refs;
  for (const auto& e : select_events(ref, taxonomy, category)) refs.push_back(e.t);

  ApResult out;
  std::vector<double> defined;
  for (double w : windows) {
    if (!(w > 0.0)) throw DomainError("AP window must be positive");
    out.windows.push_back(w);
    out.ap.push_back(average_precision(scored, refs, mode == HalfWidthMode::kHalf ? w / 2.0 : w));
    if (out.ap.back()) defined.push_back(*out.ap.back());
  }
  if (!defined.empty()) {
    out.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / defined.size();
  }
  return out;
}

AlignmentResult scm_align_boundaries(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                     const Taxonomy& taxonomy, const ToleranceSpec& tol_status) {
  AlignmentResult out;
  out.pred = pred;
  out.ref = ref;
  out.pred.sort();
  out.ref.sort();

  const auto ps = status_events(out.pred, taxonomy);
  const auto rs = status_events(out.ref, taxonomy);
  std::vector<EventRecord> into_pred, into_ref;
  std::size_t i = 0, j = 0;
  while (i < ps.size() || j < rs.size()) {
    if (i < ps.size() && j < rs.size() && ps[i].effect == rs[j].effect &&
        tol_status.within(ps[i].event->t - rs[j].event->t, rs[j].event->category)) {
      ++i;
      ++j;
    } else if (j == rs.size() || (i < ps.size() && ps[i].event->t <= rs[j].event->t)) {
      EventRecord copy = *ps[i].event;
      copy.adopted = true;
      into_ref.push_back(std::move(copy));
      ++i;
    } else {
      EventRecord copy = *rs[j].event;
      copy.adopted = true;
      into_pred.push_back(std::move(copy));
      ++j;
    }
  }

  AnnotationDoc new_pred = out.pred;
  AnnotationDoc new_ref = out.ref;
  new_pred.events.insert(new_pred.events.end(), into_pred.begin(), into_pred.end());
  new_ref.events.insert(new_ref.events.end(), into_ref.begin(), into_ref.end());
  new_pred.sort();
  new_ref.sort();

  std::vector<Sequence> sp, sr;
  try {
    sp = segment_sequences(new_pred, taxonomy);
    sr = segment_sequences(new_ref, taxonomy);
  } catch (const DomainError& e) {
    out.ok = false;
    out.problem = std::string("adoption breaks status alternation: ") + e.what();
    return out;
  }
  if (sp.size() != sr.size()) {
    out.ok = false;
    out.problem = "sequence counts still differ after adoption";
    return out;
  }
  out.pred = std::move(new_pred);
  out.ref = std::move(new_ref);
  out.adopted_into_pred = into_pred.size();
  out.adopted_into_ref = into_ref.size();
  for (std::size_t k = 0; k < sp.size(); ++k) out.borders.emplace_back(sp[k].interval, sr[k].interval);
  return out;
}

MatchResult scm_match(const AnnotationDoc& pred, const AnnotationDoc& ref, const Taxonomy& taxonomy,
                      const CategorySelector& category, const ToleranceSpec& tol) {
  return scm_impl(pred, ref, taxonomy, category, tol, {});
}

MatchResult scm_match_with_attributes(const AnnotationDoc& pred, const AnnotationDoc& ref,
                                      const Taxonomy& taxonomy, const CategorySelector& category,
                                      const ToleranceSpec& tol,
                                      const std::vector<std::string>& attribute_keys) {
  return scm_impl(pred, ref, taxonomy, category, tol, attribute_keys);
}

MetricReport report(const std::vector<MatchResult>& results) {
  MetricReport m;
  if (!results.empty()) {
    m.category = results.front().category;
    m.mode = results.front().mode;
  }
  for (const auto& r : results) {
    m.num_pred += r.num_pred;
    m.num_ref += r.num_ref;
    m.tp += r.tp;
    m.fp += r.fp;
    m.matched_ref += r.matched_ref;
    m.fn += r.fn;
    m.consistent_pred_events += r.consistent_pred_events;
    m.consistent_ref_events += r.consistent_ref_events;
    m.consistent_sequences += r.consistent_sequences;
    m.total_sequences += r.total_sequences;
    m.adopted_events += r.adopted_events;
  }
  m.precision = make_ratio(m.tp, m.tp + m.fp);
  m.recall = make_ratio(m.matched_ref, m.matched_ref + m.fn);
  m.f1 = f1_score(m.precision, m.recall);
  if (m.mode == MatchMode::kScm) {
    m.consistent_fraction = make_ratio(m.consistent_ref_events, m.num_ref);
    m.consistent_pred_fraction = make_ratio(m.consistent_pred_events, m.num_pred);
  }
  return m;
}

}  // namespace evspot
