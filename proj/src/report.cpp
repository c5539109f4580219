// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/report.hpp"

#include <algorithm>

#include <fmt/core.h>

#include "json.hpp"

namespace evspot {
namespace {

using nlohmann::json;

json ratio_json(Ratio r) { return r ? json(*r) : json(nullptr); }

json metric_json(const MetricReport& m) {
  json j;
  j["num_pred"] = m.num_pred;
  j["num_ref"] = m.num_ref;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["matched_ref"] = m.matched_ref;
  j["fn"] = m.fn;
  j["precision"] = ratio_json(m.precision);
  j["recall"] = ratio_json(m.recall);
  j["f1"] = ratio_json(m.f1);
  if (m.mode == MatchMode::kScm) {
    j["consistent_ref_events"] = m.consistent_ref_events;
    j["consistent_pred_events"] = m.consistent_pred_events;
    j["consistent_sequences"] = m.consistent_sequences;
    j["total_sequences"] = m.total_sequences;
    j["adopted_events"] = m.adopted_events;
    j["consistent_fraction"] = ratio_json(m.consistent_fraction);
    j["consistent_pred_fraction"] = ratio_json(m.consistent_pred_fraction);
  }
  return j;
}

json mode_json(const ModeSummary& s) {
  return {{"precision", ratio_json(s.precision)},
          {"recall", ratio_json(s.recall)},
          {"f1", ratio_json(s.f1)},
          {"consistent_fraction", ratio_json(s.consistent_fraction)},
          {"consistent_pred_fraction", ratio_json(s.consistent_pred_fraction)}};
}

json tiou_json(const TiouSummary& s) {
  json values = json::array();
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    values.push_back({{"a", s.pairs[k].first}, {"b", s.pairs[k].second}, {"iou", ratio_json(s.values[k])}});
  }
  return {{"pairs", values},
          {"mean", ratio_json(s.mean)},
          {"std", ratio_json(s.std)},
          {"aggregated", ratio_json(s.aggregated)}};
}

std::string window_cell(const ToleranceSpec& tol, const std::string& c) {
  return tol.has_window(c) ? fmt::format("{:.2f}", tol.window(c)) : "-";
}

std::string bracketed(Ratio value, Ratio consistency) {
  std::string cell = format_percent(value);
  if (consistency) cell += fmt::format(" ({:.0f})", *consistency * 100.0);
  return cell;
}

struct Row {
  std::string label, window, count;
  Ratio nn_p, nn_r;
  Ratio sc_p, sc_r, sc_cp, sc_cr;
  bool has_sc = false;
};

std::string render_rows(const std::vector<Row>& rows, const std::string& count_header) {
  std::size_t lw = 8;
  for (const auto& r : rows) lw = std::max(lw, r.label.size());
  std::string out = fmt::format("{:<{}}  {:>6}  {:>10}  {:>7}  {:>7}  {:>11}  {:>11}\n", "event", lw,
                                "w_eval", count_header, "NN prec", "NN rec", "SC prec", "SC rec");
  for (const auto& r : rows) {
    const std::string sp = r.has_sc ? bracketed(r.sc_p, r.sc_cp) : "-";
    const std::string sr = r.has_sc ? bracketed(r.sc_r, r.sc_cr) : "-";
    out += fmt::format("{:<{}}  {:>6}  {:>10}  {:>7}  {:>7}  {:>11}  {:>11}\n", r.label, lw, r.window,
                       r.count, format_percent(r.nn_p), format_percent(r.nn_r), sp, sr);
  }
  return out;
}

}  // namespace

std::string format_percent(Ratio r) { return r ? fmt::format("{:.1f}", *r * 100.0) : "-"; }

std::string render_table(const PairEntry& entry, const std::vector<std::string>& categories,
                         const ToleranceSpec& tol) {
  std::vector<Row> rows;
  for (const auto& c : categories) {
    Row row;
    row.label = c;
    row.window = window_cell(tol, c);
    std::size_t n_ref = 0;
    if (auto it = entry.nn.find(c); it != entry.nn.end()) {
      row.nn_p = it->second.precision;
      row.nn_r = it->second.recall;
      n_ref = it->second.num_ref;
    }
    if (auto it = entry.sc.find(c); it != entry.sc.end()) {
      row.has_sc = true;
      row.sc_p = it->second.precision;
      row.sc_r = it->second.recall;
      row.sc_cp = it->second.consistent_pred_fraction;
      row.sc_cr = it->second.consistent_fraction;
      n_ref = it->second.num_ref;
    }
    row.count = std::to_string(n_ref);
    rows.push_back(row);
  }
  std::string out = render_rows(rows, "ref events");
  if (!entry.sc_problem.empty()) out += "SC unavailable: " + entry.sc_problem + "\n";
  return out;
}

std::string pair_to_json(const PairEntry& entry, const std::vector<std::string>& categories,
                         const ToleranceSpec& tol, const std::optional<TiouSummary>& status_iou,
                         const std::optional<TiouSummary>& possession_iou) {
  json j;
  j["tolerance"] = json::parse(tol.to_json());
  json cats = json::array();
  for (const auto& c : categories) {
    json item{{"category", c}};
    if (tol.has_window(c)) item["w_eval"] = tol.window(c);
    if (auto it = entry.nn.find(c); it != entry.nn.end()) item["nn"] = metric_json(it->second);
    if (auto it = entry.sc.find(c); it != entry.sc.end()) item["sc"] = metric_json(it->second);
    cats.push_back(item);
  }
  j["categories"] = cats;
  if (!entry.sc_problem.empty()) j["sc_problem"] = entry.sc_problem;
  if (status_iou) j["temporal_iou"]["game_status_active"] = tiou_json(*status_iou);
  if (possession_iou) j["temporal_iou"]["possession"] = tiou_json(*possession_iou);
  return j.dump(2) + "\n";
}

std::string render_agreement(const AgreementReport& report, const ToleranceSpec& tol) {
  std::string out = "mean over annotators\n";
  std::vector<Row> rows;
  for (const auto& c : report.categories) {
    const auto& s = report.mean.at(c);
    const auto& n = report.num_events.at(c);
    Row row;
    row.label = c;
    row.window = window_cell(tol, c);
    row.count = fmt::format("{:.1f}±{:.1f}", n.mean, n.std);
    row.nn_p = s.nn.precision;
    row.nn_r = s.nn.recall;
    row.has_sc = s.sc.precision || s.sc.recall;
    row.sc_p = s.sc.precision;
    row.sc_r = s.sc.recall;
    row.sc_cp = s.sc.consistent_pred_fraction;
    row.sc_cr = s.sc.consistent_fraction;
    rows.push_back(row);
  }
  out += render_rows(rows, "events");

  for (std::size_t i = 0; i < report.individual.size(); ++i) {
    if (report.individual[i].empty()) continue;
    out += "\nindividual: " + report.annotators[i] + "\n";
    std::vector<Row> ind;
    for (const auto& c : report.categories) {
      const auto& s = report.individual[i].at(c);
      Row row;
      row.label = c;
      row.window = window_cell(tol, c);
      row.count = "";
      row.nn_p = s.nn.precision;
      row.nn_r = s.nn.recall;
      row.has_sc = s.sc.precision || s.sc.recall;
      row.sc_p = s.sc.precision;
      row.sc_r = s.sc.recall;
      row.sc_cp = s.sc.consistent_pred_fraction;
      row.sc_cr = s.sc.consistent_fraction;
      ind.push_back(row);
    }
    out += render_rows(ind, "");
  }

  // Precision matrices: row = predictor, column = reference.
  const std::size_t n = report.annotators.size();
  std::size_t nw = 9;
  for (const auto& a : report.annotators) nw = std::max(nw, a.size());
  for (const auto& c : report.categories) {
    for (const char* mode : {"nn", "sc"}) {
      const bool is_nn = mode[0] == 'n';
      out += fmt::format("\n{} precision, {} (row = predictor, column = reference)\n", c,
                         is_nn ? "NN" : "SC");
      out += fmt::format("{:<{}}", "", nw);
      for (const auto& a : report.annotators) out += fmt::format("  {:>{}}", a, nw);
      out += "\n";
      for (std::size_t i = 0; i < n; ++i) {
        out += fmt::format("{:<{}}", report.annotators[i], nw);
        for (std::size_t j = 0; j < n; ++j) {
          std::string cell = i == j ? "" : "-";
          if (const PairEntry* e = report.pair(i, j)) {
            const auto& m = is_nn ? e->nn : e->sc;
            if (auto it = m.find(c); it != m.end()) cell = format_percent(it->second.precision);
          }
          out += fmt::format("  {:>{}}", cell, nw);
        }
        out += "\n";
      }
    }
  }
  for (const auto& e : report.pairs) {
    if (!e.sc_problem.empty()) {
      out += fmt::format("\nSC unavailable for {} -> {}: {}\n", report.annotators[e.pred],
                         report.annotators[e.ref], e.sc_problem);
    }
  }
  return out;
}

std::string agreement_to_json(const AgreementReport& report, const ToleranceSpec& tol,
                              const std::optional<TiouSummary>& status_iou,
                              const std::optional<TiouSummary>& possession_iou) {
  json j;
  j["annotators"] = report.annotators;
  j["categories"] = report.categories;
  j["tolerance"] = json::parse(tol.to_json());
  json mean = json::object();
  for (const auto& [c, s] : report.mean) {
    mean[c] = {{"nn", mode_json(s.nn)},
               {"sc", mode_json(s.sc)},
               {"num_events_mean", report.num_events.at(c).mean},
               {"num_events_std", report.num_events.at(c).std}};
  }
  j["mean"] = mean;
  json individual = json::array();
  for (std::size_t i = 0; i < report.individual.size(); ++i) {
    json per = json::object();
    for (const auto& [c, s] : report.individual[i]) per[c] = {{"nn", mode_json(s.nn)}, {"sc", mode_json(s.sc)}};
    individual.push_back({{"annotator", report.annotators[i]}, {"categories", per}});
  }
  j["individual"] = individual;
  json pairs = json::array();
  for (const auto& e : report.pairs) {
    json p{{"pred", report.annotators[e.pred]}, {"ref", report.annotators[e.ref]}};
    json nn = json::object(), sc = json::object();
    for (const auto& [c, m] : e.nn) nn[c] = metric_json(m);
    for (const auto& [c, m] : e.sc) sc[c] = metric_json(m);
    p["nn"] = nn;
    p["sc"] = sc;
    if (!e.sc_problem.empty()) p["sc_problem"] = e.sc_problem;
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  if (status_iou) j["temporal_iou"]["game_status_active"] = tiou_json(*status_iou);
  if (possession_iou) j["temporal_iou"]["possession"] = tiou_json(*possession_iou);
  return j.dump(2) + "\n";
}

}  // namespace evspot
