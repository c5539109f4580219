// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/spotting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"

#include "evspot/error.hpp"
#include "parallel.hpp"

namespace evspot {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> number_list(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ConfigError(key, "expected a list of numbers");
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ConfigError(key, "expected a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

double ScoreStream::time(std::size_t row) const {
  return frame_time(first_frame + static_cast<long long>(row), fps, offset);
}

std::size_t ScoreStream::column(std::string_view category) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return i;
  }
  throw DomainError("score stream has no column '" + std::string(category) + "'");
}

ScoreStream parse_scores(std::string_view text) {
  ScoreStream s;
  bool have_header = false;
  std::optional<long long> last_frame;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#meta", 0) == 0) {
      if (have_header) throw ParseError(line_no, "#meta must precede the header");
      for (auto tok : split(trim(line.substr(5)), ' ')) {
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        if (eq == tok.npos) throw ParseError(line_no, "expected key=value in #meta");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "fps") {
          s.fps = to_double(value, line_no, "fps");
          if (!(s.fps > 0.0)) throw ParseError(line_no, "fps must be positive");
        } else if (key == "offset") {
          s.offset = to_double(value, line_no, "offset");
        } else {
          throw ParseError(line_no, "unknown #meta key '" + std::string(key) + "'");
        }
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto cols = split(line, ',');
    if (!have_header) {
      if (cols.empty() || cols[0] != "frame") throw ParseError(line_no, "header must start with 'frame'");
      for (std::size_t i = 1; i < cols.size(); ++i) {
        if (cols[i].empty()) throw ParseError(line_no, "empty category name in header");
        if (std::find(s.categories.begin(), s.categories.end(), cols[i]) != s.categories.end()) {
          throw ParseError(line_no, "duplicate column '" + std::string(cols[i]) + "'");
        }
        s.categories.emplace_back(cols[i]);
      }
      have_header = true;
      continue;
    }
    if (cols.size() != s.categories.size() + 1) {
      throw ParseError(line_no, fmt::format("expected {} columns, got {}", s.categories.size() + 1, cols.size()));
    }
    long long frame = 0;
    auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), frame);
    if (ec != std::errc() || p != cols[0].data() + cols[0].size()) {
      throw ParseError(line_no, "frame index must be an integer");
    }
    if (!last_frame) {
      s.first_frame = frame;
    } else if (frame != *last_frame + 1) {
      throw ParseError(line_no, fmt::format("non-uniform frames: {} follows {}", frame, *last_frame));
    }
    last_frame = frame;
    std::vector<double> row;
    for (std::size_t i = 1; i < cols.size(); ++i) {
      const double v = to_double(cols[i], line_no, "score");
      if (v < 0.0 || v > 1.0) {
        throw ParseError(line_no, fmt::format("score {} outside [0, 1]", cols[i]));
      }
      row.push_back(v);
    }
    s.scores.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no, "missing header row");
  return s;
}

ScoreStream load_scores(const std::string& path) { return parse_scores(read_file(path, "score file")); }

std::string serialize_scores(const ScoreStream& stream) {
  std::string out = fmt::format("#meta fps={} offset={:.3f}\nframe", stream.fps, stream.offset);
  for (const auto& c : stream.categories) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < stream.scores.size(); ++r) {
    out += std::to_string(stream.first_frame + static_cast<long long>(r));
    for (double v : stream.scores[r]) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

std::vector<Peak> nms_peaks(const ScoreStream& stream, std::string_view category, double w_nms,
                            NmsWidth width) {
  if (!(w_nms > 0.0)) throw DomainError("w_nms must be positive");
  const std::size_t col = stream.column(category);
  const std::size_t n = stream.num_frames();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (stream.scores[i][col] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stream.scores[a][col] > stream.scores[b][col];
  });
  const double radius_frames = (width == NmsWidth::kHalf ? w_nms / 2.0 : w_nms) * stream.fps;
  const auto reach = static_cast<long long>(std::floor(radius_frames + 1e-9));
  std::vector<bool> suppressed(n, false);
  std::vector<Peak> peaks;
  for (std::size_t i : order) {
    if (suppressed[i]) continue;
    peaks.push_back({stream.time(i), stream.scores[i][col], stream.first_frame + static_cast<long long>(i)});
    const long long lo = std::max<long long>(0, static_cast<long long>(i) - reach);
    const long long hi = std::min<long long>(static_cast<long long>(n) - 1, static_cast<long long>(i) + reach);
    for (long long k = lo; k <= hi; ++k) suppressed[static_cast<std::size_t>(k)] = true;
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.frame < b.frame; });
  return peaks;
}

SpotterConfig SpotterConfig::parse(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("spotter config is not valid JSON: ") + e.what());
  }
  SpotterConfig cfg;
  if (doc.contains("nms_width")) {
    const auto w = doc["nms_width"].get<std::string>();
    if (w == "half") {
      cfg.width = NmsWidth::kHalf;
    } else if (w == "full") {
      cfg.width = NmsWidth::kFull;
    } else {
      throw ConfigError("nms_width", "must be 'half' or 'full'");
    }
  }
  const json categories = doc.value("categories", json::object());
  for (const auto& [id, p] : categories.items()) {
    SpotParams sp;
    if (!p.contains("w_nms") || !p.contains("tau")) throw ConfigError(id, "needs w_nms and tau");
    sp.w_nms = p["w_nms"].get<double>();
    sp.tau = p["tau"].get<double>();
    if (!(sp.w_nms > 0.0)) throw ConfigError(id, "w_nms must be positive");
    if (sp.tau < 0.0 || sp.tau > 1.0) throw ConfigError(id, "tau must lie in [0, 1]");
    cfg.categories[id] = sp;
  }
  return cfg;
}

SpotterConfig SpotterConfig::load_file(const std::string& path) {
  return parse(read_file(path, "spotter config"));
}

std::string SpotterConfig::to_json() const {
  json doc;
  doc["nms_width"] = width == NmsWidth::kHalf ? "half" : "full";
  json cats = json::object();
  for (const auto& [id, p] : categories) cats[id] = {{"w_nms", p.w_nms}, {"tau", p.tau}};
  doc["categories"] = cats;
  return doc.dump(2) + "\n";
}

AnnotationDoc spot(const ScoreStream& stream, const SpotterConfig& config, const Taxonomy& taxonomy) {
  AnnotationDoc doc;
  doc.fps = stream.fps;
  doc.annotator = "spotter";
  if (stream.num_frames() > 0) {
    doc.t_begin = stream.time(0);
    doc.t_end = stream.time(stream.num_frames() - 1);
  }
  for (const auto& c : stream.categories) {
    if (!taxonomy.contains(c)) throw DomainError("score column '" + c + "' is not in the taxonomy");
    auto it = config.categories.find(c);
    if (it == config.categories.end()) throw DomainError("spotter config has no entry for '" + c + "'");
    for (const auto& p : nms_peaks(stream, c, it->second.w_nms, config.width)) {
      if (p.score < it->second.tau) continue;
      EventRecord e;
      e.t = p.t;
      e.category = c;
      e.annotator = doc.annotator;
      e.attributes["score"] = fmt::format("{:.6f}", p.score);
      doc.events.push_back(std::move(e));
    }
  }
  doc.sort();
  return doc;
}

const SearchSpace& SearchSpace::for_category(const std::string& category) const {
  auto it = per_category.find(category);
  return it == per_category.end() ? *this : it->second;
}

SearchSpace SearchSpace::parse(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("search space is not valid JSON: ") + e.what());
  }
  SearchSpace s;
  if (doc.contains("w_nms")) s.w_nms = number_list(doc, "w_nms");
  if (doc.contains("tau")) s.tau = number_list(doc, "tau");
  const json categories = doc.value("categories", json::object());
  for (const auto& [id, sub] : categories.items()) {
    SearchSpace c;
    c.w_nms = sub.contains("w_nms") ? number_list(sub, "w_nms") : s.w_nms;
    c.tau = sub.contains("tau") ? number_list(sub, "tau") : s.tau;
    s.per_category[id] = c;
  }
  return s;
}

SearchSpace SearchSpace::load_file(const std::string& path) { return parse(read_file(path, "search space")); }

TuneResult tune(const ScoreStream& stream, const AnnotationDoc& reference, const Taxonomy& taxonomy,
                const std::vector<std::string>& categories, const ToleranceSpec& tol,
                const SearchSpace& space, unsigned jobs) {
  struct Best {
    SpotParams params;
    double f1 = -1.0;
  };
  std::vector<Best> best(categories.size());
  for (const auto& c : categories) {
    const auto& grid = space.for_category(c);
    if (grid.w_nms.empty() || grid.tau.empty()) throw DomainError("empty search space for '" + c + "'");
    for (double w : grid.w_nms) {
      if (!(w > 0.0)) throw DomainError("w_nms candidates must be positive");
    }
    stream.column(c);
    CategorySelector(c).check(taxonomy);
  }

  detail::parallel_for(categories.size(), jobs, [&](std::size_t k) {
    const std::string& c = categories[k];
    const auto& grid = space.for_category(c);
    const CategorySelector sel(c);
    AnnotationDoc pred;
    pred.t_begin = reference.t_begin;
    pred.t_end = reference.t_end;
    for (double w : grid.w_nms) {
      const auto peaks = nms_peaks(stream, c, w, NmsWidth::kHalf);
      for (double tau : grid.tau) {
        pred.events.clear();
        for (const auto& p : peaks) {
          if (p.score < tau) continue;
          EventRecord e;
          e.t = p.t;
          e.category = c;
          pred.events.push_back(std::move(e));
        }
        const double f1 = nnm_match(pred, reference, taxonomy, sel, tol).f1().value_or(0.0);
        Best& b = best[k];
        const bool better = f1 > b.f1 ||
                            (f1 == b.f1 && (w > b.params.w_nms || (w == b.params.w_nms && tau > b.params.tau)));
        if (better) b = {{w, tau}, f1};
      }
    }
  });

  TuneResult out;
  for (std::size_t k = 0; k < categories.size(); ++k) {
    out.config.categories[categories[k]] = best[k].params;
    out.f1[categories[k]] = best[k].f1;
  }
  return out;
}

}  // namespace evspot
