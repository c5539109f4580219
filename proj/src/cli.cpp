// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "evspot/agreement.hpp"
#include "evspot/annotation.hpp"
#include "evspot/error.hpp"
#include "evspot/manifest.hpp"
#include "evspot/metrics.hpp"
#include "evspot/report.hpp"
#include "evspot/rollup.hpp"
#include "evspot/spotting.hpp"
#include "evspot/synthgen.hpp"
#include "evspot/taxonomy.hpp"
#include "evspot/timeline.hpp"

namespace evspot {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kDefaultCategories = {
    "@game_status",
    "ball_reception",
    "ball_release",
    "ball_release/intentional",
    "ball_release/unintentional",
    "ball_release/intentional/shot",
    "ball_release/unintentional/successful_interference",
    "ball_release/intentional/pass/successful_untouched",
    "ball_release/intentional/pass/intercepted",
};

struct Globals {
  std::string taxonomy = "soccer";
  std::string out_dir;
  std::uint64_t seed = 42;
  bool seed_given = false;
  unsigned jobs = 1;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Context {
 public:
  Context(const Globals& g, std::vector<std::string> command, std::ostream& out)
      : globals_(g), out_(out) {
    manifest_.command = std::move(command);
    manifest_.tool_version = EVSPOT_VERSION;
  }

  const Taxonomy& taxonomy() {
    if (!taxonomy_) {
      if (fs::is_regular_file(globals_.taxonomy)) {
        taxonomy_ = Taxonomy::load_file(globals_.taxonomy);
        manifest_.add_input(globals_.taxonomy);
      } else {
        const auto names = Taxonomy::bundled_names();
        if (std::find(names.begin(), names.end(), globals_.taxonomy) == names.end()) {
          throw IoError("no taxonomy file or bundled taxonomy named '" + globals_.taxonomy + "'");
        }
        taxonomy_ = Taxonomy::bundled(globals_.taxonomy);
      }
      manifest_.taxonomy_sport = taxonomy_->sport();
      manifest_.taxonomy_version = taxonomy_->version();
    }
    return *taxonomy_;
  }

  AnnotationDoc load_doc(const std::string& path, bool strict = false) {
    ParseOptions opts;
    opts.strict_frames = strict;
    AnnotationDoc doc = load_annotations(path, opts);
    manifest_.add_input(path);
    return doc;
  }

  ToleranceSpec tolerance(const std::string& path) {
    ToleranceSpec tol = path.empty() ? ToleranceSpec::from_taxonomy(taxonomy())
                                     : ToleranceSpec::load_file(path, taxonomy());
    if (!path.empty()) manifest_.add_input(path);
    manifest_.tolerance_json = tol.to_json();
    return tol;
  }

  void note_input(const std::string& path) { manifest_.add_input(path); }
  void set_seed(std::uint64_t seed) { manifest_.seed = seed; }

  bool has_out_dir() const { return !globals_.out_dir.empty(); }

  // Writes into the output directory, or to stdout when there is none and
  // `to_stdout` is set.
  void emit(const std::string& name, const std::string& content, bool to_stdout) {
    if (has_out_dir()) {
      fs::create_directories(globals_.out_dir);
      const std::string path = (fs::path(globals_.out_dir) / name).string();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot write '" + path + "'");
      f << content;
      if (!f) throw IoError("failed writing '" + path + "'");
      manifest_.outputs.push_back(name);
    } else if (to_stdout) {
      out_ << content;
    }
  }

  void finish() {
    if (!has_out_dir()) return;
    fs::create_directories(globals_.out_dir);
    manifest_.write(globals_.out_dir);
  }

  std::ostream& out() { return out_; }

 private:
  const Globals& globals_;
  std::ostream& out_;
  std::optional<Taxonomy> taxonomy_;
  RunManifest manifest_;
};

std::optional<TiouSummary> try_tiou(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy,
                                    PathGroup group, std::string_view state) {
  try {
    return pairwise_tiou(docs, taxonomy, group, state);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

std::string tiou_line(const char* what, const std::optional<TiouSummary>& s) {
  if (!s) return fmt::format("temporal IoU {}: unavailable\n", what);
  return fmt::format("temporal IoU {}: mean {} std {} aggregated {}\n", what,
                     s->mean ? fmt::format("{:.3f}", *s->mean) : "-",
                     s->std ? fmt::format("{:.3f}", *s->std) : "-",
                     s->aggregated ? fmt::format("{:.3f}", *s->aggregated) : "-");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation toolkit for spotted events in invasion games", "evspot"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(EVSPOT_VERSION));
  Globals g;
  app.add_option("--taxonomy", g.taxonomy, "Taxonomy config file or bundled name (soccer, handball)");
  app.add_option("--out", g.out_dir, "Output directory; a manifest.json is written there");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check event files against the taxonomy");
  std::vector<std::string> validate_files;
  bool strict_frames = false;
  validate_cmd->add_option("events", validate_files, "Event files")->required();
  validate_cmd->add_flag("--strict-frames", strict_frames, "Reject timestamps off the fps grid");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compare a prediction against a reference");
  std::string pred_path, ref_path, tol_path, mode = "both", attrs, categories, ap_windows, format = "text";
  std::optional<int> level;
  eval_cmd->add_option("--pred", pred_path, "Prediction event file")->required();
  eval_cmd->add_option("--ref", ref_path, "Reference event file")->required();
  eval_cmd->add_option("--mode", mode, "nn, sc or both")->check(CLI::IsMember({"nn", "sc", "both"}));
  eval_cmd->add_option("--level", level, "Roll both documents up to this depth first");
  eval_cmd->add_option("--tol", tol_path, "Tolerance file (JSON)");
  eval_cmd->add_option("--attrs", attrs, "Comma-separated attributes that must agree under SC");
  eval_cmd->add_option("--categories", categories, "Comma-separated categories or @group selectors");
  eval_cmd->add_option("--ap-windows", ap_windows, "Comma-separated windows for average precision");
  eval_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  // agree
  auto* agree_cmd = app.add_subcommand("agree", "Inter-annotator agreement");
  std::vector<std::string> agree_files;
  bool one_vs_many_flag = false;
  std::string agree_mode = "both", agree_tol, agree_categories, agree_format = "text";
  std::optional<int> agree_level;
  agree_cmd->add_option("events", agree_files, "Event files, one per annotator")->required();
  agree_cmd->add_flag("--one-vs-many", one_vs_many_flag, "First file predicts, the rest are references");
  agree_cmd->add_option("--mode", agree_mode, "nn, sc or both")->check(CLI::IsMember({"nn", "sc", "both"}));
  agree_cmd->add_option("--level", agree_level, "Roll documents up to this depth first");
  agree_cmd->add_option("--tol", agree_tol, "Tolerance file (JSON)");
  agree_cmd->add_option("--categories", agree_categories, "Comma-separated categories or @group selectors");
  agree_cmd->add_option("--format", agree_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  // spot
  auto* spot_cmd = app.add_subcommand("spot", "Turn a score stream into spotted events");
  std::string scores_path, config_path;
  spot_cmd->add_option("--scores", scores_path, "Score stream file")->required();
  spot_cmd->add_option("--config", config_path, "Spotter config (JSON)")->required();

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "Grid search of w_nms and tau on NN F1");
  std::string tune_scores, tune_ref, grid_path, tune_tol, tune_categories;
  tune_cmd->add_option("--scores", tune_scores, "Score stream file")->required();
  tune_cmd->add_option("--ref", tune_ref, "Reference event file")->required();
  tune_cmd->add_option("--grid", grid_path, "Search space (JSON)");
  tune_cmd->add_option("--tol", tune_tol, "Tolerance file (JSON)");
  tune_cmd->add_option("--categories", tune_categories, "Comma-separated categories (default: stream columns)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic matches and annotator variants");
  std::string model_path, noise_path, stream_shape;
  int annotators = 0;
  std::optional<int> bias_k;
  synth_cmd->add_option("--model", model_path, "Match model (JSON)");
  synth_cmd->add_option("--noise", noise_path, "Noise model (JSON) for the annotator variants");
  synth_cmd->add_option("--annotators", annotators, "Number of perturbed variants to write");
  synth_cmd->add_option("--bias-demo", bias_k, "Run the duplicate-prediction demo with k copies");
  synth_cmd->add_option("--stream", stream_shape, "Also write a score stream: spike, blur or noisy")
      ->check(CLI::IsMember({"spike", "blur", "noisy"}));

  // timeline
  auto* timeline_cmd = app.add_subcommand("timeline", "Export an annotator timeline");
  std::vector<std::string> timeline_files;
  std::string timeline_format = "svg";
  timeline_cmd->add_option("events", timeline_files, "Event files, one lane each")->required();
  timeline_cmd->add_option("--format", timeline_format, "svg, json or both")
      ->check(CLI::IsMember({"svg", "json", "both"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << EVSPOT_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  g.seed_given = seed_opt->count() > 0;

  std::vector<std::string> command{"evspot"};
  command.insert(command.end(), args.begin(), args.end());
  Context ctx(g, command, out);

  try {
    if (validate_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      std::size_t total = 0;
      for (const auto& path : validate_files) {
        const AnnotationDoc doc = ctx.load_doc(path, strict_frames);
        for (const auto& v : validate(doc, tax)) {
          out << fmt::format("{}: t={} rule={} category={} {}\n", path, format_seconds(v.t), v.rule, v.category,
                             v.message);
          ++total;
        }
      }
      if (total == 0) out << "ok\n";
      ctx.finish();
      return total == 0 ? kExitOk : kExitViolations;
    }

    if (eval_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      AnnotationDoc pred = ctx.load_doc(pred_path);
      AnnotationDoc ref = ctx.load_doc(ref_path);
      const ToleranceSpec tol = ctx.tolerance(tol_path);
      if (level) {
        pred = rollup(pred, tax, *level);
        ref = rollup(ref, tax, *level);
      }
      const auto cats = categories.empty() ? kDefaultCategories : split_list(categories);
      const PairEntry entry = evaluate_pair(pred, ref, tax, cats, tol, mode != "sc", mode != "nn", split_list(attrs));
      const auto status_iou = try_tiou({pred, ref}, tax, PathGroup::kGameStatus, kActive);
      const auto possession_iou = try_tiou({pred, ref}, tax, PathGroup::kPossession, "");
      std::string text = render_table(entry, cats, tol) + tiou_line("active play", status_iou) +
                         tiou_line("possession", possession_iou);
      std::string js = pair_to_json(entry, cats, tol, status_iou, possession_iou);
      if (!ap_windows.empty()) {
        std::vector<double> windows;
        for (const auto& w : split_list(ap_windows)) windows.push_back(std::stod(w));
        auto doc = nlohmann::json::parse(js);
        for (std::size_t i = 0; i < cats.size(); ++i) {
          const ApResult ap =
              average_precision_over_tolerances(pred, ref, tax, CategorySelector(cats[i]), windows, tol.mode());
          nlohmann::json values = nlohmann::json::array();
          for (const auto& v : ap.ap) values.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
          doc["categories"][i]["ap"] = {{"windows", ap.windows},
                                        {"values", values},
                                        {"mean", ap.mean ? nlohmann::json(*ap.mean) : nlohmann::json(nullptr)}};
          text += fmt::format("AP {}: {}\n", cats[i], format_percent(ap.mean));
        }
        js = doc.dump(2) + "\n";
      }
      if (ctx.has_out_dir()) {
        ctx.emit("report.txt", text, false);
        ctx.emit("report.json", js, false);
      }
      out << (format == "json" ? js : text);
      ctx.finish();
      return kExitOk;
    }

    if (agree_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      std::vector<AnnotationDoc> docs;
      for (const auto& p : agree_files) docs.push_back(ctx.load_doc(p));
      const ToleranceSpec tol = ctx.tolerance(agree_tol);
      const auto cats = agree_categories.empty() ? kDefaultCategories : split_list(agree_categories);
      AgreementOptions opts;
      opts.rollup_depth = agree_level;
      opts.with_nn = agree_mode != "sc";
      opts.with_sc = agree_mode != "nn";
      opts.jobs = g.jobs;
      AgreementReport rep;
      if (one_vs_many_flag) {
        if (docs.size() < 2) throw DomainError("--one-vs-many needs a prediction and at least one reference");
        rep = one_vs_many(docs.front(), {docs.begin() + 1, docs.end()}, tax, cats, tol, opts);
      } else {
        rep = pairwise_agreement(docs, tax, cats, tol, opts);
      }
      std::vector<AnnotationDoc> rolled = docs;
      if (agree_level) {
        for (auto& d : rolled) d = rollup(d, tax, *agree_level);
      }
      const auto status_iou = try_tiou(rolled, tax, PathGroup::kGameStatus, kActive);
      const auto possession_iou = try_tiou(rolled, tax, PathGroup::kPossession, "");
      const std::string text =
          render_agreement(rep, tol) + tiou_line("active play", status_iou) + tiou_line("possession", possession_iou);
      const std::string js = agreement_to_json(rep, tol, status_iou, possession_iou);
      if (ctx.has_out_dir()) {
        ctx.emit("agreement.txt", text, false);
        ctx.emit("agreement.json", js, false);
      }
      out << (agree_format == "json" ? js : text);
      ctx.finish();
      return kExitOk;
    }

    if (spot_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      const ScoreStream stream = load_scores(scores_path);
      ctx.note_input(scores_path);
      const SpotterConfig cfg = SpotterConfig::load_file(config_path);
      ctx.note_input(config_path);
      ctx.emit("spotted.events", serialize_annotations(spot(stream, cfg, tax)), true);
      ctx.finish();
      return kExitOk;
    }

    if (tune_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      const ScoreStream stream = load_scores(tune_scores);
      ctx.note_input(tune_scores);
      const AnnotationDoc ref = ctx.load_doc(tune_ref);
      const ToleranceSpec tol = ctx.tolerance(tune_tol);
      SearchSpace space;
      if (!grid_path.empty()) {
        space = SearchSpace::load_file(grid_path);
        ctx.note_input(grid_path);
      }
      const auto cats = tune_categories.empty() ? stream.categories : split_list(tune_categories);
      const TuneResult res = tune(stream, ref, tax, cats, tol, space, g.jobs);
      ctx.emit("spotter.json", res.config.to_json(), true);
      std::string summary;
      for (const auto& [c, f1] : res.f1) {
        const auto& p = res.config.categories.at(c);
        summary += fmt::format("{}: w_nms={} tau={} f1={:.4f}\n", c, p.w_nms, p.tau, f1);
      }
      if (ctx.has_out_dir()) {
        ctx.emit("tune.txt", summary, false);
        out << summary;
      }
      ctx.finish();
      return kExitOk;
    }

    if (synth_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      ctx.set_seed(g.seed);
      if (bias_k) {
        const BiasDemoResult b = bias_demo(g.seed, *bias_k, tax);
        const std::string line = fmt::format(
            "duplicates={} category={} nn_precision={} sc_consistent_fraction={} sc_precision={}\n", b.duplicates,
            b.category, format_percent(b.nn.precision), format_percent(b.sc.consistent_fraction),
            format_percent(b.sc.precision));
        out << line;
        if (ctx.has_out_dir()) {
          ctx.emit("reference.events", serialize_annotations(b.reference), false);
          ctx.emit("prediction.events", serialize_annotations(b.prediction), false);
          ctx.emit("bias_demo.txt", line, false);
        }
        ctx.finish();
        return kExitOk;
      }
      MatchModel model = model_path.empty() ? MatchModel::defaults(tax.sport())
                                            : MatchModel::load_file(model_path, tax.sport());
      if (!model_path.empty()) ctx.note_input(model_path);
      if (g.seed_given || model_path.empty()) model.seed = g.seed;
      ctx.set_seed(model.seed);
      const AnnotationDoc doc = generate_match(model, tax);
      ctx.emit("match.events", serialize_annotations(doc), annotators == 0);
      if (annotators > 0) {
        if (!ctx.has_out_dir()) throw IoError("--annotators needs --out");
        NoiseModel noise = noise_path.empty() ? NoiseModel{} : NoiseModel::load_file(noise_path);
        if (!noise_path.empty()) ctx.note_input(noise_path);
        const std::uint64_t base = noise.seed;
        for (int i = 1; i <= annotators; ++i) {
          noise.seed = base + model.seed * 1000003ULL + static_cast<std::uint64_t>(i);
          noise.annotator = fmt::format("annotator{}", i);
          const std::string name = fmt::format("annotator{}.events", i);
          ctx.emit(name, serialize_annotations(perturb(doc, noise, tax)), false);
        }
      }
      if (!stream_shape.empty()) {
        if (!ctx.has_out_dir()) throw IoError("--stream needs --out");
        StreamOptions so;
        so.fps = doc.fps.value_or(25.0);
        so.shape = stream_shape == "spike" ? StreamShape::kSpike
                   : stream_shape == "blur" ? StreamShape::kBlur
                                            : StreamShape::kNoisy;
        so.seed = model.seed;
        std::set<std::string> cats;
        for (const auto& e : doc.events) cats.insert(e.category);
        ctx.emit("scores.csv",
                 serialize_scores(score_stream_from_doc(doc, tax, {cats.begin(), cats.end()}, so)), false);
      }
      ctx.finish();
      return kExitOk;
    }

    if (timeline_cmd->parsed()) {
      const Taxonomy& tax = ctx.taxonomy();
      std::vector<AnnotationDoc> docs;
      for (const auto& p : timeline_files) docs.push_back(ctx.load_doc(p));
      const Timeline tl = build_timeline(docs, tax);
      if (timeline_format != "json") ctx.emit("timeline.svg", timeline_to_svg(tl), true);
      if (timeline_format != "svg") ctx.emit("timeline.json", timeline_to_json(tl), timeline_format == "json");
      ctx.finish();
      return kExitOk;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolations;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace evspot
