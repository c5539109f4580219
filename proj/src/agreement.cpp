// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include "evspot/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "evspot/error.hpp"
#include "parallel.hpp"
#include "evspot/rollup.hpp"

namespace evspot {
namespace {

Ratio mean_of(const std::vector<Ratio>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

ModeSummary summarize(const std::vector<const MetricReport*>& reports) {
  std::vector<Ratio> p, r, f, c, cp;
  for (const auto* m : reports) {
    p.push_back(m->precision);
    r.push_back(m->recall);
    f.push_back(m->f1);
    c.push_back(m->consistent_fraction);
    cp.push_back(m->consistent_pred_fraction);
  }
  return {mean_of(p), mean_of(r), mean_of(f), mean_of(c), mean_of(cp)};
}

ModeSummary average(const std::vector<const ModeSummary*>& items) {
  std::vector<Ratio> p, r, f, c, cp;
  for (const auto* m : items) {
    p.push_back(m->precision);
    r.push_back(m->recall);
    f.push_back(m->f1);
    c.push_back(m->consistent_fraction);
    cp.push_back(m->consistent_pred_fraction);
  }
  return {mean_of(p), mean_of(r), mean_of(f), mean_of(c), mean_of(cp)};
}

void check_segments(const std::vector<const AnnotationDoc*>& docs) {
  for (const auto* d : docs) {
    if (d->t_begin != docs.front()->t_begin || d->t_end != docs.front()->t_end) {
      throw DomainError("annotations cover different match segments");
    }
    if (!d->match_id.empty() && !docs.front()->match_id.empty() &&
        d->match_id != docs.front()->match_id) {
      throw DomainError("annotations belong to different matches ('" + docs.front()->match_id +
                        "' vs '" + d->match_id + "')");
    }
  }
}

bool has_attributes(const Taxonomy& taxonomy, const std::string& category,
                    const std::vector<std::string>& keys) {
  if (keys.empty() || !taxonomy.contains(category)) return false;
  const auto defs = taxonomy.effective_attributes(category);
  for (const auto& k : keys) {
    if (std::none_of(defs.begin(), defs.end(), [&](const AttributeDef& d) { return d.name == k; })) {
      return false;
    }
  }
  return true;
}

AgreementReport run(const std::vector<AnnotationDoc>& raw_docs,
                    const std::vector<std::pair<std::size_t, std::size_t>>& directed,
                    const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                    const ToleranceSpec& tol, const AgreementOptions& options) {
  for (const auto& c : categories) CategorySelector(c).check(taxonomy);
  std::vector<AnnotationDoc> docs;
  for (const auto& d : raw_docs) {
    docs.push_back(options.rollup_depth ? rollup(d, taxonomy, *options.rollup_depth) : d);
  }

  AgreementReport rep;
  rep.categories = categories;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    rep.annotators.push_back(docs[i].annotator.empty() ? "annotator" + std::to_string(i + 1)
                                                       : docs[i].annotator);
  }

  rep.pairs.resize(directed.size());
  detail::parallel_for(directed.size(), options.jobs, [&](std::size_t k) {
    const auto [p, r] = directed[k];
    rep.pairs[k] = evaluate_pair(docs[p], docs[r], taxonomy, categories, tol, options.with_nn,
                                 options.with_sc);
    rep.pairs[k].pred = p;
    rep.pairs[k].ref = r;
  });

  rep.individual.resize(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    bool predicts = false;
    for (const auto& c : categories) {
      std::vector<const MetricReport*> nn, sc;
      for (const auto& e : rep.pairs) {
        if (e.pred != i) continue;
        predicts = true;
        if (auto it = e.nn.find(c); it != e.nn.end()) nn.push_back(&it->second);
        if (auto it = e.sc.find(c); it != e.sc.end()) sc.push_back(&it->second);
      }
      if (predicts) rep.individual[i][c] = {summarize(nn), summarize(sc)};
    }
  }
  for (const auto& c : categories) {
    std::vector<const ModeSummary*> nn, sc;
    for (const auto& ind : rep.individual) {
      if (auto it = ind.find(c); it != ind.end()) {
        nn.push_back(&it->second.nn);
        sc.push_back(&it->second.sc);
      }
    }
    rep.mean[c] = {average(nn), average(sc)};

    std::vector<double> counts;
    const CategorySelector sel(c);
    for (const auto& d : docs) {
      counts.push_back(static_cast<double>(std::count_if(
          d.events.begin(), d.events.end(),
          [&](const EventRecord& e) { return !e.adopted && sel.matches(taxonomy, e.category); })));
    }
    CountStats s;
    if (!counts.empty()) {
      for (double v : counts) s.mean += v;
      s.mean /= static_cast<double>(counts.size());
      for (double v : counts) s.std += (v - s.mean) * (v - s.mean);
      s.std = std::sqrt(s.std / static_cast<double>(counts.size()));
    }
    rep.num_events[c] = s;
  }
  return rep;
}

}  // namespace

const PairEntry* AgreementReport::pair(std::size_t pred, std::size_t ref) const {
  for (const auto& e : pairs) {
    if (e.pred == pred && e.ref == ref) return &e;
  }
  return nullptr;
}

PairEntry evaluate_pair(const AnnotationDoc& pred, const AnnotationDoc& ref,
                        const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                        const ToleranceSpec& tol, bool with_nn, bool with_sc,
                        const std::vector<std::string>& attribute_keys) {
  PairEntry entry;
  if (with_nn) {
    for (const auto& c : categories) {
      entry.nn[c] = report({nnm_match(pred, ref, taxonomy, CategorySelector(c), tol)});
    }
  }
  if (with_sc) {
    const AlignmentResult aligned = scm_align_boundaries(pred, ref, taxonomy, tol);
    if (!aligned.ok) {
      entry.sc_problem = aligned.problem;
      return entry;
    }
    for (const auto& c : categories) {
      const CategorySelector sel(c);
      const MatchResult m =
          has_attributes(taxonomy, c, attribute_keys)
              ? scm_match_with_attributes(aligned.pred, aligned.ref, taxonomy, sel, tol, attribute_keys)
              : scm_match(aligned.pred, aligned.ref, taxonomy, sel, tol);
      entry.sc[c] = report({m});
    }
  }
  return entry;
}

AgreementReport pairwise_agreement(const std::vector<AnnotationDoc>& docs, const Taxonomy& taxonomy,
                                   const std::vector<std::string>& categories,
                                   const ToleranceSpec& tol, const AgreementOptions& options) {
  if (docs.size() < 2) throw DomainError("agreement needs at least two annotations");
  std::vector<const AnnotationDoc*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  check_segments(ptrs);
  std::vector<std::pair<std::size_t, std::size_t>> directed;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < docs.size(); ++j) {
      if (i != j) directed.emplace_back(i, j);
    }
  }
  return run(docs, directed, taxonomy, categories, tol, options);
}

AgreementReport one_vs_many(const AnnotationDoc& pred, const std::vector<AnnotationDoc>& refs,
                            const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                            const ToleranceSpec& tol, const AgreementOptions& options) {
  if (refs.empty()) throw DomainError("one_vs_many needs at least one reference");
  std::vector<AnnotationDoc> docs{pred};
  docs.insert(docs.end(), refs.begin(), refs.end());
  std::vector<const AnnotationDoc*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  check_segments(ptrs);
  std::vector<std::pair<std::size_t, std::size_t>> directed;
  for (std::size_t j = 1; j < docs.size(); ++j) directed.emplace_back(0, j);
  return run(docs, directed, taxonomy, categories, tol, options);
}

}  // namespace evspot
