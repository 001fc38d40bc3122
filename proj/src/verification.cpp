// Copyright 2026 The deface-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deface/verification.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "deface/error.hpp"
#include "deface/parallel.hpp"
#include "deface/random.hpp"

namespace deface {

std::string_view to_string(VerificationMode m) {
  switch (m) {
    case VerificationMode::kBaseline: return "baseline";
    case VerificationMode::kM1: return "m1";
    case VerificationMode::kM2: return "m2";
  }
  return "";
}

std::optional<VerificationMode> parse_verification_mode(std::string_view text) {
  if (text == "baseline") return VerificationMode::kBaseline;
  if (text == "m1" || text == "M1") return VerificationMode::kM1;
  if (text == "m2" || text == "M2") return VerificationMode::kM2;
  return std::nullopt;
}

std::size_t PairSet::positives() const {
  return std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == PairLabel::kPositive; });
}

std::size_t PairSet::negatives() const { return pairs.size() - positives(); }

std::map<std::string, std::string> identity_obf_map(const Dataset& dataset, const EmbeddingTable& obfuscated) {
  std::map<std::string, std::string> out;
  for (const auto& rec : dataset.records()) {
    if (obfuscated.contains(rec.image_id)) out.emplace(rec.image_id, rec.image_id);
  }
  return out;
}

PairSet build_pairs(const Dataset& dataset, const std::map<std::string, std::string>& obf_map,
                    VerificationMode mode, int negatives_per_positive, std::uint64_t seed) {
  if (negatives_per_positive < 0) throw InvalidArgument("negatives per positive must be >= 0");
  for (const auto& [orig, obf] : obf_map) {
    if (!dataset.contains(orig)) throw IntegrityError("obfuscation map names unknown image `" + orig + "`");
  }

  // Positives grouped by probe source image, in sorted order.
  std::map<std::string, std::vector<VerificationPair>> by_probe;
  for (const auto& identity : dataset.identities()) {
    const auto& images = dataset.images_of(identity);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const std::string& p = images[i];
      if (mode == VerificationMode::kBaseline) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
          by_probe[p].push_back({p, images[j], PairLabel::kPositive, p});
        }
        continue;
      }
      auto it = obf_map.find(p);
      if (it == obf_map.end()) continue;
      if (mode == VerificationMode::kM1) {
        by_probe[p].push_back({it->second, p, PairLabel::kPositive, p});
      } else {
        for (const auto& q : images) {
          if (q != p) by_probe[p].push_back({it->second, q, PairLabel::kPositive, p});
        }
      }
    }
  }
  std::size_t positives = 0;
  for (const auto& [p, v] : by_probe) positives += v.size();
  if (positives == 0) {
    throw InvalidArgument(fmt::format("no eligible positive pairs for {} verification on {}",
                                      to_string(mode), dataset.name()));
  }

  // Negative candidates: images of other identities in the same group.
  std::map<DemographicKey, std::vector<std::string>> group_images;
  for (const auto& rec : dataset.records()) group_images[rec.demographic].push_back(rec.image_id);
  for (auto& [key, ids] : group_images) std::sort(ids.begin(), ids.end());

  PairSet out;
  out.mode = mode;
  for (auto& [source, pos] : by_probe) {
    const FaceRecord& src = dataset.record(source);
    const std::string probe_id = pos.front().probe_id;
    std::vector<std::string> candidates;
    for (const auto& id : group_images[src.demographic]) {
      if (dataset.record(id).identity_id != src.identity_id) candidates.push_back(id);
    }
    const std::size_t want = pos.size() * std::size_t(negatives_per_positive);
    Rng rng(derive_seed(seed, source));
    const auto picks = rng.sample_indices(candidates.size(), std::min(want, candidates.size()));
    for (auto& p : pos) out.pairs.push_back(std::move(p));
    for (std::size_t k : picks) out.pairs.push_back({probe_id, candidates[k], PairLabel::kNegative, source});
  }
  return out;
}

std::vector<ScoredPair> score_pairs(const PairSet& pairs, const EmbeddingTable& probes,
                                    const EmbeddingTable& gallery, unsigned workers) {
  std::vector<ScoredPair> out(pairs.pairs.size());
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const auto& p = pairs.pairs[i];
    out[i] = {cosine_distance(probes.at(p.probe_id), gallery.at(p.gallery_id)),
              p.label == PairLabel::kPositive};
  });
  return out;
}

Confusion confusion_at(const std::vector<ScoredPair>& scored, double threshold) {
  Confusion c;
  for (const auto& s : scored) {
    const bool match = s.distance <= threshold;
    if (s.positive) {
      match ? ++c.tp : ++c.fn;
    } else {
      match ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double f1_score(const Confusion& c) {
  if (c.tp == 0) return 0.0;
  return 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
}

namespace {

struct Level {
  double distance;
  std::size_t pos;  // positives at exactly this distance
  std::size_t neg;
};

// Distinct distances ascending with label counts; sort-then-reduce makes the
// result independent of input order.
std::vector<Level> levels_of(const std::vector<ScoredPair>& scored) {
  std::vector<ScoredPair> sorted = scored;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
  std::vector<Level> levels;
  for (const auto& s : sorted) {
    if (levels.empty() || levels.back().distance != s.distance) levels.push_back({s.distance, 0, 0});
    s.positive ? ++levels.back().pos : ++levels.back().neg;
  }
  return levels;
}

void count_labels(const std::vector<ScoredPair>& scored, std::size_t& pos, std::size_t& neg) {
  pos = 0;
  for (const auto& s : scored) pos += s.positive;
  neg = scored.size() - pos;
}

}  // namespace

std::vector<double> threshold_candidates(const std::vector<ScoredPair>& scored) {
  const auto levels = levels_of(scored);
  std::vector<double> out;
  if (levels.empty()) return out;
  out.push_back(levels.front().distance - 1.0);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    out.push_back(levels[i].distance + (levels[i + 1].distance - levels[i].distance) / 2.0);
  }
  out.push_back(levels.back().distance + 1.0);
  return out;
}

double optimize_threshold(const std::vector<ScoredPair>& scored) {
  std::size_t P = 0, N = 0;
  count_labels(scored, P, N);
  if (P == 0) throw InvalidArgument("threshold search needs at least one positive pair");
  const auto levels = levels_of(scored);
  const auto candidates = threshold_candidates(scored);

  // Candidate c accepts the first c levels. F1 = 2TP / (2TP + FP + FN) is
  // compared as an exact fraction.
  std::uint64_t best_num = 0, best_den = 1;
  std::size_t best = 0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (c > 0) {
      tp += levels[c - 1].pos;
      fp += levels[c - 1].neg;
    }
    const std::uint64_t num = 2 * tp;
    const std::uint64_t den = 2 * tp + fp + (P - tp);
    if (c == 0 || num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best = c;
    }
  }
  return candidates[best];
}

double roc_auc(const std::vector<ScoredPair>& scored) {
  std::size_t P = 0, N = 0;
  count_labels(scored, P, N);
  if (P == 0 || N == 0) throw InvalidArgument("AUC needs both positive and negative pairs");
  // Twice the area in units of 1/(P*N), accumulated exactly.
  std::uint64_t twice_area = 0;
  std::uint64_t tp = 0;
  for (const auto& lv : levels_of(scored)) {
    twice_area += std::uint64_t(lv.neg) * (2 * tp + lv.pos);
    tp += lv.pos;
  }
  return double(twice_area) / (2.0 * double(P) * double(N));
}

double tpr_at_fpr(const std::vector<ScoredPair>& scored, double fpr_target) {
  std::size_t P = 0, N = 0;
  count_labels(scored, P, N);
  if (P == 0 || N == 0) throw InvalidArgument("TPR at FPR needs both positive and negative pairs");
  std::size_t tp = 0, fp = 0, best_tp = 0;
  for (const auto& lv : levels_of(scored)) {
    tp += lv.pos;
    fp += lv.neg;
    if (double(fp) > fpr_target * double(N) + 1e-9) break;
    best_tp = tp;
  }
  return double(best_tp) / double(P);
}

RocSummary roc_metrics(const std::vector<ScoredPair>& scored, double threshold, double fpr_target) {
  RocSummary s;
  count_labels(scored, s.positives, s.negatives);
  if (s.positives == 0 || s.negatives == 0) throw InvalidArgument("ROC metrics need both labels");
  const Confusion c = confusion_at(scored, threshold);
  s.threshold = threshold;
  s.f1 = f1_score(c);
  s.tpr = double(c.tp) / double(s.positives);
  s.fpr = double(c.fp) / double(s.negatives);
  s.osr = 1.0 - s.tpr;
  s.auc = roc_auc(scored);
  s.fpr_target = fpr_target;
  s.tpr_at_fpr = tpr_at_fpr(scored, fpr_target);
  return s;
}

ConfidenceSummary confidence_verify(const std::vector<ConfidencePair>& pairs, double threshold) {
  ConfidenceSummary s;
  s.n = pairs.size();
  if (pairs.empty()) return s;
  std::size_t matched = 0;
  for (const auto& p : pairs) {
    if (!(p.confidence >= 0.0 && p.confidence <= 100.0)) throw InvalidArgument("confidence outside [0, 100]");
    matched += p.confidence >= threshold;
  }
  s.verification_rate = double(matched) / double(pairs.size());
  s.osr = 1.0 - s.verification_rate;
  return s;
}

std::vector<RateTable> confidence_rates(const Dataset& dataset, const std::vector<ConfidencePair>& pairs,
                                        GroupBy by, double threshold) {
  std::map<std::string, std::vector<ConfidencePair>> grouped;
  for (const auto& p : pairs) grouped[group_label(dataset.record(p.gallery_id).demographic, by)].push_back(p);
  RateTable vr{"confidence_vr", {}};
  RateTable osr{"confidence_osr", {}};
  for (const auto& label : dataset.group_labels(by)) {
    auto it = grouped.find(label);
    if (it == grouped.end()) continue;
    const auto s = confidence_verify(it->second, threshold);
    vr.entries.push_back({label, s.verification_rate, s.n});
    osr.entries.push_back({label, s.osr, s.n});
  }
  return {vr, osr};
}

RateTable VerificationReport::rate_table(const std::string& metric) const {
  RateTable t{metric, {}};
  for (const auto& g : groups) {
    if (metric == "tpr") {
      t.entries.push_back({g.group, g.tpr, g.positives});
    } else if (metric == "osr") {
      t.entries.push_back({g.group, g.osr, g.positives});
    } else {
      throw InvalidArgument("verification rates are `tpr` or `osr`, not `" + metric + "`");
    }
  }
  return t;
}

VerificationReport verification_run(const Dataset& dataset, const EmbeddingTable& original,
                                    const EmbeddingTable* obfuscated, const VerificationOptions& options) {
  const bool baseline = options.mode == VerificationMode::kBaseline;
  if (!baseline && !obfuscated) throw InvalidArgument("M1/M2 verification needs obfuscated embeddings");
  const EmbeddingTable& probes = baseline ? original : *obfuscated;
  const auto obf_map = baseline ? std::map<std::string, std::string>{} : identity_obf_map(dataset, probes);
  const PairSet pairs = build_pairs(dataset, obf_map, options.mode, options.negatives_per_positive, options.seed);
  const auto scored = score_pairs(pairs, probes, original, options.workers);

  VerificationReport report;
  report.mode = options.mode;
  report.dataset = dataset.name();
  report.group_by = options.group_by;
  const double threshold = optimize_threshold(scored);
  report.overall = roc_metrics(scored, threshold, options.fpr_target);

  std::map<std::string, GroupVerification> groups;
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    const auto& p = pairs.pairs[i];
    if (p.label != PairLabel::kPositive) continue;
    const std::string label = group_label(dataset.record(p.gallery_id).demographic, options.group_by);
    auto& g = groups[label];
    ++g.positives;
    g.matched += scored[i].distance <= threshold;
  }
  for (const auto& label : dataset.group_labels(options.group_by)) {
    auto it = groups.find(label);
    if (it == groups.end()) continue;
    GroupVerification g = it->second;
    g.group = label;
    g.tpr = double(g.matched) / double(g.positives);
    g.osr = 1.0 - g.tpr;
    report.groups.push_back(g);
  }
  return report;
}

}  // namespace deface
