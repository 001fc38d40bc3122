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

// One-to-one re-identification. Pairs are scored by cosine distance and a
// pair is declared "same person" iff distance <= threshold. The threshold
// is fitted for best F1; the obfuscation success rate is OSR = 1 - TPR.

#ifndef DEFACE_VERIFICATION_HPP_
#define DEFACE_VERIFICATION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/fairness.hpp"
#include "deface/score_io.hpp"
#include "deface/similarity.hpp"

namespace deface {

enum class VerificationMode : std::uint8_t {
  kBaseline,  // original vs original photos, no obfuscation
  kM1,        // attacker holds the very photo that was obfuscated
  kM2,        // attacker holds other photos of the target
};

std::string_view to_string(VerificationMode m);
std::optional<VerificationMode> parse_verification_mode(std::string_view text);

enum class PairLabel : std::uint8_t { kNegative, kPositive };

/// probe_id lives in the probe table (obfuscated embeddings for M1/M2),
/// gallery_id in the original table.
struct VerificationPair {
  std::string probe_id;
  std::string gallery_id;
  PairLabel label = PairLabel::kNegative;
  /// Image the probe was derived from; equals probe_id for the baseline.
  std::string probe_source;

  bool operator==(const VerificationPair&) const = default;
};

struct PairSet {
  VerificationMode mode = VerificationMode::kBaseline;
  std::vector<VerificationPair> pairs;

  std::size_t positives() const;
  std::size_t negatives() const;
};

inline constexpr int kDefaultNegativesPerPositive = 1;

/// Positives: baseline = every unordered same-identity photo pair; M1 =
/// (obf(p), p); M2 = (obf(p), q) for q != p of the same identity. Only
/// images present in `obf_map` are probed for M1/M2. Each probe gets up to
/// negatives_per_positive negatives per positive, drawn without replacement
/// from other identities of the same demographic. Throws InvalidArgument
/// when no positive pair exists.
PairSet build_pairs(const Dataset& dataset, const std::map<std::string, std::string>& obf_map,
                    VerificationMode mode, int negatives_per_positive, std::uint64_t seed);

/// Maps every image present in `obfuscated` to itself (the obfuscated
/// version of image X is stored under key X).
std::map<std::string, std::string> identity_obf_map(const Dataset& dataset,
                                                    const EmbeddingTable& obfuscated);

struct ScoredPair {
  double distance = 0.0;
  bool positive = false;

  bool operator==(const ScoredPair&) const = default;
};

/// Cosine distance of every pair, computed on up to `workers` threads.
std::vector<ScoredPair> score_pairs(const PairSet& pairs, const EmbeddingTable& probes,
                                    const EmbeddingTable& gallery, unsigned workers = 1);

/// Confusion counts of the rule "same iff distance <= threshold".
struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion_at(const std::vector<ScoredPair>& scored, double threshold);

/// 2TP / (2TP + FP + FN); 0 when TP = 0.
double f1_score(const Confusion& c);

/// Threshold candidates: midpoints of consecutive sorted unique distances,
/// plus one value below the minimum and one above the maximum.
std::vector<double> threshold_candidates(const std::vector<ScoredPair>& scored);

/// Candidate maximizing F1, smallest on ties. Throws InvalidArgument when
/// there is no positive pair; an all-positive set yields the above-max
/// candidate.
double optimize_threshold(const std::vector<ScoredPair>& scored);

struct RocSummary {
  double threshold = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  /// Always exactly 1 - tpr.
  double osr = 1.0;
  double fpr_target = 0.1;
  double tpr_at_fpr = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Area under the ROC curve by trapezoids over every distinct distance.
double roc_auc(const std::vector<ScoredPair>& scored);

/// TPR at the largest threshold (a distinct distance, or below-min) whose
/// FPR does not exceed `fpr_target`.
double tpr_at_fpr(const std::vector<ScoredPair>& scored, double fpr_target);

RocSummary roc_metrics(const std::vector<ScoredPair>& scored, double threshold, double fpr_target);

inline constexpr double kDefaultConfidenceThreshold = 70.0;

struct ConfidenceSummary {
  double verification_rate = 0.0;
  double osr = 1.0;
  std::size_t n = 0;
};

/// Every pair is a positive; a match is confidence >= threshold.
ConfidenceSummary confidence_verify(const std::vector<ConfidencePair>& pairs,
                                    double threshold = kDefaultConfidenceThreshold);

/// Per-group confidence verification rates, grouped by the gallery image's
/// demographic. Returns tables "confidence_vr" and "confidence_osr".
std::vector<RateTable> confidence_rates(const Dataset& dataset, const std::vector<ConfidencePair>& pairs,
                                        GroupBy by, double threshold = kDefaultConfidenceThreshold);

/// Per-group outcome on positive pairs at the fitted threshold.
struct GroupVerification {
  std::string group;
  std::size_t positives = 0;
  std::size_t matched = 0;
  double tpr = 0.0;
  double osr = 1.0;
};

struct VerificationReport {
  VerificationMode mode = VerificationMode::kBaseline;
  std::string dataset;
  RocSummary overall;
  std::vector<GroupVerification> groups;
  GroupBy group_by = GroupBy::kPair;

  /// "tpr" or "osr" per group, ready for the bias engine.
  RateTable rate_table(const std::string& metric) const;
};

struct VerificationOptions {
  VerificationMode mode = VerificationMode::kBaseline;
  int negatives_per_positive = kDefaultNegativesPerPositive;
  double fpr_target = 0.1;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  GroupBy group_by = GroupBy::kPair;
};

/// Builds pairs, scores them, fits the threshold on this run, and breaks
/// positives down by the gallery identity's demographic group. `obfuscated`
/// is ignored for the baseline.
VerificationReport verification_run(const Dataset& dataset, const EmbeddingTable& original,
                                    const EmbeddingTable* obfuscated, const VerificationOptions& options);

}  // namespace deface

#endif  // DEFACE_VERIFICATION_HPP_
