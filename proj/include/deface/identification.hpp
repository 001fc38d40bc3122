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

// One-to-N re-identification with a one-vs-one linear SVM ensemble.
//
// Every unordered class pair gets its own two-class machine trained by
// seeded stochastic subgradient descent (Pegasos step size 1/(lambda t)) on
//
//   J(w, b) = lambda/2 |(w, b)|^2 + mean_i max(0, 1 - y_i (w.x_i + b)),
//
// with the bias folded in as a constant feature. Prediction is a majority
// vote over all machines.

#ifndef DEFACE_IDENTIFICATION_HPP_
#define DEFACE_IDENTIFICATION_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/fairness.hpp"
#include "deface/score_io.hpp"

namespace deface {

struct SvmHyper {
  double lambda = 1e-4;
  int epochs = 50;
  std::uint64_t seed = 42;
};

/// Two-class machine: decision(x) = w.x + b, positive votes for `first`.
struct PairwiseSvm {
  std::size_t first = 0;   // index into SvmModel::classes
  std::size_t second = 0;  // first < second
  Eigen::VectorXd weights;
  double bias = 0.0;
  /// J at the end of each epoch for the iterate kept so far (non-increasing).
  std::vector<double> best_objective;
  /// J at the end of each epoch for the raw SGD iterate.
  std::vector<double> epoch_objective;
};

struct SvmModel {
  /// Sorted identity ids.
  std::vector<std::string> classes;
  /// Machines in (first, second) lexicographic order, C(n, 2) of them.
  std::vector<PairwiseSvm> machines;
  SvmHyper hyper;

  Eigen::Index dim() const { return machines.empty() ? 0 : machines.front().weights.size(); }
};

/// Training rows: one embedding per row of `samples`, label per row.
/// Throws InvalidArgument with fewer than two classes or on size mismatch.
/// Sample order in the input does not affect the model.
SvmModel train_multisvm(const Eigen::MatrixXd& samples, const std::vector<std::string>& labels,
                        const SvmHyper& hyper, unsigned workers = 1);

struct Vote {
  std::string identity;
  std::size_t wins = 0;
  double margin = 0.0;
};

/// Votes per class (model class order). A machine with decision exactly 0
/// votes for its first class.
std::vector<Vote> tally_votes(const SvmModel& model, const Eigen::VectorXd& x);

/// Most wins; ties by larger summed |decision| over won machines, then by
/// ascending identity. Throws InvalidArgument on dimension mismatch.
std::string predict(const SvmModel& model, const Eigen::VectorXd& x);

/// Per identity: floor(fraction * m) images for training (at least one,
/// and at least one left for testing), chosen by a seeded shuffle.
struct TrainTestSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Throws InvalidArgument if an identity has fewer than two images or the
/// fraction is outside (0, 1).
TrainTestSplit split_train_test(const Dataset& dataset, double fraction, std::uint64_t seed);

enum class Scenario : std::uint8_t { kS1, kS2 };
enum class ThreatModel : std::uint8_t { kM3, kM4, kM5, kM6 };

std::string_view to_string(Scenario s);
std::string_view to_string(ThreatModel t);
std::optional<Scenario> parse_scenario(std::string_view text);
std::optional<ThreatModel> parse_threat(std::string_view text);

struct GroupIdentification {
  std::string group;
  /// Set on per-demographic rows; coarser rows keep only the label.
  DemographicKey key;
  std::size_t n = 0;
  std::size_t correct = 0;
  double ir = 0.0;
  double osr = 1.0;
};

struct IdentificationReport {
  Scenario scenario = Scenario::kS1;
  ThreatModel threat = ThreatModel::kM3;
  std::string dataset;
  std::size_t n = 0;
  std::size_t correct = 0;
  double ir = 0.0;
  double osr = 1.0;
  /// Per gender-race group.
  std::vector<GroupIdentification> per_demographic;

  /// Re-aggregates the per-pair counts at granularity `by`.
  std::vector<GroupIdentification> groups(GroupBy by) const;
  /// "ir" or "osr" at granularity `by`.
  RateTable rate_table(const std::string& metric, GroupBy by) const;
};

struct IdentificationOptions {
  Scenario scenario = Scenario::kS1;
  ThreatModel threat = ThreatModel::kM3;
  SvmHyper hyper;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

/// Images missing from a table are left out of the side that needs it.
/// S1 trains one model over all identities, S2 one model per demographic
/// group. M3/M5 train on original training embeddings and probe with
/// obfuscated test embeddings; M4/M6 the other way round. M3/M4 pair with
/// S1 and M5/M6 with S2; anything else throws InvalidArgument.
IdentificationReport identification_run(const Dataset& dataset, const EmbeddingTable& original,
                                        const EmbeddingTable& obfuscated,
                                        const IdentificationOptions& options);

}  // namespace deface

#endif  // DEFACE_IDENTIFICATION_HPP_
