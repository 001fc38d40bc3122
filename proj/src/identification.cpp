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

#include "deface/identification.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "deface/error.hpp"
#include "deface/parallel.hpp"
#include "deface/random.hpp"

namespace deface {

namespace {

// Hinge objective on augmented vectors z = (x, 1).
double objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                 double lambda) {
  const Eigen::ArrayXd margins = 1.0 - y.array() * (z * w).array();
  return 0.5 * lambda * w.squaredNorm() + margins.max(0.0).mean();
}

PairwiseSvm train_pair(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const SvmHyper& hyper,
                       std::uint64_t stream) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  const double radius = 1.0 / std::sqrt(hyper.lambda);
  Rng rng(stream);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd best = w;
  double best_j = objective(w, z, y, hyper.lambda);

  PairwiseSvm m;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (Eigen::Index i : order) {
      ++t;
      const double eta = 1.0 / (hyper.lambda * double(t));
      const bool violated = y[i] * z.row(i).dot(w) < 1.0;
      w *= 1.0 - eta * hyper.lambda;
      if (violated) w += (eta * y[i]) * z.row(i).transpose();
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
    }
    const double j = objective(w, z, y, hyper.lambda);
    m.epoch_objective.push_back(j);
    if (j < best_j) {
      best_j = j;
      best = w;
    }
    m.best_objective.push_back(best_j);
  }
  m.weights = best.head(d - 1);
  m.bias = best[d - 1];
  return m;
}

// Lexicographic order on rows, so the canonical sample order depends only on
// the multiset of (label, vector) pairs.
bool row_less(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
  }
  return false;
}

}  // namespace

SvmModel train_multisvm(const Eigen::MatrixXd& samples, const std::vector<std::string>& labels,
                        const SvmHyper& hyper, unsigned workers) {
  if (samples.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw InvalidArgument("SVM training: one label per sample row required");
  }
  if (!(hyper.lambda > 0.0) || hyper.epochs < 1) throw InvalidArgument("SVM needs lambda > 0 and epochs >= 1");
  if (samples.cols() < 1) throw InvalidArgument("SVM training: empty feature vectors");
  if (!samples.allFinite()) throw InvalidArgument("SVM training: non-finite sample");

  SvmModel model;
  model.hyper = hyper;
  std::set<std::string> unique(labels.begin(), labels.end());
  model.classes.assign(unique.begin(), unique.end());
  if (model.classes.size() < 2) throw InvalidArgument("SVM training needs at least two classes");

  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < model.classes.size(); ++i) class_index[model.classes[i]] = i;
  std::vector<std::vector<Eigen::Index>> members(model.classes.size());
  for (Eigen::Index r = 0; r < samples.rows(); ++r) members[class_index[labels[r]]].push_back(r);
  for (auto& rows : members) {
    std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) { return row_less(samples, a, b); });
  }

  const std::size_t k = model.classes.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) model.machines.push_back({a, b, {}, 0.0, {}, {}});

  const Eigen::Index d = samples.cols();
  parallel_for(model.machines.size(), workers, [&](std::size_t m) {
    PairwiseSvm& machine = model.machines[m];
    const auto& pos = members[machine.first];
    const auto& neg = members[machine.second];
    const Eigen::Index n = static_cast<Eigen::Index>(pos.size() + neg.size());
    Eigen::MatrixXd z(n, d + 1);
    Eigen::VectorXd y(n);
    Eigen::Index r = 0;
    for (Eigen::Index i : pos) {
      z.row(r) << samples.row(i), 1.0;
      y[r++] = 1.0;
    }
    for (Eigen::Index i : neg) {
      z.row(r) << samples.row(i), 1.0;
      y[r++] = -1.0;
    }
    const std::uint64_t stream =
        derive_seed(hyper.seed, model.classes[machine.first] + '\x1f' + model.classes[machine.second]);
    PairwiseSvm trained = train_pair(z, y, hyper, stream);
    trained.first = machine.first;
    trained.second = machine.second;
    machine = std::move(trained);
  });
  return model;
}

std::vector<Vote> tally_votes(const SvmModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dim()) {
    throw InvalidArgument(fmt::format("probe has dim {}, model expects {}", x.size(), model.dim()));
  }
  std::vector<Vote> votes(model.classes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) votes[i].identity = model.classes[i];
  for (const auto& m : model.machines) {
    const double f = m.weights.dot(x) + m.bias;
    Vote& winner = votes[f >= 0.0 ? m.first : m.second];
    ++winner.wins;
    winner.margin += std::abs(f);
  }
  return votes;
}

std::string predict(const SvmModel& model, const Eigen::VectorXd& x) {
  const auto votes = tally_votes(model, x);
  if (votes.empty()) throw InvalidArgument("empty SVM model");
  const Vote* best = &votes.front();
  for (const Vote& v : votes) {
    if (std::tie(v.wins, v.margin) > std::tie(best->wins, best->margin) ||
        (v.wins == best->wins && v.margin == best->margin && v.identity < best->identity)) {
      best = &v;
    }
  }
  return best->identity;
}

TrainTestSplit split_train_test(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  TrainTestSplit split;
  for (const auto& identity : dataset.identities()) {
    std::vector<std::string> images = dataset.images_of(identity);
    const std::size_t m = images.size();
    if (m < 2) throw InvalidArgument("identity `" + identity + "` has a single image; cannot split");
    std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * double(m) + 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, m - 1);
    Rng rng(derive_seed(seed, identity));
    rng.shuffle(images);
    split.train.insert(split.train.end(), images.begin(), images.begin() + n_train);
    split.test.insert(split.test.end(), images.begin() + n_train, images.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string_view to_string(Scenario s) { return s == Scenario::kS1 ? "s1" : "s2"; }

std::string_view to_string(ThreatModel t) {
  switch (t) {
    case ThreatModel::kM3: return "m3";
    case ThreatModel::kM4: return "m4";
    case ThreatModel::kM5: return "m5";
    case ThreatModel::kM6: return "m6";
  }
  return "";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
  if (text == "s1" || text == "S1") return Scenario::kS1;
  if (text == "s2" || text == "S2") return Scenario::kS2;
  return std::nullopt;
}

std::optional<ThreatModel> parse_threat(std::string_view text) {
  for (ThreatModel t : {ThreatModel::kM3, ThreatModel::kM4, ThreatModel::kM5, ThreatModel::kM6}) {
    const auto name = to_string(t);
    if (text == name || (text.size() == 2 && text[0] == 'M' && text[1] == name[1])) return t;
  }
  return std::nullopt;
}

std::vector<GroupIdentification> IdentificationReport::groups(GroupBy by) const {
  if (by == GroupBy::kPair) return per_demographic;
  std::vector<std::pair<DemographicKey, GroupIdentification>> merged;
  for (const auto& g : per_demographic) {
    DemographicKey k = g.key;
    if (by == GroupBy::kGender) k.race = Race::kUnspecified;
    if (by == GroupBy::kRace) k.gender = Gender::kFemale;
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& e) { return e.first == k; });
    if (it == merged.end()) {
      GroupIdentification fresh;
      fresh.group = group_label(g.key, by);
      fresh.key = k;
      merged.emplace_back(k, fresh);
      it = std::prev(merged.end());
    }
    it->second.n += g.n;
    it->second.correct += g.correct;
  }
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.race, a.first.gender) < std::tie(b.first.race, b.first.gender);
  });
  std::vector<GroupIdentification> out;
  for (auto& [k, g] : merged) {
    g.ir = double(g.correct) / double(g.n);
    g.osr = 1.0 - g.ir;
    out.push_back(g);
  }
  return out;
}

RateTable IdentificationReport::rate_table(const std::string& metric, GroupBy by) const {
  if (metric != "ir" && metric != "osr") {
    throw InvalidArgument("identification rates are `ir` or `osr`, not `" + metric + "`");
  }
  RateTable t{metric, {}};
  for (const auto& g : groups(by)) t.entries.push_back({g.group, metric == "ir" ? g.ir : g.osr, g.n});
  return t;
}

IdentificationReport identification_run(const Dataset& dataset, const EmbeddingTable& original,
                                        const EmbeddingTable& obfuscated,
                                        const IdentificationOptions& options) {
  const bool s1_threat = options.threat == ThreatModel::kM3 || options.threat == ThreatModel::kM4;
  if (s1_threat != (options.scenario == Scenario::kS1)) {
    throw InvalidArgument(fmt::format("threat model {} does not belong to scenario {}",
                                      to_string(options.threat), to_string(options.scenario)));
  }
  const bool train_on_original = options.threat == ThreatModel::kM3 || options.threat == ThreatModel::kM5;
  const EmbeddingTable& train_table = train_on_original ? original : obfuscated;
  const EmbeddingTable& probe_table = train_on_original ? obfuscated : original;
  if (original.dim() != obfuscated.dim()) throw IntegrityError("original and obfuscated embeddings differ in dim");

  const TrainTestSplit split = split_train_test(dataset, options.train_fraction, options.seed);

  // Partition into training cohorts: everything (S1) or one per group (S2).
  std::map<DemographicKey, std::pair<std::vector<std::string>, std::vector<std::string>>> cohorts;
  const DemographicKey all{};
  auto cohort_of = [&](const std::string& image) {
    return options.scenario == Scenario::kS1 ? all : dataset.record(image).demographic;
  };
  // Images an obfuscator did not produce have no embedding on that side and
  // are left out of it.
  for (const auto& id : split.train)
    if (train_table.contains(id)) cohorts[cohort_of(id)].first.push_back(id);
  for (const auto& id : split.test)
    if (probe_table.contains(id)) cohorts[cohort_of(id)].second.push_back(id);

  std::map<DemographicKey, GroupIdentification> tally;
  std::size_t cohort_index = 0;
  for (const auto& [key, members] : cohorts) {
    const auto& [train_ids, test_ids] = members;
    if (test_ids.empty()) continue;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train_ids.size()), train_table.dim());
    std::vector<std::string> y;
    for (std::size_t i = 0; i < train_ids.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = train_table.at(train_ids[i]).transpose();
      y.push_back(dataset.record(train_ids[i]).identity_id);
    }
    SvmHyper hyper = options.hyper;
    hyper.seed = derive_seed(options.hyper.seed, cohort_index++);
    std::set<std::string> classes(y.begin(), y.end());
    if (classes.size() < 2) {
      throw InvalidArgument("identification cohort `" + group_label(key, GroupBy::kPair) +
                            "` has fewer than two identities");
    }
    const SvmModel model = train_multisvm(x, y, hyper, options.workers);

    std::vector<char> hit(test_ids.size());
    parallel_for(test_ids.size(), options.workers, [&](std::size_t i) {
      hit[i] = predict(model, probe_table.at(test_ids[i])) == dataset.record(test_ids[i]).identity_id;
    });
    for (std::size_t i = 0; i < test_ids.size(); ++i) {
      const DemographicKey& demo = dataset.record(test_ids[i]).demographic;
      auto& g = tally[demo];
      g.key = demo;
      ++g.n;
      g.correct += hit[i];
    }
  }

  if (tally.empty()) throw InvalidArgument("identification has no probe images");
  IdentificationReport report;
  report.scenario = options.scenario;
  report.threat = options.threat;
  report.dataset = dataset.name();
  std::vector<GroupIdentification> rows;
  for (auto& [k, g] : tally) {
    g.group = group_label(k, GroupBy::kPair);
    g.ir = double(g.correct) / double(g.n);
    g.osr = 1.0 - g.ir;
    report.n += g.n;
    report.correct += g.correct;
    rows.push_back(g);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.key.race, a.key.gender) < std::tie(b.key.race, b.key.gender);
  });
  report.per_demographic = std::move(rows);
  report.ir = report.n ? double(report.correct) / double(report.n) : 0.0;
  report.osr = 1.0 - report.ir;
  return report;
}

}  // namespace deface
