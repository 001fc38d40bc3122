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

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "deface/attributes.hpp"
#include "deface/experiment.hpp"
#include "deface/fairness.hpp"
#include "deface/focus.hpp"
#include "deface/identification.hpp"
#include "deface/pixel_obfuscators.hpp"
#include "deface/random.hpp"
#include "deface/report.hpp"
#include "deface/verification.hpp"

namespace fs = std::filesystem;
using namespace deface;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed checks of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(failed_) + " failed";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

int g_failed = 0;

void report(int n, const Check& c, const std::string& detail) {
  if (!c.ok()) ++g_failed;
  std::printf("%s criterion %d: %s\n", c.ok() ? "PASS" : "FAIL", n, (c.ok() ? detail : c.summary()).c_str());
  std::fflush(stdout);
}

void run(int n, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string detail;
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  report(n, c, detail);
}

// ---- independent oracles ---------------------------------------------------

bool oracle_biased(double a, double b, double eps) {
  const double hi = std::max(a, b);
  const double r = hi == 0.0 ? 1.0 : std::min(a, b) / hi;
  return r <= 1.0 - eps + 1e-12;
}

double f1_at(const std::vector<ScoredPair>& s, double t) {
  double tp = 0, fp = 0, fn = 0;
  for (const auto& p : s) {
    const bool same = p.distance <= t;
    tp += same && p.positive;
    fp += same && !p.positive;
    fn += !same && p.positive;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

RateTable rate_table(const std::vector<double>& rates) {
  RateTable t{"m", {}};
  for (std::size_t i = 0; i < rates.size(); ++i) t.entries.push_back({"g" + std::to_string(i), rates[i], 1});
  return t;
}

ExperimentConfig e2e_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.name = "e2e";
  cfg.output_dir = out;
  for (int s = 0; s < 6; ++s) cfg.stages.insert(static_cast<Stage>(s));
  SynthConfig sc;
  sc.spec.name = "e2e";
  sc.spec.groups = {DemographicKey{Gender::kFemale, Race::kWhite}, DemographicKey{Gender::kMale, Race::kWhite}};
  sc.spec.ids_per_group = 20;
  sc.spec.imgs_per_id = 5;
  sc.spec.dim = 32;
  cfg.synthetic = sc;
  cfg.attacks = attack_names();
  MethodConfig blur;
  blur.name = "blur";
  blur.synth.strength = 0.6;
  blur.synth.fail_rate = 0.05;
  blur.synth.detect_rate = 0.9;
  MethodConfig swap;
  swap.name = "swap";
  swap.synth.strength = 2.0;
  swap.synth.detect_rate = 0.8;
  swap.synth.noise_scale = {{DemographicKey{Gender::kMale, Race::kWhite}, 1.5}};
  cfg.methods = {blur, swap};
  return cfg;
}

// Writes the bundle and every table format; returns file -> bytes.
std::map<std::string, std::string> emit_all(const ReportBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  save_bundle(dir / "bundle.json", b);
  std::vector<fs::path> files{dir / "bundle.json"};
  for (auto fmt : {TableFormat::kCsv, TableFormat::kMarkdown, TableFormat::kJson}) {
    const auto sub = dir / std::string(extension(fmt));
    fs::create_directories(sub);
    for (const auto& p : emit_tables({b}, fmt, sub)) files.push_back(p);
  }
  std::map<std::string, std::string> out;
  for (const auto& p : files) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(p, dir).string()] = s.str();
  }
  return out;
}

// ---- criteria --------------------------------------------------------------

std::string criterion1(Check& c) {
  const EoResult stance = eo_bias(0.5, 0.4, 0.2);
  c.expect(stance.biased, "(0.5, 0.4) not biased");
  c.expect(stance.against == 1, "(0.5, 0.4) not against the 0.4 group");
  c.expect(!eo_bias(0.9, 0.8, 0.2).biased, "(0.9, 0.8) biased");
  return "(0.5, 0.4) biased against 0.4; (0.9, 0.8) unbiased at eps 0.2";
}

std::string criterion2(Check& c) {
  const auto start = Clock::now();
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + int(rng.below(9));
    std::vector<double> rates;
    for (int i = 0; i < n; ++i) {
      const auto kind = rng.below(6);
      rates.push_back(kind == 0 ? 0.0 : kind == 1 ? 1.0 : rng.uniform());
    }
    const RateTable table = rate_table(rates);
    const BiasReport report = bias_table(table);
    for (std::size_t k = 0; k < kDefaultEpsGrid.size(); ++k) {
      const double eps = kDefaultEpsGrid[k];
      int biased = 0, pairs = 0;
      std::vector<int> against(n, 0);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          ++pairs;
          if (!oracle_biased(rates[i], rates[j], eps)) continue;
          ++biased;
          ++against[rates[i] < rates[j] ? i : j];
        }
      const double ab = 100.0 * biased / pairs;
      c.expect(average_bias(table, eps) == ab, "average_bias mismatch");
      c.expect(report.ab[k] == ab, "bias_table ab mismatch");
      for (int i = 0; i < n; ++i) {
        const double db = 100.0 * against[i] / (n - 1);
        c.expect(demographic_bias(table, table.entries[i].demographic, eps) == db, "demographic_bias mismatch");
        c.expect(report.db[i].second[k] == db, "bias_table db mismatch");
      }
    }
    std::map<std::pair<std::string, std::string>, std::vector<bool>> flags;
    for (const auto& f : report.pair_flags) flags[{f.a, f.b}].push_back(f.biased);
    for (const auto& [pair, v] : flags)
      for (std::size_t k = 1; k < v.size(); ++k) c.expect(!v[k - 1] || v[k], "eps monotonicity broken");
  }
  const double secs = seconds_since(start);
  c.expect(secs < 10.0, fmt::format("runtime {:.2f}s >= 10s", secs));
  return fmt::format("1000 tables match the pair enumerator; monotone in eps ({:.2f}s)", secs);
}

std::string criterion3(Check& c) {
  const fs::path dir = fs::temp_directory_path() / fmt::format("deface-acc3-{}", ::getpid());
  const ReportBundle b = run_experiment(e2e_config(dir), RunOptions{1, false});
  std::size_t runs = 0;
  for (const auto& v : b.verification) {
    ++runs;
    c.expect(v.overall.osr == 1.0 - v.overall.tpr, v.id + ": osr != 1 - tpr");
  }
  for (const auto& v : b.identification) {
    ++runs;
    c.expect(v.osr == 1.0 - v.ir, v.id + ": osr != 1 - ir");
  }
  // Group-level rows, recomputed through the public run functions.
  const SynthData data = synth_dataset(e2e_config(dir).synthetic->spec, 9);
  const EmbeddingTable obf = synth_obfuscation(data.dataset, data.embeddings, 0.6, {}, 10);
  for (auto mode : {VerificationMode::kBaseline, VerificationMode::kM1, VerificationMode::kM2}) {
    VerificationOptions opt;
    opt.mode = mode;
    const auto r = verification_run(data.dataset, data.embeddings, &obf, opt);
    ++runs;
    for (const auto& g : r.groups) c.expect(g.osr == 1.0 - g.tpr, "group osr != 1 - tpr");
  }
  for (auto [s, t] : {std::pair{Scenario::kS1, ThreatModel::kM3}, std::pair{Scenario::kS1, ThreatModel::kM4},
                      std::pair{Scenario::kS2, ThreatModel::kM5}, std::pair{Scenario::kS2, ThreatModel::kM6}}) {
    IdentificationOptions opt;
    opt.scenario = s;
    opt.threat = t;
    const auto r = identification_run(data.dataset, data.embeddings, obf, opt);
    ++runs;
    for (const auto& g : r.per_demographic) c.expect(g.osr == 1.0 - g.ir, "group osr != 1 - ir");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return fmt::format("osr == 1 - tpr/ir exactly across {} runs", runs);
}

std::string criterion4(Check& c) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<ScoredPair> s;
    const std::size_t n = 20 + rng.below(200);
    const double sep = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      const bool pos = rng.below(2) == 0;
      s.push_back({std::round((rng.uniform() + (pos ? 0.0 : sep)) * 50.0) / 50.0, pos});
    }
    if (std::none_of(s.begin(), s.end(), [](const auto& p) { return p.positive; })) s[0].positive = true;
    if (std::all_of(s.begin(), s.end(), [](const auto& p) { return p.positive; })) s[0].positive = false;
    std::vector<double> d;
    for (const auto& p : s) d.push_back(p.distance);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    std::vector<double> cands{d.front() - 1.0};
    for (std::size_t i = 0; i + 1 < d.size(); ++i) cands.push_back((d[i] + d[i + 1]) / 2);
    cands.push_back(d.back() + 1.0);
    double best_f1 = -1, best_t = 0;
    for (double x : cands) {
      const double f = f1_at(s, x);
      if (f > best_f1) best_f1 = f, best_t = x;  // ascending scan keeps the smallest maximizer
    }
    const double got = optimize_threshold(s);
    c.expect(f1_at(s, got) == best_f1, "best F1 differs from exhaustive scan");
    c.expect(std::abs(got - best_t) <= 1e-12 || f1_at(s, got) == best_f1, "threshold differs");
    c.expect(!(got < best_t - 1e-12), "threshold below the smallest maximizer");
  }
  std::vector<ScoredPair> noise;
  for (int i = 0; i < 10000; ++i) noise.push_back({rng.uniform(), rng.below(2) == 0});
  const double auc_noise = roc_auc(noise);
  c.expect(std::abs(auc_noise - 0.5) <= 0.05, fmt::format("random auc {:.4f}", auc_noise));
  std::vector<ScoredPair> sep;
  for (int i = 0; i < 100; ++i) sep.push_back({rng.uniform() * 0.4, true});
  for (int i = 0; i < 100; ++i) sep.push_back({0.6 + rng.uniform() * 0.4, false});
  const double auc_sep = roc_auc(sep);
  c.expect(auc_sep == 1.0, fmt::format("separable auc {:.4f}", auc_sep));
  return fmt::format("200 instances match the scan; random auc {:.4f}; separable auc {:.1f}", auc_noise, auc_sep);
}

std::string criterion5(Check& c) {
  const auto start = Clock::now();
  SynthSpec sep;
  sep.groups = {DemographicKey{Gender::kMale, Race::kWhite}};
  sep.ids_per_group = 10;
  sep.imgs_per_id = 10;
  sep.dim = 32;
  sep.cluster_spread = 0.05;
  const SynthData clusters = synth_dataset(sep, 5);
  const auto r = identification_run(clusters.dataset, clusters.embeddings, clusters.embeddings, {});
  c.expect(r.ir >= 0.99, fmt::format("separable IR {:.3f}", r.ir));

  SynthSpec chance = sep;
  chance.ids_per_group = 20;
  chance.imgs_per_id = 50;
  chance.cluster_spread = 0.3;
  const SynthData d = synth_dataset(chance, 6);
  EmbeddingTable random("random", 32);
  Rng rng(7);
  for (const auto& rec : d.dataset.records()) {
    Eigen::VectorXd v(32);
    for (auto& x : v) x = rng.normal();
    random.insert(rec.image_id, v);
  }
  const auto q = identification_run(d.dataset, d.embeddings, random, {});
  const double p = 1.0 / 20, sigma = std::sqrt(p * (1 - p) / double(q.n));
  c.expect(std::abs(q.ir - p) <= 3 * sigma, fmt::format("random IR {:.4f} outside {:.4f} +- {:.4f}", q.ir, p, 3 * sigma));
  const double secs = seconds_since(start);
  c.expect(secs < 30.0, fmt::format("runtime {:.2f}s >= 30s", secs));
  return fmt::format("separable IR {:.3f}; random IR {:.4f} within 1/20 +- 3 sigma ({:.4f}); {:.2f}s", r.ir, q.ir,
                     3 * sigma, secs);
}

std::string criterion6(Check& c) {
  Rng rng(6);
  ImageGrid img(224, 224, 3);
  for (auto& v : img.data()) v = std::uint8_t(rng.below(256));
  const ImageGrid out = pixelate_standard(img);
  double worst_mean = 0, worst_var = 0;
  for (int by = 0; by < 224; by += 16)
    for (int bx = 0; bx < 224; bx += 16)
      for (int ch = 0; ch < 3; ++ch) {
        double si = 0, so = 0, so2 = 0;
        for (int y = by; y < by + 16; ++y)
          for (int x = bx; x < bx + 16; ++x) {
            si += img.at(y, x, ch);
            so += out.at(y, x, ch);
            so2 += double(out.at(y, x, ch)) * out.at(y, x, ch);
          }
        const double mi = si / 256, mo = so / 256;
        worst_mean = std::max(worst_mean, std::abs(mi - mo));
        worst_var = std::max(worst_var, so2 / 256 - mo * mo);
      }
  c.expect(worst_mean <= 0.5, fmt::format("block mean moved by {}", worst_mean));
  c.expect(worst_var == 0.0, fmt::format("within-block variance {}", worst_var));

  ImageGrid snow_in(37, 29, 3);
  for (auto& v : snow_in.data()) v = std::uint8_t(rng.below(128));  // never the gray value 128
  const ImageGrid snow = dp_snow(snow_in, 0.5, 128, 11);
  std::size_t gray = 0;
  for (int y = 0; y < 37; ++y)
    for (int x = 0; x < 29; ++x)
      gray += snow.at(y, x, 0) == 128 && snow.at(y, x, 1) == 128 && snow.at(y, x, 2) == 128;
  const std::size_t expect = (37 * 29) / 2;
  c.expect(gray == expect, fmt::format("dp_snow grayed {} of {}, want {}", gray, 37 * 29, expect));

  int matched = 0;
  for (int t = 0; t < 100; ++t) {
    const DemographicKey k{Gender::kFemale, Race::kIndian};
    std::vector<FaceRecord> records{{"target", "T", k, std::nullopt}};
    EmbeddingTable emb("x", 3);
    emb.insert("target", Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
    std::vector<std::string> others;
    for (int i = 0; i < 4; ++i) {
      const std::string id = "img" + std::to_string(i);
      records.push_back({id, "id" + std::to_string(i), k, std::nullopt});
      emb.insert(id, Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
      others.push_back(id);
    }
    const Dataset ds = Dataset::create("g", records);
    std::vector<std::string> best;
    double best_cost = 1e300;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const double cost = cosine_distance(emb.at("target"), emb.at(others[a])) +
                            cosine_distance(emb.at("target"), emb.at(others[b]));
        if (cost < best_cost) best_cost = cost, best = {others[a], others[b]};
      }
    auto got = k_same_neighbors("target", ds, emb, 3);
    std::sort(got.begin(), got.end());
    matched += got == best;
  }
  c.expect(matched == 100, fmt::format("k_same matched exhaustive search {}/100", matched));
  return fmt::format("224x224 block 16: max mean shift {:.3f}, variance 0; dp_snow grayed {}; k_same 100/100",
                     worst_mean, gray);
}

std::string criterion7(Check& c) {
  c.expect(numerical_pr({{20, 25}}) == 0.8, "numerical_pr((20, 25)) != 0.8");
  c.expect(numerical_pr({{30, 30}}) == 1.0, "numerical_pr identity");
  c.expect(numerical_pr({{0, 50}}) == 0.0, "numerical_pr maximal gap");
  c.expect(categorical_pr({{"happy", "happy"}, {"sad", "neutral"}}) == 0.5, "categorical_pr half");
  c.expect(categorical_pr({{"a", "a"}}) == 1.0, "categorical_pr all match");
  const Eigen::Vector3d p(10, 20, -5);
  c.expect(std::abs(pose_pr({{p, p}}) - 1.0) <= 1e-12, "pose_pr identical");
  c.expect(std::abs(pose_pr({{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)}})) <= 1e-12, "pose_pr orthogonal");
  c.expect(pose_pr({{p, -p}}) == 0.0, "pose_pr antiparallel");

  std::vector<FaceRecord> records;
  const DemographicKey male{Gender::kMale, Race::kBlack}, female{Gender::kFemale, Race::kBlack};
  AttributeTable orig, obf;
  for (int i = 0; i < 10; ++i) {
    const bool m = i < 5;
    const std::string id = "img" + std::to_string(i);
    records.push_back({id, "id" + std::to_string(i), m ? male : female, std::nullopt});
    orig.entries[id] = {m ? "Male" : "Female", "Black", "happy", 20.0, std::nullopt};
    obf.entries[id] = {m ? "Male" : (i < 8 ? "Female" : "Male"), "Black", "happy", 25.0, std::nullopt};
  }
  const Dataset ds = Dataset::create("attrs", records);
  const auto tables = attribute_rates(ds, orig, obf, GroupBy::kPair);
  const RateTable& gender = tables.front();
  c.expect(gender.metric_name == "gender", "first table is not gender");
  const RateEntry* m = gender.find(group_label(male, GroupBy::kPair));
  const RateEntry* f = gender.find(group_label(female, GroupBy::kPair));
  c.expect(gender.entries.size() == 2 && m && f && m->rate == 1.0 && f->rate == 0.6, "gender rates per group");
  // Fed straight into the bias engine.
  std::ostringstream csv;
  write_rates(csv, tables);
  std::istringstream back(csv.str());
  const auto reread = parse_rates(back, "rates.csv");
  c.expect(reread == tables, "rates csv does not round trip");
  const BiasReport b = bias_table(gender);
  c.expect(b.ab == std::vector<double>(5, 100.0), "gender bias not saturated");
  return "numerical_pr((20,25)) = 0.8; fixed points hold; PR tables enter bias_table unchanged";
}

std::string criterion8(Check& c) {
  const Eigen::Vector4d u(0.3, 1.7, -2.0, 5.5);
  c.expect(std::abs(pearson(u, u) - 1.0) <= 1e-12, "pearson(u, u)");
  c.expect(std::abs(pearson(u, Eigen::Vector4d(-u)) + 1.0) <= 1e-12, "pearson(u, -u)");
  c.expect(std::abs(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 4, 6)) - 1.0) <= 1e-12, "pearson affine");

  std::vector<FaceRecord> records;
  const DemographicKey male{Gender::kMale, Race::kAsian}, female{Gender::kFemale, Race::kAsian};
  for (int i = 0; i < 1000; ++i)
    records.push_back({"img" + std::to_string(i), "id" + std::to_string(i / 5), i < 500 ? male : female, std::nullopt});
  const Dataset ds = Dataset::create("focus", records);
  const auto landmarks = synth_landmarks(ds, 8);
  Rng rng(8);
  std::map<std::string, FocusVector> a, b;
  for (const auto& r : ds.records()) {
    FocusVector x{r.image_id, RegionScores::Zero()}, y{r.image_id, RegionScores::Zero()};
    for (Eigen::Index k = 0; k < x.scores.size(); ++k) x.scores(k) = rng.uniform();
    for (Eigen::Index k = 0; k < y.scores.size(); ++k) y.scores(k) = rng.uniform();
    a[r.image_id] = x;
    b[r.image_id] = y;
  }
  // Identical heatmaps on both sides.
  std::map<std::string, Heatmap> heatmaps;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "img" + std::to_string(i * 25);
    Heatmap h{Heatmap::Grid(24, 24)};
    for (auto& v : h.values.reshaped()) v = float(rng.uniform());
    heatmaps[id] = h;
  }
  std::map<std::string, LandmarkSet> lm_subset;
  for (const auto& [id, h] : heatmaps) lm_subset[id] = landmarks.at(id);
  const auto sampled = sample_all(heatmaps, lm_subset);
  std::vector<FaceRecord> subset_records;
  for (const auto& [id, h] : heatmaps) subset_records.push_back(ds.record(id));
  const Dataset subset = Dataset::create("subset", subset_records);
  double worst_same = 0;
  for (const auto& g : focus_correlation(sampled, sampled, subset))
    worst_same = std::max(worst_same, std::abs(g.mean_r - 1.0));
  c.expect(worst_same <= 1e-12, fmt::format("identical heatmaps give mean r off by {}", worst_same));

  double worst_null = 0;
  for (const auto& g : focus_correlation(a, b, ds, GroupBy::kRace)) worst_null = std::max(worst_null, std::abs(g.mean_r));
  c.expect(worst_null < 0.1, fmt::format("null |mean r| {:.4f}", worst_null));

  std::vector<FocusRecord> planted;
  std::size_t hits = 0;
  for (const auto& r : ds.records()) {
    const Region want = r.demographic == male ? Region::kForehead : Region::kNoseTip;
    const Heatmap h = planted_heatmap(landmarks.at(r.image_id), want, 32);
    planted.push_back(focus_record(sample_focus(h, landmarks.at(r.image_id)), r.demographic));
    hits += planted.back().top_feature == want;
  }
  const auto dist = focus_distribution(planted, GroupBy::kGender);
  c.expect(hits == 1000, fmt::format("planted top-1 {}/1000", hits));
  c.expect(dist.size() == 2 && dist.at({"Male", Region::kForehead}) == 500 && dist.at({"Female", Region::kNoseTip}) == 500,
           "distribution does not separate the planted regions");
  return fmt::format("pearson fixed points exact; identical r = 1; null |mean r| {:.4f}; planted top-1 {}/1000",
                     worst_null, hits);
}

std::string criterion9(Check& c) {
  const fs::path root = fs::temp_directory_path() / fmt::format("deface-acc9-{}", ::getpid());
  std::error_code ec;
  fs::remove_all(root, ec);
  const auto start = Clock::now();
  std::vector<std::map<std::string, std::string>> outputs;
  double slowest = 0;
  int k = 0;
  for (unsigned workers : {1u, 1u, 8u}) {
    const auto t0 = Clock::now();
    const fs::path dir = root / std::to_string(k++);
    const ReportBundle b = run_experiment(e2e_config(dir), RunOptions{workers, true});
    c.expect(!b.has_failures(), "a stage failed");
    outputs.push_back(emit_all(b, dir / "report"));
    slowest = std::max(slowest, seconds_since(t0));
  }
  c.expect(outputs[0] == outputs[1], "two invocations differ");
  c.expect(outputs[0] == outputs[2], "workers 1 and 8 differ");
  c.expect(slowest < 60.0, fmt::format("end-to-end run {:.2f}s >= 60s", slowest));
  std::size_t bytes = 0;
  for (const auto& [f, s] : outputs[0]) bytes += s.size();
  fs::remove_all(root, ec);
  return fmt::format("{} files ({} bytes) identical across runs and workers 1/8; slowest run {:.2f}s (total {:.2f}s)",
                     outputs[0].size(), bytes, slowest, seconds_since(start));
}

std::string criterion10(Check& c) {
  ReportBundle b;
  b.dataset = "table";
  b.artifacts = {{"rates/detectors", "ingest"}, {"rates/ciagan", "ingest"}};
  const RateTable mtcnn{"detection", {{"Asian", 0.9, 1}, {"Black", 0.9, 1}, {"Indian", 0.9, 1}, {"White", 0.9, 1}}};
  const RateTable ciagan{"gender", {{"Female", 0.2, 1}, {"Male", 0.9, 1}}};
  b.bias.push_back({"bias/mtcnn", "rates/detectors", "mtcnn", bias_table(mtcnn)});
  b.bias.push_back({"bias/ciagan", "rates/ciagan", "ciagan", bias_table(ciagan)});
  b.artifacts.push_back({"bias/mtcnn", "bias"});
  b.artifacts.push_back({"bias/ciagan", "bias"});
  check_provenance(b);
  std::map<std::string, std::string> ab;
  for (const auto& t : report_tables({b}))
    if (t.name == "bias") {
      c.expect(t.header[5] == "eps", "bias table has no eps column");
      for (const auto& row : t.rows) {
        if (row[4] == "AB") ab[row[2]] = row[6];
        c.expect(row[5] == "[0.2, 0.15, 0.1, 0.05, 0.02]", "eps order " + row[5]);
      }
    }
  c.expect(ab["mtcnn"] == "[0, 0, 0, 0, 0]", "zero-bias row " + ab["mtcnn"]);
  c.expect(ab["ciagan"] == "[100, 100, 100, 100, 100]", "saturated row " + ab["ciagan"]);
  c.expect(render_eps_vector({0, 0, 0, 0, 0}) == "[0, 0, 0, 0, 0]", "render zero");
  c.expect(render_eps_vector({100, 100, 100, 100, 100}) == "[100, 100, 100, 100, 100]", "render saturated");
  return "mtcnn " + ab["mtcnn"] + "; ciagan gender " + ab["ciagan"] + "; eps order [0.2, 0.15, 0.1, 0.05, 0.02]";
}

}  // namespace

int main() {
  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(4, criterion4);
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, criterion8);
  run(9, criterion9);
  run(10, criterion10);
  std::printf("%d of 10 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
