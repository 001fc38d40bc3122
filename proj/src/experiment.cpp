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

#include "deface/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "deface/attributes.hpp"
#include "deface/csv.hpp"
#include "deface/error.hpp"
#include "deface/focus.hpp"
#include "deface/parallel.hpp"
#include "deface/pixel_obfuscators.hpp"
#include "deface/random.hpp"

namespace deface {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 6> kStageNames = {"obfuscate", "ingest", "attacks",
                                                         "metrics",   "bias",   "focus"};

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view text) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == text) return static_cast<Stage>(i);
  return std::nullopt;
}

const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names = {"baseline", "m1", "m2", "m3", "m4", "m5", "m6"};
  return names;
}

// ---- config ----------------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

std::optional<DemographicKey> parse_group_label(std::string_view label) {
  const auto space = label.find(' ');
  if (space == std::string_view::npos) {
    auto g = parse_gender(label);
    if (!g) return std::nullopt;
    return DemographicKey{*g, Race::kUnspecified};
  }
  auto r = parse_race(label.substr(0, space));
  auto g = parse_gender(label.substr(space + 1));
  if (!r || !g || *r == Race::kUnspecified) return std::nullopt;
  return DemographicKey{*g, *r};
}

std::map<DemographicKey, double> read_noise(const ConfigDocument& doc, const std::string& section) {
  std::map<DemographicKey, double> out;
  if (!doc.has_section(section)) return out;
  for (const auto& key : doc.keys(section)) {
    auto g = parse_group_label(key);
    if (!g) invalid(section + ": unknown group '" + key + "'");
    const double v = *doc.get_double(section, key);
    if (!(v > 0.0) || !std::isfinite(v)) invalid(section + "." + key + " must be positive");
    out[*g] = v;
  }
  return out;
}

class PathReader {
 public:
  PathReader(const ConfigDocument& doc, fs::path base) : doc_(doc), base_(std::move(base)) {}

  std::optional<fs::path> get(const std::string& section, const std::string& key, bool directory = false) const {
    auto s = doc_.get_string(section, key);
    if (!s) return std::nullopt;
    fs::path p(*s);
    if (p.is_relative()) p = base_ / p;
    p = p.lexically_normal();
    std::error_code ec;
    const bool ok = directory ? fs::is_directory(p, ec) : fs::is_regular_file(p, ec);
    if (!ok) invalid(section + "." + key + ": " + (directory ? "no directory " : "no file ") + p.string());
    return p;
  }

  fs::path output(const std::string& section, const std::string& key, const fs::path& fallback) const {
    auto s = doc_.get_string(section, key);
    fs::path p = s ? fs::path(*s) : fallback;
    if (p.is_relative()) p = base_ / p;
    return p.lexically_normal();
  }

 private:
  const ConfigDocument& doc_;
  fs::path base_;
};

double read_unit(const ConfigDocument& doc, const std::string& section, const std::string& key, double fallback) {
  const double v = doc.get_double(section, key).value_or(fallback);
  if (!(v >= 0.0 && v <= 1.0)) invalid(section + "." + key + " must lie in [0, 1]");
  return v;
}

int read_int(const ConfigDocument& doc, const std::string& section, const std::string& key, int fallback,
             int lo, int hi) {
  const std::int64_t v = doc.get_int(section, key).value_or(fallback);
  if (v < lo || v > hi) invalid(section + "." + key + " must lie in [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  return int(v);
}

}  // namespace

ExperimentConfig parse_experiment(const ConfigDocument& doc, const fs::path& base_dir) {
  ExperimentConfig cfg;
  const PathReader paths(doc, base_dir);

  const auto version = doc.get_int("", "version");
  if (!version) invalid(doc.source() + ": missing top-level 'version'");
  if (*version != 1) invalid(doc.source() + ": unsupported config version " + std::to_string(*version));
  cfg.version = 1;

  for (const auto& s : doc.sections()) {
    if (s.empty() || s == "experiment" || s == "synthetic" || s == "synthetic.noise" || s == "dataset" ||
        s == "attacks" || s == "fairness")
      continue;
    if (s.rfind("method.", 0) == 0) continue;
    invalid(doc.source() + ": unknown section [" + s + "]");
  }

  cfg.name = doc.get_string("experiment", "name").value_or(cfg.name);
  cfg.output_dir = paths.output("experiment", "output", "out");
  if (auto seed = doc.get_int("experiment", "seed")) {
    if (*seed < 0) invalid("experiment.seed must be >= 0");
    cfg.seed = std::uint64_t(*seed);
  }
  if (auto stages = doc.get_strings("experiment", "stages")) {
    for (const auto& s : *stages) {
      auto st = parse_stage(s);
      if (!st) invalid("experiment.stages: unknown stage '" + s + "'");
      cfg.stages.insert(*st);
    }
  } else {
    for (std::size_t i = 0; i < kStageNames.size(); ++i) cfg.stages.insert(static_cast<Stage>(i));
  }

  if (doc.has_section("synthetic")) {
    SynthConfig sc;
    sc.spec.name = doc.get_string("synthetic", "name").value_or("synthetic");
    if (auto groups = doc.get_strings("synthetic", "groups")) {
      sc.spec.groups.clear();
      for (const auto& g : *groups) {
        auto key = parse_group_label(g);
        if (!key) invalid("synthetic.groups: unknown group '" + g + "'");
        sc.spec.groups.push_back(*key);
      }
    }
    sc.spec.ids_per_group = read_int(doc, "synthetic", "ids_per_group", 20, 2, 100000);
    sc.spec.imgs_per_id = read_int(doc, "synthetic", "imgs_per_id", 5, 2, 10000);
    sc.spec.dim = read_int(doc, "synthetic", "dim", 32, 2, 65536);
    sc.spec.cluster_spread = doc.get_double("synthetic", "cluster_spread").value_or(0.5);
    if (!(sc.spec.cluster_spread >= 0.0)) invalid("synthetic.cluster_spread must be >= 0");
    sc.spec.demographic_noise_scale = read_noise(doc, "synthetic.noise");
    sc.attributes = doc.get_bool("synthetic", "attributes").value_or(true);
    sc.focus = doc.get_bool("synthetic", "focus").value_or(true);
    sc.heatmap_side = read_int(doc, "synthetic", "heatmap_side", 32, 2, 4096);
    cfg.synthetic = std::move(sc);
  }

  cfg.manifest = paths.get("dataset", "manifest");
  cfg.embeddings = paths.get("dataset", "embeddings");
  cfg.attributes = paths.get("dataset", "attributes");
  cfg.landmarks = paths.get("dataset", "landmarks");

  if (auto list = doc.get_strings("attacks", "list")) {
    for (const auto& a : *list) {
      if (std::find(attack_names().begin(), attack_names().end(), a) == attack_names().end())
        invalid("attacks.list: unknown attack '" + a + "'");
      if (std::find(cfg.attacks.begin(), cfg.attacks.end(), a) == cfg.attacks.end()) cfg.attacks.push_back(a);
    }
  } else {
    cfg.attacks = attack_names();
  }
  cfg.negatives_per_positive = read_int(doc, "attacks", "negatives_per_positive", 1, 1, 1000);
  cfg.fpr_target = doc.get_double("attacks", "fpr_target").value_or(0.1);
  if (!(cfg.fpr_target > 0.0 && cfg.fpr_target < 1.0)) invalid("attacks.fpr_target must lie in (0, 1)");
  cfg.svm.lambda = doc.get_double("attacks", "svm_lambda").value_or(1e-4);
  if (!(cfg.svm.lambda > 0.0) || !std::isfinite(cfg.svm.lambda)) invalid("attacks.svm_lambda must be positive");
  cfg.svm.epochs = read_int(doc, "attacks", "svm_epochs", 50, 1, 100000);
  cfg.train_fraction = doc.get_double("attacks", "train_fraction").value_or(0.8);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) invalid("attacks.train_fraction must lie in (0, 1)");

  for (const auto& s : doc.sections()) {
    if (s.rfind("method.", 0) != 0) continue;
    std::string rest = s.substr(7);
    if (rest.size() > 6 && rest.compare(rest.size() - 6, 6, ".noise") == 0) continue;
    if (rest.empty() || rest.find('.') != std::string::npos) invalid("bad method section [" + s + "]");
    MethodConfig m;
    m.name = rest;
    if (auto kind = doc.get_string(s, "kind")) {
      if (*kind != "pixelate" && *kind != "dpsnow" && *kind != "ksame")
        invalid(s + ".kind must be pixelate, dpsnow or ksame");
      m.kind = *kind;
    }
    m.block = read_int(doc, s, "block", 0, 0, 1 << 20);
    m.delta = read_unit(doc, s, "delta", 0.5);
    m.gray = read_int(doc, s, "gray", kDefaultGray, 0, 255);
    m.k = read_int(doc, s, "k", kDefaultK, 1, 1 << 20);
    m.produced = paths.get(s, "produced");
    m.embeddings = paths.get(s, "embeddings");
    m.detections = paths.get(s, "detections");
    m.attributes = paths.get(s, "attributes");
    m.confidences = paths.get(s, "confidences");
    m.heatmaps = paths.get(s, "heatmaps", true);
    m.compare_heatmaps = paths.get(s, "compare_heatmaps", true);
    m.synth.strength = doc.get_double(s, "strength").value_or(0.5);
    if (!(m.synth.strength >= 0.0) || !std::isfinite(m.synth.strength)) invalid(s + ".strength must be >= 0");
    m.synth.noise_scale = read_noise(doc, s + ".noise");
    m.synth.fail_rate = read_unit(doc, s, "fail_rate", 0.0);
    m.synth.detect_rate = read_unit(doc, s, "detect_rate", 1.0);
    m.synth.attr_flip = read_unit(doc, s, "attr_flip", 0.1);
    m.synth.focus_overlap = read_unit(doc, s, "focus_overlap", 0.5);
    cfg.methods.push_back(std::move(m));
  }
  for (const auto& s : doc.sections()) {
    if (s.rfind("method.", 0) == 0 && s.size() > 6 && s.compare(s.size() - 6, 6, ".noise") == 0) {
      const std::string owner = s.substr(0, s.size() - 6);
      if (!doc.has_section(owner)) invalid("[" + s + "] has no [" + owner + "]");
    }
  }

  if (auto eps = doc.get_doubles("fairness", "eps")) cfg.eps_grid = *eps;
  if (auto by = doc.get_string("fairness", "group_by")) {
    auto g = parse_group_by(*by);
    if (!g) invalid("fairness.group_by must be pairs, race or gender");
    cfg.group_by = *g;
  }
  if (auto rates = doc.get_strings("fairness", "rates")) {
    for (const auto& r : *rates) {
      fs::path p(r);
      if (p.is_relative()) p = base_dir / p;
      p = p.lexically_normal();
      std::error_code ec;
      if (!fs::is_regular_file(p, ec)) invalid("fairness.rates: no file " + p.string());
      cfg.rate_files.push_back(p);
    }
  }

  const auto unused = doc.unused();
  if (!unused.empty()) invalid(doc.source() + ": unknown key '" + unused.front() + "'");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment(const fs::path& path) {
  const ConfigDocument doc = ConfigDocument::load(path);
  return parse_experiment(doc, path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.version != 1) invalid("unsupported config version");
  try {
    check_eps_grid(cfg.eps_grid);
  } catch (const InvalidArgument& e) {
    invalid(std::string("fairness.eps: ") + e.what());
  }
  if (cfg.synthetic && cfg.manifest) invalid("use either [synthetic] or dataset.manifest, not both");
  const bool needs_dataset = !cfg.methods.empty() || (cfg.stages.count(Stage::kAttacks) && !cfg.attacks.empty() &&
                                                      (cfg.synthetic || cfg.manifest));
  if (needs_dataset && !cfg.synthetic && !cfg.manifest) invalid("methods need a dataset: add [synthetic] or dataset.manifest");
  if (!cfg.synthetic && !cfg.manifest && cfg.rate_files.empty()) invalid("nothing to do: no dataset and no fairness.rates");
  if (cfg.synthetic) {
    if (cfg.synthetic->spec.groups.empty()) invalid("synthetic.groups is empty");
    const bool paired = cfg.synthetic->spec.groups.front().paired();
    for (const auto& g : cfg.synthetic->spec.groups)
      if (g.paired() != paired) invalid("synthetic.groups mixes gender-only and gender-race groups");
    if (cfg.group_by == GroupBy::kRace && !paired) invalid("fairness.group_by = race needs gender-race groups");
  }
  std::set<std::string> names;
  for (const auto& m : cfg.methods) {
    if (!names.insert(m.name).second) invalid("duplicate method " + m.name);
    if (m.kind == "ksame" && !cfg.embeddings) invalid("method." + m.name + ": ksame needs dataset.embeddings");
    if (m.kind && cfg.synthetic) invalid("method." + m.name + ": pixel obfuscators need a manifest with images");
    if (m.kind && m.produced) invalid("method." + m.name + ": kind and produced are exclusive");
    if (m.compare_heatmaps && !m.heatmaps) invalid("method." + m.name + ": compare_heatmaps needs heatmaps");
    if (m.heatmaps && !cfg.synthetic && !cfg.landmarks) invalid("method." + m.name + ": heatmaps need dataset.landmarks");
  }
}

// ---- synthetic focus inputs ------------------------------------------------

std::map<std::string, LandmarkSet> synth_landmarks(const Dataset& dataset, std::uint64_t seed) {
  std::map<std::string, LandmarkSet> out;
  for (const auto& r : dataset.records()) {
    Rng rng(derive_seed(seed, r.image_id));
    LandmarkSet lm{r.image_id, Eigen::Matrix<double, Eigen::Dynamic, 2>(kNumLandmarks, 2)};
    for (Eigen::Index i = 0; i < lm.points.rows(); ++i) {
      lm.points(i, 0) = rng.uniform();
      lm.points(i, 1) = rng.uniform();
    }
    out.emplace(r.image_id, std::move(lm));
  }
  return out;
}

Heatmap planted_heatmap(const LandmarkSet& landmarks, Region region, int side, const RegionMap& map) {
  if (side < 2) throw InvalidArgument("heatmap side must be >= 2");
  std::vector<Eigen::Vector2d> peaks;
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    if (map.region_of(i) == region) {
      const auto row = Eigen::Index(i);
      peaks.emplace_back(landmarks.points(row, 0) * (side - 1), landmarks.points(row, 1) * (side - 1));
    }
  }
  Heatmap hm{Heatmap::Grid(side, side)};
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : peaks) best = std::min(best, (p - Eigen::Vector2d(x, y)).squaredNorm());
      hm.values(y, x) = float(std::exp(-0.5 * best));
    }
  }
  return hm;
}

// ---- runner ----------------------------------------------------------------

namespace {

struct MethodState {
  const MethodConfig* cfg = nullptr;
  std::optional<ObfuscationRun> run;
  std::optional<EmbeddingTable> embeddings;
  std::optional<DetectionTable> detections;
  std::optional<AttributeTable> attributes;
  std::optional<std::vector<ConfidencePair>> confidences;
  std::optional<std::map<std::string, Heatmap>> heatmaps;
  std::optional<std::map<std::string, Heatmap>> compare;
  bool obfuscate_failed = false;
  bool ingest_failed = false;
  MethodRow row;
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {
    bundle_.name = cfg.name;
    bundle_.seed = cfg.seed;
  }

  ReportBundle run() {
    load_dataset();
    for (const auto& m : cfg_.methods) {
      MethodState st;
      st.cfg = &m;
      st.row.method = m.name;
      methods_.push_back(std::move(st));
    }
    if (wants(Stage::kObfuscate)) for (auto& m : methods_) obfuscate(m);
    if (wants(Stage::kIngest)) for (auto& m : methods_) ingest(m);
    if (wants(Stage::kAttacks)) attacks();
    if (wants(Stage::kMetrics)) for (auto& m : methods_) metrics(m);
    if (wants(Stage::kBias)) bias();
    if (wants(Stage::kFocus)) for (auto& m : methods_) focus(m);
    for (auto& m : methods_) {
      m.row.dataset = bundle_.dataset;
      if (!m.row.cells.empty()) bundle_.rows.push_back(std::move(m.row));
    }
    return std::move(bundle_);
  }

 private:
  bool wants(Stage s) const { return cfg_.stages.count(s) > 0; }

  void status(Stage stage, const std::string& target, const std::string& state, const std::string& message = {}) {
    bundle_.stages.push_back({std::string(to_string(stage)), target, state, message});
  }

  void artifact(const std::string& id, Stage stage) { bundle_.artifacts.push_back({id, std::string(to_string(stage))}); }

  /// Runs `fn`, recording ok or the failure message. Returns success.
  bool attempt(Stage stage, const std::string& target, const std::function<void()>& fn) {
    try {
      fn();
      status(stage, target, "ok");
      return true;
    } catch (const std::exception& e) {
      status(stage, target, "failed", e.what());
      return false;
    }
  }

  std::uint64_t seed_for(const std::string& tag) const { return derive_seed(cfg_.seed, tag); }

  void load_dataset() {
    if (cfg_.synthetic) {
      const auto& sc = *cfg_.synthetic;
      SynthData data = synth_dataset(sc.spec, seed_for("synthetic"));
      bundle_.dataset = data.dataset.name();
      dataset_ = std::move(data.dataset);
      original_ = std::move(data.embeddings);
      artifact("ingest/dataset", Stage::kIngest);
      artifact("ingest/original", Stage::kIngest);
      if (sc.focus) landmarks_ = synth_landmarks(*dataset_, seed_for("landmarks"));
      if (sc.attributes) original_attrs_ = synth_original_attributes();
      status(Stage::kIngest, "dataset", "ok");
      return;
    }
    if (!cfg_.manifest) return;
    dataset_failed_ = !attempt(Stage::kIngest, "dataset", [&] {
      dataset_ = load_manifest(*cfg_.manifest);
      bundle_.dataset = dataset_->name();
      artifact("ingest/dataset", Stage::kIngest);
      if (cfg_.embeddings) {
        original_ = load_embeddings(*cfg_.embeddings);
        artifact("ingest/original", Stage::kIngest);
      }
      if (cfg_.attributes) original_attrs_ = load_attributes(*cfg_.attributes);
      if (cfg_.landmarks) landmarks_ = load_landmarks(*cfg_.landmarks);
    });
  }

  bool need_dataset(Stage stage, const std::string& target) {
    if (dataset_) return true;
    status(stage, target, "skipped", "dataset unavailable");
    return false;
  }

  // -- obfuscate

  void obfuscate(MethodState& m) {
    const MethodConfig& mc = *m.cfg;
    if (!cfg_.synthetic && !mc.kind && !mc.produced) return;
    if (!need_dataset(Stage::kObfuscate, mc.name)) {
      m.obfuscate_failed = true;
      return;
    }
    m.obfuscate_failed = !attempt(Stage::kObfuscate, mc.name, [&] {
      if (cfg_.synthetic) {
        synth_obfuscate(m);
      } else if (mc.kind) {
        pixel_obfuscate(m);
      } else {
        const Dataset produced = load_manifest(*mc.produced);
        std::set<std::string> ids;
        for (const auto& r : produced.records()) ids.insert(r.image_id);
        m.run = make_run(*dataset_, mc.name, std::move(ids));
      }
      artifact("obfuscate/" + mc.name, Stage::kObfuscate);
    });
  }

  void synth_obfuscate(MethodState& m) {
    const MethodConfig& mc = *m.cfg;
    const std::uint64_t fail_seed = seed_for("fail/" + mc.name);
    std::set<std::string> produced;
    for (const auto& r : dataset_->records()) {
      Rng rng(derive_seed(fail_seed, r.image_id));
      if (!(rng.uniform() < mc.synth.fail_rate)) produced.insert(r.image_id);
    }
    m.run = make_run(*dataset_, mc.name, produced);
    const EmbeddingTable all = synth_obfuscation(*dataset_, *original_, mc.synth.strength, mc.synth.noise_scale,
                                                 seed_for("obfuscate/" + mc.name), mc.name);
    EmbeddingTable kept(mc.name, all.dim());
    for (const auto& id : produced) kept.insert(id, all.at(id));
    m.embeddings = std::move(kept);
  }

  void pixel_obfuscate(MethodState& m) {
    const MethodConfig& mc = *m.cfg;
    const fs::path base = cfg_.manifest->parent_path();
    const auto& records = dataset_->records();
    std::map<std::string, ImageGrid> grids;
    for (const auto& r : records) {
      if (!r.image_path) continue;
      try {
        fs::path p(*r.image_path);
        grids.emplace(r.image_id, load_grid(p.is_relative() ? base / p : p));
      } catch (const Error&) {
        // unreadable source counts as a failed output
      }
    }
    if (mc.kind == "ksame" && !original_) throw IntegrityError("ksame needs dataset embeddings");
    std::vector<std::optional<ImageGrid>> out(records.size());
    const PixelGallery gallery{&*dataset_, &grids};
    parallel_for(records.size(), opts_.workers, [&](std::size_t i) {
      const auto& id = records[i].image_id;
      auto it = grids.find(id);
      if (it == grids.end()) return;
      try {
        if (mc.kind == "pixelate") {
          out[i] = mc.block > 0 ? pixelate(it->second, mc.block) : pixelate_standard(it->second);
        } else if (mc.kind == "dpsnow") {
          out[i] = dp_snow(it->second, mc.delta, std::uint8_t(mc.gray),
                           derive_seed(seed_for("dpsnow/" + mc.name), id));
        } else {
          out[i] = k_same_pixel(id, gallery, *original_, mc.k);
        }
      } catch (const Error&) {
        out[i].reset();
      }
    });
    std::set<std::string> produced;
    std::vector<FaceRecord> written;
    const fs::path dir = cfg_.output_dir / "obfuscated" / mc.name;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!out[i]) continue;
      produced.insert(records[i].image_id);
      if (opts_.write_artifacts) {
        const fs::path file = dir / (records[i].image_id + ".raw");
        save_grid(file, *out[i]);
        FaceRecord rec = records[i];
        rec.image_path = file.filename().string();
        written.push_back(std::move(rec));
      }
    }
    if (opts_.write_artifacts && !written.empty())
      save_manifest(dir / "manifest.csv", Dataset::create(dataset_->name() + "-" + mc.name, written));
    m.run = make_run(*dataset_, mc.name, std::move(produced));
  }

  // -- ingest

  void ingest(MethodState& m) {
    const MethodConfig& mc = *m.cfg;
    if (!dataset_) {
      status(Stage::kIngest, mc.name, "skipped", "dataset unavailable");
      m.ingest_failed = true;
      return;
    }
    m.ingest_failed = !attempt(Stage::kIngest, mc.name, [&] {
      if (cfg_.synthetic) {
        synth_ingest(m);
      } else {
        if (mc.embeddings) m.embeddings = load_embeddings(*mc.embeddings, mc.name);
        if (mc.detections) {
          m.detections = load_detections(*mc.detections, mc.name);
          check_keys(*m.detections, *dataset_);
        }
        if (mc.attributes) m.attributes = load_attributes(*mc.attributes);
        if (mc.confidences) m.confidences = load_confidences(*mc.confidences);
        if (mc.heatmaps) m.heatmaps = load_heatmap_dir(*mc.heatmaps);
        if (mc.compare_heatmaps) m.compare = load_heatmap_dir(*mc.compare_heatmaps);
      }
      if (m.embeddings) artifact("ingest/" + mc.name, Stage::kIngest);
    });
  }

  void synth_ingest(MethodState& m) {
    const MethodConfig& mc = *m.cfg;
    if (!m.run) return;  // nothing was produced
    const auto& sc = *cfg_.synthetic;
    DetectionTable det{mc.name, {}};
    const std::uint64_t det_seed = seed_for("detect/" + mc.name);
    for (const auto& id : m.run->produced) {
      Rng rng(derive_seed(det_seed, id));
      det.entries[id] = rng.uniform() < mc.synth.detect_rate;
    }
    m.detections = std::move(det);
    if (original_attrs_) m.attributes = synth_obfuscated_attributes(mc, m.run->produced);
    if (sc.focus) {
      std::map<std::string, Heatmap> rec, obf;
      const std::uint64_t focus_seed = seed_for("focus/" + mc.name);
      for (const auto& id : m.run->produced) {
        const FaceRecord& r = dataset_->record(id);
        const LandmarkSet& lm = landmarks_->at(id);
        const Heatmap planted = planted_heatmap(lm, planted_region(r.demographic), sc.heatmap_side);
        Rng rng(derive_seed(focus_seed, id));
        const Region other = all_regions()[rng.below(kNumRegions)];
        const Heatmap noise = planted_heatmap(lm, other, sc.heatmap_side);
        const float a = float(mc.synth.focus_overlap);
        Heatmap mixed{(a * planted.values + (1.0f - a) * noise.values).cwiseMin(1.0f).cwiseMax(0.0f)};
        rec.emplace(id, planted);
        obf.emplace(id, std::move(mixed));
      }
      m.heatmaps = std::move(obf);
      m.compare = std::move(rec);
    }
  }

  /// Region where a group's recognition saliency is planted.
  Region planted_region(const DemographicKey& key) const {
    const auto labels = dataset_->group_labels(GroupBy::kPair);
    const std::string label = group_label(key, GroupBy::kPair);
    const auto idx = std::size_t(std::find(labels.begin(), labels.end(), label) - labels.begin());
    return all_regions()[(idx * 5) % kNumRegions];
  }

  AttributeTable synth_original_attributes() const {
    static const std::array<std::string_view, 7> emotions = {"angry", "disgust", "fear", "happy",
                                                             "sad",   "surprise", "neutral"};
    AttributeTable t;
    for (const auto& r : dataset_->records()) {
      Rng rng(derive_seed(seed_for("attributes"), r.image_id));
      AttributeRecord a;
      a.gender = std::string(to_string(r.demographic.gender));
      if (r.demographic.paired()) a.race = std::string(to_string(r.demographic.race));
      a.emotion = std::string(emotions[rng.below(emotions.size())]);
      a.age = 18.0 + 50.0 * rng.uniform();
      a.pose = Eigen::Vector3d(10.0 + 5.0 * rng.normal(), 5.0 * rng.normal(), 5.0 * rng.normal());
      t.entries.emplace(r.image_id, std::move(a));
    }
    return t;
  }

  AttributeTable synth_obfuscated_attributes(const MethodConfig& mc, const std::set<std::string>& produced) const {
    AttributeTable t;
    const std::uint64_t s = seed_for("attributes/" + mc.name);
    for (const auto& id : produced) {
      Rng rng(derive_seed(s, id));
      AttributeRecord a = original_attrs_->entries.at(id);
      const auto flip = [&](std::optional<std::string>& v) {
        if (v && rng.uniform() < mc.synth.attr_flip) *v = "other";
      };
      flip(a.gender);
      flip(a.race);
      flip(a.emotion);
      *a.age = std::max(0.0, *a.age * std::exp(0.2 * mc.synth.strength * rng.normal()));
      *a.pose += 10.0 * mc.synth.strength * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      t.entries.emplace(id, std::move(a));
    }
    return t;
  }

  // -- attacks

  void add_rates(const std::string& id, const std::string& method, RateTable table) {
    bundle_.rates.push_back({id, method, std::move(table)});
  }

  void attacks() {
    const bool any = !cfg_.attacks.empty() && (dataset_ || dataset_failed_);
    if (!any) return;
    if (!dataset_ || !original_) {
      status(Stage::kAttacks, "all", "skipped", dataset_ ? "no original embeddings" : "dataset unavailable");
      return;
    }
    const auto has = [&](const std::string& a) {
      return std::find(cfg_.attacks.begin(), cfg_.attacks.end(), a) != cfg_.attacks.end();
    };
    if (has("baseline")) {
      attempt(Stage::kAttacks, "original/baseline", [&] {
        const std::string id = "verify/original/baseline";
        VerificationReport r = verification_run(*dataset_, *original_, nullptr, verify_options(VerificationMode::kBaseline, "original"));
        artifact(id, Stage::kAttacks);
        bundle_.verification.push_back({id, "original", r.mode, r.overall});
        add_rates(id, "original", r.rate_table("tpr"));
      });
    }
    for (auto& m : methods_) {
      const std::string& name = m.cfg->name;
      for (const auto& attack : cfg_.attacks) {
        if (attack == "baseline") continue;
        const std::string target = name + "/" + attack;
        if (!m.embeddings) {
          status(Stage::kAttacks, target, "skipped",
                 m.ingest_failed || m.obfuscate_failed ? "upstream stage failed" : "no obfuscated embeddings");
          continue;
        }
        attempt(Stage::kAttacks, target, [&] {
          const bool verify = attack == "m1" || attack == "m2";
          const std::string id = (verify ? "verify/" : "identify/") + target;
          if (verify) {
            const auto mode = *parse_verification_mode(attack);
            VerificationReport r = verification_run(*dataset_, *original_, &*m.embeddings, verify_options(mode, name));
            artifact(id, Stage::kAttacks);
            bundle_.verification.push_back({id, name, mode, r.overall});
            add_rates(id, name, r.rate_table("osr"));
            m.row.cells["verify_" + attack] = {100.0 * r.overall.osr, id};
          } else {
            IdentificationOptions o;
            o.threat = *parse_threat(attack);
            o.scenario = (attack == "m3" || attack == "m4") ? Scenario::kS1 : Scenario::kS2;
            o.hyper = cfg_.svm;
            o.hyper.seed = seed_for("svm/" + target);
            o.train_fraction = cfg_.train_fraction;
            o.seed = seed_for("split/" + name);
            o.workers = opts_.workers;
            IdentificationReport r = identification_run(*dataset_, *original_, *m.embeddings, o);
            artifact(id, Stage::kAttacks);
            bundle_.identification.push_back({id, name, r.scenario, r.threat, r.n, r.correct, r.ir, r.osr});
            add_rates(id, name, r.rate_table("osr", cfg_.group_by));
            m.row.cells["identify_" + attack] = {100.0 * r.osr, id};
          }
        });
      }
      if (m.confidences) {
        attempt(Stage::kAttacks, name + "/confidence", [&] {
          const std::string id = "verify/" + name + "/confidence";
          auto tables = confidence_rates(*dataset_, *m.confidences, cfg_.group_by);
          artifact(id, Stage::kAttacks);
          for (auto& t : tables) add_rates(id, name, std::move(t));
        });
      }
    }
  }

  VerificationOptions verify_options(VerificationMode mode, const std::string& method) const {
    VerificationOptions o;
    o.mode = mode;
    o.negatives_per_positive = cfg_.negatives_per_positive;
    o.fpr_target = cfg_.fpr_target;
    o.seed = seed_for("pairs/" + method + "/" + std::string(to_string(mode)));
    o.workers = opts_.workers;
    o.group_by = cfg_.group_by;
    return o;
  }

  // -- metrics

  void metrics(MethodState& m) {
    const std::string& name = m.cfg->name;
    if (m.run) {
      attempt(Stage::kMetrics, name + "/passing", [&] {
        const std::string id = "metrics/" + name + "/passing";
        RateTable t = passing_rates(*dataset_, *m.run, cfg_.group_by);
        artifact(id, Stage::kMetrics);
        m.row.cells["passing"] = {100.0 * passing_rate(*m.run), id};
        add_rates(id, name, std::move(t));
      });
    }
    if (m.detections) {
      attempt(Stage::kMetrics, name + "/detection", [&] {
        const std::string id = "metrics/" + name + "/detection";
        RateTable t = detection_rates(*dataset_, *m.detections, cfg_.group_by);
        std::size_t found = 0;
        for (const auto& [img, ok] : m.detections->entries) found += ok;
        if (m.detections->entries.empty()) throw IntegrityError("no detection outcomes");
        artifact(id, Stage::kMetrics);
        m.row.cells["detection"] = {100.0 * double(found) / double(m.detections->entries.size()), id};
        add_rates(id, name, std::move(t));
      });
    }
    if (m.attributes) {
      if (!original_attrs_) {
        status(Stage::kMetrics, name + "/attributes", "skipped", "no original attributes");
        return;
      }
      attempt(Stage::kMetrics, name + "/attributes", [&] {
        const std::string id = "metrics/" + name + "/attributes";
        auto tables = attribute_rates(*dataset_, *original_attrs_, *m.attributes, cfg_.group_by);
        artifact(id, Stage::kMetrics);
        for (auto& t : tables) add_rates(id, name, std::move(t));
      });
    }
  }

  // -- bias

  void bias() {
    std::vector<SourcedRates> external;
    for (const auto& path : cfg_.rate_files) {
      attempt(Stage::kBias, path.filename().string(), [&] {
        const std::string id = "rates/" + path.filename().string();
        auto tables = load_rates(path);
        artifact(id, Stage::kIngest);
        for (auto& t : tables) external.push_back({id, path.stem().string(), std::move(t)});
      });
    }
    bundle_.rates.insert(bundle_.rates.end(), external.begin(), external.end());
    for (const auto& r : bundle_.rates) {
      const std::string id = "bias/" + r.id + "/" + r.table.metric_name;
      attempt(Stage::kBias, r.id + "/" + r.table.metric_name, [&] {
        BiasReport rep = bias_table(r.table, cfg_.eps_grid);
        artifact(id, Stage::kBias);
        bundle_.bias.push_back({id, r.id, r.method, std::move(rep)});
      });
    }
  }

  // -- focus

  void focus(MethodState& m) {
    if (!m.heatmaps) return;
    const std::string& name = m.cfg->name;
    if (!landmarks_) {
      status(Stage::kFocus, name, "skipped", "no landmarks");
      return;
    }
    attempt(Stage::kFocus, name + "/distribution", [&] {
      const std::string id = "focus/" + name + "/distribution";
      const auto vectors = sample_all(*m.heatmaps, *landmarks_, opts_.workers);
      std::vector<FocusRecord> records;
      for (const auto& [img, fv] : vectors) {
        if (!dataset_->contains(img)) throw IntegrityError("heatmap for unknown image " + img);
        records.push_back(focus_record(fv, dataset_->record(img).demographic));
      }
      std::vector<GroupBy> groupings{GroupBy::kGender};
      if (dataset_->paired()) groupings.insert(groupings.begin(), GroupBy::kRace);
      std::vector<FocusCount> rows;
      for (GroupBy by : groupings) {
        const auto counts = focus_distribution(records, by);
        for (const auto& label : dataset_->group_labels(by))
          for (const Region reg : all_regions()) {
            auto it = counts.find({label, reg});
            if (it != counts.end())
              rows.push_back({id, name, std::string(to_string(by)), label, std::string(to_string(reg)), it->second});
          }
      }
      artifact(id, Stage::kFocus);
      bundle_.focus_distribution.insert(bundle_.focus_distribution.end(), rows.begin(), rows.end());
      if (m.compare) {
        const std::string cid = "focus/" + name + "/correlation";
        const auto rec = sample_all(*m.compare, *landmarks_, opts_.workers);
        const auto corr = focus_correlation(vectors, rec, *dataset_, GroupBy::kPair);
        artifact(cid, Stage::kFocus);
        for (const auto& c : corr) bundle_.focus_correlation.push_back({cid, name, c});
      }
    });
  }

  const ExperimentConfig& cfg_;
  const RunOptions& opts_;
  ReportBundle bundle_;
  std::optional<Dataset> dataset_;
  bool dataset_failed_ = false;
  std::optional<EmbeddingTable> original_;
  std::optional<AttributeTable> original_attrs_;
  std::optional<std::map<std::string, LandmarkSet>> landmarks_;
  std::vector<MethodState> methods_;
};

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  return Runner(config, options).run();
}

}  // namespace deface
