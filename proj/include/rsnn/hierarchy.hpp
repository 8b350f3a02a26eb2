#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rsnn/plasticity.hpp"

namespace rsnn {

enum class Level { Super, Basic, Sub };

inline constexpr int kLevels = 3;

Level parse_level(const std::string& name);
std::string level_name(Level level);

// One corpus entry: image path (relative to the manifest directory) plus its
// label at each level.
struct Sample {
    std::string path;
    std::string super, basic, sub;

    const std::string& label(Level level) const;
};

// Tab-separated manifest: path, super, basic, sub. Lines with three fields
// are accepted as label-only rows (empty path), so a taxonomy can be given
// without images. Throws std::runtime_error naming file and line on
// malformed rows.
std::vector<Sample> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<Sample>& samples);

// Three-level class table with single-parentage checks. Labels are sorted
// per level so indices are independent of manifest row order.
struct Taxonomy {
    std::vector<std::string> super_labels, basic_labels, sub_labels;
    std::vector<int> basic_parent;  // basic index -> super index
    std::vector<int> sub_parent;    // sub index -> basic index

    int class_count(Level level) const;
    const std::vector<std::string>& labels(Level level) const;
    int index_of(Level level, const std::string& label) const;  // -1 when absent
    std::vector<int> child_counts(Level parent_level) const;
};

// Throws std::runtime_error naming the offending label when a basic label
// appears under two superordinates or a subordinate under two basics.
Taxonomy build_taxonomy(const std::vector<Sample>& samples);

// True when the finer labels of the triple sit under the coarser ones.
bool consistent_triple(const Taxonomy& tax, int super_idx, int basic_idx, int sub_idx);

// Everything one level's module needs to run and learn.
struct LevelConfig {
    int gabor_window = 27;       // S1 filter side, realizes the level's band
    int n_lattices = 8;
    int w_s2 = 17;               // S2 receptive field side over the pooled grid
    double theta = 100.0;
    LearningConfig learn;
    Band band = Band::LSF;
    int epochs = 30;
    uint64_t seed = 1;
    int window_n = 0;            // 0 = use the training-set size
    int w_c1 = 2;                // pool window; pooling stride is w_c1 - 1
    int inhibit_radius = 3;
    double inhibit_strength = 3.0;
    double init_mean = 0.8;
    double init_std = 0.05;
    int image_size = 128;
    double floor_frac = 0.01;    // activation floor as a fraction of the max response
    bool band_prefilter = false;
};

void validate(const LevelConfig& cfg);

// Built-in parameter presets per (dataset, level). Datasets: "synth" (the
// generated desk-scale corpus), "eth80", "cu3d", "imagenet". Throws
// std::invalid_argument on unknown names.
LevelConfig default_level_config(const std::string& dataset, Level level);

// Plain-text key=value config, '#' comments. Unknown keys and unparsable
// values raise std::runtime_error naming file and line. Values not present
// keep what base carries.
LevelConfig read_level_config(const std::string& path, const LevelConfig& base);
void write_level_config(const std::string& path, const LevelConfig& cfg);

// image -> band filter -> oriented edges -> latency code -> pooled wave ->
// cross-map then local inhibition. The per-level front end shared by
// training and inference.
SpikeWave encode_image(const Image& img, const LevelConfig& cfg, const KernelBank& bank);

struct LevelModel {
    Level level = Level::Super;
    LevelConfig config;
    std::vector<SynapseTensor> tensors;
    GroupMap groups;
    std::vector<std::string> class_labels;
};

// Full reward-modulated training loop for one level. Samples are loaded
// relative to corpus_root, encoded once, then revisited over epochs in a
// seed-derived reshuffled order. When trace is non-null one line per trial
// is appended: trial, true class, decision or SILENT, signal, a_r, a_p,
// winner lattice.
LevelModel train_level(Level level, const Taxonomy& tax, const std::vector<Sample>& train,
                       const std::string& corpus_root, const LevelConfig& cfg,
                       std::ostream* trace);

// Forward pass of one module on an already banded/encoded wave.
Decision run_module(const SpikeWave& wave, const LevelModel& model);

// Model bundle directory: <level>.weights (+ .meta sidecar), <level>.config
// and taxonomy.tsv per trained level.
void save_level_model(const std::string& dir, Level level, const LevelModel& model,
                      const Taxonomy& tax);
LevelModel load_level_model(const std::string& dir, Level level);
Taxonomy load_bundle_taxonomy(const std::string& dir);

// The three independent modules side by side.
struct HierarchyModel {
    std::vector<LevelModel> levels;  // indexed by Level
    Taxonomy taxonomy;
};

HierarchyModel load_hierarchy(const std::string& dir);

struct TripleDecision {
    Decision per_level[kLevels];
    bool all_decided = false;
    bool consistent = false;  // only meaningful when all three decided
};

// Run all three modules on one image. Decisions are independent; the
// consistency flag only reports whether the triple lines up with the
// taxonomy, it never alters any decision.
TripleDecision infer_hierarchy(const Image& img, const HierarchyModel& model);

}  // namespace rsnn
