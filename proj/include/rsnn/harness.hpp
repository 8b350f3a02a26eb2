#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsnn/hierarchy.hpp"

namespace rsnn {

struct SplitSpec {
    uint64_t seed = 0;
    double train_fraction = 0.5;
};

struct SplitResult {
    std::vector<Sample> train, test;
};

// Per-subordinate-category split: each category is shuffled with a seed
// derived from (seed, category) and halved, odd counts giving the extra
// sample to train. Categories with fewer than two samples are an error.
SplitResult split_corpus(const std::vector<Sample>& all, const SplitSpec& spec);

struct EvalReport {
    std::vector<std::string> labels;
    std::vector<std::vector<int>> confusion;  // true x predicted
    std::vector<int> silent;                  // per true class
    std::vector<double> recall;               // per true class, silent counts against
    int total = 0;
    int silent_total = 0;
    double accuracy = 0.0;     // silent scored as error
    double silent_rate = 0.0;
};

// Forward-only pass over a labeled manifest. Test labels missing from the
// model's class list raise std::runtime_error naming the label.
EvalReport evaluate(const LevelModel& model, const std::vector<Sample>& test,
                    const std::string& corpus_root);

void write_eval_report(const std::string& dir, Level level, const EvalReport& report);

struct SweepPoint {
    int blobs = 0;
    std::vector<double> per_seed_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct OcclusionSweepSpec {
    std::vector<int> blob_counts{0, 2, 4, 8};
    double blob_radius = 0.0;     // 0 = image side / 8
    double softness_sigma = 0.0;  // 0 = radius / 3
    int seeds = 10;
    uint64_t base_seed = 1;
    std::string dump_dir;         // when set, occluded variants are written here
};

// Evaluate the model for every blob count x seed over masked copies of the
// test set. Blob placement derives from (run seed, image path) so each image
// gets different but reproducible occluders.
std::vector<SweepPoint> occlusion_sweep(const LevelModel& model, const std::vector<Sample>& test,
                                        const std::string& corpus_root,
                                        const OcclusionSweepSpec& spec);

void write_sweep_report(const std::string& dir, Level level,
                        const std::vector<SweepPoint>& points);

struct BandCell {
    Level level = Level::Super;
    Band band = Band::LSF;
    int runs = 0;
    std::vector<double> per_run_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct BandComparisonSpec {
    std::vector<Level> levels{Level::Super, Level::Basic, Level::Sub};
    std::vector<Band> bands{Band::LSF, Band::ISF, Band::HSF, Band::Full};
    int runs = 10;
    uint64_t base_seed = 1;
    std::string preset = "synth";  // default_level_config dataset for the cells
};

// Train and test one model per (level, band) cell, re-splitting and
// re-seeding per run, and report mean accuracy per cell.
std::vector<BandCell> band_comparison(const std::vector<Sample>& all,
                                      const std::string& corpus_root,
                                      const BandComparisonSpec& spec);

void write_band_report(const std::string& dir, const std::vector<BandCell>& cells);

// Deterministic desk-scale corpus: oriented bright bars over a dark ground
// forming a 2 x 2 x 2 three-level taxonomy (cardinal/diagonal families,
// four orientations, single/double strokes), per_class images per leaf.
// Writes PNGs plus manifest.tsv and taxonomy.tsv under out_dir.
void synth_corpus(const std::string& out_dir, int per_class, uint64_t seed);

// Render one synthetic sample without touching the filesystem. leaf is the
// subordinate class index 0..7, instance seeds the jitter.
Image synth_image(int leaf, uint64_t seed);

std::vector<std::string> synth_leaf_labels();

// Feature CSV for the readout baselines: one row per manifest entry with its
// level label and the per-lattice descriptor.
void write_feature_csv(const std::string& out_path, const LevelModel& model,
                       const std::vector<Sample>& samples, const std::string& corpus_root,
                       FeatureKind kind);

}  // namespace rsnn
