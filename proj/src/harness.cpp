#include "rsnn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace fs = std::filesystem;

namespace rsnn {

namespace {

std::string join_path(const std::string& root, const std::string& rel) {
    if (root.empty()) return rel;
    return (fs::path(root) / rel).string();
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void mean_std(const std::vector<double>& xs, double& mean, double& stddev) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    stddev = std::sqrt(var);
}

}  // namespace

SplitResult split_corpus(const std::vector<Sample>& all, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
        throw std::invalid_argument("split_corpus: train fraction must be inside (0, 1)");
    }
    std::map<std::string, std::vector<Sample>> by_category;
    for (const Sample& s : all) {
        if (s.path.empty()) continue;  // label-only rows carry no image
        by_category[s.sub].push_back(s);
    }
    if (by_category.empty()) {
        throw std::runtime_error("split_corpus: manifest has no image rows");
    }
    SplitResult res;
    for (auto& [category, samples] : by_category) {
        if (samples.size() < 2) {
            throw std::runtime_error("split_corpus: category '" + category +
                                     "' has fewer than 2 samples");
        }
        std::sort(samples.begin(), samples.end(),
                  [](const Sample& a, const Sample& b) { return a.path < b.path; });
        Rng rng(mix_seed(spec.seed, fnv1a(category)));
        rng.shuffle(samples);
        // odd counts give the extra sample to train
        size_t n_train = static_cast<size_t>(
            std::ceil(static_cast<double>(samples.size()) * spec.train_fraction));
        for (size_t i = 0; i < samples.size(); ++i) {
            (i < n_train ? res.train : res.test).push_back(samples[i]);
        }
    }
    return res;
}

EvalReport evaluate(const LevelModel& model, const std::vector<Sample>& test,
                    const std::string& corpus_root) {
    if (test.empty()) throw std::runtime_error("evaluate: empty test set");
    const std::vector<std::string>& labels = model.class_labels;
    int m = static_cast<int>(labels.size());
    EvalReport rep;
    rep.labels = labels;
    rep.confusion.assign(m, std::vector<int>(m, 0));
    rep.silent.assign(m, 0);

    KernelBank bank = make_gabor_bank(model.config.gabor_window);
    for (const Sample& s : test) {
        const std::string& want = s.label(model.level);
        auto it = std::find(labels.begin(), labels.end(), want);
        if (it == labels.end()) {
            throw std::runtime_error("evaluate: test label '" + want +
                                     "' is not one of the model's classes");
        }
        int target = static_cast<int>(it - labels.begin());
        Image img = load_grayscale(join_path(corpus_root, s.path), model.config.image_size);
        Decision dec = run_module(encode_image(img, model.config, bank), model);
        ++rep.total;
        if (dec.silent()) {
            ++rep.silent[target];
            ++rep.silent_total;
        } else {
            ++rep.confusion[target][*dec.group];
        }
    }
    int correct = 0;
    for (int i = 0; i < m; ++i) correct += rep.confusion[i][i];
    rep.accuracy = static_cast<double>(correct) / rep.total;
    rep.silent_rate = static_cast<double>(rep.silent_total) / rep.total;
    rep.recall.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        int row = rep.silent[i];
        for (int j = 0; j < m; ++j) row += rep.confusion[i][j];
        if (row > 0) rep.recall[i] = static_cast<double>(rep.confusion[i][i]) / row;
    }
    return rep;
}

void write_eval_report(const std::string& dir, Level level, const EvalReport& report) {
    fs::create_directories(dir);
    std::string name = level_name(level);
    {
        std::ofstream csv((fs::path(dir) / ("confusion_" + name + ".csv")).string());
        if (!csv) throw std::runtime_error("write_eval_report: cannot write confusion csv");
        csv << "true";
        for (const std::string& l : report.labels) csv << ',' << l;
        csv << ",silent\n";
        for (size_t i = 0; i < report.labels.size(); ++i) {
            csv << report.labels[i];
            for (size_t j = 0; j < report.labels.size(); ++j) csv << ',' << report.confusion[i][j];
            csv << ',' << report.silent[i] << '\n';
        }
    }
    std::ofstream txt((fs::path(dir) / ("summary_" + name + ".txt")).string());
    if (!txt) throw std::runtime_error("write_eval_report: cannot write summary");
    txt << "level: " << name << '\n'
        << "samples: " << report.total << '\n'
        << "accuracy: " << fixed6(report.accuracy) << '\n'
        << "silent_rate: " << fixed6(report.silent_rate) << '\n';
    for (size_t i = 0; i < report.labels.size(); ++i) {
        txt << "recall " << report.labels[i] << ": " << fixed6(report.recall[i]) << '\n';
    }
}

namespace {

// forward pass over occluded copies of the test set; blobs == 0 skips masking
double occluded_accuracy(const LevelModel& model, const std::vector<Sample>& test,
                         const std::string& corpus_root, int blobs, double radius, double sigma,
                         uint64_t run_seed, const std::string& dump_dir, int seed_index) {
    KernelBank bank = make_gabor_bank(model.config.gabor_window);
    const std::vector<std::string>& labels = model.class_labels;
    int correct = 0;
    for (const Sample& s : test) {
        auto it = std::find(labels.begin(), labels.end(), s.label(model.level));
        if (it == labels.end()) {
            throw std::runtime_error("occlusion_sweep: test label '" + s.label(model.level) +
                                     "' is not one of the model's classes");
        }
        Image img = load_grayscale(join_path(corpus_root, s.path), model.config.image_size);
        if (blobs > 0) {
            OcclusionSpec os;
            os.blob_count = blobs;
            os.blob_radius = radius;
            os.softness_sigma = sigma;
            os.seed = mix_seed(run_seed, fnv1a(s.path));
            img = occlude(img, os);
            if (!dump_dir.empty()) {
                fs::path rel(s.path);
                fs::path dir = fs::path(dump_dir) / rel.parent_path();
                fs::create_directories(dir);
                std::string stem = rel.stem().string();
                save_grayscale(img, (dir / (stem + "_b" + std::to_string(blobs) + "_s" +
                                            std::to_string(seed_index) + ".png"))
                                        .string());
            }
        }
        Decision dec = run_module(encode_image(img, model.config, bank), model);
        int target = static_cast<int>(it - labels.begin());
        if (!dec.silent() && *dec.group == target) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

std::vector<SweepPoint> occlusion_sweep(const LevelModel& model, const std::vector<Sample>& test,
                                        const std::string& corpus_root,
                                        const OcclusionSweepSpec& spec) {
    if (test.empty()) throw std::runtime_error("occlusion_sweep: empty test set");
    if (spec.seeds < 1) throw std::invalid_argument("occlusion_sweep: need at least one seed");
    double radius = spec.blob_radius > 0.0 ? spec.blob_radius : model.config.image_size / 8.0;
    double sigma = spec.softness_sigma > 0.0 ? spec.softness_sigma : radius / 3.0;
    std::vector<SweepPoint> points;
    for (int blobs : spec.blob_counts) {
        if (blobs < 0) throw std::invalid_argument("occlusion_sweep: negative blob count");
        SweepPoint pt;
        pt.blobs = blobs;
        for (int s = 0; s < spec.seeds; ++s) {
            if (blobs == 0 && s > 0) {
                // no occluder, so every seed sees the identical image
                pt.per_seed_accuracy.push_back(pt.per_seed_accuracy[0]);
                continue;
            }
            uint64_t run_seed = mix_seed(mix_seed(spec.base_seed, blobs), s);
            pt.per_seed_accuracy.push_back(occluded_accuracy(model, test, corpus_root, blobs,
                                                             radius, sigma, run_seed,
                                                             spec.dump_dir, s));
        }
        mean_std(pt.per_seed_accuracy, pt.mean_accuracy, pt.std_accuracy);
        points.push_back(std::move(pt));
    }
    return points;
}

void write_sweep_report(const std::string& dir, Level level,
                        const std::vector<SweepPoint>& points) {
    fs::create_directories(dir);
    std::string name = level_name(level);
    std::ofstream csv((fs::path(dir) / ("sweep_" + name + ".csv")).string());
    if (!csv) throw std::runtime_error("write_sweep_report: cannot write csv");
    csv << "blobs,mean_accuracy,std_accuracy";
    if (!points.empty()) {
        for (size_t s = 0; s < points[0].per_seed_accuracy.size(); ++s) csv << ",run" << s;
    }
    csv << '\n';
    for (const SweepPoint& pt : points) {
        csv << pt.blobs << ',' << fixed6(pt.mean_accuracy) << ',' << fixed6(pt.std_accuracy);
        for (double a : pt.per_seed_accuracy) csv << ',' << fixed6(a);
        csv << '\n';
    }
    std::ofstream txt((fs::path(dir) / ("sweep_" + name + ".txt")).string());
    txt << "occlusion sweep, level " << name << '\n';
    for (const SweepPoint& pt : points) {
        txt << "blobs " << pt.blobs << ": mean accuracy " << fixed6(pt.mean_accuracy)
            << " (std " << fixed6(pt.std_accuracy) << ")\n";
    }
}

std::vector<BandCell> band_comparison(const std::vector<Sample>& all,
                                      const std::string& corpus_root,
                                      const BandComparisonSpec& spec) {
    if (spec.runs < 1) throw std::invalid_argument("band_comparison: need at least one run");
    Taxonomy tax = build_taxonomy(all);
    std::vector<BandCell> cells;
    for (Level level : spec.levels) {
        for (Band band : spec.bands) {
            BandCell cell;
            cell.level = level;
            cell.band = band;
            cell.runs = spec.runs;
            cells.push_back(cell);
        }
    }
    for (int r = 0; r < spec.runs; ++r) {
        SplitSpec split_spec;
        split_spec.seed = mix_seed(spec.base_seed, static_cast<uint64_t>(r));
        SplitResult split = split_corpus(all, split_spec);
        size_t ci = 0;
        for (Level level : spec.levels) {
            for (Band band : spec.bands) {
                LevelConfig cfg = default_level_config(spec.preset, level);
                cfg.band = band;
                cfg.seed = mix_seed(mix_seed(spec.base_seed, 0x5eedULL + r),
                                    fnv1a(level_name(level) + band_name(band)));
                LevelModel model = train_level(level, tax, split.train, corpus_root, cfg, nullptr);
                EvalReport rep = evaluate(model, split.test, corpus_root);
                cells[ci++].per_run_accuracy.push_back(rep.accuracy);
            }
        }
    }
    for (BandCell& cell : cells) {
        mean_std(cell.per_run_accuracy, cell.mean_accuracy, cell.std_accuracy);
    }
    return cells;
}

void write_band_report(const std::string& dir, const std::vector<BandCell>& cells) {
    fs::create_directories(dir);
    std::ofstream csv((fs::path(dir) / "bands.csv").string());
    if (!csv) throw std::runtime_error("write_band_report: cannot write csv");
    csv << "level,band,runs,mean_accuracy,std_accuracy\n";
    for (const BandCell& c : cells) {
        csv << level_name(c.level) << ',' << band_name(c.band) << ',' << c.runs << ','
            << fixed6(c.mean_accuracy) << ',' << fixed6(c.std_accuracy) << '\n';
    }
    std::ofstream txt((fs::path(dir) / "bands.txt").string());
    txt << "band comparison, mean accuracy over " << (cells.empty() ? 0 : cells[0].runs)
        << " runs\n";
    for (const BandCell& c : cells) {
        txt << level_name(c.level) << " x " << band_name(c.band) << ": "
            << fixed6(c.mean_accuracy) << " (std " << fixed6(c.std_accuracy) << ")\n";
    }
}

namespace {

struct LeafSpec {
    const char* super;
    const char* basic;
    const char* sub;
    double angle;  // bar direction from the column axis
    bool twin;     // two parallel strokes instead of one
};

const LeafSpec kLeaves[8] = {
    {"cardinal", "horizontal", "horizontal_one", 0.0, false},
    {"cardinal", "horizontal", "horizontal_two", 0.0, true},
    {"cardinal", "vertical", "vertical_one", M_PI / 2.0, false},
    {"cardinal", "vertical", "vertical_two", M_PI / 2.0, true},
    {"diagonal", "slash", "slash_one", M_PI / 4.0, false},
    {"diagonal", "slash", "slash_two", M_PI / 4.0, true},
    {"diagonal", "backslash", "backslash_one", 3.0 * M_PI / 4.0, false},
    {"diagonal", "backslash", "backslash_two", 3.0 * M_PI / 4.0, true},
};

constexpr int kSynthSide = 64;

void draw_bar(Image& img, double cx, double cy, double angle, double length, double halfwidth,
              double intensity) {
    double dx = std::cos(angle), dy = std::sin(angle);
    double x0 = cx - dx * length / 2.0, y0 = cy - dy * length / 2.0;
    double x1 = cx + dx * length / 2.0, y1 = cy + dy * length / 2.0;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            // distance from the pixel center to the stroke segment
            double px = c - x0, py = r - y0;
            double vx = x1 - x0, vy = y1 - y0;
            double t = (px * vx + py * vy) / (vx * vx + vy * vy);
            t = std::min(1.0, std::max(0.0, t));
            double d = std::hypot(px - t * vx, py - t * vy);
            double coverage = std::min(1.0, std::max(0.0, halfwidth + 0.5 - d));
            double v = intensity * coverage;
            if (v > img.at(r, c)) img.at(r, c) = v;
        }
    }
}

}  // namespace

std::vector<std::string> synth_leaf_labels() {
    std::vector<std::string> out;
    for (const LeafSpec& l : kLeaves) out.push_back(l.sub);
    return out;
}

Image synth_image(int leaf, uint64_t seed) {
    if (leaf < 0 || leaf >= 8) throw std::invalid_argument("synth_image: leaf must be 0..7");
    const LeafSpec& spec = kLeaves[leaf];
    Rng rng(seed);
    Image img = make_image(kSynthSide, kSynthSide, 0.05);
    double cx = kSynthSide / 2.0 + rng.uniform(-6.0, 6.0);
    double cy = kSynthSide / 2.0 + rng.uniform(-6.0, 6.0);
    double angle = spec.angle + rng.uniform(-0.07, 0.07);
    double length = rng.uniform(32.0, 44.0);
    double halfwidth = rng.uniform(1.35, 1.85);
    double intensity = rng.uniform(0.85, 1.0);
    if (spec.twin) {
        double gap = rng.uniform(6.5, 8.5);
        double nx = -std::sin(angle), ny = std::cos(angle);
        draw_bar(img, cx + nx * gap / 2.0, cy + ny * gap / 2.0, angle, length, halfwidth,
                 intensity);
        draw_bar(img, cx - nx * gap / 2.0, cy - ny * gap / 2.0, angle, length, halfwidth,
                 intensity);
    } else {
        draw_bar(img, cx, cy, angle, length, halfwidth, intensity);
    }
    return img;
}

void synth_corpus(const std::string& out_dir, int per_class, uint64_t seed) {
    if (per_class < 1) throw std::invalid_argument("synth_corpus: per_class must be >= 1");
    fs::create_directories(out_dir);
    std::vector<Sample> manifest;
    std::vector<Sample> taxonomy;
    for (int leaf = 0; leaf < 8; ++leaf) {
        const LeafSpec& spec = kLeaves[leaf];
        fs::path dir = fs::path(out_dir) / spec.super / spec.basic / spec.sub;
        fs::create_directories(dir);
        Sample tx;
        tx.super = spec.super;
        tx.basic = spec.basic;
        tx.sub = spec.sub;
        taxonomy.push_back(tx);
        for (int i = 0; i < per_class; ++i) {
            Image img = synth_image(leaf, mix_seed(mix_seed(seed, leaf), i));
            char name[32];
            std::snprintf(name, sizeof(name), "img_%05d.png", i);
            save_grayscale(img, (dir / name).string());
            Sample s;
            s.path = (fs::path(spec.super) / spec.basic / spec.sub / name).string();
            s.super = spec.super;
            s.basic = spec.basic;
            s.sub = spec.sub;
            manifest.push_back(std::move(s));
        }
    }
    write_manifest((fs::path(out_dir) / "manifest.tsv").string(), manifest);
    write_manifest((fs::path(out_dir) / "taxonomy.tsv").string(), taxonomy);
}

void write_feature_csv(const std::string& out_path, const LevelModel& model,
                       const std::vector<Sample>& samples, const std::string& corpus_root,
                       FeatureKind kind) {
    std::ofstream csv(out_path);
    if (!csv) throw std::runtime_error("write_feature_csv: cannot open '" + out_path + "'");
    csv << "path,label";
    for (size_t l = 0; l < model.tensors.size(); ++l) csv << ",f" << l;
    csv << '\n';
    KernelBank bank = make_gabor_bank(model.config.gabor_window);
    for (const Sample& s : samples) {
        Image img = load_grayscale(join_path(corpus_root, s.path), model.config.image_size);
        SpikeWave wave = encode_image(img, model.config, bank);
        S2Activity act = s2_forward(wave, model.tensors, model.config.theta);
        std::vector<double> f = extract_features(act, kind);
        csv << s.path << ',' << s.label(model.level);
        for (double v : f) csv << ',' << fmt_double(v);
        csv << '\n';
    }
}

}  // namespace rsnn
