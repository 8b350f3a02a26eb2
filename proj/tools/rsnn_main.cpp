// command line front end: corpus generation, splitting, training, and the
// evaluation harnesses, all plumbed through files so runs can be replayed
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsnn/harness.hpp"

namespace fs = std::filesystem;
using namespace rsnn;

namespace {

std::string default_root(const std::string& manifest_path, const std::string& override_root) {
    if (!override_root.empty()) return override_root;
    return fs::path(manifest_path).parent_path().string();
}

std::vector<Level> level_list(const std::vector<std::string>& names) {
    if (names.size() == 1 && names[0] == "all") {
        return {Level::Super, Level::Basic, Level::Sub};
    }
    std::vector<Level> out;
    for (const std::string& n : names) out.push_back(parse_level(n));
    return out;
}

std::vector<Band> band_list(const std::vector<std::string>& names) {
    if (names.size() == 1 && names[0] == "all") {
        return {Band::LSF, Band::ISF, Band::HSF, Band::Full};
    }
    std::vector<Band> out;
    for (const std::string& n : names) out.push_back(parse_band(n));
    return out;
}

void print_decision(const char* tag, const Decision& d, const std::vector<std::string>& labels) {
    if (d.silent()) {
        std::printf("%s: SILENT\n", tag);
    } else {
        std::printf("%s: %s (lattice %d, t=%d)\n", tag, labels[*d.group].c_str(), *d.lattice,
                    *d.time);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-modulated spiking categorizer over a three-level taxonomy"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate the synthetic bar corpus");
    std::string synth_out;
    int synth_per_class = 10;
    uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "output corpus directory")->required();
    synth->add_option("--per-class", synth_per_class, "images per subordinate class");
    synth->add_option("--seed", synth_seed, "corpus seed");

    // split
    auto* split_cmd = app.add_subcommand("split", "split a manifest 50/50 per category");
    std::string split_manifest, split_out;
    uint64_t split_seed = 0;
    split_cmd->add_option("--manifest", split_manifest, "input manifest")->required();
    split_cmd->add_option("--seed", split_seed, "split seed");
    split_cmd->add_option("--out", split_out, "directory for train.tsv / test.tsv")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train one level's module");
    std::string train_level_name, train_config, train_manifest, train_taxonomy, train_out;
    std::string train_dataset = "synth", train_corpus, train_trace;
    uint64_t train_seed = 0;
    int train_epochs = -1;
    train_cmd->add_option("--level", train_level_name, "super|basic|sub")->required();
    train_cmd->add_option("--config", train_config, "file of key=value lines overriding the preset");
    train_cmd->add_option("--train", train_manifest, "training manifest")->required();
    train_cmd->add_option("--taxonomy", train_taxonomy, "taxonomy manifest")->required();
    train_cmd->add_option("--out", train_out, "model bundle directory")->required();
    train_cmd->add_option("--dataset", train_dataset, "preset family (synth|eth80|cu3d|imagenet)");
    train_cmd->add_option("--corpus", train_corpus, "corpus root (default: manifest directory)");
    train_cmd->add_option("--trace", train_trace, "trace path (default: <out>/trace_<level>.txt)");
    train_cmd->add_option("--seed", train_seed, "override the config seed");
    train_cmd->add_option("--epochs", train_epochs, "override the config epoch count");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained level on a manifest");
    std::string eval_model, eval_test, eval_level = "super", eval_report, eval_corpus;
    eval_cmd->add_option("--model", eval_model, "model bundle directory")->required();
    eval_cmd->add_option("--test", eval_test, "test manifest")->required();
    eval_cmd->add_option("--level", eval_level, "super|basic|sub");
    eval_cmd->add_option("--report", eval_report, "report output directory")->required();
    eval_cmd->add_option("--corpus", eval_corpus, "corpus root (default: manifest directory)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "occlusion robustness sweep");
    std::string sweep_model, sweep_test, sweep_level = "super", sweep_report, sweep_corpus;
    std::string sweep_dump;
    std::vector<int> sweep_blobs = {0, 2, 4, 8};
    double sweep_radius = 0.0, sweep_sigma = 0.0;
    int sweep_seeds = 10;
    uint64_t sweep_base_seed = 1;
    sweep_cmd->add_option("--model", sweep_model, "model bundle directory")->required();
    sweep_cmd->add_option("--test", sweep_test, "test manifest")->required();
    sweep_cmd->add_option("--blobs", sweep_blobs, "comma-separated blob counts")->delimiter(',');
    sweep_cmd->add_option("--radius", sweep_radius, "blob radius in pixels (0 = side/8)");
    sweep_cmd->add_option("--sigma", sweep_sigma, "mask softness (0 = radius/3)");
    sweep_cmd->add_option("--seeds", sweep_seeds, "occluder seeds per count");
    sweep_cmd->add_option("--report", sweep_report, "report output directory")->required();
    sweep_cmd->add_option("--level", sweep_level, "super|basic|sub");
    sweep_cmd->add_option("--corpus", sweep_corpus, "corpus root (default: manifest directory)");
    sweep_cmd->add_option("--dump", sweep_dump, "write the occluded variants here");
    sweep_cmd->add_option("--base-seed", sweep_base_seed, "seed the occluder streams");

    // bands
    auto* bands_cmd = app.add_subcommand("bands", "level x frequency-band accuracy grid");
    std::string bands_dataset, bands_report, bands_preset = "synth";
    std::vector<std::string> bands_levels = {"all"};
    std::vector<std::string> bands_bands = {"lsf", "isf", "hsf", "full"};
    int bands_runs = 10;
    uint64_t bands_seed = 1;
    bands_cmd->add_option("--dataset", bands_dataset, "corpus directory or manifest")->required();
    bands_cmd->add_option("--levels", bands_levels, "all or comma-separated level names")
        ->delimiter(',');
    bands_cmd->add_option("--bands", bands_bands, "comma-separated bands (lsf,isf,hsf,full)")
        ->delimiter(',');
    bands_cmd->add_option("--runs", bands_runs, "runs per cell");
    bands_cmd->add_option("--report", bands_report, "report output directory")->required();
    bands_cmd->add_option("--preset", bands_preset, "parameter preset family");
    bands_cmd->add_option("--seed", bands_seed, "base seed for splits and runs");

    // features
    auto* feat_cmd = app.add_subcommand("features", "per-lattice descriptor table");
    std::string feat_model, feat_kind = "first-spike", feat_out, feat_test, feat_corpus;
    std::string feat_level = "super";
    feat_cmd->add_option("--model", feat_model, "model bundle directory")->required();
    feat_cmd->add_option("--kind", feat_kind, "first-spike|count|potential");
    feat_cmd->add_option("--out", feat_out, "output CSV path")->required();
    feat_cmd->add_option("--test", feat_test, "manifest to featurize")->required();
    feat_cmd->add_option("--level", feat_level, "super|basic|sub");
    feat_cmd->add_option("--corpus", feat_corpus, "corpus root (default: manifest directory)");

    // infer
    auto* infer_cmd = app.add_subcommand("infer", "run all three levels on one image");
    std::string infer_model, infer_image;
    infer_cmd->add_option("--model", infer_model, "model bundle directory")->required();
    infer_cmd->add_option("--image", infer_image, "image path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            synth_corpus(synth_out, synth_per_class, synth_seed);
            std::printf("wrote %d images per class under %s\n", synth_per_class,
                        synth_out.c_str());
        } else if (*split_cmd) {
            std::vector<Sample> rows = read_manifest(split_manifest);
            SplitSpec spec;
            spec.seed = split_seed;
            SplitResult res = split_corpus(rows, spec);
            fs::path mdir = fs::absolute(fs::path(split_manifest)).parent_path();
            fs::path out = fs::absolute(split_out).lexically_normal();
            fs::create_directories(out);
            // keep image paths valid from the new manifest location
            auto rewrite = [&](std::vector<Sample>& v) {
                for (Sample& s : v) {
                    fs::path abs = (mdir / s.path).lexically_normal();
                    s.path = abs.lexically_relative(out).generic_string();
                }
            };
            rewrite(res.train);
            rewrite(res.test);
            write_manifest((out / "train.tsv").string(), res.train);
            write_manifest((out / "test.tsv").string(), res.test);
            std::printf("split %zu samples into %zu train / %zu test\n", rows.size(),
                        res.train.size(), res.test.size());
        } else if (*train_cmd) {
            Level level = parse_level(train_level_name);
            LevelConfig cfg = default_level_config(train_dataset, level);
            if (!train_config.empty()) cfg = read_level_config(train_config, cfg);
            if (train_cmd->count("--seed")) cfg.seed = train_seed;
            if (train_cmd->count("--epochs")) cfg.epochs = train_epochs;
            std::vector<Sample> rows = read_manifest(train_manifest);
            Taxonomy tax = build_taxonomy(read_manifest(train_taxonomy));
            std::string root = default_root(train_manifest, train_corpus);
            fs::create_directories(train_out);
            std::string trace_path =
                train_trace.empty()
                    ? (fs::path(train_out) / ("trace_" + level_name(level) + ".txt")).string()
                    : train_trace;
            std::ofstream trace(trace_path);
            if (!trace) throw std::runtime_error("cannot open trace file '" + trace_path + "'");
            LevelModel model = train_level(level, tax, rows, root, cfg, &trace);
            save_level_model(train_out, level, model, tax);
            std::printf("trained %s over %zu samples x %d epochs; bundle at %s\n",
                        level_name(level).c_str(), rows.size(), cfg.epochs, train_out.c_str());
        } else if (*eval_cmd) {
            LevelModel model = load_level_model(eval_model, parse_level(eval_level));
            std::vector<Sample> rows = read_manifest(eval_test);
            EvalReport rep = evaluate(model, rows, default_root(eval_test, eval_corpus));
            write_eval_report(eval_report, model.level, rep);
            std::printf("%s: accuracy %.6f, silent rate %.6f over %d samples\n",
                        level_name(model.level).c_str(), rep.accuracy, rep.silent_rate,
                        rep.total);
        } else if (*sweep_cmd) {
            LevelModel model = load_level_model(sweep_model, parse_level(sweep_level));
            std::vector<Sample> rows = read_manifest(sweep_test);
            OcclusionSweepSpec spec;
            spec.blob_counts = sweep_blobs;
            spec.blob_radius = sweep_radius;
            spec.softness_sigma = sweep_sigma;
            spec.seeds = sweep_seeds;
            spec.base_seed = sweep_base_seed;
            spec.dump_dir = sweep_dump;
            std::vector<SweepPoint> points =
                occlusion_sweep(model, rows, default_root(sweep_test, sweep_corpus), spec);
            write_sweep_report(sweep_report, model.level, points);
            for (const SweepPoint& pt : points) {
                std::printf("blobs %d: mean accuracy %.6f (std %.6f)\n", pt.blobs,
                            pt.mean_accuracy, pt.std_accuracy);
            }
        } else if (*bands_cmd) {
            fs::path src(bands_dataset);
            fs::path manifest = fs::is_directory(src) ? src / "manifest.tsv" : src;
            std::vector<Sample> rows = read_manifest(manifest.string());
            BandComparisonSpec spec;
            spec.levels = level_list(bands_levels);
            spec.bands = band_list(bands_bands);
            spec.runs = bands_runs;
            spec.base_seed = bands_seed;
            spec.preset = bands_preset;
            std::vector<BandCell> cells =
                band_comparison(rows, manifest.parent_path().string(), spec);
            write_band_report(bands_report, cells);
            for (const BandCell& c : cells) {
                std::printf("%s x %s: mean accuracy %.6f (std %.6f)\n",
                            level_name(c.level).c_str(), band_name(c.band).c_str(),
                            c.mean_accuracy, c.std_accuracy);
            }
        } else if (*feat_cmd) {
            LevelModel model = load_level_model(feat_model, parse_level(feat_level));
            std::vector<Sample> rows = read_manifest(feat_test);
            write_feature_csv(feat_out, model, rows, default_root(feat_test, feat_corpus),
                              parse_feature_kind(feat_kind));
            std::printf("wrote %zu feature rows to %s\n", rows.size(), feat_out.c_str());
        } else if (*infer_cmd) {
            HierarchyModel model = load_hierarchy(infer_model);
            Image img = load_grayscale(infer_image, model.levels[0].config.image_size);
            TripleDecision out = infer_hierarchy(img, model);
            print_decision("super", out.per_level[0], model.levels[0].class_labels);
            print_decision("basic", out.per_level[1], model.levels[1].class_labels);
            print_decision("sub", out.per_level[2], model.levels[2].class_labels);
            if (out.all_decided) {
                std::printf("taxonomy consistent: %s\n", out.consistent ? "yes" : "no");
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
