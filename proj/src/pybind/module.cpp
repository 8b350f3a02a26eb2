// numpy-facing bindings for the core operations; images and filter stacks
// cross the boundary as float64 arrays, spikes as small event objects
#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsnn/harness.hpp"

namespace py = pybind11;
using namespace rsnn;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const DArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array (height, width)");
    Image img = make_image(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.pixels.data(), a.data(), img.pixels.size() * sizeof(double));
    return img;
}

py::array_t<double> from_image(const Image& img) {
    py::array_t<double> a({img.height, img.width});
    std::memcpy(a.mutable_data(), img.pixels.data(), img.pixels.size() * sizeof(double));
    return a;
}

FeatureMapStack to_stack(const DArray& a) {
    if (a.ndim() != 3) throw std::invalid_argument("expected a 3-D array (maps, rows, cols)");
    FeatureMapStack s;
    s.maps = static_cast<int>(a.shape(0));
    s.rows = static_cast<int>(a.shape(1));
    s.cols = static_cast<int>(a.shape(2));
    s.values.assign(a.data(), a.data() + a.size());
    return s;
}

py::array_t<double> from_stack(const FeatureMapStack& s) {
    py::array_t<double> a({s.maps, s.rows, s.cols});
    std::memcpy(a.mutable_data(), s.values.data(), s.values.size() * sizeof(double));
    return a;
}

SynapseTensor to_tensor(const DArray& a) {
    if (a.ndim() != 3 || a.shape(0) != kOrientations || a.shape(1) != a.shape(2)) {
        throw std::invalid_argument("expected a weight array shaped (4, w, w)");
    }
    SynapseTensor t;
    t.w = static_cast<int>(a.shape(1));
    t.weights.assign(a.data(), a.data() + a.size());
    return t;
}

py::array_t<double> from_tensor(const SynapseTensor& t) {
    py::array_t<double> a({kOrientations, t.w, t.w});
    std::memcpy(a.mutable_data(), t.weights.data(), t.weights.size() * sizeof(double));
    return a;
}

std::vector<SynapseTensor> to_tensors(const std::vector<DArray>& arrays) {
    std::vector<SynapseTensor> out;
    out.reserve(arrays.size());
    for (const DArray& a : arrays) out.push_back(to_tensor(a));
    return out;
}

Signal to_signal(bool reward) { return reward ? Signal::Reward : Signal::Punish; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "reward-modulated spiking categorizer: core operations";

    py::enum_<Band>(m, "Band")
        .value("LSF", Band::LSF)
        .value("ISF", Band::ISF)
        .value("HSF", Band::HSF)
        .value("Full", Band::Full);

    py::enum_<Outcome>(m, "Outcome")
        .value("Correct", Outcome::Correct)
        .value("Incorrect", Outcome::Incorrect)
        .value("Silent", Outcome::Silent);

    py::class_<SpikeEvent>(m, "SpikeEvent")
        .def_readonly("t", &SpikeEvent::t)
        .def_readonly("map", &SpikeEvent::map)
        .def_readonly("row", &SpikeEvent::row)
        .def_readonly("col", &SpikeEvent::col)
        .def("__repr__", [](const SpikeEvent& e) {
            return "SpikeEvent(t=" + std::to_string(e.t) + ", map=" + std::to_string(e.map) +
                   ", row=" + std::to_string(e.row) + ", col=" + std::to_string(e.col) + ")";
        });

    py::class_<SpikeWave>(m, "SpikeWave")
        .def_readonly("maps", &SpikeWave::maps)
        .def_readonly("rows", &SpikeWave::rows)
        .def_readonly("cols", &SpikeWave::cols)
        .def_readonly("events", &SpikeWave::events)
        .def("__len__", [](const SpikeWave& w) { return w.events.size(); });

    py::class_<S2Activity>(m, "S2Activity")
        .def_readonly("lattices", &S2Activity::lattices)
        .def_readonly("rows", &S2Activity::rows)
        .def_readonly("cols", &S2Activity::cols)
        .def("spike_times",
             [](const S2Activity& a) {
                 py::array_t<int> arr({a.lattices, a.rows, a.cols});
                 std::memcpy(arr.mutable_data(), a.spike_time.data(),
                             a.spike_time.size() * sizeof(int));
                 return arr;
             })
        .def("potentials", [](const S2Activity& a) {
            py::array_t<double> arr({a.lattices, a.rows, a.cols});
            std::memcpy(arr.mutable_data(), a.potential.data(),
                        a.potential.size() * sizeof(double));
            return arr;
        });

    py::class_<Decision>(m, "Decision")
        .def_readonly("group", &Decision::group)
        .def_readonly("lattice", &Decision::lattice)
        .def_readonly("time", &Decision::time)
        .def("silent", &Decision::silent)
        .def("__repr__", [](const Decision& d) {
            if (d.silent()) return std::string("Decision(silent)");
            return "Decision(group=" + std::to_string(*d.group) +
                   ", lattice=" + std::to_string(*d.lattice) +
                   ", time=" + std::to_string(*d.time) + ")";
        });

    py::class_<WinnerPos>(m, "WinnerPos")
        .def(py::init([](int lattice, int row, int col, int time, double potential) {
                 WinnerPos w;
                 w.lattice = lattice;
                 w.row = row;
                 w.col = col;
                 w.time = time;
                 w.potential = potential;
                 return w;
             }),
             py::arg("lattice"), py::arg("row"), py::arg("col"), py::arg("time"),
             py::arg("potential") = 0.0)
        .def_readwrite("lattice", &WinnerPos::lattice)
        .def_readwrite("row", &WinnerPos::row)
        .def_readwrite("col", &WinnerPos::col)
        .def_readwrite("time", &WinnerPos::time)
        .def_readwrite("potential", &WinnerPos::potential);

    py::class_<LearningConfig>(m, "LearningConfig")
        .def(py::init<>())
        .def(py::init([](double rp, double rm, double pp, double pm) {
                 return LearningConfig{rp, rm, pp, pm};
             }),
             py::arg("m_r_plus"), py::arg("m_r_minus"), py::arg("m_p_plus"),
             py::arg("m_p_minus"))
        .def_readwrite("m_r_plus", &LearningConfig::m_r_plus)
        .def_readwrite("m_r_minus", &LearningConfig::m_r_minus)
        .def_readwrite("m_p_plus", &LearningConfig::m_p_plus)
        .def_readwrite("m_p_minus", &LearningConfig::m_p_minus);

    py::class_<OutcomeWindow>(m, "OutcomeWindow")
        .def(py::init<int>(), py::arg("capacity"))
        .def("push", &OutcomeWindow::push)
        .def("a_r", &OutcomeWindow::a_r)
        .def("a_p", &OutcomeWindow::a_p)
        .def("correct_count", &OutcomeWindow::correct_count)
        .def("incorrect_count", &OutcomeWindow::incorrect_count)
        .def("capacity", &OutcomeWindow::capacity);

    py::class_<LevelConfig>(m, "LevelConfig")
        .def(py::init<>())
        .def_readwrite("gabor_window", &LevelConfig::gabor_window)
        .def_readwrite("n_lattices", &LevelConfig::n_lattices)
        .def_readwrite("w_s2", &LevelConfig::w_s2)
        .def_readwrite("theta", &LevelConfig::theta)
        .def_readwrite("learn", &LevelConfig::learn)
        .def_readwrite("band", &LevelConfig::band)
        .def_readwrite("epochs", &LevelConfig::epochs)
        .def_readwrite("seed", &LevelConfig::seed)
        .def_readwrite("window_n", &LevelConfig::window_n)
        .def_readwrite("w_c1", &LevelConfig::w_c1)
        .def_readwrite("inhibit_radius", &LevelConfig::inhibit_radius)
        .def_readwrite("inhibit_strength", &LevelConfig::inhibit_strength)
        .def_readwrite("init_mean", &LevelConfig::init_mean)
        .def_readwrite("init_std", &LevelConfig::init_std)
        .def_readwrite("image_size", &LevelConfig::image_size)
        .def_readwrite("floor_frac", &LevelConfig::floor_frac)
        .def_readwrite("band_prefilter", &LevelConfig::band_prefilter);

    py::class_<LevelModel>(m, "LevelModel")
        .def_property_readonly("level",
                               [](const LevelModel& mdl) { return level_name(mdl.level); })
        .def_property_readonly("class_labels",
                               [](const LevelModel& mdl) { return mdl.class_labels; })
        .def_property_readonly("config", [](const LevelModel& mdl) { return mdl.config; })
        .def_property_readonly("group_of",
                               [](const LevelModel& mdl) { return mdl.groups.group_of; })
        .def("tensors",
             [](const LevelModel& mdl) {
                 std::vector<py::array_t<double>> out;
                 for (const SynapseTensor& t : mdl.tensors) out.push_back(from_tensor(t));
                 return out;
             })
        .def("classify", [](const LevelModel& mdl, const DArray& a) {
            Image img = to_image(a);
            Image scaled = resize_bilinear(img, mdl.config.image_size, mdl.config.image_size);
            KernelBank bank = make_gabor_bank(mdl.config.gabor_window);
            return run_module(encode_image(scaled, mdl.config, bank), mdl);
        });

    // imaging
    m.def(
        "load_image",
        [](const std::string& path, int size) { return from_image(load_grayscale(path, size)); },
        py::arg("path"), py::arg("size"));
    m.def(
        "save_image",
        [](const DArray& a, const std::string& path) { save_grayscale(to_image(a), path); },
        py::arg("image"), py::arg("path"));
    m.def(
        "resize",
        [](const DArray& a, int width, int height) {
            return from_image(resize_bilinear(to_image(a), width, height));
        },
        py::arg("image"), py::arg("width"), py::arg("height"));
    m.def(
        "occlude",
        [](const DArray& a, int blobs, double radius, double sigma, uint64_t seed) {
            OcclusionSpec spec;
            spec.blob_count = blobs;
            spec.blob_radius = radius;
            spec.softness_sigma = sigma;
            spec.seed = seed;
            return from_image(occlude(to_image(a), spec));
        },
        py::arg("image"), py::arg("blobs"), py::arg("radius"), py::arg("sigma"),
        py::arg("seed"));
    m.def(
        "band_filter",
        [](const DArray& a, const std::string& band, int window, bool prefilter) {
            return from_image(band_image(to_image(a), parse_band(band), window, prefilter));
        },
        py::arg("image"), py::arg("band"), py::arg("window"), py::arg("prefilter") = false);
    m.def(
        "gaussian_blur",
        [](const DArray& a, double sigma) { return from_image(gaussian_blur(to_image(a), sigma)); },
        py::arg("image"), py::arg("sigma"));

    // oriented-edge front end
    m.def(
        "gabor_bank",
        [](int window) {
            KernelBank bank = make_gabor_bank(window);
            py::array_t<double> a({kOrientations, window, window});
            double* out = a.mutable_data();
            for (int k = 0; k < kOrientations; ++k) {
                const GaborKernel& kern = bank.kernels[k];
                std::memcpy(out + static_cast<size_t>(k) * window * window, kern.weights.data(),
                            kern.weights.size() * sizeof(double));
            }
            return a;
        },
        py::arg("window"));
    m.def(
        "convolve",
        [](const DArray& a, int window) {
            return from_stack(convolve(to_image(a), make_gabor_bank(window)));
        },
        py::arg("image"), py::arg("window"));
    m.def(
        "encode_latency",
        [](const DArray& responses, double floor) {
            return encode_latency(to_stack(responses), floor);
        },
        py::arg("responses"), py::arg("floor") = 0.0);

    // pooled spiking layers
    m.def("c1_pool", &c1_pool, py::arg("wave"), py::arg("window"), py::arg("stride"));
    m.def("cross_map_inhibit", &cross_map_inhibit, py::arg("wave"));
    m.def("local_inhibit", &local_inhibit, py::arg("wave"), py::arg("radius"),
          py::arg("strength"));
    m.def(
        "init_tensor",
        [](int w, double mean, double stddev, uint64_t seed) {
            Rng rng(seed);
            return from_tensor(init_synapse_tensor(w, mean, stddev, rng));
        },
        py::arg("w"), py::arg("mean") = 0.8, py::arg("stddev") = 0.05, py::arg("seed") = 1);
    m.def(
        "s2_forward",
        [](const SpikeWave& wave, const std::vector<DArray>& tensors, double theta) {
            return s2_forward(wave, to_tensors(tensors), theta);
        },
        py::arg("wave"), py::arg("tensors"), py::arg("theta"));
    m.def(
        "c2_pool", [](const S2Activity& act) { return c2_pool(act).first_spike; },
        py::arg("activity"));
    m.def(
        "contiguous_groups",
        [](int lattices, int groups) { return contiguous_groups(lattices, groups).group_of; },
        py::arg("lattices"), py::arg("groups"));
    m.def(
        "decide",
        [](const S2Activity& act, const std::vector<int>& group_of, int group_count) {
            GroupMap gm;
            gm.group_of = group_of;
            gm.group_count = group_count;
            if (gm.group_count <= 0 && !group_of.empty()) {
                gm.group_count = *std::max_element(group_of.begin(), group_of.end()) + 1;
            }
            return decide(c2_pool(act), gm);
        },
        py::arg("activity"), py::arg("group_of"), py::arg("group_count") = 0);

    // plasticity
    m.def(
        "rstdp_delta",
        [](double w, bool pre_not_after_post, bool reward, double a_r, double a_p,
           const LearningConfig& cfg) {
            return rstdp_delta(w, pre_not_after_post, to_signal(reward), a_r, a_p, cfg);
        },
        py::arg("w"), py::arg("pre_not_after_post"), py::arg("reward"), py::arg("a_r"),
        py::arg("a_p"), py::arg("cfg") = LearningConfig{});
    m.def("stdp_delta", &stdp_delta, py::arg("w"), py::arg("pre_not_after_post"),
          py::arg("a_plus") = 0.004, py::arg("a_minus") = -0.003);
    m.def("select_winner", &select_winner, py::arg("activity"));
    m.def(
        "apply_update",
        [](const DArray& tensor, const WinnerPos& winner, const SpikeWave& pre, bool reward,
           double a_r, double a_p, const LearningConfig& cfg) {
            SynapseTensor t = to_tensor(tensor);
            SpikeRaster raster(pre);
            apply_update(t, winner, raster, to_signal(reward), a_r, a_p, cfg);
            return from_tensor(t);
        },
        py::arg("tensor"), py::arg("winner"), py::arg("pre"), py::arg("reward"), py::arg("a_r"),
        py::arg("a_p"), py::arg("cfg") = LearningConfig{});
    m.def(
        "extract_features",
        [](const S2Activity& act, const std::string& kind) {
            return extract_features(act, parse_feature_kind(kind));
        },
        py::arg("activity"), py::arg("kind") = "first-spike");

    // level pipeline and corpus
    m.def("default_level_config",
          [](const std::string& dataset, const std::string& level) {
              return default_level_config(dataset, parse_level(level));
          },
          py::arg("dataset"), py::arg("level"));
    m.def(
        "encode_image",
        [](const DArray& a, const LevelConfig& cfg) {
            KernelBank bank = make_gabor_bank(cfg.gabor_window);
            return encode_image(to_image(a), cfg, bank);
        },
        py::arg("image"), py::arg("config"));
    m.def(
        "train_level_files",
        [](const std::string& level, const std::string& train_manifest,
           const std::string& taxonomy_manifest, const std::string& corpus_root,
           const LevelConfig& cfg) {
            Taxonomy tax = build_taxonomy(read_manifest(taxonomy_manifest));
            return train_level(parse_level(level), tax, read_manifest(train_manifest),
                               corpus_root, cfg, nullptr);
        },
        py::arg("level"), py::arg("train_manifest"), py::arg("taxonomy_manifest"),
        py::arg("corpus_root"), py::arg("config"));
    m.def(
        "load_model",
        [](const std::string& dir, const std::string& level) {
            return load_level_model(dir, parse_level(level));
        },
        py::arg("dir"), py::arg("level"));
    m.def(
        "evaluate_files",
        [](const LevelModel& model, const std::string& test_manifest,
           const std::string& corpus_root) {
            EvalReport rep = evaluate(model, read_manifest(test_manifest), corpus_root);
            py::dict d;
            d["accuracy"] = rep.accuracy;
            d["silent_rate"] = rep.silent_rate;
            d["total"] = rep.total;
            d["labels"] = rep.labels;
            return d;
        },
        py::arg("model"), py::arg("test_manifest"), py::arg("corpus_root"));
    m.def("synth_image",
          [](int leaf, uint64_t seed) { return from_image(synth_image(leaf, seed)); },
          py::arg("leaf"), py::arg("seed"));
    m.def("synth_corpus", &synth_corpus, py::arg("out_dir"), py::arg("per_class"),
          py::arg("seed"));
    m.def("synth_leaf_labels", &synth_leaf_labels);
}
