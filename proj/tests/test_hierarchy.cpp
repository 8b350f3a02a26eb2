#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rsnn/hierarchy.hpp"
#include "rsnn/rng.hpp"
#include "testutil.hpp"

using namespace rsnn;
using doctest::Contains;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
}

std::string slot_name(char prefix, int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%c%02d", prefix, i);
    return buf;
}

// one row per subordinate, parents spread in contiguous blocks; every row
// duplicated so the builder's dedup is exercised
std::vector<Sample> shape_rows(int supers, int basics, int subs) {
    std::vector<Sample> rows;
    for (int u = 0; u < subs; ++u) {
        int b = u * basics / subs;
        int s = b * supers / basics;
        Sample r;
        r.super = slot_name('s', s);
        r.basic = slot_name('b', b);
        r.sub = slot_name('u', u);
        rows.push_back(r);
        rows.push_back(r);
    }
    return rows;
}

LevelConfig tiny_cfg() {
    LevelConfig cfg;
    cfg.gabor_window = 7;
    cfg.n_lattices = 4;
    cfg.w_s2 = 3;
    cfg.theta = 1.0;
    cfg.epochs = 2;
    cfg.seed = 9;
    cfg.image_size = 32;
    return cfg;
}

// two-class corpus (one basic and one subordinate under each superordinate),
// two noisy images per class with a class-dependent bright bar
std::string make_corpus(const TempDir& td, std::vector<Sample>& samples) {
    struct Row {
        const char *s, *b, *u;
    } rows[2] = {{"sA", "bA", "uA"}, {"sB", "bB", "uB"}};
    Rng rng(77);
    int n = 0;
    for (const Row& row : rows) {
        for (int k = 0; k < 2; ++k) {
            Image img = make_image(32, 32, 0.0);
            for (double& p : img.pixels) p = 0.25 * rng.unit();
            int r0 = row.s[1] == 'A' ? 8 : 20;
            for (int c = 4; c < 28; ++c) img.at(r0, c) = 1.0;
            std::string name = "img" + std::to_string(n++) + ".png";
            save_grayscale(img, td.file(name));
            samples.push_back({name, row.s, row.b, row.u});
        }
    }
    return td.str();
}

bool same_decision(const Decision& a, const Decision& b) {
    if (a.silent() != b.silent()) return false;
    if (a.silent()) return true;
    return *a.group == *b.group && *a.lattice == *b.lattice && *a.time == *b.time;
}

}  // namespace

TEST_CASE("level names round trip") {
    for (const char* name : {"super", "basic", "sub"}) {
        CHECK(level_name(parse_level(name)) == name);
    }
    CHECK(parse_level("super") == Level::Super);
    CHECK(parse_level("basic") == Level::Basic);
    CHECK(parse_level("sub") == Level::Sub);
    CHECK_THROWS_WITH_AS(parse_level("mega"), Contains("mega"), std::invalid_argument);
}

TEST_CASE("a sample exposes the label of each level") {
    Sample s{"p.png", "animal", "dog", "beagle"};
    CHECK(s.label(Level::Super) == "animal");
    CHECK(s.label(Level::Basic) == "dog");
    CHECK(s.label(Level::Sub) == "beagle");
}

TEST_CASE("manifests accept image rows, label-only rows, and comments") {
    TempDir td("hier_manifest");
    std::string path = td.file("m.tsv");
    write_text(path,
               "# corpus listing\n"
               "img/a.png\tanimal\tdog\tbeagle\n"
               "\n"
               "vehicle\tcar\tsedan\n"
               "img/b.png\tanimal\tcat\ttabby\r\n");
    std::vector<Sample> rows = read_manifest(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].path == "img/a.png");
    CHECK(rows[0].super == "animal");
    CHECK(rows[0].basic == "dog");
    CHECK(rows[0].sub == "beagle");
    CHECK(rows[1].path.empty());
    CHECK(rows[1].super == "vehicle");
    CHECK(rows[2].sub == "tabby");  // CR stripped
}

TEST_CASE("manifest errors name the file and line") {
    TempDir td("hier_manifest_err");
    std::string two = td.file("two.tsv");
    write_text(two, "img.png\tanimal\n");
    CHECK_THROWS_WITH_AS(read_manifest(two), Contains(":1:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(read_manifest(two), Contains("expected 3 or 4"), std::runtime_error);

    std::string blank = td.file("blank.tsv");
    write_text(blank, "ok.png\tanimal\tdog\tbeagle\nimg.png\t\tdog\tbeagle\n");
    CHECK_THROWS_WITH_AS(read_manifest(blank), Contains(":2:"), std::runtime_error);
    CHECK_THROWS_WITH_AS(read_manifest(blank), Contains("empty label"), std::runtime_error);

    CHECK_THROWS_WITH_AS(read_manifest(td.file("missing.tsv")), Contains("cannot open"),
                         std::runtime_error);
}

TEST_CASE("manifests survive a write/read round trip") {
    TempDir td("hier_mani_rt");
    std::vector<Sample> rows = {{"a/x.png", "fruit", "apple", "granny"},
                                {"", "fruit", "pear", "bosc"}};
    std::string path = td.file("m.tsv");
    write_manifest(path, rows);
    std::vector<Sample> back = read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].path == "a/x.png");
    CHECK(back[0].super == "fruit");
    CHECK(back[0].basic == "apple");
    CHECK(back[0].sub == "granny");
    CHECK(back[1].path.empty());
    CHECK(back[1].basic == "pear");
    CHECK(back[1].sub == "bosc");
}

TEST_CASE("taxonomy shapes: 3/8/24 and 2/6/24 and a single row") {
    Taxonomy tax = build_taxonomy(shape_rows(3, 8, 24));
    CHECK(tax.class_count(Level::Super) == 3);
    CHECK(tax.class_count(Level::Basic) == 8);
    CHECK(tax.class_count(Level::Sub) == 24);
    CHECK(tax.child_counts(Level::Super) == std::vector<int>{3, 3, 2});
    CHECK(tax.child_counts(Level::Basic) == std::vector<int>(8, 3));
    CHECK_THROWS_AS(tax.child_counts(Level::Sub), std::invalid_argument);
    CHECK(tax.index_of(Level::Super, "s01") == 1);
    CHECK(tax.index_of(Level::Basic, "b07") == 7);
    CHECK(tax.index_of(Level::Sub, "u23") == 23);
    CHECK(tax.index_of(Level::Sub, "nope") == -1);
    for (size_t b = 0; b < tax.basic_labels.size(); ++b) {
        CHECK(tax.basic_parent[b] == static_cast<int>(b) * 3 / 8);
    }

    Taxonomy cu = build_taxonomy(shape_rows(2, 6, 24));
    CHECK(cu.class_count(Level::Super) == 2);
    CHECK(cu.class_count(Level::Basic) == 6);
    CHECK(cu.class_count(Level::Sub) == 24);
    CHECK(cu.child_counts(Level::Super) == std::vector<int>{3, 3});
    CHECK(cu.child_counts(Level::Basic) == std::vector<int>(6, 4));

    Taxonomy one = build_taxonomy({Sample{"", "a", "b", "c"}});
    CHECK(one.class_count(Level::Super) == 1);
    CHECK(one.class_count(Level::Basic) == 1);
    CHECK(one.class_count(Level::Sub) == 1);
    CHECK(one.basic_parent == std::vector<int>{0});
    CHECK(one.sub_parent == std::vector<int>{0});
}

TEST_CASE("taxonomy rejects labels with two parents, naming the label") {
    std::vector<Sample> two_supers = {{"", "a", "x", "u1"}, {"", "b", "x", "u2"}};
    CHECK_THROWS_WITH_AS(build_taxonomy(two_supers), Contains("'x'"), std::runtime_error);
    std::vector<Sample> two_basics = {{"", "a", "x", "u"}, {"", "a", "y", "u"}};
    CHECK_THROWS_WITH_AS(build_taxonomy(two_basics), Contains("'u'"), std::runtime_error);
    CHECK_THROWS_AS(build_taxonomy({}), std::runtime_error);
}

TEST_CASE("triple consistency follows the parent chains") {
    Taxonomy tax = build_taxonomy(shape_rows(3, 8, 24));
    int u = 10;
    int b = tax.sub_parent[u];
    int s = tax.basic_parent[b];
    CHECK(consistent_triple(tax, s, b, u));
    CHECK_FALSE(consistent_triple(tax, (s + 1) % 3, b, u));
    CHECK_FALSE(consistent_triple(tax, s, (b + 1) % 8, u));
    CHECK_FALSE(consistent_triple(tax, -1, b, u));
    CHECK_FALSE(consistent_triple(tax, s, b, 24));
    CHECK_FALSE(consistent_triple(tax, 3, b, u));
}

TEST_CASE("preset parameter tables are frozen") {
    LevelConfig c = default_level_config("eth80", Level::Super);
    CHECK(c.gabor_window == 27);
    CHECK(c.n_lattices == 24);
    CHECK(c.theta == 155.0);
    CHECK(c.w_s2 == 17);
    CHECK(c.band == Band::LSF);
    CHECK(c.learn.m_r_plus == 0.025);
    CHECK(c.learn.m_r_minus == -0.025);
    CHECK(c.learn.m_p_plus == 0.01);
    CHECK(c.learn.m_p_minus == -0.005);

    c = default_level_config("eth80", Level::Basic);
    CHECK(c.gabor_window == 19);
    CHECK(c.n_lattices == 48);
    CHECK(c.theta == 150.0);
    CHECK(c.band == Band::ISF);
    CHECK(c.learn.m_r_plus == 0.145);
    CHECK(c.learn.m_r_minus == -0.006);
    CHECK(c.learn.m_p_plus == 0.15);
    CHECK(c.learn.m_p_minus == -0.005);

    c = default_level_config("eth80", Level::Sub);
    CHECK(c.gabor_window == 13);
    CHECK(c.n_lattices == 336);
    CHECK(c.theta == 110.0);
    CHECK(c.band == Band::HSF);
    CHECK(c.learn.m_r_plus == 0.27);
    CHECK(c.learn.m_r_minus == -0.025);
    CHECK(c.learn.m_p_plus == 0.055);
    CHECK(c.learn.m_p_minus == -0.0009);

    c = default_level_config("cu3d", Level::Super);
    CHECK(c.gabor_window == 27);
    CHECK(c.n_lattices == 16);
    CHECK(c.theta == 135.0);
    CHECK(c.learn.m_r_plus == 0.047);

    c = default_level_config("cu3d", Level::Basic);
    CHECK(c.gabor_window == 17);
    CHECK(c.n_lattices == 30);
    CHECK(c.theta == 120.0);
    CHECK(c.learn.m_r_plus == 0.04);

    c = default_level_config("cu3d", Level::Sub);
    CHECK(c.gabor_window == 11);
    CHECK(c.n_lattices == 192);
    CHECK(c.theta == 110.0);
    CHECK(c.learn.m_r_plus == 0.16);
    CHECK(c.learn.m_p_minus == -0.001);

    c = default_level_config("imagenet", Level::Super);
    CHECK(c.gabor_window == 29);
    CHECK(c.n_lattices == 120);
    CHECK(c.theta == 120.0);
    CHECK(c.learn.m_r_plus == 0.14);
    CHECK(c.learn.m_r_minus == -0.04);

    c = default_level_config("imagenet", Level::Basic);
    CHECK(c.gabor_window == 21);
    CHECK(c.n_lattices == 140);
    CHECK(c.theta == 115.0);
    CHECK(c.learn.m_r_plus == 0.235);
    CHECK(c.learn.m_r_minus == -0.06);
    CHECK(c.learn.m_p_plus == 0.07);
    CHECK(c.learn.m_p_minus == -0.008);

    c = default_level_config("imagenet", Level::Sub);
    CHECK(c.gabor_window == 15);
    CHECK(c.n_lattices == 176);
    CHECK(c.theta == 110.0);
    CHECK(c.learn.m_r_plus == 0.6);
    CHECK(c.learn.m_r_minus == -0.102);

    c = default_level_config("synth", Level::Super);
    CHECK(c.image_size == 64);
    CHECK(c.gabor_window == 17);
    c = default_level_config("synth", Level::Sub);
    CHECK(c.gabor_window == 7);

    // every level fronts its own frequency band, coarse to fine
    for (const char* ds : {"synth", "eth80", "cu3d", "imagenet"}) {
        CHECK(default_level_config(ds, Level::Super).band == Band::LSF);
        CHECK(default_level_config(ds, Level::Basic).band == Band::ISF);
        CHECK(default_level_config(ds, Level::Sub).band == Band::HSF);
        for (Level lvl : {Level::Super, Level::Basic, Level::Sub}) {
            CHECK_NOTHROW(validate(default_level_config(ds, lvl)));
        }
    }
    CHECK_THROWS_WITH_AS(default_level_config("mystery", Level::Super), Contains("mystery"),
                         std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range fields") {
    auto broken = [](auto mutate) {
        LevelConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_NOTHROW(validate(LevelConfig{}));
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.gabor_window = 8; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.gabor_window = 1; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.n_lattices = 0; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.w_s2 = 0; })), std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.theta = 0.0; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.epochs = -1; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.window_n = -2; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.w_c1 = 0; })), std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.inhibit_radius = -1; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.inhibit_strength = -0.5; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.image_size = 4; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.floor_frac = -0.1; })),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(broken([](LevelConfig& c) { c.learn.m_r_minus = 0.1; })),
                    std::invalid_argument);
}

TEST_CASE("config files round trip every field exactly") {
    TempDir td("hier_cfg");
    LevelConfig cfg = default_level_config("eth80", Level::Sub);
    cfg.theta = 0.1;
    cfg.seed = 0xDEADBEEFCAFEF00Dull;
    cfg.epochs = 7;
    cfg.band = Band::Full;
    cfg.band_prefilter = true;
    cfg.floor_frac = 1e-3;
    cfg.init_std = 0.0123456789012345;
    cfg.window_n = 5;
    cfg.inhibit_strength = 2.25;
    std::string path = td.file("level.cfg");
    write_level_config(path, cfg);
    LevelConfig back = read_level_config(path, LevelConfig{});
    CHECK(back.gabor_window == cfg.gabor_window);
    CHECK(back.n_lattices == cfg.n_lattices);
    CHECK(back.w_s2 == cfg.w_s2);
    CHECK(back.theta == cfg.theta);
    CHECK(back.learn.m_r_plus == cfg.learn.m_r_plus);
    CHECK(back.learn.m_r_minus == cfg.learn.m_r_minus);
    CHECK(back.learn.m_p_plus == cfg.learn.m_p_plus);
    CHECK(back.learn.m_p_minus == cfg.learn.m_p_minus);
    CHECK(back.band == Band::Full);
    CHECK(back.epochs == 7);
    CHECK(back.seed == cfg.seed);
    CHECK(back.window_n == 5);
    CHECK(back.w_c1 == cfg.w_c1);
    CHECK(back.inhibit_radius == cfg.inhibit_radius);
    CHECK(back.inhibit_strength == 2.25);
    CHECK(back.init_mean == cfg.init_mean);
    CHECK(back.init_std == cfg.init_std);
    CHECK(back.image_size == cfg.image_size);
    CHECK(back.floor_frac == cfg.floor_frac);
    CHECK(back.band_prefilter == true);
}

TEST_CASE("partial config files override only what they name") {
    TempDir td("hier_cfg_partial");
    std::string path = td.file("partial.cfg");
    write_text(path, "# tweak two knobs\ntheta=42\n\nepochs=2\n");
    LevelConfig base = default_level_config("eth80", Level::Super);
    LevelConfig cfg = read_level_config(path, base);
    CHECK(cfg.theta == 42.0);
    CHECK(cfg.epochs == 2);
    CHECK(cfg.gabor_window == 27);
    CHECK(cfg.n_lattices == 24);
    CHECK(cfg.learn.m_r_plus == 0.025);
    CHECK(cfg.band == Band::LSF);
}

TEST_CASE("config parse errors name the file and line") {
    TempDir td("hier_cfg_err");
    std::string path = td.file("bad.cfg");

    write_text(path, "window=13\nthetta=1\n");
    CHECK_THROWS_WITH_AS(read_level_config(path, LevelConfig{}), Contains(":2:"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(read_level_config(path, LevelConfig{}), Contains("thetta"),
                         std::runtime_error);

    write_text(path, "epochs=two\n");
    CHECK_THROWS_WITH_AS(read_level_config(path, LevelConfig{}), Contains("not an integer"),
                         std::runtime_error);

    write_text(path, "epochs=3x\n");
    CHECK_THROWS_AS(read_level_config(path, LevelConfig{}), std::runtime_error);

    write_text(path, "theta=abc\n");
    CHECK_THROWS_WITH_AS(read_level_config(path, LevelConfig{}), Contains("not a number"),
                         std::runtime_error);

    write_text(path, "just a line\n");
    CHECK_THROWS_WITH_AS(read_level_config(path, LevelConfig{}), Contains("key=value"),
                         std::runtime_error);

    CHECK_THROWS_WITH_AS(read_level_config(td.file("missing.cfg"), LevelConfig{}),
                         Contains("cannot open"), std::runtime_error);
}

TEST_CASE("a black image encodes to an empty wave") {
    LevelConfig cfg = tiny_cfg();
    KernelBank bank = make_gabor_bank(cfg.gabor_window);
    SpikeWave wave = encode_image(make_image(32, 32, 0.0), cfg, bank);
    CHECK(wave.events.empty());
}

TEST_CASE("zero epochs leaves the freshly initialized weights untouched") {
    TempDir td("hier_epoch0");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 0;

    std::ostringstream trace;
    LevelModel model = train_level(Level::Super, tax, samples, root, cfg, &trace);
    CHECK(trace.str() == "# trial\ttrue\tdecided\tsignal\ta_r\ta_p\twinner\n");
    CHECK(model.level == Level::Super);
    CHECK(model.class_labels == std::vector<std::string>{"sA", "sB"});
    CHECK(model.groups.group_count == 2);
    CHECK(model.groups.group_of == std::vector<int>{0, 0, 1, 1});

    Rng rng(cfg.seed);
    REQUIRE(model.tensors.size() == 4);
    for (int l = 0; l < 4; ++l) {
        SynapseTensor want = init_synapse_tensor(cfg.w_s2, cfg.init_mean, cfg.init_std, rng);
        CHECK(model.tensors[l].w == want.w);
        CHECK(model.tensors[l].weights == want.weights);
    }
}

TEST_CASE("training is a pure function of corpus, config, and seed") {
    TempDir td("hier_repro");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();

    LevelModel a = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    LevelModel b = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    REQUIRE(a.tensors.size() == b.tensors.size());
    for (size_t i = 0; i < a.tensors.size(); ++i) {
        CHECK(a.tensors[i].weights == b.tensors[i].weights);
    }

    cfg.seed = 10;
    LevelModel c = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    bool all_same = true;
    for (size_t i = 0; i < a.tensors.size(); ++i) {
        all_same = all_same && a.tensors[i].weights == c.tensors[i].weights;
    }
    CHECK_FALSE(all_same);
}

TEST_CASE("the trace logs one labeled line per trial") {
    TempDir td("hier_trace");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 3;

    std::ostringstream trace;
    train_level(Level::Super, tax, samples, root, cfg, &trace);

    std::istringstream is(trace.str());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    REQUIRE(lines.size() == 1 + 3 * samples.size());
    CHECK(lines[0] == "# trial\ttrue\tdecided\tsignal\ta_r\ta_p\twinner");

    for (size_t i = 1; i < lines.size(); ++i) {
        std::vector<std::string> f;
        std::istringstream ls(lines[i]);
        std::string tok;
        while (std::getline(ls, tok, '\t')) f.push_back(tok);
        REQUIRE(f.size() == 7);
        CHECK(f[0] == std::to_string(i));  // trial numbers run 1..N
        CHECK((f[1] == "sA" || f[1] == "sB"));
        if (f[2] == "SILENT") {
            CHECK(f[3] == "none");
            CHECK(f[6] == "-");
        } else {
            CHECK((f[2] == "sA" || f[2] == "sB"));
            CHECK((f[3] == "reward" || f[3] == "punish"));
            int lattice = std::stoi(f[6]);
            CHECK(lattice >= 0);
            CHECK(lattice < cfg.n_lattices);
            // reward exactly when the decision names the true class
            CHECK((f[3] == "reward") == (f[1] == f[2]));
        }
        CHECK(f[4].size() == 8);
        CHECK(f[5].size() == 8);
        if (i == 1) {
            // the outcome window starts empty
            CHECK(f[4] == "0.000000");
            CHECK(f[5] == "0.000000");
        }
    }
}

TEST_CASE("training rejects unusable inputs") {
    TempDir td("hier_train_err");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();

    CHECK_THROWS_WITH_AS(train_level(Level::Super, tax, {}, root, cfg, nullptr),
                         Contains("empty training set"), std::runtime_error);

    std::vector<Sample> stray = samples;
    stray[0].super = "sZ";
    CHECK_THROWS_WITH_AS(train_level(Level::Super, tax, stray, root, cfg, nullptr),
                         Contains("missing from the taxonomy"), std::runtime_error);

    std::vector<Sample> pathless = samples;
    pathless[0].path.clear();
    CHECK_THROWS_WITH_AS(train_level(Level::Super, tax, pathless, root, cfg, nullptr),
                         Contains("without an image path"), std::runtime_error);
}

TEST_CASE("modules are independent and a black image stays silent everywhere") {
    TempDir td("hier_indep");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 1;

    HierarchyModel model;
    model.taxonomy = tax;
    model.levels.resize(kLevels);
    model.levels[0] = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    model.levels[1] = train_level(Level::Basic, tax, samples, root, cfg, nullptr);
    model.levels[2] = train_level(Level::Sub, tax, samples, root, cfg, nullptr);

    Image img = load_grayscale(root + "/img0.png", 32);
    TripleDecision before = infer_hierarchy(img, model);
    REQUIRE_FALSE(before.per_level[0].silent());

    if (before.all_decided) {
        auto tax_index = [&](Level lvl, const Decision& d) {
            return tax.index_of(lvl, model.levels[static_cast<int>(lvl)].class_labels[*d.group]);
        };
        CHECK(before.consistent ==
              consistent_triple(tax, tax_index(Level::Super, before.per_level[0]),
                                tax_index(Level::Basic, before.per_level[1]),
                                tax_index(Level::Sub, before.per_level[2])));
    }

    // silencing the subordinate module cannot move the other two
    for (SynapseTensor& t : model.levels[2].tensors) {
        for (double& wv : t.weights) wv = 0.0;
    }
    TripleDecision after = infer_hierarchy(img, model);
    CHECK(after.per_level[2].silent());
    CHECK_FALSE(after.all_decided);
    CHECK(same_decision(after.per_level[0], before.per_level[0]));
    CHECK(same_decision(after.per_level[1], before.per_level[1]));

    TripleDecision dark = infer_hierarchy(make_image(48, 48, 0.0), model);
    for (int i = 0; i < kLevels; ++i) CHECK(dark.per_level[i].silent());
    CHECK_FALSE(dark.all_decided);
    CHECK_FALSE(dark.consistent);
}

TEST_CASE("model bundles reload bit for bit") {
    TempDir td("hier_bundle");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 1;

    LevelModel model = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    std::string dir = td.file("bundle");
    save_level_model(dir, Level::Super, model, tax);

    LevelModel back = load_level_model(dir, Level::Super);
    CHECK(back.level == Level::Super);
    REQUIRE(back.tensors.size() == model.tensors.size());
    for (size_t i = 0; i < back.tensors.size(); ++i) {
        CHECK(back.tensors[i].w == model.tensors[i].w);
        CHECK(back.tensors[i].weights == model.tensors[i].weights);
    }
    CHECK(back.config.theta == cfg.theta);
    CHECK(back.config.gabor_window == cfg.gabor_window);
    CHECK(back.config.n_lattices == cfg.n_lattices);
    CHECK(back.config.seed == cfg.seed);
    CHECK(back.config.image_size == cfg.image_size);
    CHECK(back.class_labels == model.class_labels);
    CHECK(back.groups.group_of == model.groups.group_of);
    CHECK(back.groups.group_count == model.groups.group_count);

    Taxonomy t2 = load_bundle_taxonomy(dir);
    CHECK(t2.super_labels == tax.super_labels);
    CHECK(t2.basic_labels == tax.basic_labels);
    CHECK(t2.sub_labels == tax.sub_labels);
    CHECK(t2.basic_parent == tax.basic_parent);
    CHECK(t2.sub_parent == tax.sub_parent);

    // a reloaded module decides exactly like the one in memory
    Image img = load_grayscale(root + "/img1.png", 32);
    KernelBank bank = make_gabor_bank(cfg.gabor_window);
    SpikeWave wave = encode_image(img, cfg, bank);
    CHECK(same_decision(run_module(wave, model), run_module(wave, back)));
}

TEST_CASE("bundle loading rejects tampered and incomplete directories") {
    TempDir td("hier_bundle_err");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 0;

    LevelModel model = train_level(Level::Super, tax, samples, root, cfg, nullptr);
    std::string dir = td.file("bundle");
    save_level_model(dir, Level::Super, model, tax);

    {
        // a later key wins, so appending a theta line desyncs config and weights
        std::ofstream os(dir + "/super.config", std::ios::app);
        os << "theta=99\n";
    }
    CHECK_THROWS_WITH_AS(load_level_model(dir, Level::Super), Contains("threshold mismatch"),
                         std::runtime_error);

    save_level_model(dir, Level::Super, model, tax);
    write_text(dir + "/super.weights.meta", "level=super\n");
    CHECK_THROWS_WITH_AS(load_level_model(dir, Level::Super), Contains("corrupt sidecar"),
                         std::runtime_error);

    std::filesystem::remove(dir + "/super.weights.meta");
    CHECK_THROWS_WITH_AS(load_level_model(dir, Level::Super), Contains("missing sidecar"),
                         std::runtime_error);

    CHECK_THROWS_AS(load_level_model(td.file("nowhere"), Level::Super), std::runtime_error);
}

TEST_CASE("a full hierarchy reloads as three ordered modules") {
    TempDir td("hier_full");
    std::vector<Sample> samples;
    std::string root = make_corpus(td, samples);
    Taxonomy tax = build_taxonomy(samples);
    LevelConfig cfg = tiny_cfg();
    cfg.epochs = 1;

    std::string dir = td.file("bundle");
    for (Level lvl : {Level::Super, Level::Basic, Level::Sub}) {
        save_level_model(dir, lvl, train_level(lvl, tax, samples, root, cfg, nullptr), tax);
    }
    HierarchyModel model = load_hierarchy(dir);
    REQUIRE(model.levels.size() == kLevels);
    CHECK(model.levels[0].level == Level::Super);
    CHECK(model.levels[1].level == Level::Basic);
    CHECK(model.levels[2].level == Level::Sub);
    CHECK(model.taxonomy.class_count(Level::Super) == 2);
    CHECK(model.taxonomy.class_count(Level::Basic) == 2);
    CHECK(model.taxonomy.class_count(Level::Sub) == 2);
    CHECK(model.levels[0].class_labels == std::vector<std::string>{"sA", "sB"});
    CHECK(model.levels[2].class_labels == std::vector<std::string>{"uA", "uB"});
}
