#include "rsnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rsnn {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

SynapseTensor init_synapse_tensor(int w, double mean, double stddev, Rng& rng) {
    require(w >= 1, "init_synapse_tensor: receptive field side must be >= 1");
    SynapseTensor t;
    t.w = w;
    t.weights.resize(static_cast<size_t>(kOrientations) * w * w);
    for (double& wt : t.weights) {
        wt = clamp01(rng.normal(mean, stddev));
    }
    return t;
}

SpikeWave c1_pool(const SpikeWave& wave, int pool_window, int stride) {
    require(pool_window >= 1, "c1_pool: pool window must be >= 1");
    require(stride >= 1, "c1_pool: stride must be >= 1");
    require(wave.rows >= pool_window && wave.cols >= pool_window,
            "c1_pool: wave smaller than the pool window");
    int out_rows = (wave.rows - pool_window) / stride + 1;
    int out_cols = (wave.cols - pool_window) / stride + 1;

    // events arrive in ascending t, so the first event covering a cell is
    // its window minimum
    std::vector<int> pooled(static_cast<size_t>(wave.maps) * out_rows * out_cols, 0);
    auto cell = [&](int m, int r, int c) -> int& {
        return pooled[(static_cast<size_t>(m) * out_rows + r) * out_cols + c];
    };
    for (const SpikeEvent& e : wave.events) {
        // window i covers rows [i*stride, i*stride + pool_window), so the
        // windows containing this event are ceil((row-pw+1)/stride)..row/stride
        int first_i = e.row - pool_window + 1;
        int i_lo = first_i <= 0 ? 0 : (first_i + stride - 1) / stride;
        int i_hi = std::min(e.row / stride, out_rows - 1);
        int first_j = e.col - pool_window + 1;
        int j_lo = first_j <= 0 ? 0 : (first_j + stride - 1) / stride;
        int j_hi = std::min(e.col / stride, out_cols - 1);
        for (int i = i_lo; i <= i_hi; ++i) {
            for (int j = j_lo; j <= j_hi; ++j) {
                int& slot = cell(e.map, i, j);
                if (slot == 0) slot = e.t;
            }
        }
    }

    struct Pooled {
        int t, map, row, col;
    };
    std::vector<Pooled> out;
    for (int m = 0; m < wave.maps; ++m) {
        for (int r = 0; r < out_rows; ++r) {
            for (int c = 0; c < out_cols; ++c) {
                int t = cell(m, r, c);
                if (t != 0) out.push_back({t, m, r, c});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Pooled& a, const Pooled& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.map != b.map) return a.map < b.map;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    SpikeWave res;
    res.maps = wave.maps;
    res.rows = out_rows;
    res.cols = out_cols;
    res.events.reserve(out.size());
    for (size_t i = 0; i < out.size(); ++i) {
        res.events.push_back({static_cast<int>(i) + 1, out[i].map, out[i].row, out[i].col});
    }
    return res;
}

SpikeWave cross_map_inhibit(const SpikeWave& wave) {
    std::vector<uint8_t> taken(static_cast<size_t>(wave.rows) * wave.cols, 0);
    SpikeWave res;
    res.maps = wave.maps;
    res.rows = wave.rows;
    res.cols = wave.cols;
    for (const SpikeEvent& e : wave.events) {
        size_t pos = static_cast<size_t>(e.row) * wave.cols + e.col;
        if (taken[pos]) continue;  // a faster map already claimed this position
        taken[pos] = 1;
        res.events.push_back({static_cast<int>(res.events.size()) + 1, e.map, e.row, e.col});
    }
    return res;
}

SpikeWave local_inhibit(const SpikeWave& wave, int radius, double strength) {
    require(radius >= 0, "local_inhibit: negative radius");
    require(strength >= 0.0, "local_inhibit: negative strength");
    size_t n = wave.events.size();
    SpikeWave res;
    res.maps = wave.maps;
    res.rows = wave.rows;
    res.cols = wave.cols;
    if (n == 0) return res;
    if (radius == 0 || strength == 0.0) {
        res.events = wave.events;  // nothing in range, keep the input order
        for (size_t i = 0; i < n; ++i) res.events[i].t = static_cast<int>(i) + 1;
        return res;
    }

    std::vector<int64_t> latency(n);
    for (size_t i = 0; i < n; ++i) latency[i] = wave.events[i].t;

    // per-map dense position index so each firing only scans its neighborhood
    std::vector<int> at_pos(static_cast<size_t>(wave.maps) * wave.rows * wave.cols, -1);
    auto pos_of = [&](int m, int r, int c) -> int& {
        return at_pos[(static_cast<size_t>(m) * wave.rows + r) * wave.cols + c];
    };
    for (size_t i = 0; i < n; ++i) {
        const SpikeEvent& e = wave.events[i];
        pos_of(e.map, e.row, e.col) = static_cast<int>(i);
    }

    // single pass in original firing order: each event delays the
    // not-yet-processed events around it on its own map, penalties
    // accumulate, and the adjusted latencies are re-serialized at the end
    double r1 = radius + 1.0;
    for (size_t i = 0; i < n; ++i) {
        const SpikeEvent& e = wave.events[i];
        for (int dr = -radius; dr <= radius; ++dr) {
            int rr = e.row + dr;
            if (rr < 0 || rr >= wave.rows) continue;
            for (int dc = -radius; dc <= radius; ++dc) {
                if (dr == 0 && dc == 0) continue;
                int cc = e.col + dc;
                if (cc < 0 || cc >= wave.cols) continue;
                if (dr * dr + dc * dc > radius * radius) continue;
                int nb = pos_of(e.map, rr, cc);
                if (nb < 0 || nb <= static_cast<int>(i)) continue;  // already fired
                double d = std::sqrt(double(dr * dr + dc * dc));
                // written as strength*(R-d)/R so integer distances stay exact
                int64_t pen = static_cast<int64_t>(std::ceil(strength * (r1 - d) / r1));
                if (pen > 0) latency[nb] += pen;
            }
        }
    }

    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (latency[a] != latency[b]) return latency[a] < latency[b];
        const SpikeEvent& ea = wave.events[a];
        const SpikeEvent& eb = wave.events[b];
        if (ea.map != eb.map) return ea.map < eb.map;
        if (ea.row != eb.row) return ea.row < eb.row;
        return ea.col < eb.col;
    });
    res.events.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        const SpikeEvent& e = wave.events[order[k]];
        res.events.push_back({static_cast<int>(k) + 1, e.map, e.row, e.col});
    }
    return res;
}

S2Activity s2_forward(const SpikeWave& wave, const std::vector<SynapseTensor>& tensors,
                      double theta) {
    require(!tensors.empty(), "s2_forward: no lattices");
    int w = tensors[0].w;
    for (const SynapseTensor& t : tensors) {
        require(t.w == w, "s2_forward: lattices disagree on receptive field side");
    }
    require(wave.rows >= w && wave.cols >= w,
            "s2_forward: receptive field larger than the input grid");

    S2Activity act;
    act.lattices = static_cast<int>(tensors.size());
    act.rows = wave.rows - w + 1;
    act.cols = wave.cols - w + 1;
    size_t total = static_cast<size_t>(act.lattices) * act.rows * act.cols;
    act.spike_time.assign(total, 0);
    act.potential.assign(total, 0.0);

    for (const SpikeEvent& e : wave.events) {
        int i_lo = std::max(0, e.row - w + 1);
        int i_hi = std::min(act.rows - 1, e.row);
        int j_lo = std::max(0, e.col - w + 1);
        int j_hi = std::min(act.cols - 1, e.col);
        for (int l = 0; l < act.lattices; ++l) {
            const SynapseTensor& ten = tensors[l];
            for (int i = i_lo; i <= i_hi; ++i) {
                for (int j = j_lo; j <= j_hi; ++j) {
                    size_t id = act.idx(l, i, j);
                    if (act.spike_time[id] != 0) continue;  // fired, now inert
                    act.potential[id] += ten.at(e.map, e.row - i, e.col - j);
                    if (act.potential[id] >= theta) {
                        act.spike_time[id] = e.t;
                    }
                }
            }
        }
    }
    return act;
}

C2Times c2_pool(const S2Activity& activity) {
    C2Times out;
    out.first_spike.assign(activity.lattices, std::nullopt);
    for (int l = 0; l < activity.lattices; ++l) {
        int best = 0;
        for (int r = 0; r < activity.rows; ++r) {
            for (int c = 0; c < activity.cols; ++c) {
                int t = activity.time_at(l, r, c);
                if (t != 0 && (best == 0 || t < best)) best = t;
            }
        }
        if (best != 0) out.first_spike[l] = best;
    }
    return out;
}

GroupMap contiguous_groups(int lattices, int groups) {
    require(groups >= 1, "contiguous_groups: need at least one group");
    require(lattices >= groups, "contiguous_groups: fewer lattices (" +
                                    std::to_string(lattices) + ") than class groups (" +
                                    std::to_string(groups) + ")");
    GroupMap gm;
    gm.group_count = groups;
    gm.group_of.resize(lattices);
    int base = lattices / groups;
    int extra = lattices % groups;  // first groups absorb the remainder
    int l = 0;
    for (int g = 0; g < groups; ++g) {
        int size = base + (g < extra ? 1 : 0);
        for (int i = 0; i < size; ++i) gm.group_of[l++] = g;
    }
    return gm;
}

Decision decide(const C2Times& times, const GroupMap& groups) {
    require(times.first_spike.size() == groups.group_of.size(),
            "decide: group map size does not match lattice count");
    Decision d;
    for (size_t l = 0; l < times.first_spike.size(); ++l) {
        if (!times.first_spike[l]) continue;
        int t = *times.first_spike[l];
        if (!d.time || t < *d.time) {  // strict: ties keep the lowest index
            d.time = t;
            d.lattice = static_cast<int>(l);
        }
    }
    if (d.lattice) d.group = groups.group_of[*d.lattice];
    return d;
}

namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'S', 'Y', 'N', '0', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_tensors(const std::string& path, const std::vector<SynapseTensor>& tensors,
                  double theta, const std::string& sidecar_text) {
    if (tensors.empty()) throw std::invalid_argument("save_tensors: nothing to save");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_tensors: cannot open '" + path + "'");
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(tensors.size()));
    put_u32(os, static_cast<uint32_t>(tensors[0].w));
    put_f64(os, theta);
    for (const SynapseTensor& t : tensors) {
        if (t.w != tensors[0].w) {
            throw std::invalid_argument("save_tensors: mixed receptive field sides");
        }
        for (double wv : t.weights) put_f64(os, wv);
    }
    if (!os) throw std::runtime_error("save_tensors: short write to '" + path + "'");
    os.close();

    std::ofstream meta(path + ".meta");
    if (!meta) throw std::runtime_error("save_tensors: cannot open '" + path + ".meta'");
    meta << sidecar_text;
    if (!meta) throw std::runtime_error("save_tensors: short write to '" + path + ".meta'");
}

TensorFile load_tensors(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_tensors: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("load_tensors: '" + path + "' is not a weight container");
    }
    uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw std::runtime_error("load_tensors: '" + path + "' has unsupported version " +
                                 std::to_string(version));
    }
    uint32_t n = get_u32(is);
    uint32_t w = get_u32(is);
    TensorFile tf;
    tf.theta = get_f64(is);
    if (!is || n == 0 || w == 0) {
        throw std::runtime_error("load_tensors: '" + path + "' has a corrupt header");
    }
    tf.tensors.resize(n);
    for (uint32_t l = 0; l < n; ++l) {
        SynapseTensor& t = tf.tensors[l];
        t.w = static_cast<int>(w);
        t.weights.resize(static_cast<size_t>(kOrientations) * w * w);
        for (double& wv : t.weights) wv = get_f64(is);
    }
    if (!is) throw std::runtime_error("load_tensors: '" + path + "' is truncated");
    return tf;
}

}  // namespace rsnn
