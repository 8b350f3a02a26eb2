#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsnn/rng.hpp"
#include "rsnn/spikes.hpp"

namespace rsnn {

// Shared synapse block of one integrate-and-fire lattice: one weight per
// (orientation map, row offset, col offset), each in [0, 1].
struct SynapseTensor {
    int w = 0;                    // receptive field side, in pooled-grid cells
    std::vector<double> weights;  // (map, dr, dc) row-major, kOrientations maps

    double& at(int m, int dr, int dc) {
        return weights[(static_cast<size_t>(m) * w + dr) * w + dc];
    }
    double at(int m, int dr, int dc) const {
        return weights[(static_cast<size_t>(m) * w + dr) * w + dc];
    }
};

SynapseTensor init_synapse_tensor(int w, double mean, double stddev, Rng& rng);

// Earliest-spike downsampling: each output cell takes the minimum spike time
// over its pool_window x pool_window input window sliding at the given
// stride, per map. Output re-serialized ascending by pooled time, ties on
// (map, row, col), and renumbered t = 1..K.
SpikeWave c1_pool(const SpikeWave& wave, int pool_window, int stride);

// Keep only the earliest spike across maps at each (row, col) position.
SpikeWave cross_map_inhibit(const SpikeWave& wave);

// Same-map lateral inhibition, single pass in input order: each event delays
// every later same-map event within the radius by
// ceil(strength * (1 - d/(radius+1))); penalties accumulate. The wave is then
// re-serialized ascending by adjusted latency, ties on (map, row, col).
SpikeWave local_inhibit(const SpikeWave& wave, int radius, double strength);

// Final state of every S2 neuron after one wave: spike time (0 = silent) and
// membrane potential. Neurons integrate shared weights over their receptive
// field, never leak, and become inert once fired, freezing the potential.
struct S2Activity {
    int lattices = 0, rows = 0, cols = 0;
    std::vector<int> spike_time;
    std::vector<double> potential;

    size_t idx(int l, int r, int c) const {
        return (static_cast<size_t>(l) * rows + r) * cols + c;
    }
    int time_at(int l, int r, int c) const { return spike_time[idx(l, r, c)]; }
    double potential_at(int l, int r, int c) const { return potential[idx(l, r, c)]; }
};

// Event-driven sweep of all lattices over one wave. Every tensor must share
// the same receptive field side, which must fit inside the wave grid.
// A neuron fires when its potential reaches theta.
S2Activity s2_forward(const SpikeWave& wave, const std::vector<SynapseTensor>& tensors,
                      double theta);

// Per-lattice earliest spike time, nullopt where the lattice stayed silent.
struct C2Times {
    std::vector<std::optional<int>> first_spike;
};

C2Times c2_pool(const S2Activity& activity);

// Lattice -> class group assignment (0-based groups).
struct GroupMap {
    std::vector<int> group_of;
    int group_count = 0;
};

// Contiguous equal blocks, remainder spread over the first groups. Throws
// std::invalid_argument when lattices < groups.
GroupMap contiguous_groups(int lattices, int groups);

// Readout: the lattice with the earliest first-spike wins (ties to the
// lowest index) and votes for its group. No spike anywhere = silent, all
// fields empty.
struct Decision {
    std::optional<int> group;
    std::optional<int> lattice;
    std::optional<int> time;

    bool silent() const { return !group.has_value(); }
};

Decision decide(const C2Times& times, const GroupMap& groups);

// Flat binary container for one level's lattices: fixed header (magic,
// version, lattice count, receptive field side, threshold) followed by the
// raw weights as little-endian float64. A plain-text sidecar is written next
// to it at path + ".meta".
void save_tensors(const std::string& path, const std::vector<SynapseTensor>& tensors,
                  double theta, const std::string& sidecar_text);

struct TensorFile {
    std::vector<SynapseTensor> tensors;
    double theta = 0.0;
};

TensorFile load_tensors(const std::string& path);

}  // namespace rsnn
