#pragma once

#include <vector>

#include "rsnn/gabor.hpp"

namespace rsnn {

struct SpikeEvent {
    int t = 0;  // 1-based global time step
    int map = 0, row = 0, col = 0;
};

// Serialized spike wave: exactly one event per time step, t = 1..K in event
// order, all addresses distinct.
struct SpikeWave {
    int maps = 0, rows = 0, cols = 0;
    std::vector<SpikeEvent> events;
};

// Intensity-to-latency rank order code over saliency |response|. Cells at or
// below the activation floor stay silent, stronger cells spike earlier,
// saliency ties break on ascending (map, row, col).
SpikeWave encode_latency(const FeatureMapStack& stack, double activation_floor);

// Dense spike-time lookup per address, 0 where silent.
struct SpikeRaster {
    int maps = 0, rows = 0, cols = 0;
    std::vector<int> times;

    explicit SpikeRaster(const SpikeWave& wave);
    int at(int m, int r, int c) const {
        return times[(static_cast<size_t>(m) * rows + r) * cols + c];
    }
};

}  // namespace rsnn
