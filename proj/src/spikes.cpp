#include "rsnn/spikes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsnn {

SpikeWave encode_latency(const FeatureMapStack& stack, double activation_floor) {
    if (activation_floor < 0.0) {
        throw std::invalid_argument("encode_latency: negative activation floor");
    }
    struct Cell {
        double s;
        int map, row, col;
    };
    std::vector<Cell> cells;
    for (int m = 0; m < stack.maps; ++m) {
        for (int r = 0; r < stack.rows; ++r) {
            for (int c = 0; c < stack.cols; ++c) {
                double s = std::abs(stack.at(m, r, c));
                if (s > activation_floor) {
                    cells.push_back({s, m, r, c});
                }
            }
        }
    }
    // stronger first; equal saliency falls back to address order so the
    // serialization never depends on traversal order
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.map != b.map) return a.map < b.map;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    SpikeWave wave;
    wave.maps = stack.maps;
    wave.rows = stack.rows;
    wave.cols = stack.cols;
    wave.events.reserve(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
        wave.events.push_back({static_cast<int>(i) + 1, cells[i].map, cells[i].row, cells[i].col});
    }
    return wave;
}

SpikeRaster::SpikeRaster(const SpikeWave& wave)
    : maps(wave.maps), rows(wave.rows), cols(wave.cols),
      times(static_cast<size_t>(wave.maps) * wave.rows * wave.cols, 0) {
    for (const SpikeEvent& e : wave.events) {
        times[(static_cast<size_t>(e.map) * rows + e.row) * cols + e.col] = e.t;
    }
}

}  // namespace rsnn
