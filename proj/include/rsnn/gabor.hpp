#pragma once

#include <array>
#include <vector>

#include "rsnn/image.hpp"

namespace rsnn {

inline constexpr int kOrientations = 4;

// preferred bar orientations in radians, measured from the column axis
extern const std::array<double, kOrientations> kOrientationAngles;

struct GaborKernel {
    int window = 0;               // odd side length
    double orientation = 0.0;     // bar orientation this kernel prefers
    std::vector<double> weights;  // window x window, row-major, zero mean

    double at(int row, int col) const { return weights[static_cast<size_t>(row) * window + col]; }
};

struct KernelBank {
    std::array<GaborKernel, kOrientations> kernels;
    int window() const { return kernels[0].window; }
};

// Gabor bank at the four canonical orientations with wavelength = window/2,
// envelope sigma = 0.8 * wavelength, aspect ratio 0.5, cosine phase 0.
// Kernels are mean-subtracted so flat image regions give zero response.
// Throws std::invalid_argument unless window is odd and >= 3.
KernelBank make_gabor_bank(int window);

// Dense signed filter responses, one map per kernel.
struct FeatureMapStack {
    int maps = 0, rows = 0, cols = 0;
    std::vector<double> values;  // (map, row, col) row-major

    double& at(int m, int r, int c) {
        return values[(static_cast<size_t>(m) * rows + r) * cols + c];
    }
    double at(int m, int r, int c) const {
        return values[(static_cast<size_t>(m) * rows + r) * cols + c];
    }
};

// True 2-D convolution (kernel flipped), zero padding, same-size output.
FeatureMapStack convolve(const Image& img, const KernelBank& bank);

double max_abs(const FeatureMapStack& stack);

}  // namespace rsnn
