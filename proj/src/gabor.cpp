#include "rsnn/gabor.hpp"

#include <cmath>
#include <stdexcept>

namespace rsnn {

const std::array<double, kOrientations> kOrientationAngles = {0.0, M_PI / 4.0, M_PI / 2.0,
                                                              3.0 * M_PI / 4.0};

KernelBank make_gabor_bank(int window) {
    if (window < 3 || window % 2 == 0) {
        throw std::invalid_argument("make_gabor_bank: window must be odd and >= 3, got " +
                                    std::to_string(window));
    }
    double lambda = window / 2.0;
    double sigma = 0.8 * lambda;
    double gamma = 0.5;  // envelope elongated along the preferred bar
    int half = window / 2;

    KernelBank bank;
    for (int k = 0; k < kOrientations; ++k) {
        double phi = kOrientationAngles[k];
        GaborKernel& kern = bank.kernels[k];
        kern.window = window;
        kern.orientation = phi;
        kern.weights.resize(static_cast<size_t>(window) * window);
        double sum = 0.0;
        for (int r = 0; r < window; ++r) {
            for (int c = 0; c < window; ++c) {
                double x = c - half;
                double y = r - half;
                // u runs along the bar, v across it; the carrier oscillates
                // across the bar so an aligned bright stroke peaks at center
                double u = x * std::cos(phi) + y * std::sin(phi);
                double v = -x * std::sin(phi) + y * std::cos(phi);
                double env = std::exp(-(v * v + gamma * gamma * u * u) / (2.0 * sigma * sigma));
                double val = env * std::cos(2.0 * M_PI * v / lambda);
                kern.weights[static_cast<size_t>(r) * window + c] = val;
                sum += val;
            }
        }
        // remove the DC component so flat patches give zero response
        double mean = sum / (static_cast<double>(window) * window);
        for (double& wv : kern.weights) {
            wv -= mean;
        }
    }
    return bank;
}

FeatureMapStack convolve(const Image& img, const KernelBank& bank) {
    int win = bank.window();
    int half = win / 2;
    FeatureMapStack stack;
    stack.maps = kOrientations;
    stack.rows = img.height;
    stack.cols = img.width;
    stack.values.assign(static_cast<size_t>(kOrientations) * img.height * img.width, 0.0);
    for (int k = 0; k < kOrientations; ++k) {
        const GaborKernel& kern = bank.kernels[k];
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) {
                double acc = 0.0;
                // true convolution: kernel indexed against displacement,
                // out-of-frame pixels read as zero
                for (int kr = 0; kr < win; ++kr) {
                    int ir = r - (kr - half);
                    if (ir < 0 || ir >= img.height) continue;
                    for (int kc = 0; kc < win; ++kc) {
                        int ic = c - (kc - half);
                        if (ic < 0 || ic >= img.width) continue;
                        acc += kern.at(kr, kc) * img.at(ir, ic);
                    }
                }
                stack.at(k, r, c) = acc;
            }
        }
    }
    return stack;
}

double max_abs(const FeatureMapStack& stack) {
    double m = 0.0;
    for (double v : stack.values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace rsnn
