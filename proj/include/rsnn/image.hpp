#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsnn {

// Grayscale raster, row-major, intensities in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

Image make_image(int width, int height, double fill = 0.0);

// Decode a PNG/JPEG/BMP file, average the color channels, rescale to [0, 1]
// and bilinear-resize to a square of side target_size. Throws
// std::runtime_error naming the path when the file cannot be decoded.
Image load_grayscale(const std::string& path, int target_size);

// 8-bit encode, format picked from the extension.
void save_grayscale(const Image& img, const std::string& path);

Image resize_bilinear(const Image& img, int out_width, int out_height);

struct OcclusionSpec {
    int blob_count = 0;
    double blob_radius = 0.0;
    double softness_sigma = 1.0;
    uint64_t seed = 0;
};

// Mask blob_count random disks toward mid-gray: inside the radius the pixel
// becomes 0.5 exactly, outside it the mask decays with a Gaussian skirt.
Image occlude(const Image& img, const OcclusionSpec& spec);

enum class Band { LSF, ISF, HSF, Full };

Band parse_band(const std::string& name);
std::string band_name(Band band);

// Spatial-frequency band selection for one processing level. By default the
// band is realized downstream by the level's filter window size and this is
// a pass-through. With explicit_prefilter a difference-of-Gaussians
// band-pass derived from the window (sigma_low = window/2, sigma_high =
// window/6) is applied and the signed response recentered on 0.5. Band::Full
// is always a pass-through.
Image band_image(const Image& img, Band band, int gabor_window, bool explicit_prefilter);

// Separable Gaussian blur. The kernel is renormalized per pixel at the
// borders so constant images stay exactly constant.
Image gaussian_blur(const Image& img, double sigma);

}  // namespace rsnn
