#include "rsnn/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "rsnn/rng.hpp"

namespace rsnn {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

Image make_image(int width, int height, double fill) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("make_image: zero-area raster " + std::to_string(width) +
                                    "x" + std::to_string(height));
    }
    Image img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height, fill);
    return img;
}

Image load_grayscale(const std::string& path, int target_size) {
    if (target_size <= 0) {
        throw std::invalid_argument("load_grayscale: target size must be positive");
    }
    cv::Mat raw = cv::imread(path, cv::IMREAD_COLOR);
    if (raw.empty()) {
        throw std::runtime_error("load_grayscale: cannot decode '" + path + "'");
    }
    Image img = make_image(raw.cols, raw.rows);
    for (int r = 0; r < raw.rows; ++r) {
        const cv::Vec3b* row = raw.ptr<cv::Vec3b>(r);
        for (int c = 0; c < raw.cols; ++c) {
            // channel average, not a weighted luma
            double sum = row[c][0] + row[c][1] + row[c][2];
            img.at(r, c) = sum / (3.0 * 255.0);
        }
    }
    return resize_bilinear(img, target_size, target_size);
}

void save_grayscale(const Image& img, const std::string& path) {
    cv::Mat out(img.height, img.width, CV_8UC1);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            out.at<uint8_t>(r, c) = static_cast<uint8_t>(std::lround(clamp01(img.at(r, c)) * 255.0));
        }
    }
    if (!cv::imwrite(path, out)) {
        throw std::runtime_error("save_grayscale: cannot write '" + path + "'");
    }
}

Image resize_bilinear(const Image& img, int out_width, int out_height) {
    if (img.width == 0 || img.height == 0) {
        throw std::invalid_argument("resize_bilinear: empty input");
    }
    if (out_width == img.width && out_height == img.height) {
        return img;
    }
    Image out = make_image(out_width, out_height);
    // pixel centers at integer coordinates, edges clamped
    double sx = out_width > 1 ? double(img.width - 1) / (out_width - 1) : 0.0;
    double sy = out_height > 1 ? double(img.height - 1) / (out_height - 1) : 0.0;
    for (int r = 0; r < out_height; ++r) {
        double fy = r * sy;
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, img.height - 1);
        double wy = fy - y0;
        for (int c = 0; c < out_width; ++c) {
            double fx = c * sx;
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, img.width - 1);
            double wx = fx - x0;
            double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
            double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
            out.at(r, c) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

Image occlude(const Image& img, const OcclusionSpec& spec) {
    if (spec.blob_count < 0) {
        throw std::invalid_argument("occlude: negative blob count");
    }
    if (spec.blob_count > 0 && (spec.blob_radius <= 0.0 || spec.softness_sigma <= 0.0)) {
        throw std::invalid_argument("occlude: radius and softness must be positive");
    }
    Image out = img;
    Rng rng(spec.seed);
    for (int b = 0; b < spec.blob_count; ++b) {
        double cx = rng.uniform(0.0, img.width > 1 ? img.width - 1.0 : 1.0);
        double cy = rng.uniform(0.0, img.height > 1 ? img.height - 1.0 : 1.0);
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) {
                double d = std::hypot(c - cx, r - cy);
                double m;
                if (d <= spec.blob_radius) {
                    m = 1.0;
                } else {
                    double over = d - spec.blob_radius;
                    m = std::exp(-(over * over) /
                                 (2.0 * spec.softness_sigma * spec.softness_sigma));
                }
                out.at(r, c) = clamp01(m * 0.5 + (1.0 - m) * out.at(r, c));
            }
        }
    }
    return out;
}

Band parse_band(const std::string& name) {
    std::string low = name;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (low == "lsf") return Band::LSF;
    if (low == "isf") return Band::ISF;
    if (low == "hsf") return Band::HSF;
    if (low == "full") return Band::Full;
    throw std::invalid_argument("unknown band '" + name + "' (expected lsf|isf|hsf|full)");
}

std::string band_name(Band band) {
    switch (band) {
        case Band::LSF: return "lsf";
        case Band::ISF: return "isf";
        case Band::HSF: return "hsf";
        case Band::Full: return "full";
    }
    return "?";
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) {
        return img;
    }
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    }
    // horizontal then vertical pass, renormalizing by the in-bounds mass so
    // constants are preserved at the borders
    Image tmp = make_image(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double acc = 0.0, mass = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int cc = c + i;
                if (cc < 0 || cc >= img.width) continue;
                acc += k[i + radius] * img.at(r, cc);
                mass += k[i + radius];
            }
            tmp.at(r, c) = acc / mass;
        }
    }
    Image out = make_image(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double acc = 0.0, mass = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int rr = r + i;
                if (rr < 0 || rr >= img.height) continue;
                acc += k[i + radius] * tmp.at(rr, c);
                mass += k[i + radius];
            }
            out.at(r, c) = acc / mass;
        }
    }
    return out;
}

Image band_image(const Image& img, Band band, int gabor_window, bool explicit_prefilter) {
    if (!explicit_prefilter || band == Band::Full) {
        // default realization: the level's filter window does the band selection
        return img;
    }
    double sigma_low = gabor_window / 2.0;   // coarse structure bound
    double sigma_high = gabor_window / 6.0;  // fine structure bound
    Image fine = gaussian_blur(img, sigma_high);
    Image coarse = gaussian_blur(img, sigma_low);
    Image out = make_image(img.width, img.height);
    for (size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = clamp01(0.5 + (fine.pixels[i] - coarse.pixels[i]));
    }
    return out;
}

}  // namespace rsnn
