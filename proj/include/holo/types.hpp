// Core grid types: phase masks, complex fields and amplitude images.
// All grids are row-major with double precision throughout; 8-bit data
// exists only at the image I/O boundary.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "holo/errors.hpp"

namespace holo {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Per-pixel phase in radians; the optimization variable of the pipeline.
/// Canonical range is [0, 2pi) but intermediate values may be any real.
struct PhaseMask {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // row-major, height*width

    PhaseMask() = default;
    PhaseMask(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}

    size_t size() const { return values.size(); }
    double& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
};

/// Complex amplitude per pixel; hologram field and its far-field transform.
struct ComplexField {
    int height = 0;
    int width = 0;
    std::vector<std::complex<double>> values;

    ComplexField() = default;
    ComplexField(int h, int w)
        : height(h), width(w), values(static_cast<size_t>(h) * w) {}

    size_t size() const { return values.size(); }
    std::complex<double>& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
    std::complex<double> at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
};

/// Nonnegative real image; holds targets and reconstructions.
struct AmplitudeImage {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    AmplitudeImage() = default;
    AmplitudeImage(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}

    size_t size() const { return values.size(); }
    double& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
};

inline bool same_shape(int h1, int w1, int h2, int w2) { return h1 == h2 && w1 == w2; }

inline std::string shape_string(int h, int w) {
    return std::to_string(h) + "x" + std::to_string(w);
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (!same_shape(a.height, a.width, b.height, b.width)) {
        throw ShapeError(std::string(what) + ": shape mismatch " +
                         shape_string(a.height, a.width) + " vs " +
                         shape_string(b.height, b.width));
    }
}

/// Maps any finite phase into [0, 2pi) by modulo 2pi.
inline double canonical_phase(double phase) {
    double p = std::fmod(phase, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p >= kTwoPi) p = 0.0;  // fmod rounding can land exactly on 2pi
    return p;
}

/// Canonicalizes every pixel of a mask into [0, 2pi).
inline PhaseMask canonicalize(const PhaseMask& mask) {
    PhaseMask out(mask.height, mask.width);
    for (size_t i = 0; i < mask.values.size(); ++i) {
        if (!std::isfinite(mask.values[i])) {
            throw InvalidInputError("canonicalize: non-finite phase value");
        }
        out.values[i] = canonical_phase(mask.values[i]);
    }
    return out;
}

/// 180-degree rotation about the DC pixel (floor(H/2), floor(W/2)):
/// out[u,v] = in[(2*ch - u) mod H, (2*cw - v) mod W]. For odd dimensions this
/// is the usual image rotation; for even dimensions row 0 and column 0 map to
/// themselves, matching the replay-field symmetry of a real-valued hologram.
inline AmplitudeImage rotate180_about_dc(const AmplitudeImage& image) {
    const int h = image.height, w = image.width;
    AmplitudeImage out(h, w);
    for (int r = 0; r < h; ++r) {
        const int rr = ((2 * (h / 2) - r) % h + h) % h;
        for (int c = 0; c < w; ++c) {
            const int cc = ((2 * (w / 2) - c) % w + w) % w;
            out.at(r, c) = image.at(rr, cc);
        }
    }
    return out;
}

}  // namespace holo
