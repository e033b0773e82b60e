// Fraunhofer propagation: centered unitary 2D DFT and its exact adjoint.
//
// forward(x) = fftshift(DFT(x)) / sqrt(H*W)
// adjoint(y) = IDFT(ifftshift(y)) / sqrt(H*W)   (IDFT = unnormalized inverse)
//
// The pair is unitary: adjoint(forward(x)) == x and <Fx, y> == <x, F*y>.
// The DC term sits at (floor(H/2), floor(W/2)) so replay images are centered.
#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include "holo/errors.hpp"
#include "holo/types.hpp"

namespace holo {

namespace detail {

// The FFTW planner is not thread-safe; plan creation/destruction is serialized.
// fftw_execute on distinct buffers is safe without the lock.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

enum class TransformDir { Forward, Backward };

inline void run_dft_2d(std::vector<std::complex<double>>& data, int h, int w,
                       TransformDir dir) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    const int sign = dir == TransformDir::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

inline void require_transformable(const ComplexField& field) {
    if (field.height < 2 || field.width < 2) {
        throw InvalidInputError("fraunhofer: field must be at least 2x2, got " +
                                shape_string(field.height, field.width));
    }
}

}  // namespace detail

/// Lifts a phase mask onto the unit circle: out[j] = exp(i * phase[j]).
inline ComplexField phase_to_field(const PhaseMask& phase) {
    ComplexField out(phase.height, phase.width);
    for (size_t i = 0; i < phase.values.size(); ++i) {
        const double p = phase.values[i];
        if (!std::isfinite(p)) {
            throw InvalidInputError("phase_to_field: non-finite phase value");
        }
        out.values[i] = {std::cos(p), std::sin(p)};
    }
    return out;
}

/// Far-field propagation: centered unitary 2D DFT. Energy-preserving.
inline ComplexField fraunhofer_forward(const ComplexField& field) {
    detail::require_transformable(field);
    const int h = field.height, w = field.width;
    std::vector<std::complex<double>> data(field.values);
    detail::run_dft_2d(data, h, w, detail::TransformDir::Forward);

    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    ComplexField out(h, w);
    for (int r = 0; r < h; ++r) {
        const int rs = (r + h / 2) % h;
        for (int c = 0; c < w; ++c) {
            const int cs = (c + w / 2) % w;
            out.values[static_cast<size_t>(rs) * w + cs] =
                data[static_cast<size_t>(r) * w + c] * scale;
        }
    }
    return out;
}

/// Exact adjoint (= inverse) of fraunhofer_forward.
inline ComplexField fraunhofer_adjoint(const ComplexField& field) {
    detail::require_transformable(field);
    const int h = field.height, w = field.width;
    std::vector<std::complex<double>> data(field.size());
    for (int r = 0; r < h; ++r) {
        const int rs = (r + h / 2) % h;
        for (int c = 0; c < w; ++c) {
            const int cs = (c + w / 2) % w;
            data[static_cast<size_t>(r) * w + c] =
                field.values[static_cast<size_t>(rs) * w + cs];
        }
    }
    detail::run_dft_2d(data, h, w, detail::TransformDir::Backward);

    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    ComplexField out(h, w);
    for (size_t i = 0; i < data.size(); ++i) out.values[i] = data[i] * scale;
    return out;
}

/// Per-pixel modulus of a complex field.
inline AmplitudeImage amplitude(const ComplexField& field) {
    AmplitudeImage out(field.height, field.width);
    for (size_t i = 0; i < field.values.size(); ++i) {
        out.values[i] = std::abs(field.values[i]);
    }
    return out;
}

}  // namespace holo
