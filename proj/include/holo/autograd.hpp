// End-to-end analytic gradient of the scalar loss with respect to the phase
// mask. The chain is
//
//   phase -> h = exp(i*phase) -> F = forward(h) -> A = |F| -> R = c*A -> loss
//
// with c = sqrt(sum T^2 / sum A^2) (the pipeline's energy normalization).
// Backward pass: per-pixel loss gradient, normalization Jacobian, modulus
// direction F/|F|, adjoint transform, then projection onto the phase
// tangent d(loss)/d(phase_j) = Im(conj(h_j) * b_j).
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "holo/errors.hpp"
#include "holo/field.hpp"
#include "holo/loss.hpp"
#include "holo/types.hpp"

namespace holo {

// Pixels with |F| below this get zero upstream contribution (the modulus is
// not differentiable at 0; the subgradient 0 keeps everything finite).
inline constexpr double kAmplitudeGradFloor = 1e-12;

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;  // d(loss)/d(phase), same layout as the mask
};

/// Computes the pipeline loss and its exact gradient with respect to the
/// phase. When raw_recon_out is non-null it receives the un-normalized
/// reconstruction amplitude, saving the caller a second transform.
inline LossAndGrad loss_and_grad(const PhaseMask& phase, const AmplitudeImage& target,
                                 LossKind kind, AmplitudeImage* raw_recon_out = nullptr) {
    require_same_shape(phase, target, "loss_and_grad");
    const size_t n = phase.size();

    const ComplexField holo_field = phase_to_field(phase);
    const ComplexField far_field = fraunhofer_forward(holo_field);
    const AmplitudeImage raw = amplitude(far_field);
    if (raw_recon_out != nullptr) *raw_recon_out = raw;

    double target_energy = 0.0, raw_energy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        target_energy += target.values[i] * target.values[i];
        raw_energy += raw.values[i] * raw.values[i];
    }
    if (target_energy <= 0.0) {
        throw InvalidInputError("loss_and_grad: target image is all zero");
    }
    if (!(raw_energy > 0.0)) {
        throw NumericError("loss_and_grad: degenerate reconstruction energy");
    }
    const double scale = std::sqrt(target_energy / raw_energy);

    AmplitudeImage recon(phase.height, phase.width);
    for (size_t i = 0; i < n; ++i) recon.values[i] = scale * raw.values[i];

    LossAndGrad out;
    out.loss = loss_value(kind, target, recon);
    if (!std::isfinite(out.loss)) {
        throw NumericError("loss_and_grad: non-finite loss value");
    }

    std::vector<double> recon_grad = loss_grad(kind, target, recon);
    if (kind == LossKind::CE) {
        // Clamp boundary treated as locally constant.
        for (size_t i = 0; i < n; ++i) {
            if (recon.values[i] <= kCeClamp) recon_grad[i] = 0.0;
        }
    }

    // Normalization Jacobian: R = c(A) * A with c = sqrt(E_T / sum A^2).
    double dot = 0.0;
    for (size_t i = 0; i < n; ++i) dot += recon_grad[i] * raw.values[i];
    ComplexField upstream(phase.height, phase.width);
    for (size_t i = 0; i < n; ++i) {
        const double amp_grad =
            scale * (recon_grad[i] - raw.values[i] * dot / raw_energy);
        const double mag = raw.values[i];
        upstream.values[i] = mag < kAmplitudeGradFloor
                                 ? std::complex<double>(0.0, 0.0)
                                 : far_field.values[i] * (amp_grad / mag);
    }

    const ComplexField back = fraunhofer_adjoint(upstream);
    out.grad.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.grad[i] = std::imag(std::conj(holo_field.values[i]) * back.values[i]);
        if (!std::isfinite(out.grad[i])) {
            throw NumericError("loss_and_grad: non-finite gradient component");
        }
    }
    return out;
}

}  // namespace holo
