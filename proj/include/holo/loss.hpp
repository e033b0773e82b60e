// MSE and cross-entropy losses over flattened images, with analytic
// per-pixel derivatives with respect to the reconstruction.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "holo/errors.hpp"
#include "holo/types.hpp"

namespace holo {

enum class LossKind { MSE, CE };

// Clamp inside the CE log so zero-amplitude pixels stay finite.
inline constexpr double kCeClamp = 1e-10;

/// (1/n) * sum (X_i - Y_i)^2 over the flattened images.
inline double mse(const AmplitudeImage& target, const AmplitudeImage& recon) {
    require_same_shape(target, recon, "mse");
    const size_t n = target.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = target.values[i] - recon.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

/// -(1/n) * sum X_i * ln(max(Y_i, 1e-10)); natural logarithm.
inline double ce(const AmplitudeImage& target, const AmplitudeImage& recon) {
    require_same_shape(target, recon, "ce");
    const size_t n = target.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += target.values[i] * std::log(std::max(recon.values[i], kCeClamp));
    }
    return -acc / static_cast<double>(n);
}

/// d(mse)/d(recon): (2/n) * (Y_i - X_i).
inline std::vector<double> mse_grad(const AmplitudeImage& target,
                                    const AmplitudeImage& recon) {
    require_same_shape(target, recon, "mse_grad");
    const size_t n = target.size();
    std::vector<double> grad(n);
    const double scale = 2.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        grad[i] = scale * (recon.values[i] - target.values[i]);
    }
    return grad;
}

/// d(ce)/d(recon): -X_i / (n * max(Y_i, 1e-10)). Zero wherever X_i = 0.
/// Matches finite differences only where the clamp is inactive (Y_i > 1e-10).
inline std::vector<double> ce_grad(const AmplitudeImage& target,
                                   const AmplitudeImage& recon) {
    require_same_shape(target, recon, "ce_grad");
    const size_t n = target.size();
    std::vector<double> grad(n);
    for (size_t i = 0; i < n; ++i) {
        grad[i] = target.values[i] == 0.0
                      ? 0.0
                      : -target.values[i] /
                            (static_cast<double>(n) * std::max(recon.values[i], kCeClamp));
    }
    return grad;
}

inline double loss_value(LossKind kind, const AmplitudeImage& target,
                         const AmplitudeImage& recon) {
    return kind == LossKind::MSE ? mse(target, recon) : ce(target, recon);
}

inline std::vector<double> loss_grad(LossKind kind, const AmplitudeImage& target,
                                     const AmplitudeImage& recon) {
    return kind == LossKind::MSE ? mse_grad(target, recon) : ce_grad(target, recon);
}

}  // namespace holo
