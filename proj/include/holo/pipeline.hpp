// Optimization loop: seeded initialization, per-iteration loss/MSE records,
// plus binary quantization and target symmetrization for binary-phase
// modulators.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "holo/autograd.hpp"
#include "holo/errors.hpp"
#include "holo/field.hpp"
#include "holo/loss.hpp"
#include "holo/optim.hpp"
#include "holo/types.hpp"

namespace holo {

enum class OptimizerKind { Adam, Lbfgs };

struct RunConfig {
    OptimizerKind optimizer = OptimizerKind::Lbfgs;
    LossKind loss = LossKind::CE;
    double lr = 0.1;
    int iterations = 100;
    uint64_t seed = 0;
    int height = 128;
    int width = 128;
    int lbfgs_history = 20;
    int save_every = 1;
};

struct RunRecord {
    std::vector<double> loss_history;  // training loss per iteration
    std::vector<double> mse_history;   // peak-normalized MSE readout per iteration
    PhaseMask final_phase;
    long rejected_pairs = 0;           // L-BFGS curvature-guard rejections
    bool diverged = false;
    int diverged_at = -1;
};

/// Called with the raw reconstruction amplitude every save_every iterations.
using ReconObserver = std::function<void(int iteration, const AmplitudeImage& recon)>;

/// Seeded random phase mask, i.i.d. uniform on [0, 2pi).
///
/// Uses std::mt19937_64 with the 53-bit mantissa mapping u = (x >> 11) * 2^-53,
/// so identical (dims, seed) produce bit-identical masks on any platform.
inline PhaseMask initial_phase(int height, int width, uint64_t seed) {
    if (height < 2 || width < 2) {
        throw InvalidInputError("initial_phase: dimensions must be at least 2x2, got " +
                                shape_string(height, width));
    }
    std::mt19937_64 rng(seed);
    PhaseMask mask(height, width);
    for (double& p : mask.values) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        p = u * kTwoPi;
    }
    return mask;
}

struct NormalizedRecon {
    AmplitudeImage image;
    bool degenerate_scale = false;
};

/// Scales raw so its energy matches the target's: out = raw * sqrt(sum T^2 / sum raw^2).
/// An all-zero raw is returned unchanged with the degenerate flag set.
inline NormalizedRecon normalize_recon(const AmplitudeImage& raw,
                                       const AmplitudeImage& target) {
    require_same_shape(raw, target, "normalize_recon");
    double target_energy = 0.0, raw_energy = 0.0;
    for (size_t i = 0; i < raw.size(); ++i) {
        target_energy += target.values[i] * target.values[i];
        raw_energy += raw.values[i] * raw.values[i];
    }
    if (target_energy <= 0.0) {
        throw InvalidInputError("normalize_recon: target image is all zero");
    }
    if (raw_energy <= 0.0) {
        return {raw, true};
    }
    const double scale = std::sqrt(target_energy / raw_energy);
    NormalizedRecon out{AmplitudeImage(raw.height, raw.width), false};
    for (size_t i = 0; i < raw.size(); ++i) out.image.values[i] = scale * raw.values[i];
    return out;
}

/// Maps each pixel to the nearer of {0, pi} by circular distance:
/// pi iff phase in [pi/2, 3pi/2), else 0. Idempotent.
inline PhaseMask quantize_binary(const PhaseMask& phase) {
    PhaseMask out(phase.height, phase.width);
    const double half_pi = kTwoPi / 4.0;
    const double three_half_pi = 3.0 * kTwoPi / 4.0;
    for (size_t i = 0; i < phase.values.size(); ++i) {
        const double p = canonical_phase(phase.values[i]);
        out.values[i] = (p >= half_pi && p < three_half_pi) ? kTwoPi / 2.0 : 0.0;
    }
    return out;
}

/// (image + rot180(image)) / 2, rotation taken about the DC pixel; the output
/// is invariant under that rotation, matching what a binary-phase hologram
/// can reproduce in its replay field.
inline AmplitudeImage symmetrize_target(const AmplitudeImage& image) {
    const AmplitudeImage rotated = rotate180_about_dc(image);
    AmplitudeImage out(image.height, image.width);
    for (size_t i = 0; i < image.size(); ++i) {
        out.values[i] = 0.5 * (image.values[i] + rotated.values[i]);
    }
    return out;
}

/// MSE readout matching the comparison plots: both images rescaled to peak 1.
inline double peak_normalized_mse(const AmplitudeImage& target,
                                  const AmplitudeImage& raw_recon) {
    require_same_shape(target, raw_recon, "peak_normalized_mse");
    double tmax = 0.0, rmax = 0.0;
    for (size_t i = 0; i < target.size(); ++i) {
        tmax = std::max(tmax, target.values[i]);
        rmax = std::max(rmax, raw_recon.values[i]);
    }
    if (tmax <= 0.0) {
        throw InvalidInputError("peak_normalized_mse: target image is all zero");
    }
    const size_t n = target.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = rmax > 0.0 ? raw_recon.values[i] / rmax : 0.0;
        const double d = target.values[i] / tmax - r;
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

namespace detail {

inline void validate_config(const RunConfig& config, const AmplitudeImage& target) {
    if (!(config.lr > 0.0) || !std::isfinite(config.lr)) {
        throw InvalidInputError("optimize: lr must be positive and finite");
    }
    if (config.iterations < 1) throw InvalidInputError("optimize: iterations must be >= 1");
    if (config.lbfgs_history < 1) throw InvalidInputError("optimize: history must be >= 1");
    if (config.save_every < 1) throw InvalidInputError("optimize: save_every must be >= 1");
    if (config.height < 2 || config.width < 2) {
        throw InvalidInputError("optimize: image dimensions must be at least 2x2");
    }
    if (!same_shape(target.height, target.width, config.height, config.width)) {
        throw ShapeError("optimize: target is " + shape_string(target.height, target.width) +
                         " but config expects " + shape_string(config.height, config.width));
    }
    for (double v : target.values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidInputError("optimize: target values must lie in [0, 1]");
        }
    }
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace detail

/// Runs the optimization loop for exactly config.iterations steps.
///
/// Each iteration evaluates loss_and_grad at the current phase, records the
/// training loss and the peak-normalized MSE readout, then applies one
/// optimizer step. Non-finite values mark the run diverged (histories keep
/// what was recorded so far) instead of raising, so optimizer comparisons
/// always complete. The returned phase is canonicalized to [0, 2pi).
inline RunRecord optimize(const AmplitudeImage& target, const RunConfig& config,
                          const ReconObserver& observer = {}) {
    detail::validate_config(config, target);

    PhaseMask phase = initial_phase(config.height, config.width, config.seed);
    AdamState adam(config.lr);
    LbfgsState lbfgs(config.lr, static_cast<size_t>(config.lbfgs_history));

    RunRecord record;
    record.loss_history.reserve(config.iterations);
    record.mse_history.reserve(config.iterations);
    std::vector<double> last_good = phase.values;

    for (int it = 0; it < config.iterations; ++it) {
        LossAndGrad eval;
        AmplitudeImage raw;
        try {
            eval = loss_and_grad(phase, target, config.loss, &raw);
        } catch (const NumericError&) {
            record.diverged = true;
            record.diverged_at = it;
            break;
        }
        record.loss_history.push_back(eval.loss);
        record.mse_history.push_back(peak_normalized_mse(target, raw));
        if (observer && it % config.save_every == 0) observer(it, raw);

        last_good = phase.values;
        try {
            phase.values = config.optimizer == OptimizerKind::Adam
                               ? adam_step(adam, std::move(phase.values), eval.grad)
                               : lbfgs_step(lbfgs, std::move(phase.values), eval.grad);
        } catch (const NumericError&) {
            record.diverged = true;
            record.diverged_at = it;
            phase.values = last_good;
            break;
        }
        if (!detail::all_finite(phase.values)) {
            record.diverged = true;
            record.diverged_at = it;
            phase.values = last_good;
            break;
        }
    }

    record.final_phase = canonicalize(phase);
    record.rejected_pairs = lbfgs.rejected_pairs;
    return record;
}

}  // namespace holo
