// From-scratch Adam and limited-memory BFGS over flat parameter vectors.
//
// Both optimizers take fixed steps of size lr; L-BFGS scales the two-loop
// direction instead of running a line search, matching a single shared
// learning-rate parameter across optimizers.
#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "holo/errors.hpp"

namespace holo {

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite value");
    }
}

inline void require_same_length(size_t a, size_t b, const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace detail

struct AdamState {
    double lr = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment

    explicit AdamState(double learning_rate = 0.1) : lr(learning_rate) {}
};

/// One Adam update with bias correction; mutates state, returns new params.
inline std::vector<double> adam_step(AdamState& state, std::vector<double> params,
                                     const std::vector<double>& grad) {
    detail::require_same_length(params.size(), grad.size(), "adam_step");
    detail::require_finite(grad, "adam_step");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    detail::require_same_length(state.m.size(), params.size(), "adam_step state");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    return params;
}

struct CurvaturePair {
    std::vector<double> s;  // parameter displacement
    std::vector<double> y;  // gradient displacement
    double rho = 0.0;       // 1 / (y . s)
};

struct LbfgsState {
    double lr = 0.1;
    size_t capacity = 20;
    std::deque<CurvaturePair> history;          // oldest first
    std::optional<std::vector<double>> prev_params;
    std::optional<std::vector<double>> prev_grad;
    long rejected_pairs = 0;                    // failed the curvature guard

    explicit LbfgsState(double learning_rate = 0.1, size_t history_capacity = 20)
        : lr(learning_rate), capacity(history_capacity) {}
};

// Pairs with y.s at or below this are discarded to keep the implicit inverse
// Hessian positive definite.
inline constexpr double kCurvatureGuard = 1e-10;

/// Two-loop recursion: d = -H * grad with H built from the stored pairs.
/// Initial scaling gamma = (s.y)/(y.y) from the newest pair, 1 when empty.
inline std::vector<double> lbfgs_direction(const LbfgsState& state,
                                           const std::vector<double>& grad) {
    detail::require_finite(grad, "lbfgs_direction");
    std::vector<double> q = grad;
    std::vector<double> alpha(state.history.size(), 0.0);

    for (size_t k = state.history.size(); k-- > 0;) {
        const CurvaturePair& pair = state.history[k];
        alpha[k] = pair.rho * detail::dot(pair.s, q);
        for (size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * pair.y[i];
    }

    double gamma = 1.0;
    if (!state.history.empty()) {
        const CurvaturePair& newest = state.history.back();
        gamma = detail::dot(newest.s, newest.y) / detail::dot(newest.y, newest.y);
    }
    for (double& x : q) x *= gamma;

    for (size_t k = 0; k < state.history.size(); ++k) {
        const CurvaturePair& pair = state.history[k];
        const double beta = pair.rho * detail::dot(pair.y, q);
        for (size_t i = 0; i < q.size(); ++i) q[i] += pair.s[i] * (alpha[k] - beta);
    }

    for (double& x : q) x = -x;
    return q;
}

/// One fixed-step L-BFGS update; mutates state, returns new params.
///
/// The pair (s, y) spanning the previous call's iterate and this call's
/// gradient is completed first, so the direction below uses it; pairs failing
/// the curvature guard are counted and dropped.
inline std::vector<double> lbfgs_step(LbfgsState& state, std::vector<double> params,
                                      const std::vector<double>& grad) {
    detail::require_same_length(params.size(), grad.size(), "lbfgs_step");
    detail::require_finite(grad, "lbfgs_step");

    if (state.prev_params.has_value()) {
        detail::require_same_length(state.prev_params->size(), params.size(),
                                    "lbfgs_step state");
        CurvaturePair pair;
        pair.s.resize(params.size());
        pair.y.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            pair.s[i] = params[i] - (*state.prev_params)[i];
            pair.y[i] = grad[i] - (*state.prev_grad)[i];
        }
        const double ys = detail::dot(pair.y, pair.s);
        if (ys > kCurvatureGuard) {
            pair.rho = 1.0 / ys;
            state.history.push_back(std::move(pair));
            if (state.history.size() > state.capacity) state.history.pop_front();
        } else {
            state.rejected_pairs += 1;
        }
    }

    const std::vector<double> direction = lbfgs_direction(state, grad);
    state.prev_params = params;
    state.prev_grad = grad;
    for (size_t i = 0; i < params.size(); ++i) params[i] += state.lr * direction[i];
    return params;
}

}  // namespace holo
