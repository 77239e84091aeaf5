#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "qspec/types.hpp"

namespace qspec {

// Points center + r e^{i theta_q}, theta_q = 2 pi q / Q.
inline std::vector<cplx> circle_nodes(cplx center, double radius, int nodes) {
    std::vector<cplx> z(nodes);
    for (int q = 0; q < nodes; ++q) z[q] = center + std::polar(radius, 2.0 * std::numbers::pi * q / nodes);
    return z;
}

// Trapezoid estimate of the order-m Laurent coefficient from circle samples:
// a_m = (1/Q) sum_q f_q (r e^{i theta_q})^{-m}.
template <class T>
T laurent_from_samples(const std::vector<T>& samples, double radius, int order) {
    const int Q = static_cast<int>(samples.size());
    T acc = samples[0] * cplx(0.0);
    for (int q = 0; q < Q; ++q) {
        const cplx w = std::polar(std::pow(radius, -order), -2.0 * std::numbers::pi * order * q / Q);
        acc += samples[q] * w;
    }
    return acc * cplx(1.0 / Q);
}

// Same for log-scaled scalar samples; the result shares the largest scale.
inline Scaled laurent_from_samples(const std::vector<Scaled>& samples, double radius, int order) {
    double top = -INFINITY;
    for (auto& s : samples)
        if (s.mantissa != cplx(0.0)) top = std::max(top, s.log_scale);
    if (!std::isfinite(top)) return {0.0, 0.0};
    std::vector<cplx> plain(samples.size());
    for (size_t q = 0; q < samples.size(); ++q) plain[q] = samples[q].rescaled(top).mantissa;
    return {laurent_from_samples(plain, radius, order), top};
}

template <class F>
auto laurent_coefficient(F&& f, cplx center, double radius, int order, int nodes) {
    std::vector<decltype(f(center))> samples;
    samples.reserve(nodes);
    for (cplx z : circle_nodes(center, radius, nodes)) samples.push_back(f(z));
    return laurent_from_samples(samples, radius, order);
}

}  // namespace qspec
