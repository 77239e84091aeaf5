#pragma once

#include <span>
#include <vector>

#include "qspec/types.hpp"

namespace qspec {

// Uniform node grid on [0,1] with `points` nodes.
struct Grid {
    int points = 0;

    int intervals() const { return points - 1; }
    double step() const { return 1.0 / (points - 1); }
    double x(int i) const { return i == points - 1 ? 1.0 : i * step(); }
};

// 4-point Lagrange interpolation of grid samples at arbitrary x in [0,1].
double interpolate_cubic(std::span<const double> f, double x);

// Composite Simpson (3/8 rule on the tail for an odd interval count).
double integrate(std::span<const double> f);
cplx integrate(std::span<const cplx> f);

// Running integral from 0 using local cubic fits, O(h^4).
std::vector<double> cumulative_integral(std::span<const double> f);
std::vector<cplx> cumulative_integral(std::span<const cplx> f);

// Fourth-order finite differences; exact zero for constant data.
std::vector<double> differentiate(std::span<const double> f);
std::vector<cplx> differentiate(std::span<const cplx> f);

double l2_norm(std::span<const double> f);
double relative_l2_error(std::span<const double> approx, std::span<const double> exact);

}  // namespace qspec
