#include "qspec/grid.hpp"

#include <algorithm>
#include <cmath>

namespace qspec {

double interpolate_cubic(std::span<const double> f, double x) {
    const int m = static_cast<int>(f.size()) - 1;
    const double t = std::clamp(x, 0.0, 1.0) * m;
    int i = static_cast<int>(std::floor(t));
    if (m < 3) {
        i = std::clamp(i, 0, m - 1);
        const double u = t - i;
        return f[i] * (1 - u) + f[i + 1] * u;
    }
    int base = std::clamp(i - 1, 0, m - 3);
    const double u = t - base;
    // nodes at 0,1,2,3 relative to base
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    return l0 * f[base] + l1 * f[base + 1] + l2 * f[base + 2] + l3 * f[base + 3];
}

namespace {

template <class T>
T integrate_impl(std::span<const T> f) {
    const int m = static_cast<int>(f.size()) - 1;
    if (m <= 0) return T(0);
    const double h = 1.0 / m;
    if (m == 1) return h * (f[0] + f[1]) / 2.0;
    if (m == 2) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    int simpson_end = (m % 2 == 0) ? m : m - 3;
    T s(0);
    for (int i = 0; i + 2 <= simpson_end; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (simpson_end != m) {
        const int a = simpson_end;
        s += 3.0 * h / 8.0 * (f[a] + 3.0 * f[a + 1] + 3.0 * f[a + 2] + f[a + 3]);
    }
    return s;
}

template <class T>
std::vector<T> cumulative_impl(std::span<const T> f) {
    const int m = static_cast<int>(f.size()) - 1;
    std::vector<T> out(f.size(), T(0));
    if (m <= 0) return out;
    const double h = 1.0 / m;
    if (m < 3) {
        for (int i = 0; i < m; ++i) out[i + 1] = out[i] + h * (f[i] + f[i + 1]) / 2.0;
        return out;
    }
    for (int i = 0; i < m; ++i) {
        T piece;
        if (i == 0)
            piece = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
        else if (i == m - 1)
            piece = h / 24.0 * (f[m - 3] - 5.0 * f[m - 2] + 19.0 * f[m - 1] + 9.0 * f[m]);
        else
            piece = h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
        out[i + 1] = out[i] + piece;
    }
    return out;
}

template <class T>
std::vector<T> differentiate_impl(std::span<const T> f) {
    const int m = static_cast<int>(f.size()) - 1;
    std::vector<T> d(f.size(), T(0));
    if (m < 4) {
        for (int i = 0; i <= m && m > 0; ++i) {
            int a = std::max(0, i - 1), b = std::min(m, i + 1);
            d[i] = (f[b] - f[a]) * (m / double(b - a));
        }
        return d;
    }
    const double inv = m / 12.0;
    for (int i = 0; i <= m; ++i) {
        if (i >= 2 && i <= m - 2) {
            d[i] = inv * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
        } else if (i < 2) {
            // one-sided stencil on nodes 0..4 evaluated at node i
            if (i == 0)
                d[i] = inv * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
            else
                d[i] = inv * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
        } else {
            if (i == m)
                d[i] = inv * (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]);
            else
                d[i] = inv * (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]);
        }
    }
    return d;
}

}  // namespace

double integrate(std::span<const double> f) { return integrate_impl(f); }
cplx integrate(std::span<const cplx> f) { return integrate_impl(f); }
std::vector<double> cumulative_integral(std::span<const double> f) { return cumulative_impl(f); }
std::vector<cplx> cumulative_integral(std::span<const cplx> f) { return cumulative_impl(f); }
std::vector<double> differentiate(std::span<const double> f) { return differentiate_impl(f); }
std::vector<cplx> differentiate(std::span<const cplx> f) { return differentiate_impl(f); }

double l2_norm(std::span<const double> f) {
    std::vector<double> sq(f.size());
    for (size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    return std::sqrt(std::max(0.0, integrate(std::span<const double>(sq))));
}

double relative_l2_error(std::span<const double> approx, std::span<const double> exact) {
    std::vector<double> diff(exact.size());
    for (size_t i = 0; i < exact.size(); ++i) diff[i] = approx[i] - exact[i];
    const double ref = l2_norm(exact);
    const double e = l2_norm(diff);
    return ref > 0 ? e / ref : e;
}

}  // namespace qspec
