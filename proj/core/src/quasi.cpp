#include "qspec/quasi.hpp"

#include <algorithm>
#include <stdexcept>

#include "qspec/grid.hpp"

namespace qspec {

namespace {

bool is_constant(const std::vector<double>& f) {
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return *hi - *lo <= 1e-15 * std::max(1.0, std::abs(*hi));
}

std::vector<double> derivative(const std::vector<double>& f) {
    if (is_constant(f)) return std::vector<double>(f.size(), 0.0);
    return differentiate(f);
}

// entries F(i, r) for i <= n-2 as node arrays
std::vector<std::vector<double>> entry_arrays(const std::vector<RMat>& F, int n) {
    std::vector<std::vector<double>> out(static_cast<size_t>(n) * n, std::vector<double>(F.size()));
    for (size_t node = 0; node < F.size(); ++node)
        for (int i = 0; i < n; ++i)
            for (int r = 0; r < n; ++r) out[static_cast<size_t>(i) * n + r][node] = F[node](i, r);
    return out;
}

void check(const std::vector<RMat>& F, int orders) {
    if (F.empty()) throw std::invalid_argument("empty matrix field");
    if (orders < 0 || orders > F[0].rows() - 1) throw std::out_of_range("derivative order exceeds n-1");
}

}  // namespace

DerivativeTable::DerivativeTable(int n, int orders, int nodes)
    : n_(n), orders_(orders), nodes_(nodes), coef_(static_cast<size_t>(orders + 1) * n, std::vector<double>(nodes, 0.0)) {}

DerivativeTable ordinary_from_quasi(const std::vector<RMat>& F, int orders) {
    check(F, orders);
    const int n = static_cast<int>(F[0].rows()), nodes = static_cast<int>(F.size());
    const auto f = entry_arrays(F, n);
    DerivativeTable t(n, orders, nodes);
    std::fill(t.coef(0, 0).begin(), t.coef(0, 0).end(), 1.0);
    for (int m = 0; m < orders; ++m) {
        for (int r = 0; r <= m; ++r) {
            const auto& c = t.coef(m, r);
            const auto dc = derivative(c);
            for (int node = 0; node < nodes; ++node) t.coef(m + 1, r)[node] += dc[node];
            // (y^{[r]})' = sum_{q <= r+1} F(r, q) y^{[q]}
            for (int q = 0; q <= r + 1; ++q) {
                const auto& frq = f[static_cast<size_t>(r) * n + q];
                for (int node = 0; node < nodes; ++node) t.coef(m + 1, q)[node] += c[node] * frq[node];
            }
        }
    }
    return t;
}

DerivativeTable quasi_from_ordinary(const std::vector<RMat>& F, int orders) {
    check(F, orders);
    const int n = static_cast<int>(F[0].rows()), nodes = static_cast<int>(F.size());
    const auto f = entry_arrays(F, n);
    DerivativeTable t(n, orders, nodes);
    std::fill(t.coef(0, 0).begin(), t.coef(0, 0).end(), 1.0);
    for (int j = 0; j < orders; ++j) {
        // y^{[j+1]} = (y^{[j]})' - sum_{r <= j} F(j, r) y^{[r]}
        for (int m = 0; m <= j; ++m) {
            const auto& d = t.coef(j, m);
            const auto dd = derivative(d);
            for (int node = 0; node < nodes; ++node) {
                t.coef(j + 1, m)[node] += dd[node];
                t.coef(j + 1, m + 1)[node] += d[node];
            }
        }
        for (int r = 0; r <= j; ++r) {
            const auto& fjr = f[static_cast<size_t>(j) * n + r];
            if (is_constant(fjr) && fjr[0] == 0.0) continue;
            for (int m = 0; m <= r; ++m)
                for (int node = 0; node < nodes; ++node) t.coef(j + 1, m)[node] -= fjr[node] * t.coef(r, m)[node];
        }
    }
    return t;
}

}  // namespace qspec
