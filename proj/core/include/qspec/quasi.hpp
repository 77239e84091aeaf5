#pragma once

#include <vector>

#include "qspec/types.hpp"

namespace qspec {

// Node-wise linear maps between quasi-derivatives y^{[r]} and ordinary
// derivatives y^{(m)} generated by an associated matrix field F.
//   ordinary_from_quasi: y^{(m)} = sum_r c(m, r) y^{[r]}
//   quasi_from_ordinary: y^{[m]} = sum_r c(m, r) y^{(r)}
// Orders up to n-1 only need rows 0..n-2 of F, so lambda never enters.
// Coefficient derivatives are taken by finite differences, except for
// constant entries which contribute exact zeros.
class DerivativeTable {
public:
    DerivativeTable() = default;
    DerivativeTable(int n, int orders, int nodes);

    int n() const { return n_; }
    int orders() const { return orders_; }
    int nodes() const { return nodes_; }

    std::vector<double>& coef(int m, int r) { return coef_[static_cast<size_t>(m) * n_ + r]; }
    const std::vector<double>& coef(int m, int r) const { return coef_[static_cast<size_t>(m) * n_ + r]; }

    // Applies row m to a source indexed as src(order, node).
    template <class Src>
    cplx apply(int m, int node, Src&& src) const {
        cplx acc = 0.0;
        for (int r = 0; r <= m && r < n_; ++r) {
            const double c = coef(m, r)[node];
            if (c != 0.0) acc += c * src(r, node);
        }
        return acc;
    }

private:
    int n_ = 0, orders_ = 0, nodes_ = 0;
    std::vector<std::vector<double>> coef_;
};

DerivativeTable ordinary_from_quasi(const std::vector<RMat>& F, int orders);
DerivativeTable quasi_from_ordinary(const std::vector<RMat>& F, int orders);

}  // namespace qspec
