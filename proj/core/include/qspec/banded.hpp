#pragma once

#include <vector>

#include "qspec/types.hpp"

namespace qspec {

// Complex band LU with partial pivoting (LAPACK gbtrf layout).
class BandedLU {
public:
    BandedLU(int size, int lower, int upper);

    void set(int i, int j, cplx v) { ab_[index(i, j)] = v; }
    cplx get(int i, int j) const { return ab_[index(i, j)]; }

    void factor();
    void solve(std::vector<cplx>& rhs) const;

    int size() const { return n_; }

private:
    size_t index(int i, int j) const { return static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_; }

    int n_, kl_, ku_, ld_;
    std::vector<cplx> ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
};

}  // namespace qspec
