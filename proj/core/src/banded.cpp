#include "qspec/banded.hpp"

#include <algorithm>

namespace qspec {

BandedLU::BandedLU(int size, int lower, int upper)
    : n_(size), kl_(lower), ku_(upper), ld_(2 * lower + upper + 1), ab_(static_cast<size_t>(ld_) * size), ipiv_(size) {}

void BandedLU::factor() {
    int ju = 0;
    for (int j = 0; j < n_; ++j) {
        const int km = std::min(kl_, n_ - 1 - j);
        int jp = 0;
        double best = -1;
        for (int t = 0; t <= km; ++t) {
            const double a = std::abs(ab_[index(j + t, j)]);
            if (a > best) {
                best = a;
                jp = t;
            }
        }
        ipiv_[j] = j + jp;
        if (best == 0.0) throw NumericalFailure("singular banded system");
        ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
        if (jp != 0)
            for (int c = j; c <= ju; ++c) std::swap(ab_[index(j, c)], ab_[index(j + jp, c)]);
        const cplx inv = 1.0 / ab_[index(j, j)];
        for (int t = 1; t <= km; ++t) ab_[index(j + t, j)] *= inv;
        for (int c = j + 1; c <= ju; ++c) {
            const cplx u = ab_[index(j, c)];
            if (u == cplx(0.0)) continue;
            for (int t = 1; t <= km; ++t) ab_[index(j + t, c)] -= ab_[index(j + t, j)] * u;
        }
    }
    factored_ = true;
}

void BandedLU::solve(std::vector<cplx>& b) const {
    if (!factored_) throw NumericalFailure("banded system used before factorisation");
    const int kv = kl_ + ku_;
    for (int j = 0; j < n_; ++j) {
        const int km = std::min(kl_, n_ - 1 - j);
        if (ipiv_[j] != j) std::swap(b[j], b[ipiv_[j]]);
        const cplx bj = b[j];
        if (bj == cplx(0.0)) continue;
        for (int t = 1; t <= km; ++t) b[j + t] -= ab_[index(j + t, j)] * bj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
        b[j] /= ab_[index(j, j)];
        const cplx bj = b[j];
        const int lo = std::max(0, j - kv);
        for (int i = lo; i < j; ++i) b[i] -= ab_[index(i, j)] * bj;
    }
}

}  // namespace qspec
