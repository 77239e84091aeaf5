#include "qspec/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qspec/banded.hpp"
#include "qspec/grid.hpp"

namespace qspec {

namespace {

double inf_norm(const CMat& A) {
    double best = 0;
    for (int r = 0; r < A.rows(); ++r) best = std::max(best, A.row(r).cwiseAbs().sum());
    return best;
}

// Taylor degree giving a truncation term below 2e-17 for norm nu <= 0.5
int taylor_degree(double nu) {
    double term = 1.0;
    for (int d = 1; d < 30; ++d) {
        term *= nu / d;
        if (term * nu / (d + 1) < 2e-17) return d;
    }
    return 30;
}

}  // namespace

CMat expm(const CMat& A) {
    const int n = static_cast<int>(A.rows());
    double nu = inf_norm(A);
    int squarings = 0;
    while (nu > 0.5) {
        nu *= 0.5;
        ++squarings;
    }
    const CMat B = A * std::ldexp(1.0, -squarings);
    const int deg = taylor_degree(nu);
    const CMat I = CMat::Identity(n, n);
    CMat E = I;
    for (int d = deg; d >= 1; --d) E = I + (B * E) / static_cast<double>(d);
    for (int q = 0; q < squarings; ++q) E = E * E;
    return E;
}

void expm_with_derivative(const CMat& A, const CMat& dA, CMat& E, CMat& dE) {
    const int n = static_cast<int>(A.rows());
    double nu = inf_norm(A);
    int squarings = 0;
    while (nu > 0.5) {
        nu *= 0.5;
        ++squarings;
    }
    const double f = std::ldexp(1.0, -squarings);
    const CMat B = A * f, dB = dA * f;
    const int deg = taylor_degree(nu) + 1;
    const CMat I = CMat::Identity(n, n);
    E = I;
    dE = CMat::Zero(n, n);
    for (int d = deg; d >= 1; --d) {
        CMat nE = I + (B * E) / static_cast<double>(d);
        dE = (dB * E + B * dE) / static_cast<double>(d);
        E = nE;
    }
    for (int q = 0; q < squarings; ++q) {
        dE = E * dE + dE * E;
        E = E * E;
    }
}

double balance_factor(int n, cplx lambda) { return std::max(1.0, std::pow(std::abs(lambda), 1.0 / n)); }

int substeps_for(const ProblemDefinition& p, cplx lambda, const StepOptions& opt) {
    const double rho = std::pow(std::abs(lambda), 1.0 / p.n);
    return std::max(1, static_cast<int>(std::ceil(rho * p.grid.step() / opt.max_phase_per_step)));
}

std::shared_ptr<const StepTable> step_table(const ProblemDefinition& p, int substeps) {
    return p.steps->get(substeps, [&]() {
        auto t = std::make_shared<StepTable>();
        const int n = p.n, M = p.grid.intervals();
        t->substeps = substeps;
        t->h = p.grid.step() / substeps;
        const double hs = t->h;
        const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
        const double comm = std::sqrt(3.0) / 12.0 * hs * hs;
        // entry-wise samples for interpolation
        std::vector<std::vector<double>> entry(n * n, std::vector<double>(p.grid.points));
        for (int i = 0; i < p.grid.points; ++i)
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) entry[r * n + c][i] = p.F[i](r, c);
        auto F_at = [&](double x) {
            RMat f(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    // the unit superdiagonal and the zeros above it are exact
                    if (c == r + 1) f(r, c) = 1.0;
                    else if (c > r + 1) f(r, c) = 0.0;
                    else f(r, c) = interpolate_cubic(entry[r * n + c], x);
                }
            return f;
        };
        RMat E = RMat::Zero(n, n);
        E(n - 1, 0) = p.lambda_sign;
        t->omega0.reserve(static_cast<size_t>(M) * substeps);
        t->slope.reserve(static_cast<size_t>(M) * substeps);
        for (int i = 0; i < M; ++i)
            for (int q = 0; q < substeps; ++q) {
                const double x0 = p.grid.x(i) + q * hs;
                const RMat F1 = F_at(x0 + c1 * hs), F2 = F_at(x0 + c2 * hs);
                RMat om = 0.5 * hs * (F1 + F2) + comm * (F2 * F1 - F1 * F2);
                const RMat D = F2 - F1;
                RMat sl = hs * E + comm * (D * E - E * D);
                t->omega0.push_back(om);
                t->slope.push_back(sl);
            }
        return std::shared_ptr<const StepTable>(t);
    });
}

namespace {

struct Balancer {
    int n;
    std::array<double, 2 * kMaxOrder> pw{};  // pw[c - r + n - 1] = s^{c-r}

    Balancer(int n_, double s) : n(n_) {
        for (int d = -(n - 1); d <= n - 1; ++d) pw[d + n - 1] = std::pow(s, d);
    }
    CMat apply(const RMat& om, const RMat& sl, cplx lambda) const {
        CMat A(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) A(r, c) = (om(r, c) + lambda * sl(r, c)) * pw[c - r + n - 1];
        return A;
    }
    CMat apply_slope(const RMat& sl) const {
        CMat A(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) A(r, c) = sl(r, c) * pw[c - r + n - 1];
        return A;
    }
};

// Balanced propagator for grid interval i (product of substeps).
void interval_propagator(const StepTable& t, const Balancer& b, int i, cplx lambda, CMat& P, CMat* dP) {
    const int S = t.substeps;
    for (int q = 0; q < S; ++q) {
        const size_t idx = static_cast<size_t>(i) * S + q;
        const CMat A = b.apply(t.omega0[idx], t.slope[idx], lambda);
        if (dP) {
            CMat E, dE;
            expm_with_derivative(A, b.apply_slope(t.slope[idx]), E, dE);
            if (q == 0) {
                P = E;
                *dP = dE;
            } else {
                *dP = dE * P + E * (*dP);
                P = E * P;
            }
        } else {
            const CMat E = expm(A);
            P = (q == 0) ? E : CMat(E * P);
        }
    }
}

CMat balance_matrix(int n, double s) {
    CMat D = CMat::Zero(n, n);
    double v = 1.0;
    for (int r = 0; r < n; ++r, v *= s) D(r, r) = v;
    return D;
}

// m-subsets of {0..n-1} as sorted index lists plus their bitmask lookup.
struct Subsets {
    int n, m;
    std::vector<std::array<int, kMaxOrder>> list;
    std::vector<int> index_of;  // by bitmask

    Subsets(int n_, int m_) : n(n_), m(m_), index_of(1 << n_, -1) {
        for (int mask = 0; mask < (1 << n); ++mask) {
            if (__builtin_popcount(mask) != m) continue;
            std::array<int, kMaxOrder> s{};
            int t = 0;
            for (int b = 0; b < n; ++b)
                if (mask & (1 << b)) s[t++] = b;
            index_of[mask] = static_cast<int>(list.size());
            list.push_back(s);
        }
    }
};

template <class Mat>
cplx minor_det(const Mat& A, const int* rows, const int* cols, int m) {
    switch (m) {
        case 1: return A(rows[0], cols[0]);
        case 2: return A(rows[0], cols[0]) * A(rows[1], cols[1]) - A(rows[0], cols[1]) * A(rows[1], cols[0]);
        case 3: {
            auto a = [&](int r, int c) -> cplx { return A(rows[r], cols[c]); };
            return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                   a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        }
        default: {
            CMat S(m, m);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) S(r, c) = A(rows[r], cols[c]);
            return S.partialPivLu().determinant();
        }
    }
}

}  // namespace

PropagatorSet build_propagators(const ProblemDefinition& p, cplx lambda, bool with_derivative,
                                const StepOptions& opt) {
    PropagatorSet ps;
    ps.n = p.n;
    ps.lambda = lambda;
    ps.s = balance_factor(p.n, lambda);
    const auto table = step_table(p, substeps_for(p, lambda, opt));
    const Balancer b(p.n, ps.s);
    const int M = p.grid.intervals();
    ps.P.resize(M);
    if (with_derivative) ps.dP.resize(M);
    for (int i = 0; i < M; ++i) interval_propagator(*table, b, i, lambda, ps.P[i], with_derivative ? &ps.dP[i] : nullptr);
    return ps;
}

CMat FundamentalSolution::matrix(int node) const {
    CMat C = columns[node];
    for (int c = 0; c < n; ++c) C.col(c) *= std::exp(log_scale[node][c]);
    return C;
}

FundamentalSolution integrate_fundamental(const ProblemDefinition& p, cplx lambda, const StepOptions& opt) {
    const int n = p.n, M = p.grid.intervals();
    const double s = balance_factor(n, lambda);
    const auto table = step_table(p, substeps_for(p, lambda, opt));
    const Balancer b(n, s);
    const CMat D = balance_matrix(n, s);
    const CMat Dinv = balance_matrix(n, 1.0 / s);

    FundamentalSolution out;
    out.n = n;
    out.lambda = lambda;
    out.columns.resize(M + 1);
    out.log_scale.assign(M + 1, std::vector<double>(n, 0.0));
    out.det.resize(M + 1);

    const CMat C0 = p.boundary.U[0].cast<cplx>().inverse();
    CMat Chat = Dinv * C0;
    std::vector<double> logs(n, 0.0);
    cplx det = C0.determinant();

    auto store = [&](int node) {
        CMat C = D * Chat;
        for (int c = 0; c < n; ++c) {
            const double mx = C.col(c).cwiseAbs().maxCoeff();
            const double f = mx > 0 ? mx : 1.0;
            C.col(c) /= f;
            out.log_scale[node][c] = logs[c] + std::log(f);
        }
        out.columns[node] = C;
        out.det[node] = det;
    };
    store(0);
    CMat P;
    for (int i = 0; i < M; ++i) {
        interval_propagator(*table, b, i, lambda, P, nullptr);
        Chat = P * Chat;
        det *= P.determinant();
        for (int c = 0; c < n; ++c) {
            const double mx = Chat.col(c).cwiseAbs().maxCoeff();
            if (mx > 0) {
                Chat.col(c) /= mx;
                logs[c] += std::log(mx);
            }
        }
        store(i + 1);
    }
    return out;
}

MinorGroup char_minors(const ProblemDefinition& p, cplx lambda, int k, bool with_replaced, const StepOptions& opt) {
    const int n = p.n, M = p.grid.intervals();
    if (k < 1 || k >= n) throw std::out_of_range("column index out of range");
    const int m = n - k;
    const double s = balance_factor(n, lambda);
    const auto table = step_table(p, substeps_for(p, lambda, opt));
    const Balancer b(n, s);
    const Subsets sub(n, m);
    const int dim = static_cast<int>(sub.list.size());

    // column sets: t = 0 omits column k, t = j-k omits column j (1-based)
    const int groups = with_replaced ? (n - k + 1) : 1;
    std::vector<std::array<int, kMaxOrder>> colsets(groups);
    for (int t = 0; t < groups; ++t) {
        const int omit = (t == 0) ? k - 1 : k - 1 + t;
        int c = 0;
        for (int col = k - 1; col < n; ++col)
            if (col != omit) colsets[t][c++] = col;
    }

    const CMat Chat0 = balance_matrix(n, 1.0 / s) * p.boundary.U[0].cast<cplx>().inverse();
    Eigen::MatrixXcd W(dim, groups);
    for (int I = 0; I < dim; ++I)
        for (int t = 0; t < groups; ++t) W(I, t) = minor_det(Chat0, sub.list[I].data(), colsets[t].data(), m);

    double log_scale = 0;
    auto renorm = [&]() {
        const double mx = W.cwiseAbs().maxCoeff();
        if (mx > 0) {
            W /= mx;
            log_scale += std::log(mx);
        }
    };
    renorm();

    Eigen::MatrixXcd K(dim, dim);
    CMat P;
    for (int i = 0; i < M; ++i) {
        interval_propagator(*table, b, i, lambda, P, nullptr);
        if (m == 1) {
            W = P * W;  // first compound is the matrix itself
        } else {
            for (int I = 0; I < dim; ++I)
                for (int J = 0; J < dim; ++J) K(I, J) = minor_det(P, sub.list[I].data(), sub.list[J].data(), m);
            W = K * W;
        }
        renorm();
    }

    // final boundary minors of U1 * D on rows k..n-1 (0-based)
    const CMat B = p.boundary.U[1].cast<cplx>() * balance_matrix(n, s);
    std::array<int, kMaxOrder> rows{};
    for (int r = 0; r < m; ++r) rows[r] = k + r;
    Eigen::RowVectorXcd bm(dim);
    for (int I = 0; I < dim; ++I) bm(I) = minor_det(B, rows.data(), sub.list[I].data(), m);
    const Eigen::RowVectorXcd vals = bm * W;

    MinorGroup g;
    g.k = k;
    g.log_scale = log_scale;
    g.diag = vals(0);
    for (int t = 1; t < groups; ++t) {
        const int j = k + t;
        g.replaced.push_back(((j - k - 1) % 2 == 0 ? 1.0 : -1.0) * vals(t));
    }
    return g;
}

Scaled char_minor(const ProblemDefinition& p, cplx lambda, int j, int k, const StepOptions& opt) {
    if (j == k) return char_minors(p, lambda, k, false, opt).diagonal();
    if (j < k) throw std::out_of_range("replaced column must follow k");
    return char_minors(p, lambda, k, true, opt).off(j);
}

CMat weyl_matrix(const ProblemDefinition& p, cplx lambda, const StepOptions& opt) {
    const int n = p.n;
    CMat Mw = CMat::Identity(n, n);
    for (int k = 1; k < n; ++k) {
        const MinorGroup g = char_minors(p, lambda, k, true, opt);
        for (int j = k + 1; j <= n; ++j) Mw(j - 1, k - 1) = -g.off(j).mantissa / g.diag;
    }
    return Mw;
}

SolutionField weyl_solution(const ProblemDefinition& p, const PropagatorSet& props, int k, SolutionField* dlambda) {
    const int n = p.n, M = p.grid.intervals();
    const int size = n * (M + 1);
    const CMat D = balance_matrix(n, props.s);
    BandedLU lu(size, k + n - 1, n - 1);
    std::vector<cplx> rhs(size, 0.0);

    const CMat L = p.boundary.U[0].cast<cplx>() * D;
    const CMat R = p.boundary.U[1].cast<cplx>() * D;
    for (int srow = 0; srow < k; ++srow) {
        const double sc = L.row(srow).cwiseAbs().maxCoeff();
        for (int c = 0; c < n; ++c) lu.set(srow, c, L(srow, c) / sc);
        rhs[srow] = (srow == k - 1) ? 1.0 / sc : 0.0;
    }
    for (int i = 0; i < M; ++i)
        for (int t = 0; t < n; ++t) {
            const int row = k + i * n + t;
            for (int c = 0; c < n; ++c) lu.set(row, i * n + c, props.P[i](t, c));
            lu.set(row, (i + 1) * n + t, -1.0);
        }
    for (int srow = k; srow < n; ++srow) {
        const int row = M * n + srow;
        const double sc = R.row(srow).cwiseAbs().maxCoeff();
        for (int c = 0; c < n; ++c) lu.set(row, M * n + c, R(srow, c) / sc);
    }
    lu.factor();
    lu.solve(rhs);

    SolutionField out(n, M + 1);
    for (int i = 0; i <= M; ++i) {
        double v = 1.0;
        for (int c = 0; c < n; ++c, v *= props.s) out.at(i, c) = v * rhs[static_cast<size_t>(i) * n + c];
    }
    if (dlambda) {
        if (props.dP.empty()) throw std::logic_error("propagators lack lambda derivatives");
        std::vector<cplx> d(size, 0.0);
        for (int i = 0; i < M; ++i) {
            Eigen::Map<const Eigen::VectorXcd> yi(rhs.data() + static_cast<size_t>(i) * n, n);
            const Eigen::VectorXcd g = props.dP[i] * yi;
            for (int t = 0; t < n; ++t) d[k + i * n + t] = -g(t);
        }
        lu.solve(d);
        *dlambda = SolutionField(n, M + 1);
        for (int i = 0; i <= M; ++i) {
            double v = 1.0;
            for (int c = 0; c < n; ++c, v *= props.s) dlambda->at(i, c) = v * d[static_cast<size_t>(i) * n + c];
        }
    }
    return out;
}

std::vector<SolutionField> weyl_solutions(const ProblemDefinition& p, cplx lambda, const StepOptions& opt) {
    const PropagatorSet props = build_propagators(p, lambda, false, opt);
    std::vector<SolutionField> out;
    for (int k = 1; k <= p.n; ++k) out.push_back(weyl_solution(p, props, k));
    return out;
}

}  // namespace qspec
