#include "qspec/operator.hpp"

#include <algorithm>

namespace qspec {

BoundaryConfig BoundaryConfig::standard(int n) {
    BoundaryConfig b;
    b.n = n;
    b.U[0] = RMat::Identity(n, n);
    b.U[1] = RMat::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        b.p[0].push_back(s);
        b.p[1].push_back(n - 1 - s);
        b.U[1](s, n - 1 - s) = 1.0;
    }
    return b;
}

bool BoundaryConfig::is_standard() const {
    auto ref = standard(n);
    return p[0] == ref.p[0] && p[1] == ref.p[1] && U[0] == ref.U[0] && U[1] == ref.U[1];
}

void BoundaryConfig::validate() const {
    for (int a = 0; a < 2; ++a) {
        if (static_cast<int>(p[a].size()) != n || U[a].rows() != n || U[a].cols() != n)
            throw ConfigError("boundary data has wrong dimensions");
        std::vector<int> sorted = p[a];
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < n; ++i)
            if (sorted[i] != i) throw ConfigError("boundary exponents at end " + std::to_string(a) + " are not a permutation");
        for (int s = 0; s < n; ++s)
            for (int j = p[a][s]; j < n; ++j) {
                const double want = (j == p[a][s]) ? 1.0 : 0.0;
                if (U[a](s, j) != want)
                    throw ConfigError("boundary form " + std::to_string(s + 1) + " at end " + std::to_string(a) +
                                      " must be normalised on its leading quasi-derivative");
            }
    }
}

std::shared_ptr<const StepTable> StepCache::get(int substeps,
                                                const std::function<std::shared_ptr<const StepTable>()>& build) {
    {
        std::lock_guard lock(mutex_);
        auto it = tables_.find(substeps);
        if (it != tables_.end()) return it->second;
    }
    auto table = build();
    std::lock_guard lock(mutex_);
    // only the default resolution is kept; finer ones are rare and large
    if (substeps == 1) tables_.emplace(substeps, table);
    return table;
}

RMat associated_matrix(OperatorClass cls, int n, const std::vector<double>& c) {
    RMat F = RMat::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) F(k, k + 1) = 1.0;
    switch (cls) {
        case OperatorClass::SchrodingerN2: {
            const double s = c[0];
            F(0, 0) = s;
            F(1, 0) = -s * s;
            F(1, 1) = -s;
            break;
        }
        case OperatorClass::N3Mixed: {
            const double s0 = c[0], t1 = c[1];
            F(1, 0) = -(s0 + t1);
            F(2, 1) = s0 - t1;
            break;
        }
        case OperatorClass::RegularEven: {
            // 1-based: f_{n-k,k+1} = -tau_{2k}, f_{n-k-1,k+1} = f_{n-k,k+2} = -tau_{2k+1}
            const int half = n / 2;
            for (int k = 0; k < half; ++k) F(n - k - 1, k) = -c[2 * k];
            for (int k = 0; k + 1 < half; ++k) {
                F(n - k - 2, k) = -c[2 * k + 1];
                F(n - k - 1, k + 1) = -c[2 * k + 1];
            }
            break;
        }
        case OperatorClass::DistributionalEven: {
            const int m = n / 2;
            RMat Q = RMat::Zero(m + 1, m + 1);
            for (int nu = 0; nu <= n - 2; ++nu) {
                const double sign = ((nu - 1) >= 0 ? ((nu - 1) / 2) : -1) % 2 == 0 ? 1.0 : -1.0;
                const double v = sign * c[nu];
                const int k = nu / 2;
                if (nu % 2 == 0) {
                    Q(k, k + 1) += v;
                    Q(k + 1, k) += v;
                } else {
                    Q(k, k + 2) += v;
                    Q(k + 2, k) -= v;
                }
            }
            auto sgn = [](int e) { return (e % 2 == 0) ? 1.0 : -1.0; };
            // 1-based row m, columns 1..m
            for (int j = 1; j <= m; ++j) F(m - 1, j - 1) = sgn(m + 1) * Q(j - 1, m);
            for (int k = m + 1; k <= 2 * m; ++k) {
                F(k - 1, m) = sgn(k + 1) * Q(m, 2 * m - k);
                for (int j = 1; j <= m; ++j)
                    F(k - 1, j - 1) = sgn(k + 1) * Q(j - 1, 2 * m - k) + sgn(m + k) * Q(j - 1, m) * Q(m, 2 * m - k);
            }
            break;
        }
    }
    return F;
}

void validate_associated(const std::vector<RMat>& F, int n) {
    for (const auto& f : F) {
        if (f.rows() != n || f.cols() != n) throw ConfigError("associated matrix has wrong size");
        double scale = 1.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                if (!std::isfinite(f(k, j))) throw ConfigError("associated matrix has non-finite entries");
                scale = std::max(scale, std::abs(f(k, j)));
            }
        for (int k = 0; k < n; ++k) {
            if (k + 1 < n && f(k, k + 1) != 1.0) throw ConfigError("associated matrix superdiagonal must be 1");
            for (int j = k + 2; j < n; ++j)
                if (f(k, j) != 0.0) throw ConfigError("associated matrix must vanish above the superdiagonal");
        }
        if (std::abs(f.trace()) > 1e-12 * scale) throw ConfigError("associated matrix must have zero trace");
    }
}

ProblemDefinition build_problem_from_matrices(int n, const Grid& grid, std::vector<RMat> F,
                                              const BoundaryConfig& boundary) {
    if (n < 2 || n > kMaxOrder) throw ConfigError("order must be between 2 and " + std::to_string(kMaxOrder));
    if (static_cast<int>(F.size()) != grid.points) throw ConfigError("matrix field does not match grid");
    if (boundary.n != n) throw ConfigError("boundary order mismatch");
    boundary.validate();
    validate_associated(F, n);
    ProblemDefinition p;
    p.n = n;
    p.grid = grid;
    p.F = std::move(F);
    p.boundary = boundary;
    return p;
}

ProblemDefinition build_problem(const CoefficientSet& coefficients, const BoundaryConfig& boundary) {
    const int n = coefficients.n;
    std::vector<std::string> names = coefficient_names(coefficients.cls, n);
    std::vector<const std::vector<double>*> cols(n - 1, nullptr);
    for (auto& name : names) cols[coefficient_index(name)] = &coefficients[name];
    std::vector<RMat> F(coefficients.grid.points);
    std::vector<double> c(n - 1, 0.0);
    for (int i = 0; i < coefficients.grid.points; ++i) {
        for (int nu = 0; nu < n - 1; ++nu) c[nu] = cols[nu] ? (*cols[nu])[i] : 0.0;
        F[i] = associated_matrix(coefficients.cls, n, c);
    }
    auto p = build_problem_from_matrices(n, coefficients.grid, std::move(F), boundary);
    p.cls = coefficients.cls;
    p.coefficients = coefficients;
    return p;
}

ProblemDefinition build_problem(const CoefficientSet& coefficients) {
    return build_problem(coefficients, BoundaryConfig::standard(coefficients.n));
}

RMat star_matrix(const RMat& F) {
    const int n = static_cast<int>(F.rows());
    RMat S(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) S(k, j) = ((k + j + 1) % 2 == 0 ? 1.0 : -1.0) * F(n - 1 - j, n - 1 - k);
    return S;
}

namespace {

RMat bracket_from_exponents(const std::vector<int>& pstar) {
    const int n = static_cast<int>(pstar.size());
    RMat J = RMat::Zero(n, n);
    for (int k = 0; k < n; ++k) J(k, n - 1 - k) = (pstar[k] % 2 == 0) ? 1.0 : -1.0;
    return J;
}

std::vector<int> star_exponents(const BoundaryConfig& b, int a) {
    std::vector<int> ps(b.n);
    for (int k = 0; k < b.n; ++k) ps[k] = b.n - 1 - b.p[a][b.n - 1 - k];
    return ps;
}

}  // namespace

RMat bracket_matrix(int n) {
    RMat J = RMat::Zero(n, n);
    for (int k = 0; k < n; ++k) J(k, n - 1 - k) = (k % 2 == 0) ? 1.0 : -1.0;
    return J;
}

RMat boundary_bracket_matrix(const BoundaryConfig& b, int a) { return bracket_from_exponents(star_exponents(b, a)); }

BoundaryConfig star_boundary(const BoundaryConfig& b) {
    BoundaryConfig s;
    s.n = b.n;
    const RMat J = bracket_matrix(b.n);
    for (int a = 0; a < 2; ++a) {
        s.p[a] = star_exponents(b, a);
        const RMat Ja = bracket_from_exponents(s.p[a]);
        RMat m = Ja.inverse() * b.U[a].inverse() * J;
        s.U[a] = m.transpose();
        // exact zeros/ones where the structure demands them
        for (int r = 0; r < b.n; ++r)
            for (int c = 0; c < b.n; ++c)
                if (std::abs(s.U[a](r, c)) < 1e-14) s.U[a](r, c) = 0.0;
        for (int r = 0; r < b.n; ++r)
            if (std::abs(s.U[a](r, s.p[a][r]) - 1.0) < 1e-12) s.U[a](r, s.p[a][r]) = 1.0;
    }
    return s;
}

ProblemDefinition star_problem(const ProblemDefinition& p) {
    ProblemDefinition s;
    s.n = p.n;
    s.cls = p.cls;
    s.grid = p.grid;
    s.F.reserve(p.F.size());
    for (auto& f : p.F) s.F.push_back(star_matrix(f));
    s.boundary = star_boundary(p.boundary);
    s.lambda_sign = (p.n % 2 == 0 ? 1.0 : -1.0) * p.lambda_sign;
    s.is_star = !p.is_star;
    return s;
}

cplx lagrange_bracket(const CVec& z, const CVec& y) {
    const int n = static_cast<int>(z.size());
    cplx s = 0;
    for (int j = 0; j < n; ++j) s += (j % 2 == 0 ? 1.0 : -1.0) * z(j) * y(n - 1 - j);
    return s;
}

cplx apply_boundary_form(const BoundaryConfig& b, int s, int a, const CVec& y) {
    cplx v = 0;
    for (int j = 0; j < b.n; ++j) v += b.U[a](s - 1, j) * y(j);
    return v;
}

}  // namespace qspec
