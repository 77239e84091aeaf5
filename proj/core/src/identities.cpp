#include "qspec/identities.hpp"

#include <algorithm>
#include <cmath>

#include "qspec/grid.hpp"
#include "qspec/integrator.hpp"

namespace qspec {

namespace {

CMat solution_matrix(const std::vector<SolutionField>& fields, int node) {
    const int n = static_cast<int>(fields.size());
    CMat P(n, n);
    for (int k = 0; k < n; ++k) P.col(k) = fields[k].vec(node);
    return P;
}

double max_abs(const CMat& A) { return A.cwiseAbs().maxCoeff(); }

// Least-squares fit of y = a + b x; returns (a, b).
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double b = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return {(sy - b * sx) / m, b};
}

}  // namespace

double determinant_drift(const ProblemDefinition& p, cplx lambda, const StepOptions& step) {
    const FundamentalSolution C = integrate_fundamental(p, lambda, step);
    double drift = 0;
    for (const cplx& d : C.det) drift = std::max(drift, std::abs(d / C.det.front() - 1.0));
    return drift;
}

double weyl_duality_defect(const ProblemDefinition& p, cplx lambda, const StepOptions& step) {
    const CMat M = weyl_matrix(p, lambda, step);
    const CMat Ms = weyl_matrix(star_problem(p), lambda, step);
    const CMat J0 = boundary_bracket_matrix(p.boundary, 0).cast<cplx>();
    return max_abs(Ms.transpose() * J0 * M - J0) / max_abs(J0);
}

double solution_duality_defect(const ProblemDefinition& p, cplx lambda, std::span<const int> nodes,
                               const StepOptions& step) {
    const auto Phi = weyl_solutions(p, lambda, step);
    const auto Phis = weyl_solutions(star_problem(p), lambda, step);
    const CMat J = bracket_matrix(p.n).cast<cplx>();
    const CMat J0 = boundary_bracket_matrix(p.boundary, 0).cast<cplx>();
    double worst = 0;
    for (int node : nodes) {
        const CMat A = solution_matrix(Phis, node).transpose() * J * solution_matrix(Phi, node);
        worst = std::max(worst, max_abs(A - J0) / max_abs(J0));
    }
    return worst;
}

double bracket_derivative_defect(const ProblemDefinition& p, cplx lambda, cplx mu, const StepOptions& step) {
    const int n = p.n, nodes = p.grid.points;
    const auto Y = weyl_solutions(p, lambda, step);
    const auto Z = weyl_solutions(star_problem(p), mu, step);
    double worst = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            std::vector<cplx> br(nodes), rhs(nodes);
            for (int i = 0; i < nodes; ++i) {
                br[i] = lagrange_bracket(Z[j].vec(i), Y[k].vec(i));
                rhs[i] = (lambda - mu) * Y[k].at(i, 0) * Z[j].at(i, 0);
            }
            const auto d = differentiate(br);
            double err = 0, scale = 0;
            // one-sided stencils at the ends are less accurate; skip two nodes
            for (int i = 2; i < nodes - 2; ++i) {
                err = std::max(err, std::abs(d[i] - rhs[i]));
                scale = std::max(scale, std::abs(rhs[i]));
            }
            if (scale > 0) worst = std::max(worst, err / scale);
        }
    return worst;
}

double kernel_derivative_defect(const ProblemDefinition& p, cplx lambda, cplx mu, const StepOptions& step) {
    const int n = p.n, nodes = p.grid.points;
    const auto Pl = weyl_solutions(p, lambda, step);
    const auto Pm = weyl_solutions(p, mu, step);
    const auto Ps = weyl_solutions(star_problem(p), mu, step);
    const CMat J0inv = boundary_bracket_matrix(p.boundary, 0).cast<cplx>().inverse();

    std::vector<CMat> D(nodes), Dx(nodes);
    for (int i = 0; i < nodes; ++i) {
        D[i] = solution_matrix(Pm, i).inverse() * solution_matrix(Pl, i) / (lambda - mu);
        CVec phi(n), phis(n);
        for (int k = 0; k < n; ++k) {
            phi(k) = Pl[k].at(i, 0);
            phis(k) = Ps[k].at(i, 0);
        }
        Dx[i] = J0inv * phis * phi.transpose();
    }
    double err = 0, scale = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            std::vector<cplx> entry(nodes);
            for (int i = 0; i < nodes; ++i) entry[i] = D[i](r, c);
            const auto d = differentiate(entry);
            for (int i = 2; i < nodes - 2; ++i) {
                err = std::max(err, std::abs(d[i] - Dx[i](r, c)));
                scale = std::max(scale, std::abs(Dx[i](r, c)));
            }
        }
    return scale > 0 ? err / scale : err;
}

ResidueChecks residue_checks(const ProblemDefinition& p, const SpectralData& d, int contour_checks,
                             const StepOptions& step) {
    ResidueChecks out;
    const int n = d.n;
    for (const SpectralDatum& s : d.data) {
        const CMat N = s.weight_matrix(n);
        const double norm = max_abs(N);
        if (norm == 0) continue;
        out.nilpotency = std::max(out.nilpotency, max_abs(N * N) / (norm * norm));
        for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c) out.upper_part = std::max(out.upper_part, std::abs(N(r, c)) / norm);
        if (s.full || out.compared >= contour_checks) continue;
        const double chi = ladder_shift(n, s.k, p.boundary);
        const double radius = 0.1 * predicted_gap(n, s.k, s.l, chi);
        const cplx beta = weight_number_contour(p, s.k, s.lambda, radius, 32, step);
        out.beta_agreement = std::max(out.beta_agreement, std::abs(beta - s.beta) / std::abs(s.beta));
        ++out.compared;
    }
    return out;
}

double fit_ladder_shift(const SpectralData& d, int k, int l0, int l1) {
    std::vector<double> x, y;
    const double rate = column_rate(d.n, k);
    for (int l = l0; l <= std::min(l1, d.L); ++l) {
        const double t = std::pow(std::abs(d.at(l, k).lambda), 1.0 / d.n) / rate;
        x.push_back(1.0 / l);
        y.push_back(t - l);
    }
    return line_fit(x, y).first;
}

double fit_weight_exponent(const SpectralData& d, int k, int l0, int l1) {
    std::vector<double> x, y;
    for (int l = l0; l <= std::min(l1, d.L); ++l) {
        const SpectralDatum& s = d.at(l, k);
        if (s.full) continue;
        x.push_back(std::log(static_cast<double>(l)));
        y.push_back(std::log(std::abs(s.beta)));
    }
    return line_fit(x, y).second;
}

int weight_exponent(const BoundaryConfig& b, int k) { return b.n - 1 + b.p[0][k] - b.p[0][k - 1]; }

SumIdentity sum_identity(const ProblemDefinition& target, const ProblemDefinition& model, const SpectralData& target_data,
                         const SpectralData& model_data, const InverseOptions& opt, std::span<const int> nodes) {
    const InverseProblem tilde = prepare_inverse(model, target_data, model_data, opt);
    const InverseProblem plain = prepare_inverse(target, target_data, model_data, opt, &target_data);
    SumIdentity out;
    for (int node : nodes) {
        const Eigen::MatrixXcd Rt = assemble_main_equation(tilde, node).R_tilde;
        const Eigen::MatrixXcd R = assemble_main_equation(plain, node).R_tilde;
        out.defect = std::max(out.defect, (R - Rt - Rt * R).cwiseAbs().maxCoeff());
        out.scale = std::max(out.scale, R.cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace qspec
