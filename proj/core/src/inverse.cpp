#include "qspec/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qspec/laurent.hpp"
#include "qspec/parallel.hpp"
#include "qspec/quasi.hpp"

namespace qspec {

namespace {

constexpr double kPi = std::numbers::pi;

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_compatible(const SpectralData& a, const SpectralData& b) {
    if (a.n != b.n) throw ConfigError("target and model orders differ");
    for (int s = 0; s < 2; ++s)
        if (a.boundary.p[s] != b.boundary.p[s]) throw ConfigError("target and model boundary exponents differ");
}

int clip_truncation(const SpectralData& target, const SpectralData& model, int N) {
    const int avail = std::min(target.L, model.L);
    return (N <= 0) ? avail : std::min(N, avail);
}

const SpectralDatum& datum(const SpectralData& target, const SpectralData& model, const IndexV& v) {
    return v.eps == 0 ? target.at(v.l, v.k) : model.at(v.l, v.k);
}

bool near(cplx a, cplx b, double rel) { return std::abs(a - b) <= rel * (1.0 + std::abs(a)); }

cplx bracket(const SolutionField& z, int zi, const SolutionField& y, int yi) {
    const int n = z.n;
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const cplx t = z.at(zi, j) * y.at(yi, n - 1 - j);
        acc += (j % 2 == 0) ? t : -t;
    }
    return acc;
}

// K_{v0,v} = (-1)^eps G~_{v,v0}: <0> coefficient at lambda_{v0} of
// Z_v^T J Phi~_{k0+1}(x, lambda) / (lambda - lambda_v).
cplx kernel(const ModelFields& f, int v, int v0, int node, double tol) {
    const cplx lv = f.lambda[v];
    if (!f.pole_points[v0].empty()) {
        const auto& pts = f.pole_points[v0];
        cplx acc = 0.0;
        for (size_t q = 0; q < pts.size(); ++q) acc += bracket(f.Z[v], node, f.pole_samples[v0][q], node) / (pts[q] - lv);
        return acc / static_cast<double>(pts.size());
    }
    const cplx dl = f.lambda[v0] - lv;
    if (std::abs(dl) <= tol * (1.0 + std::abs(lv))) return bracket(f.Z[v], node, f.dY[v0], node);
    return bracket(f.Z[v], node, f.Y[v0], node) / dl;
}

struct PairWeights {
    std::vector<double> w;  // per (l,k) pair
};

PairWeights pair_weights(const InverseProblem& ip, double x) {
    PairWeights pw;
    const int n = ip.n;
    pw.w.resize(static_cast<size_t>(ip.N) * (n - 1));
    for (int l = 1; l <= ip.N; ++l)
        for (int k = 1; k < n; ++k) pw.w[(l - 1) * (n - 1) + (k - 1)] = weight_w(l, k, x, ip.model.boundary, n);
    return pw;
}

}  // namespace

std::vector<IndexV> index_set(int n, int N) {
    std::vector<IndexV> V;
    V.reserve(static_cast<size_t>(N) * (n - 1) * 2);
    for (int l = 1; l <= N; ++l)
        for (int k = 1; k < n; ++k)
            for (int e = 0; e < 2; ++e) V.push_back({l, k, e});
    return V;
}

XiSequence xi_sequence(const SpectralData& target, const SpectralData& model, int N) {
    check_compatible(target, model);
    N = clip_truncation(target, model, N);
    const int n = target.n;
    const auto& p0 = target.boundary.p[0];
    XiSequence out;
    out.xi.assign(N, 0.0);
    out.theta.assign(N, 0.0);
    for (int l = 1; l <= N; ++l) {
        double acc = 0;
        for (int k = 1; k < n; ++k) {
            const SpectralDatum& a = target.at(l, k);
            const SpectralDatum& b = model.at(l, k);
            const CMat Na = a.weight_matrix(n), Nb = b.weight_matrix(n);
            double dn = 0;
            for (int j = k + 1; j <= n; ++j) dn += std::abs(Na(j - 1, k - 1) - Nb(j - 1, k - 1));
            acc += std::abs(a.lambda - b.lambda) + dn * std::pow(double(l), p0[k - 1] - p0[k]);
        }
        out.xi[l - 1] = acc * std::pow(double(l), 1 - n);
        out.theta[l - 1] = out.xi[l - 1] != 0.0 ? 1.0 / out.xi[l - 1] : 0.0;
    }
    return out;
}

double weight_w(int l, int k, double x, const BoundaryConfig& b, int n) {
    const double cot = std::cos(k * kPi / n) / std::sin(k * kPi / n);
    return std::pow(double(l), -b.p[0][k]) * std::exp(-kPi * x * l * cot);
}

ModelFields model_fields(const ProblemDefinition& model, const SpectralData& target, const SpectralData& model_data,
                         const InverseOptions& opt, const SpectralData* own) {
    check_compatible(target, model_data);
    if (model.n != target.n) throw ConfigError("model problem order differs from the data");
    const int n = model.n;
    const int N = clip_truncation(target, model_data, opt.truncation);
    const ProblemDefinition star = star_problem(model);
    const CMat J0inv = boundary_bracket_matrix(model.boundary, 0).cast<cplx>().inverse();

    ModelFields f;
    f.n = n;
    f.N = N;
    f.V = index_set(n, N);
    const int size = static_cast<int>(f.V.size());
    f.lambda.resize(size);
    f.a.resize(size);
    f.Y.resize(size);
    f.dY.resize(size);
    f.Z.resize(size);
    f.pole_points.resize(size);
    f.pole_samples.resize(size);

    for (int v = 0; v < size; ++v) {
        const IndexV& iv = f.V[v];
        const SpectralDatum& d = datum(target, model_data, iv);
        f.lambda[v] = d.lambda;
        const CMat Nm = d.weight_matrix(n);
        const double sign = iv.eps == 0 ? 1.0 : -1.0;
        f.a[v] = (sign * Nm.row(iv.k) * J0inv).transpose();
    }

    // model eigenvalues per column, for pole detection
    auto model_poles = [&](int col) {
        std::vector<cplx> out;
        if (col < 1 || col > n - 1) return out;
        const SpectralData& d = own ? *own : model_data;
        for (int l = 1; l <= d.L; ++l) out.push_back(d.at(l, col).lambda);
        return out;
    };

    parallel_for(size, opt.workers, [&](int v) {
        const IndexV& iv = f.V[v];
        const cplx lam = f.lambda[v];

        // star column j has the poles of model column n-j
        for (int j = 1; j <= n; ++j) {
            if (f.a[v](j - 1) == cplx(0.0)) continue;
            for (cplx mu : model_poles(n - j))
                if (near(lam, mu, opt.pole_tol))
                    throw NumericalFailure("star Weyl solution has a pole at lambda_{" + std::to_string(iv.l) + "," +
                                           std::to_string(iv.k) + "," + std::to_string(iv.eps) +
                                           "}; multiple-pole models are not supported");
        }
        const PropagatorSet sp = build_propagators(star, lam, false, opt.step);
        SolutionField Z(n, model.grid.points);
        for (int j = 1; j <= n; ++j) {
            const cplx c = f.a[v](j - 1);
            if (c == cplx(0.0)) continue;
            const SolutionField s = weyl_solution(star, sp, j);
            for (size_t t = 0; t < Z.data.size(); ++t) Z.data[t] += c * s.data[t];
        }
        f.Z[v] = std::move(Z);

        bool pole = false;
        double nearest = INFINITY;
        for (cplx mu : model_poles(iv.k + 1)) {
            if (near(lam, mu, opt.pole_tol))
                pole = true;
            else
                nearest = std::min(nearest, std::abs(lam - mu));
        }
        if (!pole) {
            const PropagatorSet pp = build_propagators(model, lam, true, opt.step);
            f.Y[v] = weyl_solution(model, pp, iv.k + 1, &f.dY[v]);
            return;
        }
        for (int u = 0; u < size; ++u)
            if (!near(f.lambda[u], lam, opt.pole_tol)) nearest = std::min(nearest, std::abs(f.lambda[u] - lam));
        const double radius = opt.pole_radius * nearest;
        f.pole_points[v] = circle_nodes(lam, radius, opt.pole_nodes);
        SolutionField mean(n, model.grid.points);
        for (cplx z : f.pole_points[v]) {
            const PropagatorSet pp = build_propagators(model, z, false, opt.step);
            f.pole_samples[v].push_back(weyl_solution(model, pp, iv.k + 1));
            const auto& s = f.pole_samples[v].back();
            for (size_t t = 0; t < mean.data.size(); ++t) mean.data[t] += s.data[t] / double(opt.pole_nodes);
        }
        f.Y[v] = std::move(mean);
    });
    return f;
}

InverseProblem prepare_inverse(const ProblemDefinition& model, const SpectralData& target,
                               const SpectralData& model_data, const InverseOptions& opt,
                               const SpectralData* own) {
    InverseProblem ip;
    ip.n = model.n;
    ip.grid = model.grid;
    ip.model = model;
    ip.target = target;
    ip.model_data = model_data;
    ip.opt = opt;
    ip.fields = model_fields(model, target, model_data, opt, own);
    ip.N = ip.fields.N;
    ip.xi = xi_sequence(target, model_data, ip.N);
    return ip;
}

cplx structural_G(const ModelFields& f, int v, int v0, int node, double coincidence_tol) {
    const cplx k = kernel(f, v, v0, node, coincidence_tol);
    return f.V[v].eps == 0 ? k : -k;
}

MainEquationSystem assemble_main_equation(const InverseProblem& ip, int node) {
    const ModelFields& f = ip.fields;
    const int size = static_cast<int>(f.V.size());
    const int pairs = size / 2;
    MainEquationSystem sys;
    sys.node = node;
    sys.x = ip.grid.x(node);
    const PairWeights pw = pair_weights(ip, sys.x);

    sys.K.resize(size, size);
    for (int v0 = 0; v0 < size; ++v0)
        for (int v = 0; v < size; ++v) sys.K(v0, v) = kernel(f, v, v0, node, ip.opt.coincidence_tol);

    sys.R_tilde.resize(size, size);
    sys.psi_tilde.resize(size);
    for (int p0 = 0; p0 < pairs; ++p0) {
        const int l0 = f.V[2 * p0].l;
        const double th = ip.xi.theta[l0 - 1], w0 = pw.w[p0];
        const cplx f0 = f.Y[2 * p0].at(node, 0), f1 = f.Y[2 * p0 + 1].at(node, 0);
        sys.psi_tilde(2 * p0) = th * (f0 - f1) / w0;
        sys.psi_tilde(2 * p0 + 1) = f1 / w0;
        for (int p = 0; p < pairs; ++p) {
            const int l = f.V[2 * p].l;
            const double xi = ip.xi.xi[l - 1], ratio = pw.w[p] / w0;
            const cplx k00 = sys.K(2 * p0, 2 * p), k01 = sys.K(2 * p0, 2 * p + 1);
            const cplx k10 = sys.K(2 * p0 + 1, 2 * p), k11 = sys.K(2 * p0 + 1, 2 * p + 1);
            // L-block * K-block * T-block
            sys.R_tilde(2 * p0, 2 * p) = ratio * th * (k00 - k10) * xi;
            sys.R_tilde(2 * p0, 2 * p + 1) = ratio * th * ((k00 - k10) + (k01 - k11));
            sys.R_tilde(2 * p0 + 1, 2 * p) = ratio * k10 * xi;
            sys.R_tilde(2 * p0 + 1, 2 * p + 1) = ratio * (k10 + k11);
        }
    }
    sys.row_norm = sys.R_tilde.rowwise().lpNorm<1>().maxCoeff();
    return sys;
}

MainEquationSolution solve_main_equation(const MainEquationSystem& sys) {
    const int size = static_cast<int>(sys.psi_tilde.size());
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(size, size) - sys.R_tilde;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    MainEquationSolution s;
    s.psi = lu.solve(sys.psi_tilde);
    s.residual = (A * s.psi - sys.psi_tilde).lpNorm<Eigen::Infinity>();
    s.rcond = lu.rcond();
    return s;
}

Eigen::VectorXcd phi_from_psi(const InverseProblem& ip, const Eigen::VectorXcd& psi, double x) {
    const PairWeights pw = pair_weights(ip, x);
    Eigen::VectorXcd phi(psi.size());
    for (int p = 0; p < psi.size() / 2; ++p) {
        const double xi = ip.xi.xi[ip.fields.V[2 * p].l - 1], w = pw.w[p];
        phi(2 * p) = w * (xi * psi(2 * p) + psi(2 * p + 1));
        phi(2 * p + 1) = w * psi(2 * p + 1);
    }
    return phi;
}

Eigen::VectorXcd psi_from_phi(const InverseProblem& ip, const Eigen::VectorXcd& phi, double x) {
    const PairWeights pw = pair_weights(ip, x);
    Eigen::VectorXcd psi(phi.size());
    for (int p = 0; p < phi.size() / 2; ++p) {
        const double th = ip.xi.theta[ip.fields.V[2 * p].l - 1], w = pw.w[p];
        psi(2 * p) = th * (phi(2 * p) - phi(2 * p + 1)) / w;
        psi(2 * p + 1) = phi(2 * p + 1) / w;
    }
    return psi;
}

double RecoveredPhi::max_residual_ratio() const {
    double r = 0;
    for (auto& d : nodes) r = std::max(r, d.residual / (1.0 + d.psi_tilde_norm));
    return r;
}

std::vector<std::vector<std::vector<cplx>>> eta_derivatives(const InverseProblem& ip, int orders) {
    const ProblemDefinition star = star_problem(ip.model);
    const DerivativeTable t = ordinary_from_quasi(star.F, orders);
    const ModelFields& f = ip.fields;
    const int nodes = ip.grid.points, size = static_cast<int>(f.V.size());
    std::vector<std::vector<std::vector<cplx>>> out(orders + 1, std::vector<std::vector<cplx>>(size));
    for (int m = 0; m <= orders; ++m)
        for (int v = 0; v < size; ++v) {
            out[m][v].resize(nodes);
            for (int i = 0; i < nodes; ++i)
                out[m][v][i] = t.apply(m, i, [&](int r, int node) { return f.Z[v].at(node, r); });
        }
    return out;
}

RecoveredPhi recover_phi(const InverseProblem& ip, int orders) {
    if (orders > ip.n - 1) throw std::out_of_range("derivative order exceeds n-1");
    const ModelFields& f = ip.fields;
    const int nodes = ip.grid.points, size = static_cast<int>(f.V.size());

    // ordinary derivatives of y_v = phi~_v and eta~_v
    const DerivativeTable ty = ordinary_from_quasi(ip.model.F, orders);
    std::vector<std::vector<std::vector<cplx>>> y(orders + 1, std::vector<std::vector<cplx>>(size));
    for (int m = 0; m <= orders; ++m)
        for (int v = 0; v < size; ++v) {
            y[m][v].resize(nodes);
            for (int i = 0; i < nodes; ++i)
                y[m][v][i] = ty.apply(m, i, [&](int r, int node) { return f.Y[v].at(node, r); });
        }
    const auto eta = eta_derivatives(ip, std::max(0, orders - 1));

    RecoveredPhi out;
    out.orders = orders;
    out.V = f.V;
    out.phi.assign(orders + 1, std::vector<std::vector<cplx>>(size, std::vector<cplx>(nodes)));
    out.nodes.resize(nodes);

    parallel_for(nodes, ip.opt.workers, [&](int node) {
        const MainEquationSystem sys = assemble_main_equation(ip, node);
        const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(size, size) - sys.R_tilde;
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
        const Eigen::VectorXcd psi = lu.solve(sys.psi_tilde);

        NodeDiagnostics& d = out.nodes[node];
        d.x = sys.x;
        d.residual = (A * psi - sys.psi_tilde).lpNorm<Eigen::Infinity>();
        d.psi_tilde_norm = sys.psi_tilde.lpNorm<Eigen::Infinity>();
        d.psi_norm = psi.lpNorm<Eigen::Infinity>();
        d.row_norm = sys.row_norm;
        d.rcond = lu.rcond();

        std::vector<Eigen::VectorXcd> phi(orders + 1);
        phi[0] = phi_from_psi(ip, psi, sys.x);
        // T[i][a] = sum_v phi_v^{(i)} eta_v^{(a)}
        std::vector<std::vector<cplx>> T(orders, std::vector<cplx>(orders, 0.0));
        for (int j = 1; j <= orders; ++j) {
            const int i_new = j - 1;
            for (int a = 0; a + i_new < orders; ++a) {
                cplx acc = 0.0;
                for (int v = 0; v < size; ++v) acc += phi[i_new](v) * eta[a][v][node];
                T[i_new][a] = acc;
            }
            // (I - K) phi^{(j)} = y^{(j)} + sum_{i<j} C(j,i) K^{(j-i)} phi^{(i)},
            // K^{(m)}_{v0,v} = sum_a C(m-1,a) y_{v0}^{(m-1-a)} eta_v^{(a)}
            Eigen::VectorXcd b(size);
            for (int v0 = 0; v0 < size; ++v0) {
                cplx acc = y[j][v0][node];
                for (int i = 0; i < j; ++i) {
                    const int m = j - i;
                    for (int a = 0; a <= m - 1; ++a)
                        acc += binom(j, i) * binom(m - 1, a) * T[i][a] * y[m - 1 - a][v0][node];
                }
                b(v0) = acc;
            }
            phi[j] = phi_from_psi(ip, lu.solve(psi_from_phi(ip, b, sys.x)), sys.x);
        }
        for (int j = 0; j <= orders; ++j)
            for (int v = 0; v < size; ++v) out.phi[j][v][node] = phi[j](v);
    });
    return out;
}

SynthesizedWeyl synthesize_weyl(const InverseProblem& ip, const RecoveredPhi& rec, cplx lambda) {
    const ModelFields& f = ip.fields;
    const int n = ip.n, nodes = ip.grid.points, size = static_cast<int>(f.V.size());
    for (int v = 0; v < size; ++v)
        if (near(lambda, f.lambda[v], 1e-6)) throw NumericalFailure("probe lambda coincides with a data eigenvalue");
    const std::vector<SolutionField> model = weyl_solutions(ip.model, lambda, ip.opt.step);

    SynthesizedWeyl out;
    out.lambda = lambda;
    out.values = SolutionField(n, nodes);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < n; ++j) {
            cplx acc = model[j].at(i, 0), last = 0.0;
            for (int v = 0; v < size; ++v) {
                const cplx term = rec.phi[0][v][i] * bracket(f.Z[v], i, model[j], i) / (lambda - f.lambda[v]);
                acc += term;
                if (f.V[v].l == ip.N) last += term;
            }
            out.values.at(i, j) = acc;
            out.tail = std::max(out.tail, std::abs(last));
        }
    return out;
}

}  // namespace qspec
