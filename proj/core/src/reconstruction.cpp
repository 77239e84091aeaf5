#include "qspec/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qspec/forward.hpp"
#include "qspec/grid.hpp"
#include "qspec/quasi.hpp"

namespace qspec {

namespace {

long long binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<double> real_part(const std::vector<cplx>& z, double* max_imag) {
    std::vector<double> out(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i].real();
        if (max_imag) *max_imag = std::max(*max_imag, std::abs(z[i].imag()));
    }
    return out;
}

void remove_mean(std::vector<double>& f) {
    const double m = integrate(f);
    for (double& v : f) v -= m;
}

SeriesReport report_of(const std::string& name, const SeriesValue& s) {
    SeriesReport r;
    r.name = name;
    r.tail = s.tail;
    real_part(s.values, &r.max_imag);
    return r;
}

std::string t_name(int j1, int j2) { return "T" + std::to_string(j1) + std::to_string(j2); }

}  // namespace

std::vector<long long> step_coefficients_a(int n, int s) {
    std::vector<long long> a(s + 1);
    for (int j = 0; j <= s; ++j) a[j] = binom(n, s - j) * binom(n - s + j - 1, j);
    a[s] += (s % 2 == 1) ? 1 : -1;
    return a;
}

std::vector<long long> step_coefficients_b(int n, int s) {
    const auto a = step_coefficients_a(n, s);
    std::vector<long long> b(s + 1);
    for (int j = 0; j <= s; ++j) b[j] = a[j] - (j > 0 ? b[j - 1] : 0);
    return b;
}

long long regularity_identity(int n, int s) {
    long long acc = 0;
    for (int r = n - s; r <= n; ++r) acc += binom(n, r) * binom(r - 1, n - s - 1) * ((r % 2 == 0) ? 1 : -1);
    return acc + ((s % 2 == 1) ? 1 : -1);
}

long long alternating_identity(int n, int s) {
    const auto a = step_coefficients_a(n, s);
    long long acc = 0;
    for (int j = 0; j <= s; ++j) acc += (j % 2 == 0) ? a[j] : -a[j];
    return acc;
}

SeriesFactors series_factors(const InverseProblem& ip, const RecoveredPhi& rec, const std::vector<RMat>& target_F,
                             int phi_orders, int eta_orders) {
    if (phi_orders > rec.orders) throw std::out_of_range("recovered phi lacks the requested derivative order");
    if (eta_orders > ip.n - 1) throw std::out_of_range("eta order exceeds n-1");
    SeriesFactors f;
    f.n = ip.n;
    f.N = ip.N;
    f.nodes = ip.grid.points;
    f.V = rec.V;
    const int size = static_cast<int>(f.V.size());
    const DerivativeTable t = quasi_from_ordinary(target_F, phi_orders);
    f.phi.assign(phi_orders + 1, std::vector<std::vector<cplx>>(size, std::vector<cplx>(f.nodes)));
    for (int j = 0; j <= phi_orders; ++j)
        for (int v = 0; v < size; ++v)
            for (int i = 0; i < f.nodes; ++i)
                f.phi[j][v][i] = t.apply(j, i, [&](int r, int node) { return rec.phi[r][v][node]; });
    f.eta.assign(eta_orders + 1, std::vector<std::vector<cplx>>(size, std::vector<cplx>(f.nodes)));
    for (int j = 0; j <= eta_orders; ++j)
        for (int v = 0; v < size; ++v)
            for (int i = 0; i < f.nodes; ++i) f.eta[j][v][i] = ip.fields.Z[v].at(i, j);
    return f;
}

SeriesFactors series_factors_ordinary(const InverseProblem& ip, const RecoveredPhi& rec, int eta_orders) {
    SeriesFactors f;
    f.n = ip.n;
    f.N = ip.N;
    f.nodes = ip.grid.points;
    f.V = rec.V;
    f.phi = rec.phi;
    f.eta = eta_derivatives(ip, eta_orders);
    return f;
}

SeriesValue series_T(const SeriesFactors& f, int j1, int j2) {
    if (j1 >= static_cast<int>(f.phi.size()) || j2 >= static_cast<int>(f.eta.size()))
        throw std::out_of_range("series order not available");
    SeriesValue out;
    out.values.assign(f.nodes, 0.0);
    std::vector<cplx> block(f.nodes);
    const int size = static_cast<int>(f.V.size());
    int v = 0;
    while (v < size) {
        const int l = f.V[v].l;
        std::fill(block.begin(), block.end(), 0.0);
        for (; v < size && f.V[v].l == l; ++v)
            for (int i = 0; i < f.nodes; ++i) block[i] += f.phi[j1][v][i] * f.eta[j2][v][i];
        double sup = 0;
        for (int i = 0; i < f.nodes; ++i) {
            out.values[i] += block[i];
            sup = std::max(sup, std::abs(block[i]));
        }
        out.level_sup.push_back(sup);
    }
    out.tail = out.level_sup.empty() ? 0.0 : out.level_sup.back();
    return out;
}

N3Result reconstruct_n3(const SeriesFactors& f, const std::vector<double>& tau1_model) {
    if (f.n != 3) throw std::invalid_argument("reconstruct_n3 needs n = 3");
    const SeriesValue T00 = series_T(f, 0, 0), T10 = series_T(f, 1, 0), T01 = series_T(f, 0, 1);
    N3Result r;
    r.series = {report_of("T00", T00), report_of("T10", T10), report_of("T01", T01)};
    const int M = f.nodes;
    r.tau1.resize(M);
    std::vector<double> hat(M), prod(M);
    for (int i = 0; i < M; ++i) {
        r.tau1[i] = tau1_model[i] - 1.5 * (T10.values[i] + T01.values[i]).real();
        hat[i] = r.tau1[i] - tau1_model[i];
        prod[i] = hat[i] * T00.values[i].real();
    }
    const std::vector<double> cum = cumulative_integral(prod);
    r.sigma0.resize(M);
    for (int i = 0; i < M; ++i) r.sigma0[i] = -hat[i] - 3.0 * T10.values[i].real() - 2.0 * cum[i];
    remove_mean(r.sigma0);
    return r;
}

StepResult reconstruct_even_step(int s, const SeriesFactors& f, const std::vector<double>& tau_model) {
    if (f.n % 2 != 0 || s < 1 || s > f.n - 1) throw std::invalid_argument("step out of range");
    const auto a = step_coefficients_a(f.n, s);
    StepResult r;
    std::vector<cplx> sum(f.nodes, 0.0);
    for (int j = 0; j <= s; ++j) {
        const SeriesValue T = series_T(f, s - j, j);
        r.series.push_back(report_of(t_name(s - j, j), T));
        for (int i = 0; i < f.nodes; ++i) sum[i] += double(a[j]) * T.values[i];
    }
    const double factor = (s % 2 == 0) ? 0.5 : 1.0;
    r.values.resize(f.nodes);
    for (int i = 0; i < f.nodes; ++i) r.values[i] = tau_model[i] - factor * sum[i].real();
    return r;
}

StepResult reconstruct_even_distributional_step(int s, const SeriesFactors& f) {
    if (f.n % 2 != 0 || s < 1 || s > f.n - 1) throw std::invalid_argument("step out of range");
    const auto b = step_coefficients_b(f.n, s);
    StepResult r;
    std::vector<cplx> sum(f.nodes, 0.0);
    for (int j = 0; j < s; ++j) {
        const SeriesValue T = series_T(f, s - j - 1, j);
        r.series.push_back(report_of(t_name(s - j - 1, j), T));
        for (int i = 0; i < f.nodes; ++i) sum[i] += double(b[j]) * T.values[i];
    }
    const double factor = (s % 2 == 0) ? 0.5 : 1.0;
    r.values.resize(f.nodes);
    for (int i = 0; i < f.nodes; ++i) r.values[i] = -factor * sum[i].real();
    remove_mean(r.values);
    return r;
}

std::vector<std::vector<double>> p_from_tau(const CoefficientSet& c) {
    const int n = c.n, M = c.grid.points;
    // tau_nu and its derivatives up to order n-1; tau_{n-1} = 0
    std::vector<std::vector<std::vector<double>>> d(n, std::vector<std::vector<double>>(n + 1));
    for (int nu = 0; nu < n; ++nu) {
        std::vector<double> base(M, 0.0);
        if (nu <= n - 2) {
            const std::string tau = "tau" + std::to_string(nu), sigma = "sigma" + std::to_string(nu);
            if (c.values.count(tau))
                base = c.values.at(tau);
            else if (c.values.count(sigma))
                base = differentiate(c.values.at(sigma));
        }
        d[nu][0] = base;
        for (int m = 1; m <= n; ++m) d[nu][m] = differentiate(d[nu][m - 1]);
    }
    auto tau = [&](int nu, int m) -> const std::vector<double>& { return d[std::min(nu, n - 1)][m]; };

    std::vector<std::vector<double>> p(n - 1, std::vector<double>(M, 0.0));
    for (int s = 0; s <= n - 2; ++s) {
        for (int k = (s + 1) / 2; k <= std::min(s, n / 2 - 1); ++k) {
            const double cf = double(binom(k, s - k));
            if (cf == 0) continue;
            for (int i = 0; i < M; ++i) {
                double v = tau(2 * k, 2 * k - s)[i];
                if (2 * k + 1 <= n - 2) v += tau(2 * k + 1, 2 * k - s + 1)[i];
                p[s][i] += cf * v;
            }
        }
        for (int k = s / 2; k <= std::min(s, (n - 1) / 2) - 1; ++k) {
            if (2 * k + 1 > n - 2 || 2 * k + 1 < s) continue;
            const double cf = 2.0 * double(binom(k, s - k - 1));
            if (cf == 0) continue;
            for (int i = 0; i < M; ++i) p[s][i] += cf * tau(2 * k + 1, 2 * k + 1 - s)[i];
        }
    }
    return p;
}

std::vector<std::vector<double>> p_from_series(const SeriesFactors& f) {
    const int n = f.n;
    std::vector<std::vector<std::vector<double>>> T(n, std::vector<std::vector<double>>(n));
    for (int j1 = 0; j1 < n && j1 < static_cast<int>(f.phi.size()); ++j1)
        for (int j2 = 0; j1 + j2 <= n - 1 && j2 < static_cast<int>(f.eta.size()); ++j2)
            T[j1][j2] = real_part(series_T(f, j1, j2).values, nullptr);
    auto t = [&](int k, int s, int i) {
        double acc = 0;
        for (int r = s; r <= k - 1; ++r) acc += double(binom(k, r + 1) * binom(r, s)) * T[k - r - 1][r - s][i];
        return acc;
    };
    std::vector<std::vector<double>> p(n - 1, std::vector<double>(f.nodes, 0.0));
    for (int s = n - 2; s >= 0; --s)
        for (int i = 0; i < f.nodes; ++i) {
            double v = (((n - s - 1) % 2 == 0) ? 1.0 : -1.0) * T[0][n - s - 1][i] - t(n, s, i);
            for (int k = s + 1; k <= n - 2; ++k) v -= p[k][i] * t(k, s, i);
            p[s][i] = v;
        }
    return p;
}

double estimate_mean_tau1(const SpectralData& d) {
    if (d.n != 3) throw std::invalid_argument("mean estimate implemented for n = 3");
    const double pi = std::numbers::pi;
    double total = 0;
    int used = 0;
    for (int k = 1; k <= 2; ++k) {
        bool known = true;
        const double chi = ladder_shift(3, k, d.boundary, &known);
        const double sign = ((3 - k) % 2 == 0) ? 1.0 : -1.0;
        // least squares of l (t - l) = c + e / l on the upper half of the levels
        double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
        for (int l = std::max(1, d.L / 2); l <= d.L; ++l) {
            const cplx rho = std::pow(sign * d.at(l, k).lambda, 1.0 / 3.0);
            const double t = rho.real() / column_rate(3, k) - chi;
            const double y = l * (t - l), g = 1.0 / l;
            s00 += 1;
            s01 += g;
            s11 += g * g;
            r0 += y;
            r1 += y * g;
        }
        const double det = s00 * s11 - s01 * s01;
        if (det <= 0) continue;
        const double c = (r0 * s11 - r1 * s01) / det;
        total += -2.0 * pi * pi * c;
        ++used;
    }
    return used ? total / used : 0.0;
}

SummabilityReport summability(const XiSequence& xi, int exponent) {
    SummabilityReport r;
    r.exponent = exponent;
    double acc = 0;
    for (size_t l = 1; l <= xi.xi.size(); ++l) {
        const double term = std::pow(double(l), exponent) * xi.xi[l - 1];
        acc += term * term;
        r.partial_sums.push_back(acc);
    }
    const size_t L = r.partial_sums.size();
    if (L > 10 && acc > 0) r.last_decade_increment = (acc - r.partial_sums[L - 11]) / acc;
    return r;
}

}  // namespace qspec
