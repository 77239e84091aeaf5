#include "qspec/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "qspec/laurent.hpp"
#include "qspec/parallel.hpp"

namespace qspec {

namespace {

constexpr double kPi = std::numbers::pi;

double ray_sign(int n, int k) { return ((n - k) % 2 == 0) ? 1.0 : -1.0; }

// Continuous ladder coordinate: lambda = sign (rate (t + chi))^n.
double ladder_coordinate(int n, int k, cplx lambda, double chi) {
    const cplx z = lambda * ray_sign(n, k);
    return std::pow(z, 1.0 / n).real() / column_rate(n, k) - chi;
}

cplx ladder_point(int n, int k, double t, double chi) {
    return ray_sign(n, k) * std::pow(column_rate(n, k) * (t + chi), n);
}

Scaled delta_kk(const ProblemDefinition& p, int k, cplx lambda, const StepOptions& step) {
    return char_minors(p, lambda, k, false, step).diagonal();
}

Scaled cauchy_derivative(const ProblemDefinition& p, int k, cplx center, double radius, int nodes,
                         const StepOptions& step) {
    std::vector<Scaled> s;
    s.reserve(nodes);
    for (cplx z : circle_nodes(center, radius, nodes)) s.push_back(delta_kk(p, k, z, step));
    return laurent_from_samples(s, radius, 1);
}

cplx ratio_value(const Scaled& a, const Scaled& b) {
    return (a.mantissa / b.mantissa) * std::exp(a.log_scale - b.log_scale);
}

std::optional<EigenRecord> newton_root(const ProblemDefinition& p, int k, cplx seed, double gap,
                                       const LocateOptions& opt) {
    cplx lambda = seed;
    Scaled f = delta_kk(p, k, lambda, opt.step);
    Scaled df;
    bool have_df = false;
    double last_step = INFINITY;
    const double rdiff = opt.derivative_radius * gap;
    for (int it = 1; it <= opt.max_newton; ++it) {
        if (f.mantissa == cplx(0.0)) return EigenRecord{0, k, lambda, {}, 0, it, gap};
        if (!have_df) {
            df = cauchy_derivative(p, k, lambda, rdiff, opt.newton_nodes, opt.step);
            have_df = true;
        }
        cplx step = -ratio_value(f, df);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
        if (std::abs(step) > 0.5 * gap) step *= 0.5 * gap / std::abs(step);
        const bool tiny = std::abs(step) < 1e3 * opt.tol * std::abs(lambda);
        cplx next = lambda + step;
        Scaled fn = delta_kk(p, k, next, opt.step);
        for (int h = 0; h < 6 && !tiny && fn.log_abs() > f.log_abs() + 1e-9; ++h) {
            step *= 0.5;
            next = lambda + step;
            fn = delta_kk(p, k, next, opt.step);
            have_df = false;
        }
        lambda = next;
        f = fn;
        if (std::abs(lambda - seed) > 1.5 * gap) return std::nullopt;
        const double sz = std::abs(step);
        if (sz <= opt.tol * std::abs(lambda)) return EigenRecord{0, k, lambda, {}, 0, it, gap};
        if (sz > 0.1 * last_step) have_df = false;
        last_step = sz;
    }
    return std::nullopt;
}

}  // namespace

double column_rate(int n, int k) { return kPi / std::sin(kPi * k / n); }

double ladder_shift(int n, int k, const BoundaryConfig& b, bool* known) {
    if (known) *known = true;
    if (b.is_standard()) {
        if (n == 2) return 0.0;
        if (n == 3) return 1.0 / 6.0;
        if (n == 4) return k == 2 ? 0.5 : 0.25;
    }
    if (known) *known = false;
    return 0.0;
}

cplx eigenvalue_predictor(int n, int k, int l, double chi) { return ladder_point(n, k, l, chi); }

double predicted_gap(int n, int k, int l, double chi) {
    const cplx here = ladder_point(n, k, l, chi);
    double g = std::abs(ladder_point(n, k, l + 1, chi) - here);
    if (l >= 2) g = std::min(g, std::abs(here - ladder_point(n, k, l - 1, chi)));
    return g;
}

int winding_number(const ProblemDefinition& p, int k, cplx center, double radius, int samples,
                   const StepOptions& step) {
    auto phase_at = [&](double theta) {
        return std::arg(delta_kk(p, k, center + std::polar(radius, theta), step).mantissa);
    };
    auto wrap = [](double d) {
        while (d > kPi) d -= 2 * kPi;
        while (d < -kPi) d += 2 * kPi;
        return d;
    };
    double total = 0;
    // refine any arc whose phase jump is too large to be trusted
    auto segment = [&](auto&& self, double t0, double a0, double t1, double a1, int depth) -> double {
        const double d = wrap(a1 - a0);
        if (std::abs(d) < kPi / 2 || depth > 8) return d;
        const double tm = 0.5 * (t0 + t1);
        const double am = phase_at(tm);
        return self(self, t0, a0, tm, am, depth + 1) + self(self, tm, am, t1, a1, depth + 1);
    };
    std::vector<double> th(samples + 1), ph(samples + 1);
    for (int q = 0; q <= samples; ++q) {
        th[q] = 2 * kPi * q / samples;
        ph[q] = (q == samples) ? ph[0] : phase_at(th[q]);
    }
    for (int q = 0; q < samples; ++q) total += segment(segment, th[q], ph[q], th[q + 1], ph[q + 1], 0);
    return static_cast<int>(std::lround(total / (2 * kPi)));
}

std::vector<EigenRecord> locate_eigenvalues(const ProblemDefinition& p, int k, int L, const LocateOptions& opt) {
    const int n = p.n;
    const double chi = ladder_shift(n, k, p.boundary);
    std::vector<EigenRecord> found;
    auto duplicate = [&](cplx z, double gap) {
        for (auto& r : found)
            if (std::abs(r.lambda - z) < 1e-6 * gap) return true;
        return false;
    };
    double t_prev = NAN;
    for (int l = 1; l <= L; ++l) {
        const double gap = predicted_gap(n, k, l, chi);
        const double t_seed = std::isnan(t_prev) ? static_cast<double>(l) : t_prev + 1.0;
        std::optional<EigenRecord> rec;
        for (double shift : {0.0, 0.25, -0.25, 0.5, -0.5, 0.125, -0.125}) {
            rec = newton_root(p, k, ladder_point(n, k, t_seed + shift, chi), gap, opt);
            if (rec && !duplicate(rec->lambda, gap)) break;
            rec.reset();
        }
        if (!rec) throw NumericalFailure("eigenvalue search failed for l=" + std::to_string(l) + ", k=" + std::to_string(k));
        t_prev = ladder_coordinate(n, k, rec->lambda, chi);
        found.push_back(*rec);
    }
    std::sort(found.begin(), found.end(), [&](const EigenRecord& a, const EigenRecord& b) {
        return ladder_coordinate(n, k, a.lambda, chi) < ladder_coordinate(n, k, b.lambda, chi);
    });
    for (int i = 0; i < L; ++i) {
        auto& r = found[i];
        r.l = i + 1;
        r.k = k;
        r.gap = predicted_gap(n, k, r.l, chi);
        if (i > 0) r.gap = std::min(r.gap, std::abs(r.lambda - found[i - 1].lambda));
        if (i + 1 < L) r.gap = std::min(r.gap, std::abs(found[i + 1].lambda - r.lambda));
    }
    parallel_for(L, opt.workers, [&](int i) {
        auto& r = found[i];
        r.derivative = cauchy_derivative(p, k, r.lambda, opt.derivative_radius * r.gap, opt.derivative_nodes, opt.step);
        r.winding = winding_number(p, k, r.lambda, opt.winding_radius * r.gap, opt.winding_samples, opt.step);
    });
    return found;
}

cplx weight_number(const ProblemDefinition& p, const EigenRecord& rec, const StepOptions& step) {
    const MinorGroup g = char_minors(p, rec.lambda, rec.k, true, step);
    return -ratio_value(g.off(rec.k + 1), rec.derivative);
}

cplx weight_number_contour(const ProblemDefinition& p, int k, cplx lambda0, double radius, int nodes,
                           const StepOptions& step) {
    return laurent_coefficient(
        [&](cplx z) {
            const MinorGroup g = char_minors(p, z, k, true, step);
            return cplx(-g.off(k + 1).mantissa / g.diag);
        },
        lambda0, radius, -1, nodes);
}

CMat weight_matrix_contour(const ProblemDefinition& p, cplx lambda0, double radius, int nodes,
                           const StepOptions& step) {
    std::vector<CMat> samples;
    for (cplx z : circle_nodes(lambda0, radius, nodes)) samples.push_back(weyl_matrix(p, z, step));
    const CMat a0 = laurent_from_samples(samples, radius, 0);
    const CMat am1 = laurent_from_samples(samples, radius, -1);
    return a0.inverse() * am1;
}

CMat SpectralDatum::weight_matrix(int n) const {
    if (full) return N;
    CMat m = CMat::Zero(n, n);
    m(k, k - 1) = beta;
    return m;
}

const SpectralDatum& SpectralData::at(int l, int k) const {
    const size_t idx = static_cast<size_t>(l - 1) * (n - 1) + (k - 1);
    if (l < 1 || l > L || k < 1 || k >= n || idx >= data.size()) throw std::out_of_range("spectral datum out of range");
    const auto& d = data[idx];
    if (d.l != l || d.k != k) throw std::logic_error("spectral data not in (l,k) order");
    return d;
}

SpectralData SpectralData::truncated(int levels) const {
    SpectralData out = *this;
    out.L = std::min(levels, L);
    out.data.clear();
    for (auto& d : data)
        if (d.l <= out.L) out.data.push_back(d);
    return out;
}

std::map<std::string, double> coefficient_means(const CoefficientSet& c) {
    std::map<std::string, double> m;
    for (auto& [name, v] : c.values) m[name] = is_antiderivative(name) ? 0.0 : c.mean(name);
    return m;
}

SpectralData assemble_spectral_data(const ProblemDefinition& p, int L, const LocateOptions& opt) {
    const int n = p.n;
    std::vector<std::vector<EigenRecord>> cols(n - 1);
    LocateOptions inner = opt;
    inner.workers = std::max(1, opt.workers / (n - 1));
    parallel_for(n - 1, opt.workers, [&](int i) { cols[i] = locate_eigenvalues(p, i + 1, L, inner); });

    SpectralData out;
    out.n = n;
    out.cls = p.cls;
    out.grid_points = p.grid.points;
    out.boundary = p.boundary;
    out.L = L;
    if (p.coefficients) out.means = coefficient_means(*p.coefficients);
    out.data.resize(static_cast<size_t>(L) * (n - 1));

    parallel_for(L * (n - 1), opt.workers, [&](int idx) {
        const int l = idx / (n - 1) + 1, k = idx % (n - 1) + 1;
        const EigenRecord& r = cols[k - 1][l - 1];
        SpectralDatum d;
        d.l = l;
        d.k = k;
        d.lambda = r.lambda;
        d.winding = r.winding;
        // an eigenvalue shared with a neighbouring column defeats the minor ratio
        double nearest_other = INFINITY;
        bool coincident = false;
        for (int kk = 1; kk < n; ++kk) {
            if (kk == k) continue;
            for (auto& o : cols[kk - 1]) {
                const double dist = std::abs(o.lambda - r.lambda);
                const bool same = dist < 1e-9 * std::abs(r.lambda);
                if (same && std::abs(kk - k) == 1) coincident = true;
                if (!same) nearest_other = std::min(nearest_other, dist);
            }
        }
        if (!coincident) {
            d.beta = weight_number(p, r, opt.step);
        } else {
            const double radius = std::min(0.25 * nearest_other, opt.derivative_radius * r.gap);
            d.full = true;
            d.N = weight_matrix_contour(p, r.lambda, radius, opt.derivative_nodes, opt.step);
        }
        out.data[idx] = d;
    });
    return out;
}

ClassWReport check_class_W(const SpectralData& d) {
    ClassWReport rep;
    for (auto& x : d.data) {
        const std::string tag = "(l=" + std::to_string(x.l) + ", k=" + std::to_string(x.k) + ")";
        if (x.winding != 1) {
            rep.ok = false;
            rep.violations.push_back("zero of the characteristic minor at " + tag + " has multiplicity " +
                                     std::to_string(x.winding));
        }
        if (!x.full && (x.beta == cplx(0.0) || !std::isfinite(std::abs(x.beta)))) {
            rep.ok = false;
            rep.violations.push_back("weight number at " + tag + " is zero or non-finite");
        }
        for (auto& y : d.data) {
            const double rel = std::abs(x.lambda - y.lambda) / std::max(1.0, std::abs(x.lambda));
            if (std::abs(y.k - x.k) == 1) rep.min_relative_separation = std::min(rep.min_relative_separation, rel);
            // two located roots on one point: a double zero the winding test missed
            if (y.k == x.k && y.l > x.l && rel < 1e-8) {
                rep.ok = false;
                rep.violations.push_back("zeros " + tag + " and (l=" + std::to_string(y.l) + ", k=" + std::to_string(y.k) +
                                         ") of the characteristic minor coincide");
            }
        }
    }
    return rep;
}

}  // namespace qspec
