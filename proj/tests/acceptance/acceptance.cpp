// Acceptance suite: one PASS/FAIL line per criterion, measured values beneath.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qspec/grid.hpp"
#include "qspec/identities.hpp"
#include "qspec/pipeline.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace qspec;

constexpr int kPoints = 401;
constexpr int kLevels = 25;
constexpr std::array<int, 4> kLadder = {10, 15, 20, 25};

// tolerances
constexpr double kDetDrift = 1e-8;
constexpr double kDuality = 1e-6;
constexpr double kBracket = 1e-4;
constexpr double kNilpotent = 1e-8;
constexpr double kBetaAgreement = 1e-6;
constexpr int kContourData = 12;
constexpr double kChiTol = 0.02;
constexpr double kExponentTol = 0.2;
constexpr double kZeroPerturbation = 1e-10;
constexpr double kZeroModelL2 = 1e-6;
constexpr double kN3Tau1 = 0.05;
constexpr double kN3Sigma0 = 0.08;
constexpr double kN4Regular = 0.10;
constexpr double kN4Sigma2 = 0.10;
constexpr double kResidual = 1e-10;
constexpr double kSumIdentity = 1e-6;
constexpr double kPlateau = 0.05;

int failures = 0;

void verdict(int id, const char* title, bool pass) {
    std::printf("criterion %d %-34s %s\n", id, title, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class... A>
void detail(const char* fmt, A... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

struct Fixture {
    std::string name;
    CoefficientSet truth;
    ProblemDefinition problem;
    SpectralData data;
};

Fixture make_fixture(std::string name, CoefficientSet c) {
    const auto t0 = std::chrono::steady_clock::now();
    Fixture f{std::move(name), c, build_problem(c), {}};
    f.data = assemble_spectral_data(f.problem, kLevels);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("# %s: L=%d, M=%d, forward %.1f s\n", f.name.c_str(), kLevels, kPoints, s);
    return f;
}

double sup_abs(const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double sup_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double l2_gap(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2_norm(d);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

bool non_increasing(const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1])) return false;
    return true;
}

std::string series(const std::vector<double>& v) {
    std::string s;
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%s%.4g", s.empty() ? "" : " ", x);
        s += buf;
    }
    return s;
}

void structural_identities(const std::vector<const Fixture*>& fixtures) {
    std::mt19937 rng(20240611);
    // |lambda| log-uniform up to 1e4, directions away from the real axis
    std::uniform_real_distribution<double> logr(0.0, std::log(1e4)), arg(0.2, std::numbers::pi - 0.2);
    auto draw = [&](int count) {
        std::vector<cplx> out;
        for (int i = 0; i < count; ++i) out.push_back(std::polar(std::exp(logr(rng)), (i % 2 ? -1.0 : 1.0) * arg(rng)));
        return out;
    };
    bool pass = true;
    for (const Fixture* f : fixtures) {
        const ProblemDefinition& p = f->problem;
        const int M = p.grid.points;
        const std::array<int, 5> nodes = {0, M / 4, M / 2, 3 * M / 4, M - 1};

        double det = 0;
        for (cplx z : draw(20)) det = std::max(det, determinant_drift(p, z));

        double mjm = 0, pjp = 0, wron = 0, ddx = 0, worst_pjp_at = 0;
        const std::vector<cplx> lam = draw(10);
        for (size_t i = 0; i < lam.size(); ++i) {
            mjm = std::max(mjm, weyl_duality_defect(p, lam[i]));
            const double d = solution_duality_defect(p, lam[i], nodes);
            if (d > pjp) {
                pjp = d;
                worst_pjp_at = std::abs(lam[i]);
            }
            const cplx mu = lam[(i + 1) % lam.size()];
            wron = std::max(wron, bracket_derivative_defect(p, lam[i], mu));
            ddx = std::max(ddx, kernel_derivative_defect(p, lam[i], mu));
        }
        detail("%s: det drift %.3e (< %.0e), MJM %.3e, PJP %.3e at |lambda| %.0f (< %.0e), wron2 %.3e, Ddx %.3e (< %.0e)",
               f->name.c_str(), det, kDetDrift, mjm, pjp, worst_pjp_at, kDuality, wron, ddx, kBracket);
        pass = pass && det < kDetDrift && mjm < kDuality && pjp < kDuality && wron < kBracket && ddx < kBracket;
    }
    verdict(1, "structural identities", pass);
}

void spectral_structure(const std::vector<const Fixture*>& fixtures) {
    bool pass = true;
    for (const Fixture* f : fixtures) {
        const ResidueChecks rc = residue_checks(f->problem, f->data, kContourData);
        detail("%s: |N^2|/|N|^2 %.3e, upper part %.3e (< %.0e), beta contour vs minor %.3e (< %.0e) on %d data",
               f->name.c_str(), rc.nilpotency, rc.upper_part, kNilpotent, rc.beta_agreement, kBetaAgreement,
               rc.compared);
        pass = pass && rc.nilpotency < kNilpotent && rc.upper_part < kNilpotent &&
               rc.beta_agreement < kBetaAgreement && rc.compared >= 10;
    }
    verdict(2, "spectral-data structure", pass);
}

void asymptotics(const Fixture& n3) {
    bool pass = true;
    for (int k = 1; k <= 2; ++k) {
        const double chi = fit_ladder_shift(n3.data, k, 10, kLevels);
        const double slope = fit_weight_exponent(n3.data, k, 10, kLevels);
        const int expected = weight_exponent(n3.data.boundary, k);
        detail("k=%d: chi %.5f (1/6 +- %.2f), beta exponent %.4f (%d +- %.1f)", k, chi, kChiTol, slope, expected,
               kExponentTol);
        pass = pass && std::abs(chi - 1.0 / 6.0) < kChiTol && std::abs(slope - expected) < kExponentTol;
    }
    verdict(3, "asymptotics", pass);
}

bool zero_perturbation_case(const char* name, const CoefficientSet& c, int L) {
    const ProblemDefinition p = build_problem(c);
    const SpectralData d = assemble_spectral_data(p, L);
    InverseOptions o;
    o.truncation = L;
    const InverseProblem ip = prepare_inverse(p, d, d, o);

    double xi = 0, rt = 0, dpsi = 0;
    for (double v : ip.xi.xi) xi = std::max(xi, std::abs(v));
    const int M = c.grid.points;
    for (int node : {0, M / 3, 2 * M / 3, M - 1}) {
        const MainEquationSystem sys = assemble_main_equation(ip, node);
        rt = std::max(rt, sup_abs(sys.R_tilde));
        const MainEquationSolution sol = solve_main_equation(sys);
        dpsi = std::max(dpsi, sup_abs(Eigen::VectorXcd(sol.psi - sys.psi_tilde)));
    }

    // every step formula with the problem itself as model
    double gap = 0;
    if (c.cls == OperatorClass::N3Mixed) {
        const RecoveredPhi rec = recover_phi(ip, 1);
        const N3Result r = reconstruct_n3(series_factors(ip, rec, p.F, 1, 1), c["tau1"]);
        gap = std::max(l2_gap(r.tau1, c["tau1"]), l2_gap(r.sigma0, c["sigma0"]));
    } else {
        for (int s = 1; s <= c.n - 1; ++s) {
            const std::string coef = "tau" + std::to_string(c.n - s - 1);
            const RecoveredPhi rec = recover_phi(ip, s);
            const StepResult r = reconstruct_even_step(s, series_factors(ip, rec, p.F, s, s), c[coef]);
            gap = std::max(gap, l2_gap(r.values, c[coef]));
        }
    }
    detail("%s: max xi %.3e, max |R~| %.3e, max |psi - psi~| %.3e (< %.0e), coefficient L2 gap %.3e (< %.0e)", name,
           xi, rt, dpsi, kZeroPerturbation, gap, kZeroModelL2);
    return xi < kZeroPerturbation && rt < kZeroPerturbation && dpsi < kZeroPerturbation && gap < kZeroModelL2;
}

void zero_perturbation() {
    CoefficientSet n3 = make_coefficient_set(OperatorClass::N3Mixed, 3, kPoints);
    assign_coefficient(n3, "tau1", std::vector<double>(kPoints, 0.3));
    CoefficientSet n4 = make_coefficient_set(OperatorClass::RegularEven, 4, kPoints);
    assign_coefficient(n4, "tau2", std::vector<double>(kPoints, 0.1));
    assign_coefficient(n4, "tau0", std::vector<double>(kPoints, 0.2));
    const bool a = zero_perturbation_case("n=3 constant tau1", n3, 10);
    const bool b = zero_perturbation_case("n=4 constant tau2, tau0", n4, 10);
    verdict(4, "zero-perturbation inversion", a && b);
}

// errors[step coefficient][ladder position]
std::map<std::string, std::vector<double>> ladder_errors(const Fixture& f) {
    std::map<std::string, std::vector<double>> err;
    for (int L : kLadder) {
        const auto t0 = std::chrono::steady_clock::now();
        InversionOptions opt;
        opt.truncation = L;
        opt.truth = f.truth;
        const InversionResult r = run_inversion(f.data.truncated(L), opt);
        std::string line;
        for (const StepReport& s : r.steps) {
            err[s.coefficient].push_back(*s.error);
            char buf[64];
            std::snprintf(buf, sizeof buf, " %s %.4g", s.coefficient.c_str(), *s.error);
            line += buf;
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        detail("%s L=N=%d:%s (%.1f s)", f.name.c_str(), L, line.c_str(), sec);
    }
    return err;
}

void roundtrip_n3(const Fixture& n3) {
    auto err = ladder_errors(n3);
    const auto& t = err["tau1"];
    const auto& s = err["sigma0"];
    const bool thresholds = t.back() < kN3Tau1 && s.back() < kN3Sigma0;
    const bool gate = strictly_decreasing(t) && strictly_decreasing(s);
    detail("tau1 %s (final < %.2f), sigma0 %s (final < %.2f)", series(t).c_str(), kN3Tau1, series(s).c_str(),
           kN3Sigma0);
    detail("thresholds %s, strict decrease %s", thresholds ? "met" : "missed", gate ? "holds" : "broken");
    verdict(5, "round trip n=3", thresholds && gate);
}

void roundtrip_n4_regular(const Fixture& f) {
    auto err = ladder_errors(f);
    bool pass = true;
    for (const char* c : {"tau2", "tau1", "tau0"}) {
        const auto& e = err[c];
        const bool ok = e.back() < kN4Regular && non_increasing(e);
        detail("%s %s (final < %.2f, non-increasing): %s", c, series(e).c_str(), kN4Regular, ok ? "ok" : "no");
        pass = pass && ok;
    }
    verdict(6, "round trip n=4 regular", pass);
}

void roundtrip_n4_distributional(const Fixture& f) {
    auto err = ladder_errors(f);
    const auto& s2 = err["sigma2"];
    bool pass = s2.back() < kN4Sigma2;
    detail("sigma2 %s (final < %.2f)", series(s2).c_str(), kN4Sigma2);
    for (const char* c : {"sigma2", "sigma1", "sigma0"}) {
        const bool mono = non_increasing(err[c]);
        if (c != std::string("sigma2")) detail("%s %s", c, series(err[c]).c_str());
        detail("%s improves with N: %s", c, mono ? "yes" : "no");
        pass = pass && mono;
    }
    verdict(7, "round trip n=4 distributional", pass);
}

void main_equation_health(const Fixture& n3) {
    const CoefficientSet m = first_step_model(n3.data);
    const ProblemDefinition mp = build_problem(m);
    const SpectralData md = assemble_spectral_data(mp, kLevels);
    InverseOptions o;
    o.truncation = kLevels;
    const InverseProblem ip = prepare_inverse(mp, n3.data, md, o);
    const double residual = recover_phi(ip, 0).max_residual_ratio();
    const std::array<int, 3> nodes = {kPoints / 4, kPoints / 2, 3 * kPoints / 4};
    const SumIdentity si = sum_identity(n3.problem, mp, n3.data, md, o, nodes);
    const double rel = si.scale > 0 ? si.defect / si.scale : si.defect;
    detail("N=%d: residual / (1 + |psi~|) %.3e (< %.0e), |R - R~ - R~R| / |R| %.3e (< %.0e) at 3 nodes", kLevels,
           residual, kResidual, rel, kSumIdentity);
    verdict(8, "main-equation health", residual < kResidual && rel < kSumIdentity);
}

// Step models built from the true coefficients, as the stepwise hypotheses
// require: everything above the step coefficient known, its mean matched.
void summability_plateau(const Fixture& reg, const Fixture& dist) {
    bool pass = true;
    for (const Fixture* f : {&reg, &dist}) {
        const bool regular = f->truth.cls == OperatorClass::RegularEven;
        for (int s = 1; s <= f->truth.n - 1; ++s) {
            const std::string name = (regular ? "tau" : "sigma") + std::to_string(f->truth.n - s - 1);
            const double mean = regular ? integrate(f->truth[name]) : 0.0;
            const ProblemDefinition mp = build_problem(step_model(f->truth, s, mean));
            const SpectralData md = assemble_spectral_data(mp, kLevels);
            const int exponent = regular ? s : s - 1;
            const SummabilityReport r = summability(xi_sequence(f->data, md), exponent);
            detail("%s step %d (%s): sum (l^%d xi_l)^2 = %.4e, last-decade increment %.4f (< %.2f)", f->name.c_str(),
                   s, name.c_str(), exponent, r.partial_sums.back(), r.last_decade_increment, kPlateau);
            pass = pass && r.last_decade_increment < kPlateau;
        }
    }
    verdict(9, "summability plateau", pass);
}

}  // namespace

int main() {
    const Fixture n3 = make_fixture("n3", testing::n3_fixture(kPoints));
    const Fixture reg = make_fixture("n4-regular", testing::n4_regular_fixture(kPoints));
    const Fixture dist = make_fixture("n4-distributional", testing::n4_distributional_fixture(kPoints));

    structural_identities({&n3, &reg});
    spectral_structure({&n3, &reg});
    asymptotics(n3);
    zero_perturbation();
    roundtrip_n3(n3);
    roundtrip_n4_regular(reg);
    roundtrip_n4_distributional(dist);
    main_equation_health(n3);
    summability_plateau(reg, dist);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
