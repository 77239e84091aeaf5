#pragma once

#include <string>
#include <vector>

#include "qspec/inverse.hpp"

namespace qspec {

// Integer coefficients of the stepwise formulas (even n).
//   a_j = C(n, s-j) C(n-s+j-1, j) + [j = s] (-1)^{s+1},   j = 0..s
//   b_j = sum_{i <= j} (-1)^{j-i} a_i
std::vector<long long> step_coefficients_a(int n, int s);
std::vector<long long> step_coefficients_b(int n, int s);
// sum_r C(n,r) C(r-1, n-s-1) (-1)^r + (-1)^{s+1}; vanishes for even n
long long regularity_identity(int n, int s);
// sum_j (-1)^j a_j; vanishes, which makes b_s = 0 and lets rec2 drop one term
long long alternating_identity(int n, int s);

// Quasi-derivatives of the recovered phi_v (target matrix field) and of
// eta~_v (model star field), stored [order][v][node].
struct SeriesFactors {
    int n = 0, N = 0, nodes = 0;
    std::vector<IndexV> V;
    std::vector<std::vector<std::vector<cplx>>> phi;
    std::vector<std::vector<std::vector<cplx>>> eta;
};

// `target_F` generates the quasi-derivatives of phi_v; it only has to be
// correct in rows 0..phi_orders-1.
SeriesFactors series_factors(const InverseProblem& ip, const RecoveredPhi& rec, const std::vector<RMat>& target_F,
                             int phi_orders, int eta_orders);

// Ordinary-derivative variant used by the general formula: phi^{(j)} and eta~^{(j)}.
SeriesFactors series_factors_ordinary(const InverseProblem& ip, const RecoveredPhi& rec, int eta_orders);

struct SeriesValue {
    std::vector<cplx> values;
    double tail = 0;                // sup-norm of the last level block
    std::vector<double> level_sup;  // sup-norm of each level block (eps pairs fused)
};

// T_{j1,j2}(x) = sum_v phi_v^{[j1]} eta~_v^{[j2]}, accumulated level by level.
SeriesValue series_T(const SeriesFactors& f, int j1, int j2);

struct SeriesReport {
    std::string name;
    double tail = 0;
    double max_imag = 0;  // imaginary residue of a real series
};

struct N3Result {
    std::vector<double> tau1, sigma0;
    std::vector<SeriesReport> series;
};

// tau1 = tau~1 - 3/2 (T10 + T01)
// sigma0 = -tau^1 - 3 T10 - 2 int_0^x tau^1 T00 + C,  int sigma0 = 0
N3Result reconstruct_n3(const SeriesFactors& f, const std::vector<double>& tau1_model);

struct StepResult {
    std::vector<double> values;
    std::vector<SeriesReport> series;
};

// tau_{n-s-1} = tau~_{n-s-1} - sum_j a_j T_{s-j,j}, the sum halved for even s.
StepResult reconstruct_even_step(int s, const SeriesFactors& f, const std::vector<double>& tau_model);

// sigma_{n-s-1} = -sum_{j<s} b_j T_{s-j-1,j}, halved for even s, zero mean.
StepResult reconstruct_even_distributional_step(int s, const SeriesFactors& f);

// Coefficients p_s of l(y) = y^{(n)} + sum_s p_s y^{(s)} from smooth tau samples;
// returns p[0..n-2]. Derivatives of tau are taken by finite differences.
std::vector<std::vector<double>> p_from_tau(const CoefficientSet& c);

// p_s from the general series formula (zero model), s = n-2 down to 0.
std::vector<std::vector<double>> p_from_series(const SeriesFactors& ordinary);

// Mean of tau1 for n = 3 from the eigenvalue asymptotics
// l (t_l - l) -> -int tau1 / (2 pi^2) in both columns, t_l the ladder coordinate.
double estimate_mean_tau1(const SpectralData& d);

// Partial sums of (l^m xi_l)^2 and the relative growth over the last decade.
struct SummabilityReport {
    int exponent = 0;
    std::vector<double> partial_sums;
    double last_decade_increment = 0;
};

SummabilityReport summability(const XiSequence& xi, int exponent);

}  // namespace qspec
