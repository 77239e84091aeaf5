#pragma once

#include <memory>
#include <vector>

#include "qspec/operator.hpp"
#include "qspec/types.hpp"

namespace qspec {

// Scaling-and-squaring Taylor exponential for small matrices.
CMat expm(const CMat& A);
// exp(A) together with its directional derivative along dA.
void expm_with_derivative(const CMat& A, const CMat& dA, CMat& E, CMat& dE);

// Integration options shared by every routine that marches across [0,1].
struct StepOptions {
    double max_phase_per_step = 0.5;  // |rho| * h bound before intervals are subdivided
};

// Diagonal similarity diag(1, s, .., s^{n-1}) with s = max(1, |lambda|^{1/n}).
double balance_factor(int n, cplx lambda);
int substeps_for(const ProblemDefinition& p, cplx lambda, const StepOptions& opt = {});
std::shared_ptr<const StepTable> step_table(const ProblemDefinition& p, int substeps);

// Interval propagators in balanced coordinates: Yhat_{i+1} = P[i] Yhat_i,
// Y = diag(1, s, ..) Yhat.
struct PropagatorSet {
    int n = 0;
    cplx lambda;
    double s = 1.0;
    std::vector<CMat> P;
    std::vector<CMat> dP;  // d/dlambda at fixed s, when requested
};

PropagatorSet build_propagators(const ProblemDefinition& p, cplx lambda, bool with_derivative = false,
                                const StepOptions& opt = {});

// C(x, lambda) with C(0) = U0^{-1}; columns stored normalised with log scales.
struct FundamentalSolution {
    int n = 0;
    cplx lambda;
    std::vector<CMat> columns;
    std::vector<std::vector<double>> log_scale;
    std::vector<cplx> det;  // det C from the product of step determinants

    CMat matrix(int node) const;
};

FundamentalSolution integrate_fundamental(const ProblemDefinition& p, cplx lambda, const StepOptions& opt = {});

// Delta_{k,k} and Delta_{j,k} (j = k+1..n) on one shared log scale.
struct MinorGroup {
    int k = 0;
    double log_scale = 0;
    cplx diag;
    std::vector<cplx> replaced;  // replaced[j-k-1] = Delta_{j,k}

    Scaled diagonal() const { return {diag, log_scale}; }
    Scaled off(int j) const { return {replaced[j - k - 1], log_scale}; }
};

MinorGroup char_minors(const ProblemDefinition& p, cplx lambda, int k, bool with_replaced,
                       const StepOptions& opt = {});
Scaled char_minor(const ProblemDefinition& p, cplx lambda, int j, int k, const StepOptions& opt = {});

// Weyl matrix from minor ratios M_{j,k} = -Delta_{j,k}/Delta_{k,k}.
CMat weyl_matrix(const ProblemDefinition& p, cplx lambda, const StepOptions& opt = {});

// Weyl solution Phi_k (1-based) as a two-point boundary value problem over
// the whole grid; optionally also d/dlambda.
SolutionField weyl_solution(const ProblemDefinition& p, const PropagatorSet& props, int k,
                            SolutionField* dlambda = nullptr);
std::vector<SolutionField> weyl_solutions(const ProblemDefinition& p, cplx lambda, const StepOptions& opt = {});

}  // namespace qspec
