#pragma once

#include <span>
#include <string>
#include <vector>

#include "qspec/forward.hpp"
#include "qspec/inverse.hpp"

namespace qspec {

// max_x |det C(x) / det C(0) - 1|
double determinant_drift(const ProblemDefinition& p, cplx lambda, const StepOptions& step = {});

// ||[M*]^T J0 M - J0|| / ||J0||
double weyl_duality_defect(const ProblemDefinition& p, cplx lambda, const StepOptions& step = {});

// max over nodes of ||[Phi*(x)]^T J Phi(x) - J0|| / ||J0||
double solution_duality_defect(const ProblemDefinition& p, cplx lambda, std::span<const int> nodes,
                               const StepOptions& step = {});

// d/dx <z, y> = (lambda - mu) y z for y = Phi_k(., lambda), z = Phi*_j(., mu),
// checked with finite differences on interior nodes; worst relative defect.
double bracket_derivative_defect(const ProblemDefinition& p, cplx lambda, cplx mu, const StepOptions& step = {});

// D(x) = (lambda - mu)^{-1} Phi(x, mu)^{-1} Phi(x, lambda) against
// D' = J0^{-1} [phi*(x, mu)]^T phi(x, lambda), phi the first rows.
double kernel_derivative_defect(const ProblemDefinition& p, cplx lambda, cplx mu, const StepOptions& step = {});

struct ResidueChecks {
    double nilpotency = 0;     // max ||N^2|| / ||N||^2
    double upper_part = 0;     // max |N_{kj}|, k <= j, over ||N||
    double beta_agreement = 0; // max relative gap between contour and minor-ratio beta
    int compared = 0;
};

// Structure of every stored N; the contour comparison runs on the first
// `contour_checks` subdiagonal data.
ResidueChecks residue_checks(const ProblemDefinition& p, const SpectralData& d, int contour_checks,
                             const StepOptions& step = {});

// chi from t_l - l = chi + e / l over l0..l1, t_l the ladder coordinate of column k.
double fit_ladder_shift(const SpectralData& d, int k, int l0, int l1);

// Slope of log|beta_{l,k}| against log l over l0..l1.
double fit_weight_exponent(const SpectralData& d, int k, int l0, int l1);

// n - 1 + p_{k+1,0} - p_{k,0}
int weight_exponent(const BoundaryConfig& b, int k);

// max |R - R~ - R~ R| / max |R| at the given nodes. R is the main-equation
// operator built from the target problem itself over the same index set.
struct SumIdentity {
    double defect = 0;
    double scale = 0;
};
SumIdentity sum_identity(const ProblemDefinition& target, const ProblemDefinition& model, const SpectralData& target_data,
                         const SpectralData& model_data, const InverseOptions& opt, std::span<const int> nodes);

}  // namespace qspec
