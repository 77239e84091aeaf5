#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "qspec/coefficients.hpp"
#include "qspec/types.hpp"

namespace qspec {

// Boundary forms U_{s,a}(y) = sum_j u_{s,j,a} y^{[j-1]}(a); row s of U[a].
// p[a][s-1] is the highest quasi-derivative order in form s at end a.
struct BoundaryConfig {
    int n = 0;
    std::vector<int> p[2];
    RMat U[2];

    // p_{s,0} = s-1 (U0 = I), p_{s,1} = n-s (anti-diagonal identity)
    static BoundaryConfig standard(int n);
    bool is_standard() const;
    void validate() const;
};

// Per-interval Magnus data: Omega(lambda) = omega0 + lambda * slope.
struct StepTable {
    int substeps = 1;
    double h = 0;
    std::vector<RMat> omega0;
    std::vector<RMat> slope;
};

class StepCache {
public:
    std::shared_ptr<const StepTable> get(int substeps, const std::function<std::shared_ptr<const StepTable>()>& build);

private:
    std::mutex mutex_;
    std::map<int, std::shared_ptr<const StepTable>> tables_;
};

struct ProblemDefinition {
    int n = 0;
    OperatorClass cls = OperatorClass::N3Mixed;
    Grid grid;
    std::vector<RMat> F;  // associated matrix at every node
    BoundaryConfig boundary;
    double lambda_sign = 1.0;  // spectral parameter enters row n as lambda_sign * lambda
    bool is_star = false;
    std::optional<CoefficientSet> coefficients;
    std::shared_ptr<StepCache> steps = std::make_shared<StepCache>();
};

// Associated matrix at one point. `c` holds the class coefficients indexed by nu
// (tau_nu or sigma_nu); for N3Mixed c[0] = sigma0 and c[1] = tau1.
RMat associated_matrix(OperatorClass cls, int n, const std::vector<double>& c);

ProblemDefinition build_problem(const CoefficientSet& coefficients, const BoundaryConfig& boundary);
ProblemDefinition build_problem(const CoefficientSet& coefficients);

// Generic entry point for an arbitrary class-F matrix field.
ProblemDefinition build_problem_from_matrices(int n, const Grid& grid, std::vector<RMat> F,
                                              const BoundaryConfig& boundary);

// Throws ConfigError unless F is in the admissible class (ones on the
// superdiagonal, zeros above it, zero trace).
void validate_associated(const std::vector<RMat>& F, int n);

RMat star_matrix(const RMat& F);
BoundaryConfig star_boundary(const BoundaryConfig& b);
ProblemDefinition star_problem(const ProblemDefinition& p);

// J = [(-1)^{k+1} delta_{k,n-j+1}]
RMat bracket_matrix(int n);
// J_a = [(-1)^{p*_{k,a}} delta_{k,n-j+1}], p* taken from the star boundary
RMat boundary_bracket_matrix(const BoundaryConfig& b, int a);

// <z,y> = sum_j (-1)^j z^{[j]} y^{[n-j-1]} = z^T J y
cplx lagrange_bracket(const CVec& z, const CVec& y);

// U_{s,a}(y), s is 1-based
cplx apply_boundary_form(const BoundaryConfig& b, int s, int a, const CVec& y);

}  // namespace qspec
