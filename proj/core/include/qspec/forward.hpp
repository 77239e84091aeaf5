#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qspec/integrator.hpp"
#include "qspec/operator.hpp"

namespace qspec {

// pi / sin(pi k / n): spacing of rho along the eigenvalue ray of column k.
double column_rate(int n, int k);

// Asymptotic shift chi_k for the eigenvalue ladder of column k. Known for the
// standard boundary forms; otherwise 0 and `known` is cleared.
double ladder_shift(int n, int k, const BoundaryConfig& b, bool* known = nullptr);

// (-1)^{n-k} (pi/sin(pi k/n) (l + chi))^n
cplx eigenvalue_predictor(int n, int k, int l, double chi);

// Distance from the predicted l-th eigenvalue of column k to its predicted neighbours.
double predicted_gap(int n, int k, int l, double chi);

struct LocateOptions {
    int newton_nodes = 8;       // Cauchy nodes for the Newton derivative
    int derivative_nodes = 32;  // Cauchy nodes at the converged root
    int winding_samples = 32;
    double derivative_radius = 0.1;  // fractions of the local gap
    double winding_radius = 0.4;
    double tol = 1e-13;
    int max_newton = 60;
    int workers = 1;
    StepOptions step;
};

struct EigenRecord {
    int l = 0, k = 0;
    cplx lambda;
    Scaled derivative;  // d/dlambda Delta_{k,k} at the root
    int winding = 0;
    int iterations = 0;
    double gap = 0;
};

// Zeros of Delta_{k,k} for l = 1..L, sorted along the ray.
std::vector<EigenRecord> locate_eigenvalues(const ProblemDefinition& p, int k, int L, const LocateOptions& opt = {});

// Winding number of Delta_{k,k} around a circle.
int winding_number(const ProblemDefinition& p, int k, cplx center, double radius, int samples,
                   const StepOptions& step = {});

// beta = -Delta_{k+1,k} / Delta'_{k,k} at a simple zero.
cplx weight_number(const ProblemDefinition& p, const EigenRecord& rec, const StepOptions& step = {});

// Residue of M_{k+1,k} from a contour; independent check of weight_number.
cplx weight_number_contour(const ProblemDefinition& p, int k, cplx lambda0, double radius, int nodes,
                           const StepOptions& step = {});

// N = M<0>^{-1} M<-1> from Laurent coefficients of the Weyl matrix.
CMat weight_matrix_contour(const ProblemDefinition& p, cplx lambda0, double radius, int nodes,
                           const StepOptions& step = {});

struct SpectralDatum {
    int l = 0, k = 0;
    cplx lambda;
    bool full = false;
    cplx beta;  // subdiagonal form: N = beta e_{k+1} e_k^T
    CMat N;     // full form
    int winding = 1;

    CMat weight_matrix(int n) const;
};

struct SpectralData {
    int n = 0;
    OperatorClass cls = OperatorClass::N3Mixed;
    int grid_points = 0;
    BoundaryConfig boundary;
    int L = 0;
    std::vector<SpectralDatum> data;  // ordered by l, then k
    std::map<std::string, double> means;

    const SpectralDatum& at(int l, int k) const;
    SpectralData truncated(int levels) const;
};

struct ClassWReport {
    bool ok = true;
    std::vector<std::string> violations;
    double min_relative_separation = INFINITY;
};

// Coefficient means carried as metadata (regular coefficients only; the
// antiderivatives are normalised to zero mean).
std::map<std::string, double> coefficient_means(const CoefficientSet& c);

SpectralData assemble_spectral_data(const ProblemDefinition& p, int L, const LocateOptions& opt = {});
ClassWReport check_class_W(const SpectralData& d);

}  // namespace qspec
