#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qspec/forward.hpp"
#include "qspec/integrator.hpp"
#include "qspec/operator.hpp"

namespace qspec {

// v = (l, k, eps); eps = 0 marks target data, eps = 1 model data.
struct IndexV {
    int l = 1, k = 1, eps = 0;
};

// Position of v in the ordering by l, then k, then eps.
inline int index_of(int n, int l, int k, int eps) { return ((l - 1) * (n - 1) + (k - 1)) * 2 + eps; }
std::vector<IndexV> index_set(int n, int N);

struct XiSequence {
    std::vector<double> xi;     // xi[l-1]
    std::vector<double> theta;  // 1/xi or 0
};

XiSequence xi_sequence(const SpectralData& target, const SpectralData& model, int N = -1);

// l^{-p_{k+1,0}} exp(-pi x l cot(k pi / n))
double weight_w(int l, int k, double x, const BoundaryConfig& b, int n);

struct InverseOptions {
    int truncation = 25;
    int workers = 1;
    double coincidence_tol = 1e-8;  // relative; below it G uses the lambda-derivative
    double pole_tol = 1e-6;         // relative distance that counts as a model pole
    double pole_radius = 0.25;      // fraction of the distance to the nearest other singularity
    int pole_nodes = 32;
    StepOptions step;
};

// Model quantities attached to every index of V^N:
//   Y  = quasi-derivative vector of the model Weyl solution Phi~_{k+1}(x, lambda_v)
//   dY = its lambda-derivative
//   Z  = sum_j a_{v,j} Phi~*_j(x, lambda_v),  a_v = (-1)^eps e_{k+1}^T N_eps J0^{-1}
// so eta~_v = Z[0] and the star quasi-derivatives of eta~_v are the other rows.
struct ModelFields {
    int n = 0, N = 0;
    std::vector<IndexV> V;
    std::vector<cplx> lambda;
    std::vector<CVec> a;
    std::vector<SolutionField> Y, dY, Z;
    // Circle samples of Phi~_{k+1} around lambda_v when lambda_v is a model pole
    // of that column; Y then holds the <0> coefficient and dY is unused.
    std::vector<std::vector<cplx>> pole_points;
    std::vector<std::vector<SolutionField>> pole_samples;
};

// `own` lists the eigenvalues of `model` itself (defaults to model_data); the
// identity checks pass the target problem with its own data here.
ModelFields model_fields(const ProblemDefinition& model, const SpectralData& target, const SpectralData& model_data,
                         const InverseOptions& opt, const SpectralData* own = nullptr);

// Everything the main equation needs at every node.
struct InverseProblem {
    int n = 0, N = 0;
    Grid grid;
    ProblemDefinition model;
    SpectralData target, model_data;
    XiSequence xi;
    ModelFields fields;
    InverseOptions opt;
};

InverseProblem prepare_inverse(const ProblemDefinition& model, const SpectralData& target,
                               const SpectralData& model_data, const InverseOptions& opt,
                               const SpectralData* own = nullptr);

// G~_{v, v0}(x) at a grid node; indices are positions in V.
cplx structural_G(const ModelFields& f, int v, int v0, int node, double coincidence_tol = 1e-8);

struct MainEquationSystem {
    int node = 0;
    double x = 0;
    Eigen::VectorXcd psi_tilde;
    Eigen::MatrixXcd R_tilde;
    Eigen::MatrixXcd K;  // K_{v0,v} = (-1)^eps G~_{v,v0}, untransformed
    double row_norm = 0;  // max_v0 sum_v |R~_{v0,v}|
};

// The same construction with an arbitrary problem in place of the model
// yields R instead of R~ (used by identity checks).
MainEquationSystem assemble_main_equation(const InverseProblem& ip, int node);

struct MainEquationSolution {
    Eigen::VectorXcd psi;
    double residual = 0;  // ||(I - R~) psi - psi~||_inf
    double rcond = 0;
};

MainEquationSolution solve_main_equation(const MainEquationSystem& sys);

// phi = T psi, T = blockdiag(w [[xi, 1], [0, 1]])
Eigen::VectorXcd phi_from_psi(const InverseProblem& ip, const Eigen::VectorXcd& psi, double x);
// psi = L phi, L = blockdiag(w^{-1} [[theta, -theta], [0, 1]])
Eigen::VectorXcd psi_from_phi(const InverseProblem& ip, const Eigen::VectorXcd& phi, double x);

struct NodeDiagnostics {
    double x = 0;
    double residual = 0;
    double psi_tilde_norm = 0;
    double psi_norm = 0;
    double row_norm = 0;
    double rcond = 0;
};

// Target Weyl values phi_v and their ordinary x-derivatives up to `orders`.
struct RecoveredPhi {
    int orders = 0;
    std::vector<IndexV> V;
    std::vector<std::vector<std::vector<cplx>>> phi;  // [order][v][node]
    std::vector<NodeDiagnostics> nodes;

    double max_residual_ratio() const;  // max residual / (1 + ||psi~||)
};

RecoveredPhi recover_phi(const InverseProblem& ip, int orders);

// Ordinary derivatives of eta~_v up to `orders`, [order][v][node].
std::vector<std::vector<std::vector<cplx>>> eta_derivatives(const InverseProblem& ip, int orders);

struct SynthesizedWeyl {
    cplx lambda;
    SolutionField values;  // component j-1 holds phi_j(x, lambda)
    double tail = 0;       // sup-norm of the last level's contribution
};

SynthesizedWeyl synthesize_weyl(const InverseProblem& ip, const RecoveredPhi& phi, cplx lambda);

}  // namespace qspec
