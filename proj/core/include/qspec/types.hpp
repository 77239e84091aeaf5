#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspec {

using cplx = std::complex<double>;

// Largest supported operator order. Small matrices live on the stack.
inline constexpr int kMaxOrder = 8;

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxOrder, kMaxOrder>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxOrder, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxOrder, kMaxOrder>;

// mantissa * exp(log_scale); keeps exponentially large minors representable
struct Scaled {
    cplx mantissa{0.0, 0.0};
    double log_scale = 0.0;

    cplx value() const { return mantissa * std::exp(log_scale); }
    double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
    Scaled rescaled(double new_log) const { return {mantissa * std::exp(log_scale - new_log), new_log}; }
};

inline Scaled operator/(const Scaled& a, const Scaled& b) {
    return {a.mantissa / b.mantissa, a.log_scale - b.log_scale};
}

// Exit-code carrying failures; the CLI maps them to process status.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Values of n functions (components) on a node grid, node-major.
struct SolutionField {
    int n = 0;
    int nodes = 0;
    std::vector<cplx> data;

    SolutionField() = default;
    SolutionField(int n_, int nodes_) : n(n_), nodes(nodes_), data(static_cast<size_t>(n_) * nodes_) {}

    cplx& at(int node, int comp) { return data[static_cast<size_t>(node) * n + comp]; }
    cplx at(int node, int comp) const { return data[static_cast<size_t>(node) * n + comp]; }
    CVec vec(int node) const {
        CVec v(n);
        for (int c = 0; c < n; ++c) v(c) = at(node, c);
        return v;
    }
    void set(int node, const CVec& v) {
        for (int c = 0; c < n; ++c) at(node, c) = v(c);
    }
};

}  // namespace qspec
