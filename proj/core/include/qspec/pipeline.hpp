#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qspec/forward.hpp"
#include "qspec/reconstruction.hpp"

namespace qspec {

struct InversionOptions {
    int truncation = 25;
    int workers = 1;
    LocateOptions locate;
    InverseOptions inverse;
    // Replaces the default first-step model; it must have the same shape
    // (constant coefficient being matched, zeros elsewhere).
    std::optional<CoefficientSet> model;
    // Ground truth for per-step error reporting.
    std::optional<CoefficientSet> truth;
};

struct StepReport {
    int step = 1;
    std::string coefficient;
    int truncation = 0;
    double model_mean = 0;
    double max_residual_ratio = 0;
    double max_row_norm = 0;
    double min_rcond = 0;
    std::vector<SeriesReport> series;
    SummabilityReport summability;
    std::optional<double> error;  // relative L2 against the truth
    std::vector<NodeDiagnostics> nodes;
};

struct InversionResult {
    CoefficientSet recovered;
    std::vector<StepReport> steps;
    std::vector<std::string> warnings;
    int truncation = 0;
};

// Default model for step s (1-based): coefficients recovered so far, the
// mean of the next one, zeros elsewhere.
CoefficientSet step_model(const CoefficientSet& known, int s, double mean);

// The step-1 model run_inversion builds for `target` when none is supplied.
CoefficientSet first_step_model(const SpectralData& target, std::vector<std::string>* warnings = nullptr);

// Spectral data to coefficients: n = 3 in one pass, even n step by step.
InversionResult run_inversion(const SpectralData& target, const InversionOptions& opt);

}  // namespace qspec
