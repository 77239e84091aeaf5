#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qspec/grid.hpp"

namespace qspec {

enum class OperatorClass {
    SchrodingerN2,       // sigma0 (potential = sigma0')
    N3Mixed,             // tau1, sigma0
    RegularEven,         // tau0 .. tau_{n-2}
    DistributionalEven,  // sigma0 .. sigma_{n-2}
};

std::string_view class_name(OperatorClass cls);
std::optional<OperatorClass> parse_class(std::string_view name);

// Canonical coefficient names ("tau1", "sigma0", ...) for a class and order.
std::vector<std::string> coefficient_names(OperatorClass cls, int n);

// Antiderivative-type coefficients are stored with zero mean.
bool is_antiderivative(std::string_view name);

// Index nu of "tau<nu>" / "sigma<nu>".
int coefficient_index(std::string_view name);

struct CoefficientSet {
    OperatorClass cls = OperatorClass::N3Mixed;
    int n = 3;
    Grid grid;
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, double> removed_means;

    const std::vector<double>& operator[](const std::string& name) const;
    double mean(const std::string& name) const;
};

// Builds a zero-filled set; unknown names or orders raise ConfigError.
CoefficientSet make_coefficient_set(OperatorClass cls, int n, int grid_points);

// Sets a coefficient; antiderivatives get their mean removed and recorded.
void assign_coefficient(CoefficientSet& set, const std::string& name, std::vector<double> samples);

// Term language, summed: "const:c", "poly:c0,c1,..", "sin:a:p/q", "cos:a:p/q"
// where trig terms mean a*sin((p/q)*pi*x).
double evaluate_expression(const std::vector<std::string>& tokens, double x);
std::vector<double> sample_expression(const std::vector<std::string>& tokens, const Grid& grid);

}  // namespace qspec
