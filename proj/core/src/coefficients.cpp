#include "qspec/coefficients.hpp"

#include <charconv>
#include <numbers>
#include <sstream>

namespace qspec {

std::string_view class_name(OperatorClass cls) {
    switch (cls) {
        case OperatorClass::SchrodingerN2: return "schrodinger-n2";
        case OperatorClass::N3Mixed: return "n3-mixed";
        case OperatorClass::RegularEven: return "regular-even";
        case OperatorClass::DistributionalEven: return "distributional-even";
    }
    return "unknown";
}

std::optional<OperatorClass> parse_class(std::string_view name) {
    for (auto c : {OperatorClass::SchrodingerN2, OperatorClass::N3Mixed, OperatorClass::RegularEven,
                   OperatorClass::DistributionalEven})
        if (class_name(c) == name) return c;
    return std::nullopt;
}

std::vector<std::string> coefficient_names(OperatorClass cls, int n) {
    std::vector<std::string> out;
    switch (cls) {
        case OperatorClass::SchrodingerN2: out = {"sigma0"}; break;
        case OperatorClass::N3Mixed: out = {"tau1", "sigma0"}; break;
        case OperatorClass::RegularEven:
            for (int nu = 0; nu <= n - 2; ++nu) out.push_back("tau" + std::to_string(nu));
            break;
        case OperatorClass::DistributionalEven:
            for (int nu = 0; nu <= n - 2; ++nu) out.push_back("sigma" + std::to_string(nu));
            break;
    }
    return out;
}

bool is_antiderivative(std::string_view name) { return name.starts_with("sigma"); }

int coefficient_index(std::string_view name) {
    auto digits = name.substr(name.find_first_of("0123456789"));
    int v = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), v);
    return v;
}

const std::vector<double>& CoefficientSet::operator[](const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw ConfigError("unknown coefficient '" + name + "'");
    return it->second;
}

double CoefficientSet::mean(const std::string& name) const {
    auto r = removed_means.find(name);
    if (r != removed_means.end()) return r->second;
    return integrate(std::span<const double>((*this)[name]));
}

CoefficientSet make_coefficient_set(OperatorClass cls, int n, int grid_points) {
    if (grid_points < 17) throw ConfigError("grid_points must be at least 17");
    const bool ok = (cls == OperatorClass::SchrodingerN2 && n == 2) || (cls == OperatorClass::N3Mixed && n == 3) ||
                    ((cls == OperatorClass::RegularEven || cls == OperatorClass::DistributionalEven) && n >= 2 &&
                     n % 2 == 0 && n <= kMaxOrder);
    if (!ok) throw ConfigError("order n=" + std::to_string(n) + " not valid for class " + std::string(class_name(cls)));
    CoefficientSet s;
    s.cls = cls;
    s.n = n;
    s.grid = Grid{grid_points};
    for (auto& name : coefficient_names(cls, n)) s.values[name] = std::vector<double>(grid_points, 0.0);
    return s;
}

void assign_coefficient(CoefficientSet& set, const std::string& name, std::vector<double> samples) {
    auto it = set.values.find(name);
    if (it == set.values.end())
        throw ConfigError("coefficient '" + name + "' does not belong to class " + std::string(class_name(set.cls)));
    if (static_cast<int>(samples.size()) != set.grid.points)
        throw ConfigError("coefficient '" + name + "' has " + std::to_string(samples.size()) + " samples, expected " +
                          std::to_string(set.grid.points));
    for (double v : samples)
        if (!std::isfinite(v)) throw ConfigError("coefficient '" + name + "' has non-finite samples");
    if (is_antiderivative(name)) {
        const double m = integrate(std::span<const double>(samples));
        for (double& v : samples) v -= m;
        set.removed_means[name] = m;
    }
    it->second = std::move(samples);
}

namespace {

double parse_number(std::string_view s) {
    std::string tmp(s);
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tmp, &used);
    } catch (...) {
        throw ConfigError("bad number '" + tmp + "' in expression");
    }
    if (used != tmp.size()) throw ConfigError("bad number '" + tmp + "' in expression");
    return v;
}

double parse_rational(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return parse_number(s);
    const double q = parse_number(s.substr(slash + 1));
    if (q == 0) throw ConfigError("zero denominator in frequency");
    return parse_number(s.substr(0, slash)) / q;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double eval_term(std::string_view tok, double x) {
    auto parts = split(tok, ':');
    const auto head = parts[0];
    if (head == "const" && parts.size() == 2) return parse_number(parts[1]);
    if (head == "poly" && parts.size() == 2) {
        auto cs = split(parts[1], ',');
        double acc = 0;
        for (auto it = cs.rbegin(); it != cs.rend(); ++it) acc = acc * x + parse_number(*it);
        return acc;
    }
    if ((head == "sin" || head == "cos") && parts.size() == 3) {
        const double a = parse_number(parts[1]);
        const double w = parse_rational(parts[2]) * std::numbers::pi;
        return head == "sin" ? a * std::sin(w * x) : a * std::cos(w * x);
    }
    throw ConfigError("unrecognised expression token '" + std::string(tok) + "'");
}

}  // namespace

double evaluate_expression(const std::vector<std::string>& tokens, double x) {
    double s = 0;
    for (auto& t : tokens) s += eval_term(t, x);
    return s;
}

std::vector<double> sample_expression(const std::vector<std::string>& tokens, const Grid& grid) {
    std::vector<double> out(grid.points);
    for (int i = 0; i < grid.points; ++i) out[i] = evaluate_expression(tokens, grid.x(i));
    return out;
}

}  // namespace qspec
