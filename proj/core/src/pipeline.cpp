#include "qspec/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "qspec/grid.hpp"

namespace qspec {

namespace {

bool is_constant(const std::vector<double>& f) {
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return *hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi));
}

bool is_zero(const std::vector<double>& f) {
    return std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
}

// name of the coefficient recovered at step s
std::string step_coefficient(const CoefficientSet& c, int s) {
    if (c.cls == OperatorClass::N3Mixed) return s == 1 ? "tau1" : "sigma0";
    const std::string prefix = (c.cls == OperatorClass::RegularEven) ? "tau" : "sigma";
    return prefix + std::to_string(c.n - s - 1);
}

void check_model_shape(const CoefficientSet& model, const CoefficientSet& expected_shape) {
    if (model.cls != expected_shape.cls || model.n != expected_shape.n ||
        model.grid.points != expected_shape.grid.points)
        throw ConfigError("model: class, order or grid differs from the data");
    for (auto& [name, values] : model.values) {
        const auto& ref = expected_shape[name];
        if (!is_zero(ref) && !is_constant(values))
            throw ConfigError("model: coefficient '" + name + "' must be constant");
        if (is_zero(ref) && !is_zero(values)) throw ConfigError("model: coefficient '" + name + "' must vanish");
    }
}

double mean_for(const SpectralData& target, const std::string& name, std::vector<std::string>& warnings) {
    if (is_antiderivative(name)) return 0.0;
    if (auto it = target.means.find(name); it != target.means.end()) return it->second;
    if (target.n == 3 && name == "tau1") {
        const double m = estimate_mean_tau1(target);
        warnings.push_back("mean of tau1 estimated from eigenvalue asymptotics: " + std::to_string(m));
        return m;
    }
    warnings.push_back("mean of " + name + " not supplied; assumed zero");
    return 0.0;
}

}  // namespace

CoefficientSet step_model(const CoefficientSet& known, int s, double mean) {
    CoefficientSet m = make_coefficient_set(known.cls, known.n, known.grid.points);
    const std::string target = step_coefficient(known, s);
    if (known.cls == OperatorClass::N3Mixed) {
        m.values["tau1"].assign(known.grid.points, mean);
        return m;
    }
    for (int r = 1; r < s; ++r) {
        const std::string name = step_coefficient(known, r);
        m.values[name] = known[name];
    }
    if (!is_antiderivative(target)) m.values[target].assign(known.grid.points, mean);
    return m;
}

CoefficientSet first_step_model(const SpectralData& target, std::vector<std::string>* warnings) {
    const CoefficientSet empty = make_coefficient_set(target.cls, target.n, target.grid_points);
    std::vector<std::string> sink;
    const double mean = mean_for(target, step_coefficient(empty, 1), warnings ? *warnings : sink);
    return step_model(empty, 1, mean);
}

InversionResult run_inversion(const SpectralData& target, const InversionOptions& opt) {
    const int n = target.n;
    const OperatorClass cls = target.cls;
    if (cls == OperatorClass::N3Mixed && n != 3) throw ConfigError("n3-mixed data must have n = 3");
    if (cls != OperatorClass::N3Mixed && n % 2 != 0) throw ConfigError("stepwise reconstruction needs even n");

    InversionResult res;
    res.truncation = std::min(opt.truncation, target.L);
    if (res.truncation < opt.truncation)
        res.warnings.push_back("truncation clipped to the " + std::to_string(target.L) + " available levels");
    res.recovered = make_coefficient_set(cls, n, target.grid_points);

    InverseOptions iopt = opt.inverse;
    iopt.truncation = res.truncation;
    iopt.workers = opt.workers;
    LocateOptions lopt = opt.locate;
    lopt.workers = opt.workers;

    const int steps = (cls == OperatorClass::N3Mixed) ? 1 : n - 1;
    for (int s = 1; s <= steps; ++s) {
        try {
            const std::string name = step_coefficient(res.recovered, s);
            StepReport rep;
            rep.step = s;
            rep.coefficient = name;
            rep.truncation = res.truncation;
            rep.model_mean = mean_for(target, name, res.warnings);

            CoefficientSet model = step_model(res.recovered, s, rep.model_mean);
            if (s == 1 && opt.model) {
                check_model_shape(*opt.model, model);
                model = *opt.model;
                if (!is_antiderivative(name)) rep.model_mean = model[name].front();
            }
            const ProblemDefinition mp = build_problem(model, target.boundary);
            const SpectralData md = assemble_spectral_data(mp, res.truncation, lopt);
            const InverseProblem ip = prepare_inverse(mp, target, md, iopt);

            // quasi-derivative orders the step formula needs
            int phi_orders, eta_orders;
            if (cls == OperatorClass::N3Mixed) {
                phi_orders = eta_orders = 1;
            } else if (cls == OperatorClass::RegularEven) {
                phi_orders = eta_orders = s;
            } else {
                phi_orders = eta_orders = s - 1;
            }
            const RecoveredPhi rec = recover_phi(ip, phi_orders);
            rep.max_residual_ratio = rec.max_residual_ratio();
            rep.nodes = rec.nodes;
            rep.min_rcond = INFINITY;
            for (auto& d : rec.nodes) {
                rep.max_row_norm = std::max(rep.max_row_norm, d.row_norm);
                rep.min_rcond = std::min(rep.min_rcond, d.rcond);
            }

            // quasi-derivatives of the target use the coefficients known so far
            const ProblemDefinition known = build_problem(res.recovered, target.boundary);
            const SeriesFactors f = series_factors(ip, rec, known.F, phi_orders, eta_orders);

            if (cls == OperatorClass::N3Mixed) {
                const N3Result r = reconstruct_n3(f, model["tau1"]);
                assign_coefficient(res.recovered, "tau1", r.tau1);
                assign_coefficient(res.recovered, "sigma0", r.sigma0);
                rep.series = r.series;
                rep.summability = summability(ip.xi, 1);
            } else if (cls == OperatorClass::RegularEven) {
                const StepResult r = reconstruct_even_step(s, f, model[name]);
                assign_coefficient(res.recovered, name, r.values);
                rep.series = r.series;
                rep.summability = summability(ip.xi, s);
            } else {
                StepResult r = reconstruct_even_distributional_step(s, f);
                // the Schroedinger class writes l(y) = y'' - tau0 y
                if (cls == OperatorClass::SchrodingerN2)
                    for (double& v : r.values) v = -v;
                assign_coefficient(res.recovered, name, r.values);
                rep.series = r.series;
                rep.summability = summability(ip.xi, s - 1);
            }
            if (opt.truth) rep.error = relative_l2_error(res.recovered[name], (*opt.truth)[name]);
            res.steps.push_back(rep);

            if (cls == OperatorClass::N3Mixed && opt.truth) {
                StepReport extra = rep;
                extra.coefficient = "sigma0";
                extra.error = relative_l2_error(res.recovered["sigma0"], (*opt.truth)["sigma0"]);
                res.steps.push_back(extra);
            }
        } catch (const NumericalFailure& e) {
            throw NumericalFailure("step " + std::to_string(s) + ": " + e.what());
        }
    }
    return res;
}

}  // namespace qspec
