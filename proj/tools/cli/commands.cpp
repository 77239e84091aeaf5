#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "qspec/identities.hpp"
#include "qspec/pipeline.hpp"
#include "qspec_io.hpp"

namespace qspec::cli {

namespace {

using io::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Settings {
    std::string config, data, model, out;
    int levels = 25;
    int truncation = 25;
    int grid = 0;     // 0 keeps the value from the problem file
    int workers = 0;  // 0 means all cores
    bool diagnostics = false;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int worker_count(const Settings& s) {
    if (s.workers > 0) return s.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<int> grid_override(const Settings& s) {
    if (s.grid > 0) return s.grid;
    return std::nullopt;
}

void validate(const Settings& s, const std::string& out_default) {
    if (s.levels < 1) throw ConfigError("--levels: must be positive");
    if (s.truncation < 1) throw ConfigError("--truncation: must be positive");
    if (s.grid != 0 && s.grid < 17) throw ConfigError("--grid: at least 17 points are required");
    if (s.workers < 0) throw ConfigError("--workers: must not be negative");
    const fs::path out = s.out.empty() ? fs::path(out_default) : fs::path(s.out);
    for (const std::string* in : {&s.config, &s.data, &s.model})
        if (!in->empty() && fs::weakly_canonical(*in) == fs::weakly_canonical(out))
            throw ConfigError("--out: must differ from the input file '" + *in + "'");
}

json error_report(const std::string& command, int code, const std::string& kind, const std::string& message) {
    return json{{"command", command}, {"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
}

json class_w_json(const ClassWReport& w) {
    return json{{"ok", w.ok}, {"violations", w.violations}, {"min_relative_separation", w.min_relative_separation}};
}

SpectralData run_forward(const io::ProblemFile& pf, int levels, int workers, std::ostream& err) {
    const ProblemDefinition p = build_problem(pf.coefficients, pf.boundary);
    LocateOptions opt;
    opt.workers = workers;
    err << "forward: n=" << p.n << " class=" << class_name(p.cls) << " L=" << levels << "\n";
    return assemble_spectral_data(p, levels, opt);
}

json forward_diagnostics(const SpectralData& d) {
    json rows = json::array();
    for (const SpectralDatum& s : d.data) {
        const double chi = ladder_shift(d.n, s.k, d.boundary);
        const cplx guess = eigenvalue_predictor(d.n, s.k, s.l, chi);
        rows.push_back(json{{"l", s.l},
                            {"k", s.k},
                            {"predictor_relative_error", std::abs(s.lambda - guess) / std::abs(s.lambda)},
                            {"winding", s.winding},
                            {"full", s.full}});
    }
    return rows;
}

json step_json(const StepReport& r) {
    json series = json::array();
    for (const SeriesReport& t : r.series)
        series.push_back(json{{"name", t.name}, {"tail", t.tail}, {"max_imag", t.max_imag}});
    json out{{"step", r.step},
             {"coefficient", r.coefficient},
             {"truncation", r.truncation},
             {"model_mean", r.model_mean},
             {"max_residual_ratio", r.max_residual_ratio},
             {"max_row_norm", r.max_row_norm},
             {"min_rcond", r.min_rcond},
             {"series", series},
             {"summability",
              json{{"exponent", r.summability.exponent},
                   {"last_decade_increment", r.summability.last_decade_increment},
                   {"partial_sums", r.summability.partial_sums}}}};
    if (r.error) out["relative_l2_error"] = *r.error;
    return out;
}

json main_equation_json(const InversionResult& res) {
    json steps = json::array();
    for (const StepReport& r : res.steps) {
        json nodes = json::array();
        for (const NodeDiagnostics& d : r.nodes)
            nodes.push_back(json{{"x", d.x},
                                 {"residual", d.residual},
                                 {"psi_tilde_norm", d.psi_tilde_norm},
                                 {"psi_norm", d.psi_norm},
                                 {"row_norm", d.row_norm},
                                 {"rcond", d.rcond}});
        steps.push_back(json{{"step", r.step}, {"coefficient", r.coefficient}, {"nodes", nodes}});
    }
    return json{{"steps", steps}};
}

// Runs the inversion and writes the CSV plus its sidecar reports.
json invert_and_write(const SpectralData& d, const Settings& s, const fs::path& out_csv,
                      std::optional<CoefficientSet> truth, std::ostream& err) {
    InversionOptions opt;
    opt.truncation = s.truncation;
    opt.workers = worker_count(s);
    opt.truth = std::move(truth);
    if (!s.model.empty()) {
        io::ProblemFile mf = io::read_problem(s.model, d.grid_points);
        if (!(mf.boundary.p[0] == d.boundary.p[0] && mf.boundary.p[1] == d.boundary.p[1]))
            throw ConfigError("model: boundary exponents differ from the data");
        opt.model = std::move(mf.coefficients);
    }
    err << "invert: n=" << d.n << " class=" << class_name(d.cls) << " N=" << s.truncation << "\n";
    const InversionResult res = run_inversion(d, opt);

    io::write_csv(out_csv, res.recovered, coefficient_names(res.recovered.cls, res.recovered.n));
    json steps = json::array();
    for (const StepReport& r : res.steps) steps.push_back(step_json(r));
    json report{{"truncation", res.truncation}, {"warnings", res.warnings}, {"steps", steps}};
    io::write_json(io::sidecar(out_csv, "report"), report);
    if (s.diagnostics) io::write_json(io::sidecar(out_csv, "main_equation_report"), main_equation_json(res));

    json errors = json::object();
    for (const StepReport& r : res.steps)
        if (r.error) errors[r.coefficient] = *r.error;
    return json{{"truncation", res.truncation}, {"warnings", res.warnings}, {"errors", errors}};
}

int cmd_forward(const Settings& s, std::ostream& out, std::ostream& err) {
    validate(s, "spectral_data.json");
    const auto t0 = Clock::now();
    const io::ProblemFile pf = io::read_problem(s.config, grid_override(s));
    const SpectralData d = run_forward(pf, s.levels, worker_count(s), err);
    const ClassWReport w = check_class_W(d);
    const fs::path path = s.out.empty() ? fs::path("spectral_data.json") : fs::path(s.out);

    json j = io::spectral_to_json(d);
    j["class_w"] = class_w_json(w);
    io::write_json(path, j);
    if (s.diagnostics) io::write_json(io::sidecar(path, "report"), json{{"data", forward_diagnostics(d)}});

    const int code = w.ok ? kOk : kClassW;
    out << io::dump(json{{"command", "forward"},
                         {"status", w.ok ? "ok" : "class-W violation"},
                         {"out", path.string()},
                         {"n", d.n},
                         {"L", d.L},
                         {"class_w", class_w_json(w)},
                         {"seconds", seconds_since(t0)},
                         {"exit_code", code}})
        << "\n";
    return code;
}

int cmd_invert(const Settings& s, std::ostream& out, std::ostream& err) {
    validate(s, "reconstruction.csv");
    const auto t0 = Clock::now();
    const SpectralData d = io::read_spectral(s.data);
    std::optional<CoefficientSet> truth;
    if (!s.config.empty()) truth = io::read_problem(s.config, d.grid_points).coefficients;
    const fs::path path = s.out.empty() ? fs::path("reconstruction.csv") : fs::path(s.out);
    json summary = invert_and_write(d, s, path, std::move(truth), err);
    summary["command"] = "invert";
    summary["status"] = "ok";
    summary["out"] = path.string();
    summary["seconds"] = seconds_since(t0);
    summary["exit_code"] = kOk;
    out << io::dump(summary) << "\n";
    return kOk;
}

int cmd_roundtrip(const Settings& s, std::ostream& out, std::ostream& err) {
    validate(s, "roundtrip.csv");
    const auto t0 = Clock::now();
    const io::ProblemFile pf = io::read_problem(s.config, grid_override(s));
    const SpectralData d = run_forward(pf, s.levels, worker_count(s), err);
    const ClassWReport w = check_class_W(d);
    const fs::path path = s.out.empty() ? fs::path("roundtrip.csv") : fs::path(s.out);
    json j = io::spectral_to_json(d);
    j["class_w"] = class_w_json(w);
    io::write_json(io::sidecar(path, "spectral_data"), j);
    if (!w.ok) {
        out << io::dump(json{{"command", "roundtrip"},
                             {"status", "class-W violation"},
                             {"class_w", class_w_json(w)},
                             {"exit_code", kClassW}})
            << "\n";
        return kClassW;
    }
    json summary = invert_and_write(d, s, path, pf.coefficients, err);
    summary["command"] = "roundtrip";
    summary["status"] = "ok";
    summary["out"] = path.string();
    summary["seconds"] = seconds_since(t0);
    summary["exit_code"] = kOk;
    out << io::dump(summary) << "\n";
    return kOk;
}

struct Check {
    std::string name;
    double value;
    double tolerance;
};

int cmd_verify(const Settings& s, std::ostream& out, std::ostream& err) {
    validate(s, "verify.json");
    const auto t0 = Clock::now();
    const io::ProblemFile pf = io::read_problem(s.config, grid_override(s));
    const ProblemDefinition p = build_problem(pf.coefficients, pf.boundary);
    const int M = p.grid.points;

    // regular points off the real axis, |lambda| in [5, 2000]
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> logr(std::log(5.0), std::log(2000.0)), arg(0.2, std::numbers::pi - 0.2);
    std::vector<cplx> lambdas;
    for (int i = 0; i < 6; ++i) lambdas.push_back(std::polar(std::exp(logr(rng)), (i % 2 ? -1.0 : 1.0) * arg(rng)));
    const int nodes[] = {0, M / 4, M / 2, 3 * M / 4, M - 1};

    std::vector<Check> checks;
    double det = 0, mjm = 0, pjp = 0, wron = 0, ddx = 0;
    for (size_t i = 0; i < lambdas.size(); ++i) {
        det = std::max(det, determinant_drift(p, lambdas[i]));
        mjm = std::max(mjm, weyl_duality_defect(p, lambdas[i]));
        pjp = std::max(pjp, solution_duality_defect(p, lambdas[i], nodes));
        const cplx mu = lambdas[(i + 1) % lambdas.size()];
        wron = std::max(wron, bracket_derivative_defect(p, lambdas[i], mu));
        ddx = std::max(ddx, kernel_derivative_defect(p, lambdas[i], mu));
    }
    checks.push_back({"determinant_constancy", det, 1e-8});
    checks.push_back({"weyl_matrix_duality", mjm, 1e-6});
    checks.push_back({"weyl_solution_duality", pjp, 1e-6});
    checks.push_back({"bracket_derivative", wron, 1e-4});
    checks.push_back({"kernel_derivative", ddx, 1e-4});

    err << "verify: spectral data up to L=" << s.levels << "\n";
    LocateOptions lopt;
    lopt.workers = worker_count(s);
    const SpectralData d = assemble_spectral_data(p, s.levels, lopt);
    const ClassWReport w = check_class_W(d);
    const ResidueChecks rc = residue_checks(p, d, 10);
    checks.push_back({"class_w", w.ok ? 0.0 : 1.0, 0.5});
    checks.push_back({"residue_nilpotency", rc.nilpotency, 1e-8});
    checks.push_back({"residue_strictly_lower", rc.upper_part, 1e-8});
    checks.push_back({"weight_contour_agreement", rc.beta_agreement, 1e-6});

    // R - R~ - R~R against the default first-step model
    if (w.ok) {
        const CoefficientSet model = first_step_model(d);
        const ProblemDefinition mp = build_problem(model, pf.boundary);
        const SpectralData md = assemble_spectral_data(mp, s.levels, lopt);
        InverseOptions iopt;
        iopt.truncation = std::min(s.truncation, s.levels);
        iopt.workers = worker_count(s);
        const int sum_nodes[] = {M / 4, M / 2, 3 * M / 4};
        const SumIdentity si = sum_identity(p, mp, d, md, iopt, sum_nodes);
        checks.push_back({"operator_sum_identity", si.scale > 0 ? si.defect / si.scale : si.defect, 1e-6});
    }

    bool ok = true;
    json list = json::array();
    for (const Check& c : checks) {
        const bool pass = c.value < c.tolerance;
        ok = ok && pass;
        list.push_back(json{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", pass}});
    }
    const int code = ok ? kOk : kCheckFailed;
    json report{{"command", "verify"},
                {"status", ok ? "ok" : "failed"},
                {"checks", list},
                {"seconds", seconds_since(t0)},
                {"exit_code", code}};
    if (!s.out.empty()) io::write_json(s.out, report);
    out << io::dump(report) << "\n";
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forward and inverse spectral problems for higher-order differential operators", "qspec"};
    app.require_subcommand(1);
    Settings s;

    auto forward = app.add_subcommand("forward", "coefficients -> spectral_data.json");
    auto invert = app.add_subcommand("invert", "spectral_data.json -> reconstruction.csv");
    auto roundtrip = app.add_subcommand("roundtrip", "forward + invert + error table against the input");
    auto verify = app.add_subcommand("verify", "identity suite on a problem");

    for (CLI::App* sub : {forward, roundtrip, verify}) {
        sub->add_option("--config", s.config, "problem JSON")->required();
        sub->add_option("--grid", s.grid, "grid points (overrides the problem file)");
    }
    invert->add_option("--config", s.config, "ground-truth problem JSON for error reporting");
    invert->add_option("--data", s.data, "spectral_data.json")->required();
    for (CLI::App* sub : {invert, roundtrip}) {
        sub->add_option("--model", s.model, "model problem JSON for the first step");
        sub->add_option("--truncation", s.truncation, "levels used by the main equation (N)");
    }
    for (CLI::App* sub : {forward, roundtrip, verify}) sub->add_option("--levels", s.levels, "eigenvalue levels (L)");
    verify->add_option("--truncation", s.truncation, "levels for the operator identity");
    for (CLI::App* sub : {forward, invert, roundtrip, verify}) {
        sub->add_option("--out", s.out, "output path");
        sub->add_option("--workers", s.workers, "worker threads (0 = all cores)");
        sub->add_flag("--diagnostics", s.diagnostics, "write extra diagnostic reports");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        out << io::dump(error_report("", kConfig, "usage", e.what())) << "\n";
        return kConfig;
    }

    std::string command = app.get_subcommands().front()->get_name();
    auto fail = [&](int code, const std::string& kind, const std::string& msg) {
        err << "qspec " << command << ": " << msg << "\n";
        out << io::dump(error_report(command, code, kind, msg)) << "\n";
        return code;
    };
    try {
        if (*forward) return cmd_forward(s, out, err);
        if (*invert) return cmd_invert(s, out, err);
        if (*roundtrip) return cmd_roundtrip(s, out, err);
        return cmd_verify(s, out, err);
    } catch (const ConfigError& e) {
        return fail(kConfig, "config", e.what());
    } catch (const io::OutputError& e) {
        return fail(kCantCreate, "output", e.what());
    } catch (const io::IoError& e) {
        return fail(kNoInput, "input", e.what());
    } catch (const ClassViolation& e) {
        return fail(kClassW, "class-W", e.what());
    } catch (const std::exception& e) {
        return fail(kNumerical, "numerical", e.what());
    }
}

}  // namespace qspec::cli
