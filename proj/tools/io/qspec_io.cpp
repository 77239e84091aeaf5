#include "qspec_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qspec::io {

namespace {

const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + "." + key + ": missing");
    return *it;
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

double as_double(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& where, size_t size = 0) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    if (size && j.size() != size)
        throw ConfigError(where + ": expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
    return j;
}

cplx as_complex(const json& j, const std::string& where) {
    as_array(j, where, 2);
    return {as_double(j[0], where + "[0]"), as_double(j[1], where + "[1]")};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

RMat matrix_from_json(const json& j, int n, const std::string& where) {
    as_array(j, where, n);
    RMat m(n, n);
    for (int r = 0; r < n; ++r) {
        const std::string w = where + "[" + std::to_string(r) + "]";
        as_array(j[r], w, n);
        for (int c = 0; c < n; ++c) m(r, c) = as_double(j[r][c], w + "[" + std::to_string(c) + "]");
    }
    return m;
}

json matrix_json(const RMat& m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

void emit(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<size_t>(indent) * (depth + 1), ' ');
    const std::string close(static_cast<size_t>(indent) * depth, ' ');
    switch (j.type()) {
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                emit(it.value(), out, indent, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // arrays of scalars stay on one line
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            out += flat ? "[" : "[\n";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat ? ", " : ",\n";
                first = false;
                if (!flat) out += pad;
                emit(e, out, indent, depth + 1);
            }
            out += flat ? "]" : "\n" + close + "]";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

BoundaryConfig boundary_from_json(const json& j, int n) {
    BoundaryConfig b;
    b.n = n;
    for (int a = 0; a < 2; ++a) {
        const std::string pk = "p" + std::to_string(a), uk = "U" + std::to_string(a);
        const json& p = as_array(field(j, pk, "boundary"), "boundary." + pk, n);
        for (int s = 0; s < n; ++s) b.p[a].push_back(as_int(p[s], "boundary." + pk + "[" + std::to_string(s) + "]"));
        b.U[a] = matrix_from_json(field(j, uk, "boundary"), n, "boundary." + uk);
    }
    b.validate();
    return b;
}

json boundary_to_json(const BoundaryConfig& b) {
    return json{{"p0", b.p[0]}, {"p1", b.p[1]}, {"U0", matrix_json(b.U[0])}, {"U1", matrix_json(b.U[1])}};
}

ProblemFile parse_problem(const json& j, std::optional<int> grid_points) {
    const int n = as_int(field(j, "n", "problem"), "problem.n");
    const std::string cls_name = as_string(field(j, "class", "problem"), "problem.class");
    const auto cls = parse_class(cls_name);
    if (!cls) throw ConfigError("problem.class: unknown class '" + cls_name + "'");
    const int points = grid_points ? *grid_points : as_int(field(j, "grid_points", "problem"), "problem.grid_points");

    ProblemFile out;
    out.coefficients = make_coefficient_set(*cls, n, points);
    out.boundary = j.contains("boundary") ? boundary_from_json(j["boundary"], n) : BoundaryConfig::standard(n);

    if (j.contains("coefficients")) {
        const json& cj = j["coefficients"];
        if (!cj.is_object()) throw ConfigError("problem.coefficients: expected an object");
        for (auto it = cj.begin(); it != cj.end(); ++it) {
            const std::string where = "problem.coefficients." + it.key();
            if (!out.coefficients.values.contains(it.key()))
                throw ConfigError(where + ": not a coefficient of class " + cls_name);
            const std::string kind = as_string(field(it.value(), "kind", where), where + ".kind");
            std::vector<double> samples;
            if (kind == "samples") {
                const json& data = as_array(field(it.value(), "data", where), where + ".data", points);
                for (size_t i = 0; i < data.size(); ++i)
                    samples.push_back(as_double(data[i], where + ".data[" + std::to_string(i) + "]"));
            } else if (kind == "expr") {
                const json& toks = as_array(field(it.value(), "tokens", where), where + ".tokens");
                std::vector<std::string> tokens;
                for (size_t i = 0; i < toks.size(); ++i)
                    tokens.push_back(as_string(toks[i], where + ".tokens[" + std::to_string(i) + "]"));
                try {
                    samples = sample_expression(tokens, out.coefficients.grid);
                } catch (const ConfigError& e) {
                    throw ConfigError(where + ".tokens: " + e.what());
                }
            } else {
                throw ConfigError(where + ".kind: expected \"samples\" or \"expr\", got \"" + kind + "\"");
            }
            try {
                assign_coefficient(out.coefficients, it.key(), std::move(samples));
            } catch (const ConfigError& e) {
                throw ConfigError(where + ": " + e.what());
            }
        }
    }
    return out;
}

ProblemFile read_problem(const std::filesystem::path& path, std::optional<int> grid_points) {
    return parse_problem(read_json(path), grid_points);
}

json problem_to_json(const ProblemFile& p) {
    const CoefficientSet& c = p.coefficients;
    json coeffs = json::object();
    for (auto& [name, values] : c.values) coeffs[name] = json{{"kind", "samples"}, {"data", values}};
    return json{{"n", c.n},
                {"class", std::string(class_name(c.cls))},
                {"grid_points", c.grid.points},
                {"boundary", boundary_to_json(p.boundary)},
                {"coefficients", coeffs}};
}

json spectral_to_json(const SpectralData& d) {
    json data = json::array();
    for (const SpectralDatum& s : d.data) {
        json N;
        if (s.full) {
            const CMat m = s.weight_matrix(d.n);
            json rows = json::array();
            for (int r = 0; r < d.n; ++r) {
                json row = json::array();
                for (int c = 0; c < d.n; ++c) row.push_back(complex_json(m(r, c)));
                rows.push_back(row);
            }
            N = json{{"kind", "full"}, {"entries", rows}};
        } else {
            N = json{{"kind", "subdiagonal"}, {"beta", complex_json(s.beta)}};
        }
        data.push_back(json{{"l", s.l}, {"k", s.k}, {"lambda", complex_json(s.lambda)}, {"N", N}, {"winding", s.winding}});
    }
    return json{{"n", d.n},
                {"class", std::string(class_name(d.cls))},
                {"grid_points", d.grid_points},
                {"boundary", boundary_to_json(d.boundary)},
                {"L", d.L},
                {"means", d.means},
                {"data", data}};
}

SpectralData spectral_from_json(const json& j) {
    SpectralData d;
    d.n = as_int(field(j, "n", "spectral_data"), "spectral_data.n");
    if (d.n < 2 || d.n > kMaxOrder) throw ConfigError("spectral_data.n: unsupported order " + std::to_string(d.n));
    const std::string cls_name = as_string(field(j, "class", "spectral_data"), "spectral_data.class");
    const auto cls = parse_class(cls_name);
    if (!cls) throw ConfigError("spectral_data.class: unknown class '" + cls_name + "'");
    d.cls = *cls;
    d.grid_points = as_int(field(j, "grid_points", "spectral_data"), "spectral_data.grid_points");
    d.boundary = j.contains("boundary") ? boundary_from_json(j["boundary"], d.n) : BoundaryConfig::standard(d.n);
    d.L = as_int(field(j, "L", "spectral_data"), "spectral_data.L");
    if (d.L < 1) throw ConfigError("spectral_data.L: must be positive");
    if (j.contains("means")) {
        const json& mj = j["means"];
        if (!mj.is_object()) throw ConfigError("spectral_data.means: expected an object");
        for (auto it = mj.begin(); it != mj.end(); ++it)
            d.means[it.key()] = as_double(it.value(), "spectral_data.means." + it.key());
    }

    const json& arr = as_array(field(j, "data", "spectral_data"), "spectral_data.data");
    std::vector<std::optional<SpectralDatum>> slots(static_cast<size_t>(d.L) * (d.n - 1));
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "spectral_data.data[" + std::to_string(i) + "]";
        SpectralDatum s;
        s.l = as_int(field(arr[i], "l", where), where + ".l");
        s.k = as_int(field(arr[i], "k", where), where + ".k");
        if (s.l < 1 || s.l > d.L) throw ConfigError(where + ".l: outside 1.." + std::to_string(d.L));
        if (s.k < 1 || s.k > d.n - 1) throw ConfigError(where + ".k: outside 1.." + std::to_string(d.n - 1));
        s.lambda = as_complex(field(arr[i], "lambda", where), where + ".lambda");
        if (arr[i].contains("winding")) s.winding = as_int(arr[i]["winding"], where + ".winding");
        const json& N = field(arr[i], "N", where);
        const std::string kind = as_string(field(N, "kind", where + ".N"), where + ".N.kind");
        if (kind == "subdiagonal") {
            s.beta = as_complex(field(N, "beta", where + ".N"), where + ".N.beta");
        } else if (kind == "full") {
            s.full = true;
            const json& rows = as_array(field(N, "entries", where + ".N"), where + ".N.entries", d.n);
            s.N = CMat::Zero(d.n, d.n);
            for (int r = 0; r < d.n; ++r) {
                const std::string w = where + ".N.entries[" + std::to_string(r) + "]";
                as_array(rows[r], w, d.n);
                for (int c = 0; c < d.n; ++c) s.N(r, c) = as_complex(rows[r][c], w + "[" + std::to_string(c) + "]");
            }
            s.beta = s.N(s.k, s.k - 1);
        } else {
            throw ConfigError(where + ".N.kind: expected \"subdiagonal\" or \"full\", got \"" + kind + "\"");
        }
        auto& slot = slots[static_cast<size_t>(s.l - 1) * (d.n - 1) + (s.k - 1)];
        if (slot) throw ConfigError(where + ": duplicate datum (l, k)");
        slot = s;
    }
    for (size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i])
            throw ConfigError("spectral_data.data: missing datum l=" + std::to_string(i / (d.n - 1) + 1) +
                              ", k=" + std::to_string(i % (d.n - 1) + 1));
        d.data.push_back(*slots[i]);
    }
    return d;
}

SpectralData read_spectral(const std::filesystem::path& path) { return spectral_from_json(read_json(path)); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump(const json& j, int indent) {
    std::string out;
    emit(j, out, indent, 0);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw OutputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw OutputError("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, dump(j) + "\n"); }

void write_csv(const std::filesystem::path& path, const CoefficientSet& c, const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "x";
    for (auto& name : names) os << "," << name;
    os << "\n";
    for (int i = 0; i < c.grid.points; ++i) {
        os << format_double(c.grid.x(i));
        for (auto& name : names) os << "," << format_double(c[name][i]);
        os << "\n";
    }
    write_text(path, os.str());
}

std::filesystem::path sidecar(const std::filesystem::path& out, const std::string& tag) {
    std::filesystem::path p = out;
    p.replace_filename(out.stem().string() + "." + tag + ".json");
    return p;
}

}  // namespace qspec::io
