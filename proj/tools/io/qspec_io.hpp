#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qspec/coefficients.hpp"
#include "qspec/forward.hpp"
#include "qspec/operator.hpp"

namespace qspec::io {

using nlohmann::json;

// Unreadable input.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Unwritable output.
struct OutputError : IoError {
    using IoError::IoError;
};

struct ProblemFile {
    CoefficientSet coefficients;
    BoundaryConfig boundary;
};

// {n, class, grid_points, coefficients: {name: {kind: "samples"|"expr", data|tokens}}, boundary?}
// `grid_points` overrides the file value; sample data must then match it.
ProblemFile parse_problem(const json& j, std::optional<int> grid_points = std::nullopt);
ProblemFile read_problem(const std::filesystem::path& path, std::optional<int> grid_points = std::nullopt);
json problem_to_json(const ProblemFile& p);

json boundary_to_json(const BoundaryConfig& b);
BoundaryConfig boundary_from_json(const json& j, int n);

json spectral_to_json(const SpectralData& d);
SpectralData spectral_from_json(const json& j);
SpectralData read_spectral(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);

// Doubles use 17 significant digits; non-finite values become null.
std::string format_double(double v);
std::string dump(const json& j, int indent = 2);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

// x followed by the named columns.
void write_csv(const std::filesystem::path& path, const CoefficientSet& c, const std::vector<std::string>& names);

// <stem>.<tag>.json next to `out`
std::filesystem::path sidecar(const std::filesystem::path& out, const std::string& tag);

}  // namespace qspec::io
