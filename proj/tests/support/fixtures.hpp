#pragma once

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qspec/forward.hpp"
#include "qspec/operator.hpp"
#include "qspec/pipeline.hpp"

namespace qspec::testing {

// tau1 = 0.4 cos 2 pi x, sigma0 = 0.2 sin pi x
inline CoefficientSet n3_fixture(int points = 401) {
    CoefficientSet c = make_coefficient_set(OperatorClass::N3Mixed, 3, points);
    assign_coefficient(c, "tau1", sample_expression({"cos:0.4:2"}, c.grid));
    assign_coefficient(c, "sigma0", sample_expression({"sin:0.2:1"}, c.grid));
    return c;
}

inline CoefficientSet n4_regular_fixture(int points = 401) {
    CoefficientSet c = make_coefficient_set(OperatorClass::RegularEven, 4, points);
    assign_coefficient(c, "tau2", sample_expression({"cos:0.4:2", "const:0.1"}, c.grid));
    assign_coefficient(c, "tau1", sample_expression({"sin:0.3:2"}, c.grid));
    assign_coefficient(c, "tau0", sample_expression({"cos:0.3:1", "const:0.2"}, c.grid));
    return c;
}

inline CoefficientSet n4_distributional_fixture(int points = 401) {
    CoefficientSet c = make_coefficient_set(OperatorClass::DistributionalEven, 4, points);
    assign_coefficient(c, "sigma2", sample_expression({"sin:0.15:2"}, c.grid));
    assign_coefficient(c, "sigma1", sample_expression({"cos:0.1:2"}, c.grid));
    assign_coefficient(c, "sigma0", sample_expression({"sin:0.1:2"}, c.grid));
    return c;
}

inline CoefficientSet zero_set(OperatorClass cls, int n, int points = 401) {
    return make_coefficient_set(cls, n, points);
}

// Forward runs are the expensive part of most tests; keep one per key.
inline const SpectralData& cached_data(const std::string& key, const CoefficientSet& c, int L) {
    static std::mutex m;
    static std::map<std::string, SpectralData> cache;
    std::lock_guard lock(m);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, assemble_spectral_data(build_problem(c), L)).first;
    return it->second;
}

}  // namespace qspec::testing
