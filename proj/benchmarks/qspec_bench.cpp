#include <benchmark/benchmark.h>

#include "qspec/forward.hpp"
#include "qspec/inverse.hpp"
#include "qspec/integrator.hpp"
#include "qspec/pipeline.hpp"

namespace {

using namespace qspec;

ProblemDefinition third_order(int points) {
    CoefficientSet c = make_coefficient_set(OperatorClass::N3Mixed, 3, points);
    assign_coefficient(c, "tau1", sample_expression({"cos:0.4:2"}, c.grid));
    assign_coefficient(c, "sigma0", sample_expression({"sin:0.2:1"}, c.grid));
    return build_problem(c);
}

void BM_CharMinor(benchmark::State& state) {
    const ProblemDefinition p = third_order(static_cast<int>(state.range(0)));
    const cplx lambda(-3000, 1500);
    for (auto _ : state) benchmark::DoNotOptimize(char_minor(p, lambda, 1, 1));
}
BENCHMARK(BM_CharMinor)->Arg(201)->Arg(401)->Unit(benchmark::kMicrosecond);

void BM_WeylSolutions(benchmark::State& state) {
    const ProblemDefinition p = third_order(static_cast<int>(state.range(0)));
    const cplx lambda(400, 250);
    for (auto _ : state) benchmark::DoNotOptimize(weyl_solutions(p, lambda));
}
BENCHMARK(BM_WeylSolutions)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_ForwardLevels(benchmark::State& state) {
    const ProblemDefinition p = third_order(201);
    const int L = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_spectral_data(p, L));
}
BENCHMARK(BM_ForwardLevels)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MainEquationNode(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const ProblemDefinition p = third_order(201);
    const SpectralData d = assemble_spectral_data(p, N);
    const ProblemDefinition m = build_problem(first_step_model(d));
    const SpectralData md = assemble_spectral_data(m, N);
    InverseOptions o;
    o.truncation = N;
    const InverseProblem ip = prepare_inverse(m, d, md, o);
    for (auto _ : state) benchmark::DoNotOptimize(solve_main_equation(assemble_main_equation(ip, 100)));
}
BENCHMARK(BM_MainEquationNode)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
