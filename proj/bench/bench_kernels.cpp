// Objective+gradient throughput: OpenMP kernel against the serial reference.

#include <benchmark/benchmark.h>

#include <random>
#include <set>

#include "trollkit/model.hpp"

using namespace trollkit;

namespace {

struct Problem {
    Dataset data;
    std::vector<double> params;
};

// n rows over a d-column sparse block (nnz per row) plus a 50-wide dense block, K=3.
Problem make_problem(std::size_t n, std::size_t d, std::size_t nnz)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<FeatureVector> rows(n);
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::uint32_t> cols;
        while (cols.size() < nnz)
            cols.insert(static_cast<std::uint32_t>(rng() % d));
        for (auto c : cols)
            rows[i].sparse.emplace_back(c, 1.0);
        rows[i].dense.resize(50);
        for (auto& v : rows[i].dense)
            v = unit(rng);
        labels[i] = static_cast<std::uint32_t>(rng() % 3);
    }
    Problem p{Dataset(rows, labels, {"a", "b", "c"}, d, 50), {}};
    p.params.resize(3 * (d + 50) + 3);
    for (auto& v : p.params)
        v = 0.01 * unit(rng);
    return p;
}

template <double (*Kernel)(const Dataset&, std::span<const double>, double, std::span<double>)>
void run(benchmark::State& state)
{
    auto p = make_problem(static_cast<std::size_t>(state.range(0)), 20000, 40);
    std::vector<double> grad(p.params.size());
    for (auto _ : state) {
        double j = Kernel(p.data, p.params, 0.1, grad);
        benchmark::DoNotOptimize(j);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(run<kernels::serial::objective_gradient>)->Name("serial")->Arg(1000)->Arg(4000)->Arg(16000);
BENCHMARK(run<kernels::objective_gradient>)->Name("parallel")->Arg(1000)->Arg(4000)->Arg(16000);

BENCHMARK_MAIN();
