// Serial vs OpenMP: the branch-evaluation kernel, one full RLS step and a
// small Monte Carlo experiment.

#include <benchmark/benchmark.h>

#include "barc/barc.hpp"
#include "barc/harness.hpp"

using namespace barc;

namespace {

ComplexVec random_vec(Rng& rng, std::size_t n) {
    ComplexVec x(n);
    for (auto& c : x) c = rng.complex_normal(1.0);
    return x;
}

// Args: {bank size, exec}. Bank size 0 means the exhaustive bank at M=24, D=5.
rx::BranchBank bank_for(int64_t size) {
    if (size == 0) return rx::gen_patterns(rx::DecimationScheme::optimal, 24, 5, 1, 0);
    return rx::gen_patterns(rx::DecimationScheme::random, 24, 5, static_cast<int>(size), 7);
}

void BM_BranchKernel(benchmark::State& state) {
    const rx::BranchBank bank = bank_for(state.range(0));
    const auto exec = state.range(1) ? kernels::Exec::parallel : kernels::Exec::serial;
    Rng rng(1);
    const ComplexVec r = random_vec(rng, 24), w = random_vec(rng, 5);
    ComplexVec z(bank.size());
    for (auto _ : state) {
        kernels::branch_outputs(exec, bank.flat, r, w, z);
        benchmark::DoNotOptimize(z.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(bank.size()));
    state.counters["branches"] = static_cast<double>(bank.size());
}

void BM_RlsStep(benchmark::State& state) {
    rx::BranchBank bank = bank_for(state.range(0));
    Rng rng(2);
    const ComplexVec p = random_vec(rng, 24);
    rx::BarcState s = rx::init_state(std::move(bank), 3, p);
    s.exec = state.range(1) ? kernels::Exec::parallel : kernels::Exec::serial;
    std::vector<ComplexVec> frames;
    for (int i = 0; i < 256; ++i) frames.push_back(random_vec(rng, 24));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto res = rx::rls_step(s, p, frames[i++ % frames.size()], 0.998);
        benchmark::DoNotOptimize(res.z);
    }
}

void BM_MonteCarlo(benchmark::State& state) {
    const nlohmann::json j = {{"study", "ber_vs_snr"},
                              {"grid", {10.0}},
                              {"algorithms", {"barc_rls"}},
                              {"system", {{"N", 16}, {"Lp", 4}, {"users", 4}}},
                              {"receiver", {{"channel_mode", "genie"}, {"branches", 4}}},
                              {"run", {{"num_runs", 8}, {"num_symbols", 300}, {"threads", state.range(0)}}}};
    const sim::ExperimentConfig cfg = sim::parse_config(j);
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_experiment(cfg).rows.size());
}

}  // namespace

BENCHMARK(BM_BranchKernel)->ArgNames({"B", "omp"})->ArgsProduct({{16, 256, 0}, {0, 1}});
BENCHMARK(BM_RlsStep)->ArgNames({"B", "omp"})->ArgsProduct({{16, 256}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarlo)->ArgName("threads")->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
