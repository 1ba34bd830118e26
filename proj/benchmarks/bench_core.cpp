#include <benchmark/benchmark.h>

#include <cmath>

#include "crlab/domain.hpp"
#include "crlab/frames.hpp"
#include "crlab/holder.hpp"
#include "crlab/homotopy.hpp"
#include "crlab/iteration.hpp"
#include "crlab/schedule.hpp"
#include "crlab/smoothing.hpp"

using namespace crlab;

namespace {

GridField wave(const GridPtr& g) {
    return sample_scalar(g, [d = g->dim()](const double* x) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += (i + 1) * x[i];
        return cplx(std::sin(s), std::cos(x[0] - x[d - 1]));
    });
}

EmbeddingState bump(int dim, int pts) {
    return state_from_structure(make_structure("cubic-bump", dim, 1e-6).X, dim, default_lattice(dim, 1.0, pts));
}

}  // namespace

static void BM_Smooth3D(benchmark::State& state) {
    auto g = Grid::full(Lattice::cube(3, static_cast<int>(state.range(0)), 1.0));
    auto u = wave(g);
    auto m = build_mollifier(3);
    for (auto _ : state) benchmark::DoNotOptimize(smooth(u, 0.05, m));
    state.SetItemsProcessed(state.iterations() * g->size());
}
BENCHMARK(BM_Smooth3D)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

static void BM_HolderNorm(benchmark::State& state) {
    auto g = Grid::full(Lattice::cube(2, static_cast<int>(state.range(0)), 1.0));
    auto u = wave(g);
    for (auto _ : state) benchmark::DoNotOptimize(norm(u, 2.5));
}
BENCHMARK(BM_HolderNorm)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);

static void BM_ErrorForm(benchmark::State& state) {
    auto st = bump(3, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(error_form(st));
}
BENCHMARK(BM_ErrorForm)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

static void BM_Dilate(benchmark::State& state) {
    auto s = make_structure("cubic-bump", 3);
    auto target = default_lattice(3, 1.0, 17);
    for (auto _ : state) benchmark::DoNotOptimize(dilate(state_on_box(s.X, 3, source_lattice(*target, 8.0)), 8.0));
}
BENCHMARK(BM_Dilate)->Unit(benchmark::kMillisecond);

static void BM_HomotopyDefect(benchmark::State& state) {
    auto st = bump(3, static_cast<int>(state.range(0)));
    HomotopyOperator op(st, st.dom.mask);
    auto phi = op.dbar0(wave(op.functions_grid()));
    for (auto _ : state) benchmark::DoNotOptimize(homotopy_defect(phi, op));
}
BENCHMARK(BM_HomotopyDefect)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_InvertMap(benchmark::State& state) {
    auto st = bump(3, 17);
    GridField f2 = sample(st.dom.support(), 3, [](const double* x, cplx* out) {
        out[0] = 0.002 * x[0] * x[0];
        out[1] = 0.001 * x[0] * x[1];
        out[2] = 0.0;
    });
    for (auto _ : state) benchmark::DoNotOptimize(invert_map(f2, st.dom, 0.04));
}
BENCHMARK(BM_InvertMap)->Unit(benchmark::kMillisecond);

static void BM_SequenceStep(benchmark::State& state) {
    auto st = bump(3, 17);
    auto m = build_mollifier(3);
    SequenceParams P;
    P.max_steps = 1;
    P.enforce_hypotheses = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_sequence(st, P, m));
}
BENCHMARK(BM_SequenceStep)->Unit(benchmark::kMillisecond);

static void BM_Evolve(benchmark::State& state) {
    ScheduleParams p;
    p.log_t0 = -6e4;
    const int J = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evolve(p, J));
    state.SetItemsProcessed(state.iterations() * J);
}
BENCHMARK(BM_Evolve)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_FindT0(benchmark::State& state) {
    ScheduleParams p;
    for (auto _ : state) benchmark::DoNotOptimize(find_t0(p, 1000));
}
BENCHMARK(BM_FindT0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
