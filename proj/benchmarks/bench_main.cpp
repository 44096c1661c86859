#include <benchmark/benchmark.h>

#include "commands.hpp"
#include "config.hpp"
#include "ganstab/dynamics.hpp"
#include "ganstab/numkit.hpp"
#include "ganstab/random.hpp"
#include "ganstab/stability.hpp"
#include "ganstab/systems.hpp"

using namespace ganstab;
using namespace ganstab::numkit;

static void BM_EigGeneral(benchmark::State& state) {
    SeqRng rng(1);
    const Mat m = rng.normal_matrix(state.range(0), state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(numkit::eig_general(m));
}
BENCHMARK(BM_EigGeneral)->Arg(4)->Arg(16)->Arg(64);

static void BM_FourthMomentMatrix(benchmark::State& state) {
    const Index n = state.range(0);
    SeqRng rng(2);
    const Vec mu = rng.normal_vector(n);
    const Mat sigma = rng.spd(n, 0.5, 3.0);
    for (auto _ : state) benchmark::DoNotOptimize(numkit::gaussian_fourth_moment_matrix(mu, sigma));
}
BENCHMARK(BM_FourthMomentMatrix)->Arg(1)->Arg(2)->Arg(4);

static void BM_OrbitDopri(benchmark::State& state) {
    const GanSystem sys = scalar_wgan_lq(1.0);
    const ParamPoint x0 = sys.make_point((Vec(2) << 0, 0).finished(), (Vec(2) << 0.9, 0).finished());
    const IntegratorCfg cfg = IntegratorCfg::adaptive(2 * 1.57351);
    for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, x0, cfg).trajectory);
}
BENCHMARK(BM_OrbitDopri)->Unit(benchmark::kMillisecond);

static void BM_NumericJacobian(benchmark::State& state) {
    const GanSystem sys = uniform_2d(LossFn::logistic());
    const ParamPoint eq = sys.equilibrium();
    for (auto _ : state) benchmark::DoNotOptimize(numeric_jacobian(sys, eq));
}
BENCHMARK(BM_NumericJacobian);

static void BM_MonteCarloField(benchmark::State& state) {
    const GanSystem sys = gan_lq_nd(Mat::Identity(2, 2), Vec::Zero(2), LossFn::logistic(),
                                    ExpectationMode::monte_carlo(7, static_cast<std::size_t>(state.range(0))));
    const ParamPoint p = sys.equilibrium();
    for (auto _ : state) benchmark::DoNotOptimize(sys.field(p));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloField)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

static void BM_StreamlineGrid(benchmark::State& state) {
    const tools::ExperimentConfig cfg = tools::load_config(GANSTAB_SOURCE_DIR "/configs/streamline_wgan_eta0p5.json");
    for (auto _ : state) benchmark::DoNotOptimize(tools::cmd_streamline(cfg));
}
BENCHMARK(BM_StreamlineGrid)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
