#include <benchmark/benchmark.h>

#include "qlink/cow.hpp"
#include "qlink/photonics.hpp"
#include "qlink/qmath.hpp"
#include "qlink/tomography.hpp"

using namespace qlink;

static void BM_ApplyProcess(benchmark::State& state) {
    const ProcessMatrix chi = ProcessMatrix::depolarizing_process();
    const DensityMatrix rho = DensityMatrix::from_bloch(0.3, -0.2, 0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_process(chi, rho));
    }
}
BENCHMARK(BM_ApplyProcess);

static void BM_ReconstructProcess(benchmark::State& state) {
    const std::array<double, 6> targets = {0.997429, 0.998614, 0.9944,
                                           0.9962,   0.9957,   0.9940};
    const auto pairs = ChannelModel::from_state_fidelities(targets).exact_probe_pairs();
    for (auto _ : state) {
        benchmark::DoNotOptimize(reconstruct_process(pairs));
    }
}
BENCHMARK(BM_ReconstructProcess);

static void BM_SecretKeyRate(benchmark::State& state) {
    SkrParams params;
    params.link.channel_loss_db = 28.02;
    for (auto _ : state) {
        benchmark::DoNotOptimize(secret_key_rate(params));
    }
}
BENCHMARK(BM_SecretKeyRate);

static void BM_FieldTrialWindow(benchmark::State& state) {
    FieldTrialConfig trial;
    trial.link.channel_loss_db = 28.02;
    trial.duration_s = trial.feedback.period_s * static_cast<double>(state.range(0));
    for (auto _ : state) {
        Rng rng(7);
        benchmark::DoNotOptimize(run_field_trial(trial, rng));
    }
}
BENCHMARK(BM_FieldTrialWindow)->Arg(1)->Arg(64);

static void BM_SlotSegment(benchmark::State& state) {
    ProtocolConfig cfg;
    LinkBudget link;
    link.channel_loss_db = 12.95;
    std::vector<std::uint8_t> bits(static_cast<size_t>(state.range(0)));
    for (size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>(i & 1);
    for (auto _ : state) {
        Rng rng(11);
        const SlotSequence sent = encode(bits, cfg, rng);
        const DetectionRecord det = transmit_and_detect(sent, link, cfg, {}, 0.1, rng);
        benchmark::DoNotOptimize(decode_and_sift(sent, det));
    }
}
BENCHMARK(BM_SlotSegment)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
