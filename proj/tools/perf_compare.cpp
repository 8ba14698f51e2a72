#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "pulseox/estimator.hpp"
#include "pulseox/filters.hpp"
#include "pulseox/parallel.hpp"
#include "pulseox/ppg.hpp"
#include "pulseox/rng.hpp"

namespace {

using namespace pulseox;

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

bool report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s  %9.3f ms  %9.3f ms  %6.2fx  %s\n", name, serial_s * 1e3,
                parallel_s * 1e3, parallel_s > 0 ? serial_s / parallel_s : 0.0,
                identical ? "identical" : "MISMATCH");
    return identical;
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());
    std::printf("%-28s  %12s  %12s  %7s  %s\n", "kernel", "serial", "parallel", "speedup",
                "outputs");
    bool all_ok = true;

    // Long synthetic input for the streaming kernels.
    const std::size_t n = 1'000'000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = uniform01(42, i) - 0.5;

    {
        std::vector<double> a, b;
        double ts = time_best_of(3, [&] { a = filt::reference::moving_average(x, 101); });
        double tp = time_best_of(3, [&] { b = filt::moving_average(x, 101); });
        all_ok &= report("moving_average (1e6, L=101)", ts, tp, a == b);
    }
    {
        std::vector<double> h = filt::design_bandpass(100.0, 0.5, 4.0);
        std::vector<double> a, b;
        double ts = time_best_of(3, [&] { a = filt::reference::fir_apply(x, h); });
        double tp = time_best_of(3, [&] { b = filt::fir_apply(x, h); });
        char name[64];
        std::snprintf(name, sizeof name, "fir_apply (1e6, N=%zu)", h.size());
        all_ok &= report(name, ts, tp, a == b);
    }
    {
        ppg::PhysioProfile profile;
        ppg::ArtifactSchedule schedule;
        ppg::SampleStream a, b;
        double ts = time_best_of(3,
                                 [&] { a = ppg::reference::synthesize(profile, schedule, 100.0, 120.0, 7); });
        double tp = time_best_of(3, [&] { b = ppg::synthesize(profile, schedule, 100.0, 120.0, 7); });
        bool same = a.samples.size() == b.samples.size();
        for (std::size_t i = 0; same && i < a.samples.size(); ++i) {
            const auto& sa = a.samples[i];
            const auto& sb = b.samples[i];
            same = sa.t_s == sb.t_s && sa.red == sb.red && sa.ir == sb.ir &&
                   sa.ambient == sb.ambient && sa.saturated == sb.saturated;
        }
        all_ok &= report("synthesize (120 s @ 100 Hz)", ts, tp, same);

        est::EstimatorConfig cfg;
        std::vector<est::Reading> ra, rb;
        ts = time_best_of(3, [&] { ra = est::reference::process_stream(b, cfg); });
        tp = time_best_of(3, [&] { rb = est::process_stream(b, cfg); });
        same = ra.size() == rb.size();
        for (std::size_t i = 0; same && i < ra.size(); ++i) {
            same = ra[i].t_s == rb[i].t_s && ra[i].spo2_percent == rb[i].spo2_percent &&
                   ra[i].hr_bpm == rb[i].hr_bpm && ra[i].valid == rb[i].valid &&
                   ra[i].flags == rb[i].flags &&
                   ra[i].perfusion_index == rb[i].perfusion_index;
        }
        all_ok &= report("process_stream (120 s)", ts, tp, same);
    }

    std::printf("\n%s\n", all_ok ? "all kernels agree bit-for-bit"
                                 : "kernel outputs diverged; see MISMATCH rows");
    return all_ok ? 0 : 1;
}
