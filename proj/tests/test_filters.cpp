#include "doctest.h"

#include <cmath>
#include <vector>

#include "pulseox/filters.hpp"
#include "pulseox/rng.hpp"

using namespace pulseox;
using filt::find_peaks;
using filt::Peak;

namespace {

std::vector<double> sine(double f, double fs, double seconds, double amp = 1.0,
                         double offset = 0.0) {
    int n = static_cast<int>(fs * seconds);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = offset + amp * std::sin(2 * M_PI * f * i / fs);
    return x;
}

// Steady-state amplitude gain of the kernel at frequency f (interior third).
double sine_gain(double f, double fs, const std::vector<double>& h) {
    std::vector<double> y = filt::fir_apply(sine(f, fs, 30.0), h);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = y.size() / 3; i < 2 * y.size() / 3; ++i) {
        lo = std::min(lo, y[i]);
        hi = std::max(hi, y[i]);
    }
    return (hi - lo) / 2.0;
}

}  // namespace

TEST_CASE("moving average preserves constants and straight lines exactly") {
    std::vector<double> c(300, 41.5);
    for (double v : filt::moving_average(c, 31)) CHECK(v == doctest::Approx(41.5).epsilon(1e-15));
    // odd-reflection extends value and slope, so a ramp passes through
    // untouched, including at both edges
    std::vector<double> ramp(200);
    for (int i = 0; i < 200; ++i) ramp[i] = 3.0 + 0.25 * i;
    std::vector<double> m = filt::moving_average(ramp, 51);
    for (int i = 0; i < 200; ++i) CHECK(m[i] == doctest::Approx(ramp[i]).epsilon(1e-12));
}

TEST_CASE("moving average output length equals input length") {
    std::vector<double> x(157, 1.0);
    CHECK(filt::moving_average(x, 31).size() == x.size());
    CHECK(filt::fir_apply(x, filt::design_bandpass(100.0, 0.5, 4.0)).size() == x.size());
}

TEST_CASE("parallel kernels match the serial reference bit-for-bit") {
    std::vector<double> x(20000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = uniform01(99, i) - 0.5;
    CHECK(filt::moving_average(x, 101) == filt::reference::moving_average(x, 101));
    std::vector<double> h = filt::design_bandpass(100.0, 0.5, 4.0);
    CHECK(filt::fir_apply(x, h) == filt::reference::fir_apply(x, h));
}

TEST_CASE("band-pass design: odd length, exact DC rejection") {
    std::vector<double> h = filt::design_bandpass(100.0, 0.5, 4.0);
    CHECK(h.size() == 401);  // ~4 s at 100 Hz, forced odd
    double sum = 0.0;
    for (double v : h) sum += v;
    CHECK(std::fabs(sum) <= 1e-12);  // measured ~4e-17
    std::vector<double> dc = filt::fir_apply(std::vector<double>(500, 123.0), h);
    for (double v : dc) CHECK(std::fabs(v) <= 1e-9);
}

TEST_CASE("band-pass gains match the recorded frequency response") {
    // Measured once on this design (fs=100, band [0.5, 4], 401 taps,
    // Kaiser beta 5) and pinned; the estimator's amplitude budget rests on
    // the passband staying within 0.3% of unity.
    std::vector<double> h = filt::design_bandpass(100.0, 0.5, 4.0);
    CHECK(sine_gain(1.0, 100.0, h) == doctest::Approx(1.001571).epsilon(2e-4));
    CHECK(sine_gain(2.0, 100.0, h) == doctest::Approx(0.997364).epsilon(2e-4));
    CHECK(sine_gain(3.0, 100.0, h) == doctest::Approx(0.999384).epsilon(2e-4));
    // band edges sit at half amplitude, as for any windowed-sinc edge
    CHECK(sine_gain(0.5, 100.0, h) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sine_gain(4.0, 100.0, h) == doctest::Approx(0.5).epsilon(0.01));
    // stopband: out-of-band tones vanish (budget 0.1 of amplitude, measured 8e-5)
    CHECK(sine_gain(10.0, 100.0, h) < 0.001);
    CHECK(sine_gain(6.0, 100.0, h) < 0.001);
    // slow common-mode region is strongly attenuated
    CHECK(sine_gain(0.1, 100.0, h) < 0.01);
}

TEST_CASE("kaiser i0 matches reference values") {
    CHECK(filt::kaiser_i0(0.0) == 1.0);
    CHECK(filt::kaiser_i0(1.0) == doctest::Approx(1.2660658777520084).epsilon(1e-14));
    CHECK(filt::kaiser_i0(5.0) == doctest::Approx(27.239871823604442).epsilon(1e-13));
}

TEST_CASE("peak detection finds isolated maxima with exact prominences") {
    //            0    1    2    3    4    5    6    7    8
    std::vector<double> x = {0.0, 2.0, 0.5, 1.0, 0.2, 3.0, 0.1, 1.5, 0.0};
    std::vector<Peak> peaks = find_peaks(x, 0.05, 1);
    REQUIRE(peaks.size() == 4);
    CHECK(peaks[0].index == 1);
    CHECK(peaks[1].index == 3);
    CHECK(peaks[2].index == 5);
    CHECK(peaks[3].index == 7);
    CHECK(peaks[0].prominence == doctest::Approx(1.8));  // 2.0 above the higher saddle 0.2
    CHECK(peaks[1].prominence == doctest::Approx(0.5));  // 1.0 above the higher saddle 0.5
    CHECK(peaks[2].prominence == doctest::Approx(3.0));  // global max: full height above edge min
    CHECK(peaks[3].prominence == doctest::Approx(1.4));  // 1.5 above saddle 0.1
}

TEST_CASE("plateaus resolve to their first sample") {
    std::vector<double> x = {0.0, 1.0, 1.0, 1.0, 0.0, 2.0, 2.0, 0.0};
    std::vector<Peak> peaks = find_peaks(x, 0.1, 1);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].index == 1);
    CHECK(peaks[1].index == 5);
}

TEST_CASE("distance thinning keeps the stronger peak") {
    // two close peaks, the later one stronger; then a distant weak one
    std::vector<double> x = {0.0, 1.0, 0.8, 1.6, 0.0, 0.0, 0.0, 0.0, 0.9, 0.0};
    std::vector<Peak> peaks = find_peaks(x, 0.05, 4);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].index == 3);  // won over index 1 within distance 4
    CHECK(peaks[1].index == 8);
}

TEST_CASE("prominence ties break toward the earlier index") {
    std::vector<double> x = {0.0, 1.0, 0.0, 1.0, 0.0};
    std::vector<Peak> peaks = find_peaks(x, 0.1, 3);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].index == 1);
}

TEST_CASE("min_prominence filters shallow wiggles") {
    std::vector<double> x = sine(1.0, 100.0, 3.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.01 * std::sin(2 * M_PI * 17.0 * i / 100.0);
    std::vector<Peak> strong = find_peaks(x, 0.5, 25);
    CHECK(strong.size() == 3);  // one per beat of the 1 Hz carrier
}

TEST_CASE("degenerate peak inputs return no peaks") {
    std::vector<double> flat(50, 1.0);
    CHECK(find_peaks(flat, 0.1, 1).empty());
    std::vector<double> tiny = {1.0};
    CHECK(find_peaks(tiny, 0.1, 1).empty());
    CHECK(find_peaks(std::vector<double>{}, 0.1, 1).empty());
}
