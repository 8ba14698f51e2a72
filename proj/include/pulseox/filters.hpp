#pragma once

#include <cstddef>
#include <vector>

namespace pulseox::filt {

// All window kernels here are linear-phase and centered; signal ends are
// extended by odd reflection (x[-k] = 2 x[0] - x[k]), which keeps value and
// slope continuous so slow artifacts do not ring at the boundaries.

// Centered moving average, `len` taps (forced odd by the caller).
// Output has the same length as the input.
std::vector<double> moving_average(const std::vector<double>& x, int len);

// Convolution with a centered odd-length kernel, same-length output.
std::vector<double> fir_apply(const std::vector<double>& x, const std::vector<double>& h);

namespace reference {
// Plain serial loops, kept for testing; per-sample arithmetic matches the
// parallel kernels exactly, so outputs are bit-identical.
std::vector<double> moving_average(const std::vector<double>& x, int len);
std::vector<double> fir_apply(const std::vector<double>& x, const std::vector<double>& h);
} // namespace reference

// Windowed-sinc band-pass (difference of two low-pass prototypes under a
// Kaiser window), odd length ~ span_s * fs, with the DC tap sum zeroed
// exactly so constants are rejected to machine precision.
std::vector<double> design_bandpass(double fs_hz, double lo_hz, double hi_hz,
                                    double span_s = 4.0, double kaiser_beta = 5.0);

// Zeroth-order modified Bessel function of the first kind (Kaiser window).
double kaiser_i0(double x);

struct Peak {
    std::ptrdiff_t index;
    double prominence;
};

// Local maxima of x with prominence >= min_prominence, thinned so that kept
// peaks are at least min_distance samples apart.  Plateaus resolve to their
// first sample; distance thinning keeps higher-prominence peaks first and
// breaks prominence ties toward the earlier index.
std::vector<Peak> find_peaks(const double* x, std::ptrdiff_t n, double min_prominence,
                             std::ptrdiff_t min_distance);

inline std::vector<Peak> find_peaks(const std::vector<double>& x, double min_prominence,
                                    std::ptrdiff_t min_distance) {
    return find_peaks(x.data(), static_cast<std::ptrdiff_t>(x.size()), min_prominence, min_distance);
}

} // namespace pulseox::filt
