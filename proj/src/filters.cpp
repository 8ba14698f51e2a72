#include "pulseox/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pulseox/errors.hpp"
#include "pulseox/parallel.hpp"

namespace pulseox::filt {

namespace {

// Input extended by M samples of odd reflection on each side.
std::vector<double> odd_reflect_pad(const std::vector<double>& x, std::ptrdiff_t m) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    if (n == 0) throw DomainError("empty signal");
    std::vector<double> p(static_cast<std::size_t>(n + 2 * m));
    for (std::ptrdiff_t k = 0; k < m; ++k) {
        std::ptrdiff_t src = std::min<std::ptrdiff_t>(m - k, n - 1);
        p[static_cast<std::size_t>(k)] = 2.0 * x[0] - x[static_cast<std::size_t>(src)];
    }
    std::copy(x.begin(), x.end(), p.begin() + m);
    for (std::ptrdiff_t k = 0; k < m; ++k) {
        std::ptrdiff_t src = std::min<std::ptrdiff_t>(k + 1, n - 1);
        p[static_cast<std::size_t>(n + m + k)] =
            2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(n - 1 - src)];
    }
    return p;
}

double window_sum(const double* p, int len) {
    double acc = 0.0;
    for (int k = 0; k < len; ++k) acc += p[k];
    return acc;
}

double dot(const double* p, const double* h, std::size_t len) {
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) acc += p[k] * h[k];
    return acc;
}

} // namespace

std::vector<double> moving_average(const std::vector<double>& x, int len) {
    if (len < 1 || len % 2 == 0) throw DomainError("moving average length must be odd and positive");
    const std::ptrdiff_t m = len / 2;
    std::vector<double> pad = odd_reflect_pad(x, m);
    std::vector<double> out(x.size());
    const double inv = 1.0 / len;
    parallel_for(static_cast<std::ptrdiff_t>(x.size()),
                 [&](std::ptrdiff_t i) { out[static_cast<std::size_t>(i)] = window_sum(pad.data() + i, len) * inv; });
    return out;
}

std::vector<double> fir_apply(const std::vector<double>& x, const std::vector<double>& h) {
    if (h.empty() || h.size() % 2 == 0) throw DomainError("kernel length must be odd and positive");
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(h.size()) / 2;
    std::vector<double> pad = odd_reflect_pad(x, m);
    std::vector<double> out(x.size());
    parallel_for(static_cast<std::ptrdiff_t>(x.size()),
                 [&](std::ptrdiff_t i) { out[static_cast<std::size_t>(i)] = dot(pad.data() + i, h.data(), h.size()); });
    return out;
}

namespace reference {

std::vector<double> moving_average(const std::vector<double>& x, int len) {
    if (len < 1 || len % 2 == 0) throw DomainError("moving average length must be odd and positive");
    const std::ptrdiff_t m = len / 2;
    std::vector<double> pad = odd_reflect_pad(x, m);
    std::vector<double> out(x.size());
    const double inv = 1.0 / len;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = window_sum(pad.data() + i, len) * inv;
    return out;
}

std::vector<double> fir_apply(const std::vector<double>& x, const std::vector<double>& h) {
    if (h.empty() || h.size() % 2 == 0) throw DomainError("kernel length must be odd and positive");
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(h.size()) / 2;
    std::vector<double> pad = odd_reflect_pad(x, m);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = dot(pad.data() + i, h.data(), h.size());
    return out;
}

} // namespace reference

double kaiser_i0(double x) {
    // power series; converges fast for the betas used here
    double sum = 1.0, term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k <= 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

std::vector<double> design_bandpass(double fs_hz, double lo_hz, double hi_hz, double span_s,
                                    double kaiser_beta) {
    if (!(fs_hz > 0) || !(span_s > 0)) throw DomainError("bad band-pass design parameters");
    if (!(0.0 < lo_hz && lo_hz < hi_hz && hi_hz < fs_hz / 2.0))
        throw DomainError("band edges must satisfy 0 < lo < hi < fs/2");

    int n = static_cast<int>(std::lround(fs_hz * span_s));
    if (n % 2 == 0) ++n;
    if (n < 5) n = 5;
    const int mid = n / 2;

    std::vector<double> h(static_cast<std::size_t>(n));
    const double i0b = kaiser_i0(kaiser_beta);
    for (int i = 0; i < n; ++i) {
        const int k = i - mid;
        double ideal;
        if (k == 0) {
            ideal = 2.0 * (hi_hz - lo_hz) / fs_hz;
        } else {
            const double pk = std::numbers::pi * k;
            ideal = (std::sin(2.0 * std::numbers::pi * hi_hz * k / fs_hz) -
                     std::sin(2.0 * std::numbers::pi * lo_hz * k / fs_hz)) /
                    pk;
        }
        const double t = static_cast<double>(k) / mid;
        const double w = kaiser_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - t * t))) / i0b;
        h[static_cast<std::size_t>(i)] = ideal * w;
    }

    // zero the tap sum so DC is rejected exactly
    double mean = 0.0;
    for (double v : h) mean += v;
    mean /= n;
    for (double& v : h) v -= mean;
    return h;
}

std::vector<Peak> find_peaks(const double* x, std::ptrdiff_t n, double min_prominence,
                             std::ptrdiff_t min_distance) {
    std::vector<Peak> candidates;
    if (n < 3) return candidates;

    // local maxima; a plateau counts once, at its first sample
    std::ptrdiff_t i = 1;
    while (i < n - 1) {
        if (x[i] > x[i - 1]) {
            std::ptrdiff_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i]) {
                candidates.push_back({i, 0.0});
                i = j + 1;
                continue;
            }
            i = j + 1;
        } else {
            ++i;
        }
    }

    // prominence: drop to the highest saddle separating the peak from higher
    // terrain (or from the signal edge)
    for (auto& pk : candidates) {
        double left_min = x[pk.index];
        for (std::ptrdiff_t k = pk.index - 1; k >= 0; --k) {
            if (x[k] > x[pk.index]) break;
            left_min = std::min(left_min, x[k]);
        }
        double right_min = x[pk.index];
        for (std::ptrdiff_t k = pk.index + 1; k < n; ++k) {
            if (x[k] > x[pk.index]) break;
            right_min = std::min(right_min, x[k]);
        }
        pk.prominence = x[pk.index] - std::max(left_min, right_min);
    }

    std::vector<Peak> strong;
    for (const auto& pk : candidates)
        if (pk.prominence >= min_prominence) strong.push_back(pk);

    // min-distance thinning, higher prominence first, earlier index on ties
    std::sort(strong.begin(), strong.end(), [](const Peak& a, const Peak& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return a.index < b.index;
    });
    std::vector<Peak> kept;
    for (const auto& pk : strong) {
        bool ok = true;
        for (const auto& k : kept)
            if (std::abs(k.index - pk.index) < min_distance) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(pk);
    }
    std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
    return kept;
}

} // namespace pulseox::filt
