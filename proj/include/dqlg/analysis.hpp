#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dqlg/fft.hpp"
#include "dqlg/mode_evolution.hpp"
#include "dqlg/wavepacket.hpp"

namespace dqlg {

// ---------------------------------------------------------------------------
// Time dilation

struct DilationRow {
    double x;     ///< E' tau / hbar
    double zeta;
    double r;     ///< zeta * lattice spacing
    double t_r;   ///< zeta * time step
};

struct DilationCurve {
    std::vector<DilationRow> rows;
};

inline DilationCurve dilation_curve(std::span<const double> xs) {
    DilationCurve curve;
    curve.rows.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double zeta;
        try {
            zeta = zeta_solve(xs[i]);
        } catch (const DomainError& e) {
            throw DomainError("dilation row " + std::to_string(i) + ": " + e.what());
        }
        curve.rows.push_back({xs[i], zeta, zeta, zeta});
    }
    return curve;
}

/// Fermion speed in the medium, c / sqrt(3).
inline const double medium_velocity = 1.0 / std::sqrt(3.0);

/// sqrt(1 - r_s / r) with r_s = 1 and r = zeta.
inline double schwarzschild_rhs(double zeta) {
    if (!(zeta >= 1.0)) throw DomainError("sqrt(1 - 1/zeta) needs zeta >= 1");
    return std::sqrt(1.0 - 1.0 / zeta);
}

/// zeta after the small-energy time-step rescaling tau -> sqrt(2) tau:
/// the solution of sqrt(2) x = sin(sqrt(2) x zeta).
inline double rescaled_zeta(double x) {
    const double y = std::sqrt(2.0) * x;
    if (!(x > 0.0 && y <= 1.0)) throw DomainError("rescaled zeta needs 0 < sqrt(2) x <= 1, got x = " + std::to_string(x));
    return std::asin(y) / y;
}

struct SchwarzschildRow {
    double x;
    double zeta;
    double lhs;       ///< zeta tau / (hbar / (p' c)) = zeta p'
    double rhs;       ///< sqrt(1 - 1/zeta)
    double residual;  ///< |lhs - rhs|
};

/// Both sides of the time-dilation form of the zeta relation, with
/// p' = E' v at v = c / sqrt(3). The two agree up to the truncated terms
/// of the small-x expansion, so the residual vanishes as x^3.
inline std::vector<SchwarzschildRow> schwarzschild_compare(std::span<const double> xs) {
    std::vector<SchwarzschildRow> rows;
    rows.reserve(xs.size());
    for (double x : xs) {
        const double zeta = rescaled_zeta(x);
        const double momentum = x * medium_velocity;
        const double lhs = zeta * momentum;
        const double rhs = schwarzschild_rhs(zeta);
        rows.push_back({x, zeta, lhs, rhs, std::abs(lhs - rhs)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Convergence order fitting

struct OrderFit {
    double order;
    double fit_residual;  ///< RMS misfit of log(error) about the fitted line
};

/// Least-squares slope of log(error) against log(scale).
inline OrderFit fit_order(std::span<const double> errors, std::span<const double> scales) {
    if (errors.size() != scales.size()) throw DomainError("fit_order: errors and scales differ in length");
    if (errors.size() < 3) throw DomainError("fit_order needs at least 3 points");
    const std::size_t n = errors.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0) || !(scales[i] > 0.0)) throw DomainError("fit_order needs positive errors and scales");
        lx[i] = std::log(scales[i]);
        ly[i] = std::log(errors[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_order: all scales are equal");
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = ly[i] - (my + slope * (lx[i] - mx));
        ss += d * d;
    }
    return {slope, std::sqrt(ss / n)};
}

inline OrderFit fit_order(const std::vector<double>& errors, const std::vector<double>& scales) {
    return fit_order(std::span<const double>(errors), std::span<const double>(scales));
}

/// Dispersion samples of the transfer operator along one axis.
inline std::vector<DispersionPoint> dispersion_table(std::span<const double> k_values, const ModelParams& params) {
    std::vector<DispersionPoint> rows;
    rows.reserve(k_values.size());
    for (double k : k_values) rows.push_back(eigenphase(Vec3(0.0, 0.0, k), params));
    return rows;
}

// ---------------------------------------------------------------------------
// Zitterbewegung

/// Dominant angular frequency (radians per step) of a uniformly sampled
/// signal. The signal is detrended, Hann-windowed and zero-padded; the peak is
/// refined by a parabola through the log magnitudes of the three top bins.
/// Frequencies below two cycles per record are ignored.
inline double dominant_frequency(std::span<const double> signal, double min_amplitude = 1e-10) {
    const std::size_t n = signal.size();
    if (n < 64) throw DomainError("frequency analysis needs at least 64 samples");

    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += static_cast<double>(i);
        my += signal[i];
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (i - mt) * (i - mt);
        sty += (i - mt) * (signal[i] - my);
    }
    const double slope = sty / stt;

    std::size_t m = 1;
    while (m < 16 * n) m <<= 1;
    std::vector<cplx> buf(m, cplx(0.0));
    double window_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
        window_sum += w;
        buf[i] = w * (signal[i] - my - slope * (i - mt));
    }
    LatticeFft fft(LatticeSpec::make(1, static_cast<int>(m), 1), 1);
    fft.forward(buf);

    const std::size_t lo = std::max<std::size_t>(2, 2 * m / n);
    std::size_t peak = lo;
    for (std::size_t j = lo; j < m / 2; ++j)
        if (std::abs(buf[j]) > std::abs(buf[peak])) peak = j;
    const double amplitude = 2.0 * std::abs(buf[peak]) / window_sum;
    if (amplitude < min_amplitude) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "no significant oscillation peak (amplitude %.3g)", amplitude);
        throw DomainError(msg);
    }

    const double a = std::log(std::abs(buf[peak - 1]));
    const double b = std::log(std::abs(buf[peak]));
    const double c = std::log(std::abs(buf[peak + 1]));
    const double denom = a - 2.0 * b + c;
    const double delta = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
    return 2.0 * std::numbers::pi * (static_cast<double>(peak) + delta) / static_cast<double>(m);
}

/// Zitterbewegung frequency of <z>(step).
inline double zitterbewegung_frequency(const ObservableSeries& series) {
    const auto z = series.position_component(2);
    return dominant_frequency(z);
}

} // namespace dqlg
