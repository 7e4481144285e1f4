#pragma once

// Real-space 4-spinor evolution on a periodic lattice. A step transforms the
// field to momentum space, applies the transfer operator of every mode and
// transforms back, so the stream is exact per mode rather than a shift stencil.

#include <array>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "dqlg/fft.hpp"
#include "dqlg/mode_evolution.hpp"
#include "dqlg/parallel.hpp"

namespace dqlg {

inline constexpr int spinor_components = 4;

/// 4-component field, site-major with components interleaved.
class SpinorField {
public:
    SpinorField() = default;

    explicit SpinorField(const LatticeSpec& lattice)
        : lattice_(lattice), data_(lattice.sites() * spinor_components, cplx(0.0)) {}

    const LatticeSpec& lattice() const { return lattice_; }
    std::size_t sites() const { return lattice_.sites(); }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    Spinor4 at(std::size_t site) const { return Eigen::Map<const Spinor4>(data_.data() + site * spinor_components); }

    void set(std::size_t site, const Spinor4& value) {
        Eigen::Map<Spinor4>(data_.data() + site * spinor_components) = value;
    }

    double norm() const {
        std::vector<double> mags(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) mags[i] = std::norm(data_[i]);
        return pairwise_sum(mags);
    }

    void normalize() {
        const double n = norm();
        if (n == 0.0) throw DomainError("cannot normalize a zero field");
        const double s = 1.0 / std::sqrt(n);
        for (auto& v : data_) v *= s;
    }

private:
    LatticeSpec lattice_{};
    std::vector<cplx> data_;
};

// ---------------------------------------------------------------------------
// Initial conditions

enum class Branch { positive_energy, unprojected };

struct GaussianPacket {
    Vec3 k0 = Vec3::Zero();         ///< centre wavevector (1D: z component)
    double width = 8.0;             ///< real-space standard deviation of |psi|^2, in sites
    Branch branch = Branch::positive_energy;
    Spinor4 spinor = Spinor4::UnitX();  ///< reference spinor before projection
    Vec3 center = Vec3::Zero();     ///< real-space centre, in sites
};

using WarningSink = std::function<void(std::string_view)>;

inline void warn_to_stderr(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

/// Probability mass of the continuous momentum envelope lying outside the
/// Brillouin zone, per the Gaussian |psi(k)|^2 ~ exp(-2 w^2 dk^2).
inline double momentum_tail_mass(double width, int dims) {
    const double per_axis = std::erfc(std::numbers::pi * std::sqrt(2.0) * width);
    return 1.0 - std::pow(1.0 - per_axis, dims);
}

namespace detail {
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a < 0) a += two_pi;
    return a - std::numbers::pi;
}
} // namespace detail

/// Gaussian envelope in momentum space centred at k0, one spinor per mode.
/// The positive-energy branch projects each mode onto the e^{-i phi}
/// eigenspace of its transfer operator (the continuation of the +E' branch
/// of h_D), so the packet never mixes branches under evolution.
inline SpinorField init_gaussian(const LatticeSpec& lattice, const ModelParams& params, const GaussianPacket& packet,
                                 const FourPotential& potential = FourPotential::zero(),
                                 const WarningSink& warn = warn_to_stderr) {
    if (!(packet.width > 0.0)) throw DomainError("packet width must be positive");
    if (lattice.dims == 1 && (packet.k0.x() != 0.0 || packet.k0.y() != 0.0))
        throw DomainError("1D packets carry a z wavevector only");
    const double tail = momentum_tail_mass(packet.width, lattice.dims);
    if (tail > 1e-10 && warn)
        warn("momentum envelope aliases: tail mass " + std::to_string(tail) + " beyond the zone");

    const Vec3 ea = spatial(params.charge * potential.mean());
    SpinorField field(lattice);
    const double w2 = packet.width * packet.width;
    for (std::size_t mode = 0; mode < field.sites(); ++mode) {
        const Vec3 k = lattice.mode_wavevector(mode);
        double exponent = 0.0;
        double phase = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (lattice.dims == 1 && a < 2) continue;
            const double dk = detail::wrap_angle(k[a] - packet.k0[a]);
            exponent += dk * dk * w2;
            phase += k[a] * packet.center[a];
        }
        Spinor4 chi = packet.spinor;
        if (packet.branch == Branch::positive_energy) chi = positive_branch_projector(k - ea, params) * chi;
        field.set(mode, std::exp(-exponent) * std::exp(-I * phase) * chi);
    }
    LatticeFft fft(lattice, spinor_components);
    fft.backward(field.data());
    field.normalize();
    return field;
}

// ---------------------------------------------------------------------------
// Observables

struct ObservableRecord {
    int step = 0;
    double norm = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 momentum = Vec3::Zero();
    double energy = 0.0;
    std::array<double, 4> populations{};
};

struct ObservableSeries {
    std::vector<ObservableRecord> records;

    std::vector<double> position_component(int axis) const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.position[axis]);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Evolution

/// Per-lattice evolution engine: FFT plans plus cached per-mode operators.
/// A uniform potential shifts every mode by eA and multiplies by e^{i eA_0}.
/// A varying potential is split: the local phase e^{i eA_0(x)} in real space,
/// then the spectral step at the mean eA (first-order splitting).
class Evolver {
public:
    Evolver(const LatticeSpec& lattice, const ModelParams& params, FourPotential potential = FourPotential::zero())
        : lattice_(lattice), params_(params), potential_(std::move(potential)), fft_(lattice, spinor_components) {
        if (!potential_.is_uniform() && potential_.sites() != lattice_.sites())
            throw DomainError("per-site potential has " + std::to_string(potential_.sites()) + " sites, lattice has " +
                              std::to_string(lattice_.sites()));
        const Vec4 mean = params_.charge * potential_.mean();
        shift_ = spatial(mean);
        const std::size_t modes = lattice_.sites();
        transfer_.resize(modes);
        hamiltonian_.resize(modes);
        parallel_for(modes, [&](std::size_t m) {
            const Vec3 kprime = lattice_.mode_wavevector(m) - shift_;
            transfer_[m] = transfer_op(kprime, params_).matrix;
            hamiltonian_[m] = dirac_hamiltonian(kprime, params_).matrix;
        });
        if (!potential_.is_uniform()) {
            site_phase_.resize(modes);
            for (std::size_t s = 0; s < modes; ++s)
                site_phase_[s] = std::exp(I * (params_.charge * potential_.at(s)[0]));
        } else {
            global_phase_ = std::exp(I * mean[0]);
        }
    }

    const LatticeSpec& lattice() const { return lattice_; }
    const ModelParams& params() const { return params_; }

    void step(SpinorField& field) const {
        check(field);
        auto& data = field.data();
        if (!site_phase_.empty()) {
            for (std::size_t s = 0; s < site_phase_.size(); ++s)
                for (int c = 0; c < spinor_components; ++c) data[s * spinor_components + c] *= site_phase_[s];
        }
        fft_.forward(data);
        parallel_for(lattice_.sites(), [&](std::size_t m) {
            Eigen::Map<Spinor4> v(data.data() + m * spinor_components);
            v = (transfer_[m] * v).eval();
        });
        fft_.backward(data);
        if (site_phase_.empty() && global_phase_ != cplx(1.0))
            for (auto& v : data) v *= global_phase_;
    }

    /// Observables of `field`. `previous` seeds position unwrapping across
    /// the periodic seam; without it the circular mean is used.
    ObservableRecord observe(const SpinorField& field, int step_index, const ObservableRecord* previous = nullptr) const {
        check(field);
        ObservableRecord rec;
        rec.step = step_index;
        const std::size_t sites = field.sites();
        const auto& data = field.data();

        std::vector<double> density(sites);
        for (std::size_t s = 0; s < sites; ++s) density[s] = field.at(s).squaredNorm();
        rec.norm = pairwise_sum(density);
        for (int c = 0; c < spinor_components; ++c) {
            std::vector<double> pop(sites);
            for (std::size_t s = 0; s < sites; ++s) pop[s] = std::norm(data[s * spinor_components + c]);
            rec.populations[c] = pairwise_sum(pop);
        }

        const double L = lattice_.L;
        for (int a = 0; a < 3; ++a) {
            if (lattice_.dims == 1 && a < 2) continue;
            double center;
            if (previous != nullptr) {
                center = previous->position[a];
            } else {
                cplx acc = 0.0;
                for (std::size_t s = 0; s < sites; ++s)
                    acc += density[s] * std::exp(I * (2.0 * std::numbers::pi * lattice_.site_coords(s)[a] / L));
                center = std::arg(acc) * L / (2.0 * std::numbers::pi);
            }
            std::vector<double> moment(sites);
            for (std::size_t s = 0; s < sites; ++s) {
                double d = lattice_.site_coords(s)[a] - center;
                d -= L * std::floor(d / L + 0.5);
                moment[s] = density[s] * d;
            }
            rec.position[a] = center + pairwise_sum(moment) / rec.norm;
        }

        std::vector<cplx> hat = data;
        fft_.forward(hat);
        std::vector<double> weight(sites), kx(sites), ky(sites), kz(sites), energy(sites);
        for (std::size_t m = 0; m < sites; ++m) {
            Eigen::Map<const Spinor4> v(hat.data() + m * spinor_components);
            weight[m] = v.squaredNorm();
            const Vec3 k = lattice_.mode_wavevector(m);
            kx[m] = weight[m] * k.x();
            ky[m] = weight[m] * k.y();
            kz[m] = weight[m] * k.z();
            energy[m] = (v.adjoint() * hamiltonian_[m] * v).real()(0, 0);
        }
        const double total = pairwise_sum(weight);
        rec.momentum = Vec3(pairwise_sum(kx), pairwise_sum(ky), pairwise_sum(kz)) / total;
        rec.energy = pairwise_sum(energy) / total;
        return rec;
    }

private:
    void check(const SpinorField& field) const {
        if (!(field.lattice() == lattice_)) throw DomainError("field lattice does not match the evolver");
    }

    LatticeSpec lattice_;
    ModelParams params_;
    FourPotential potential_;
    LatticeFft fft_;
    Vec3 shift_ = Vec3::Zero();
    std::vector<Mat4> transfer_;
    std::vector<Mat4> hamiltonian_;
    std::vector<cplx> site_phase_;
    cplx global_phase_ = 1.0;
};

/// One transfer step.
inline SpinorField step(const SpinorField& field, const ModelParams& params,
                        const FourPotential& potential = FourPotential::zero()) {
    Evolver evolver(field.lattice(), params, potential);
    SpinorField out = field;
    evolver.step(out);
    return out;
}

/// Applies `steps` transfer steps, recording observables before the first
/// step and after each one.
inline std::pair<SpinorField, ObservableSeries> evolve(const SpinorField& field, const ModelParams& params,
                                                       const FourPotential& potential, int steps) {
    if (steps < 0) throw DomainError("steps must be >= 0");
    Evolver evolver(field.lattice(), params, potential);
    SpinorField state = field;
    ObservableSeries series;
    series.records.reserve(static_cast<std::size_t>(steps) + 1);
    series.records.push_back(evolver.observe(state, 0));
    for (int n = 1; n <= steps; ++n) {
        evolver.step(state);
        series.records.push_back(evolver.observe(state, n, &series.records.back()));
    }
    return {std::move(state), std::move(series)};
}

// ---------------------------------------------------------------------------
// Field snapshots: 32-byte little-endian header then (re, im) float64 pairs,
// site-major then spinor component.
//
//   offset 0  char[4] "DQLG"
//   offset 4  u32 version (1)
//   offset 8  u32 spatial dims
//   offset 12 u32 L
//   offset 16 u32 T
//   offset 20 u32 reserved (0)
//   offset 24 f64 epsilon

inline constexpr std::uint32_t snapshot_version = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw IoError("truncated snapshot");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace detail

inline void write_snapshot(std::ostream& out, const SpinorField& field, double epsilon) {
    out.write("DQLG", 4);
    detail::put_le<std::uint32_t>(out, snapshot_version);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.lattice().dims));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.lattice().L));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.lattice().T));
    detail::put_le<std::uint32_t>(out, 0);
    detail::put_le<double>(out, epsilon);
    for (const auto& v : field.data()) {
        detail::put_le<double>(out, v.real());
        detail::put_le<double>(out, v.imag());
    }
    if (!out) throw IoError("failed to write snapshot");
}

struct Snapshot {
    SpinorField field;
    double epsilon = 0.0;
};

inline Snapshot read_snapshot(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::string_view(magic, 4) != "DQLG") throw IoError("not a DQLG snapshot");
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != snapshot_version) throw IoError("unsupported snapshot version " + std::to_string(version));
    const auto dims = detail::get_le<std::uint32_t>(in);
    const auto L = detail::get_le<std::uint32_t>(in);
    const auto T = detail::get_le<std::uint32_t>(in);
    detail::get_le<std::uint32_t>(in);
    Snapshot snap;
    snap.epsilon = detail::get_le<double>(in);
    snap.field = SpinorField(LatticeSpec::make(static_cast<int>(dims), static_cast<int>(L), static_cast<int>(T)));
    for (auto& v : snap.field.data()) {
        const double re = detail::get_le<double>(in);
        const double im = detail::get_le<double>(in);
        v = cplx(re, im);
    }
    return snap;
}

} // namespace dqlg
