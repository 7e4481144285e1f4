#pragma once

// Exhaustive evaluation of the lattice path sum. Every path from a to b with
// N forward time steps is a closed spin chain (s_N == s_0); a bend between
// consecutive steps carries weight -i epsilon, an unbend sqrt(1 - epsilon^2).
//
// In 3D the spatial directions are the eight bcc diagonals, for which
// (1/2) s_w . s_{w+1} = (number of flipped axes) / 3. Bend counts are therefore
// kept as integers scaled by Spin4::scale() and turned into weights with the
// principal cube roots of the two step weights.

#include <array>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "dqlg/core_model.hpp"
#include "dqlg/parallel.hpp"

namespace dqlg {

enum class BendConvention { closed, open };

inline constexpr int max_enum_steps_1d = 20;
inline constexpr int max_enum_steps_3d = 6;

/// R and Rbar = N - R, both multiplied by `scale` (1 in 1D, 3 in 3D).
struct BendCount {
    int R = 0;
    int Rbar = 0;
    int scale = 1;

    double bends() const { return static_cast<double>(R) / scale; }
    double unbends() const { return static_cast<double>(Rbar) / scale; }

    friend bool operator==(const BendCount&, const BendCount&) = default;
};

/// R = 1/2 sum_w s_w^mu s_{mu,w+1}. The closed convention includes the wrap
/// pair (s_{N-1}, s_0); the open convention skips it and counts it as unbent.
inline BendCount bend_count(const SpinChain& chain, BendConvention convention) {
    const std::size_t n = chain.size();
    if (n == 0) throw DomainError("bend_count of an empty chain");
    const int scale = chain.steps.front().scale();
    const std::size_t pairs = convention == BendConvention::closed ? n : n - 1;
    int twice = 0;  // scale * sum of contractions
    for (std::size_t w = 0; w < pairs; ++w) twice += scaled_contraction(chain.steps[w], chain.at_closed(w + 1));
    if (twice % 2 != 0) throw DomainError("odd contraction sum; chain is not forward-moving");
    BendCount out;
    out.scale = scale;
    out.R = twice / 2;
    out.Rbar = static_cast<int>(n) * scale - out.R;
    return out;
}

/// Corners counted geometrically: every axis whose sign flips between
/// consecutive steps. In 1D this is the number of unequal adjacent pairs; in
/// 3D the count is in the same scaled units as BendCount::R.
inline int geometric_corner_count(const SpinChain& chain, BendConvention convention) {
    const std::size_t n = chain.size();
    const std::size_t pairs = convention == BendConvention::closed ? n : n - 1;
    int corners = 0;
    for (std::size_t w = 0; w < pairs; ++w) {
        const Spin4& a = chain.steps[w];
        const Spin4& b = chain.at_closed(w + 1);
        for (int axis = 0; axis < 3; ++axis)
            if (a.sign[axis] != b.sign[axis]) ++corners;
    }
    return corners;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace detail {

inline void check_enum_bound(int dims, int steps) {
    if (steps < 1) throw DomainError("path length N must be >= 1");
    const int bound = dims == 1 ? max_enum_steps_1d : max_enum_steps_3d;
    if (steps > bound)
        throw EnumerationBoundError("enumeration of N=" + std::to_string(steps) + " exceeds the " +
                                    std::to_string(dims) + "D bound N <= " + std::to_string(bound));
}

inline std::uint64_t chain_space(int dims, int steps) {
    return std::uint64_t{1} << (dims == 1 ? steps : 3 * steps);
}

/// Chain for an enumeration code: bit w (1D) or bits 3w..3w+2 (3D) give the
/// spatial signs of step w, set bit = +1. s0 = +1 throughout.
inline SpinChain decode_chain(int dims, int steps, std::uint64_t code) {
    SpinChain chain;
    chain.steps.reserve(static_cast<std::size_t>(steps));
    for (int w = 0; w < steps; ++w) {
        if (dims == 1) {
            chain.steps.push_back(Spin4::make_1d(1, (code >> w) & 1 ? 1 : -1));
        } else {
            auto sgn = [&](int axis) { return (code >> (3 * w + axis)) & 1 ? 1 : -1; };
            chain.steps.push_back(Spin4::make_3d(1, sgn(0), sgn(1), sgn(2)));
        }
    }
    return chain;
}

inline bool has_displacement(const SpinChain& chain, const std::array<int, 3>& displacement) {
    auto m = chain.magnetization();
    return m[1] == displacement[0] && m[2] == displacement[1] && m[3] == displacement[2];
}

/// Integer power with 0^0 == 1.
inline cplx ipow(cplx base, int exponent) {
    cplx result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

inline std::array<int, 3> as_1d(int dx) { return {0, 0, dx}; }

} // namespace detail

/// All forward (s0 = +1) chains of N steps whose spatial steps sum to the
/// displacement (in 1D only the z entry is used).
struct PathEnsemble {
    int dims = 1;
    int N = 0;
    std::array<int, 3> displacement{0, 0, 0};
    std::vector<SpinChain> chains;
};

inline PathEnsemble path_ensemble(int dims, int steps, const std::array<int, 3>& displacement) {
    detail::check_enum_bound(dims, steps);
    PathEnsemble ensemble{dims, steps, displacement, {}};
    const std::uint64_t total = detail::chain_space(dims, steps);
    for (std::uint64_t code = 0; code < total; ++code) {
        SpinChain chain = detail::decode_chain(dims, steps, code);
        if (detail::has_displacement(chain, displacement)) ensemble.chains.push_back(std::move(chain));
    }
    return ensemble;
}

inline PathEnsemble path_ensemble_1d(int steps, int dx) { return path_ensemble(1, steps, detail::as_1d(dx)); }

/// Phi(R): number of chains in the ensemble with each scaled bend count.
struct PhiTable {
    int dims = 1;
    int N = 0;
    std::array<int, 3> displacement{0, 0, 0};
    int scale = 1;
    std::vector<std::int64_t> counts;  ///< indexed by scaled R, size scale*N + 1

    std::int64_t at(int scaled_R) const {
        return scaled_R < 0 || scaled_R >= static_cast<int>(counts.size()) ? 0 : counts[scaled_R];
    }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

inline PhiTable phi_table(int dims, int steps, const std::array<int, 3>& displacement, BendConvention convention) {
    PathEnsemble ensemble = path_ensemble(dims, steps, displacement);
    PhiTable table;
    table.dims = dims;
    table.N = steps;
    table.displacement = displacement;
    table.scale = dims == 1 ? 1 : 3;
    table.counts.assign(static_cast<std::size_t>(table.scale * steps + 1), 0);
    for (const auto& chain : ensemble.chains) ++table.counts[bend_count(chain, convention).R];
    return table;
}

/// Phi tables for every reachable displacement of length-N chains, from a
/// single enumeration pass. Ordered by displacement (x, y, z) ascending.
inline std::vector<PhiTable> phi_tables_all(int dims, int steps, BendConvention convention) {
    detail::check_enum_bound(dims, steps);
    const int scale = dims == 1 ? 1 : 3;
    const int span = 2 * steps + 1;  // displacement index range per axis
    const int axes = dims == 1 ? 1 : 3;
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(dims == 1 ? span : span * span * span));
    const std::uint64_t total = detail::chain_space(dims, steps);
    for (std::uint64_t code = 0; code < total; ++code) {
        SpinChain chain = detail::decode_chain(dims, steps, code);
        auto m = chain.magnetization();
        std::size_t slot = 0;
        for (int a = 3 - axes; a < 3; ++a) slot = slot * span + static_cast<std::size_t>(m[a + 1] + steps);
        auto& c = counts[slot];
        if (c.empty()) c.assign(static_cast<std::size_t>(scale * steps + 1), 0);
        ++c[bend_count(chain, convention).R];
    }
    std::vector<PhiTable> tables;
    for (std::size_t slot = 0; slot < counts.size(); ++slot) {
        if (counts[slot].empty()) continue;
        PhiTable t;
        t.dims = dims;
        t.N = steps;
        t.scale = scale;
        std::size_t rest = slot;
        for (int a = 2; a >= 3 - axes; --a) {
            t.displacement[a] = static_cast<int>(rest % span) - steps;
            rest /= span;
        }
        t.counts = std::move(counts[slot]);
        tables.push_back(std::move(t));
    }
    return tables;
}

/// sum_R Phi(R) w(R), summed in ascending R.
inline cplx kernel_from_phi(const PhiTable& table, const ModelParams& params);

inline PhiTable phi_table_1d(int steps, int dx, BendConvention convention) {
    return phi_table(1, steps, detail::as_1d(dx), convention);
}

inline std::int64_t phi_count(int steps, int dx, int R, BendConvention convention) {
    return phi_table_1d(steps, dx, convention).at(R);
}

/// (sqrt(1 - eps^2))^Rbar (-i eps)^R, with 0^0 = 1.
inline cplx path_weight(const BendCount& bends, const ModelParams& params) {
    if (bends.scale == 1)
        return detail::ipow(params.unbend_weight(), bends.Rbar) * detail::ipow(params.bend_weight(), bends.R);
    const double third = 1.0 / bends.scale;
    const cplx unbend_root = std::pow(params.unbend_weight(), third);
    const cplx bend_root = params.epsilon == 0.0 ? cplx(0.0) : std::exp(std::log(params.bend_weight()) * third);
    return detail::ipow(unbend_root, bends.Rbar) * detail::ipow(bend_root, bends.R);
}

inline cplx kernel_from_phi(const PhiTable& table, const ModelParams& params) {
    cplx acc = 0.0;
    for (int r = 0; r < static_cast<int>(table.counts.size()); ++r) {
        if (table.counts[r] == 0) continue;
        BendCount b{r, table.scale * table.N - r, table.scale};
        acc += static_cast<double>(table.counts[r]) * path_weight(b, params);
    }
    return acc;
}

/// Same weight assembled from the couplings g, g':
/// exp(sum_w [-g s_w.s_{w+1} - g' (2 - s_w.s_{w+1})]). Needs 0 < epsilon < 1.
inline cplx weight_from_couplings(const SpinChain& chain, const ModelParams& params, BendConvention convention) {
    if (!params.g || !params.gprime) throw DomainError("coupling reconstruction needs 0 < epsilon < 1");
    const std::size_t n = chain.size();
    cplx exponent = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
        double c = 0.0;  // open convention: the wrap pair counts as unbent
        if (convention == BendConvention::closed || w + 1 < n)
            c = static_cast<double>(scaled_contraction(chain.steps[w], chain.at_closed(w + 1))) /
                chain.steps[w].scale();
        exponent += -*params.g * c - *params.gprime * (2.0 - c);
    }
    return std::exp(exponent);
}

/// K = sum over paths of (sqrt(1 - eps^2))^Rbar (-i eps)^R by exhaustive enumeration.
inline cplx kernel_enum(int dims, int steps, const std::array<int, 3>& displacement, const ModelParams& params,
                        BendConvention convention = BendConvention::closed) {
    detail::check_enum_bound(dims, steps);
    const std::uint64_t total = detail::chain_space(dims, steps);
    std::vector<cplx> weights(static_cast<std::size_t>(total), cplx(0.0));
    parallel_for(weights.size(), [&](std::size_t code) {
        SpinChain chain = detail::decode_chain(dims, steps, code);
        if (detail::has_displacement(chain, displacement))
            weights[code] = path_weight(bend_count(chain, convention), params);
    });
    return pairwise_sum(weights);
}

inline cplx kernel_enum_1d(int steps, int dx, const ModelParams& params,
                           BendConvention convention = BendConvention::closed) {
    return kernel_enum(1, steps, detail::as_1d(dx), params, convention);
}

// ---------------------------------------------------------------------------
// Momentum-space transfer form

/// 2x2 spatial transfer matrix sqrt(1 - eps^2) exp(i sigma_z k) - i eps sigma_x.
/// Unbent steps advance the phase by s k; bent steps carry no phase, which is
/// the symmetric split (s_w + s_{w+1})/2 of the closed-chain magnetization.
inline Mat2 spatial_transfer_1d(double k, const ModelParams& params) {
    Mat2 u;
    const double a = params.unbend_weight();
    const cplx b = params.bend_weight();
    u << a * std::exp(I * k), b, b, a * std::exp(-I * k);
    return u;
}

/// (1/L) sum_k exp(-i dx k) Tr[U(k)^N]. The trace sums both closed-chain
/// endpoint spins, which is what the enumeration counts. The global energy
/// phase of the full transfer operator is not included.
inline cplx kernel_momentum(int steps, int dx, const ModelParams& params, const LatticeSpec& lattice) {
    if (lattice.dims != 1) throw DomainError("kernel_momentum is defined for the 1D lattice");
    if (steps < 1) throw DomainError("path length N must be >= 1");
    if (lattice.L <= 2 * steps)
        throw DomainError("kernel_momentum needs L > 2N so periodic images are unreachable");
    const int L = lattice.L;
    std::vector<cplx> terms(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        const int n = j - L / 2;
        const double k = lattice.wavenumber(n);
        const Mat2 u = spatial_transfer_1d(k, params);
        Mat2 power = Mat2::Identity();
        for (int w = 0; w < steps; ++w) power = power * u;
        terms[static_cast<std::size_t>(j)] = std::exp(-I * (static_cast<double>(dx) * k)) * power.trace();
    }
    return pairwise_sum(terms) / static_cast<double>(L);
}

/// 3D analogue over the bcc lattice: the 8x8 step operator is the tensor
/// product of one 2x2 factor per axis, built from the cube-root weights.
inline cplx kernel_momentum_3d(int steps, const std::array<int, 3>& displacement, const ModelParams& params,
                               const LatticeSpec& lattice) {
    using Mat8 = Eigen::Matrix<cplx, 8, 8>;
    if (lattice.dims != 3) throw DomainError("kernel_momentum_3d needs a 3D lattice");
    if (steps < 1) throw DomainError("path length N must be >= 1");
    if (lattice.L <= 2 * steps)
        throw DomainError("kernel_momentum_3d needs L > 2N so periodic images are unreachable");
    const double third = 1.0 / 3.0;
    const cplx a = std::pow(params.unbend_weight(), third);
    const cplx b = params.epsilon == 0.0 ? cplx(0.0) : std::exp(std::log(params.bend_weight()) * third);
    auto axis_factor = [&](double k) {
        Mat2 m;
        m << a * std::exp(I * k), b, b, a * std::exp(-I * k);
        return m;
    };
    const int L = lattice.L;
    const std::size_t modes = lattice.sites();
    std::vector<cplx> terms(modes);
    parallel_for(modes, [&](std::size_t flat) {
        const int jx = static_cast<int>(flat / (L * L)), jy = static_cast<int>((flat / L) % L),
                  jz = static_cast<int>(flat % L);
        const Vec3 k(lattice.wavenumber(jx - L / 2), lattice.wavenumber(jy - L / 2), lattice.wavenumber(jz - L / 2));
        const Mat2 mx = axis_factor(k.x()), my = axis_factor(k.y()), mz = axis_factor(k.z());
        Mat8 step;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                step(i, j) = mx(i >> 2, j >> 2) * my((i >> 1) & 1, (j >> 1) & 1) * mz(i & 1, j & 1);
        Mat8 power = Mat8::Identity();
        for (int w = 0; w < steps; ++w) power = power * step;
        const double phase = displacement[0] * k.x() + displacement[1] * k.y() + displacement[2] * k.z();
        terms[flat] = std::exp(-I * phase) * power.trace();
    });
    return pairwise_sum(terms) / static_cast<double>(modes);
}

} // namespace dqlg
