#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dqlg/analysis.hpp"
#include "dqlg/cli/config.hpp"
#include "dqlg/cli/csv.hpp"
#include "dqlg/cli/manifest.hpp"
#include "dqlg/mode_evolution.hpp"
#include "dqlg/path_oracle.hpp"
#include "dqlg/wavepacket.hpp"

namespace dqlg::cli {

/// Per-site e*A^mu table: one row per site in lattice order, four numbers
/// (eA0, eAx, eAy, eAz) separated by commas or whitespace. Blank lines and
/// lines starting with '#' are skipped.
inline FourPotential read_potential_file(const std::filesystem::path& path, std::size_t sites) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open potential file " + path.string());
    std::vector<Vec4> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (auto& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream row(line);
        Vec4 v;
        for (int i = 0; i < 4; ++i)
            if (!(row >> v[i]))
                throw ConfigError("potential_file", "line " + std::to_string(lineno) + ": expected 4 numbers");
        std::string extra;
        if (row >> extra) throw ConfigError("potential_file", "line " + std::to_string(lineno) + ": trailing data");
        values.push_back(v);
    }
    if (values.size() != sites)
        throw ConfigError("potential_file", "has " + std::to_string(values.size()) + " rows, lattice has " +
                                                std::to_string(sites) + " sites");
    try {
        return FourPotential::per_site(std::move(values));
    } catch (const DomainError& e) {
        throw ConfigError("potential_file", e.what());
    }
}

namespace detail {

/// splitmix64; platform-independent stream for a given seed.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline FourPotential uniform_potential(const RunConfig& c) {
    return FourPotential::uniform(Vec4(c.eA[0], c.eA[1], c.eA[2], c.eA[3]));
}

/// Geometric sequence k_max, k_max/2, ... used for order fits.
inline std::vector<double> halving(double top, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(top / std::pow(2.0, i));
    return out;
}

inline void run_oracle(const RunConfig& c, OutputSet& out) {
    const auto params = ModelParams::make(c.epsilon);
    const bool three = c.dims == 3;
    CsvBuilder phi = three ? CsvBuilder{"N", "mx", "my", "mz", "R", "phi"} : CsvBuilder{"N", "dx", "R", "phi"};
    CsvBuilder kernel = three ? CsvBuilder{"N", "mx", "my", "mz", "epsilon", "re", "im"}
                              : CsvBuilder{"N", "dx", "epsilon", "re", "im"};
    CsvBuilder check{"N", "dx", "epsilon", "enum_re", "enum_im", "momentum_re", "momentum_im", "abs_diff"};
    bool have_check = false;
    for (int n = 1; n <= c.oracle_n; ++n) {
        for (const auto& table : phi_tables_all(c.dims, n, c.convention)) {
            const auto& d = table.displacement;
            for (int r = 0; r < static_cast<int>(table.counts.size()); ++r) {
                if (table.counts[r] == 0) continue;
                if (three)
                    phi.row(n, d[0], d[1], d[2], static_cast<double>(r) / table.scale, table.counts[r]);
                else
                    phi.row(n, d[2], r, table.counts[r]);
            }
            const cplx k = kernel_from_phi(table, params);
            if (three)
                kernel.row(n, d[0], d[1], d[2], c.epsilon, k.real(), k.imag());
            else
                kernel.row(n, d[2], c.epsilon, k.real(), k.imag());
            if (!three && c.convention == BendConvention::closed && c.L > 2 * n) {
                const cplx m = kernel_momentum(n, d[2], params, LatticeSpec{1, c.L, c.T});
                check.row(n, d[2], c.epsilon, k.real(), k.imag(), m.real(), m.imag(), std::abs(k - m));
                have_check = true;
            }
        }
    }
    out.add("phi.csv", phi.str());
    out.add("kernel.csv", kernel.str());
    if (have_check) out.add("kernel_check.csv", check.str());
}

inline void run_modes(const RunConfig& c, OutputSet& out) {
    const auto params = ModelParams::make(c.epsilon);
    const auto lattice = c.lattice();
    const auto potential = uniform_potential(c);
    const std::size_t modes = lattice.sites();
    struct Row {
        std::array<int, 3> n;
        double kmag, unit_u, unit_s, unit_c, factor, phi;
    };
    std::vector<Row> rows(modes);
    parallel_for(modes, [&](std::size_t m) {
        const Vec3 k = lattice.mode_wavevector(m);
        Vec3 n = k * (lattice.L / (2.0 * std::numbers::pi));
        const auto u = transfer_op(four(0.0, k), potential, params);
        const auto s = stream_op(u.mode);
        const auto col = collide_op(u.mode, params);
        rows[m] = {{static_cast<int>(std::lround(n.x())), static_cast<int>(std::lround(n.y())),
                    static_cast<int>(std::lround(n.z()))},
                   u.mode.norm(),
                   unitarity_defect(u.matrix),
                   unitarity_defect(s.matrix),
                   unitarity_defect(col.matrix),
                   max_abs(u.matrix - s.matrix * col.matrix),
                   eigenphase(u.mode, params).phi};
    });
    CsvBuilder csv{"nx", "ny", "nz", "k_mag", "unitarity_U", "unitarity_S", "unitarity_C", "factorization", "phi"};
    double worst = 0.0;
    for (const auto& r : rows) {
        csv.row(r.n[0], r.n[1], r.n[2], r.kmag, r.unit_u, r.unit_s, r.unit_c, r.factor, r.phi);
        worst = std::max({worst, r.unit_u, r.unit_s, r.unit_c});
    }
    out.add("modes.csv", csv.str());

    // Random spot checks of the factorization U = S C away from the grid.
    SplitMix rng(static_cast<std::uint64_t>(c.seed));
    CsvBuilder samples{"epsilon", "kx", "ky", "kz", "unitarity_U", "factorization"};
    for (int i = 0; i < 64; ++i) {
        const double eps = rng.uniform();
        Vec3 k(0.0, 0.0, 0.0);
        for (int a = 0; a < 3; ++a) k[a] = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
        if (c.dims == 1) k.head<2>().setZero();
        const auto p = ModelParams::make(eps);
        const auto u = transfer_op(k, p);
        samples.row(eps, k.x(), k.y(), k.z(), unitarity_defect(u.matrix),
                    max_abs(u.matrix - stream_op(k).matrix * collide_op(k, p).matrix));
    }
    out.add("factorization_samples.csv", samples.str());
    CsvBuilder summary{"label", "value"};
    summary.row(std::string_view("max_unitarity_defect"), worst);
    out.add("modes_summary.csv", summary.str());
}

inline void run_dilation(const RunConfig& c, OutputSet& out) {
    std::vector<double> xs = c.xs;
    if (xs.empty())
        for (int i = 1; i <= c.dilation_points; ++i) xs.push_back(static_cast<double>(i) / c.dilation_points);
    const auto curve = dilation_curve(xs);
    CsvBuilder dil{"x", "zeta", "r", "t_r"};
    for (const auto& r : curve.rows) dil.row(r.x, r.zeta, r.r, r.t_r);
    out.add("dilation.csv", dil.str());

    const auto rows = schwarzschild_compare(c.schwarzschild_xs);
    CsvBuilder sch{"x", "zeta", "lhs", "rhs", "residual"};
    std::vector<double> res, scale;
    for (const auto& r : rows) {
        sch.row(r.x, r.zeta, r.lhs, r.rhs, r.residual);
        res.push_back(r.residual);
        scale.push_back(r.x);
    }
    out.add("schwarzschild.csv", sch.str());
    if (rows.size() >= 3) {
        CsvBuilder fits{"label", "order", "fit_residual"};
        const auto fit = fit_order(res, scale);
        fits.row(std::string_view("schwarzschild_residual"), fit.order, fit.fit_residual);
        out.add("fits.csv", fits.str());
    }
}

inline void run_dispersion(const RunConfig& c, OutputSet& out) {
    const auto params = ModelParams::make(c.epsilon);
    std::vector<double> ks;
    for (int i = 1; i <= c.k_points; ++i) ks.push_back(c.k_max * i / c.k_points);
    CsvBuilder csv{"k_mag", "phi", "E_continuum", "rel_err"};
    for (const auto& p : dispersion_table(ks, params)) csv.row(p.k_mag, p.phi, p.E_continuum, p.relative_error());
    out.add("dispersion.csv", csv.str());

    const auto fit_ks = halving(c.k_max, 4);
    std::vector<double> errs;
    for (const auto& p : dispersion_table(fit_ks, params)) errs.push_back(p.relative_error());
    CsvBuilder fits{"label", "order", "fit_residual"};
    const auto fit = fit_order(errs, fit_ks);
    fits.row(std::string_view("dispersion_rel_err"), fit.order, fit.fit_residual);
    out.add("fits.csv", fits.str());
}

inline void run_generator(const RunConfig& c, OutputSet& out) {
    const auto params = ModelParams::make(c.epsilon);
    GeneratorOptions opts;
    opts.lattice_dispersion = c.lattice_dispersion;
    CsvBuilder csv{"k_mag", "epsilon", "residual"};
    for (int i = 0; i <= c.k_points; ++i) {
        const double k = c.k_max * i / c.k_points;
        csv.row(k, c.epsilon, generator_residual(Vec3(0.0, 0.0, k), params, opts));
    }
    out.add("generator.csv", csv.str());

    const auto fit_ks = halving(c.k_max, 4);
    std::vector<double> res;
    for (double k : fit_ks) res.push_back(generator_residual(Vec3(0.0, 0.0, k), params, opts));
    bool positive = true;
    for (double r : res) positive = positive && r > 0.0;
    if (positive) {
        CsvBuilder fits{"label", "order", "fit_residual"};
        const auto fit = fit_order(res, fit_ks);
        fits.row(std::string_view("generator_residual"), fit.order, fit.fit_residual);
        out.add("fits.csv", fits.str());
    }
}

inline void run_evolve(const RunConfig& c, OutputSet& out) {
    const auto params = ModelParams::make(c.epsilon);
    const auto lattice = c.lattice();
    FourPotential potential = c.potential_file.empty() ? uniform_potential(c)
                                                       : read_potential_file(c.potential_file, lattice.sites());
    GaussianPacket packet;
    packet.k0 = Vec3(c.k0[0], c.k0[1], c.k0[2]);
    packet.width = c.width;
    packet.center = Vec3(c.center[0], c.center[1], c.center[2]);
    packet.branch = c.branch;
    packet.spinor = c.spinor_value();
    const auto initial = init_gaussian(lattice, params, packet, potential);
    auto [final_field, series] = evolve(initial, params, potential, c.steps);

    CsvBuilder csv{"step", "norm", "x", "y", "z", "kx", "ky", "kz", "energy", "pop0", "pop1", "pop2", "pop3"};
    for (const auto& r : series.records)
        csv.row(r.step, r.norm, r.position.x(), r.position.y(), r.position.z(), r.momentum.x(), r.momentum.y(),
                r.momentum.z(), r.energy, r.populations[0], r.populations[1], r.populations[2], r.populations[3]);
    out.add("observables.csv", csv.str());

    std::ostringstream bin(std::ios::binary);
    write_snapshot(bin, final_field, c.epsilon);
    out.add("field_final.bin", bin.str());
}

} // namespace detail

/// Computes every output of a run in memory (the config echo first).
inline OutputSet build_outputs(const RunConfig& c) {
    validate(c);
    OutputSet out;
    out.add("config.json", serialize_config(c));
    switch (c.command) {
    case Command::oracle: detail::run_oracle(c, out); break;
    case Command::modes: detail::run_modes(c, out); break;
    case Command::dilation: detail::run_dilation(c, out); break;
    case Command::evolve: detail::run_evolve(c, out); break;
    case Command::dispersion: detail::run_dispersion(c, out); break;
    case Command::generator: detail::run_generator(c, out); break;
    }
    return out;
}

inline ErrorRecord classify_current_exception() {
    try {
        throw;
    } catch (const ConfigError& e) {
        return {ExitCode::config, "config", e.what()};
    } catch (const DomainError& e) {
        return {ExitCode::domain, "domain", e.what()};
    } catch (const IoError& e) {
        return {ExitCode::io, "io", e.what()};
    } catch (const std::exception& e) {
        return {ExitCode::domain, "numeric", e.what()};
    }
}

/// Runs an experiment and writes its outputs plus manifest.json into
/// c.output_dir. On failure only a manifest with status "failed" is written
/// and the error record is printed to `err` on one line.
inline int run(const RunConfig& c, std::ostream& err = std::cerr) {
    const std::filesystem::path dir = c.output_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(c.output_dir);
    ErrorRecord error;
    try {
        build_outputs(c).commit(dir, to_string(c.command));
        return 0;
    } catch (...) {
        error = classify_current_exception();
    }
    err << error.line() << '\n';
    try {
        OutputSet::commit_failure(dir, to_string(c.command), error);
    } catch (...) {
        // the error record on stderr is all that is left
    }
    return static_cast<int>(error.code);
}

} // namespace dqlg::cli
