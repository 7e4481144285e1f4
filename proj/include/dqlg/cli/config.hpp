#pragma once

// Run configuration: a flat JSON object, one typed value per key.
//
//   key                type                default
//   command            string              (required) oracle|modes|dilation|evolve|dispersion|generator
//   epsilon            number in [0,1]     0.5
//   dims               integer 1|3         1
//   L                  even integer > 0    64
//   T                  integer > 0         64
//   eA                 [number x4]         [0, 0, 0, 0]      uniform e*A^mu = (eA0, eAx, eAy, eAz)
//   potential_file     string              ""                per-site e*A^mu table (evolve only)
//   k0                 [number x3]         [0, 0, 0]
//   width              number > 0          8
//   center             [number x3]         [0, 0, 0]
//   branch             string              "positive-energy" | "unprojected"
//   spinor             [number x8]         [1,0, 0,0, 0,0, 0,0]  (re, im) per component
//   steps              integer >= 0        100
//   seed               integer >= 0        1
//   oracle_n           integer >= 1        6
//   convention         string              "closed" | "open"
//   xs                 [number in (0,1]]   []                empty: uniform grid of dilation_points
//   dilation_points    integer >= 1        100
//   schwarzschild_xs   [number]            [0.2, 0.1, 0.05, 0.025]
//   k_points           integer >= 4        64
//   k_max              number > 0          0.5
//   lattice_dispersion boolean             false

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dqlg/errors.hpp"
#include "dqlg/path_oracle.hpp"
#include "dqlg/wavepacket.hpp"

namespace dqlg::cli {

enum class Command { oracle, modes, dilation, evolve, dispersion, generator };

inline constexpr std::array<std::string_view, 6> command_names = {"oracle", "modes", "dilation",
                                                                  "evolve", "dispersion", "generator"};

inline std::string_view to_string(Command c) { return command_names[static_cast<std::size_t>(c)]; }

inline Command parse_command(std::string_view name) {
    for (std::size_t i = 0; i < command_names.size(); ++i)
        if (command_names[i] == name) return static_cast<Command>(i);
    throw ConfigError("command", "unknown command '" + std::string(name) +
                                     "', expected one of oracle|modes|dilation|evolve|dispersion|generator");
}

struct RunConfig {
    Command command = Command::dilation;
    double epsilon = 0.5;
    int dims = 1;
    int L = 64;
    int T = 64;
    std::array<double, 4> eA{0, 0, 0, 0};
    std::string potential_file;
    std::array<double, 3> k0{0, 0, 0};
    double width = 8.0;
    std::array<double, 3> center{0, 0, 0};
    Branch branch = Branch::positive_energy;
    std::array<double, 8> spinor{1, 0, 0, 0, 0, 0, 0, 0};
    int steps = 100;
    std::int64_t seed = 1;
    int oracle_n = 6;
    BendConvention convention = BendConvention::closed;
    std::vector<double> xs;
    int dilation_points = 100;
    std::vector<double> schwarzschild_xs{0.2, 0.1, 0.05, 0.025};
    int k_points = 64;
    double k_max = 0.5;
    bool lattice_dispersion = false;

    /// Set from the command line, not part of the document.
    std::string output_dir;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    LatticeSpec lattice() const { return LatticeSpec{dims, L, T}; }
    Spinor4 spinor_value() const {
        Spinor4 s;
        for (int c = 0; c < 4; ++c) s[c] = cplx(spinor[2 * c], spinor[2 * c + 1]);
        return s;
    }
};

namespace detail {

using nlohmann::json;

inline double get_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "expected a finite number");
    return d;
}

inline std::int64_t get_integer(const json& v, const std::string& key) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(key, "expected an integer");
}

inline int get_int(const json& v, const std::string& key) {
    const auto i = get_integer(v, key);
    if (i < INT32_MIN || i > INT32_MAX) throw ConfigError(key, "integer out of range");
    return static_cast<int>(i);
}

inline std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(get_number(e, key));
    return out;
}

template <std::size_t N>
std::array<double, N> get_fixed(const json& v, const std::string& key) {
    auto values = get_numbers(v, key);
    if (values.size() != N) throw ConfigError(key, "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out;
    std::copy(values.begin(), values.end(), out.begin());
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& domain) {
    if (!ok) throw ConfigError(key, "value outside domain " + domain);
}

} // namespace detail

/// Domain checks for every field, run before any computation.
inline void validate(const RunConfig& c) {
    using detail::require;
    require(c.epsilon >= 0.0 && c.epsilon <= 1.0, "epsilon", "[0,1]");
    require(c.dims == 1 || c.dims == 3, "dims", "{1,3}");
    require(c.L > 0 && c.L % 2 == 0, "L", "even integer > 0");
    require(c.T > 0, "T", "integer > 0");
    require(c.width > 0.0, "width", "(0,inf)");
    require(c.steps >= 0, "steps", "integer >= 0");
    require(c.seed >= 0, "seed", "integer >= 0");
    require(c.dilation_points >= 1, "dilation_points", "integer >= 1");
    require(c.k_points >= 4, "k_points", "integer >= 4");
    require(c.k_max > 0.0, "k_max", "(0,inf)");
    require(c.spinor != std::array<double, 8>{}, "spinor", "nonzero 4-spinor");
    if (c.dims == 1) require(c.k0[0] == 0.0 && c.k0[1] == 0.0, "k0", "(0, 0, kz) in 1D");
    const int bound = c.dims == 1 ? max_enum_steps_1d : max_enum_steps_3d;
    require(c.oracle_n >= 1 && c.oracle_n <= bound, "oracle_n", "[1," + std::to_string(bound) + "] for dims=" +
                                                                     std::to_string(c.dims));
    for (double x : c.xs) require(x > 0.0 && x <= 1.0, "xs", "(0,1]");
    for (double x : c.schwarzschild_xs)
        require(x > 0.0 && std::sqrt(2.0) * x <= 1.0, "schwarzschild_xs", "(0,1/sqrt(2)]");
    if (c.command == Command::generator && !c.lattice_dispersion)
        require(std::hypot(c.k_max, c.epsilon) <= 1.0, "k_max", "sqrt(k_max^2 + epsilon^2) <= 1 for generator");
    if (!c.potential_file.empty())
        require(c.command == Command::evolve, "potential_file", "only valid with command=evolve");
}

inline RunConfig parse_config(std::string_view text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "document must be a flat key-value object");

    RunConfig c;
    bool have_command = false;
    for (const auto& [key, v] : doc.items()) {
        if (key == "command") {
            c.command = parse_command(detail::get_string(v, key));
            have_command = true;
        } else if (key == "epsilon") c.epsilon = detail::get_number(v, key);
        else if (key == "dims") c.dims = detail::get_int(v, key);
        else if (key == "L") c.L = detail::get_int(v, key);
        else if (key == "T") c.T = detail::get_int(v, key);
        else if (key == "eA") c.eA = detail::get_fixed<4>(v, key);
        else if (key == "potential_file") c.potential_file = detail::get_string(v, key);
        else if (key == "k0") c.k0 = detail::get_fixed<3>(v, key);
        else if (key == "width") c.width = detail::get_number(v, key);
        else if (key == "center") c.center = detail::get_fixed<3>(v, key);
        else if (key == "branch") {
            const auto s = detail::get_string(v, key);
            if (s == "positive-energy") c.branch = Branch::positive_energy;
            else if (s == "unprojected") c.branch = Branch::unprojected;
            else throw ConfigError(key, "expected \"positive-energy\" or \"unprojected\"");
        } else if (key == "spinor") c.spinor = detail::get_fixed<8>(v, key);
        else if (key == "steps") c.steps = detail::get_int(v, key);
        else if (key == "seed") c.seed = detail::get_integer(v, key);
        else if (key == "oracle_n") c.oracle_n = detail::get_int(v, key);
        else if (key == "convention") {
            const auto s = detail::get_string(v, key);
            if (s == "closed") c.convention = BendConvention::closed;
            else if (s == "open") c.convention = BendConvention::open;
            else throw ConfigError(key, "expected \"closed\" or \"open\"");
        } else if (key == "xs") c.xs = detail::get_numbers(v, key);
        else if (key == "dilation_points") c.dilation_points = detail::get_int(v, key);
        else if (key == "schwarzschild_xs") c.schwarzschild_xs = detail::get_numbers(v, key);
        else if (key == "k_points") c.k_points = detail::get_int(v, key);
        else if (key == "k_max") c.k_max = detail::get_number(v, key);
        else if (key == "lattice_dispersion") {
            if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
            c.lattice_dispersion = v.get<bool>();
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (!have_command) throw ConfigError("command", "missing required key");
    validate(c);
    return c;
}

/// Canonical document for a config: every key, sorted, shortest round-trip numbers.
inline std::string serialize_config(const RunConfig& c) {
    using detail::json;
    json doc = json::object();
    doc["command"] = std::string(to_string(c.command));
    doc["epsilon"] = c.epsilon;
    doc["dims"] = c.dims;
    doc["L"] = c.L;
    doc["T"] = c.T;
    doc["eA"] = c.eA;
    doc["potential_file"] = c.potential_file;
    doc["k0"] = c.k0;
    doc["width"] = c.width;
    doc["center"] = c.center;
    doc["branch"] = c.branch == Branch::positive_energy ? "positive-energy" : "unprojected";
    doc["spinor"] = c.spinor;
    doc["steps"] = c.steps;
    doc["seed"] = c.seed;
    doc["oracle_n"] = c.oracle_n;
    doc["convention"] = c.convention == BendConvention::closed ? "closed" : "open";
    doc["xs"] = c.xs;
    doc["dilation_points"] = c.dilation_points;
    doc["schwarzschild_xs"] = c.schwarzschild_xs;
    doc["k_points"] = c.k_points;
    doc["k_max"] = c.k_max;
    doc["lattice_dispersion"] = c.lattice_dispersion;
    return doc.dump(2) + "\n";
}

} // namespace dqlg::cli
