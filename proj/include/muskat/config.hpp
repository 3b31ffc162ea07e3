#pragma once

#include <muskat/csv.hpp>
#include <muskat/errors.hpp>
#include <muskat/grid.hpp>
#include <muskat/liapunov.hpp>
#include <muskat/stepper.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace muskat {

namespace ic {

struct Constant {
    double c_f = 0.0;
    double c_g = 0.0;
    friend bool operator==(const Constant&, const Constant&) = default;
};

/// height * cos^2(pi (x - center) / (2 width)) on |x - center| < width, zero elsewhere.
struct Bump {
    double center = 0.5;
    double width = 0.5;
    double height_f = 1.0;
    double height_g = 1.0;
    friend bool operator==(const Bump&, const Bump&) = default;
};

/// Piecewise constant with a single jump; x < jump_at takes the left values.
struct Step {
    double jump_at = 0.5;
    double left_f = 1.0;
    double right_f = 0.0;
    double left_g = 0.0;
    double right_g = 1.0;
    friend bool operator==(const Step&, const Step&) = default;
};

/// f and g as separate cos^2 bumps of a common width.
struct TwoBumps {
    double center_f = 0.3;
    double center_g = 0.7;
    double width = 0.25;
    double height_f = 1.0;
    double height_g = 1.0;
    friend bool operator==(const TwoBumps&, const TwoBumps&) = default;
};

/// Nodal values read from a CSV file (columns f,g or x,f,g).
struct File {
    std::string path;
    friend bool operator==(const File&, const File&) = default;
};

}  // namespace ic

using InitialConditionSpec = std::variant<ic::Constant, ic::Bump, ic::Step, ic::TwoBumps, ic::File>;

struct GridSpec {
    double a = 0.0;
    double b = 1.0;
    long m = 101;
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct RunConfig {
    GridSpec grid;
    PhysParams phys{1.0, 1.0};
    StepConfig step;
    double t_end = 1.0;
    int record_every = 1;
    std::vector<int> phi_orders{2, 3, 4, 5, 6, 7, 8};
    InitialConditionSpec ic = ic::Constant{1.0, 1.0};
    std::string output_dir = "output";
    int snapshots_every = 0;  // 0 disables snapshots

    Grid make_grid() const { return build_grid(grid.a, grid.b, grid.m); }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline double cos2_bump(double x, double center, double width, double height) {
    const double r = (x - center) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * r);
    return height * c * c;
}

}  // namespace detail

/// Nodal initial state by pointwise evaluation of a preset or a direct file read.
inline State build_initial_condition(const InitialConditionSpec& spec, const Grid& g) {
    const std::size_t m = g.size();
    State s{NodalField(m), NodalField(m)};
    auto fill = [&](auto&& ff, auto&& gg) {
        for (std::size_t i = 0; i < m; ++i) {
            const double x = g.node(i);
            s.f[i] = ff(x);
            s.g[i] = gg(x);
        }
    };
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ic::Constant>) {
                fill([&](double) { return p.c_f; }, [&](double) { return p.c_g; });
            } else if constexpr (std::is_same_v<T, ic::Bump>) {
                if (!(p.width > 0.0)) throw DataError("bump: width must be positive");
                fill([&](double x) { return detail::cos2_bump(x, p.center, p.width, p.height_f); },
                     [&](double x) { return detail::cos2_bump(x, p.center, p.width, p.height_g); });
            } else if constexpr (std::is_same_v<T, ic::Step>) {
                fill([&](double x) { return x < p.jump_at ? p.left_f : p.right_f; },
                     [&](double x) { return x < p.jump_at ? p.left_g : p.right_g; });
            } else if constexpr (std::is_same_v<T, ic::TwoBumps>) {
                if (!(p.width > 0.0)) throw DataError("two_bumps: width must be positive");
                fill([&](double x) { return detail::cos2_bump(x, p.center_f, p.width, p.height_f); },
                     [&](double x) { return detail::cos2_bump(x, p.center_g, p.width, p.height_g); });
            } else {
                s = read_state_file(p.path);
                if (s.size() != m) {
                    throw DataError("initial condition file '" + p.path + "' has " + std::to_string(s.size()) +
                                    " rows, grid has " + std::to_string(m) + " nodes");
                }
            }
        },
        spec);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(s.f[i] >= 0.0) || !(s.g[i] >= 0.0) || !std::isfinite(s.f[i]) || !std::isfinite(s.g[i])) {
            throw DataError("initial condition negative or non-finite at node " + std::to_string(i));
        }
    }
    return s;
}

}  // namespace muskat
