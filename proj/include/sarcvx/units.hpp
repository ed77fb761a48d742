#pragma once

namespace sarcvx {

// Dimensionless convention used throughout: one spatial unit is 0.3 m and one
// time unit is 1 ns, so the speed of light in vacuum is exactly 1.
struct UnitScaling {
    static constexpr double length_unit_m = 0.3;  // meters per dimensionless unit
    static constexpr double time_unit_ns = 1.0;   // nanoseconds per dimensionless unit
    static constexpr double c0_m_per_ns = 0.3;    // vacuum light speed
};

struct Dimensionless {
    double x;    // spatial coordinate, units of 0.3 m
    double tau;  // time coordinate, units of 1 ns
};

inline Dimensionless to_dimensionless(double x_meters, double t_ns) {
    return {x_meters / UnitScaling::length_unit_m, t_ns / UnitScaling::time_unit_ns};
}

inline double to_meters(double x) { return x * UnitScaling::length_unit_m; }
inline double to_nanoseconds(double tau) { return tau * UnitScaling::time_unit_ns; }

}  // namespace sarcvx
