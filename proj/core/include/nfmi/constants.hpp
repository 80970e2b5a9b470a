#pragma once

namespace nfmi {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kC0 = 299792458.0;          // vacuum light speed, m/s
inline constexpr double kMu0 = 1.25663706212e-6;    // vacuum permeability, H/m
inline constexpr double kEps0 = 8.8541878128e-12;   // vacuum permittivity, F/m
inline constexpr double kEta0 = 376.730313668;      // free-space impedance, Ohm

// Reference frequency for converting loss tangents to static conductivity.
inline constexpr double kLossTangentRefHz = 10.0e9;

} // namespace nfmi
