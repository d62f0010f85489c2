#pragma once

#include <cmath>
#include <numbers>

// Unit conversions between the configuration boundary (GHz, GBaud, dBm,
// ps^2/km, 1/(W km), km, dB) and the SI quantities used by all internal math
// (Hz, baud, W, s^2/m, 1/(W m), m).

namespace nlikit::units {

inline constexpr double ghz_to_hz(double v) { return v * 1e9; }
inline constexpr double hz_to_ghz(double v) { return v * 1e-9; }
inline constexpr double thz_to_hz(double v) { return v * 1e12; }
inline constexpr double gbaud_to_baud(double v) { return v * 1e9; }
inline constexpr double km_to_m(double v) { return v * 1e3; }
inline constexpr double m_to_km(double v) { return v * 1e-3; }

inline constexpr double ps2_per_km_to_si(double v) { return v * 1e-27; }  // -> s^2/m
inline constexpr double si_to_ps2_per_km(double v) { return v * 1e27; }
inline constexpr double ps3_per_km_to_si(double v) { return v * 1e-39; }  // -> s^3/m
inline constexpr double per_w_km_to_si(double v) { return v * 1e-3; }     // -> 1/(W m)
inline constexpr double per_km_to_si(double v) { return v * 1e-3; }       // -> 1/m

inline double dbm_to_w(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double w_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

// Field attenuation coefficient (1/m) from power loss in dB/km, with the
// p(z) = exp(-2 alpha z) convention: 0.2 dB/km -> 20 dB over 100 km.
inline double loss_db_per_km_to_alpha(double db_per_km) {
    return db_per_km * std::numbers::ln10 / 20.0 * 1e-3;
}

// Triangular Raman gain slope, 1/(W km THz) -> 1/(W m Hz).
inline constexpr double raman_slope_to_si(double v) { return v * 1e-15; }

}  // namespace nlikit::units
