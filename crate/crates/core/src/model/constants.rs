//! Physical constants and unit conversions.

/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96485.0;

/// Universal gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314;

/// Reference temperature for the temperature-dependent parameter group, K (25 °C).
pub const DEFAULT_T_REF: f64 = 298.15;

/// Distance kept between surface concentrations and the ends of [0, 1].
pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

const ZERO_CELSIUS: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + ZERO_CELSIUS
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - ZERO_CELSIUS
}

pub fn amp_hours_to_coulombs(ah: f64) -> f64 {
    ah * 3600.0
}

/// `2RT/F`, the prefactor of the asinh overpotential.
pub fn thermal_voltage_2rt_f(temp_k: f64) -> f64 {
    2.0 * GAS_CONSTANT * temp_k / FARADAY
}
