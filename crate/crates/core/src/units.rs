//! Physical constants and the handful of unit conversions used everywhere.

pub const PLANCK_J_S: f64 = 6.626_070_15e-34;
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Floor used when a linear power density of zero has to be written in dB.
pub const PSD_FLOOR_DBM_PER_HZ: f64 = -200.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    if w > 0.0 {
        10.0 * w.log10() + 30.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Attenuation in dB/km to the field-power decay constant in 1/km.
pub fn alpha_db_to_per_km(alpha_db_per_km: f64) -> f64 {
    alpha_db_per_km * std::f64::consts::LN_10 / 10.0
}

/// Converts chromatic dispersion D (ps/nm/km) at `wavelength_m` into GVD beta2 (ps^2/km).
pub fn dispersion_to_beta2(d_ps_per_nm_km: f64, wavelength_m: f64) -> f64 {
    // D [s/m^2] = D[ps/nm/km] * 1e-12 / (1e-9 * 1e3) = D * 1e-6
    let d_si = d_ps_per_nm_km * 1e-6;
    let beta2_s2_per_m =
        -d_si * wavelength_m * wavelength_m / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_M_S);
    beta2_s2_per_m * 1e3 * 1e24
}

pub fn frequency_to_wavelength_m(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / f_hz
}

/// Formats `x` in plain decimal notation carrying at least `sig` significant digits.
pub fn decimal(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", sig.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
