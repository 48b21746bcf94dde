//! Lumped antenna resonance model and spiral geometry.
//!
//! The substrate permittivity enters through the loaded capacitance, so
//! X(ε) = 1/(2πf)² is linear in ε. Calibrating the line through two
//! (ε, f) anchors reproduces both exactly and interpolates smoothly in
//! between. S11 is modelled as a series resonator matched to the feed at
//! resonance, with the loaded Q setting the −10 dB bandwidth.

use crate::error::Error;
use crate::relax::CurveRow;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// f = 1/(2π√(LC)).
pub fn resonant_frequency(inductance: f64, capacitance: f64) -> Result<f64, Error> {
    if inductance <= 0.0 || capacitance <= 0.0 {
        return Err(Error::Domain(format!(
            "resonant_frequency needs positive L and C, got L = {inductance}, C = {capacitance}"
        )));
    }
    Ok(1.0 / (2.0 * PI * (inductance * capacitance).sqrt()))
}

/// Loaded Q giving a 17 MHz −10 dB bandwidth at ε = 20 with the default
/// calibration anchors.
pub const DEFAULT_Q_FACTOR: f64 = 145.8;
/// Matching capacitor of the reference design (F).
pub const DEFAULT_C_P: f64 = 0.8e-12;
/// Feed impedance (Ω).
pub const DEFAULT_Z0: f64 = 50.0;

/// Calibrated map from substrate permittivity to resonant frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningModel {
    /// Intercept of X(ε) = 1/(2πf)², in s².
    pub x_a: f64,
    /// Slope of X(ε), in s² per unit ε.
    pub x_b: f64,
    pub q_factor: f64,
    pub c_p: f64,
    pub z0: f64,
}

impl TuningModel {
    /// Resonant frequency at a given substrate permittivity; strictly
    /// decreasing in ε.
    pub fn frequency_from_eps(&self, eps: f64) -> f64 {
        1.0 / (2.0 * PI * (self.x_a + self.x_b * eps).sqrt())
    }

    /// Permittivity at which the model resonates at `f` (inverse map).
    pub fn eps_from_frequency(&self, f: f64) -> f64 {
        let x = 1.0 / (2.0 * PI * f).powi(2);
        (x - self.x_a) / self.x_b
    }

    /// Equivalent series inductance at a given ε, via X(ε) = L_s C_p.
    pub fn series_inductance(&self, eps: f64) -> f64 {
        (self.x_a + self.x_b * eps) / self.c_p
    }
}

/// Solves X(ε) = x_a + x_b ε through the two anchors exactly.
///
/// Requires eps_low < eps_high and f_low > f_high (frequency falls with
/// permittivity) and a positive intercept.
pub fn calibrate(
    eps_low: f64,
    f_low: f64,
    eps_high: f64,
    f_high: f64,
) -> Result<TuningModel, Error> {
    if !(eps_low < eps_high) || !(f_low > f_high) || f_high <= 0.0 {
        return Err(Error::Calibration(format!(
            "anchors must satisfy eps_low < eps_high and f_low > f_high > 0, got \
             ({eps_low}, {f_low}) and ({eps_high}, {f_high})"
        )));
    }
    let x = |f: f64| 1.0 / (2.0 * PI * f).powi(2);
    let x_lo = x(f_low);
    let x_hi = x(f_high);
    let x_b = (x_hi - x_lo) / (eps_high - eps_low);
    let x_a = x_lo - x_b * eps_low;
    if x_a <= 0.0 || x_b <= 0.0 {
        return Err(Error::Calibration(format!(
            "anchors give a non-physical model (x_a = {x_a:.3e}, x_b = {x_b:.3e})"
        )));
    }
    Ok(TuningModel {
        x_a,
        x_b,
        q_factor: DEFAULT_Q_FACTOR,
        c_p: DEFAULT_C_P,
        z0: DEFAULT_Z0,
    })
}

/// S11 (dB) of the matched series resonator over a frequency grid.
///
/// Z(f) = Z₀ + j Q Z₀ (f/f₀ − f₀/f); the reflection magnitude is
/// |Γ| = |u|/√(4 + u²) with u = Q (f/f₀ − f₀/f). Values are floored at
/// −200 dB (Γ = 0 exactly at resonance).
pub fn s11_curve(model: &TuningModel, eps: f64, freqs: &[f64]) -> Vec<(f64, f64)> {
    let f0 = model.frequency_from_eps(eps);
    freqs
        .iter()
        .map(|&f| {
            let u = model.q_factor * (f / f0 - f0 / f);
            let gamma2 = u * u / (4.0 + u * u);
            let db = 10.0 * gamma2.log10();
            (f, db.max(-200.0))
        })
        .collect()
}

/// Width of the contiguous interval around the curve minimum where
/// S11 ≤ −10 dB, linearly interpolated at the crossings.
pub fn bandwidth_minus10db(curve: &[(f64, f64)]) -> Result<f64, Error> {
    const LEVEL: f64 = -10.0;
    if curve.len() < 3 {
        return Err(Error::InvalidInput("curve needs at least 3 points".into()));
    }
    let mut imin = 0;
    for (i, p) in curve.iter().enumerate() {
        if p.1 < curve[imin].1 {
            imin = i;
        }
    }
    let min_db = curve[imin].1;
    if min_db > LEVEL {
        return Err(Error::NoBandwidth { min_db });
    }
    let cross = |a: (f64, f64), b: (f64, f64)| -> f64 {
        // Linear interpolation of the -10 dB crossing between two samples.
        a.0 + (LEVEL - a.1) * (b.0 - a.0) / (b.1 - a.1)
    };
    let mut left = curve[0].0;
    let mut i = imin;
    loop {
        if i == 0 {
            break;
        }
        if curve[i - 1].1 > LEVEL {
            left = cross(curve[i - 1], curve[i]);
            break;
        }
        i -= 1;
    }
    let mut right = curve[curve.len() - 1].0;
    let mut i = imin;
    loop {
        if i + 1 >= curve.len() {
            break;
        }
        if curve[i + 1].1 > LEVEL {
            right = cross(curve[i + 1], curve[i]);
            break;
        }
        i += 1;
    }
    Ok(right - left)
}

/// One row of the voltage → frequency tuning table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningRow {
    pub voltage: f64,
    pub eps_eff: f64,
    pub f_res: f64,
}

/// Composes the calibrated frequency map over a Freedericksz table.
pub fn tuning_curve(rows: &[CurveRow], model: &TuningModel) -> Vec<TuningRow> {
    rows.iter()
        .map(|r| TuningRow {
            voltage: r.voltage,
            eps_eff: r.eps_eff,
            f_res: model.frequency_from_eps(r.eps_eff),
        })
        .collect()
}

/// Minimal voltage interval [V_lo, V_hi] over which the tuning curve covers
/// the band [f_band_low, f_band_high], by linear interpolation on the table.
///
/// The curve is non-increasing in V, so V_lo is where f drops to the band's
/// upper edge and V_hi where it reaches the lower edge.
pub fn band_coverage(
    rows: &[TuningRow],
    f_band_low: f64,
    f_band_high: f64,
) -> Result<(f64, f64), Error> {
    if rows.len() < 2 {
        return Err(Error::InvalidInput("tuning table too short".into()));
    }
    if !(f_band_low < f_band_high) {
        return Err(Error::InvalidInput("band edges out of order".into()));
    }
    let v_at = |target: f64| -> Option<f64> {
        for w in rows.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.f_res >= target && b.f_res <= target) || (a.f_res == target) {
                if a.f_res == b.f_res {
                    return Some(a.voltage);
                }
                let t = (a.f_res - target) / (a.f_res - b.f_res);
                return Some(a.voltage + t * (b.voltage - a.voltage));
            }
        }
        None
    };
    let v_lo = v_at(f_band_high).ok_or_else(|| {
        Error::Domain(format!("sweep never reaches {f_band_high} Hz"))
    })?;
    let v_hi = v_at(f_band_low).ok_or_else(|| {
        Error::Domain(format!("sweep never reaches {f_band_low} Hz"))
    })?;
    Ok((v_lo, v_hi))
}

/// Spiral arm form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpiralForm {
    #[default]
    Archimedean,
    Exponential,
}

/// Spiral geometry parameters (metres and radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralParams {
    /// Inner radius of the starting circle.
    pub r0: f64,
    /// Outer radius of the starting circle.
    pub r1: f64,
    /// Growth rate; `None` derives a turn-normalized rate (r1 − r0)/(2π) so
    /// the radius grows by the strip width each turn.
    pub alpha: Option<f64>,
    pub phi_max: f64,
    pub form: SpiralForm,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams {
            r0: 4.5e-3,
            r1: 4.7e-3,
            alpha: Some(17.5e-3),
            phi_max: 6.0 * PI,
            form: SpiralForm::Archimedean,
        }
    }
}

/// Samples the spiral arm as a polyline of (x, y) in metres.
///
/// Archimedean: r(φ) = r0 + α φ. Exponential: x = r0 e^{αφ} cos φ,
/// y = r0 e^{αφ} sin φ.
pub fn spiral_path(params: &SpiralParams, samples_per_turn: usize) -> Result<Vec<(f64, f64)>, Error> {
    if samples_per_turn < 8 {
        return Err(Error::InvalidInput(
            "samples_per_turn must be at least 8".into(),
        ));
    }
    if params.phi_max < 0.0 || params.r0 >= params.r1 {
        return Err(Error::InvalidInput(
            "need phi_max >= 0 and r0 < r1".into(),
        ));
    }
    let alpha = params
        .alpha
        .unwrap_or((params.r1 - params.r0) / (2.0 * PI));
    let n = ((params.phi_max / (2.0 * PI)) * samples_per_turn as f64).ceil() as usize;
    let n = n.max(1);
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let phi = params.phi_max * k as f64 / n as f64;
        let r = match params.form {
            SpiralForm::Archimedean => params.r0 + alpha * phi,
            SpiralForm::Exponential => params.r0 * (alpha * phi).exp(),
        };
        pts.push((r * phi.cos(), r * phi.sin()));
    }
    if params.phi_max == 0.0 {
        pts.truncate(1);
    }
    Ok(pts)
}

/// Rough inductance of a planar spiral by the current-sheet approximation
/// (square-law fit for a circular spiral). Geometry utility, not part of the
/// calibrated tuning model.
pub fn spiral_inductance_estimate(params: &SpiralParams, trace_width: f64) -> f64 {
    const MU0: f64 = 1.256_637_062e-6;
    let turns = params.phi_max / (2.0 * PI);
    let alpha = params
        .alpha
        .unwrap_or((params.r1 - params.r0) / (2.0 * PI));
    let d_in = 2.0 * params.r0;
    let d_out = 2.0 * (params.r0 + alpha * params.phi_max) + trace_width;
    let d_avg = 0.5 * (d_in + d_out);
    let rho = ((d_out - d_in) / (d_out + d_in)).abs().max(1e-6);
    // Mohan et al. current-sheet coefficients for a circular layout.
    let (c1, c2, c3, c4) = (1.0, 2.46, 0.0, 0.2);
    0.5 * MU0 * turns * turns * d_avg * c1 * ((c2 / rho).ln() + c3 * rho + c4 * rho * rho)
}
