//! Berreman 4x4 transfer-matrix optics for stratified anisotropic media.
//!
//! A plane wave with in-plane component η travels along z through layers of
//! complex relative permittivity ε(z). The tangential field vector
//! ψ = (Ex, Hy, Ey, −Hx) (free-space-impedance-1 units) obeys
//! dψ/dz = i k₀ D ψ with the 4x4 matrix D built from ε and η; propagating
//! ψ through every layer and matching to the plane-wave eigenmodes of the
//! isotropic ambient media yields transmittance and reflectance including
//! all interlayer reflections.
//!
//! Layer propagators exp(i k₀ D h) are computed by eigendecomposition with a
//! scaled-series fallback when the eigenvector basis is ill-conditioned.

use crate::cell::{CellState2D, CellStack};
use crate::energy::ModelParams;
use crate::error::Error;
use crate::qtensor::QTensor;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex;

#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex<f64>;
type CMat4 = Matrix4<C64>;
type CVec4 = Vector4<C64>;

const ONE: C64 = Complex::new(1.0, 0.0);
const ZERO_C: C64 = Complex::new(0.0, 0.0);

/// One layer of the optical stack.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalLayer {
    pub thickness: f64,
    /// Complex symmetric relative permittivity at optical frequency.
    pub permittivity: Matrix3<C64>,
}

impl OpticalLayer {
    /// Isotropic layer from a (possibly complex) refractive index.
    pub fn isotropic(thickness: f64, index: C64) -> Self {
        OpticalLayer {
            thickness,
            permittivity: Matrix3::identity() * (index * index),
        }
    }
}

/// Incident plane-wave description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSpec {
    pub wavelength: f64,
    /// In-plane propagation component η = n_inc sin θ.
    pub eta: f64,
    pub ambient_index_in: f64,
    pub ambient_index_out: f64,
}

impl PlaneWaveSpec {
    /// Normal incidence at 532 nm between the given ambient indices.
    pub fn normal(wavelength: f64, n_in: f64, n_out: f64) -> Self {
        PlaneWaveSpec {
            wavelength,
            eta: 0.0,
            ambient_index_in: n_in,
            ambient_index_out: n_out,
        }
    }
}

/// Amplitudes of the two ambient polarization modes. At normal incidence
/// `x` is the p mode (E along x) and `y` the s mode (E along y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jones {
    pub x: C64,
    pub y: C64,
}

impl Jones {
    pub fn x_pol() -> Self {
        Jones { x: ONE, y: ZERO_C }
    }
    pub fn y_pol() -> Self {
        Jones { x: ZERO_C, y: ONE }
    }
    /// Linear polarization at `angle` from x toward y.
    pub fn linear(angle: f64) -> Self {
        Jones {
            x: Complex::new(angle.cos(), 0.0),
            y: Complex::new(angle.sin(), 0.0),
        }
    }
    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }
}

/// The Berreman matrix D(ε, η).
///
/// Fails when |ε₃₃| vanishes (the layer cannot support the z-field
/// elimination).
pub fn berreman_matrix(eps: &Matrix3<C64>, eta: f64) -> Result<CMat4, Error> {
    let e33 = eps[(2, 2)];
    if e33.norm() < 1e-300 {
        return Err(Error::SingularLayer(format!(
            "epsilon_33 = {e33} is singular"
        )));
    }
    let e = |r: usize, c: usize| eps[(r, c)];
    let eta_c = Complex::new(eta, 0.0);
    let mut d = CMat4::zeros();
    d[(0, 0)] = -eta_c * e(2, 0) / e33;
    d[(0, 1)] = ONE - eta_c * eta_c / e33;
    d[(0, 2)] = -eta_c * e(2, 1) / e33;
    d[(1, 0)] = e(0, 0) - e(0, 2) * e(2, 0) / e33;
    d[(1, 1)] = -eta_c * e(0, 2) / e33;
    d[(1, 2)] = e(0, 1) - e(0, 2) * e(2, 1) / e33;
    d[(2, 3)] = ONE;
    d[(3, 0)] = e(1, 0) - e(1, 2) * e(2, 0) / e33;
    d[(3, 1)] = -eta_c * e(1, 2) / e33;
    d[(3, 2)] = e(1, 1) - e(1, 2) * e(2, 1) / e33 - eta_c * eta_c;
    Ok(d)
}

// ---------------------------------------------------------------------------
// Complex 4x4 linear algebra.
// ---------------------------------------------------------------------------

fn gauss_solve4(mut a: CMat4, mut b: CVec4) -> Option<CVec4> {
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if a[(r, col)].norm_sqr() > a[(piv, col)].norm_sqr() {
                piv = r;
            }
        }
        if a[(piv, col)].norm_sqr() < 1e-300 {
            return None;
        }
        if piv != col {
            a.swap_rows(piv, col);
            b.swap_rows(piv, col);
        }
        let d = a[(col, col)];
        for r in col + 1..4 {
            let f = a[(r, col)] / d;
            if f != ZERO_C {
                for c in col..4 {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    for col in (0..4).rev() {
        let mut x = b[col];
        for c in col + 1..4 {
            x -= a[(col, c)] * b[c];
        }
        b[col] = x / a[(col, col)];
    }
    Some(b)
}

fn inv4(a: &CMat4) -> Option<CMat4> {
    let mut out = CMat4::zeros();
    for col in 0..4 {
        let mut e = CVec4::zeros();
        e[col] = ONE;
        let x = gauss_solve4(*a, e)?;
        for r in 0..4 {
            out[(r, col)] = x[r];
        }
    }
    Some(out)
}

fn frob_norm(a: &CMat4) -> f64 {
    let mut s = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            s += a[(r, c)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Monic quartic coefficients of det(λI − A) via Faddeev–LeVerrier:
/// λ⁴ + c[0] λ³ + c[1] λ² + c[2] λ + c[3].
fn char_poly4(a: &CMat4) -> [C64; 4] {
    let id = CMat4::identity();
    let m1 = *a;
    let c1 = -m1.trace();
    let m2 = a * (m1 + id * c1);
    let c2 = -m2.trace() / Complex::new(2.0, 0.0);
    let m3 = a * (m2 + id * c2);
    let c3 = -m3.trace() / Complex::new(3.0, 0.0);
    let m4 = a * (m3 + id * c3);
    let c4 = -m4.trace() / Complex::new(4.0, 0.0);
    [c1, c2, c3, c4]
}

/// All roots of the monic quartic by Durand–Kerner iteration.
fn quartic_roots(c: &[C64; 4]) -> [C64; 4] {
    let p = |x: C64| (((x + c[0]) * x + c[1]) * x + c[2]) * x + c[3];
    let radius = 1.0 + c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let seed = Complex::new(0.4, 0.9);
    let mut x = [ZERO_C; 4];
    let mut acc = Complex::new(radius, 0.0);
    for xi in x.iter_mut() {
        acc *= seed;
        *xi = acc;
    }
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for k in 0..4 {
            let mut denom = ONE;
            for j in 0..4 {
                if j != k {
                    denom *= x[k] - x[j];
                }
            }
            if denom.norm_sqr() < 1e-300 {
                continue;
            }
            let step = p(x[k]) / denom;
            x[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-15 * radius {
            break;
        }
    }
    x
}

/// Null-space basis of a (nearly) singular 4x4 matrix, by Gaussian
/// elimination with full pivoting. `rank_tol` is the absolute pivot floor.
fn null_space(mut a: CMat4, rank_tol: f64) -> Vec<CVec4> {
    let mut col_perm = [0usize, 1, 2, 3];
    let mut rank = 0;
    for step in 0..4 {
        // Full pivot over the remaining submatrix.
        let (mut pr, mut pc, mut best) = (step, step, 0.0f64);
        for r in step..4 {
            for c in step..4 {
                let v = a[(r, c)].norm();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= rank_tol {
            break;
        }
        a.swap_rows(step, pr);
        a.swap_columns(step, pc);
        col_perm.swap(step, pc);
        let d = a[(step, step)];
        for r in step + 1..4 {
            let f = a[(r, step)] / d;
            if f != ZERO_C {
                for c in step..4 {
                    let v = a[(step, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in rank..4 {
        let mut y = [ZERO_C; 4];
        y[free] = ONE;
        for r in (0..rank).rev() {
            let mut s = ZERO_C;
            for c in r + 1..4 {
                s += a[(r, c)] * y[c];
            }
            y[r] = -s / a[(r, r)];
        }
        let mut v = CVec4::zeros();
        for (permuted, value) in y.iter().enumerate() {
            v[col_perm[permuted]] = *value;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            basis.push(v / Complex::new(norm, 0.0));
        }
    }
    basis
}

/// exp(M) by Taylor series with scaling and squaring.
fn series_exp(m: &CMat4) -> CMat4 {
    let norm = frob_norm(m);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / Complex::new(2f64.powi(s as i32), 0.0);
    let mut result = CMat4::identity();
    let mut term = CMat4::identity();
    for k in 1..=24 {
        term = term * scaled / Complex::new(k as f64, 0.0);
        result += term;
    }
    for _ in 0..s {
        result = result * result;
    }
    result
}

/// exp(z D) by eigendecomposition; `None` when eigenvalues are degenerate,
/// the basis is ill-conditioned or the matrix defective (caller falls back
/// to the scaled series, which handles those cases exactly).
fn eigen_exp(d: &CMat4, z: C64) -> Option<CMat4> {
    let coeffs = char_poly4(d);
    let roots = quartic_roots(&coeffs);
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for k in 0..4 {
        for j in k + 1..4 {
            if (roots[j] - roots[k]).norm() < 1e-6 * scale {
                return None;
            }
        }
    }
    let rank_tol = 1e-8 * frob_norm(d).max(1.0);
    let mut v = CMat4::zeros();
    for (c, lambda) in roots.iter().enumerate() {
        let ns = null_space(d - CMat4::identity() * *lambda, rank_tol);
        if ns.len() != 1 {
            return None;
        }
        for r in 0..4 {
            v[(r, c)] = ns[0][r];
        }
    }
    let vinv = inv4(&v)?;
    if frob_norm(&v) * frob_norm(&vinv) > 1e8 {
        return None;
    }
    let mut diag = CMat4::zeros();
    for (c, lambda) in roots.iter().enumerate() {
        diag[(c, c)] = (z * lambda).exp();
    }
    Some(v * diag * vinv)
}

/// Transfer matrix exp(i k₀ D h) of one layer.
pub fn layer_propagator(d: &CMat4, thickness: f64, wavelength: f64) -> CMat4 {
    if thickness == 0.0 {
        return CMat4::identity();
    }
    let k0 = 2.0 * PI / wavelength;
    let z = Complex::new(0.0, k0 * thickness);
    match eigen_exp(d, z) {
        Some(p) => p,
        None => series_exp(&(d * z)),
    }
}

/// Power transmittance/reflectance and the transmitted and reflected mode
/// amplitudes (normalized to unit incident power).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmittanceResult {
    pub transmittance: f64,
    pub reflectance: f64,
    /// Transmitted (p, s) amplitudes in the output ambient.
    pub t_jones: Jones,
    /// Reflected (p, s) amplitudes in the input ambient.
    pub r_jones: Jones,
    /// Output/input longitudinal flux ratio q_out/q_in.
    pub flux_ratio: f64,
}

impl TransmittanceResult {
    /// Power passed by an ideal analyzer (Jones projector) behind the stack.
    pub fn analyzed_transmittance(&self, analyzer: &Jones) -> f64 {
        let n = analyzer.norm_sqr().sqrt();
        let ax = analyzer.x / Complex::new(n, 0.0);
        let ay = analyzer.y / Complex::new(n, 0.0);
        let amp = ax.conj() * self.t_jones.x + ay.conj() * self.t_jones.y;
        self.flux_ratio * amp.norm_sqr()
    }
}

/// Forward/backward p and s eigenmodes of an isotropic ambient, normalized
/// to unit longitudinal power flux.
fn ambient_modes(n: f64, q: f64) -> [CVec4; 4] {
    let nc = Complex::new(n, 0.0);
    let qc = Complex::new(q, 0.0);
    // (Ex, Hy, Ey, -Hx)
    let p_fwd = CVec4::new(qc / nc, nc, ZERO_C, ZERO_C);
    let p_bwd = CVec4::new(-qc / nc, nc, ZERO_C, ZERO_C);
    let s_fwd = CVec4::new(ZERO_C, ZERO_C, ONE, qc);
    let s_bwd = CVec4::new(ZERO_C, ZERO_C, ONE, -qc);
    [p_fwd, p_bwd, s_fwd, s_bwd]
}

/// Transmittance of a layered stack between isotropic ambient media.
///
/// An empty stack reduces to the bare interface between the two ambients.
pub fn transmittance(
    stack: &[OpticalLayer],
    wave: &PlaneWaveSpec,
    input: &Jones,
) -> Result<TransmittanceResult, Error> {
    let (n_in, n_out) = (wave.ambient_index_in, wave.ambient_index_out);
    if wave.eta.abs() >= n_in {
        return Err(Error::Evanescent {
            eta: wave.eta,
            ambient_index: n_in,
        });
    }
    if wave.eta.abs() >= n_out {
        return Err(Error::Evanescent {
            eta: wave.eta,
            ambient_index: n_out,
        });
    }
    let a_norm = input.norm_sqr().sqrt();
    if a_norm == 0.0 {
        return Err(Error::InvalidInput("zero input polarization".into()));
    }
    let a_p = input.x / Complex::new(a_norm, 0.0);
    let a_s = input.y / Complex::new(a_norm, 0.0);

    let mut m = CMat4::identity();
    for layer in stack {
        let d = berreman_matrix(&layer.permittivity, wave.eta)?;
        m = layer_propagator(&d, layer.thickness, wave.wavelength) * m;
    }

    let q_in = (n_in * n_in - wave.eta * wave.eta).sqrt();
    let q_out = (n_out * n_out - wave.eta * wave.eta).sqrt();
    let [p_in_f, p_in_b, s_in_f, s_in_b] = ambient_modes(n_in, q_in);
    let [p_out_f, _, s_out_f, _] = ambient_modes(n_out, q_out);

    // Columns: r_p, r_s, t_p, t_s.
    let mp = m * p_in_b;
    let ms = m * s_in_b;
    let mut sys = CMat4::zeros();
    for r in 0..4 {
        sys[(r, 0)] = -mp[r];
        sys[(r, 1)] = -ms[r];
        sys[(r, 2)] = p_out_f[r];
        sys[(r, 3)] = s_out_f[r];
    }
    let rhs = m * (p_in_f * a_p + s_in_f * a_s);
    let sol = gauss_solve4(sys, rhs).ok_or_else(|| {
        Error::SingularLayer("mode-matching system is singular".into())
    })?;
    let (r_p, r_s, t_p, t_s) = (sol[0], sol[1], sol[2], sol[3]);
    let flux_ratio = q_out / q_in;
    Ok(TransmittanceResult {
        transmittance: flux_ratio * (t_p.norm_sqr() + t_s.norm_sqr()),
        reflectance: r_p.norm_sqr() + r_s.norm_sqr(),
        t_jones: Jones { x: t_p, y: t_s },
        r_jones: Jones { x: r_p, y: r_s },
        flux_ratio,
    })
}

/// Optical permittivity of a uniaxial state: ε_opt = ε̃_opt I + (Δε_opt/S_eq) Q
/// with ε⊥ = n_o², ε∥ = n_e² from the 532 nm table constants.
pub fn optical_permittivity(q: &QTensor, params: &ModelParams) -> Matrix3<C64> {
    let m = &params.material;
    let eps_perp = m.n_o * m.n_o;
    let eps_par = m.n_e() * m.n_e();
    let mean = (2.0 * eps_perp + eps_par) / 3.0;
    let scale = (eps_par - eps_perp) / params.s_eq;
    let qm = q.to_matrix();
    let mut out = Matrix3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            let v = scale * qm[(r, c)] + if r == c { mean } else { 0.0 };
            out[(r, c)] = Complex::new(v, 0.0);
        }
    }
    out
}

/// Builds the LC part of a stack from per-layer directors, one optical layer
/// per entry (director assumed constant inside each layer).
pub fn lc_column_to_stack(
    directors: &[(Vector3<f64>, f64)],
    layer_thickness: f64,
    params: &ModelParams,
) -> Result<Vec<OpticalLayer>, Error> {
    let mut out = Vec::with_capacity(directors.len());
    for (n, s) in directors {
        let q = QTensor::uniaxial(*n, *s)?;
        out.push(OpticalLayer {
            thickness: layer_thickness,
            permittivity: optical_permittivity(&q, params),
        });
    }
    Ok(out)
}

/// ITO electrode film over the finger columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItoSpec {
    pub thickness: f64,
    /// Complex refractive index n + ik.
    pub index: C64,
}

/// Incident light for the transmittance profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncidentLight {
    /// Average of the two linear ambient modes.
    Unpolarized,
    Polarized(Jones),
}

/// Configuration of the cell transmittance computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsSetup {
    pub wavelength: f64,
    pub ambient_index_in: f64,
    pub ambient_index_out: f64,
    pub eta: f64,
    /// Include the fixed dielectric layers as isotropic slabs.
    pub include_dielectric_layers: bool,
    /// ITO films on the electrode planes (present over finger columns only;
    /// plate electrodes cover every column).
    pub ito: Option<ItoSpec>,
    pub light: IncidentLight,
}

impl Default for OpticsSetup {
    fn default() -> Self {
        OpticsSetup {
            wavelength: 532e-9,
            ambient_index_in: 1.0,
            ambient_index_out: 1.0,
            eta: 0.0,
            include_dielectric_layers: true,
            ito: None,
            light: IncidentLight::Unpolarized,
        }
    }
}

/// LC optical layers of one x-column, resampled to `n_layers` equal slabs
/// (linear interpolation of Q between nodes; director from the interpolated
/// tensor at the slab midpoint).
pub fn lc_column_layers(
    state: &CellState2D,
    column: usize,
    n_layers: usize,
    params: &ModelParams,
    lc_thickness: f64,
) -> Vec<OpticalLayer> {
    let nz = state.nz;
    let h = lc_thickness / n_layers as f64;
    let mut out = Vec::with_capacity(n_layers);
    for k in 0..n_layers {
        let zmid = (k as f64 + 0.5) / n_layers as f64 * (nz - 1) as f64;
        let j0 = (zmid.floor() as usize).min(nz - 2);
        let t = zmid - j0 as f64;
        let q = state.q_at(column, j0) * (1.0 - t) + state.q_at(column, j0 + 1) * t;
        out.push(OpticalLayer {
            thickness: h,
            permittivity: optical_permittivity(&q, params),
        });
    }
    out
}

fn column_stack(
    state: &CellState2D,
    stack: &CellStack,
    params: &ModelParams,
    optics: &OpticsSetup,
    column: usize,
) -> Vec<OpticalLayer> {
    let mut layers = Vec::new();
    if optics.include_dielectric_layers {
        for l in stack.lower_layers.iter().rev() {
            layers.push(OpticalLayer::isotropic(
                l.thickness,
                Complex::new(l.optical_index, 0.0),
            ));
        }
    }
    if let Some(ito) = optics.ito {
        if stack.is_finger(column, false) {
            layers.push(OpticalLayer::isotropic(ito.thickness, ito.index));
        }
    }
    layers.extend(lc_column_layers(
        state,
        column,
        state.nz - 1,
        params,
        stack.lc_thickness,
    ));
    if let Some(ito) = optics.ito {
        if stack.is_finger(column, true) {
            layers.push(OpticalLayer::isotropic(ito.thickness, ito.index));
        }
    }
    if optics.include_dielectric_layers {
        for l in &stack.upper_layers {
            layers.push(OpticalLayer::isotropic(
                l.thickness,
                Complex::new(l.optical_index, 0.0),
            ));
        }
    }
    layers
}

/// Transmittance and reflectance versus x over one electrode period of a 2D
/// state (local-mode approximation: each column is treated as a 1D stack).
pub fn transmittance_profile_2d(
    state: &CellState2D,
    stack: &CellStack,
    params: &ModelParams,
    optics: &OpticsSetup,
) -> Result<Vec<(f64, f64, f64)>, Error> {
    let hx = stack.hx();
    let wave = PlaneWaveSpec {
        wavelength: optics.wavelength,
        eta: optics.eta,
        ambient_index_in: optics.ambient_index_in,
        ambient_index_out: optics.ambient_index_out,
    };
    let mut rows = Vec::with_capacity(state.nx);
    for i in 0..state.nx {
        let layers = column_stack(state, stack, params, optics, i);
        let (t, r) = match optics.light {
            IncidentLight::Polarized(j) => {
                let res = transmittance(&layers, &wave, &j)?;
                (res.transmittance, res.reflectance)
            }
            IncidentLight::Unpolarized => {
                let rx = transmittance(&layers, &wave, &Jones::x_pol())?;
                let ry = transmittance(&layers, &wave, &Jones::y_pol())?;
                (
                    0.5 * (rx.transmittance + ry.transmittance),
                    0.5 * (rx.reflectance + ry.reflectance),
                )
            }
        };
        rows.push((i as f64 * hx, t, r));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iso_eps(n: f64) -> Matrix3<C64> {
        Matrix3::identity() * Complex::new(n * n, 0.0)
    }

    #[test]
    fn isotropic_matrix_structure_at_normal_incidence() {
        let n = 1.7;
        let d = berreman_matrix(&iso_eps(n), 0.0).unwrap();
        // Off-diagonal blocks (1, n²), zeros elsewhere.
        assert_relative_eq!(d[(0, 1)].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(d[(1, 0)].re, n * n, max_relative = 1e-15);
        assert_relative_eq!(d[(2, 3)].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(d[(3, 2)].re, n * n, max_relative = 1e-15);
        let zero_positions = [
            (0, 0),
            (0, 2),
            (0, 3),
            (1, 1),
            (1, 2),
            (1, 3),
            (2, 0),
            (2, 1),
            (2, 2),
            (3, 0),
            (3, 1),
            (3, 3),
        ];
        for (r, c) in zero_positions {
            assert_eq!(d[(r, c)], ZERO_C);
        }
    }

    #[test]
    fn vacuum_eigenvalues_are_plus_minus_one() {
        // Double roots are ill-conditioned for the root finder (√ε splits);
        // 1e-7 is the attainable accuracy and the propagator takes the exact
        // series path for such layers anyway.
        let d = berreman_matrix(&iso_eps(1.0), 0.0).unwrap();
        let mut roots = quartic_roots(&char_poly4(&d));
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_relative_eq!(roots[0].re, -1.0, epsilon = 1e-7);
        assert_relative_eq!(roots[1].re, -1.0, epsilon = 1e-7);
        assert_relative_eq!(roots[2].re, 1.0, epsilon = 1e-7);
        assert_relative_eq!(roots[3].re, 1.0, epsilon = 1e-7);
        for r in roots {
            assert!(r.im.abs() < 1e-7);
        }
    }

    fn uniaxial_eps_xz(n_o: f64, n_e: f64, tilt: f64) -> Matrix3<C64> {
        let n = Vector3::new(tilt.cos(), 0.0, tilt.sin());
        let de = n_e * n_e - n_o * n_o;
        let mut m = Matrix3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                let v = de * n[r] * n[c] + if r == c { n_o * n_o } else { 0.0 };
                m[(r, c)] = Complex::new(v, 0.0);
            }
        }
        m
    }

    #[test]
    fn symmetry_relations_for_xz_optic_axis() {
        // For symmetric ε with the optic axis in the x-z plane the printed
        // relations D13 = D24, D11 = D22 and D41 = D23 hold exactly.
        let eps = uniaxial_eps_xz(1.48, 1.6264, 0.37);
        let d = berreman_matrix(&eps, 0.42).unwrap();
        assert!((d[(0, 2)] - d[(1, 3)]).norm() < 1e-14);
        assert!((d[(0, 0)] - d[(1, 1)]).norm() < 1e-14);
        assert!((d[(3, 0)] - d[(1, 2)]).norm() < 1e-14);
    }

    #[test]
    fn zero_thickness_propagator_is_identity() {
        let d = berreman_matrix(&iso_eps(1.5), 0.3).unwrap();
        let p = layer_propagator(&d, 0.0, 532e-9);
        assert!(frob_norm(&(p - CMat4::identity())) < 1e-14);
    }

    #[test]
    fn propagator_semigroup_property() {
        let eps = uniaxial_eps_xz(1.48, 1.6264, 0.6);
        let d = berreman_matrix(&eps, 0.35).unwrap();
        let full = layer_propagator(&d, 2.0e-6, 532e-9);
        let half = layer_propagator(&d, 1.0e-6, 532e-9);
        let diff = frob_norm(&(half * half - full));
        assert!(diff < 1e-10, "semigroup violation {diff}");
    }

    #[test]
    fn vacuum_wavelength_slab_is_identity() {
        // exp(i k0 D λ) for vacuum: both polarization blocks advance by 2π.
        let d = berreman_matrix(&iso_eps(1.0), 0.0).unwrap();
        let p = layer_propagator(&d, 532e-9, 532e-9);
        assert!(frob_norm(&(p - CMat4::identity())) < 1e-10);
    }

    #[test]
    fn series_and_eigen_paths_agree() {
        let eps = uniaxial_eps_xz(1.5, 1.7, 0.4);
        let d = berreman_matrix(&eps, 0.2).unwrap();
        let k0 = 2.0 * PI / 532e-9;
        let z = Complex::new(0.0, k0 * 0.8e-6);
        let eig = eigen_exp(&d, z).expect("diagonalizable");
        let ser = series_exp(&(d * z));
        assert!(frob_norm(&(eig - ser)) < 1e-9);
    }

    #[test]
    fn empty_stack_matched_ambients() {
        let wave = PlaneWaveSpec::normal(532e-9, 1.5, 1.5);
        let res = transmittance(&[], &wave, &Jones::linear(0.7)).unwrap();
        assert_relative_eq!(res.transmittance, 1.0, epsilon = 1e-12);
        assert!(res.reflectance < 1e-12);
    }

    #[test]
    fn empty_stack_bare_interface_matches_fresnel() {
        // Normal incidence air -> glass: R = ((n2-n1)/(n2+n1))².
        let wave = PlaneWaveSpec::normal(532e-9, 1.0, 1.5);
        let res = transmittance(&[], &wave, &Jones::x_pol()).unwrap();
        let r = ((1.5 - 1.0) / (2.5_f64)).powi(2);
        assert_relative_eq!(res.reflectance, r, max_relative = 1e-12);
        assert_relative_eq!(res.transmittance, 1.0 - r, max_relative = 1e-12);
    }

    #[test]
    fn energy_conserved_for_lossless_anisotropic_stack() {
        let layers = alloc::vec![
            OpticalLayer {
                thickness: 1.3e-6,
                permittivity: uniaxial_eps_xz(1.48, 1.6264, 0.3),
            },
            OpticalLayer::isotropic(0.4e-6, Complex::new(1.9, 0.0)),
            OpticalLayer {
                thickness: 2.1e-6,
                permittivity: uniaxial_eps_xz(1.48, 1.6264, 1.1),
            },
        ];
        for eta in [0.0, 0.3, 0.8] {
            let wave = PlaneWaveSpec {
                wavelength: 532e-9,
                eta,
                ambient_index_in: 1.5,
                ambient_index_out: 1.33,
            };
            for jones in [Jones::x_pol(), Jones::y_pol(), Jones::linear(0.9)] {
                let res = transmittance(&layers, &wave, &jones).unwrap();
                assert_relative_eq!(
                    res.transmittance + res.reflectance,
                    1.0,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn absorbing_layer_dissipates() {
        let layers = alloc::vec![OpticalLayer::isotropic(
            150e-9,
            Complex::new(1.9, 0.05)
        )];
        let wave = PlaneWaveSpec::normal(532e-9, 1.5, 1.5);
        let res = transmittance(&layers, &wave, &Jones::x_pol()).unwrap();
        assert!(res.transmittance + res.reflectance < 1.0);
        assert!(res.transmittance > 0.5);
    }

    #[test]
    fn evanescent_ambient_rejected() {
        let wave = PlaneWaveSpec {
            wavelength: 532e-9,
            eta: 1.2,
            ambient_index_in: 1.0,
            ambient_index_out: 1.5,
        };
        assert!(matches!(
            transmittance(&[], &wave, &Jones::x_pol()),
            Err(Error::Evanescent { .. })
        ));
    }

    #[test]
    fn eta_zero_polarizations_do_not_mix() {
        // ε with ε13 = ε23 = 0 keeps s and p decoupled at normal incidence.
        let mut eps = iso_eps(1.5);
        eps[(0, 0)] = Complex::new(1.7 * 1.7, 0.0);
        eps[(0, 1)] = Complex::new(0.02, 0.0);
        eps[(1, 0)] = eps[(0, 1)];
        // Even with an xy component the x input must not appear in y output
        // beyond the xy coupling itself; test the strictly diagonal case.
        let eps_diag = uniaxial_eps_xz(1.48, 1.6264, 0.0);
        let layers = alloc::vec![OpticalLayer {
            thickness: 3e-6,
            permittivity: eps_diag,
        }];
        let wave = PlaneWaveSpec::normal(532e-9, 1.5, 1.5);
        let res = transmittance(&layers, &wave, &Jones::x_pol()).unwrap();
        assert!(res.t_jones.y.norm() < 1e-14);
        assert!(res.r_jones.y.norm() < 1e-14);
    }

    #[test]
    fn weak_retarder_crossed_polarizers() {
        // Weak birefringence, o-wave index matched to the ambients: the
        // textbook sin²(Γ/2) law holds to 1e-6.
        let n_o = 1.5;
        let dn = 0.001;
        let gamma_target = PI / 2.0;
        let d = gamma_target * 532e-9 / (2.0 * PI * dn);
        let layers = alloc::vec![OpticalLayer {
            thickness: d,
            permittivity: {
                // optic axis at 45 degrees in the x-y plane
                let n = Vector3::new(core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2, 0.0);
                let de = (n_o + dn) * (n_o + dn) - n_o * n_o;
                let mut m = Matrix3::zeros();
                for r in 0..3 {
                    for c in 0..3 {
                        let v = de * n[r] * n[c] + if r == c { n_o * n_o } else { 0.0 };
                        m[(r, c)] = Complex::new(v, 0.0);
                    }
                }
                m
            },
        }];
        let wave = PlaneWaveSpec::normal(532e-9, n_o, n_o);
        // Polarizer along x, analyzer along y, optic axis at 45 degrees.
        let res = transmittance(&layers, &wave, &Jones::x_pol()).unwrap();
        let t_crossed = res.analyzed_transmittance(&Jones::y_pol());
        let gamma = 2.0 * PI * dn * d / 532e-9;
        assert_relative_eq!(t_crossed, (gamma / 2.0).sin().powi(2), epsilon = 1e-6);
    }
}
