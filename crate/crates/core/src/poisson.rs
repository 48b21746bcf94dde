//! Electric potential from Gauss's law ∇·(ε∇U) = 0 at fixed electrode
//! voltages.
//!
//! In 1D the solution is closed-form: the displacement D_z is constant, so
//! dU/dz ∝ 1/ε_zz(z) and series dielectric layers enter through their
//! reciprocal-permittivity integral. In 2D an anisotropic 9-point stencil is
//! relaxed by red-black SOR with periodic x and Dirichlet electrode values.

use crate::cell::{CellStack, CellState1D, CellState2D, ElectrodePlacement};
use crate::dielectric::dielectric_tensor;
use crate::energy::ModelParams;
use crate::error::Error;
use crate::qtensor::QTensor;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Floor applied to ε_zz to keep transient unphysical states finite.
fn eps_floor(params: &ModelParams) -> f64 {
    1e-3 * params.material.eps_perp
}

/// ε_zz at each LC node.
pub fn eps_zz_profile(q: &[QTensor], params: &ModelParams) -> Vec<f64> {
    let m = &params.material;
    let floor = eps_floor(params);
    q.iter()
        .map(|qi| (m.eps_mean() + m.delta_eps / params.s_ref * qi.zz()).max(floor))
        .collect()
}

/// Reciprocal-permittivity integral ∫ dz/ε_zz over the LC (trapezoid).
pub fn lc_reciprocal_integral(eps_zz: &[f64], hz: f64) -> f64 {
    let mut acc = 0.0;
    for w in eps_zz.windows(2) {
        acc += 0.5 * hz * (1.0 / w[0] + 1.0 / w[1]);
    }
    acc
}

/// Series reciprocal integral of the cover layers (zero when the electrodes
/// sit directly at the LC).
pub fn cover_reciprocal_integral(stack: &CellStack) -> f64 {
    match stack.electrode_placement {
        ElectrodePlacement::AdjacentToLc => 0.0,
        ElectrodePlacement::OutsideDielectrics => stack
            .lower_layers
            .iter()
            .chain(&stack.upper_layers)
            .map(|l| l.thickness / l.eps)
            .sum(),
    }
}

/// Exact 1D solve; fills `state.u` and returns dU/dz at every LC node.
pub fn solve_potential_1d(
    state: &mut CellState1D,
    stack: &CellStack,
    params: &ModelParams,
) -> Vec<f64> {
    let hz = stack.hz();
    let eps = eps_zz_profile(&state.q, params);
    let i_lc = lc_reciprocal_integral(&eps, hz);
    let i_lower = match stack.electrode_placement {
        ElectrodePlacement::AdjacentToLc => 0.0,
        ElectrodePlacement::OutsideDielectrics => {
            stack.lower_layers.iter().map(|l| l.thickness / l.eps).sum()
        }
    };
    let i_total = i_lc + cover_reciprocal_integral(stack);
    let g = if i_total > 0.0 {
        state.applied_voltage / i_total
    } else {
        0.0
    };
    let mut u = g * i_lower;
    state.u[0] = u;
    for i in 1..state.q.len() {
        u += 0.5 * hz * g * (1.0 / eps[i - 1] + 1.0 / eps[i]);
        state.u[i] = u;
    }
    eps.iter().map(|e| g / e).collect()
}

/// How the ε_zz profile is reduced to one effective scalar.
///
/// The paper's Freedericksz curve plots the plain volume average of ε_zz,
/// which is what its antenna model consumes; the series-capacitance average
/// is the electrical (charge per volt) definition. Both agree for uniform
/// profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsAverage {
    #[default]
    Volume,
    Series,
}

/// Series-capacitance effective permittivity of the LC layer:
/// ε_eff = d / ∫ dz/ε_zz.
pub fn effective_permittivity_1d(state: &CellState1D, stack: &CellStack, params: &ModelParams) -> f64 {
    let eps = eps_zz_profile(&state.q, params);
    stack.lc_thickness / lc_reciprocal_integral(&eps, stack.hz())
}

/// Volume-averaged ε_zz of the LC layer (trapezoid in z).
pub fn mean_permittivity_1d(state: &CellState1D, params: &ModelParams) -> f64 {
    let eps = eps_zz_profile(&state.q, params);
    let mut acc = 0.0;
    for w in eps.windows(2) {
        acc += 0.5 * (w[0] + w[1]);
    }
    acc / (eps.len() - 1) as f64
}

/// Effective permittivity under the selected averaging mode (1D).
pub fn lc_permittivity_1d(
    state: &CellState1D,
    stack: &CellStack,
    params: &ModelParams,
    mode: EpsAverage,
) -> f64 {
    match mode {
        EpsAverage::Volume => mean_permittivity_1d(state, params),
        EpsAverage::Series => effective_permittivity_1d(state, stack, params),
    }
}

/// SOR controls for the 2D solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonOptions {
    pub omega: f64,
    /// Relative residual target.
    pub tol: f64,
    pub max_sweeps: u64,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        PoissonOptions {
            omega: 1.92,
            tol: 1e-8,
            max_sweeps: 200_000,
        }
    }
}

/// Per-node permittivity components on the full 2D domain.
pub struct EpsField {
    pub xx: Vec<f64>,
    pub xz: Vec<f64>,
    pub zz: Vec<f64>,
    pub nx: usize,
    pub nz: usize,
}

/// Assembles the permittivity component fields from the current Q grid.
pub fn eps_field_2d(state: &CellState2D, stack: &CellStack, params: &ModelParams) -> EpsField {
    let layout = &state.layout;
    let nx = state.nx;
    let nz = layout.nz_total;
    let mut xx = vec![0.0; nx * nz];
    let mut xz = vec![0.0; nx * nz];
    let mut zz = vec![0.0; nx * nz];
    let floor = eps_floor(params);
    for j in 0..nz {
        for i in 0..nx {
            let k = j * nx + i;
            if layout.is_lc(j) {
                let q = state.q_at(i, j - layout.lc_bottom);
                let eps = dielectric_tensor(&q, &params.material, params.s_ref)
                    .expect("s_ref validated at construction");
                xx[k] = eps.xx().max(floor);
                xz[k] = eps.xz();
                zz[k] = eps.zz().max(floor);
            } else {
                let e = layout.cover_eps(j, stack).expect("cover node");
                xx[k] = e;
                zz[k] = e;
            }
        }
    }
    EpsField { xx, xz, zz, nx, nz }
}

/// Dirichlet mask/value arrays for the electrode planes.
pub fn dirichlet_2d(state: &CellState2D, stack: &CellStack) -> (Vec<bool>, Vec<f64>) {
    let layout = &state.layout;
    let nx = state.nx;
    let nz = layout.nz_total;
    let mut fixed = vec![false; nx * nz];
    let mut value = vec![0.0; nx * nz];
    let v = state.applied_voltage;
    let (j_bot, j_top) = match stack.electrode_placement {
        ElectrodePlacement::AdjacentToLc => (layout.lc_bottom, layout.lc_top()),
        ElectrodePlacement::OutsideDielectrics => (0, nz - 1),
    };
    for i in 0..nx {
        if stack.is_finger(i, false) {
            fixed[j_bot * nx + i] = true;
            value[j_bot * nx + i] = 0.0;
        }
        if stack.is_finger(i, true) {
            fixed[j_top * nx + i] = true;
            value[j_top * nx + i] = v;
        }
    }
    (fixed, value)
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Red-black SOR solve of ∇·(ε∇U) = 0 on the full domain.
///
/// Periodic in x; Neumann (zero normal flux) on non-electrode outer rows.
/// Returns the final relative residual, or an error when the sweep budget is
/// exhausted.
pub fn solve_potential_2d(
    state: &mut CellState2D,
    stack: &CellStack,
    params: &ModelParams,
    opts: &PoissonOptions,
) -> Result<f64, Error> {
    let nx = state.nx;
    let nz = state.layout.nz_total;
    let hx = stack.hx();
    let hz = stack.hz();
    let eps = eps_field_2d(state, stack, params);
    let (fixed, value) = dirichlet_2d(state, stack);

    for k in 0..nx * nz {
        if fixed[k] {
            state.u[k] = value[k];
        }
    }
    if state.applied_voltage == 0.0 {
        state.u.iter_mut().for_each(|u| *u = 0.0);
        return Ok(0.0);
    }

    let mut max_eps: f64 = 0.0;
    for k in 0..nx * nz {
        max_eps = max_eps.max(eps.zz[k]).max(eps.xx[k]);
    }
    let scale = max_eps * state.applied_voltage.abs() / (hx.min(hz)).powi(2);

    let idx = |i: usize, j: usize| j * nx + i;
    let wrap = |i: isize| -> usize { i.rem_euclid(nx as isize) as usize };

    // Residual of the flux-form stencil at one node; mirrors z out of range.
    let residual_at = |u: &[f64], i: usize, j: usize| -> (f64, f64) {
        let ie = wrap(i as isize + 1);
        let iw = wrap(i as isize - 1);
        let jn = if j + 1 < nz { j + 1 } else { j - 1 };
        let js = if j > 0 { j - 1 } else { j + 1 };
        let c = idx(i, j);
        let e = idx(ie, j);
        let w = idx(iw, j);
        let n = idx(i, jn);
        let s = idx(i, js);

        let ax_e = harmonic(eps.xx[c], eps.xx[e]) / (hx * hx);
        let ax_w = harmonic(eps.xx[c], eps.xx[w]) / (hx * hx);
        let az_n = harmonic(eps.zz[c], eps.zz[n]) / (hz * hz);
        let az_s = harmonic(eps.zz[c], eps.zz[s]) / (hz * hz);

        // d/dx (eps_xz dU/dz): central in x of eps_xz * central-z derivative.
        let dz_at = |ii: usize, jj: usize| -> f64 {
            let up = if jj + 1 < nz { idx(ii, jj + 1) } else { idx(ii, jj - 1) };
            let dn = if jj > 0 { idx(ii, jj - 1) } else { idx(ii, jj + 1) };
            (u[up] - u[dn]) / (2.0 * hz)
        };
        let dx_at = |ii: usize, jj: usize| -> f64 {
            let r = idx(wrap(ii as isize + 1), jj);
            let l = idx(wrap(ii as isize - 1), jj);
            (u[r] - u[l]) / (2.0 * hx)
        };
        let mixed = (eps.xz[e] * dz_at(ie, j) - eps.xz[w] * dz_at(iw, j)) / (2.0 * hx)
            + (eps.xz[n] * dx_at(i, jn) - eps.xz[s] * dx_at(i, js)) / (2.0 * hz);

        let r = ax_e * (u[e] - u[c]) - ax_w * (u[c] - u[w]) + az_n * (u[n] - u[c])
            - az_s * (u[c] - u[s])
            + mixed;
        let diag = ax_e + ax_w + az_n + az_s;
        (r, diag)
    };

    let mut sweeps = 0u64;
    loop {
        let mut max_r: f64 = 0.0;
        for color in 0..2 {
            for j in 0..nz {
                for i in 0..nx {
                    if (i + j) % 2 != color {
                        continue;
                    }
                    let c = idx(i, j);
                    if fixed[c] {
                        continue;
                    }
                    let (r, diag) = residual_at(&state.u, i, j);
                    state.u[c] += opts.omega * r / diag;
                    max_r = max_r.max(r.abs());
                }
            }
        }
        sweeps += 1;
        if max_r / scale < opts.tol {
            return Ok(max_r / scale);
        }
        if sweeps >= opts.max_sweeps {
            return Err(Error::NonConvergence {
                what: "2D Poisson SOR",
                iterations: sweeps,
                residual: max_r / scale,
            });
        }
    }
}

/// Effective permittivity of the LC layer from the charge per electrode
/// period: the displacement flux through the LC midplane divided by the
/// x-averaged potential drop across the LC layer. Fixed dielectric covers
/// drop out because the voltage is measured across the LC itself.
pub fn effective_permittivity_2d(
    state: &CellState2D,
    stack: &CellStack,
    params: &ModelParams,
) -> f64 {
    let nx = state.nx;
    let layout = &state.layout;
    let hx = stack.hx();
    let hz = stack.hz();
    let v = state.applied_voltage;
    if v == 0.0 {
        // Zero field carries no charge; fall back to the series average of
        // the current Q profile (exact for x-uniform states).
        let mut acc = 0.0;
        for i in 0..nx {
            let col: Vec<QTensor> = (0..state.nz).map(|jz| state.q_at(i, jz)).collect();
            let prof = eps_zz_profile(&col, params);
            acc += stack.lc_thickness / lc_reciprocal_integral(&prof, hz);
        }
        return acc / nx as f64;
    }

    let eps = eps_field_2d(state, stack, params);
    let j = layout.lc_bottom + layout.nz_lc / 2;
    let idx = |i: usize, jj: usize| jj * nx + i;
    let wrap = |i: isize| -> usize { i.rem_euclid(nx as isize) as usize };

    // Flux of D through the cut between rows j and j+1, per unit y-length
    // (in units of ε₀).
    let mut flux = 0.0;
    for i in 0..nx {
        let c = idx(i, j);
        let n = idx(i, j + 1);
        let dudz = (state.u[n] - state.u[c]) / hz;
        let e_half = harmonic(eps.zz[c], eps.zz[n]);
        let dudx = |jj: usize| {
            (state.u[idx(wrap(i as isize + 1), jj)] - state.u[idx(wrap(i as isize - 1), jj)])
                / (2.0 * hx)
        };
        let exz_half = 0.5 * (eps.xz[c] + eps.xz[n]);
        let dudx_half = 0.5 * (dudx(j) + dudx(j + 1));
        flux += (e_half * dudz + exz_half * dudx_half) * hx;
    }

    // x-averaged potential drop across the LC layer.
    let mut du = 0.0;
    for i in 0..nx {
        du += state.u[idx(i, layout.lc_top())] - state.u[idx(i, layout.lc_bottom)];
    }
    du /= nx as f64;
    flux.abs() * stack.lc_thickness / (du.abs() * stack.period())
}

/// Volume-averaged ε_zz of the 2D LC region (trapezoid in z, periodic x).
pub fn mean_permittivity_2d(state: &CellState2D, params: &ModelParams) -> f64 {
    let m = &params.material;
    let floor = eps_floor(params);
    let nx = state.nx;
    let nz = state.nz;
    let mut acc = 0.0;
    let mut weight = 0.0;
    for j in 0..nz {
        let wz = if j == 0 || j == nz - 1 { 0.5 } else { 1.0 };
        for i in 0..nx {
            let e = (m.eps_mean() + m.delta_eps / params.s_ref * state.q_at(i, j).zz()).max(floor);
            acc += wz * e;
            weight += wz;
        }
    }
    acc / weight
}

/// Effective permittivity under the selected averaging mode (2D).
pub fn lc_permittivity_2d(
    state: &CellState2D,
    stack: &CellStack,
    params: &ModelParams,
    mode: EpsAverage,
) -> f64 {
    match mode {
        EpsAverage::Volume => mean_permittivity_2d(state, params),
        EpsAverage::Series => effective_permittivity_2d(state, stack, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{AnchoringMode, DielectricLayer, ElectrodePattern};
    use crate::material::builtin_material;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn params() -> ModelParams {
        ModelParams::new(builtin_material("RDP-84909").unwrap()).unwrap()
    }

    fn bare_stack(nz: usize) -> CellStack {
        CellStack {
            lower_layers: alloc::vec![],
            upper_layers: alloc::vec![],
            grid_nz: nz,
            ..CellStack::default()
        }
    }

    #[test]
    fn uniform_medium_gives_linear_profile() {
        let p = params();
        let stack = bare_stack(33);
        let q = QTensor::uniaxial(Vector3::x(), p.s_eq).unwrap();
        let mut state = CellState1D::uniform(&stack, q, 1.0);
        let grad = solve_potential_1d(&mut state, &stack, &p);
        let e_expected = 1.0 / stack.lc_thickness;
        for g in &grad {
            assert_relative_eq!(*g, e_expected, max_relative = 1e-12);
        }
        assert_relative_eq!(state.u[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(state.u[32], 1.0, max_relative = 1e-12);
        assert_relative_eq!(state.u[16], 0.5, max_relative = 1e-12);
    }

    /// Two-layer series-capacitor closed form: ε = 2 in the lower half and 4
    /// in the upper half gives E1/E2 = 2 and 2/3 of the drop at the midpoint.
    #[test]
    fn two_layer_voltage_divider() {
        let p = params();
        let stack = bare_stack(65);
        let q = QTensor::ZERO;
        let mut state = CellState1D::uniform(&stack, q, 1.0);
        // Impose the two-layer profile directly on ε via forced Q values:
        // choose uniaxial orders reproducing ε_zz = 2 and 4.
        // ε_zz = ε̃ + (Δε/s_ref) Qzz, so Qzz = (ε − ε̃) s_ref / Δε.
        let m = &p.material;
        let qzz_for = |eps: f64| (eps - m.eps_mean()) * p.s_ref / m.delta_eps;
        for i in 0..65 {
            let qzz = if i < 32 { qzz_for(2.0) } else { qzz_for(4.0) };
            state.q[i] = QTensor::new([-qzz / 2.0, 0.0, 0.0, -qzz / 2.0, 0.0]);
        }
        let grad = solve_potential_1d(&mut state, &stack, &p);
        // Field ratio away from the midpoint jump.
        assert_relative_eq!(grad[5] / grad[60], 2.0, max_relative = 1e-9);
        // Interface potential: the trapezoid cell straddling the jump shifts
        // the exact 2/3 by half a cell; evaluate with a relaxed bound.
        assert_relative_eq!(state.u[32], 2.0 / 3.0, epsilon = 0.01);
        assert_relative_eq!(state.u[64], 1.0, max_relative = 1e-12);
    }

    /// Series divider across PI / LC / PI with electrodes outside.
    #[test]
    fn cover_layers_divide_the_voltage() {
        let p = params();
        let mut stack = CellStack::default();
        stack.electrode_placement = ElectrodePlacement::OutsideDielectrics;
        let q = QTensor::uniaxial(Vector3::x(), p.s_eq).unwrap();
        let mut state = CellState1D::uniform(&stack, q, 1.0);
        solve_potential_1d(&mut state, &stack, &p);
        // Planar LC: ε_zz = 8 exactly; series integrals: PI 50/3.5 each side,
        // LC 80/8 (in micrometres / unit ε).
        let i_pi = 50e-6 / 3.5;
        let i_lc = 80e-6 / 8.0;
        let frac_lower = i_pi / (2.0 * i_pi + i_lc);
        assert_relative_eq!(state.u[0], frac_lower, max_relative = 1e-9);
        assert_relative_eq!(
            state.u[128] - state.u[0],
            i_lc / (2.0 * i_pi + i_lc),
            max_relative = 1e-9
        );
    }

    #[test]
    fn effective_permittivity_planar_and_homeotropic() {
        let p = params();
        let stack = CellStack::default();
        let planar = CellState1D::uniform(
            &stack,
            QTensor::uniaxial(Vector3::x(), p.s_ref).unwrap(),
            0.0,
        );
        assert_relative_eq!(
            effective_permittivity_1d(&planar, &stack, &p),
            8.0,
            epsilon = 1e-9
        );
        let homeotropic = CellState1D::uniform(
            &stack,
            QTensor::uniaxial(Vector3::z(), p.s_ref).unwrap(),
            0.0,
        );
        assert_relative_eq!(
            effective_permittivity_1d(&homeotropic, &stack, &p),
            47.1,
            epsilon = 1e-9
        );
    }

    fn uniform_state_2d(stack: &CellStack, q: QTensor, v: f64) -> CellState2D {
        let layout = stack.z_layout();
        CellState2D {
            nx: stack.grid_nx,
            nz: stack.grid_nz,
            q: alloc::vec![q; stack.grid_nx * stack.grid_nz],
            u: alloc::vec![0.0; stack.grid_nx * layout.nz_total],
            layout,
            applied_voltage: v,
            residual: 0.0,
            energy: 0.0,
        }
    }

    /// Plate electrodes and isotropic uniform ε: the 2D solve must reproduce
    /// the linear 1D profile.
    #[test]
    fn plate_2d_matches_linear_profile() {
        let p = params();
        let mut stack = bare_stack(33);
        stack.electrode_pattern = ElectrodePattern::Plate;
        stack.grid_nx = 8;
        stack.anchoring_mode = AnchoringMode::Strong;
        let q = QTensor::uniaxial(Vector3::x(), p.s_eq).unwrap();
        let mut state = uniform_state_2d(&stack, q, 1.0);
        let res = solve_potential_2d(&mut state, &stack, &p, &PoissonOptions::default()).unwrap();
        assert!(res < 1e-8);
        for j in 0..33 {
            let expect = j as f64 / 32.0;
            for i in 0..8 {
                assert_relative_eq!(state.u_at(i, j), expect, epsilon = 1e-6);
            }
        }
        let eps_eff = effective_permittivity_2d(&state, &stack, &p);
        assert_relative_eq!(eps_eff, 8.0, max_relative = 1e-6);
    }

    /// Tilted uniform director: ε_xz is nonzero but x-invariance keeps the 1D
    /// series answer exact.
    #[test]
    fn tilted_uniform_2d_eps_eff_matches_series() {
        let p = params();
        let mut stack = bare_stack(33);
        stack.electrode_pattern = ElectrodePattern::Plate;
        stack.grid_nx = 8;
        let n = Vector3::new(0.6, 0.0, 0.8);
        let q = QTensor::uniaxial(n, p.s_eq).unwrap();
        let mut state = uniform_state_2d(&stack, q, 1.0);
        solve_potential_2d(&mut state, &stack, &p, &PoissonOptions::default()).unwrap();
        let eps_expect = {
            let col = alloc::vec![q; 33];
            let prof = eps_zz_profile(&col, &p);
            stack.lc_thickness / lc_reciprocal_integral(&prof, stack.hz())
        };
        let eps_eff = effective_permittivity_2d(&state, &stack, &p);
        assert_relative_eq!(eps_eff, eps_expect, max_relative = 1e-6);
    }

    /// Electrodes outside the PI covers: subtracting the cover series
    /// contribution recovers the LC-only permittivity.
    #[test]
    fn outside_placement_isolates_lc_contribution() {
        let p = params();
        let mut stack = CellStack {
            grid_nz: 33,
            grid_nx: 8,
            ..CellStack::default()
        };
        stack.electrode_pattern = ElectrodePattern::Plate;
        stack.electrode_placement = ElectrodePlacement::OutsideDielectrics;
        stack.lower_layers = alloc::vec![DielectricLayer {
            thickness: 25e-6,
            eps: 3.5,
            optical_index: 1.6,
        }];
        stack.upper_layers = stack.lower_layers.clone();
        let q = QTensor::uniaxial(Vector3::x(), p.s_eq).unwrap();
        let mut state = uniform_state_2d(&stack, q, 1.0);
        solve_potential_2d(&mut state, &stack, &p, &PoissonOptions::default()).unwrap();
        let eps_eff = effective_permittivity_2d(&state, &stack, &p);
        assert_relative_eq!(eps_eff, 8.0, max_relative = 1e-5);
    }
}
