//! Landau–de Gennes energy densities and the molecular field.
//!
//! The free-energy density is the sum of
//!
//! * elastic: (L/2) |∇Q|², one-constant approximation, summed over all nine
//!   tensor components,
//! * thermotropic: A tr(Q²) + (2B/3) tr(Q³) + a quartic term whose
//!   normalization is selected by [`QuarticConvention`],
//! * electrostatic: −(ε₀/2) (ε ∇U)·∇U with ε the Q-dependent dielectric
//!   tensor, U the electric potential.
//!
//! The molecular field δF/δQ is returned projected onto the symmetric
//! traceless subspace; flowing Q against it decreases the total energy. The
//! three pieces are exposed separately because the relaxation solver treats
//! the (stiff) thermotropic part implicitly.

use crate::error::Error;
use crate::material::{
    equilibrium_order_with, ElasticRule, LCMaterial, QuarticConvention,
};
use crate::qtensor::QTensor;
use crate::EPSILON_0;
use nalgebra::Vector3;

#[allow(unused_imports)]
use num_traits::Float;

/// Material plus the derived constants the solvers need.
///
/// Immutable once built; cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub material: LCMaterial,
    pub quartic: QuarticConvention,
    pub elastic_rule: ElasticRule,
    /// Equilibrium order under `quartic`.
    pub s_eq: f64,
    /// Order at which Δε was measured; defaults to `s_eq`.
    pub s_ref: f64,
    /// One-constant elastic coefficient L (N), see [`ElasticRule`].
    pub l_const: f64,
}

impl ModelParams {
    /// Builds with the default conventions and `s_ref = s_eq`.
    pub fn new(material: LCMaterial) -> Result<Self, Error> {
        Self::with_conventions(
            material,
            QuarticConvention::default(),
            ElasticRule::default(),
            None,
        )
    }

    /// Builds with explicit conventions; `s_ref = None` selects `s_eq`.
    ///
    /// The elastic constant follows from |∇Q|² = 2S²|∇n|² at uniform order:
    /// L = K/(2 S_eq²) with K chosen by the rule, so the simulated splay
    /// threshold reproduces the analytic V_c when K = K11.
    pub fn with_conventions(
        material: LCMaterial,
        quartic: QuarticConvention,
        elastic_rule: ElasticRule,
        s_ref: Option<f64>,
    ) -> Result<Self, Error> {
        let s_eq = equilibrium_order_with(&material, quartic)?;
        let k = match elastic_rule {
            ElasticRule::FromK11 => material.k11,
            ElasticRule::FromMeanK => material.mean_k(),
        };
        let l_const = k / (2.0 * s_eq * s_eq);
        let s_ref = s_ref.unwrap_or(s_eq);
        if s_ref <= 0.0 {
            return Err(Error::InvalidInput(alloc::format!(
                "s_ref must be positive, got {s_ref}"
            )));
        }
        Ok(ModelParams {
            material,
            quartic,
            elastic_rule,
            s_eq,
            s_ref,
            l_const,
        })
    }

    /// Quartic prefactor of the molecular field: H ⊃ cq·C·tr(Q²)·Q.
    fn quartic_field_factor(&self) -> f64 {
        match self.quartic {
            QuarticConvention::TrQ2Sq => 2.0,
            QuarticConvention::TrQ4 => 1.0,
        }
    }
}

/// The three energy densities (J/m³) at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyDensities {
    pub elastic: f64,
    pub thermotropic: f64,
    pub electrostatic: f64,
}

impl EnergyDensities {
    pub fn total(&self) -> f64 {
        self.elastic + self.thermotropic + self.electrostatic
    }
}

/// Thermotropic density A tr(Q²) + (2B/3) tr(Q³) + quartic term.
pub fn thermotropic_density(q: &QTensor, params: &ModelParams) -> f64 {
    let m = &params.material;
    let t2 = q.tr_q2();
    let quartic = match params.quartic {
        QuarticConvention::TrQ2Sq => 0.5 * m.c_coef * t2 * t2,
        // tr(Q⁴) = (tr Q²)²/2 for traceless symmetric Q.
        QuarticConvention::TrQ4 => 0.25 * m.c_coef * t2 * t2,
    };
    m.a_coef * t2 + 2.0 * m.b_coef / 3.0 * q.tr_q3() + quartic
}

/// Electrostatic density −(ε₀/2) (ε ∇U)·∇U at frozen potential gradient.
pub fn electrostatic_density(q: &QTensor, grad_u: &Vector3<f64>, params: &ModelParams) -> f64 {
    let m = &params.material;
    let quad = quad_form(q, grad_u);
    -0.5 * EPSILON_0 * (m.delta_eps / params.s_ref * quad + m.eps_mean() * grad_u.norm_squared())
}

/// Elastic density (L/2) Σ_k tr((∂_k Q)²).
pub fn elastic_density(grad_q: &[QTensor; 3], params: &ModelParams) -> f64 {
    0.5 * params.l_const * grad_q.iter().map(|g| g.tr_q2()).sum::<f64>()
}

/// All three densities at one point.
pub fn energy_densities(
    q: &QTensor,
    grad_q: &[QTensor; 3],
    grad_u: &Vector3<f64>,
    params: &ModelParams,
) -> EnergyDensities {
    EnergyDensities {
        elastic: elastic_density(grad_q, params),
        thermotropic: thermotropic_density(q, params),
        electrostatic: electrostatic_density(q, grad_u, params),
    }
}

/// uᵀ Q u.
fn quad_form(q: &QTensor, u: &Vector3<f64>) -> f64 {
    q.xx() * u.x * u.x
        + q.yy() * u.y * u.y
        + q.zz() * u.z * u.z
        + 2.0 * (q.xy() * u.x * u.y + q.xz() * u.x * u.z + q.yz() * u.y * u.z)
}

/// Thermotropic part of the molecular field, projected traceless:
/// 2A Q + 2B dev(Q²) + cq C tr(Q²) Q.
pub fn bulk_field(q: &QTensor, params: &ModelParams) -> QTensor {
    let m = &params.material;
    let cq = params.quartic_field_factor();
    *q * (2.0 * m.a_coef + cq * m.c_coef * q.tr_q2()) + q.squared_deviatoric() * (2.0 * m.b_coef)
}

/// Electrostatic part of the molecular field at frozen potential gradient:
/// −(ε₀ Δε / (2 s_ref)) dev(∇U ⊗ ∇U).
pub fn electrostatic_field(grad_u: &Vector3<f64>, params: &ModelParams) -> QTensor {
    let u = grad_u;
    let k = -0.5 * EPSILON_0 * params.material.delta_eps / params.s_ref;
    let t3 = u.norm_squared() / 3.0;
    QTensor::new([
        k * (u.x * u.x - t3),
        k * (u.x * u.y),
        k * (u.x * u.z),
        k * (u.y * u.y - t3),
        k * (u.y * u.z),
    ])
}

/// Full molecular field δF/δQ at a grid point, projected traceless.
///
/// `laplacian` is the discrete ∇²Q assembled by the caller from the stencil
/// neighbours; the elastic contribution is −L ∇²Q.
pub fn molecular_field(
    q: &QTensor,
    laplacian: &QTensor,
    grad_u: &Vector3<f64>,
    params: &ModelParams,
) -> QTensor {
    *laplacian * (-params.l_const) + bulk_field(q, params) + electrostatic_field(grad_u, params)
}

/// Jacobian of [`bulk_field`] with respect to the five stored components.
///
/// Column `b` holds the stored components of dH[T_b], where T_b is the basis
/// tensor of a unit change in component `b` (trace compensated through Q33).
/// Used by the implicit treatment of the stiff thermotropic term.
pub fn bulk_jacobian(q: &QTensor, params: &ModelParams) -> [[f64; 5]; 5] {
    let m = &params.material;
    let cq = params.quartic_field_factor();
    let t2 = q.tr_q2();
    let qm = q.to_matrix();
    let mut jac = [[0.0; 5]; 5];
    for b in 0..5 {
        let mut tc = [0.0; 5];
        tc[b] = 1.0;
        let t = QTensor::new(tc);
        // dH[Δ] = 2A Δ + 2B dev(QΔ + ΔQ) + cq C (2 (Q:Δ) Q + tr(Q²) Δ)
        let tm = t.to_matrix();
        let anticomm = qm * tm + tm * qm;
        let dh = t * (2.0 * m.a_coef + cq * m.c_coef * t2)
            + QTensor::deviatoric_part(&anticomm) * (2.0 * m.b_coef)
            + *q * (2.0 * cq * m.c_coef * q.dot(&t));
        let c = dh.components();
        for a in 0..5 {
            jac[a][b] = c[a];
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::builtin_material;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams::new(builtin_material("RDP-84909").unwrap()).unwrap()
    }

    #[test]
    fn zero_state_has_zero_densities() {
        let p = params();
        let d = energy_densities(
            &QTensor::ZERO,
            &[QTensor::ZERO; 3],
            &Vector3::zeros(),
            &p,
        );
        assert_eq!(d.elastic, 0.0);
        assert_eq!(d.thermotropic, 0.0);
        assert_eq!(d.electrostatic, 0.0);
    }

    #[test]
    fn uniform_equilibrium_energy_is_negative() {
        let p = params();
        let q = QTensor::uniaxial(Vector3::x(), p.s_eq).unwrap();
        let d = energy_densities(&q, &[QTensor::ZERO; 3], &Vector3::zeros(), &p);
        assert_eq!(d.elastic, 0.0);
        assert!(d.thermotropic < 0.0);
        assert_relative_eq!(
            d.thermotropic,
            crate::material::uniaxial_thermotropic(&p.material, p.s_eq, p.quartic),
            max_relative = 1e-12
        );
    }

    #[test]
    fn isotropic_electrostatic_density() {
        // ε̃ I with |∇U| = 1e6 V/m gives −(ε₀ ε̃ / 2) 1e12.
        let p = params();
        let grad_u = Vector3::new(0.0, 0.0, 1e6);
        let d = electrostatic_density(&QTensor::ZERO, &grad_u, &p);
        assert_relative_eq!(
            d,
            -0.5 * EPSILON_0 * p.material.eps_mean() * 1e12,
            max_relative = 1e-14
        );
    }

    #[test]
    fn molecular_field_vanishes_at_equilibrium() {
        let p = params();
        let q = QTensor::uniaxial(Vector3::new(0.6, 0.0, 0.8), p.s_eq).unwrap();
        let h = molecular_field(&q, &QTensor::ZERO, &Vector3::zeros(), &p);
        assert!(h.max_abs() < 1e-9, "residual {}", h.max_abs());
    }

    #[test]
    fn molecular_field_is_traceless() {
        let p = params();
        let q = QTensor::new([0.31, -0.12, 0.05, -0.2, 0.4]);
        let lap = QTensor::new([0.5, 1.0, -2.0, 0.1, 0.9]);
        let h = molecular_field(&q, &lap, &Vector3::new(1e5, -2e5, 4e5), &p);
        assert!(h.to_matrix().trace().abs() < 1e-14 * h.max_abs().max(1.0));
    }

    /// Central finite differences of the local density against the bulk and
    /// electrostatic field components.
    #[test]
    fn local_field_matches_density_gradient() {
        let p = params();
        let q0 = QTensor::new([0.21, -0.08, 0.13, -0.11, 0.04]);
        let grad_u = Vector3::new(2e5, -1e5, 8e5);
        let h = bulk_field(&q0, &p) + electrostatic_field(&grad_u, &p);
        let f = |q: &QTensor| thermotropic_density(q, &p) + electrostatic_density(q, &grad_u, &p);
        for b in 0..5 {
            let eps = 1e-7;
            let mut cp = q0.components();
            cp[b] += eps;
            let fp = f(&QTensor::new(cp));
            cp[b] -= 2.0 * eps;
            let fm = f(&QTensor::new(cp));
            let fd = (fp - fm) / (2.0 * eps);
            // Stored-component derivative maps to H : T_b.
            let mut tc = [0.0; 5];
            tc[b] = 1.0;
            let analytic = h.dot(&QTensor::new(tc));
            assert_relative_eq!(fd, analytic, max_relative = 1e-6, epsilon = 1e-4);
        }
    }

    #[test]
    fn bulk_jacobian_matches_finite_differences() {
        let p = params();
        let q0 = QTensor::new([0.15, 0.07, -0.21, 0.02, 0.1]);
        let jac = bulk_jacobian(&q0, &p);
        let eps = 1e-7;
        for b in 0..5 {
            let mut cp = q0.components();
            cp[b] += eps;
            let hp = bulk_field(&QTensor::new(cp), &p);
            cp[b] -= 2.0 * eps;
            let hm = bulk_field(&QTensor::new(cp), &p);
            for a in 0..5 {
                let fd = (hp.components()[a] - hm.components()[a]) / (2.0 * eps);
                assert_relative_eq!(jac[a][b], fd, max_relative = 1e-5, epsilon = 1e-2);
            }
        }
    }

    #[test]
    fn elastic_rule_reproduces_frank_splay_constant() {
        // 2 L S_eq² = K11 under the default rule.
        let p = params();
        assert_relative_eq!(
            2.0 * p.l_const * p.s_eq * p.s_eq,
            p.material.k11,
            max_relative = 1e-12
        );
        let p2 = ModelParams::with_conventions(
            p.material.clone(),
            QuarticConvention::TrQ2Sq,
            ElasticRule::FromMeanK,
            None,
        )
        .unwrap();
        assert_relative_eq!(
            2.0 * p2.l_const * p2.s_eq * p2.s_eq,
            p.material.mean_k(),
            max_relative = 1e-12
        );
    }
}
