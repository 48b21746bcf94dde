//! Low-frequency dielectric tensor of the nematic.

use crate::error::Error;
use crate::material::LCMaterial;
use crate::qtensor::QTensor;
use alloc::format;
use nalgebra::Matrix3;

/// Symmetric 3x3 relative permittivity tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricTensor(pub Matrix3<f64>);

impl DielectricTensor {
    pub fn xx(&self) -> f64 {
        self.0[(0, 0)]
    }
    pub fn xz(&self) -> f64 {
        self.0[(0, 2)]
    }
    pub fn zz(&self) -> f64 {
        self.0[(2, 2)]
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let eig = self.0.symmetric_eigen();
        let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }
}

/// ε = (Δε/s_ref) Q + ε̃ I with ε̃ = (2ε⊥ + ε∥)/3 and ε∥ = ε⊥ + Δε.
///
/// `s_ref` is the scalar order at which Δε was measured; it must be positive.
pub fn dielectric_tensor(
    q: &QTensor,
    material: &LCMaterial,
    s_ref: f64,
) -> Result<DielectricTensor, Error> {
    if s_ref <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "s_ref must be positive, got {s_ref}"
        )));
    }
    let scale = material.delta_eps / s_ref;
    let m = q.to_matrix() * scale + Matrix3::identity() * material.eps_mean();
    Ok(DielectricTensor(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::builtin_material;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn planar_state_zz_is_eps_perp() {
        let m = builtin_material("RDP-84909").unwrap();
        let s = crate::material::equilibrium_order(&m).unwrap();
        let q = QTensor::uniaxial(Vector3::x(), s).unwrap();
        let eps = dielectric_tensor(&q, &m, s).unwrap();
        assert_relative_eq!(eps.zz(), 8.0, epsilon = 1e-12);
        assert_relative_eq!(eps.xx(), 47.1, epsilon = 1e-12);
    }

    #[test]
    fn homeotropic_state_zz_is_eps_par() {
        let m = builtin_material("RDP-84909").unwrap();
        let s = crate::material::equilibrium_order(&m).unwrap();
        let q = QTensor::uniaxial(Vector3::z(), s).unwrap();
        let eps = dielectric_tensor(&q, &m, s).unwrap();
        assert_relative_eq!(eps.zz(), 47.1, epsilon = 1e-12);
    }

    #[test]
    fn isotropic_q_gives_mean_permittivity() {
        let m = builtin_material("E7").unwrap();
        let eps = dielectric_tensor(&QTensor::ZERO, &m, 0.6).unwrap();
        for i in 0..3 {
            assert_relative_eq!(eps.0[(i, i)], m.eps_mean(), max_relative = 1e-14);
            for j in 0..3 {
                if i != j {
                    assert_eq!(eps.0[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_s_ref() {
        let m = builtin_material("E7").unwrap();
        assert!(dielectric_tensor(&QTensor::ZERO, &m, 0.0).is_err());
    }

    #[test]
    fn eigenvalues_stay_within_material_range() {
        // For uniaxial Q with S in [0, s_ref] eigenvalues sit in [ε⊥, ε∥].
        let m = builtin_material("RDP-84909").unwrap();
        let s_ref = crate::material::equilibrium_order(&m).unwrap();
        for k in 0..=10 {
            let s = s_ref * k as f64 / 10.0;
            let n = Vector3::new(0.36, 0.48, 0.8);
            let q = QTensor::uniaxial(n.normalize(), s).unwrap();
            let ev = dielectric_tensor(&q, &m, s_ref).unwrap().eigenvalues();
            assert!(ev[0] >= m.eps_perp - 1e-9);
            assert!(ev[2] <= m.eps_par() + 1e-9);
        }
    }

    #[test]
    fn frame_covariance_under_rotation() {
        let m = builtin_material("BLO48").unwrap();
        let s = 0.55;
        let n = Vector3::new(1.0, 2.0, -1.5).normalize();
        let q = QTensor::uniaxial(n, s).unwrap();
        // 90 degrees about z.
        let r = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let lhs = dielectric_tensor(&q.rotated(&r), &m, s).unwrap().0;
        let rhs = r * dielectric_tensor(&q, &m, s).unwrap().0 * r.transpose();
        assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-13);
    }
}
