//! Symmetric traceless order tensor of a nematic phase.
//!
//! The state of a nematic at a point is a rank-2 symmetric traceless tensor
//! Q. A uniaxial state with director n and scalar order S is
//! Q = S (n ⊗ n − I/3); S and n are recovered by eigendecomposition
//! (S = 3/2 times the largest eigenvalue, n the matching eigenvector).
//!
//! Only five components are independent; this module stores
//! `[Q11, Q12, Q13, Q22, Q23]` with `Q33 = -Q11 - Q22`, so reconstruction is
//! exactly symmetric and traceless.

use crate::error::Error;
use alloc::format;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use nalgebra::{Matrix3, Vector3};

#[allow(unused_imports)]
use num_traits::Float;

/// Five independent components of a symmetric traceless 3x3 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QTensor {
    c: [f64; 5],
}

impl QTensor {
    /// The isotropic state Q = 0.
    pub const ZERO: QTensor = QTensor { c: [0.0; 5] };

    /// Builds from components `[Q11, Q12, Q13, Q22, Q23]`.
    pub const fn new(c: [f64; 5]) -> Self {
        QTensor { c }
    }

    /// Uniaxial tensor S (n ⊗ n − I/3) for a unit director.
    ///
    /// Fails when `director` is not a unit vector (within 1e-12).
    pub fn uniaxial(director: Vector3<f64>, order: f64) -> Result<Self, Error> {
        let norm = director.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "director must be a unit vector, |n| = {norm}"
            )));
        }
        let n = director;
        Ok(QTensor::new([
            order * (n.x * n.x - 1.0 / 3.0),
            order * (n.x * n.y),
            order * (n.x * n.z),
            order * (n.y * n.y - 1.0 / 3.0),
            order * (n.y * n.z),
        ]))
    }

    /// Takes the symmetric traceless (deviatoric) part of an arbitrary matrix.
    pub fn deviatoric_part(m: &Matrix3<f64>) -> Self {
        let tr3 = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
        QTensor::new([
            m[(0, 0)] - tr3,
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            m[(1, 1)] - tr3,
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        ])
    }

    pub fn components(&self) -> [f64; 5] {
        self.c
    }

    pub fn xx(&self) -> f64 {
        self.c[0]
    }
    pub fn xy(&self) -> f64 {
        self.c[1]
    }
    pub fn xz(&self) -> f64 {
        self.c[2]
    }
    pub fn yy(&self) -> f64 {
        self.c[3]
    }
    pub fn yz(&self) -> f64 {
        self.c[4]
    }
    pub fn zz(&self) -> f64 {
        -self.c[0] - self.c[3]
    }

    /// Full 3x3 matrix; symmetric and traceless by construction.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [q1, q2, q3, q4, q5] = self.c;
        Matrix3::new(q1, q2, q3, q2, q4, q5, q3, q5, -q1 - q4)
    }

    /// Frobenius inner product Σ_ij A_ij B_ij.
    pub fn dot(&self, other: &QTensor) -> f64 {
        let a = self.c;
        let b = other.c;
        a[0] * b[0]
            + a[3] * b[3]
            + (a[0] + a[3]) * (b[0] + b[3])
            + 2.0 * (a[1] * b[1] + a[2] * b[2] + a[4] * b[4])
    }

    /// tr(Q²) = Σ_ij Q_ij².
    pub fn tr_q2(&self) -> f64 {
        self.dot(self)
    }

    /// tr(Q³), evaluated from the matrix product.
    pub fn tr_q3(&self) -> f64 {
        let m = self.to_matrix();
        let m2 = m * m;
        (m2 * m).trace()
    }

    /// tr(Q⁴), evaluated from the matrix product.
    ///
    /// For any traceless symmetric tensor this equals (tr Q²)²/2; the direct
    /// product form is kept so the identity can be checked independently.
    pub fn tr_q4(&self) -> f64 {
        let m = self.to_matrix();
        let m2 = m * m;
        (m2 * m2).trace()
    }

    /// Deviatoric part of Q², i.e. Q² − (tr Q²/3) I.
    pub fn squared_deviatoric(&self) -> QTensor {
        let m = self.to_matrix();
        QTensor::deviatoric_part(&(m * m))
    }

    /// R Q Rᵀ for a rotation (or any) matrix R.
    pub fn rotated(&self, r: &Matrix3<f64>) -> QTensor {
        QTensor::deviatoric_part(&(r * self.to_matrix() * r.transpose()))
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let eig = self.to_matrix().symmetric_eigen();
        let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }

    /// Director and scalar order of the closest uniaxial state:
    /// S = 3/2 λ_max, n the corresponding unit eigenvector.
    ///
    /// The director sign is fixed so that the component of largest magnitude
    /// is non-negative (n and −n are physically identical).
    pub fn director_order(&self) -> (Vector3<f64>, f64) {
        let eig = self.to_matrix().symmetric_eigen();
        let mut imax = 0;
        for i in 1..3 {
            if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        let mut n = Vector3::new(
            eig.eigenvectors[(0, imax)],
            eig.eigenvectors[(1, imax)],
            eig.eigenvectors[(2, imax)],
        );
        n.normalize_mut();
        let mut kmax = 0;
        for k in 1..3 {
            if n[k].abs() > n[kmax].abs() {
                kmax = k;
            }
        }
        if n[kmax] < 0.0 {
            n = -n;
        }
        (n, 1.5 * eig.eigenvalues[imax])
    }

    /// Soft physical-range check: eigenvalues within [−1/3 − tol, 2/3 + tol].
    pub fn is_physical(&self, tol: f64) -> bool {
        let ev = self.eigenvalues();
        ev[0] >= -1.0 / 3.0 - tol && ev[2] <= 2.0 / 3.0 + tol
    }

    /// Largest absolute component; used for residual norms.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.zz().abs();
        for v in self.c {
            m = m.max(v.abs());
        }
        m
    }
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(self, rhs: QTensor) -> QTensor {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        QTensor { c }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(self, rhs: QTensor) -> QTensor {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        QTensor { c }
    }
}

impl AddAssign for QTensor {
    fn add_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl SubAssign for QTensor {
    fn sub_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
    }
}

impl Mul<f64> for QTensor {
    type Output = QTensor;
    fn mul(self, rhs: f64) -> QTensor {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= rhs;
        }
        QTensor { c }
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isotropic_state_is_zero() {
        let q = QTensor::uniaxial(Vector3::z(), 0.0).unwrap();
        assert_eq!(q, QTensor::ZERO);
    }

    #[test]
    fn axis_aligned_uniaxial_components() {
        // n = z, S = 0.6: Q33 = 2S/3 = 0.4, Q11 = Q22 = -0.2, off-diagonals 0.
        let q = QTensor::uniaxial(Vector3::z(), 0.6).unwrap();
        assert_relative_eq!(q.zz(), 0.4, max_relative = 1e-14);
        assert_relative_eq!(q.xx(), -0.2, max_relative = 1e-14);
        assert_relative_eq!(q.yy(), -0.2, max_relative = 1e-14);
        assert_eq!(q.xy(), 0.0);
        assert_eq!(q.xz(), 0.0);
        assert_eq!(q.yz(), 0.0);
    }

    #[test]
    fn non_unit_director_rejected() {
        assert!(QTensor::uniaxial(Vector3::new(0.0, 0.0, 1.1), 0.5).is_err());
    }

    #[test]
    fn director_recovery() {
        let n = Vector3::new(0.6, 0.0, 0.8);
        let q = QTensor::uniaxial(n, 0.55).unwrap();
        let (nr, s) = q.director_order();
        assert_relative_eq!(s, 0.55, max_relative = 1e-12);
        assert_relative_eq!((nr - n).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_is_exact_zero() {
        let q = QTensor::new([0.3, -0.1, 0.2, -0.05, 0.07]);
        assert!(q.to_matrix().trace().abs() < 1e-13);
    }

    #[test]
    fn quartic_trace_identity() {
        // tr(Q⁴) = (tr Q²)²/2 for traceless symmetric Q.
        let samples = [
            QTensor::new([0.3, -0.1, 0.2, -0.05, 0.07]),
            QTensor::new([-0.2, 0.15, 0.01, 0.4, -0.3]),
            QTensor::uniaxial(Vector3::new(0.6, 0.0, 0.8), 0.61).unwrap(),
        ];
        for q in samples {
            assert_relative_eq!(q.tr_q4(), q.tr_q2().powi(2) / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn rotation_conjugates_tensor() {
        let q = QTensor::uniaxial(Vector3::x(), 0.6).unwrap();
        // 90 degrees about y maps x onto -z.
        let r = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        let q_rot = q.rotated(&r);
        let expect = QTensor::uniaxial(Vector3::new(0.0, 0.0, -1.0), 0.6).unwrap();
        for (a, b) in q_rot.components().iter().zip(expect.components()) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }
}
