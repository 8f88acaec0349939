//! Closed-form 2×2 complex linear algebra.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// A vector in the two-dimensional complex Hilbert space.
pub type Vec2 = [C64; 2];

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Scalar product `(φ, ψ) = Σ φ(x) conj(ψ(x))`, linear in the first slot.
pub fn inner(phi: &Vec2, psi: &Vec2) -> C64 {
    phi[0] * psi[0].conj() + phi[1] * psi[1].conj()
}

pub fn norm_sqr(phi: &Vec2) -> f64 {
    phi[0].norm_sqr() + phi[1].norm_sqr()
}

pub fn vec_distance(a: &Vec2, b: &Vec2) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}

pub fn scale(s: C64, v: &Vec2) -> Vec2 {
    [s * v[0], s * v[1]]
}

pub fn vec_add(a: &Vec2, b: &Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zeros() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Mat2([[d0, ZERO], [ZERO, d1]])
    }

    pub fn real_diag(d0: f64, d1: f64) -> Self {
        Self::diag(C64::new(d0, 0.0), C64::new(d1, 0.0))
    }

    /// `u v†`.
    pub fn outer(u: &Vec2, v: &Vec2) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = u[i] * v[j].conj();
            }
        }
        m
    }

    /// Matrix whose columns are `c0`, `c1`.
    pub fn from_columns(c0: &Vec2, c1: &Vec2) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn column(&self, j: usize) -> Vec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ‖M − M†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).frobenius()
    }

    /// ‖M†M − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).frobenius()
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

/// Spectral decomposition of a self-adjoint 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors matching `values`.
    pub vectors: [Vec2; 2],
}

/// Closed-form eigendecomposition. Assumes `m` is self-adjoint; only the
/// upper triangle and the real parts of the diagonal are read.
pub fn hermitian_eigen(m: &Mat2) -> HermitianEigen {
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    let c = m.0[0][1];
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let radius = half_gap.hypot(c.norm());
    let values = [mean - radius, mean + radius];

    if c.norm() <= f64::EPSILON * (a.abs() + d.abs()).max(f64::MIN_POSITIVE) {
        return if a <= d {
            HermitianEigen {
                values: [a, d],
                vectors: [[ONE, ZERO], [ZERO, ONE]],
            }
        } else {
            HermitianEigen {
                values: [d, a],
                vectors: [[ZERO, ONE], [ONE, ZERO]],
            }
        };
    }

    let vector_for = |lambda: f64| -> Vec2 {
        // Two equivalent null vectors of (M − λ); take the better conditioned.
        let first = [c, C64::new(lambda - a, 0.0)];
        let second = [C64::new(lambda - d, 0.0), c.conj()];
        let v = if norm_sqr(&first) >= norm_sqr(&second) {
            first
        } else {
            second
        };
        let n = norm_sqr(&v).sqrt();
        [v[0] / n, v[1] / n]
    };

    HermitianEigen {
        values,
        vectors: [vector_for(values[0]), vector_for(values[1])],
    }
}

/// `exp(−i s H)` for self-adjoint `H`, via its spectral decomposition.
pub fn expm_hermitian(h: &Mat2, s: f64) -> Mat2 {
    let eig = hermitian_eigen(h);
    let mut out = Mat2::zeros();
    for k in 0..2 {
        let phase = C64::from_polar(1.0, -s * eig.values[k]);
        out = out + Mat2::outer(&eig.vectors[k], &eig.vectors[k]).scale(phase);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_residuals_small() {
        let m = Mat2([[c(2.0, 0.0), c(0.3, -0.4)], [c(0.3, 0.4), c(-1.0, 0.0)]]);
        let eig = hermitian_eigen(&m);
        for k in 0..2 {
            let v = eig.vectors[k];
            let mv = m.apply(&v);
            let lv = scale(c(eig.values[k], 0.0), &v);
            assert!(vec_distance(&mv, &lv) < 1e-14);
            assert!((norm_sqr(&v) - 1.0).abs() < 1e-14);
        }
        assert!(inner(&eig.vectors[0], &eig.vectors[1]).norm() < 1e-14);
        assert!(eig.values[0] <= eig.values[1]);
    }

    #[test]
    fn diagonal_eigen_is_canonical() {
        let eig = hermitian_eigen(&Mat2::real_diag(3.0, -1.0));
        assert_eq!(eig.values, [-1.0, 3.0]);
        assert_eq!(eig.vectors[0], [ZERO, ONE]);
    }

    #[test]
    fn expm_of_diagonal() {
        let u = expm_hermitian(&Mat2::real_diag(0.0, 1.0), std::f64::consts::PI);
        let expected = Mat2::real_diag(1.0, -1.0);
        assert!((u - expected).frobenius() < 1e-15);
    }

    #[test]
    fn expm_is_unitary_and_additive() {
        let h = Mat2([[c(0.5, 0.0), c(0.1, 0.7)], [c(0.1, -0.7), c(1.5, 0.0)]]);
        let u1 = expm_hermitian(&h, 0.4);
        let u2 = expm_hermitian(&h, 1.1);
        let u12 = expm_hermitian(&h, 1.5);
        assert!(u1.unitarity_defect() < 1e-14);
        assert!((u1 * u2 - u12).frobenius() < 1e-14);
    }
}
