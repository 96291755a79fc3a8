//! Dense complex matrices and the Hermitian eigensolver used throughout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry of `|m - m†|`, relative to the largest entry of `|m|`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues ascending, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigensystem {
    pub fn new(h: &CMat) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(h.nrows(), order.len(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Eigensystem { values, vectors }
    }

    /// `exp(-i H tau) psi`.
    pub fn propagate(&self, psi: &CVec, tau: f64) -> CVec {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (k, z) in coeffs.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -self.values[k] * tau);
        }
        &self.vectors * coeffs
    }

    /// `exp(-i H tau)` as a matrix.
    pub fn propagator(&self, tau: f64) -> CMat {
        let n = self.values.len();
        let phases = CVec::from_fn(n, |k, _| C64::from_polar(1.0, -self.values[k] * tau));
        let scaled = CMat::from_fn(self.vectors.nrows(), n, |i, k| {
            self.vectors[(i, k)] * phases[k]
        });
        scaled * self.vectors.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigensystem_of_pauli_x() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let e = Eigensystem::new(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let u = e.propagator(std::f64::consts::PI);
        // exp(-i pi X) = -1
        assert!(max_abs_diff(&u, &(-CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn complex_hermitian_residual() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), I, -I, c(2.0)]);
        assert!(hermiticity_residual(&m) < 1e-15);
        let e = Eigensystem::new(&m);
        for k in 0..2 {
            let v = e.vectors.column(k).into_owned();
            let r = &m * &v - v.clone() * c(e.values[k]);
            assert!(r.norm() < 1e-12);
        }
        let bad = CMat::from_row_slice(2, 2, &[c(1.0), I, I, c(2.0)]);
        assert!(hermiticity_residual(&bad) > 0.5);
    }
}
