//! 2x2 complex matrix helpers on top of nalgebra.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn mat(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Mat2 {
    Mat2::new(a, b, c, d)
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn sigma1() -> Mat2 {
    mat(ZERO, ONE, ONE, ZERO)
}

pub fn sigma3() -> Mat2 {
    mat(ONE, ZERO, ZERO, -ONE)
}

/// `exp(x sigma3)`.
pub fn exp_sigma3(x: Complex64) -> Mat2 {
    mat(x.exp(), ZERO, ZERO, (-x).exp())
}

pub fn lower(s: Complex64) -> Mat2 {
    mat(ONE, ZERO, s, ONE)
}

pub fn upper(s: Complex64) -> Mat2 {
    mat(ONE, s, ZERO, ONE)
}

pub fn det(m: &Mat2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn inverse(m: &Mat2, what: &'static str) -> Result<Mat2> {
    let d = det(m);
    if d.norm() == 0.0 || !d.is_finite() {
        return Err(Error::SingularMatrix(what));
    }
    Ok(mat(m[(1, 1)] / d, -m[(0, 1)] / d, -m[(1, 0)] / d, m[(0, 0)] / d))
}

/// Entrywise max-norm.
pub fn max_norm(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_pauli() {
        let m = mat(
            Complex64::new(1.0, 2.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(3.0, 0.0),
        );
        let p = m * inverse(&m, "test").unwrap();
        assert!(max_norm(&(p - identity())) < 1e-15);
        assert!(max_norm(&(sigma1() * sigma1() - identity())) == 0.0);
        assert_eq!(sigma3() * sigma3(), identity());
        assert!(inverse(&Mat2::zeros(), "zero").is_err());
    }

    #[test]
    fn diagonal_conjugation_scales_off_diagonal() {
        let e = exp_sigma3(Complex64::new(0.3, 0.1));
        let conj = e * lower(ONE) * inverse(&e, "e").unwrap();
        let want = Complex64::new(-0.6, -0.2).exp();
        assert!((conj[(1, 0)] - want).norm() < 1e-15);
    }
}
