//! Small dense complex helpers shared by the receivers and objectives.

use nalgebra::storage::Storage;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector, U1};

use crate::{Error, Result, C64};

pub(crate) type CMat = DMatrix<C64>;
pub(crate) type CVec = DVector<C64>;

/// Largest imaginary part tolerated on a quantity that is real in exact arithmetic.
pub(crate) const RESIDUE_TOL: f64 = 1e-8;

pub(crate) fn cholesky(m: CMat, what: &'static str) -> Result<Cholesky<C64, Dyn>> {
    Cholesky::new(m).ok_or(Error::NotPositiveDefinite(what))
}

/// log2 det of a Hermitian positive definite matrix.
pub(crate) fn log2_det_hpd(m: CMat, what: &'static str) -> Result<f64> {
    let chol = cholesky(m, what)?;
    let l = chol.l_dirty();
    let ln_det: f64 = (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok(ln_det / std::f64::consts::LN_2)
}

/// Takes the real part of a nominally real quantity, rejecting a large imaginary residue.
pub(crate) fn real_part(z: C64, what: &'static str) -> Result<f64> {
    let residue = z.im.abs();
    if residue > RESIDUE_TOL * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue { what, residue });
    }
    Ok(z.re)
}

/// `acc += scale * h * h^H`
pub(crate) fn add_outer<S>(acc: &mut CMat, h: &Vector<C64, Dyn, S>, scale: f64)
where
    S: Storage<C64, Dyn, U1>,
{
    acc.gerc(C64::new(scale, 0.0), h, h, C64::new(1.0, 0.0));
}

/// `h^H u`
pub(crate) fn inner<S1, S2>(h: &Vector<C64, Dyn, S1>, u: &Vector<C64, Dyn, S2>) -> C64
where
    S1: Storage<C64, Dyn, U1>,
    S2: Storage<C64, Dyn, U1>,
{
    h.dotc(u)
}

/// Largest entry of `|A - A^H|`.
#[cfg(test)]
pub(crate) fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(4.0, 0.0),
        ]));
        assert!((log2_det_hpd(m, "diag").unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn outer_product_is_hermitian() {
        let h = CVec::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)]);
        let mut acc = CMat::identity(2, 2);
        add_outer(&mut acc, &h, 3.0);
        assert!(hermitian_defect(&acc) < 1e-15);
        assert!((acc[(0, 0)].re - 16.0).abs() < 1e-14);
    }

    #[test]
    fn residue_rejected() {
        assert!(real_part(C64::new(1.0, 1e-3), "x").is_err());
        assert_eq!(real_part(C64::new(2.0, 1e-12), "x").unwrap(), 2.0);
    }
}
