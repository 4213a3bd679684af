//! Compensated sums and dot products (error-free transformations), for
//! quadratic forms whose terms cancel heavily.

use num_complex::Complex64 as C64;

use super::matrix::{OperatorMatrix, StateVector};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Accumulates `Σ xᵢyᵢ` as if in twice the working precision.
#[derive(Debug, Clone, Copy, Default)]
struct Dot2 {
    hi: f64,
    lo: f64,
}

impl Dot2 {
    fn add_product(&mut self, x: f64, y: f64) {
        let (p, e) = two_prod(x, y);
        let (s, f) = two_sum(self.hi, p);
        self.hi = s;
        self.lo += e + f;
    }

    fn split(self) -> (f64, f64) {
        two_sum(self.hi, self.lo)
    }
}

/// `φ†Aψ` with compensated accumulation; the error is about one rounding of
/// the result plus `ε²` times the sum of absolute terms.
pub fn compensated_sandwich(phi: &StateVector, a: &OperatorMatrix, psi: &StateVector) -> C64 {
    let n = a.dim();
    assert!(phi.len() == n && psi.len() == n, "dimension mismatch in quadratic form");
    let mut re = Dot2::default();
    let mut im = Dot2::default();
    for i in 0..n {
        let (mut vr, mut vi) = (Dot2::default(), Dot2::default());
        for j in 0..n {
            let (g, s) = (a[(i, j)], psi[j]);
            vr.add_product(g.re, s.re);
            vr.add_product(-g.im, s.im);
            vi.add_product(g.re, s.im);
            vi.add_product(g.im, s.re);
        }
        let ((vr_hi, vr_lo), (vi_hi, vi_lo)) = (vr.split(), vi.split());
        let p = phi[i];
        for (vr, vi) in [(vr_hi, vi_hi), (vr_lo, vi_lo)] {
            re.add_product(p.re, vr);
            re.add_product(p.im, vi);
            im.add_product(p.re, vi);
            im.add_product(-p.im, vr);
        }
    }
    C64::new(re.split().0, im.split().0)
}

/// `φ†ψ` with compensated accumulation.
pub fn compensated_dot(phi: &StateVector, psi: &StateVector) -> C64 {
    assert_eq!(phi.len(), psi.len(), "dimension mismatch in inner product");
    let mut re = Dot2::default();
    let mut im = Dot2::default();
    for (p, s) in phi.as_slice().iter().zip(psi.as_slice()) {
        re.add_product(p.re, s.re);
        re.add_product(p.im, s.im);
        im.add_product(p.re, s.im);
        im.add_product(-p.im, s.re);
    }
    C64::new(re.split().0, im.split().0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        let big = 1e16;
        let a = OperatorMatrix::from_real_rows(&[&[big, 1.0], &[-big, 0.0]]).unwrap();
        let one = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        // Row sums are big + 1 and −big; the total is exactly 1.
        assert_eq!(compensated_sandwich(&one, &a, &one), C64::new(1.0, 0.0));
        let naive = one.dot(&a.apply(&one));
        assert_ne!(naive, C64::new(1.0, 0.0));
    }

    #[test]
    fn agrees_with_plain_products_on_benign_input() {
        let a = OperatorMatrix::from_rows(&[vec![C64::new(1.0, 0.5), C64::new(-0.2, 0.1)], vec![
            C64::new(0.3, 0.0),
            C64::new(2.0, -1.0),
        ]])
        .unwrap();
        let phi = StateVector::new(vec![C64::new(0.3, -0.7), C64::new(0.1, 0.2)]).unwrap();
        let psi = StateVector::new(vec![C64::new(-0.4, 0.9), C64::new(0.6, 0.0)]).unwrap();
        assert!((compensated_sandwich(&phi, &a, &psi) - phi.dot(&a.apply(&psi))).norm() < 1e-15);
        assert!((compensated_dot(&phi, &psi) - phi.dot(&psi)).norm() < 1e-15);
    }
}
