//! Two-mode Fock space truncated by total excitation number.
//!
//! Basis states `|n_a, n_b⟩` with `n_a + n_b ≤ n_max`, ordered by total
//! number `N = n_a + n_b` ascending, then by `n_a` ascending. Operators that
//! conserve `N` are block-diagonal with contiguous blocks of size `N + 1`.

use num_complex::Complex64 as C64;

use crate::operator::{OperatorMatrix, StateVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    n_max: usize,
    states: Vec<(usize, usize)>,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Self {
        let states = (0..=n_max).flat_map(|n| (0..=n).map(move |na| (na, n - na))).collect();
        Self { n_max, states }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    /// Position of `|n_a, n_b⟩`, if kept.
    pub fn index(&self, na: usize, nb: usize) -> Option<usize> {
        let n = na + nb;
        (n <= self.n_max).then(|| n * (n + 1) / 2 + na)
    }

    pub fn total(&self, k: usize) -> usize {
        let (na, nb) = self.states[k];
        na + nb
    }

    /// Indices of the block with total number `n`.
    pub fn block(&self, n: usize) -> Vec<usize> {
        assert!(n <= self.n_max, "block {n} is outside the truncation");
        let start = n * (n + 1) / 2;
        (start..start + n + 1).collect()
    }

    /// Indices of every state with total number below the cutoff.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.total(k) < self.n_max).collect()
    }

    pub fn vacuum(&self) -> StateVector {
        StateVector::basis(self.dim(), 0)
    }

    fn ladder(&self, f: impl Fn(usize, usize) -> Option<((usize, usize), f64)>) -> OperatorMatrix {
        let mut m = OperatorMatrix::zeros(self.dim());
        for (col, &(na, nb)) in self.states.iter().enumerate() {
            if let Some(((ma, mb), amp)) = f(na, nb) {
                if let Some(row) = self.index(ma, mb) {
                    m[(row, col)] = C64::new(amp, 0.0);
                }
            }
        }
        m
    }

    pub fn annihilate_a(&self) -> OperatorMatrix {
        self.ladder(|na, nb| (na > 0).then(|| ((na - 1, nb), (na as f64).sqrt())))
    }

    pub fn annihilate_b(&self) -> OperatorMatrix {
        self.ladder(|na, nb| (nb > 0).then(|| ((na, nb - 1), (nb as f64).sqrt())))
    }

    /// Creation operator for mode `a`; states pushed past the cutoff are dropped.
    pub fn create_a(&self) -> OperatorMatrix {
        self.ladder(|na, nb| Some(((na + 1, nb), ((na + 1) as f64).sqrt())))
    }

    pub fn create_b(&self) -> OperatorMatrix {
        self.ladder(|na, nb| Some(((na, nb + 1), ((nb + 1) as f64).sqrt())))
    }

    pub fn number_a(&self) -> OperatorMatrix {
        let d: Vec<f64> = self.states.iter().map(|&(na, _)| na as f64).collect();
        OperatorMatrix::real_diagonal(&d)
    }

    pub fn number_b(&self) -> OperatorMatrix {
        let d: Vec<f64> = self.states.iter().map(|&(_, nb)| nb as f64).collect();
        OperatorMatrix::real_diagonal(&d)
    }

    pub fn number_total(&self) -> OperatorMatrix {
        let d: Vec<f64> = self.states.iter().map(|&(na, nb)| (na + nb) as f64).collect();
        OperatorMatrix::real_diagonal(&d)
    }

    /// Max-norm of `a - b` restricted to the given columns (all rows).
    pub fn column_distance(a: &OperatorMatrix, b: &OperatorMatrix, cols: &[usize]) -> f64 {
        let n = a.dim();
        cols.iter()
            .flat_map(|&j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| (a[(i, j)] - b[(i, j)]).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_by_total_then_na() {
        let f = FockSpace::new(2);
        assert_eq!(f.states(), &[(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        assert_eq!(f.dim(), 6);
        for (k, &(na, nb)) in f.states().iter().enumerate() {
            assert_eq!(f.index(na, nb), Some(k));
        }
        assert_eq!(f.index(2, 1), None);
        assert_eq!(f.block(1), vec![1, 2]);
        assert_eq!(f.interior(), vec![0, 1, 2]);
    }

    #[test]
    fn canonical_commutator_holds_below_cutoff() {
        let f = FockSpace::new(4);
        let id = OperatorMatrix::identity(f.dim());
        for (a, ad) in [(f.annihilate_a(), f.create_a()), (f.annihilate_b(), f.create_b())] {
            assert_eq!(ad, a.adjoint());
            let c = a.commutator(&ad);
            assert!(FockSpace::column_distance(&c, &id, &f.interior()) < 1e-14);
        }
        assert!(f.create_a().matmul(&f.annihilate_a()).distance(&f.number_a()) < 1e-14);
    }
}
