//! Eigen-solvers: cyclic Jacobi for Hermitian matrices, complex Schur
//! (via nalgebra) for general spectra.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::matrix::OperatorMatrix;

/// Eigen-decomposition `A = V diag(values) V†` of a Hermitian matrix.
/// Values are sorted ascending; `vectors` holds the eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(Λ) V†` for a real spectral function `f`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> OperatorMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        OperatorMatrix::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum())
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi on the Hermitian part `(A + A†)/2`.
pub fn eigh(a: &OperatorMatrix) -> HermitianEigen {
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = OperatorMatrix::identity(n);
    let scale = m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = OperatorMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

fn rotate(m: &mut OperatorMatrix, v: &mut OperatorMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = m.dim();
    let phase = apq / r;
    let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q).
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    for k in 0..n {
        let (akp, akq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = akp * jpp + akq * jqp;
        m[(k, q)] = akp * jpq + akq * jqq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    for k in 0..n {
        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}

/// Eigenvalues of a general complex matrix from its complex Schur form,
/// sorted by real part, then imaginary part.
pub fn eigenvalues(a: &OperatorMatrix) -> Vec<C64> {
    let n = a.dim();
    let dm = DMatrix::from_row_slice(n, n, a.as_slice());
    let schur = nalgebra::linalg::Schur::new(dm);
    let (_, t) = schur.unpack();
    let mut vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    sort_spectrum(&mut vals);
    vals
}

pub fn sort_spectrum(vals: &mut [C64]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Distance between two spectra as multisets: each value of `a` is matched
/// greedily to the nearest unused value of `b`, and the largest matching
/// distance is returned. Independent of sort order, so near-degenerate pairs
/// that swap under roundoff do not inflate the result.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .expect("spectra have equal length");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}
