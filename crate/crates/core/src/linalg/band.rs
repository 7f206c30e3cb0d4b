//! Bandwidth-2 symmetric matrices: reduction to tridiagonal form and
//! shifted solves.

use crate::error::{Error, Result};
use crate::model::BandedHamiltonian;

/// Lower band of width 3 (two diagonals plus room for one bulge).
/// `b[k][j]` holds `A[j + k][j]`.
struct Band3 {
    n: usize,
    b: [Vec<f64>; 4],
}

impl Band3 {
    fn from_banded(h: &BandedHamiltonian) -> Self {
        let n = h.dimension();
        let mut b = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        b[0].copy_from_slice(&h.diag);
        b[1][..n - 1].copy_from_slice(&h.off1);
        b[2][..n.saturating_sub(2)].copy_from_slice(&h.off2);
        Band3 { n, b }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > 3 {
            0.0
        } else {
            self.b[k][c]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > 3 {
            debug_assert!(v == 0.0, "fill outside the band at ({r}, {c})");
            return;
        }
        self.b[k][c] = v;
    }

    /// Similarity transform by the rotation acting on rows/columns `p` and
    /// `p + 1` as `[c s; -s c]`.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let q = p + 1;
        let lo = p.saturating_sub(3);
        let hi = (q + 4).min(self.n);
        for m in lo..hi {
            if m == p || m == q {
                continue;
            }
            let x = self.get(p, m);
            let y = self.get(q, m);
            if x == 0.0 && y == 0.0 {
                continue;
            }
            self.set(p, m, c * x + s * y);
            self.set(q, m, -s * x + c * y);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(q, p);
        let cs = c * s;
        self.set(p, p, c * c * app + 2.0 * cs * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * cs * apq + c * c * aqq);
        self.set(q, p, (c * c - s * s) * apq + cs * (aqq - app));
    }
}

/// Receives the rotations of the band reduction.
pub trait ReductionSink {
    fn rotate(&mut self, p: usize, c: f64, s: f64);
}

impl ReductionSink for () {
    fn rotate(&mut self, _: usize, _: f64, _: f64) {}
}

/// Tracks `Q^T v` for a vector `v`.
pub struct TrackedVector<'a>(pub &'a mut [f64]);

impl ReductionSink for TrackedVector<'_> {
    #[inline]
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let v = &mut *self.0;
        let (x, y) = (v[p], v[p + 1]);
        v[p] = c * x + s * y;
        v[p + 1] = -s * x + c * y;
    }
}

/// Accumulates the orthogonal `Q` with `A = Q T Q^T` (row-major `n x n`).
pub struct AccumulatedQ<'a> {
    pub q: &'a mut [f64],
    pub n: usize,
}

impl ReductionSink for AccumulatedQ<'_> {
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        for row in self.q.chunks_exact_mut(self.n) {
            let (x, y) = (row[p], row[p + 1]);
            row[p] = c * x + s * y;
            row[p + 1] = -s * x + c * y;
        }
    }
}

/// Reduce a bandwidth-2 matrix to tridiagonal form with Givens rotations,
/// chasing each bulge off the end of the band.
///
/// Returns `(d, e)` with `e[i] = T[i + 1][i]`.
pub fn tridiagonalize<S: ReductionSink>(
    h: &BandedHamiltonian,
    sink: &mut S,
) -> (Vec<f64>, Vec<f64>) {
    let n = h.dimension();
    let mut a = Band3::from_banded(h);
    for j in 0..n.saturating_sub(2) {
        let mut col = j;
        let mut p = j + 1;
        loop {
            let q = p + 1;
            if q >= n {
                break;
            }
            let y = a.get(q, col);
            if y == 0.0 {
                break;
            }
            let x = a.get(p, col);
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            a.rotate(p, c, s);
            a.set(q, col, 0.0);
            sink.rotate(p, c, s);
            // the rotation pushed a bulge to (p + 3, p)
            if p + 3 >= n {
                break;
            }
            col = p;
            p += 2;
        }
    }
    let d = a.b[0].clone();
    let e = a.b[1][..n - 1].to_vec();
    (d, e)
}

/// Banded Cholesky factor of `H - sigma I` (lower, bandwidth 2).
struct BandCholesky {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandCholesky {
    fn factor(h: &BandedHamiltonian, sigma: f64) -> Option<Self> {
        let n = h.dimension();
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            if i >= 2 {
                l2[i] = h.off2[i - 2] / l0[i - 2];
            }
            if i >= 1 {
                let mut v = h.off1[i - 1];
                if i >= 2 {
                    v -= l2[i] * l1[i - 1];
                }
                l1[i] = v / l0[i - 1];
            }
            let piv = h.diag[i] - sigma - l1[i] * l1[i] - l2[i] * l2[i];
            if !(piv > 0.0) {
                return None;
            }
            l0[i] = piv.sqrt();
        }
        Some(BandCholesky { l0, l1, l2 })
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let mut v = x[i];
            if i >= 1 {
                v -= self.l1[i] * x[i - 1];
            }
            if i >= 2 {
                v -= self.l2[i] * x[i - 2];
            }
            x[i] = v / self.l0[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= self.l1[i + 1] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.l2[i + 2] * x[i + 2];
            }
            x[i] = v / self.l0[i];
        }
    }
}

/// Eigenvector for the lowest eigenvalue `e0` by inverse iteration.
///
/// The sign is fixed so that the largest component is positive.
pub fn inverse_iteration(h: &BandedHamiltonian, e0: f64) -> Result<Vec<f64>> {
    let n = h.dimension();
    let scale = h.norm_bound().max(1.0);
    let mut delta = 1e-10 * scale;
    let chol = loop {
        if let Some(c) = BandCholesky::factor(h, e0 - delta) {
            break c;
        }
        delta *= 10.0;
        if delta > 1e-2 * scale {
            return Err(Error::NoConvergence {
                context: "inverse iteration could not factor the shifted matrix".into(),
            });
        }
    };
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev = x.clone();
    for _ in 0..50 {
        chol.solve(&mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical(
                "inverse iteration produced a null vector".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v /= norm);
        fix_sign(&mut x);
        let diff = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < 1e-14 {
            return Ok(x);
        }
        prev.copy_from_slice(&x);
    }
    // converged to rounding noise; check the residual instead
    let mut hx = vec![0.0; n];
    h.apply(&x, &mut hx);
    let res = hx
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - e0 * b).abs())
        .fold(0.0, f64::max);
    if res < 1e-9 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            context: format!("inverse iteration residual {res:e}"),
        })
    }
}

fn fix_sign(x: &mut [f64]) {
    let big = x
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if big < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}
