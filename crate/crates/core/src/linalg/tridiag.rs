//! Symmetric tridiagonal eigenproblems: implicit QL, Sturm counts.

use crate::error::{Error, Result};

/// Receives the plane rotations performed by [`ql_implicit`].
///
/// A call `rotate(i, c, s)` transforms columns `i` and `i + 1` of the
/// accumulated eigenvector matrix `Z` as
/// `z_{i+1} <- s z_i + c z_{i+1}`, `z_i <- c z_i - s z_{i+1}`.
pub trait RotationSink {
    fn rotate(&mut self, i: usize, c: f64, s: f64);
    /// Permute columns so that column `k` becomes old column `perm[k]`.
    fn permute(&mut self, perm: &[usize]);
}

/// Eigenvalues only.
pub struct NoVectors;

impl RotationSink for NoVectors {
    fn rotate(&mut self, _: usize, _: f64, _: f64) {}
    fn permute(&mut self, _: &[usize]) {}
}

/// One row of `Z`: tracks `v^T Z` for a fixed vector `v`.
pub struct TrackedRow<'a>(pub &'a mut [f64]);

impl RotationSink for TrackedRow<'_> {
    #[inline]
    fn rotate(&mut self, i: usize, c: f64, s: f64) {
        let y = &mut *self.0;
        let f = y[i + 1];
        y[i + 1] = s * y[i] + c * f;
        y[i] = c * y[i] - s * f;
    }
    fn permute(&mut self, perm: &[usize]) {
        let old = self.0.to_vec();
        for (k, &p) in perm.iter().enumerate() {
            self.0[k] = old[p];
        }
    }
}

/// Full row-major `rows x n` matrix whose columns are rotated.
pub struct DenseColumns<'a> {
    pub data: &'a mut [f64],
    pub n: usize,
}

impl RotationSink for DenseColumns<'_> {
    fn rotate(&mut self, i: usize, c: f64, s: f64) {
        for row in self.data.chunks_exact_mut(self.n) {
            let f = row[i + 1];
            row[i + 1] = s * row[i] + c * f;
            row[i] = c * row[i] - s * f;
        }
    }
    fn permute(&mut self, perm: &[usize]) {
        let mut tmp = vec![0.0; self.n];
        for row in self.data.chunks_exact_mut(self.n) {
            for (k, &p) in perm.iter().enumerate() {
                tmp[k] = row[p];
            }
            row.copy_from_slice(&tmp);
        }
    }
}

const MAX_SWEEPS: usize = 60;

/// Diagonalize the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`; length `n - 1`).
///
/// On return `d` holds the eigenvalues in ascending order. Rotations are
/// forwarded to `sink`, followed by the sorting permutation.
pub fn ql_implicit<S: RotationSink>(d: &mut [f64], e: &[f64], sink: &mut S) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    if e.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal off-diagonal has length {} for dimension {n}",
            e.len()
        )));
    }
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    context: format!("implicit QL, eigenvalue {l} of {n}"),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                sink.rotate(i, c, s);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    if perm.iter().enumerate().any(|(k, &p)| k != p) {
        let old = d.to_vec();
        for (k, &p) in perm.iter().enumerate() {
            d[k] = old[p];
        }
        sink.permute(&perm);
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let pivmin = pivot_floor(e);
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(e: &[f64]) -> f64 {
    let emax = e.iter().fold(1.0f64, |m, x| m.max(x * x));
    f64::MIN_POSITIVE * emax
}

/// Gershgorin interval of a tridiagonal matrix.
pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += e[i - 1].abs();
        }
        if i + 1 < n {
            r += e[i].abs();
        }
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
pub fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
