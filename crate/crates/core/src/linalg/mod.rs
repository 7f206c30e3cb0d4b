//! Dense-free linear algebra for the bandwidth-2 Hamiltonian.
//!
//! All routines work in `O(d)` memory except [`eigen_decomposition`], which
//! returns the full eigenvector matrix.

pub mod band;
pub mod tridiag;

use crate::error::Result;
use crate::model::BandedHamiltonian;
use band::{AccumulatedQ, TrackedVector};
use tridiag::{DenseColumns, NoVectors, TrackedRow};

/// Even-`l` and odd-`l` tridiagonal blocks of a matrix with vanishing odd
/// diagonal. Each block is `(diag, offdiag, indices)`.
fn parity_blocks(h: &BandedHamiltonian) -> [(Vec<f64>, Vec<f64>, Vec<usize>); 2] {
    let n = h.dimension();
    let block = |start: usize| {
        let idx: Vec<usize> = (start..n).step_by(2).collect();
        let d: Vec<f64> = idx.iter().map(|&i| h.diag[i]).collect();
        let e: Vec<f64> = idx
            .iter()
            .take(idx.len().saturating_sub(1))
            .map(|&i| h.off2[i])
            .collect();
        (d, e, idx)
    };
    [block(0), block(1)]
}

fn block_matrix(d: &[f64], e: &[f64]) -> BandedHamiltonian {
    BandedHamiltonian {
        diag: d.to_vec(),
        off1: e.to_vec(),
        off2: vec![0.0; d.len().saturating_sub(2)],
    }
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(h: &BandedHamiltonian) -> Result<Vec<f64>> {
    h.validate()?;
    let mut out = Vec::with_capacity(h.dimension());
    if h.is_parity_split() && h.dimension() > 2 {
        for (mut d, e, _) in parity_blocks(h) {
            tridiag::ql_implicit(&mut d, &e, &mut NoVectors)?;
            out.extend(d);
        }
        out.sort_by(f64::total_cmp);
    } else {
        let (mut d, e) = band::tridiagonalize(h, &mut ());
        tridiag::ql_implicit(&mut d, &e, &mut NoVectors)?;
        out = d;
    }
    Ok(out)
}

/// Lowest eigenvalue and its normalized eigenvector.
///
/// When even and odd `l` decouple the ground state is taken from the even
/// block unless the odd block lies strictly lower. In the broken phase the
/// two blocks are degenerate to rounding and a generic solver would return
/// an arbitrary mixture.
pub fn lowest_eigenpair(h: &BandedHamiltonian) -> Result<(f64, Vec<f64>)> {
    h.validate()?;
    let n = h.dimension();
    if h.is_parity_split() && n > 2 {
        let blocks = parity_blocks(h);
        let lows: Vec<f64> = blocks
            .iter()
            .map(|(d, e, _)| tridiag::kth_eigenvalue(d, e, 0))
            .collect();
        let scale = h.norm_bound().max(1.0);
        let pick = if lows[1] < lows[0] - 1e-10 * scale {
            1
        } else {
            0
        };
        let (d, e, idx) = &blocks[pick];
        let v = band::inverse_iteration(&block_matrix(d, e), lows[pick])?;
        let mut full = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = v[k];
        }
        return Ok((lows[pick], full));
    }
    let (d, e) = band::tridiagonalize(h, &mut ());
    let e0 = tridiag::kth_eigenvalue(&d, &e, 0);
    let v = band::inverse_iteration(h, e0)?;
    Ok((e0, v))
}

/// Full eigen-decomposition. Returns ascending eigenvalues and the
/// row-major matrix whose column `k` is the `k`-th eigenvector.
pub fn eigen_decomposition(h: &BandedHamiltonian) -> Result<(Vec<f64>, Vec<f64>)> {
    h.validate()?;
    let n = h.dimension();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let (mut d, e) = band::tridiagonalize(h, &mut AccumulatedQ { q: &mut q, n });
    tridiag::ql_implicit(&mut d, &e, &mut DenseColumns { data: &mut q, n })?;
    Ok((d, q))
}

/// Eigenvalues `E_k` of `h` and weights `|<k|psi>|^2`, in ascending energy
/// order, without forming eigenvectors.
pub fn spectral_weights(h: &BandedHamiltonian, psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    h.validate()?;
    let n = h.dimension();
    assert_eq!(
        psi.len(),
        n,
        "vector length must match the matrix dimension"
    );
    if h.is_parity_split() && n > 2 {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for (mut d, e, idx) in parity_blocks(h) {
            let mut y: Vec<f64> = idx.iter().map(|&i| psi[i]).collect();
            if y.iter().all(|&v| v == 0.0) {
                tridiag::ql_implicit(&mut d, &e, &mut NoVectors)?;
                pairs.extend(d.into_iter().map(|x| (x, 0.0)));
            } else {
                tridiag::ql_implicit(&mut d, &e, &mut TrackedRow(&mut y))?;
                pairs.extend(d.into_iter().zip(y.into_iter().map(|v| v * v)));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(pairs.into_iter().unzip());
    }
    let mut y = psi.to_vec();
    let (mut d, e) = band::tridiagonalize(h, &mut TrackedVector(&mut y));
    tridiag::ql_implicit(&mut d, &e, &mut TrackedRow(&mut y))?;
    let w = y.into_iter().map(|v| v * v).collect();
    Ok((d, w))
}
