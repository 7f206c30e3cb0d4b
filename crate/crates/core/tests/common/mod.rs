//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerics; matrices are assembled from operator algebra
//! and diagonalized with nalgebra.

#![allow(dead_code)]

use esqpt::Complex64;
use nalgebra::{DMatrix, SymmetricEigen};

/// Ladder operators on the basis `|l>` (`l` t-bosons, `N-l` s-bosons).
fn t_dag_s(n: usize) -> DMatrix<f64> {
    let d = n + 1;
    let mut m = DMatrix::zeros(d, d);
    for l in 0..n {
        // t† s |l> = sqrt(l+1) sqrt(N-l) |l+1>
        m[(l + 1, l)] = ((l + 1) as f64 * (n - l) as f64).sqrt();
    }
    m
}

fn number_t(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |i, j| if i == j { i as f64 } else { 0.0 })
}

/// `(α+λ) n_t − (1−α) Q Q / N` with `Q = t†s + s†t + ω n_t`, by explicit
/// operator products.
pub fn fock_hamiltonian(alpha: f64, omega: f64, lambda: f64, n: usize) -> DMatrix<f64> {
    let up = t_dag_s(n);
    let nt = number_t(n);
    let q = &up + up.transpose() + &nt * omega;
    &nt * (alpha + lambda) - (&q * &q) * ((1.0 - alpha) / n as f64)
}

pub fn ground_state(h: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let k = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    (
        eig.eigenvalues[k],
        eig.eigenvectors.column(k).iter().copied().collect(),
    )
}

pub fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `exp(-i H t) v` by Taylor steps with `||H|| dt <= 1/4`.
pub fn propagate_taylor(h: &DMatrix<f64>, v: &[Complex64], t: f64) -> Vec<Complex64> {
    let norm = h.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let steps = ((norm * t.abs()) / 0.25).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let d = v.len();
    let mut psi = v.to_vec();
    for _ in 0..steps {
        let mut term = psi.clone();
        let mut acc = psi.clone();
        for k in 1..40 {
            let mut next = vec![Complex64::new(0.0, 0.0); d];
            for i in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    s += term[j] * h[(i, j)];
                }
                next[i] = s * Complex64::new(0.0, -dt / k as f64);
            }
            term = next;
            let small = term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-20;
            for i in 0..d {
                acc[i] += term[i];
            }
            if small {
                break;
            }
        }
        psi = acc;
    }
    psi
}

/// Ground state with the parity convention for degenerate levels: when
/// `ω = 0` the even-`l` sector is used unless the odd one lies lower.
pub fn ground_state_even_first(h: &DMatrix<f64>, omega: f64) -> Vec<f64> {
    let d = h.nrows();
    if omega != 0.0 || d < 3 {
        return ground_state(h).1;
    }
    let sector = |parity: usize| {
        let idx: Vec<usize> = (0..d).filter(|i| i % 2 == parity).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
        let (e, v) = ground_state(&sub);
        let mut full = vec![0.0; d];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = v[k];
        }
        (e, full)
    };
    let (ee, ve) = sector(0);
    let (eo, vo) = sector(1);
    let scale = h.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if eo < ee - 1e-10 * scale {
        vo
    } else {
        ve
    }
}

/// `<g0| exp(-i H1 t) |g0>` from the brute-force matrices.
pub fn dense_overlap(
    alpha: f64,
    omega: f64,
    lambda: f64,
    n: usize,
    times: &[f64],
) -> Vec<Complex64> {
    let h0 = fock_hamiltonian(alpha, omega, 0.0, n);
    let h1 = fock_hamiltonian(alpha, omega, lambda, n);
    let g = ground_state_even_first(&h0, omega);
    let start: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    times
        .iter()
        .map(|&t| {
            let psi = propagate_taylor(&h1, &start, t);
            start.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum()
        })
        .collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Fock amplitudes of `(Γ_g†)^{N-k} (Γ_e†)^k |0>` (normalized), with
/// `Γ_g† = (s† + β t†)/√(1+β²)` and `Γ_e† = (−β s† + t†)/√(1+β²)`.
pub fn condensate(n: usize, beta: f64, k: usize) -> Vec<f64> {
    let p = (1.0 + beta * beta).sqrt();
    // polynomial in t† with coefficients of (s†)^{N-l} (t†)^l
    let mut poly = vec![1.0];
    let mul = |poly: &mut Vec<f64>, cs: f64, ct: f64| {
        let mut out = vec![0.0; poly.len() + 1];
        for (l, &c) in poly.iter().enumerate() {
            out[l] += c * cs;
            out[l + 1] += c * ct;
        }
        *poly = out;
    };
    for _ in 0..n - k {
        mul(&mut poly, 1.0 / p, beta / p);
    }
    for _ in 0..k {
        mul(&mut poly, -beta / p, 1.0 / p);
    }
    let norm = (factorial(n - k) * factorial(k)).sqrt();
    poly.iter()
        .enumerate()
        .map(|(l, c)| c * (factorial(l) * factorial(n - l)).sqrt() / norm)
        .collect()
}

pub fn expectation(h: &DMatrix<f64>, v: &[f64]) -> f64 {
    let x = nalgebra::DVector::from_column_slice(v);
    (x.transpose() * h * &x)[(0, 0)]
}
