//! Short-iterative Lanczos time propagation.
//!
//! Propagates a state under a real symmetric banded Hamiltonian with
//! `O(m d)` memory for a Krylov dimension `m`. Each step chooses the largest
//! time step whose a-posteriori error estimate `β_m |c_{m-1}(τ)|` stays below
//! the tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::tridiag::{self, DenseColumns};
use crate::model::BandedHamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    /// Bound on the local error per step.
    pub tolerance: f64,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            krylov_dim: 30,
            tolerance: 1e-9,
            max_steps: 10_000_000,
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

struct KrylovSpace {
    basis: Vec<Vec<Complex64>>,
    theta: Vec<f64>,
    /// Row-major `m x m`, columns are Ritz vectors in the Lanczos basis.
    z: Vec<f64>,
    /// Residual norm after the last Lanczos step; zero on breakdown.
    beta_last: f64,
}

impl KrylovSpace {
    fn build(h: &BandedHamiltonian, psi: &[Complex64], m_max: usize) -> Result<Self> {
        let d = psi.len();
        let m_max = m_max.min(d).max(1);
        let scale = h.norm_bound().max(1.0);
        let nrm = norm(psi);
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / nrm).collect()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        let mut beta_last = 0.0;
        for j in 0..m_max {
            h.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if j + 1 == m_max || b <= 1e-13 * scale {
                beta_last = if b <= 1e-13 * scale { 0.0 } else { b };
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut theta = alpha;
        let mut z = vec![0.0; m * m];
        for i in 0..m {
            z[i * m + i] = 1.0;
        }
        tridiag::ql_implicit(
            &mut theta,
            &beta[..m - 1],
            &mut DenseColumns { data: &mut z, n: m },
        )?;
        Ok(KrylovSpace {
            basis,
            theta,
            z,
            beta_last,
        })
    }

    /// Coefficients of `exp(-i T τ) e_1` in the Lanczos basis.
    fn coefficients(&self, tau: f64) -> Vec<Complex64> {
        let m = self.theta.len();
        let phases: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(self.z[k], -self.theta[k] * tau))
            .collect();
        (0..m)
            .map(|j| (0..m).map(|k| phases[k] * self.z[j * m + k]).sum())
            .collect()
    }

    fn error_estimate(&self, c: &[Complex64]) -> f64 {
        self.beta_last * c[c.len() - 1].norm()
    }
}

/// `<psi0| exp(-i H t) |psi0>` for each `t` in `times` (ascending, from 0 or later).
pub fn overlap_trace(
    h: &BandedHamiltonian,
    psi0: &[f64],
    times: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<Complex64>> {
    h.validate()?;
    if psi0.len() != h.dimension() {
        return Err(Error::InvalidInput(format!(
            "state of length {} for a matrix of dimension {}",
            psi0.len(),
            h.dimension()
        )));
    }
    crate::spectra::check_times(times)?;
    let start: Vec<Complex64> = psi0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut psi = start.clone();
    let mut t = 0.0;
    let mut tau_try = f64::INFINITY;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let space = KrylovSpace::build(h, &psi, opts.krylov_dim)?;
            let mut tau = (target - t).min(tau_try);
            let mut c = space.coefficients(tau);
            let mut shrunk = false;
            while space.error_estimate(&c) > opts.tolerance {
                tau *= 0.5;
                shrunk = true;
                if tau < 1e-300 {
                    return Err(Error::NoConvergence {
                        context: "Krylov step size underflow".into(),
                    });
                }
                c = space.coefficients(tau);
            }
            let nrm = norm(&psi);
            let mut next = vec![Complex64::new(0.0, 0.0); psi.len()];
            for (cj, v) in c.iter().zip(&space.basis) {
                let f = cj * nrm;
                next.iter_mut().zip(v).for_each(|(x, y)| *x += f * y);
            }
            psi = next;
            // grow the trial step only when the current one was accepted outright
            if !shrunk && tau == tau_try {
                tau_try *= 1.5;
            } else if shrunk {
                tau_try = tau;
            }
            if tau_try.is_infinite() {
                tau_try = tau;
            }
            t += tau;
            if target - t <= 1e-14 * target.abs().max(1.0) {
                t = target;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NoConvergence {
                    context: format!("Krylov propagation exceeded {} steps", opts.max_steps),
                });
            }
        }
        out.push(dot(&start, &psi));
    }
    Ok(out)
}
