//! The Riemann theta function θ(z) = Σ_{n ∈ Z^p} exp(2πi(n,z) + πi(n,nτ))
//! with the conjugating scalar product (u,v) = Σ ū_j v_j, sup-norm shell
//! truncation and lattice reduction of arguments.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

const MAX_RADIUS: usize = 60;

#[derive(Clone, Debug)]
pub struct ThetaParams {
    pub tau: DMatrix<C64>,
    pub tol: f64,
    dim: usize,
    im_tau_inv: DMatrix<f64>,
    pub min_eig_im_tau: f64,
}

/// (u, v) = Σ conj(u_j) v_j.
pub fn scalar_product(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

impl ThetaParams {
    pub fn new(tau: DMatrix<C64>, tol: f64) -> Result<ThetaParams> {
        assert!(tol > 0.0);
        let dim = tau.nrows();
        assert!(dim >= 1 && tau.ncols() == dim);
        let im = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (tau[(i, j)].im + tau[(j, i)].im));
        let eig = im.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig <= 0.0 {
            return Err(Error::NonconvergentTau(format!(
                "Im tau not positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        let im_tau_inv = im
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::NonconvergentTau("Im tau singular".into()))?;
        Ok(ThetaParams { tau, tol, dim, im_tau_inv, min_eig_im_tau: min_eig })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// (nτ)_j = Σ_k n_k τ_{k,j} for a row vector n.
    fn n_tau(&self, n: &[f64]) -> Vec<C64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|k| self.tau[(k, j)] * n[k]).sum())
            .collect()
    }

    /// Raw truncated sum with shells ‖n‖∞ ≤ radius; returns the value and
    /// the last shell's contribution as a tail indicator.
    pub fn theta_with_radius(&self, z: &[C64], radius: usize) -> (C64, f64) {
        let mut acc = crate::num::Kahan::new();
        let mut last_shell = 0.0;
        for r in 0..=radius {
            let shell = self.shell_sum(z, r);
            last_shell = shell.norm();
            acc.add(shell);
        }
        (acc.value(), last_shell)
    }

    fn shell_sum(&self, z: &[C64], r: usize) -> C64 {
        let mut acc = crate::num::Kahan::new();
        let ri = r as i64;
        let mut n = vec![-ri; self.dim];
        loop {
            if n.iter().any(|&x| x.abs() == ri) || r == 0 {
                let nf: Vec<f64> = n.iter().map(|&x| x as f64).collect();
                let nc: Vec<C64> = nf.iter().map(|&x| C64::new(x, 0.0)).collect();
                let ntau = self.n_tau(&nf);
                let ex = C64::new(0.0, 2.0 * std::f64::consts::PI) * scalar_product(&nc, z)
                    + C64::new(0.0, std::f64::consts::PI) * scalar_product(&nc, &ntau);
                acc.add(ex.exp());
            }
            if r == 0 {
                break;
            }
            // advance the odometer over [-r, r]^dim
            let mut i = 0;
            loop {
                if i == self.dim {
                    return acc.value();
                }
                n[i] += 1;
                if n[i] > ri {
                    n[i] = -ri;
                    i += 1;
                } else {
                    break;
                }
            }
        }
        acc.value()
    }

    /// θ(z) with the shell radius grown until two consecutive shells fall
    /// below the relative tolerance.
    pub fn theta(&self, z: &[C64]) -> Result<C64> {
        assert_eq!(z.len(), self.dim);
        let mut acc = crate::num::Kahan::new();
        let mut small_streak = 0;
        for r in 0..=MAX_RADIUS {
            let shell = self.shell_sum(z, r);
            acc.add(shell);
            let scale = acc.value().norm().max(1e-300);
            if r >= 3 && shell.norm() <= self.tol * scale {
                small_streak += 1;
                if small_streak >= 2 {
                    return Ok(acc.value());
                }
            } else {
                small_streak = 0;
            }
        }
        Err(Error::NonconvergentTau(format!(
            "theta sum did not converge within radius {MAX_RADIUS}"
        )))
    }

    /// Nearest-lattice reduction z → z + m + nτ with the exact compensation
    /// log L so that θ(z) = exp(L)·θ(z_reduced).
    pub fn reduce(&self, z: &[C64]) -> Reduction {
        let dim = self.dim;
        let im_z = nalgebra::RowDVector::from_fn(dim, |_, j| z[j].im);
        let x = &im_z * &self.im_tau_inv; // solves x · Im τ = Im z
        let n_shift: Vec<f64> = (0..dim).map(|j| -(x[j].round())).collect();
        let ntau = self.n_tau(&n_shift);
        let m_shift: Vec<f64> = (0..dim).map(|j| -((z[j] + ntau[j]).re.round())).collect();
        let reduced: Vec<C64> = (0..dim)
            .map(|j| z[j] + ntau[j] + C64::new(m_shift[j], 0.0))
            .collect();
        // θ(z) = exp(2πi(n0,z) + πi(n0,n0τ)) θ(z + m0 + n0τ)
        let nc: Vec<C64> = n_shift.iter().map(|&x| C64::new(x, 0.0)).collect();
        let log_comp = C64::new(0.0, 2.0 * std::f64::consts::PI) * scalar_product(&nc, z)
            + C64::new(0.0, std::f64::consts::PI) * scalar_product(&nc, &ntau);
        Reduction {
            reduced,
            log_comp,
            m: m_shift.iter().map(|&x| x as i64).collect(),
            n: n_shift.iter().map(|&x| x as i64).collect(),
        }
    }

    /// θ at the lattice-reduced argument plus the exact compensation log:
    /// θ(z) = exp(log_comp) · value.
    pub fn theta_reduced(&self, z: &[C64]) -> Result<ReducedTheta> {
        let red = self.reduce(z);
        let value = self.theta(&red.reduced)?;
        Ok(ReducedTheta { value, log_comp: red.log_comp, m: red.m, n: red.n })
    }

    /// Distance from v to the nearest lattice vector m + nτ (sup over
    /// components), with the reduction recorded.
    pub fn dist_mod_lattice(&self, v: &[C64]) -> f64 {
        let red = self.reduce(v);
        red.reduced.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: Vec<C64>,
    pub log_comp: C64,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ReducedTheta {
    pub value: C64,
    pub log_comp: C64,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
}
