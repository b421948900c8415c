//! Period matrices: a-periods of the holomorphic basis, the normalized
//! basis, and the b-period matrix τ (symmetric, Im τ > 0).

use nalgebra::DMatrix;

use crate::contour::{self, Differential, Homology, StartAux};
use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct PeriodData {
    /// C_{j,k} = ∫_{a_k} η_j, j,k = 1..p.
    pub c_matrix: DMatrix<C64>,
    /// Rows of C⁻¹; ω_j = Σ_ℓ c_rows[j][ℓ] η_{ℓ+1}.
    pub c_rows: Vec<Vec<C64>>,
    /// τ_{j,ℓ} = ∫_{b_ℓ} ω_j.
    pub tau: DMatrix<C64>,
    /// ∫_{a_k} z^p dz/(2y), used by the third-kind normalization.
    pub v_row: Vec<C64>,
    /// Smallest eigenvalue of Im τ.
    pub min_eig_im_tau: f64,
    /// Residual of the re-integrated normalization ∫_{a_k} ω_j − δ_{jk}.
    pub normalization_residual: f64,
    /// ‖τ − τᵀ‖∞.
    pub symmetry_residual: f64,
}

pub fn cycle_trace(
    spec: &CurveSpec,
    segs: &[contour::Segment],
) -> Result<contour::TracedPath> {
    let z0 = segs[0].z_at(0.0).unwrap();
    let y0 = spec.r_eval(z0).sqrt();
    contour::trace(spec, segs, StartAux::Y(y0))
}

/// Computes periods over the given homology. If Im τ comes out negative
/// definite the b-cycles are reversed in place and τ negated.
pub fn compute_periods(spec: &CurveSpec, hom: &mut Homology, tol: f64) -> Result<PeriodData> {
    let p = spec.genus();
    assert!(p >= 1, "periods require genus >= 1");

    // a-periods of η_1..η_{p+1}
    let mut a_per = vec![vec![C64::new(0.0, 0.0); p]; p + 1];
    let mut a_traced = Vec::with_capacity(p);
    for k in 0..p {
        a_traced.push(cycle_trace(spec, &hom.a_cycles[k])?);
    }
    for j in 0..=p {
        let d = Differential::eta(spec, j + 1);
        for k in 0..p {
            a_per[j][k] = a_traced[k].integrate(spec, &d, tol)?;
        }
    }
    let c_matrix = DMatrix::from_fn(p, p, |j, k| a_per[j][k]);
    let c_inv = c_matrix.clone().lu().try_inverse().ok_or(Error::SingularC)?;
    let c_rows: Vec<Vec<C64>> = (0..p)
        .map(|j| (0..p).map(|l| c_inv[(j, l)]).collect())
        .collect();
    let v_row: Vec<C64> = (0..p).map(|k| 0.5 * a_per[p][k]).collect();

    // b-periods of η, then τ = C⁻¹ · Bper
    let mut b_traced = Vec::with_capacity(p);
    for l in 0..p {
        b_traced.push(cycle_trace(spec, &hom.b_cycles[l])?);
    }
    let mut b_per = DMatrix::from_element(p, p, C64::new(0.0, 0.0));
    for j in 0..p {
        let d = Differential::eta(spec, j + 1);
        for l in 0..p {
            b_per[(j, l)] = b_traced[l].integrate(spec, &d, tol)?;
        }
    }
    let mut tau = &c_inv * &b_per;

    // Orientation fix: a uniformly reversed b-basis flips the sign of τ.
    let eig_bounds = |t: &DMatrix<C64>| -> (f64, f64) {
        let im = DMatrix::from_fn(p, p, |i, j| 0.5 * (t[(i, j)].im + t[(j, i)].im));
        let eig = im.symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    };
    let (mut min_eig, max_eig) = eig_bounds(&tau);
    if max_eig < 0.0 {
        contour::flip_b_cycles(hom);
        tau = -tau;
        min_eig = -max_eig;
    } else if min_eig <= 0.0 {
        return Err(Error::HomologyInvalid(format!(
            "Im tau indefinite: eigenvalues in [{min_eig:.3e}, {max_eig:.3e}]"
        )));
    }

    let mut symmetry_residual = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            symmetry_residual = symmetry_residual.max((tau[(i, j)] - tau[(j, i)]).norm());
        }
    }
    if symmetry_residual > 1e-8 {
        return Err(Error::HomologyInvalid(format!(
            "tau asymmetric by {symmetry_residual:.3e}"
        )));
    }

    // Independent re-check of the normalization on offset contours.
    let mut normalization_residual = 0.0f64;
    {
        let cuts = contour::build_cuts(spec, None)?;
        for k in 0..p {
            let segs = contour::stadium(&cuts.cuts[k], 1.15 * hom.margin);
            let tp = cycle_trace(spec, &segs)?;
            for j in 0..p {
                let d = Differential::holomorphic(spec, &c_rows[j]);
                let got = tp.integrate(spec, &d, tol)?;
                let want = if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                normalization_residual = normalization_residual.max((got - want).norm());
            }
        }
    }
    if normalization_residual > 1e-8 {
        return Err(Error::SingularC);
    }

    Ok(PeriodData {
        c_matrix,
        c_rows,
        tau,
        v_row,
        min_eig_im_tau: min_eig,
        normalization_residual,
        symmetry_residual,
    })
}
