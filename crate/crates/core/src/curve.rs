//! The compactified hyperelliptic curve y² = R(z) = ∏(z − E_m), its two
//! sheets, special points and the square-root branch convention.
//!
//! Sheet labels are anchored at infinity: on sheet σ, y(P)/z^{p+1} → −σ as
//! z → ∞, so P∞₊ lies on sheet +1. Numerically the anchor is the reference
//! point z_ref = 1 + 2·max|E_m| where y(z_ref, +1) is evaluated in closed
//! form; every other sheet query analytically continues from there.

use crate::contour::{self, Segment};
use crate::error::{Error, Result};
use crate::C64;

/// Validated curve data: branch points (sorted lexicographically by
/// (Re, Im)), genus p, and g_{p+1} = g_sign · √(∏ E_m).
#[derive(Clone, Debug)]
pub struct CurveSpec {
    branch_points: Vec<C64>,
    genus: usize,
    g_sign: i8,
    g_top: C64,
    scale: f64,
    min_gap: f64,
}

/// A finite point (z, y) on the curve with its anchor-convention sheet label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub z: C64,
    pub sheet: i8,
    pub y: C64,
}

/// The four distinguished points over z = 0 and z = ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedPoint {
    ZeroPlus,
    ZeroMinus,
    InfPlus,
    InfMinus,
}

/// Positive divisor: surface points with multiplicities.
#[derive(Clone, Debug, Default)]
pub struct Divisor {
    pub points: Vec<(SurfacePoint, usize)>,
}

impl Divisor {
    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    /// Witness of specialness: an involution pair {P, P*} (same z, opposite
    /// y) or a branch point of multiplicity >= 2.
    pub fn special_witness(&self, scale: f64) -> Option<(SurfacePoint, SurfacePoint)> {
        let ztol = 1e-9 * scale.max(1.0);
        let flat: Vec<&SurfacePoint> = self
            .points
            .iter()
            .flat_map(|(p, m)| std::iter::repeat(p).take(*m))
            .collect();
        for i in 0..flat.len() {
            for j in (i + 1)..flat.len() {
                let (a, b) = (flat[i], flat[j]);
                if (a.z - b.z).norm() <= ztol {
                    let ynorm = a.y.norm().max(b.y.norm());
                    // Branch point doubled (both y ~ 0) or opposite-y pair.
                    if ynorm <= ztol || (a.y + b.y).norm() <= 1e-6 * ynorm {
                        return Some((*a, *b));
                    }
                }
            }
        }
        None
    }
}

/// Checks the branch-point list and builds the curve.
pub fn validate_spec(branch_points: &[C64], g_sign: i8) -> Result<CurveSpec> {
    let n = branch_points.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddCount(n));
    }
    let scale = branch_points.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let tol = 1e-13 * scale.max(1.0);
    for (m, e) in branch_points.iter().enumerate() {
        if e.norm() <= tol {
            return Err(Error::ZeroBranchPoint(m));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (branch_points[i] - branch_points[j]).norm() <= tol {
                return Err(Error::DuplicateBranchPoint(i, j));
            }
        }
    }
    let mut sorted = branch_points.to_vec();
    sorted.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let min_gap = {
        let mut d = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.min((sorted[i] - sorted[j]).norm());
            }
        }
        d
    };
    let prod = sorted.iter().fold(C64::new(1.0, 0.0), |acc, &e| acc * e);
    let g_top = C64::from(g_sign as f64) * prod.sqrt();
    Ok(CurveSpec {
        branch_points: sorted,
        genus: n / 2 - 1,
        g_sign,
        g_top,
        scale,
        min_gap,
    })
}

impl CurveSpec {
    pub fn branch_points(&self) -> &[C64] {
        &self.branch_points
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn g_sign(&self) -> i8 {
        self.g_sign
    }

    /// g_{p+1}, the value of y at P₀₊.
    pub fn g_top(&self) -> C64 {
        self.g_top
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Minimum admissible distance of paths from branch points.
    pub fn eps_bp(&self) -> f64 {
        1e-9 * self.scale.max(1.0)
    }

    /// R(z) = ∏ (z − E_m).
    pub fn r_eval(&self, z: C64) -> C64 {
        self.branch_points
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &e| acc * (z - e))
    }

    /// ∏_{k≠m} (z − E_k).
    pub fn r_eval_skip(&self, z: C64, skip: usize) -> C64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .fold(C64::new(1.0, 0.0), |acc, (_, &e)| acc * (z - e))
    }

    pub fn branch_index_near(&self, z: C64) -> Option<usize> {
        let tol = 1e-13 * self.scale.max(1.0);
        self.branch_points.iter().position(|&e| (z - e).norm() <= tol)
    }

    /// Sheet anchor: (z_ref, y(z_ref) on sheet +1).
    pub fn anchor(&self) -> (C64, C64) {
        let z_ref = C64::new(1.0 + 2.0 * self.scale, 0.0);
        // y(+1) = -z_ref^{p+1} ∏ √(1 - E_m/z_ref); each factor is near 1 so
        // the principal branch is unambiguous and the square holds exactly.
        let mut y = -z_ref.powu(self.genus as u32 + 1);
        for &e in &self.branch_points {
            y *= (C64::new(1.0, 0.0) - e / z_ref).sqrt();
        }
        (z_ref, y)
    }

    /// y at (z, sheet), continued from the anchor along a straight segment
    /// with deterministic left-side detours around branch points.
    pub fn y_on_sheet(&self, z: C64, sheet: i8) -> Result<C64> {
        if let Some(m) = self.branch_index_near(z) {
            return Err(Error::AtBranchPoint(m));
        }
        let (z_ref, y_plus) = self.anchor();
        let y0 = if sheet >= 0 { y_plus } else { -y_plus };
        if (z - z_ref).norm() == 0.0 {
            return Ok(y0);
        }
        let segs = self.detoured_segment(z_ref, z);
        let traced = contour::trace(self, &segs, contour::StartAux::Y(y0))?;
        Ok(traced.y_end(self).expect("finite endpoint"))
    }

    /// Nearest-match sheet label for a given y at z; error if ambiguous
    /// beyond 1e-6 relative.
    pub fn sheet_of_y(&self, z: C64, y: C64) -> Result<i8> {
        let yp = self.y_on_sheet(z, 1)?;
        let dp = (y - yp).norm();
        let dm = (y + yp).norm();
        if dp.min(dm) > 1e-6 * yp.norm().max(1e-300) {
            return Err(Error::SheetAmbiguous(z));
        }
        Ok(if dp <= dm { 1 } else { -1 })
    }

    pub fn surface_point(&self, z: C64, sheet: i8) -> Result<SurfacePoint> {
        let y = self.y_on_sheet(z, sheet)?;
        Ok(SurfacePoint { z, sheet, y })
    }

    /// P₀± = (0, ±g_{p+1}); the sheet is computed, not asserted.
    pub fn p_zero(&self, sign: i8) -> Result<SurfacePoint> {
        let y = if sign >= 0 { self.g_top } else { -self.g_top };
        let sheet = self.sheet_of_y(C64::new(0.0, 0.0), y)?;
        Ok(SurfacePoint { z: C64::new(0.0, 0.0), sheet, y })
    }

    /// Straight segment with semicircular detours around interior branch
    /// points; detours always taken on the left of the travel direction.
    pub fn detoured_segment(&self, from: C64, to: C64) -> Vec<Segment> {
        let dir = (to - from) / (to - from).norm();
        let len = (to - from).norm();
        let trigger = 0.08 * self.min_gap;
        let mut hits: Vec<(f64, usize)> = Vec::new();
        for (m, &e) in self.branch_points.iter().enumerate() {
            let t = ((e - from).re * dir.re + (e - from).im * dir.im) / len;
            if t > 0.02 && t < 0.98 {
                let foot = from + dir * (t * len);
                if (e - foot).norm() < trigger {
                    hits.push((t, m));
                }
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut segs = Vec::new();
        let mut cursor = from;
        for (t, m) in hits {
            let e = self.branch_points[m];
            let foot = from + dir * (t * len);
            let d = (e - foot).norm();
            let r = trigger;
            let delta = (r * r - d * d).max(0.0).sqrt();
            let pa = foot - dir * delta;
            let pb = foot + dir * delta;
            if (pa - cursor).norm() > 1e-14 * self.scale.max(1.0) {
                segs.push(Segment::Line { from: cursor, to: pa });
            }
            let th_a = (pa - e).arg();
            let th_b = (pb - e).arg();
            let ccw_span = {
                let mut s = th_b - th_a;
                while s <= 0.0 {
                    s += 2.0 * std::f64::consts::PI;
                }
                s
            };
            // Midpoint of the ccw arc; keep it on the left of `dir`.
            let mid = e + C64::from_polar((pa - e).norm(), th_a + 0.5 * ccw_span);
            let cross = dir.re * (mid - foot).im - dir.im * (mid - foot).re;
            let (t0, t1) = if cross > 0.0 {
                (th_a, th_a + ccw_span)
            } else {
                (th_a, th_a - (2.0 * std::f64::consts::PI - ccw_span))
            };
            segs.push(Segment::Arc { center: e, radius: (pa - e).norm(), th0: t0, th1: t1 });
            cursor = pb;
        }
        if (to - cursor).norm() > 0.0 {
            segs.push(Segment::Line { from: cursor, to });
        }
        segs
    }
}

/// The sheet involution *: (z, y) → (z, −y), exchanging P∞₊ ↔ P∞₋.
pub fn involute(p: SurfacePoint) -> SurfacePoint {
    SurfacePoint { z: p.z, sheet: -p.sheet, y: -p.y }
}

pub fn involute_named(p: NamedPoint) -> NamedPoint {
    match p {
        NamedPoint::ZeroPlus => NamedPoint::ZeroMinus,
        NamedPoint::ZeroMinus => NamedPoint::ZeroPlus,
        NamedPoint::InfPlus => NamedPoint::InfMinus,
        NamedPoint::InfMinus => NamedPoint::InfPlus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validate_examples() {
        let spec = validate_spec(&[c(1.0, 0.0), c(4.0, 0.0)], 1).unwrap();
        assert_eq!(spec.genus(), 0);
        assert!((spec.g_top() - c(2.0, 0.0)).norm() < 1e-14);

        match validate_spec(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1) {
            Err(Error::DuplicateBranchPoint(_, _)) => {}
            other => panic!("expected duplicate error, got {other:?}"),
        }
        match validate_spec(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1) {
            Err(Error::ZeroBranchPoint(_)) => {}
            other => panic!("expected zero error, got {other:?}"),
        }
        match validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 1) {
            Err(Error::OddCount(3)) => {}
            other => panic!("expected odd count, got {other:?}"),
        }
    }

    #[test]
    fn g_top_squares_to_product() {
        let pts = [c(1.0, 0.5), c(-2.0, 1.0), c(0.5, -3.0), c(4.0, 0.0)];
        let spec = validate_spec(&pts, -1).unwrap();
        let prod = pts.iter().fold(c(1.0, 0.0), |a, &e| a * e);
        assert!((spec.g_top() * spec.g_top() - prod).norm() <= 1e-14 * prod.norm());
    }

    #[test]
    fn y_on_sheet_defining_identity() {
        let spec = validate_spec(&[c(1.0, 0.0), c(4.0, 0.0)], 1).unwrap();
        let z = c(9.0, 0.0);
        let y = spec.y_on_sheet(z, 1).unwrap();
        assert!((y * y - c(40.0, 0.0)).norm() < 1e-12 * 40.0);
        // sheet +1 behaves like -z^{p+1} for large real z
        assert!(y.re < 0.0);
        let ym = spec.y_on_sheet(z, -1).unwrap();
        assert!((y + ym).norm() < 1e-12 * y.norm());
    }

    #[test]
    fn y_at_zero_genus_one() {
        let spec =
            validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
        let y = spec.y_on_sheet(c(0.0, 0.0), 1).unwrap();
        assert!((y.norm() - 24f64.sqrt()).abs() < 1e-10);
        assert!((y * y - c(24.0, 0.0)).norm() < 1e-10 * 24.0);
    }

    #[test]
    fn involution_facts() {
        let spec =
            validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
        let p = spec.surface_point(c(9.0, 0.0), 1).unwrap();
        let q = involute(p);
        assert_eq!(q.z, p.z);
        assert_eq!(q.y, -p.y);
        assert_eq!(involute(q), p);

        let p0p = spec.p_zero(1).unwrap();
        let p0m = spec.p_zero(-1).unwrap();
        assert_eq!(involute(p0p).y, p0m.y);
        assert_eq!(involute(p0p).sheet, p0m.sheet);
        // membership: y² = R(0)
        let r0 = spec.r_eval(c(0.0, 0.0));
        assert!((p0p.y * p0p.y - r0).norm() <= 1e-12 * (1.0 + r0.norm()));
    }

    #[test]
    fn surface_point_on_curve_relative() {
        let pts = [c(1.0, 0.5), c(-2.0, 1.0), c(0.5, -3.0), c(4.0, 0.0)];
        let spec = validate_spec(&pts, 1).unwrap();
        for &z in &[c(0.3, 0.8), c(-5.0, 0.2), c(2.0, 2.0)] {
            let p = spec.surface_point(z, -1).unwrap();
            let r = spec.r_eval(z);
            assert!((p.y * p.y - r).norm() / (1.0 + r.norm()) <= 1e-12);
        }
    }

    #[test]
    fn divisor_specialness() {
        let spec =
            validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
        let p = spec.surface_point(c(5.0, 0.0), 1).unwrap();
        let special = Divisor { points: vec![(p, 1), (involute(p), 1)] };
        assert!(special.special_witness(spec.scale()).is_some());
        let q = spec.surface_point(c(7.0, 0.0), 1).unwrap();
        let fine = Divisor { points: vec![(p, 1), (q, 1)] };
        assert!(fine.special_witness(spec.scale()).is_none());
        let e0 = SurfacePoint { z: c(1.0, 0.0), sheet: 1, y: c(0.0, 0.0) };
        let doubled = Divisor { points: vec![(e0, 2)] };
        assert!(doubled.special_witness(spec.scale()).is_some());
    }
}
