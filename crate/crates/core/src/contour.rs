//! Paths on the curve: analytic continuation of y along segments, adaptive
//! contour quadrature of meromorphic differentials, branch cuts and the
//! canonical homology basis.
//!
//! A path is a list of segments; besides plain lines and circular arcs there
//! are two local-coordinate leg kinds for endpoints at a branch point
//! (u = √(z − E_m), so y = u·s(u) with s² = ∏_{k≠m}(E_m + u² − E_k)) and at
//! infinity (ζ = 1/z, so y = w(ζ)/ζ^{p+1} with w² = ∏(1 − E_m ζ)). All three
//! reduce to continuing the square root of an explicit polynomial along a
//! 1-D trace, which `march` does with steps controlled by the logarithmic
//! derivative bound Σ 1/|c − root|.

use std::cell::RefCell;

use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::num::{dist_point_segment, dist_segment_segment, gk15, Kahan};
use crate::poly::Poly;
use crate::C64;

const ARG_STEP: f64 = std::f64::consts::PI / 6.0;
const MAX_HALVINGS: u32 = 40;

#[derive(Clone, Debug)]
pub enum Segment {
    Line { from: C64, to: C64 },
    Arc { center: C64, radius: f64, th0: f64, th1: f64 },
    /// z = e + u², straight in the u coordinate.
    BranchLeg { e: C64, u0: C64, u1: C64 },
    /// z = 1/ζ, straight in the ζ coordinate.
    InfLeg { zeta0: C64, zeta1: C64 },
    /// z = 1/ζ, circular arc around ζ = 0.
    InfArc { radius: f64, th0: f64, th1: f64 },
}

/// Coordinate family a segment marches in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegKind {
    Plain,
    Branch(C64),
    Inf,
}

impl Segment {
    pub fn kind(&self) -> SegKind {
        match *self {
            Segment::Line { .. } | Segment::Arc { .. } => SegKind::Plain,
            Segment::BranchLeg { e, .. } => SegKind::Branch(e),
            Segment::InfLeg { .. } | Segment::InfArc { .. } => SegKind::Inf,
        }
    }

    /// Marching coordinate at parameter t ∈ [0, 1].
    pub fn coord(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc { center, radius, th0, th1 } => {
                center + C64::from_polar(radius, th0 + (th1 - th0) * t)
            }
            Segment::BranchLeg { u0, u1, .. } => u0 + (u1 - u0) * t,
            Segment::InfLeg { zeta0, zeta1 } => zeta0 + (zeta1 - zeta0) * t,
            Segment::InfArc { radius, th0, th1 } => {
                C64::from_polar(radius, th0 + (th1 - th0) * t)
            }
        }
    }

    /// d(coord)/dt.
    pub fn dcoord(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc { center: _, radius, th0, th1 } => {
                C64::from_polar(radius, th0 + (th1 - th0) * t + std::f64::consts::FRAC_PI_2)
                    * (th1 - th0)
            }
            Segment::BranchLeg { u0, u1, .. } => u1 - u0,
            Segment::InfLeg { zeta0, zeta1 } => zeta1 - zeta0,
            Segment::InfArc { radius, th0, th1 } => {
                C64::from_polar(radius, th0 + (th1 - th0) * t + std::f64::consts::FRAC_PI_2)
                    * (th1 - th0)
            }
        }
    }

    /// Point in the z-plane (None for the exact infinity endpoint).
    pub fn z_at(&self, t: f64) -> Option<C64> {
        match self.kind() {
            SegKind::Plain => Some(self.coord(t)),
            SegKind::Branch(e) => {
                let u = self.coord(t);
                Some(e + u * u)
            }
            SegKind::Inf => {
                let zeta = self.coord(t);
                if zeta.norm() == 0.0 {
                    None
                } else {
                    Some(zeta.inv())
                }
            }
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { center, radius, th0, th1 } => {
                Segment::Arc { center, radius, th0: th1, th1: th0 }
            }
            Segment::BranchLeg { e, u0, u1 } => Segment::BranchLeg { e, u0: u1, u1: u0 },
            Segment::InfLeg { zeta0, zeta1 } => Segment::InfLeg { zeta0: zeta1, zeta1: zeta0 },
            Segment::InfArc { radius, th0, th1 } => Segment::InfArc { radius, th0: th1, th1: th0 },
        }
    }
}

/// Tracked polynomial F and its roots in the marching coordinate, so that
/// aux(t)² = F(coord(t)) along the segment.
struct TrackedSqrt {
    roots: Vec<C64>,
    lead: C64,
}

impl TrackedSqrt {
    fn for_segment(spec: &CurveSpec, seg: &Segment) -> TrackedSqrt {
        match seg.kind() {
            SegKind::Plain => TrackedSqrt {
                roots: spec.branch_points().to_vec(),
                lead: C64::new(1.0, 0.0),
            },
            SegKind::Branch(e) => {
                // F(u) = ∏_{k≠m} (u² − (E_k − e)); roots ±√(E_k − e).
                let mut roots = Vec::new();
                for &ek in spec.branch_points() {
                    if (ek - e).norm() == 0.0 {
                        continue;
                    }
                    let r = (ek - e).sqrt();
                    roots.push(r);
                    roots.push(-r);
                }
                TrackedSqrt { roots, lead: C64::new(1.0, 0.0) }
            }
            SegKind::Inf => {
                // F(ζ) = ∏ (1 − E_m ζ) = ∏(−E_m) ∏(ζ − 1/E_m).
                let mut lead = C64::new(1.0, 0.0);
                let mut roots = Vec::new();
                for &e in spec.branch_points() {
                    lead *= -e;
                    roots.push(e.inv());
                }
                TrackedSqrt { roots, lead }
            }
        }
    }

    fn eval(&self, c: C64) -> C64 {
        self.roots.iter().fold(self.lead, |acc, &r| acc * (c - r))
    }

    fn rate(&self, c: C64) -> f64 {
        self.roots.iter().map(|&r| 1.0 / (c - r).norm().max(1e-300)).sum()
    }

    fn min_dist(&self, c: C64) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, &r) in self.roots.iter().enumerate() {
            let d = (c - r).norm();
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }
}

/// Continuation record on one segment: aux values at increasing t.
#[derive(Clone, Debug)]
pub struct SegRecord {
    pub ts: Vec<f64>,
    pub aux: Vec<C64>,
}

fn march(spec: &CurveSpec, seg: &Segment, aux0: C64) -> Result<SegRecord> {
    let tracked = TrackedSqrt::for_segment(spec, seg);
    let eps = match seg.kind() {
        SegKind::Plain => spec.eps_bp(),
        _ => 1e-14,
    };
    let mut ts = vec![0.0];
    let mut aux = vec![aux0];
    let mut t = 0.0f64;
    let mut f_prev = tracked.eval(seg.coord(0.0));
    if f_prev.norm() == 0.0 {
        // Start exactly at a root only happens for BranchLeg u0 = 0, where the
        // tracked polynomial has no root at 0; plain segments must not.
        return Err(Error::TooCloseToBranchPoint { index: 0, dist: 0.0, min: eps });
    }
    while t < 1.0 {
        let c = seg.coord(t);
        let (d, idx) = tracked.min_dist(c);
        if d < eps {
            return Err(Error::TooCloseToBranchPoint { index: idx, dist: d, min: eps });
        }
        let speed = seg.dcoord(t).norm().max(1e-300);
        let mut dt = (ARG_STEP / tracked.rate(c) / speed).min(0.05).min(1.0 - t);
        let mut ok = false;
        for _ in 0..MAX_HALVINGS {
            let tn = t + dt;
            let cn = seg.coord(tn);
            let fn_ = tracked.eval(cn);
            if fn_.norm() > 0.0 && (fn_ / f_prev).arg().abs() <= std::f64::consts::FRAC_PI_2 {
                let s = fn_.sqrt();
                let prev = *aux.last().unwrap();
                let next = if (s - prev).norm() <= (s + prev).norm() { s } else { -s };
                ts.push(tn);
                aux.push(next);
                t = tn;
                f_prev = fn_;
                ok = true;
                break;
            }
            dt *= 0.5;
        }
        if !ok {
            return Err(Error::TooCloseToBranchPoint { index: 0, dist: 0.0, min: eps });
        }
    }
    Ok(SegRecord { ts, aux })
}

impl SegRecord {
    /// aux at parameter t via one-step continuation from the nearest
    /// recorded checkpoint.
    fn query(&self, tracked: &TrackedSqrt, seg: &Segment, t: f64) -> C64 {
        let k = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.aux[i],
            Err(i) => i,
        };
        let anchor = if k == 0 {
            0
        } else if k >= self.ts.len() {
            self.ts.len() - 1
        } else if t - self.ts[k - 1] <= self.ts[k] - t {
            k - 1
        } else {
            k
        };
        let s = tracked.eval(seg.coord(t)).sqrt();
        let prev = self.aux[anchor];
        if (s - prev).norm() <= (s + prev).norm() {
            s
        } else {
            -s
        }
    }
}

/// Initial continuation value for a path.
#[derive(Clone, Copy, Debug)]
pub enum StartAux {
    /// y value at the start (plain segments, or local legs away from the
    /// singular end).
    Y(C64),
    /// Raw aux value in the first segment's own coordinate (s for a branch
    /// leg starting at u = 0, w for an infinity leg starting at ζ = 0).
    Aux(C64),
}

/// A path with its continuation record; immutable once traced.
#[derive(Clone, Debug)]
pub struct TracedPath {
    pub segs: Vec<Segment>,
    recs: Vec<SegRecord>,
}

/// Converts the aux value at the end of `seg` into a y value in z terms.
fn aux_to_y(spec: &CurveSpec, seg: &Segment, t: f64, aux: C64) -> Option<C64> {
    match seg.kind() {
        SegKind::Plain => Some(aux),
        SegKind::Branch(_) => {
            let u = seg.coord(t);
            if u.norm() == 0.0 {
                None
            } else {
                Some(u * aux)
            }
        }
        SegKind::Inf => {
            let zeta = seg.coord(t);
            if zeta.norm() == 0.0 {
                None
            } else {
                Some(aux / zeta.powu(spec.genus() as u32 + 1))
            }
        }
    }
}

/// Converts a y value into the aux coordinate of `seg` at parameter t.
fn y_to_aux(spec: &CurveSpec, seg: &Segment, t: f64, y: C64) -> Option<C64> {
    match seg.kind() {
        SegKind::Plain => Some(y),
        SegKind::Branch(_) => {
            let u = seg.coord(t);
            if u.norm() == 0.0 {
                None
            } else {
                Some(y / u)
            }
        }
        SegKind::Inf => {
            let zeta = seg.coord(t);
            if zeta.norm() == 0.0 {
                None
            } else {
                Some(y * zeta.powu(spec.genus() as u32 + 1))
            }
        }
    }
}

/// Runs analytic continuation along all segments of a path.
pub fn trace(spec: &CurveSpec, segs: &[Segment], start: StartAux) -> Result<TracedPath> {
    assert!(!segs.is_empty());
    let mut recs = Vec::with_capacity(segs.len());
    let mut aux0 = match start {
        StartAux::Aux(a) => a,
        StartAux::Y(y) => y_to_aux(spec, &segs[0], 0.0, y)
            .expect("StartAux::Y at a singular local-coordinate origin; pass StartAux::Aux"),
    };
    for (i, seg) in segs.iter().enumerate() {
        let rec = march(spec, seg, aux0)?;
        if i + 1 < segs.len() {
            let y = aux_to_y(spec, seg, 1.0, *rec.aux.last().unwrap())
                .expect("interior path junction at singular point");
            aux0 = y_to_aux(spec, &segs[i + 1], 0.0, y)
                .expect("interior path junction at singular point");
        }
        recs.push(rec);
    }
    Ok(TracedPath { segs: segs.to_vec(), recs })
}

impl TracedPath {
    pub fn y_start(&self, spec: &CurveSpec) -> Option<C64> {
        aux_to_y(spec, &self.segs[0], 0.0, self.recs[0].aux[0])
    }

    pub fn y_end(&self, spec: &CurveSpec) -> Option<C64> {
        let seg = self.segs.last().unwrap();
        let rec = self.recs.last().unwrap();
        aux_to_y(spec, seg, 1.0, *rec.aux.last().unwrap())
    }

    /// Final aux value in the last segment's own coordinate.
    pub fn aux_end(&self) -> C64 {
        *self.recs.last().unwrap().aux.last().unwrap()
    }

    /// The involution image: same z trace, negated continuation record.
    pub fn mirrored(&self) -> TracedPath {
        TracedPath {
            segs: self.segs.clone(),
            recs: self
                .recs
                .iter()
                .map(|r| SegRecord {
                    ts: r.ts.clone(),
                    aux: r.aux.iter().map(|&a| -a).collect(),
                })
                .collect(),
        }
    }

    /// ∫ of the differential along the path, to absolute tolerance `tol`.
    pub fn integrate(&self, spec: &CurveSpec, d: &Differential, tol: f64) -> Result<C64> {
        Ok(self.integrate_prefix(spec, d, tol, &[self.segs.len() - 1])?[0])
    }

    /// Cumulative integrals up to the end of each marked segment index
    /// (marks strictly increasing).
    pub fn integrate_prefix(
        &self,
        spec: &CurveSpec,
        d: &Differential,
        tol: f64,
        marks: &[usize],
    ) -> Result<Vec<C64>> {
        let nseg = self.segs.len();
        let tol_seg = tol / nseg as f64;
        let pole: RefCell<Option<Error>> = RefCell::new(None);
        let mut acc = Kahan::new();
        let mut err_total = 0.0;
        let mut out = Vec::with_capacity(marks.len());
        let mut mark_iter = marks.iter().peekable();
        for (i, seg) in self.segs.iter().enumerate() {
            let tracked = TrackedSqrt::for_segment(spec, seg);
            let rec = &self.recs[i];
            let g = |t: f64| -> C64 {
                let aux = rec.query(&tracked, seg, t);
                let jac = seg.dcoord(t);
                match seg.kind() {
                    SegKind::Plain => d.eval_z(spec, seg.coord(t), aux, &pole) * jac,
                    SegKind::Branch(e) => d.eval_branch(spec, e, seg.coord(t), aux, &pole) * jac,
                    SegKind::Inf => d.eval_inf(spec, seg.coord(t), aux, &pole) * jac,
                }
            };
            let (v, e) = adaptive(&g, 0.0, 1.0, tol_seg, 0);
            if let Some(err) = pole.borrow_mut().take() {
                return Err(err);
            }
            acc.add(v);
            err_total += e;
            while let Some(&&m) = mark_iter.peek() {
                if m == i {
                    out.push(acc.value());
                    mark_iter.next();
                } else {
                    break;
                }
            }
        }
        if err_total > 10.0 * tol {
            return Err(Error::ToleranceNotReached { got: err_total, want: tol });
        }
        Ok(out)
    }

    /// Sub-path consisting of segments [lo, hi) with their records.
    pub fn slice(&self, lo: usize, hi: usize) -> TracedPath {
        TracedPath { segs: self.segs[lo..hi].to_vec(), recs: self.recs[lo..hi].to_vec() }
    }

    /// Adaptive integration of a caller-supplied integrand; `g` receives
    /// (segment index, segment, t, continued aux) and must include the
    /// coordinate jacobian. Used for regularized integrands near punctures.
    pub fn integrate_custom(
        &self,
        spec: &CurveSpec,
        tol: f64,
        g: &dyn Fn(usize, &Segment, f64, C64) -> C64,
    ) -> Result<C64> {
        let tol_seg = tol / self.segs.len() as f64;
        let mut acc = Kahan::new();
        let mut err_total = 0.0;
        for (i, seg) in self.segs.iter().enumerate() {
            let tracked = TrackedSqrt::for_segment(spec, seg);
            let rec = &self.recs[i];
            let h = |t: f64| -> C64 {
                let aux = rec.query(&tracked, seg, t);
                g(i, seg, t, aux)
            };
            let (v, e) = adaptive(&h, 0.0, 1.0, tol_seg, 0);
            acc.add(v);
            err_total += e;
        }
        if err_total > 10.0 * tol {
            return Err(Error::ToleranceNotReached { got: err_total, want: tol });
        }
        Ok(acc.value())
    }

    /// Continuation checkpoints of segment i as (t, y) pairs in z terms,
    /// for cumulative integrals along cycles.
    pub fn checkpoints(&self, spec: &CurveSpec, i: usize) -> Vec<(f64, C64)> {
        let seg = &self.segs[i];
        let rec = &self.recs[i];
        rec.ts
            .iter()
            .zip(&rec.aux)
            .map(|(&t, &a)| (t, aux_to_y(spec, seg, t, a).expect("cycle stays finite")))
            .collect()
    }

    /// y at parameter t of segment i.
    pub fn y_at(&self, spec: &CurveSpec, i: usize, t: f64) -> C64 {
        let seg = &self.segs[i];
        let tracked = TrackedSqrt::for_segment(spec, seg);
        let aux = self.recs[i].query(&tracked, seg, t);
        aux_to_y(spec, seg, t, aux).expect("finite point")
    }
}

fn adaptive(g: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64, depth: u32) -> (C64, f64) {
    let (v, e) = gk15(|t| g(t), a, b);
    if e <= tol * 0.9 || depth >= 45 {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (vl, el) = adaptive(g, a, m, tol * 0.5, depth + 1);
    let (vr, er) = adaptive(g, m, b, tol * 0.5, depth + 1);
    (vl + vr, el + er)
}

/// Meromorphic differential of the shared rational shape
/// ω = (N(z) + M·y) / (2·y·D(z)) dz with M constant and D ∈ {1, z}.
///
/// Covers the holomorphic basis η_j = z^{j−1} dz/y (N = 2z^{j−1}),
/// normalized combinations, the third-kind differentials
/// (y + y₀₋)/(2yz) dz ∓ Λ(z)/(2y) dz, and dz/z.
#[derive(Clone, Debug)]
pub struct Differential {
    n: Poly,
    m: C64,
    d_is_z: bool,
    /// Ñ(ζ) = N(1/ζ)·ζ^{p+1}.
    n_inf: Poly,
    /// Ñ(ζ)/ζ² when N has degree ≤ p−1 (holomorphic at infinity, D = 1).
    n_inf_shift2: Option<Poly>,
    p1: u32,
}

impl Differential {
    pub fn build(spec: &CurveSpec, n: Poly, m: C64, d_is_z: bool) -> Differential {
        let p1 = spec.genus() + 1;
        assert!(n.degree() <= p1, "N degree exceeds p+1");
        let mut rev = vec![C64::new(0.0, 0.0); p1 + 1];
        for k in 0..=n.degree() {
            rev[p1 - k] = n.coeff(k);
        }
        let n_inf = Poly::new(rev.clone());
        let n_inf_shift2 = if !d_is_z && m.norm() == 0.0 && rev[0].norm() == 0.0 && rev[1].norm() == 0.0
        {
            Some(Poly::new(rev[2..].to_vec()))
        } else {
            None
        };
        Differential { n, m, d_is_z, n_inf, n_inf_shift2, p1: p1 as u32 }
    }

    /// η_j = z^{j−1} dz / y, j = 1..p+1.
    pub fn eta(spec: &CurveSpec, j: usize) -> Differential {
        Differential::build(spec, Poly::monomial(C64::new(2.0, 0.0), j - 1), C64::new(0.0, 0.0), false)
    }

    /// ω = Σ_ℓ c_ℓ η_{ℓ+1}.
    pub fn holomorphic(spec: &CurveSpec, c_row: &[C64]) -> Differential {
        let n = Poly::new(c_row.iter().map(|&c| c * 2.0).collect());
        Differential::build(spec, n, C64::new(0.0, 0.0), false)
    }

    /// ω⁽³⁾ with poles at P₀₋ and P∞_± : N = y₀₋ − t·z·Λ(z), M = 1, D = z,
    /// where t = +1 targets P∞₊ and t = −1 targets P∞₋.
    pub fn third_kind(spec: &CurveSpec, lambda_monic: &Poly, t: f64) -> Differential {
        let y0m = -spec.g_top();
        let n = Poly::constant(y0m).sub(&lambda_monic.mul(&Poly::monomial(C64::new(t, 0.0), 1)));
        Differential::build(spec, n, C64::new(1.0, 0.0), true)
    }

    pub fn dz_over_z(spec: &CurveSpec) -> Differential {
        Differential::build(spec, Poly::zero(), C64::new(2.0, 0.0), true)
    }

    fn eval_z(&self, spec: &CurveSpec, z: C64, y: C64, pole: &RefCell<Option<Error>>) -> C64 {
        let dval = if self.d_is_z { z } else { C64::new(1.0, 0.0) };
        let den = 2.0 * y * dval;
        if den.norm() < 1e-13 * spec.scale().max(1.0) {
            *pole.borrow_mut() = Some(Error::PoleOnPath(den.norm(), z));
            return C64::new(0.0, 0.0);
        }
        (self.n.eval(z) + self.m * y) / den
    }

    fn eval_branch(&self, _spec: &CurveSpec, e: C64, u: C64, s: C64, pole: &RefCell<Option<Error>>) -> C64 {
        // dz = 2u du and y = u s cancel one factor of u:
        // (N + M u s) / (s D(z)) du
        let z = e + u * u;
        let dval = if self.d_is_z { z } else { C64::new(1.0, 0.0) };
        let den = s * dval;
        if den.norm() < 1e-13 {
            *pole.borrow_mut() = Some(Error::PoleOnPath(den.norm(), z));
            return C64::new(0.0, 0.0);
        }
        (self.n.eval(z) + self.m * u * s) / den
    }

    fn eval_inf(&self, _spec: &CurveSpec, zeta: C64, w: C64, pole: &RefCell<Option<Error>>) -> C64 {
        // −[Ñ(ζ) + M w] / (2 w ζ² D(1/ζ))
        if let Some(sh) = &self.n_inf_shift2 {
            return -sh.eval(zeta) / (2.0 * w);
        }
        let den = if self.d_is_z {
            2.0 * w * zeta
        } else {
            2.0 * w * zeta * zeta
        };
        if den.norm() < 1e-250 {
            *pole.borrow_mut() = Some(Error::PoleOnPath(den.norm(), zeta));
            return C64::new(0.0, 0.0);
        }
        -(self.n_inf.eval(zeta) + self.m * w) / den
    }

    /// Public plain-coordinate evaluation (z finite, y on the curve).
    pub fn eval_plain(
        &self,
        spec: &CurveSpec,
        z: C64,
        y: C64,
        pole: &RefCell<Option<Error>>,
    ) -> C64 {
        self.eval_z(spec, z, y, pole)
    }

    pub fn p1(&self) -> u32 {
        self.p1
    }
}

// ---------------------------------------------------------------------------
// Cuts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct Cut {
    pub a: C64,
    pub b: C64,
}

impl Cut {
    pub fn mid(&self) -> C64 {
        0.5 * (self.a + self.b)
    }
    pub fn dir(&self) -> C64 {
        (self.b - self.a) / (self.b - self.a).norm()
    }
    pub fn normal(&self) -> C64 {
        C64::new(0.0, 1.0) * self.dir()
    }
}

#[derive(Clone, Debug)]
pub struct CutSystem {
    pub cuts: Vec<Cut>,
    /// Offset used by cycles: 0.1 · min pairwise branch distance.
    pub margin: f64,
}

/// Builds the g+1 nonintersecting cuts. Default pairing joins consecutive
/// points of the lexicographically sorted list; an explicit pairing is a
/// perfect matching by sorted indices.
pub fn build_cuts(spec: &CurveSpec, pairing: Option<&[(usize, usize)]>) -> Result<CutSystem> {
    let pts = spec.branch_points();
    let n = pts.len();
    let pairs: Vec<(usize, usize)> = match pairing {
        None => (0..n / 2).map(|j| (2 * j, 2 * j + 1)).collect(),
        Some(p) => {
            let mut seen = vec![false; n];
            for &(i, j) in p {
                if i >= n || j >= n || i == j || seen[i] || seen[j] {
                    return Err(Error::Config(format!("invalid cut pairing ({i}, {j})")));
                }
                seen[i] = true;
                seen[j] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Config("cut pairing is not a perfect matching".into()));
            }
            p.to_vec()
        }
    };
    let cuts: Vec<Cut> = pairs.iter().map(|&(i, j)| Cut { a: pts[i], b: pts[j] }).collect();
    let margin = 0.1 * spec.min_gap();
    for i in 0..cuts.len() {
        for j in (i + 1)..cuts.len() {
            if dist_segment_segment(cuts[i].a, cuts[i].b, cuts[j].a, cuts[j].b) < 2.2 * margin {
                return Err(Error::IntersectingCuts(i, j));
            }
        }
        // other branch points must not sit close to this cut
        for (m, &e) in pts.iter().enumerate() {
            if (e - cuts[i].a).norm() == 0.0 || (e - cuts[i].b).norm() == 0.0 {
                continue;
            }
            if dist_point_segment(e, cuts[i].a, cuts[i].b) < 2.2 * margin {
                return Err(Error::IntersectingCuts(i, m));
            }
        }
    }
    Ok(CutSystem { cuts, margin })
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

/// Straight-line router with single-detour fallback. Obstacles carry their
/// own clearance; a segment may approach an obstacle as closely as its own
/// endpoints already are (so legs may legitimately end near a target).
pub struct Router {
    pub seg_obstacles: Vec<(C64, C64, f64)>,
    pub pt_obstacles: Vec<(C64, f64)>,
}

impl Router {
    fn clear(&self, a: C64, b: C64) -> bool {
        for &(p, q, c) in &self.seg_obstacles {
            let need = c.min(0.95 * dist_point_segment_ends(a, b, p, q));
            if dist_segment_segment(a, b, p, q) < need {
                return false;
            }
        }
        for &(p, c) in &self.pt_obstacles {
            let need = c.min(0.95 * (a - p).norm()).min(0.95 * (b - p).norm());
            if dist_point_segment(p, a, b) < need {
                return false;
            }
        }
        true
    }

    pub fn route(&self, from: C64, to: C64) -> Result<Vec<Segment>> {
        if (to - from).norm() == 0.0 {
            return Ok(vec![]);
        }
        if self.clear(from, to) {
            return Ok(vec![Segment::Line { from, to }]);
        }
        let mid = 0.5 * (from + to);
        let dir = (to - from) / (to - from).norm();
        let perp = C64::new(0.0, 1.0) * dir;
        let len = (to - from).norm();
        for s in [0.5, -0.5, 0.9, -0.9, 1.4, -1.4, 2.2, -2.2, 3.2, -3.2] {
            let c = mid + perp * (s * len);
            if self.clear(from, c) && self.clear(c, to) {
                return Ok(vec![Segment::Line { from, to: c }, Segment::Line { from: c, to }]);
            }
        }
        // bridge: lift both endpoints sideways and cross over the obstacles
        for s in [0.6, -0.6, 0.9, -0.9, 1.3, -1.3, 1.9, -1.9, 2.6, -2.6] {
            let lift = perp * (s * len);
            let (c1, c2) = (from + lift, to + lift);
            if self.clear(from, c1) && self.clear(c1, c2) && self.clear(c2, to) {
                return Ok(vec![
                    Segment::Line { from, to: c1 },
                    Segment::Line { from: c1, to: c2 },
                    Segment::Line { from: c2, to },
                ]);
            }
        }
        Err(Error::RoutingFailed(from, to))
    }
}

fn dist_point_segment_ends(a: C64, b: C64, p: C64, q: C64) -> f64 {
    dist_point_segment(a, p, q).min(dist_point_segment(b, p, q))
}

// ---------------------------------------------------------------------------
// Homology
// ---------------------------------------------------------------------------

/// Canonical basis {a_j, b_j}: a_j a counterclockwise stadium around cut j on
/// sheet +1; b_j crosses cut j and the last cut once each, closed by two
/// routed connectors. a_j ∘ b_k = δ_{jk} is validated downstream through the
/// symmetry and positivity of the period matrix.
#[derive(Clone, Debug)]
pub struct Homology {
    pub a_cycles: Vec<Vec<Segment>>,
    pub b_cycles: Vec<Vec<Segment>>,
    pub margin: f64,
}

/// Closed stadium path around a cut at offset h, counterclockwise.
pub fn stadium(cut: &Cut, h: f64) -> Vec<Segment> {
    let t = cut.dir();
    let n = cut.normal();
    let argt = t.arg();
    vec![
        Segment::Line { from: cut.a - n * h, to: cut.b - n * h },
        Segment::Arc {
            center: cut.b,
            radius: h,
            th0: argt - std::f64::consts::FRAC_PI_2,
            th1: argt + std::f64::consts::FRAC_PI_2,
        },
        Segment::Line { from: cut.b + n * h, to: cut.a + n * h },
        Segment::Arc {
            center: cut.a,
            radius: h,
            th0: argt + std::f64::consts::FRAC_PI_2,
            th1: argt + 1.5 * std::f64::consts::PI,
        },
    ]
}

pub fn build_homology(spec: &CurveSpec, cuts: &CutSystem) -> Result<Homology> {
    let p = spec.genus();
    if cuts.cuts.len() != p + 1 {
        return Err(Error::HomologyInvalid(format!(
            "need {} cuts for genus {}, got {}",
            p + 1,
            p,
            cuts.cuts.len()
        )));
    }
    let h = cuts.margin;
    let a_cycles: Vec<Vec<Segment>> = (0..p).map(|j| stadium(&cuts.cuts[j], h)).collect();

    let router = Router {
        seg_obstacles: cuts.cuts.iter().map(|c| (c.a, c.b, 0.8 * h)).collect(),
        pt_obstacles: vec![],
    };
    let last = cuts.cuts[p];
    let mut b_cycles = Vec::with_capacity(p);
    for j in 0..p {
        let cj = cuts.cuts[j];
        let mut found = None;
        'variants: for s1 in [1.0f64, -1.0] {
            for s2 in [1.0f64, -1.0] {
                let c1a = cj.mid() - cj.normal() * (s1 * h);
                let c1b = cj.mid() + cj.normal() * (s1 * h);
                let c2a = last.mid() - last.normal() * (s2 * h);
                let c2b = last.mid() + last.normal() * (s2 * h);
                let conn1 = match router.route(c1b, c2a) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let conn2 = match router.route(c2b, c1a) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let mut segs = vec![Segment::Line { from: c1a, to: c1b }];
                segs.extend(conn1);
                segs.push(Segment::Line { from: c2a, to: c2b });
                segs.extend(conn2);
                found = Some(segs);
                break 'variants;
            }
        }
        match found {
            Some(segs) => b_cycles.push(segs),
            None => {
                return Err(Error::HomologyInvalid(format!(
                    "could not route b-cycle {j} between cuts {j} and {p}"
                )))
            }
        }
    }
    let hom = Homology { a_cycles, b_cycles, margin: h };
    validate_closure(spec, &hom)?;
    Ok(hom)
}

/// Continuation around each cycle must return to the starting y.
fn validate_closure(spec: &CurveSpec, hom: &Homology) -> Result<()> {
    for (name, cycles) in [("a", &hom.a_cycles), ("b", &hom.b_cycles)] {
        for (j, segs) in cycles.iter().enumerate() {
            let z0 = segs[0].z_at(0.0).unwrap();
            let y0 = principal_y(spec, z0);
            let traced = trace(spec, segs, StartAux::Y(y0))?;
            let y1 = traced.y_end(spec).unwrap();
            if (y1 - y0).norm() > 1e-6 * y0.norm() {
                return Err(Error::HomologyInvalid(format!(
                    "{name}-cycle {j} does not close: y drift {:.3e}",
                    (y1 - y0).norm() / y0.norm()
                )));
            }
        }
    }
    Ok(())
}

fn principal_y(spec: &CurveSpec, z: C64) -> C64 {
    spec.r_eval(z).sqrt()
}

/// Flip the orientation of every b-cycle (used once if Im τ comes out
/// negative definite).
pub fn flip_b_cycles(hom: &mut Homology) {
    for b in hom.b_cycles.iter_mut() {
        let mut rev: Vec<Segment> = b.iter().map(|s| s.reversed()).collect();
        rev.reverse();
        *b = rev;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::validate_spec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec1234() -> CurveSpec {
        validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap()
    }

    fn circle(center: C64, r: f64) -> Vec<Segment> {
        vec![Segment::Arc { center, radius: r, th0: 0.0, th1: 2.0 * std::f64::consts::PI }]
    }

    #[test]
    fn monodromy_rules() {
        let spec = spec1234();
        // no branch point enclosed
        let segs = circle(c(-3.0, 0.0), 0.5);
        let y0 = spec.r_eval(c(-2.5, 0.0)).sqrt();
        let tp = trace(&spec, &segs, StartAux::Y(y0)).unwrap();
        assert!((tp.y_end(&spec).unwrap() - y0).norm() < 1e-9 * y0.norm());
        // one branch point: sign flips
        let segs = circle(c(1.0, 0.0), 0.3);
        let y0 = spec.r_eval(c(1.3, 0.0)).sqrt();
        let tp = trace(&spec, &segs, StartAux::Y(y0)).unwrap();
        assert!((tp.y_end(&spec).unwrap() + y0).norm() < 1e-9 * y0.norm());
        // a full cut (two branch points): sign restored
        let segs = circle(c(1.5, 0.0), 1.0);
        let y0 = spec.r_eval(c(2.5, 0.0)).sqrt();
        let tp = trace(&spec, &segs, StartAux::Y(y0)).unwrap();
        assert!((tp.y_end(&spec).unwrap() - y0).norm() < 1e-9 * y0.norm());
    }

    #[test]
    fn residue_of_dz_over_z() {
        let spec = spec1234();
        let segs = circle(c(0.0, 0.0), 0.5);
        let y0 = spec.r_eval(c(0.5, 0.0)).sqrt();
        let tp = trace(&spec, &segs, StartAux::Y(y0)).unwrap();
        let v = tp.integrate(&spec, &Differential::dz_over_z(&spec), 1e-12).unwrap();
        let expect = C64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!((v - expect).norm() < 1e-12 * expect.norm(), "{v}");
    }

    #[test]
    fn reversal_negates_and_concatenation_adds() {
        let spec = spec1234();
        let d = Differential::eta(&spec, 1);
        let seg_a = vec![Segment::Line { from: c(5.0, 1.0), to: c(6.0, 2.0) }];
        let seg_b = vec![Segment::Line { from: c(6.0, 2.0), to: c(7.0, -1.0) }];
        let y0 = spec.y_on_sheet(c(5.0, 1.0), 1).unwrap();
        let ta = trace(&spec, &seg_a, StartAux::Y(y0)).unwrap();
        let ya = ta.y_end(&spec).unwrap();
        let tb = trace(&spec, &seg_b, StartAux::Y(ya)).unwrap();
        let whole = vec![seg_a[0].clone(), seg_b[0].clone()];
        let tw = trace(&spec, &whole, StartAux::Y(y0)).unwrap();
        let va = ta.integrate(&spec, &d, 1e-12).unwrap();
        let vb = tb.integrate(&spec, &d, 1e-12).unwrap();
        let vw = tw.integrate(&spec, &d, 1e-12).unwrap();
        assert!((va + vb - vw).norm() < 1e-12);

        let rev: Vec<Segment> = whole.iter().rev().map(|s| s.reversed()).collect();
        let tr = trace(&spec, &rev, StartAux::Y(tw.y_end(&spec).unwrap())).unwrap();
        let vr = tr.integrate(&spec, &d, 1e-12).unwrap();
        assert!((vr + vw).norm() < 1e-12);
    }

    #[test]
    fn default_cuts_and_intersection_errors() {
        let spec = spec1234();
        let cs = build_cuts(&spec, None).unwrap();
        assert_eq!(cs.cuts.len(), 2);
        assert!((cs.cuts[0].a - c(1.0, 0.0)).norm() < 1e-15);
        assert!((cs.cuts[0].b - c(2.0, 0.0)).norm() < 1e-15);
        assert!((cs.cuts[1].a - c(3.0, 0.0)).norm() < 1e-15);

        match build_cuts(&spec, Some(&[(0, 2), (1, 3)])) {
            Err(Error::IntersectingCuts(_, _)) => {}
            other => panic!("expected intersecting cuts, got {other:?}"),
        }
    }

    #[test]
    fn conjugate_pair_cuts() {
        let e1 = C64::from_polar(1.0, 0.5);
        let e2 = C64::from_polar(1.0, -0.5);
        let e3 = C64::from_polar(1.0, 2.0);
        let e4 = C64::from_polar(1.0, -2.0);
        let spec = validate_spec(&[e1, e2, e3, e4], 1).unwrap();
        let cs = build_cuts(&spec, None).unwrap();
        // each cut joins a conjugate pair
        for cut in &cs.cuts {
            assert!((cut.a - cut.b.conj()).norm() < 1e-12);
        }
        assert_eq!(cs.cuts.len(), 2);
    }

    #[test]
    fn homology_builds_closed_cycles() {
        let spec = spec1234();
        let cs = build_cuts(&spec, None).unwrap();
        let hom = build_homology(&spec, &cs).unwrap();
        assert_eq!(hom.a_cycles.len(), 1);
        assert_eq!(hom.b_cycles.len(), 1);
        // endpoints coincide
        for cyc in hom.a_cycles.iter().chain(hom.b_cycles.iter()) {
            let start = cyc[0].z_at(0.0).unwrap();
            let end = cyc.last().unwrap().z_at(1.0).unwrap();
            assert!((start - end).norm() < 1e-12);
        }
    }

    #[test]
    fn a_cycle_dz_over_y_nonzero() {
        let spec = spec1234();
        let cs = build_cuts(&spec, None).unwrap();
        let hom = build_homology(&spec, &cs).unwrap();
        let segs = &hom.a_cycles[0];
        let z0 = segs[0].z_at(0.0).unwrap();
        let tp = trace(&spec, segs, StartAux::Y(spec.r_eval(z0).sqrt())).unwrap();
        let v = tp.integrate(&spec, &Differential::eta(&spec, 1), 1e-11).unwrap();
        assert!(v.norm() > 1e-3, "a-period of dz/y should be nonzero, got {v}");
    }

    #[test]
    fn quadrature_tolerance_monotone() {
        let spec = spec1234();
        let segs = circle(c(1.5, 0.0), 0.8);
        let y0 = spec.r_eval(c(2.3, 0.0)).sqrt();
        let tp = trace(&spec, &segs, StartAux::Y(y0)).unwrap();
        let d = Differential::eta(&spec, 1);
        let v1 = tp.integrate(&spec, &d, 1e-8).unwrap();
        let v2 = tp.integrate(&spec, &d, 5e-9).unwrap();
        assert!((v1 - v2).norm() <= 1e-8 + 1e-13);
    }
}
