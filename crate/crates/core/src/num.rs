//! Small numeric helpers: compensated summation and the G7/K15 rule.

use crate::C64;

/// Kahan–Neumaier compensated accumulator for complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: C64,
    comp: C64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        self.comp.re = add_neumaier(&mut self.sum.re, x.re, self.comp.re);
        self.comp.im = add_neumaier(&mut self.sum.im, x.im, self.comp.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn add_neumaier(sum: &mut f64, x: f64, comp: f64) -> f64 {
    let t = *sum + x;
    let c = if sum.abs() >= x.abs() {
        (*sum - t) + x
    } else {
        (x - t) + *sum
    };
    *sum = t;
    comp + c
}

/// Gauss 7 / Kronrod 15 nodes and weights (positive half, node 7 is zero).
pub const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

pub const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

pub const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel over [a, b]. Returns (kronrod value, |K - G| estimate).
/// `f` is evaluated at the 15 Kronrod abscissae in ascending order.
pub fn gk15<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> (C64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut vals = [C64::new(0.0, 0.0); 15];
    for (i, v) in vals.iter_mut().enumerate() {
        // i = 0..14 maps to node offsets -xgk[0].. +xgk[0]
        let x = if i < 7 {
            -XGK[i]
        } else if i == 7 {
            0.0
        } else {
            XGK[14 - i]
        };
        *v = f(mid + half * x);
    }
    let mut k = Kahan::new();
    let mut g = Kahan::new();
    for i in 0..7 {
        let pair = vals[i] + vals[14 - i];
        k.add(pair * WGK[i]);
        if i % 2 == 1 {
            g.add(pair * WG[i / 2]);
        }
    }
    k.add(vals[7] * WGK[7]);
    g.add(vals[7] * WG[3]);
    let kv = k.value() * half;
    let gv = g.value() * half;
    (kv, (kv - gv).norm())
}

/// Distance from point `p` to segment [a, b].
pub fn dist_point_segment(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Do segments [a1,b1] and [a2,b2] properly intersect or touch?
pub fn segments_intersect(a1: C64, b1: C64, a2: C64, b2: C64) -> bool {
    dist_segment_segment(a1, b1, a2, b2) == 0.0
}

/// Euclidean distance between two segments.
pub fn dist_segment_segment(a1: C64, b1: C64, a2: C64, b2: C64) -> f64 {
    fn cross(o: C64, a: C64, b: C64) -> f64 {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    }
    let d1 = cross(a2, b2, a1);
    let d2 = cross(a2, b2, b1);
    let d3 = cross(a1, b1, a2);
    let d4 = cross(a1, b1, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    let mut d = dist_point_segment(a1, a2, b2);
    d = d.min(dist_point_segment(b1, a2, b2));
    d = d.min(dist_point_segment(a2, a1, b1));
    d = d.min(dist_point_segment(b2, a1, b1));
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_exact_on_polynomials() {
        // Kronrod 15 integrates degree <= 22 exactly.
        let (v, e) = gk15(|t| C64::new(t.powi(9) - 3.0 * t.powi(4) + 1.0, t.powi(3)), 0.0, 2.0);
        let exact = C64::new(2f64.powi(10) / 10.0 - 3.0 * 32.0 / 5.0 + 2.0, 4.0);
        assert!((v - exact).norm() < 1e-12, "{v} vs {exact}");
        assert!(e < 1e-10);
    }

    #[test]
    fn segment_distances() {
        let o = C64::new(0.0, 0.0);
        assert!(dist_point_segment(C64::new(0.5, 1.0), o, C64::new(1.0, 0.0)) - 1.0 < 1e-15);
        assert!(segments_intersect(
            C64::new(-1.0, -1.0),
            C64::new(1.0, 1.0),
            C64::new(-1.0, 1.0),
            C64::new(1.0, -1.0)
        ));
        assert!(!segments_intersect(
            o,
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.5),
            C64::new(1.0, 0.5)
        ));
    }
}
