//! Polynomial root finding: Durand–Kerner with deterministic starting values,
//! one Newton polish step, and lexicographic (Re, Im) ordering.

use crate::poly::Poly;
use crate::C64;

const MAX_ITER: usize = 300;

/// All complex roots of `p` (degree >= 1), ordered lexicographically by
/// (Re, Im). Deterministic for identical input.
pub fn roots(p: &Poly) -> Vec<C64> {
    let n = p.degree();
    if n == 0 {
        return vec![];
    }
    let lead = p.coeffs[n];
    let monic: Vec<C64> = p.coeffs.iter().map(|&c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }

    // Cauchy-style radius bound for the starts.
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let offset = 0.4; // fixed irrational-ish phase so starts are never symmetric
    let mut zs: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + offset;
            C64::from_polar(radius * 0.8, ang)
        })
        .collect();

    let eval = |z: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= zs[i] - zs[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = C64::new(1e-300, 0.0);
            }
            let step = eval(zs[i]) / denom;
            zs[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius.max(1.0) {
            break;
        }
    }

    // One Newton polish step per root.
    let dp = p.derivative();
    for z in zs.iter_mut() {
        let d = dp.eval(*z);
        if d.norm() > 0.0 {
            let step = p.eval(*z) / d;
            if step.norm() < 0.1 * radius.max(1.0) {
                *z -= step;
            }
        }
    }

    zs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    zs
}
