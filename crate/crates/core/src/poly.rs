//! Dense complex polynomials, lowest degree first.

use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    /// coeffs[k] multiplies z^k; invariant: no trailing zero unless constant.
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.norm()) == Some(0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![])
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i as f64 + 1.0))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.coeffs.iter().enumerate() {
            out[i] += b;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-C64::new(1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Poly {
        let mut p = Poly::constant(C64::new(1.0, 0.0));
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, C64::new(1.0, 0.0)]));
        }
        p
    }

    /// Coefficient of z^k (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
