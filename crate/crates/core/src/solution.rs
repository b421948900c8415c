//! Theta-function representation of the lattice coefficients: divisor flow
//! on the Jacobian, α(n), β(n), the product αβ, the meromorphic function φ,
//! the Baker–Akhiezer vector, and the genus-0 closed form.

use crate::abelian::AbelianStack;
use crate::curve::{self, CurveSpec, Divisor, NamedPoint, SurfacePoint};
use crate::error::{Error, Result};
use crate::hierarchy::LatticeSeq;
use crate::theta::ReducedTheta;
use crate::C64;

/// Everything precomputed for evaluating the theta formulas at any site.
pub struct SolutionState {
    pub stack: AbelianStack,
    pub n0: i64,
    pub alpha0: C64,
    pub beta0: C64,
    pub mu0: Vec<SurfacePoint>,
    /// Divisor image ρ_μ = α_{Q0}(D_μ(n₀)) (stored representative).
    pub rho_mu: Vec<C64>,
    /// ρ_ν = ρ_μ + A(P∞₋) − A(P₀₋).
    pub rho_nu: Vec<C64>,
    /// Flow vector Δ = A(P∞₊) − A(P₀₋); divisor images advance by Δ per site.
    pub delta: Vec<C64>,
    pub a_p0_plus: Vec<C64>,
    pub a_inf_plus: Vec<C64>,
    /// ω₀^{0,−} − ω₀^{∞₊} of the (P₀₋, P∞₋) differential: the per-site
    /// growth log of α (with sign −) and β (with sign +).
    pub growth_log: C64,
    /// exp[ω₀^{∞₊} − ω₀^{0,+}] of the (P₀₋, P∞₋) differential.
    pub prod_const: C64,
    base: BaseThetas,
    theta_typ: f64,
}

struct BaseThetas {
    p0p_mu: ReducedTheta,
    p0p_nu: ReducedTheta,
    infp_mu: ReducedTheta,
    infp_nu: ReducedTheta,
}

/// Which divisor family a theta argument tracks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Mu,
    Nu,
}

impl SolutionState {
    /// Builds the full Abelian stack from (curve, μ̂(n₀), α₀) and validates
    /// the global self-checks before returning.
    pub fn init(
        spec: &CurveSpec,
        pairing: Option<&[(usize, usize)]>,
        mu_hat: Vec<SurfacePoint>,
        alpha0: C64,
        n0: i64,
        quad_tol: f64,
        theta_tol: f64,
    ) -> Result<SolutionState> {
        if spec.genus() < 1 {
            return Err(Error::GenusZeroUnsupported);
        }
        if alpha0.norm() == 0.0 {
            return Err(Error::ZeroAlpha0);
        }
        if mu_hat.len() != spec.genus() {
            return Err(Error::Config(format!(
                "need {} divisor points for genus {}, got {}",
                spec.genus(),
                spec.genus(),
                mu_hat.len()
            )));
        }
        for p in &mu_hat {
            let r = spec.r_eval(p.z);
            if (p.y * p.y - r).norm() > 1e-9 * (1.0 + r.norm()) {
                return Err(Error::Config(format!("divisor point at z = {} is not on the curve", p.z)));
            }
        }
        let divisor = Divisor { points: mu_hat.iter().map(|&p| (p, 1)).collect() };
        if let Some((w, _)) = divisor.special_witness(spec.scale()) {
            return Err(Error::SpecialDivisor(w.z));
        }

        let stack = AbelianStack::build(spec, pairing, quad_tol, theta_tol)?;
        stack.checks.validate()?;

        let rho_mu = stack.abel_divisor(&divisor)?;
        let a_p0_minus = stack.abel_named(NamedPoint::ZeroMinus)?;
        let a_p0_plus = stack.abel_named(NamedPoint::ZeroPlus)?;
        let a_inf_plus = stack.abel_named(NamedPoint::InfPlus)?;
        let a_inf_minus = stack.abel_named(NamedPoint::InfMinus)?;
        let p = spec.genus();

        // Representatives must carry trivial b-monodromy characters: the
        // formulas for φ and ψ₁ continue analytically around b_j with the
        // factors exp(2πi[(ρ_ν − ρ_μ)_j + ∮ω⁽³⁾₋]) and exp(2πik[Δ_j + ∮ω⁽³⁾₊]),
        // so the integer-τ parts of those combinations are removed here.
        let tau_shift = |v_raw: &[C64], lhs: &[C64]| -> Vec<f64> {
            let v: Vec<C64> = (0..p).map(|j| v_raw[j] + lhs[j]).collect();
            let red = stack.theta.reduce(&v);
            red.n.iter().map(|&x| x as f64).collect()
        };
        let apply = |base: &[C64], shift: &[f64]| -> Vec<C64> {
            (0..p)
                .map(|j| {
                    let mut x = base[j];
                    for (l, &s) in shift.iter().enumerate() {
                        x += stack.periods.tau[(l, j)] * s;
                    }
                    x
                })
                .collect()
        };
        let delta_raw: Vec<C64> = (0..p).map(|j| a_inf_plus[j] - a_p0_minus[j]).collect();
        let nu_step_raw: Vec<C64> = (0..p).map(|j| a_inf_minus[j] - a_p0_minus[j]).collect();
        let k_nu = tau_shift(&nu_step_raw, &stack.b_lhs_minus);
        let k_delta = tau_shift(&delta_raw, &stack.b_lhs_plus);
        let nu_step = apply(&nu_step_raw, &k_nu);
        let delta = apply(&delta_raw, &k_delta);
        let rho_nu: Vec<C64> = (0..p).map(|j| rho_mu[j] + nu_step[j]).collect();

        let w = &stack.third_minus.omega0;
        let growth_log = w.zero_minus - w.inf_plus;
        let prod_const = (w.inf_plus - w.zero_plus).exp();

        let mut st = SolutionState {
            stack,
            n0,
            alpha0,
            beta0: C64::new(0.0, 0.0),
            mu0: mu_hat,
            rho_mu,
            rho_nu,
            delta,
            a_p0_plus,
            a_inf_plus,
            growth_log,
            prod_const,
            base: BaseThetas {
                p0p_mu: ReducedTheta {
                    value: C64::new(0.0, 0.0),
                    log_comp: C64::new(0.0, 0.0),
                    m: vec![],
                    n: vec![],
                },
                p0p_nu: ReducedTheta {
                    value: C64::new(0.0, 0.0),
                    log_comp: C64::new(0.0, 0.0),
                    m: vec![],
                    n: vec![],
                },
                infp_mu: ReducedTheta {
                    value: C64::new(0.0, 0.0),
                    log_comp: C64::new(0.0, 0.0),
                    m: vec![],
                    n: vec![],
                },
                infp_nu: ReducedTheta {
                    value: C64::new(0.0, 0.0),
                    log_comp: C64::new(0.0, 0.0),
                    m: vec![],
                    n: vec![],
                },
            },
            theta_typ: 1.0,
        };

        st.base = BaseThetas {
            p0p_mu: st.theta_at(&st.a_p0_plus, Family::Mu, n0)?,
            p0p_nu: st.theta_at(&st.a_p0_plus, Family::Nu, n0)?,
            infp_mu: st.theta_at(&st.a_inf_plus, Family::Mu, n0)?,
            infp_nu: st.theta_at(&st.a_inf_plus, Family::Nu, n0)?,
        };
        st.theta_typ = [
            st.base.p0p_mu.value.norm(),
            st.base.p0p_nu.value.norm(),
            st.base.infp_mu.value.norm(),
            st.base.infp_nu.value.norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);

        // β₀ from the product representation at n₀
        st.beta0 = st.product_rhs(n0)? / alpha0;
        Ok(st)
    }

    pub fn genus(&self) -> usize {
        self.stack.genus()
    }

    /// Theta argument Ξ − A(P) + ρ_family + (n − n₀)·Δ.
    pub fn theta_argument(&self, a_point: &[C64], family: Family, n: i64) -> Vec<C64> {
        let rho = match family {
            Family::Mu => &self.rho_mu,
            Family::Nu => &self.rho_nu,
        };
        let k = (n - self.n0) as f64;
        (0..self.genus())
            .map(|j| self.stack.xi[j] - a_point[j] + rho[j] + self.delta[j] * k)
            .collect()
    }

    fn theta_at(&self, a_point: &[C64], family: Family, n: i64) -> Result<ReducedTheta> {
        let arg = self.theta_argument(a_point, family, n);
        let rt = self.stack.theta.theta_reduced(&arg)?;
        Ok(rt)
    }

    fn guard_theta(&self, rt: &ReducedTheta) -> Result<()> {
        if rt.value.norm() < 1e-12 * self.theta_typ {
            return Err(Error::ThetaNearZero(rt.value.norm(), 1e-12 * self.theta_typ));
        }
        Ok(())
    }

    /// α(n): base value times the unimodular sign, the exponential growth
    /// factor, and the theta quotient at P₀₊.
    pub fn alpha_n(&self, n: i64) -> Result<C64> {
        let k = n - self.n0;
        let (t_mu, t_nu) = if k == 0 {
            (self.base.p0p_mu.clone(), self.base.p0p_nu.clone())
        } else {
            (
                self.theta_at(&self.a_p0_plus, Family::Mu, n)?,
                self.theta_at(&self.a_p0_plus, Family::Nu, n)?,
            )
        };
        self.guard_theta(&t_nu)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let log_comp = (self.base.p0p_nu.log_comp + t_mu.log_comp)
            - (self.base.p0p_mu.log_comp + t_nu.log_comp);
        let expo = (self.growth_log * (-(k as f64)) + log_comp).exp();
        let ratio = (self.base.p0p_nu.value * t_mu.value) / (self.base.p0p_mu.value * t_nu.value);
        Ok(self.alpha0 * sign * expo * ratio)
    }

    /// β(n): anchored at β₀ with the reciprocal growth factor and the theta
    /// quotient at P∞₊.
    pub fn beta_n(&self, n: i64) -> Result<C64> {
        let k = n - self.n0;
        let (t_mu, t_nu) = if k == 0 {
            (self.base.infp_mu.clone(), self.base.infp_nu.clone())
        } else {
            (
                self.theta_at(&self.a_inf_plus, Family::Mu, n)?,
                self.theta_at(&self.a_inf_plus, Family::Nu, n)?,
            )
        };
        self.guard_theta(&t_mu)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let log_comp = (self.base.infp_mu.log_comp + t_nu.log_comp)
            - (self.base.infp_nu.log_comp + t_mu.log_comp);
        let expo = (self.growth_log * (k as f64) + log_comp).exp();
        let ratio = (self.base.infp_mu.value * t_nu.value) / (self.base.infp_nu.value * t_mu.value);
        Ok(self.beta0 * sign * expo * ratio)
    }

    /// Right-hand side of the product representation of α(n)β(n).
    pub fn product_rhs(&self, n: i64) -> Result<C64> {
        let t_p0_mu = self.theta_at(&self.a_p0_plus, Family::Mu, n)?;
        let t_p0_nu = self.theta_at(&self.a_p0_plus, Family::Nu, n)?;
        let t_inf_mu = self.theta_at(&self.a_inf_plus, Family::Mu, n)?;
        let t_inf_nu = self.theta_at(&self.a_inf_plus, Family::Nu, n)?;
        self.guard_theta(&t_p0_nu)?;
        self.guard_theta(&t_inf_mu)?;
        let log_comp = (t_p0_mu.log_comp + t_inf_nu.log_comp)
            - (t_p0_nu.log_comp + t_inf_mu.log_comp);
        Ok(self.prod_const
            * log_comp.exp()
            * (t_p0_mu.value * t_inf_nu.value)
            / (t_p0_nu.value * t_inf_mu.value))
    }

    /// The n-dependent normalization constant of φ.
    pub fn phi_c(&self, n: i64) -> C64 {
        let k = (n - self.n0) as f64;
        let sign = if (n - self.n0) % 2 == 0 { 1.0 } else { -1.0 };
        let w = &self.stack.third_minus.omega0;
        let log_comp = self.base.p0p_mu.log_comp - self.base.p0p_nu.log_comp;
        sign * (self.growth_log * k - w.zero_plus + log_comp).exp() / self.alpha0
            * (self.base.p0p_mu.value / self.base.p0p_nu.value)
    }

    /// φ(P, n) for a finite P not in the pole divisor.
    pub fn phi(&self, p: &SurfacePoint, n: i64) -> Result<C64> {
        let ints = self.stack.point_integrals(p)?;
        let t_nu = self.theta_at(&ints.abel, Family::Nu, n)?;
        let t_mu = self.theta_at(&ints.abel, Family::Mu, n)?;
        if t_mu.value.norm() < 1e-10 * self.theta_typ {
            return Err(Error::PoleOfPhi);
        }
        let log_comp = t_nu.log_comp - t_mu.log_comp;
        Ok(self.phi_c(n) * (log_comp + ints.third_minus).exp() * (t_nu.value / t_mu.value))
    }

    /// The Baker–Akhiezer pair (ψ₁, ψ₂) at (P, n) with base site n₀.
    pub fn baker_akhiezer(&self, p: &SurfacePoint, n: i64) -> Result<(C64, C64)> {
        let ints = self.stack.point_integrals(p)?;
        let k = (n - self.n0) as f64;
        let t_mu_n = self.theta_at(&ints.abel, Family::Mu, n)?;
        let t_mu_0 = self.theta_at(&ints.abel, Family::Mu, self.n0)?;
        let t_nu_n = self.theta_at(&ints.abel, Family::Nu, n)?;
        self.guard_theta(&t_mu_0)?;

        // C(n, n₀) = exp[−(n−n₀) ω₀^{∞₊}(plus target)] θ(z(P∞₊, μ̂(n₀))) / θ(z(P∞₊, μ̂(n)))
        let t_infp_mu_n = self.theta_at(&self.a_inf_plus, Family::Mu, n)?;
        self.guard_theta(&t_infp_mu_n)?;
        let w_plus = &self.stack.third_plus.omega0;
        let c_nn0 = (w_plus.inf_plus * (-k) + self.base.infp_mu.log_comp
            - t_infp_mu_n.log_comp)
            .exp()
            * (self.base.infp_mu.value / t_infp_mu_n.value);

        let psi1 = c_nn0
            * (t_mu_n.log_comp - t_mu_0.log_comp + ints.third_plus * k).exp()
            * (t_mu_n.value / t_mu_0.value);
        let psi2 = self.phi_c(n)
            * c_nn0
            * (t_nu_n.log_comp - t_mu_0.log_comp + ints.third_minus + ints.third_plus * k).exp()
            * (t_nu_n.value / t_mu_0.value);
        Ok((psi1, psi2))
    }

    /// α, β over a window, plus the product-formula residual per site.
    pub fn evaluate_window(&self, n_lo: i64, n_hi: i64) -> Result<(LatticeSeq, Vec<f64>)> {
        let mut alpha = Vec::with_capacity((n_hi - n_lo + 1) as usize);
        let mut beta = Vec::with_capacity(alpha.capacity());
        let mut prod_res = Vec::with_capacity(alpha.capacity());
        for n in n_lo..=n_hi {
            let a = self.alpha_n(n)?;
            let b = self.beta_n(n)?;
            let rhs = self.product_rhs(n)?;
            prod_res.push((a * b - rhs).norm() / rhs.norm().max(1e-300));
            alpha.push(a);
            beta.push(b);
        }
        Ok((LatticeSeq::new(n_lo, alpha, beta), prod_res))
    }
}

/// Genus-0 closed-form solution data.
#[derive(Clone, Debug)]
pub struct Genus0Solution {
    pub seq: LatticeSeq,
    pub n0: i64,
    pub g1: C64,
    pub c1: C64,
    pub alpha0: C64,
    pub beta0: C64,
    pub alpha_beta: C64,
}

/// α(n) = α₀(−g₁)^{n−n₀}, β(n) = β₀(−g₁)^{n₀−n}, αβ = (1 − c₁/g₁)/2 with
/// c₁ = −(E₀+E₁)/2 and g₁ = g_sign·√(E₀E₁).
pub fn genus0_solution(
    e0: C64,
    e1: C64,
    g_sign: i8,
    alpha0: C64,
    n0: i64,
    window: (i64, i64),
) -> Result<Genus0Solution> {
    let spec = curve::validate_spec(&[e0, e1], g_sign).map_err(|e| match e {
        Error::DuplicateBranchPoint(_, _) => Error::EqualBranchPoints,
        other => other,
    })?;
    if alpha0.norm() == 0.0 {
        return Err(Error::ZeroAlpha0);
    }
    let g1 = spec.g_top();
    let c1 = -(e0 + e1) / 2.0;
    let alpha_beta = (C64::new(1.0, 0.0) - c1 / g1) / 2.0;
    let beta0 = alpha_beta / alpha0;
    let (n_lo, n_hi) = window;
    assert!(n_lo <= n0 && n0 <= n_hi, "window must contain n0");
    let mut alpha = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    let mut beta = Vec::with_capacity(alpha.capacity());
    for n in n_lo..=n_hi {
        alpha.push(alpha0 * (-g1).powi((n - n0) as i32));
        beta.push(beta0 * (-g1).powi((n0 - n) as i32));
    }
    Ok(Genus0Solution {
        seq: LatticeSeq::new(n_lo, alpha, beta),
        n0,
        g1,
        c1,
        alpha0,
        beta0,
        alpha_beta,
    })
}
