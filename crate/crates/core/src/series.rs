//! Power-series evaluation of the local Heun function `Hl` and the confluent
//! Heun function `HC` around the origin.
//!
//! Both functions are the solutions analytic at 0 with value 1 there. Their
//! Taylor coefficients obey three-term recurrences obtained by substituting
//! `sum c_k x^k` into the differential equations:
//!
//! ```text
//! Hl:  a(k+1)(k+γ) c_{k+1} = [k((k-1+γ)(1+a) + aδ + ε) + q] c_k - (k-1+α)(k-1+β) c_{k-1}
//! HC:  (k+1)(k+γ) c_{k+1}  = [k(k-1+γ+δ-4p) - σ] c_k + 4p(k-1+α) c_{k-1}
//! ```
//!
//! with `c_0 = 1`. The recurrences run on the scaled terms `c_k x^k`, so a
//! singular point close to the origin does not overflow the coefficients.

use crate::error::{domain, is_nonpositive_integer, Error, Result};
use crate::precision::{accumulate, evaluate, Kernel, Partial, Real};

/// Truncation controls for series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    max_terms: usize,
    rel_tol: f64,
}

impl SeriesOptions {
    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        if max_terms < 2 {
            return Err(Error::InvalidParams(format!(
                "max_terms must be at least 2, got {max_terms}"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidParams(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(SeriesOptions { max_terms, rel_tol })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            max_terms: 10_000,
            rel_tol: 1e-15,
        }
    }
}

/// A series or quadrature value with its bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    pub error_estimate: f64,
}

impl EvalResult {
    pub(crate) fn exact(value: f64, terms_used: usize) -> Self {
        EvalResult {
            value,
            terms_used,
            converged: true,
            error_estimate: 0.0,
        }
    }

    fn from_partial(p: &Partial) -> Self {
        EvalResult {
            value: p.sums[0],
            terms_used: p.terms,
            converged: p.converged,
            error_estimate: p.error_estimate,
        }
    }
}

/// Value, first and second derivative from termwise-differentiated series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesDerivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
    pub terms_used: usize,
    pub converged: bool,
}

impl SeriesDerivatives {
    fn from_partial(p: &Partial) -> Self {
        SeriesDerivatives {
            value: p.sums[0],
            first: p.sums[1],
            second: p.sums[2],
            terms_used: p.terms,
            converged: p.converged,
        }
    }
}

/// Parameters `(a, q; α, β; γ, δ)` of the general Heun equation
///
/// ```text
/// u'' + (γ/x + δ/(x-1) + ε/(x-a)) u' + (αβx - q)/(x(x-1)(x-a)) u = 0
/// ```
///
/// with `ε = α + β + 1 - γ - δ` derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralHeunParams {
    a: f64,
    q: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl GeneralHeunParams {
    pub fn new(a: f64, q: f64, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if [a, q, alpha, beta, gamma, delta].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if a == 0.0 || a == 1.0 {
            return Err(Error::InvalidParams(format!(
                "singular point a must differ from 0 and 1, got {a}"
            )));
        }
        if is_nonpositive_integer(gamma) {
            return Err(Error::InvalidParams(format!(
                "gamma must not be zero or a negative integer, got {gamma}"
            )));
        }
        Ok(GeneralHeunParams {
            a,
            q,
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn epsilon(&self) -> f64 {
        self.alpha + self.beta + 1.0 - self.gamma - self.delta
    }

    /// Radius of the disk around 0 in which the series converges.
    pub fn radius(&self) -> f64 {
        self.a.abs().min(1.0)
    }
}

/// Parameters `(p, γ, δ, α, σ)` of the confluent Heun equation
///
/// ```text
/// u'' + (4p + γ/x + δ/(x-1)) u' + (4pαx - σ)/(x(x-1)) u = 0
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfluentHeunParams {
    p: f64,
    gamma: f64,
    delta: f64,
    alpha: f64,
    sigma: f64,
}

impl ConfluentHeunParams {
    pub fn new(p: f64, gamma: f64, delta: f64, alpha: f64, sigma: f64) -> Result<Self> {
        if [p, gamma, delta, alpha, sigma].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if p == 0.0 {
            return Err(Error::InvalidParams("p must be nonzero".into()));
        }
        if is_nonpositive_integer(gamma) {
            return Err(Error::InvalidParams(format!(
                "gamma must not be zero or a negative integer, got {gamma}"
            )));
        }
        Ok(ConfluentHeunParams {
            p,
            gamma,
            delta,
            alpha,
            sigma,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Shared driver for both recurrences. `step` maps `(k, t_k, t_{k-1})` to
/// `t_{k+1}`; `origin` gives `(c_1, c_2)` for evaluation at exactly 0.
struct Recurrence<'a, T: Real> {
    x: f64,
    ctx: T::Ctx,
    tol: f64,
    max_terms: usize,
    t1: T,
    origin: &'a dyn Fn() -> (T, T),
    step: &'a dyn Fn(usize, &T, &T) -> T,
}

impl<T: Real> Recurrence<'_, T> {
    fn run(self) -> Partial {
        let r = |v: f64| T::from_f64(self.ctx, v);
        if self.x == 0.0 {
            let (c1, c2) = (self.origin)();
            return Partial {
                sums: vec![1.0, c1.to_f64(), 2.0 * c2.to_f64()],
                magnitudes: vec![1.0, c1.to_f64().abs(), 2.0 * c2.to_f64().abs()],
                terms: 1,
                converged: true,
                error_estimate: 0.0,
            };
        }
        let mut sums = [r(1.0), r(0.0), r(0.0)];
        let mut mags = [1.0, 0.0, 0.0];
        let mut prev = r(1.0);
        let mut cur = self.t1;
        let mut last = [1.0f64, 0.0, 0.0];
        let mut small_run = 0;
        let mut k = 1usize;
        let mut converged = false;
        let mut ratio = 1.0;
        loop {
            let kf = k as f64;
            let terms = [
                cur.clone(),
                r(kf) * cur.clone(),
                r(kf * (kf - 1.0)) * cur.clone(),
            ];
            for i in 0..3 {
                last[i] = accumulate(&mut sums[i], &mut mags[i], &terms[i]);
            }
            let small = (0..3).all(|i| last[i].abs() <= self.tol * sums[i].to_f64().abs());
            small_run = if small { small_run + 1 } else { 0 };
            if small_run >= 3 {
                converged = true;
                break;
            }
            if k + 1 >= self.max_terms {
                break;
            }
            let next = (self.step)(k, &cur, &prev);
            let (c, p) = (next.to_f64().abs(), cur.to_f64().abs());
            if p > 0.0 {
                ratio = c / p;
            }
            prev = cur;
            cur = next;
            k += 1;
        }
        let tail = if converged && ratio < 1.0 {
            last[0].abs() * ratio / (1.0 - ratio)
        } else {
            last[0].abs()
        };
        let x = self.x;
        Partial {
            sums: vec![
                sums[0].to_f64(),
                sums[1].to_f64() / x,
                sums[2].to_f64() / (x * x),
            ],
            magnitudes: vec![mags[0], mags[1] / x.abs(), mags[2] / (x * x)],
            terms: k + 1,
            converged,
            error_estimate: tail.max(last[0].abs()),
        }
    }
}

struct LocalKernel {
    params: GeneralHeunParams,
    x: f64,
    max_terms: usize,
}

impl Kernel for LocalKernel {
    fn run<T: Real>(&self, ctx: T::Ctx, tol: f64) -> Partial {
        let r = |v: f64| T::from_f64(ctx, v);
        let p = &self.params;
        let (a, q, al, be, ga, de) = (r(p.a), r(p.q), r(p.alpha), r(p.beta), r(p.gamma), r(p.delta));
        let ep = al.clone() + be.clone() + r(1.0) - ga.clone() - de.clone();
        let x = r(self.x);
        let x2 = x.clone() * x.clone();
        let one_plus_a = r(1.0) + a.clone();
        let a_delta_eps = a.clone() * de.clone() + ep.clone();
        let step = |k: usize, cur: &T, prev: &T| -> T {
            let kf = k as f64;
            let mid = r(kf) * ((r(kf - 1.0) + ga.clone()) * one_plus_a.clone() + a_delta_eps.clone())
                + q.clone();
            let low = (r(kf - 1.0) + al.clone()) * (r(kf - 1.0) + be.clone());
            let den = a.clone() * r(kf + 1.0) * (r(kf) + ga.clone());
            (mid * x.clone() * cur.clone() - low * x2.clone() * prev.clone()) / den
        };
        let origin = || -> (T, T) {
            let c1 = q.clone() / (a.clone() * ga.clone());
            let mid = ga.clone() * one_plus_a.clone() + a_delta_eps.clone() + q.clone();
            let c2 = (mid * c1.clone() - al.clone() * be.clone())
                / (a.clone() * r(2.0) * (r(1.0) + ga.clone()));
            (c1, c2)
        };
        let t1 = q.clone() * x.clone() / (a.clone() * ga.clone());
        Recurrence::<T> {
            x: self.x,
            ctx,
            tol,
            max_terms: self.max_terms,
            t1,
            origin: &origin,
            step: &step,
        }
        .run()
    }
}

struct ConfluentKernel {
    params: ConfluentHeunParams,
    x: f64,
    max_terms: usize,
}

impl Kernel for ConfluentKernel {
    fn run<T: Real>(&self, ctx: T::Ctx, tol: f64) -> Partial {
        let r = |v: f64| T::from_f64(ctx, v);
        let c = &self.params;
        let (p, ga, de, al, si) = (r(c.p), r(c.gamma), r(c.delta), r(c.alpha), r(c.sigma));
        let four_p = r(4.0) * p;
        let x = r(self.x);
        let x2 = x.clone() * x.clone();
        let shift = ga.clone() + de.clone() - four_p.clone();
        let step = |k: usize, cur: &T, prev: &T| -> T {
            let kf = k as f64;
            let mid = r(kf) * (r(kf - 1.0) + shift.clone()) - si.clone();
            let low = four_p.clone() * (r(kf - 1.0) + al.clone());
            let den = r(kf + 1.0) * (r(kf) + ga.clone());
            (mid * x.clone() * cur.clone() + low * x2.clone() * prev.clone()) / den
        };
        let origin = || -> (T, T) {
            let c1 = -si.clone() / ga.clone();
            let c2 = ((shift.clone() - si.clone()) * c1.clone() + four_p.clone() * al.clone())
                / (r(2.0) * (r(1.0) + ga.clone()));
            (c1, c2)
        };
        let t1 = -si.clone() * x.clone() / ga.clone();
        Recurrence::<T> {
            x: self.x,
            ctx,
            tol,
            max_terms: self.max_terms,
            t1,
            origin: &origin,
            step: &step,
        }
        .run()
    }
}

fn check_local_domain(params: &GeneralHeunParams, x: f64) -> Result<()> {
    let radius = params.radius();
    if !(x.abs() < radius) {
        return Err(domain(format!(
            "|x| = {} outside the convergence disk of radius {radius}",
            x.abs()
        )));
    }
    Ok(())
}

fn check_confluent_domain(x: f64) -> Result<()> {
    if !(x.abs() < 1.0) {
        return Err(domain(format!("|x| = {} must be below 1", x.abs())));
    }
    Ok(())
}

/// `Hl(a, q; α, β; γ, δ; x)` for `|x| < min(1, |a|)`.
pub fn eval_heun_local(params: &GeneralHeunParams, x: f64, opts: &SeriesOptions) -> Result<EvalResult> {
    check_local_domain(params, x)?;
    let kernel = LocalKernel {
        params: *params,
        x,
        max_terms: opts.max_terms,
    };
    Ok(EvalResult::from_partial(&evaluate(&kernel, opts.rel_tol)))
}

/// `Hl`, `Hl'` and `Hl''` from the termwise-differentiated series.
pub fn eval_heun_local_derivatives(
    params: &GeneralHeunParams,
    x: f64,
    opts: &SeriesOptions,
) -> Result<SeriesDerivatives> {
    check_local_domain(params, x)?;
    let kernel = LocalKernel {
        params: *params,
        x,
        max_terms: opts.max_terms,
    };
    Ok(SeriesDerivatives::from_partial(&evaluate(&kernel, opts.rel_tol)))
}

/// `HC(p, γ, δ, α, σ; x)` for `|x| < 1`.
pub fn eval_confluent_heun(
    params: &ConfluentHeunParams,
    x: f64,
    opts: &SeriesOptions,
) -> Result<EvalResult> {
    check_confluent_domain(x)?;
    let kernel = ConfluentKernel {
        params: *params,
        x,
        max_terms: opts.max_terms,
    };
    Ok(EvalResult::from_partial(&evaluate(&kernel, opts.rel_tol)))
}

/// `HC`, `HC'` and `HC''` from the termwise-differentiated series.
pub fn eval_confluent_heun_derivatives(
    params: &ConfluentHeunParams,
    x: f64,
    opts: &SeriesOptions,
) -> Result<SeriesDerivatives> {
    check_confluent_domain(x)?;
    let kernel = ConfluentKernel {
        params: *params,
        x,
        max_terms: opts.max_terms,
    };
    Ok(SeriesDerivatives::from_partial(&evaluate(&kernel, opts.rel_tol)))
}

/// Slope of `Hl` at the origin, `q / (aγ)`.
pub fn heun_slope_at_origin(params: &GeneralHeunParams) -> f64 {
    params.q / (params.a * params.gamma)
}

/// Homotopic transformation of `Hl` that exchanges `α ↔ γ+δ-α` and
/// `β ↔ γ+δ-β`:
///
/// ```text
/// Hl(a, q; α, β; γ, δ; x) = (1 - x/a)^e · Hl(a, q - γ(α+β-γ-δ); γ+δ-α, γ+δ-β; γ, δ; x)
/// ```
///
/// Returns the exponent `e = γ + δ - α - β` and the transformed parameters.
pub fn transform_homotopy(params: &GeneralHeunParams) -> (f64, GeneralHeunParams) {
    let p = params;
    let s = p.gamma + p.delta;
    let exponent = -p.alpha - p.beta + s;
    let transformed = GeneralHeunParams {
        a: p.a,
        q: p.q - p.gamma * (p.alpha + p.beta - s),
        alpha: s - p.alpha,
        beta: s - p.beta,
        gamma: p.gamma,
        delta: p.delta,
    };
    (exponent, transformed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hl(a: f64, q: f64, al: f64, be: f64, ga: f64, de: f64) -> GeneralHeunParams {
        GeneralHeunParams::new(a, q, al, be, ga, de).unwrap()
    }

    fn opts() -> SeriesOptions {
        SeriesOptions::default()
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(GeneralHeunParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GeneralHeunParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GeneralHeunParams::new(0.5, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(GeneralHeunParams::new(0.5, 1.0, 1.0, 1.0, -3.0, 1.0).is_err());
        assert!(GeneralHeunParams::new(0.5, 1.0, 1.0, 1.0, -2.5, 1.0).is_ok());
        assert!(ConfluentHeunParams::new(0.0, 1.0, 0.0, 0.5, 1.0).is_err());
        assert!(ConfluentHeunParams::new(1.0, -1.0, 0.0, 0.5, 1.0).is_err());
        assert!(SeriesOptions::new(1, 1e-10).is_err());
        assert!(SeriesOptions::new(10, 0.0).is_err());
        assert!(SeriesOptions::new(10, 1.0).is_err());
    }

    #[test]
    fn epsilon_is_derived() {
        let p = hl(0.5, 0.1, 2.0, 3.0, 1.5, 0.25);
        assert_eq!(p.epsilon(), 2.0 + 3.0 + 1.0 - 1.5 - 0.25);
    }

    #[test]
    fn refuses_outside_the_disk() {
        let p = hl(0.5, 1.0, 2.0, 1.0, 1.0, 1.0);
        assert!(matches!(eval_heun_local(&p, 0.5, &opts()), Err(Error::Domain(_))));
        assert!(matches!(eval_heun_local(&p, -0.6, &opts()), Err(Error::Domain(_))));
        assert!(matches!(eval_heun_local(&p, f64::NAN, &opts()), Err(Error::Domain(_))));
        let p = hl(3.0, 1.0, 2.0, 1.0, 1.0, 1.0);
        assert!(eval_heun_local(&p, 0.99, &opts()).is_ok());
        assert!(eval_heun_local(&p, 1.0, &opts()).is_err());
        let c = ConfluentHeunParams::new(1.0, 1.0, 0.0, 0.5, 2.0).unwrap();
        assert!(eval_confluent_heun(&c, 1.0, &opts()).is_err());
    }

    #[test]
    fn normalized_at_origin() {
        let p = hl(0.7, -1.3, 0.4, 2.2, 1.7, 0.9);
        let r = eval_heun_local(&p, 0.0, &opts()).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
        let c = ConfluentHeunParams::new(1.3, 2.0, 0.5, 0.3, -0.7).unwrap();
        assert_eq!(eval_confluent_heun(&c, 0.0, &opts()).unwrap().value, 1.0);
    }

    #[test]
    fn trivial_family_member_is_constant() {
        // α = 0 and q = 0 make every coefficient beyond c_0 vanish.
        for (theta, gamma) in [(0.5, 1.0), (2.5, 3.0), (-1.2, 0.7)] {
            let p = hl(0.5, 0.0, 0.0, 2.0 * theta, gamma, gamma);
            for x in [-0.4, 0.1, 0.3] {
                assert_eq!(eval_heun_local(&p, x, &opts()).unwrap().value, 1.0);
            }
        }
    }

    #[test]
    fn index_of_coincidence_n1() {
        // F_1(x) = x^2 + (1 - x)^2
        let p = hl(0.5, -1.0, -2.0, 1.0, 1.0, 1.0);
        let v = eval_heun_local(&p, 0.25, &opts()).unwrap().value;
        assert!((v - 0.625).abs() < 1e-15, "{v}");
    }

    #[test]
    fn binomial_power_example() {
        // Hl(1/2, -2; -2, 2; 1, 1; x) = (1 - 2x)^2
        let p = hl(0.5, -2.0, -2.0, 2.0, 1.0, 1.0);
        let v = eval_heun_local(&p, 0.25, &opts()).unwrap().value;
        assert!((v - 0.25).abs() < 1e-15, "{v}");
    }

    #[test]
    fn slope_at_origin() {
        assert_eq!(heun_slope_at_origin(&hl(0.5, -3.0, 1.0, 1.0, 1.0, 1.0)), -6.0);
        assert_eq!(heun_slope_at_origin(&hl(0.5, 0.0, 1.0, 1.0, 1.0, 1.0)), 0.0);
        // q = aαβ with α = 2, β = 3, γ = 2
        let p = hl(0.5, 0.5 * 2.0 * 3.0, 2.0, 3.0, 2.0, 1.0);
        assert_eq!(heun_slope_at_origin(&p), 3.0);
        // Richardson-extrapolated difference quotient at 0
        let d = |h: f64| (eval_heun_local(&p, h, &opts()).unwrap().value - 1.0) / h;
        let h = 1e-4;
        let richardson = 2.0 * d(h / 2.0) - d(h);
        assert!((richardson - 3.0).abs() < 1e-6, "{richardson}");
        let derivs = eval_heun_local_derivatives(&p, 0.0, &opts()).unwrap();
        assert_eq!(derivs.first, 3.0);
    }

    #[test]
    fn confluent_coefficients_of_poisson_coincidence() {
        // K_n(x) = 1 - 2n x + 3n^2 x^2 + ...
        for n in 1..=4 {
            let nf = n as f64;
            let c = ConfluentHeunParams::new(nf, 1.0, 0.0, 0.5, 2.0 * nf).unwrap();
            let d = eval_confluent_heun_derivatives(&c, 0.0, &opts()).unwrap();
            assert_eq!(d.first, -2.0 * nf);
            assert_eq!(d.second / 2.0, 3.0 * nf * nf);
        }
    }

    #[test]
    fn homotopy_parameters() {
        let (n, theta, gamma) = (3.0, 0.75, 2.0);
        let p = hl(0.5, 2.0 * n * theta, 2.0 * n, 2.0 * theta, gamma, gamma);
        let (e, t) = transform_homotopy(&p);
        assert_eq!(e, -2.0 * (n - gamma + theta));
        assert_eq!(t.a(), 0.5);
        assert_eq!(t.q(), 2.0 * (gamma - n) * (gamma - theta));
        assert_eq!(t.alpha(), -2.0 * (n - gamma));
        assert_eq!(t.beta(), 2.0 * (gamma - theta));
        assert_eq!((t.gamma(), t.delta()), (gamma, gamma));
    }

    #[test]
    fn homotopy_on_negative_binomial_coincidence() {
        // Hl(1/2, 1; 2, 1; 1, 1; x) = G_1(-x) = 1/(1 - 2x)
        let p = hl(0.5, 1.0, 2.0, 1.0, 1.0, 1.0);
        let x = 0.2;
        let lhs = eval_heun_local(&p, x, &opts()).unwrap().value;
        assert!((lhs - 1.0 / 0.6).abs() < 1e-14);
        let (e, t) = transform_homotopy(&p);
        let rhs = (1.0 - x / p.a()).powf(e) * eval_heun_local(&t, x, &opts()).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
        let at0 = eval_heun_local(&t, 0.0, &opts()).unwrap().value;
        assert_eq!(at0, 1.0);
    }

    #[test]
    fn reports_non_convergence() {
        let p = hl(0.5, 1.0, 2.0, 1.0, 1.0, 1.0);
        let o = SeriesOptions::new(5, 1e-15).unwrap();
        let r = eval_heun_local(&p, 0.45, &o).unwrap();
        assert!(!r.converged);
        assert!(r.terms_used <= 5);
        assert!(r.error_estimate > 0.0);
    }
}
