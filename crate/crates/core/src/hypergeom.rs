//! Gauss `₂F₁` and Clausen `₃F₂` series, the hypergeometric representation
//! of `Hl(1/2, q; 2q, 1; 1, 1; x)`, and the elementary closed form of
//! `₂F₁(m, 1; m+2k+1; x)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{domain, is_nonpositive_integer, Error, Result};
use crate::exact::{binomial_exact, factorial, int_rational, rational, ExactRational};
use crate::precision::{accumulate, evaluate, Fixed, Kernel, Partial, Real};
use crate::series::{EvalResult, SeriesDerivatives, SeriesOptions};

/// Parameters `(a, b; c)` of `₂F₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gauss2F1Params {
    a: f64,
    b: f64,
    c: f64,
}

impl Gauss2F1Params {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if is_nonpositive_integer(c) {
            return Err(Error::InvalidParams(format!(
                "c must not be zero or a negative integer, got {c}"
            )));
        }
        Ok(Gauss2F1Params { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// True when `a` or `b` is a nonpositive integer, so the series is a
    /// polynomial.
    pub fn terminates(&self) -> bool {
        is_nonpositive_integer(self.a) || is_nonpositive_integer(self.b)
    }
}

/// Parameters `(a1, a2, a3; b1, b2)` of `₃F₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clausen3F2Params {
    a: [f64; 3],
    b: [f64; 2],
}

impl Clausen3F2Params {
    pub fn new(a1: f64, a2: f64, a3: f64, b1: f64, b2: f64) -> Result<Self> {
        if ![a1, a2, a3, b1, b2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        for b in [b1, b2] {
            if is_nonpositive_integer(b) {
                return Err(Error::InvalidParams(format!(
                    "lower parameters must not be zero or negative integers, got {b}"
                )));
            }
        }
        Ok(Clausen3F2Params {
            a: [a1, a2, a3],
            b: [b1, b2],
        })
    }

    pub fn upper(&self) -> [f64; 3] {
        self.a
    }

    pub fn lower(&self) -> [f64; 2] {
        self.b
    }

    /// `b1 + b2 - a1 - a2 - a3`; the unit-argument series converges iff
    /// this is positive.
    pub fn excess(&self) -> f64 {
        self.b[0] + self.b[1] - self.a.iter().sum::<f64>()
    }

    fn terminates(&self) -> bool {
        self.a.iter().any(|&v| is_nonpositive_integer(v))
    }
}

struct GaussKernel {
    p: Gauss2F1Params,
    x: f64,
    max_terms: usize,
}

impl Kernel for GaussKernel {
    fn run<T: Real>(&self, ctx: T::Ctx, tol: f64) -> Partial {
        let r = |v: f64| T::from_f64(ctx, v);
        let Gauss2F1Params { a, b, c } = self.p;
        if self.x == 0.0 {
            let c1 = a * b / c;
            let c2 = c1 * (a + 1.0) * (b + 1.0) / (c + 1.0);
            return Partial {
                sums: vec![1.0, c1, c2],
                magnitudes: vec![1.0, c1.abs(), c2.abs()],
                terms: 1,
                converged: true,
                error_estimate: 0.0,
            };
        }
        let x = r(self.x);
        let mut t = r(1.0);
        let mut sums = [r(1.0), r(0.0), r(0.0)];
        let mut mags = [1.0, 0.0, 0.0];
        let mut last = [1.0f64, 0.0, 0.0];
        let mut small_run = 0;
        let mut converged = false;
        let mut ratio = 1.0f64;
        let mut j = 0usize;
        loop {
            if j + 1 >= self.max_terms {
                break;
            }
            let jf = j as f64;
            let next = t.clone() * (r(a + jf) * r(b + jf)) / (r(c + jf) * r(jf + 1.0)) * x.clone();
            let (nv, tv) = (next.to_f64().abs(), t.to_f64().abs());
            if tv > 0.0 {
                ratio = nv / tv;
            }
            t = next;
            j += 1;
            let jf = j as f64;
            let terms = [t.clone(), r(jf) * t.clone(), r(jf * (jf - 1.0)) * t.clone()];
            for i in 0..3 {
                last[i] = accumulate(&mut sums[i], &mut mags[i], &terms[i]);
            }
            let small = (0..3).all(|i| last[i].abs() <= tol * sums[i].to_f64().abs());
            small_run = if small { small_run + 1 } else { 0 };
            if small_run >= 3 {
                converged = true;
                break;
            }
        }
        let tail = if converged && ratio < 1.0 {
            last[0].abs() * ratio / (1.0 - ratio)
        } else {
            last[0].abs()
        };
        let x = self.x;
        Partial {
            sums: vec![sums[0].to_f64(), sums[1].to_f64() / x, sums[2].to_f64() / (x * x)],
            magnitudes: vec![mags[0], mags[1] / x.abs(), mags[2] / (x * x)],
            terms: j + 1,
            converged,
            error_estimate: tail,
        }
    }
}

fn gauss_partial(p: &Gauss2F1Params, x: f64, opts: &SeriesOptions) -> Result<Partial> {
    if !x.is_finite() {
        return Err(domain(format!("x must be finite, got {x}")));
    }
    if !(x.abs() < 1.0) && !p.terminates() {
        return Err(domain(format!(
            "₂F₁ series diverges at |x| = {} >= 1",
            x.abs()
        )));
    }
    let kernel = GaussKernel {
        p: *p,
        x,
        max_terms: opts.max_terms(),
    };
    Ok(evaluate(&kernel, opts.rel_tol()))
}

/// `₂F₁(a, b; c; x) = Σ_j (a)_j (b)_j / ((c)_j j!) x^j` for `|x| < 1`, or any
/// `x` when the series terminates.
pub fn gauss_2f1(p: &Gauss2F1Params, x: f64, opts: &SeriesOptions) -> Result<EvalResult> {
    let part = gauss_partial(p, x, opts)?;
    Ok(EvalResult {
        value: part.sums[0],
        terms_used: part.terms,
        converged: part.converged,
        error_estimate: part.error_estimate,
    })
}

/// `₂F₁` with its first two derivatives, from the termwise-differentiated
/// series.
pub fn gauss_2f1_derivatives(
    p: &Gauss2F1Params,
    x: f64,
    opts: &SeriesOptions,
) -> Result<SeriesDerivatives> {
    let part = gauss_partial(p, x, opts)?;
    Ok(SeriesDerivatives {
        value: part.sums[0],
        first: part.sums[1],
        second: part.sums[2],
        terms_used: part.terms,
        converged: part.converged,
    })
}

/// Working precision of the Levin transformations.
const LEVIN_BITS: u32 = 384;
/// Largest number of terms fed to a Levin transformation.
const LEVIN_MAX_TERMS: usize = 120;

/// Levin u-transform estimate of `Σ terms`, using every term given.
fn levin_u(terms: &[Fixed], bits: u32) -> Fixed {
    let r = |v: f64| Fixed::from_f64(bits, v);
    let k = terms.len() - 1;
    let mut partial = r(0.0);
    let mut num = r(0.0);
    let mut den = r(0.0);
    let kp1 = (k + 1) as f64;
    let mut binom = BigInt::one();
    for (j, t) in terms.iter().enumerate() {
        partial = partial + t.clone();
        let omega = r((j + 1) as f64) * t.clone();
        let scale = if k == 0 {
            r(1.0)
        } else {
            (r((j + 1) as f64) / r(kp1)).powi(k as u32 - 1)
        };
        let w = Fixed::from_ratio(bits, &binom, &BigInt::one()) * scale / omega;
        if j % 2 == 0 {
            num = num + w.clone() * partial.clone();
            den = den + w;
        } else {
            num = num - w.clone() * partial.clone();
            den = den - w;
        }
        binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
    }
    num / den
}

/// Sums an algebraically converging series by repeated Levin
/// u-transformation of growing prefixes. `term(bits, j)` yields the `j`-th
/// term; the estimate is accepted once two consecutive transforms agree.
fn levin_sum(
    mut term: impl FnMut(u32, usize) -> Fixed,
    opts: &SeriesOptions,
) -> EvalResult {
    let bits = LEVIN_BITS;
    let limit = opts.max_terms().min(LEVIN_MAX_TERMS);
    let mut terms = Vec::with_capacity(limit);
    let mut prev: Option<f64> = None;
    let mut best = (f64::NAN, f64::INFINITY);
    let mut agreeing = 0;
    for j in 0..limit {
        let t = term(bits, j);
        if t.is_zero() {
            // a vanishing term would make ω_j zero; the series has ended
            let value = terms.iter().fold(Fixed::from_f64(bits, 0.0), |acc, v: &Fixed| acc + v.clone());
            return EvalResult::exact(value.to_f64(), j);
        }
        terms.push(t);
        if terms.len() < 3 {
            continue;
        }
        let est = levin_u(&terms, bits).to_f64();
        if let Some(p) = prev {
            let diff = (est - p).abs();
            if diff <= best.1 {
                best = (est, diff);
            }
            if diff <= opts.rel_tol() * est.abs() {
                agreeing += 1;
                if agreeing >= 2 {
                    return EvalResult {
                        value: est,
                        terms_used: terms.len(),
                        converged: true,
                        error_estimate: diff,
                    };
                }
            } else {
                agreeing = 0;
            }
        }
        prev = Some(est);
    }
    EvalResult {
        value: best.0,
        terms_used: terms.len(),
        converged: false,
        error_estimate: best.1,
    }
}

fn clausen_term(p: &Clausen3F2Params) -> impl FnMut(u32, usize) -> Fixed + '_ {
    let mut current: Option<Fixed> = None;
    move |bits, j| {
        let r = |v: f64| Fixed::from_f64(bits, v);
        let next = match current.take() {
            None => r(1.0),
            Some(t) => {
                let k = (j - 1) as f64;
                let num = r(p.a[0] + k) * r(p.a[1] + k) * r(p.a[2] + k);
                let den = r(p.b[0] + k) * r(p.b[1] + k) * r(k + 1.0);
                t * num / den
            }
        };
        current = Some(next.clone());
        next
    }
}

/// `₃F₂(a1, a2, a3; b1, b2; 1)`, summed with Levin u acceleration; requires a
/// positive parameter excess unless the series terminates.
pub fn clausen_3f2_unit(p: &Clausen3F2Params, opts: &SeriesOptions) -> Result<EvalResult> {
    if p.terminates() {
        let n = p
            .a
            .iter()
            .filter(|v| is_nonpositive_integer(**v))
            .map(|v| (-v) as usize)
            .min()
            .unwrap_or(0);
        let mut term = clausen_term(p);
        let bits = LEVIN_BITS;
        let mut acc = Fixed::from_f64(bits, 0.0);
        for j in 0..=n {
            acc = acc + term(bits, j);
        }
        return Ok(EvalResult::exact(acc.to_f64(), n + 1));
    }
    if !(p.excess() > 0.0) {
        return Err(Error::DivergentSeries(format!(
            "₃F₂ at unit argument needs b1 + b2 - a1 - a2 - a3 > 0, got {}",
            p.excess()
        )));
    }
    Ok(levin_sum(clausen_term(p), opts))
}

fn check_hl_q(q: f64) -> Result<()> {
    if !q.is_finite() || is_nonpositive_integer(q) || is_nonpositive_integer(q + 0.5) {
        return Err(domain(format!(
            "q must avoid 0, -1, -2, ... and -1/2, -3/2, ..., got {q}"
        )));
    }
    Ok(())
}

/// `₂F₁(a, b; c; x)` in fixed point, to a truncation tolerance of `2^-bits`.
fn gauss_fixed(bits: u32, a: f64, b: f64, c: f64, x: &Fixed) -> Fixed {
    let r = |v: f64| Fixed::from_f64(bits, v);
    let mut t = r(1.0);
    let mut acc = r(1.0);
    let mut j = 0f64;
    loop {
        t = t * (r(a + j) * r(b + j)) / (r(c + j) * r(j + 1.0)) * x.clone();
        if t.is_zero() {
            return acc;
        }
        acc = acc + t.clone();
        j += 1.0;
    }
}

/// `Hl(1/2, q; 2q, 1; 1, 1; x) = u(x) / u(0)` with
///
/// ```text
/// u(x) = Σ_k (1/2)_k (q)_k / (k! (q+1/2)_k) · q/(q+k) · ₂F₁(2q, 1; 1+2q+2k; x)
/// u(0) = ₃F₂(1/2, q, q; q+1/2, q+1; 1)
/// ```
///
/// Both outer series converge algebraically and are Levin-accelerated.
pub fn eval_hl_hypergeometric(q: f64, x: f64, opts: &SeriesOptions) -> Result<EvalResult> {
    check_hl_q(q)?;
    if !(x.abs() < 1.0) {
        return Err(domain(format!("|x| = {} must be below 1", x.abs())));
    }
    if x == 0.0 {
        return Ok(EvalResult::exact(1.0, 1));
    }
    let clausen = Clausen3F2Params::new(0.5, q, q, q + 0.5, q + 1.0)?;
    let u0 = clausen_3f2_unit(&clausen, opts)?;
    let mut weight: Option<Fixed> = None;
    let ux = levin_sum(
        |bits, k| {
            let r = |v: f64| Fixed::from_f64(bits, v);
            let kf = k as f64;
            // w_k = (1/2)_k (q)_k / (k! (q+1/2)_k) · q/(q+k)
            let w = match weight.take() {
                None => r(1.0),
                Some(w) => {
                    let k1 = kf - 1.0;
                    w * r(0.5 + k1) * r(q + k1) * r(q + k1) / (r(kf) * r(q + 0.5 + k1) * r(q + kf))
                }
            };
            weight = Some(w.clone());
            let f = gauss_fixed(bits, 2.0 * q, 1.0, 1.0 + 2.0 * q + 2.0 * kf, &r(x));
            w * f
        },
        opts,
    );
    let value = ux.value / u0.value;
    Ok(EvalResult {
        value,
        terms_used: ux.terms_used.max(u0.terms_used),
        converged: ux.converged && u0.converged,
        error_estimate: value.abs() * (ux.error_estimate / ux.value.abs() + u0.error_estimate / u0.value.abs()),
    })
}

/// Harmonic number `e_n = 1 + 1/2 + ... + 1/n`, with `e_0 = 0`.
pub fn harmonic(n: u64) -> ExactRational {
    (1..=n).fold(int_rational(BigInt::zero()), |acc, i| {
        acc + rational(BigInt::one(), BigInt::from(i))
    })
}

/// The coefficient
///
/// ```text
/// a_{jk} = (1/(2k)!) (Σ_{i<j} C(2k,i) (-1)^i / (j-i) + (-1)^j C(2k,j) e_{2k})
/// ```
pub fn coefficient_a(j: u64, k: u64) -> ExactRational {
    let two_k = 2 * k;
    let mut acc = int_rational(BigInt::zero());
    for i in 0..j {
        let term = rational(binomial_exact(two_k, i as i64), BigInt::from(j - i));
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let last = int_rational(binomial_exact(two_k, j as i64)) * harmonic(two_k);
    if j % 2 == 0 {
        acc += last;
    } else {
        acc -= last;
    }
    acc / int_rational(factorial(two_k))
}

/// Rising factorial `(r)_len` of a positive integer `r`, exactly.
fn rising(r: u64, len: u64) -> BigInt {
    (0..len).fold(BigInt::one(), |acc, i| acc * (r + i))
}

/// The bracket of the closed form, evaluated as one kernel so that its
/// cancellation triggers precision escalation.
struct ClosedBracket {
    m: u64,
    k: u64,
    x: f64,
    e2k: ExactRational,
    a: Vec<ExactRational>,
}

impl Kernel for ClosedBracket {
    fn run<T: Real>(&self, ctx: T::Ctx, _tol: f64) -> Partial {
        let r = |v: f64| T::from_f64(ctx, v);
        let q = |v: &ExactRational| T::from_ratio(ctx, v.numer(), v.denom());
        let one = BigInt::one();
        let x = r(self.x);
        let two_k = 2 * self.k;
        let one_minus = r(1.0) - x.clone();
        let lead = one_minus.powi(two_k as u32) / T::from_ratio(ctx, &factorial(two_k), &one)
            * (q(&self.e2k) - one_minus.ln());
        let mut acc = r(0.0);
        let mut mag = 0.0;
        accumulate(&mut acc, &mut mag, &lead);
        let mut power = r(1.0);
        for (j, a) in self.a.iter().enumerate() {
            if j > 0 {
                power = power * x.clone();
            }
            accumulate(&mut acc, &mut mag, &-(q(a) * power.clone()));
        }
        // power is now x^{2k}
        for i in 0..self.m.saturating_sub(1) {
            power = power * x.clone();
            let term = power.clone() / T::from_ratio(ctx, &rising(i + 1, two_k + 1), &one);
            accumulate(&mut acc, &mut mag, &-term);
        }
        Partial {
            sums: vec![acc.to_f64()],
            magnitudes: vec![mag],
            terms: self.a.len() + self.m as usize,
            converged: true,
            error_estimate: 0.0,
        }
    }
}

/// Smallest `x` accepted by [`gauss_2f1_closed`]; below it the bracket
/// cancels too strongly to be worth evaluating this way.
pub const CLOSED_FORM_MIN_X: f64 = 0.1;

/// `₂F₁(m, 1; m+2k+1; x)` for `0.1 <= x < 1` from
///
/// ```text
/// (m)_{2k+1} x^{-m-2k} [ (1-x)^{2k}/(2k)! (e_{2k} - log(1-x))
///                        - Σ_{j=0}^{2k} a_{jk} x^j
///                        - Σ_{i=0}^{m-2} x^{i+2k+1} / (i+1)_{2k+1} ]
/// ```
pub fn gauss_2f1_closed(m: u32, k: u32, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("closed form needs 0 < x < 1, got {x}")));
    }
    if x < CLOSED_FORM_MIN_X {
        return Err(domain(format!(
            "closed form refuses x = {x} < {CLOSED_FORM_MIN_X}; use the series"
        )));
    }
    let (m, k) = (m as u64, k as u64);
    let bracket = ClosedBracket {
        m,
        k,
        x,
        e2k: harmonic(2 * k),
        a: (0..=2 * k).map(|j| coefficient_a(j, k)).collect(),
    };
    let b = evaluate(&bracket, 1e-15).sums[0];
    let lead = crate::exact::ratio_to_f64(&rising(m, 2 * k + 1), &BigInt::one());
    Ok(lead * b * x.powi(-((m + 2 * k) as i32)))
}
