//! Indices of coincidence of the binomial (`F_n`), negative binomial (`G_n`)
//! and Poisson (`K_n`) distributions, the derivatives of `K_n`, and the
//! order-2 Rényi and Tsallis entropies built on them.
//!
//! `F_n` and `G_n` are available through several independent formulas
//! (selected by [`FMethod`] / [`GMethod`]); all of them agree wherever they are
//! defined, which the verification suite checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::closed_forms::power_prefactor;
use crate::error::{domain, Error, Result};
use crate::exact::{binomial_exact, central, int_rational, pow4, rational, rational_to_f64, ExactRational};
use crate::poly::{eval_rational_poly, Variable};
use crate::quadrature::{rule128, rule64};
use crate::series::{EvalResult, SeriesOptions};

/// Route used to evaluate the binomial index of coincidence `F_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FMethod {
    /// `Σ_k (C(n,k) x^k (1-x)^{n-k})²`, only on `[0, 1]`.
    Definitional,
    /// `Σ_k C(n,k) C(2k,k) (x² - x)^k`.
    Factored,
    /// Double sum in powers of `(1 - 2x)²` with an alternating inner sum.
    Power,
    /// `Σ_j (1 - 2x)^{2j} 4^{-n} C(2j,j) C(2n-2j,n-j)`.
    Established,
    /// Powers of `x² - x` with coefficients obtained by re-expanding
    /// [`FMethod::Established`].
    Expanded,
}

impl FMethod {
    pub const ALL: [FMethod; 5] = [
        FMethod::Definitional,
        FMethod::Factored,
        FMethod::Power,
        FMethod::Established,
        FMethod::Expanded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FMethod::Definitional => "definitional",
            FMethod::Factored => "factored",
            FMethod::Power => "power",
            FMethod::Established => "established",
            FMethod::Expanded => "expanded",
        }
    }
}

/// Route used to evaluate the negative-binomial index of coincidence `G_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GMethod {
    /// Truncated `Σ_k (C(n+k-1,k) x^k (1+x)^{-n-k})²`, only for `x >= 0`.
    Definitional,
    /// `(1+2x)^{1-2n} Σ_k C(n-1,k) C(2k,k) (x² + x)^k`.
    Factored,
    /// Double sum in powers of `(1 + 2x)` with an alternating inner sum.
    Power,
    /// `Σ_j (1+2x)^{2j-2n+1} 4^{1-n} C(2n-2j-2,n-j-1) C(2j,j)`.
    Established,
}

impl GMethod {
    pub const ALL: [GMethod; 4] = [
        GMethod::Definitional,
        GMethod::Factored,
        GMethod::Power,
        GMethod::Established,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GMethod::Definitional => "definitional",
            GMethod::Factored => "factored",
            GMethod::Power => "power",
            GMethod::Established => "established",
        }
    }
}

/// Order-2 entropy derived from an index of coincidence `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntropyKind {
    /// `-ln s`
    Renyi,
    /// `1 - s`
    Tsallis,
}

impl EntropyKind {
    pub fn name(self) -> &'static str {
        match self {
            EntropyKind::Renyi => "renyi",
            EntropyKind::Tsallis => "tsallis",
        }
    }
}

macro_rules! named_enum {
    ($ty:ty, [$($v:expr),+]) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                [$($v),+]
                    .into_iter()
                    .find(|m| m.name() == s)
                    .ok_or_else(|| Error::InvalidParams(format!("unknown method `{s}`")))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_enum!(
    FMethod,
    [
        FMethod::Definitional,
        FMethod::Factored,
        FMethod::Power,
        FMethod::Established,
        FMethod::Expanded
    ]
);
named_enum!(
    GMethod,
    [GMethod::Definitional, GMethod::Factored, GMethod::Power, GMethod::Established]
);
named_enum!(EntropyKind, [EntropyKind::Renyi, EntropyKind::Tsallis]);

fn require_positive(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    Ok(())
}

fn require_finite(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(domain(format!("x must be finite, got {x}")));
    }
    Ok(())
}

/// `Σ_{i=0}^{m} (-1/4)^i C(m,i) C(2i+2j, i+j)` as an exact rational.
fn alternating_inner(m: u64, j: u64) -> ExactRational {
    // Scale by 4^m so the sum stays integral.
    let mut acc = BigInt::zero();
    for i in 0..=m {
        let term = pow4(m - i) * binomial_exact(m, i as i64) * central(i + j);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    rational(acc, pow4(m))
}

fn f_factored_coefficients(n: u64) -> Vec<ExactRational> {
    (0..=n)
        .map(|k| int_rational(binomial_exact(n, k as i64) * central(k)))
        .collect()
}

fn f_expanded_coefficients(n: u64) -> Vec<ExactRational> {
    (0..=n)
        .map(|k| {
            let inner: BigInt = (k..=n)
                .map(|j| binomial_exact(j, k as i64) * central(j) * central(n - j))
                .sum();
            rational(inner, pow4(n - k))
        })
        .collect()
}

fn f_power_coefficients(n: u64) -> Vec<ExactRational> {
    (0..=n)
        .map(|j| {
            let outer = rational(binomial_exact(n, j as i64), pow4(j));
            outer * alternating_inner(n - j, j)
        })
        .collect()
}

fn f_established_coefficients(n: u64) -> Vec<ExactRational> {
    (0..=n)
        .map(|j| rational(central(j) * central(n - j), pow4(n)))
        .collect()
}

fn f_definitional(n: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!(
            "definitional F_n needs 0 <= x <= 1, got {x}"
        )));
    }
    let y = 1.0 - x;
    Ok((0..=n)
        .map(|k| {
            let c = rational_to_f64(&int_rational(binomial_exact(n as u64, k as i64)));
            let p = c * x.powi(k as i32) * y.powi((n - k) as i32);
            p * p
        })
        .sum())
}

/// Binomial index of coincidence `F_n(x)` by the selected route.
pub fn eval_f(n: u32, x: f64, method: FMethod) -> Result<f64> {
    require_positive(n)?;
    require_finite(x)?;
    let n64 = n as u64;
    match method {
        FMethod::Definitional => f_definitional(n, x),
        FMethod::Factored => Ok(eval_rational_poly(
            &f_factored_coefficients(n64),
            Variable::XxMinusX,
            x,
        )),
        FMethod::Expanded => Ok(eval_rational_poly(
            &f_expanded_coefficients(n64),
            Variable::XxMinusX,
            x,
        )),
        FMethod::Power => Ok(eval_rational_poly(
            &f_power_coefficients(n64),
            Variable::OneMinusTwoXSq,
            x,
        )),
        FMethod::Established => Ok(eval_rational_poly(
            &f_established_coefficients(n64),
            Variable::OneMinusTwoXSq,
            x,
        )),
    }
}

fn g_factored_coefficients(n: u64) -> Vec<ExactRational> {
    (0..n)
        .map(|k| int_rational(binomial_exact(n - 1, k as i64) * central(k)))
        .collect()
}

fn g_power_coefficients(n: u64) -> Vec<ExactRational> {
    (0..n)
        .map(|j| {
            let outer = rational(binomial_exact(n - 1, j as i64), pow4(j));
            outer * alternating_inner(n - 1 - j, j)
        })
        .collect()
}

fn g_established_coefficients(n: u64) -> Vec<ExactRational> {
    (0..n)
        .map(|j| {
            let num = central(n - 1 - j) * central(j) * BigInt::from(4);
            rational(num, pow4(n))
        })
        .collect()
}

fn g_definitional(n: u32, x: f64, opts: &SeriesOptions) -> Result<EvalResult> {
    if x < 0.0 {
        return Err(domain(format!("definitional G_n needs x >= 0, got {x}")));
    }
    let nf = n as f64;
    let step = x / (1.0 + x);
    let mut w = (1.0 + x).powf(-nf);
    let mut sum = w * w;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let growth = (nf + kf) / (kf + 1.0) * step;
        let ratio = growth * growth;
        let term = w * w;
        // The squared term ratio decreases towards (x/(1+x))², so the current
        // ratio bounds every later one.
        if term <= opts.rel_tol() * sum && ratio < 1.0 {
            let tail = term * ratio / (1.0 - ratio);
            return Ok(EvalResult {
                value: sum,
                terms_used: k + 1,
                converged: true,
                error_estimate: tail,
            });
        }
        if k + 1 >= opts.max_terms() {
            return Ok(EvalResult {
                value: sum,
                terms_used: k + 1,
                converged: false,
                error_estimate: term,
            });
        }
        w *= growth;
        sum += w * w;
        k += 1;
    }
}

/// Negative-binomial index of coincidence `G_n(x)` by the selected route.
pub fn eval_g(n: u32, x: f64, method: GMethod, opts: &SeriesOptions) -> Result<EvalResult> {
    require_positive(n)?;
    require_finite(x)?;
    let n64 = n as u64;
    if method == GMethod::Definitional {
        return g_definitional(n, x, opts);
    }
    let base = 1.0 + 2.0 * x;
    if base == 0.0 {
        return Err(Error::Pole("closed forms of G_n have a pole at x = -1/2".into()));
    }
    let prefactor = power_prefactor(base, 1.0 - 2.0 * n as f64)?;
    let (coeffs, var) = match method {
        GMethod::Factored => (g_factored_coefficients(n64), Variable::XxPlusX),
        GMethod::Power => (g_power_coefficients(n64), Variable::OnePlusTwoXSq),
        GMethod::Established => (g_established_coefficients(n64), Variable::OnePlusTwoXSq),
        GMethod::Definitional => unreachable!(),
    };
    let value = prefactor * eval_rational_poly(&coeffs, var, x);
    Ok(EvalResult::exact(value, coeffs.len()))
}

/// Poisson probabilities `e^{-λ} λ^k / k!` for `k = 0..=k_max`, built outwards
/// from the mode so that neither end underflows prematurely.
fn poisson_weights(lambda: f64, k_max: usize) -> Vec<f64> {
    let mut w = vec![0.0; k_max + 1];
    if lambda == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let mode = (lambda.floor() as usize).min(k_max);
    let ln_fact: f64 = (2..=mode).map(|i| (i as f64).ln()).sum();
    w[mode] = (-lambda + mode as f64 * lambda.ln() - ln_fact).exp();
    for k in mode + 1..=k_max {
        w[k] = w[k - 1] * lambda / k as f64;
    }
    for k in (0..mode).rev() {
        w[k] = w[k + 1] * (k + 1) as f64 / lambda;
    }
    w
}

/// Truncation index for the Poisson sums.
fn k_truncation(n: u32, x: f64) -> usize {
    let spread = (4.0 * n as f64 * x).ceil();
    50usize.max(spread as usize + 40)
}

/// Poisson index of coincidence `K_n(x) = Σ_k (e^{-nx} (nx)^k / k!)²`.
pub fn eval_k(n: u32, x: f64, opts: &SeriesOptions) -> Result<EvalResult> {
    require_positive(n)?;
    require_finite(x)?;
    if x < 0.0 {
        return Err(domain(format!("K_n needs x >= 0, got {x}")));
    }
    let lambda = n as f64 * x;
    let wanted = k_truncation(n, x);
    let k_max = wanted.min(opts.max_terms() - 1);
    let w = poisson_weights(lambda, k_max);
    let value: f64 = w.iter().map(|v| v * v).sum();
    let last = w[k_max] * w[k_max];
    let ratio = (lambda / (k_max as f64 + 1.0)).powi(2);
    let converged = k_max == wanted;
    let error_estimate = if converged && ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        last
    };
    Ok(EvalResult {
        value,
        terms_used: k_max + 1,
        converged,
        error_estimate,
    })
}

/// `(2/π) ∫_0^{π/2} sin^{2j}t · e^{-4nx sin²t} dt` with the 64-node rule, and
/// the difference to the 128-node rule.
fn k_integral(n: u32, j: u32, x: f64) -> (f64, f64) {
    let c = 4.0 * n as f64 * x;
    let f = |t: f64| {
        let s2 = t.sin().powi(2);
        s2.powi(j as i32) * (-c * s2).exp()
    };
    let coarse = rule64().integrate(0.0, PI / 2.0, f);
    let fine = rule128().integrate(0.0, PI / 2.0, f);
    (2.0 / PI * coarse, 2.0 / PI * (coarse - fine).abs())
}

fn check_k_args(n: u32, x: f64) -> Result<()> {
    require_positive(n)?;
    require_finite(x)?;
    if x < 0.0 {
        return Err(domain(format!("x must be nonnegative, got {x}")));
    }
    Ok(())
}

/// `K_n^{(j)}(x)` from the integral representation
///
/// ```text
/// K_n^{(j)}(x) = (2/π) (-4n)^j ∫_0^{π/2} sin^{2j}t · e^{-4nx sin²t} dt
/// ```
///
/// by 64-node Gauss–Legendre quadrature; `error_estimate` is the change when
/// the rule is doubled.
pub fn eval_k_derivative(n: u32, j: u32, x: f64) -> Result<EvalResult> {
    check_k_args(n, x)?;
    let (integral, spread) = k_integral(n, j, x);
    let scale = (-4.0 * n as f64).powi(j as i32);
    Ok(EvalResult {
        value: scale * integral,
        terms_used: 64,
        converged: true,
        error_estimate: scale.abs() * spread,
    })
}

/// `K_n^{(j)}(x)` by differentiating the truncated Poisson sum term by term.
///
/// Each term is `e^{-2nx} n^{2k} x^{2k} / (k!)²`; its `j`-th derivative
/// follows from the Leibniz rule.
pub fn k_termwise_derivative(n: u32, j: u32, x: f64) -> Result<f64> {
    check_k_args(n, x)?;
    let nf = n as f64;
    let k_max = k_truncation(n, x) + j as usize;
    let binom_j: Vec<f64> = (0..=j)
        .map(|i| rational_to_f64(&int_rational(binomial_exact(j as u64, i as i64))))
        .collect();
    let neg2n = -2.0 * nf;
    let mut total = 0.0;
    if x == 0.0 {
        // only x^{2k-i} with 2k = i survives
        for k in 0..=(j as usize / 2) {
            let i = 2 * k;
            let mut coeff = 1.0;
            for m in 1..=k {
                coeff *= nf * nf / (m as f64 * m as f64);
            }
            let falling: f64 = (0..i).map(|r| (2 * k - r) as f64).product();
            total += binom_j[i] * neg2n.powi(j as i32 - i as i32) * falling * coeff;
        }
        return Ok(total);
    }
    let w = poisson_weights(nf * x, k_max);
    for (k, wk) in w.iter().enumerate() {
        let base = wk * wk;
        if base == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        let mut falling = 1.0;
        for i in 0..=(j as usize).min(2 * k) {
            if i > 0 {
                falling *= (2 * k + 1 - i) as f64;
            }
            inner += binom_j[i] * neg2n.powi(j as i32 - i as i32) * falling / x.powi(i as i32);
        }
        total += base * inner;
    }
    Ok(total)
}

/// `HC(n, j+1, 0, j+1/2, 2n(2j+1); x) = K_n^{(j)}(x) / K_n^{(j)}(0)`, with
/// `K_n^{(j)}(0) = (-n)^j C(2j,j)`.
pub fn eval_hc_family(n: u32, j: u32, x: f64) -> Result<f64> {
    check_k_args(n, x)?;
    let (integral, _) = k_integral(n, j, x);
    let scale = rational_to_f64(&rational(pow4(j as u64), central(j as u64)));
    Ok(scale * integral)
}

/// `K_n^{(j)}(0) = (-n)^j C(2j, j)`, exactly.
pub fn k_derivative_at_origin(n: u32, j: u32) -> BigInt {
    let mut v = central(j as u64);
    let nj = (0..j).fold(BigInt::one(), |acc, _| acc * BigInt::from(n));
    v *= nj;
    if j % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Order-2 entropy of an index of coincidence.
pub fn entropy(s: f64, kind: EntropyKind) -> Result<f64> {
    match kind {
        EntropyKind::Renyi => {
            if !(s > 0.0) {
                return Err(domain(format!("Rényi entropy needs s > 0, got {s}")));
            }
            Ok(-s.ln())
        }
        EntropyKind::Tsallis => Ok(1.0 - s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SeriesOptions {
        SeriesOptions::default()
    }

    fn f_oracle(n: u32, x: f64) -> f64 {
        // direct enumeration in exact rationals
        let xr = crate::exact::f64_to_rational(x);
        let one = int_rational(BigInt::one());
        let mut acc = int_rational(BigInt::zero());
        for k in 0..=n {
            let p = int_rational(binomial_exact(n as u64, k as i64))
                * xr.pow(k as i32)
                * (&one - &xr).pow((n - k) as i32);
            acc += &p * &p;
        }
        rational_to_f64(&acc)
    }

    #[test]
    fn f_spot_values() {
        for m in FMethod::ALL {
            for n in 1..6 {
                assert_eq!(eval_f(n, 0.0, m).unwrap(), 1.0, "{m} n={n}");
            }
            assert!((eval_f(1, 0.25, m).unwrap() - 0.625).abs() < 1e-16, "{m}");
            assert!((eval_f(2, 0.5, m).unwrap() - 0.375).abs() < 1e-16, "{m}");
        }
        assert!(matches!(eval_f(3, 1.2, FMethod::Definitional), Err(Error::Domain(_))));
        assert!(eval_f(3, 1.2, FMethod::Established).is_ok());
        assert!(eval_f(0, 0.2, FMethod::Factored).is_err());
    }

    #[test]
    fn f_routes_match_exact_enumeration() {
        for n in [1, 3, 7, 20] {
            for x in [0.01, 0.3, 0.5, 0.77] {
                let exact = f_oracle(n, x);
                for m in FMethod::ALL {
                    let v = eval_f(n, x, m).unwrap();
                    assert!((v - exact).abs() <= 1e-14 * exact, "{m} n={n} x={x}: {v} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn g_spot_values() {
        for m in GMethod::ALL {
            for n in 1..5 {
                assert_eq!(eval_g(n, 0.0, m, &opts()).unwrap().value, 1.0, "{m}");
            }
            let v = eval_g(1, 0.5, m, &opts()).unwrap().value;
            assert!((v - 0.5).abs() < 1e-15, "{m}: {v}");
            let v = eval_g(2, 1.0, m, &opts()).unwrap().value;
            assert!((v - 5.0 / 27.0).abs() < 1e-15, "{m}: {v}");
        }
        assert!(matches!(
            eval_g(2, -0.1, GMethod::Definitional, &opts()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval_g(2, -0.5, GMethod::Factored, &opts()),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn g_definitional_tail_bound_holds() {
        let o = SeriesOptions::new(10_000, 1e-6).unwrap();
        let exact = eval_g(6, 2.0, GMethod::Established, &opts()).unwrap().value;
        let r = eval_g(6, 2.0, GMethod::Definitional, &o).unwrap();
        assert!(r.converged);
        assert!(exact - r.value >= 0.0);
        assert!(exact - r.value <= r.error_estimate * (1.0 + 1e-9));
    }

    #[test]
    fn k_spot_values() {
        for n in 1..5 {
            assert_eq!(eval_k(n, 0.0, &opts()).unwrap().value, 1.0);
        }
        // 50-term truncation of the definition, summed from the k = 0 end
        let mut w = (-0.1f64).exp();
        let mut oracle = w * w;
        for k in 1..50 {
            w *= 0.1 / k as f64;
            oracle += w * w;
        }
        let v = eval_k(1, 0.1, &opts()).unwrap().value;
        assert!((v - oracle).abs() < 1e-16, "{v} vs {oracle}");
        assert!((v - 0.826_938).abs() < 1e-6);
        assert!(eval_k(1, -0.1, &opts()).is_err());
    }

    #[test]
    fn k_derivative_at_origin_values() {
        assert_eq!(k_derivative_at_origin(2, 1), BigInt::from(-4));
        assert_eq!(k_derivative_at_origin(1, 2), BigInt::from(6));
        let v = eval_k_derivative(2, 1, 0.0).unwrap().value;
        assert!((v + 4.0).abs() < 1e-13);
        let v = eval_k_derivative(1, 2, 0.0).unwrap().value;
        assert!((v - 6.0).abs() < 1e-13);
        assert_eq!(k_termwise_derivative(2, 1, 0.0).unwrap(), -4.0);
        assert_eq!(k_termwise_derivative(1, 2, 0.0).unwrap(), 6.0);
    }

    #[test]
    fn k_derivative_matches_finite_differences() {
        let k = |x: f64| eval_k(1, x, &opts()).unwrap().value;
        let h = 1e-3;
        let x = 0.1;
        let fd = (k(x - 2.0 * h) - 8.0 * k(x - h) + 8.0 * k(x + h) - k(x + 2.0 * h)) / (12.0 * h);
        let q = eval_k_derivative(1, 1, x).unwrap().value;
        assert!((q - fd).abs() < 1e-9, "{q} vs {fd}");
        let zeroth = eval_k_derivative(3, 0, 0.4).unwrap().value;
        assert!((zeroth - eval_k(3, 0.4, &opts()).unwrap().value).abs() < 1e-14);
    }

    #[test]
    fn hc_family_normalization() {
        for n in 1..4 {
            for j in 0..5 {
                assert!((eval_hc_family(n, j, 0.0).unwrap() - 1.0).abs() < 1e-14);
            }
            let k = eval_k(n, 0.3, &opts()).unwrap().value;
            assert!((eval_hc_family(n, 0, 0.3).unwrap() - k).abs() < 1e-14);
        }
        assert!(eval_hc_family(1, 1, -0.2).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(1.0, EntropyKind::Renyi).unwrap(), 0.0);
        assert_eq!(entropy(1.0, EntropyKind::Tsallis).unwrap(), 0.0);
        let s = eval_f(2, 0.5, FMethod::Established).unwrap();
        assert!((entropy(s, EntropyKind::Renyi).unwrap() - (8.0f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(entropy(s, EntropyKind::Tsallis).unwrap(), 0.625);
        assert!(entropy(0.0, EntropyKind::Renyi).is_err());
        assert!(entropy(-0.5, EntropyKind::Tsallis).is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in FMethod::ALL {
            assert_eq!(m.name().parse::<FMethod>().unwrap(), m);
        }
        for m in GMethod::ALL {
            assert_eq!(m.to_string().parse::<GMethod>().unwrap(), m);
        }
        assert!("bogus".parse::<FMethod>().is_err());
        assert_eq!("renyi".parse::<EntropyKind>().unwrap(), EntropyKind::Renyi);
    }
}
