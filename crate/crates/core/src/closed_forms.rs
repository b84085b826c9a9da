//! Finite-sum closed forms for two families of local Heun functions with
//! `a = 1/2` and `γ = δ`, and for the sample family built from them.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{domain, is_nonpositive_integer, Error, Result};
use crate::exact::{binomial_exact, central, int_rational, pow4, rational, ExactInteger, ExactRational};
use crate::poly::{eval_rational_poly, Variable};
use crate::precision::{evaluate, Kernel, Partial, Real};

/// Rising factorial `(r)_k = r(r+1)...(r+k-1)`, with `(r)_0 = 1`.
pub fn pochhammer(r: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (r + i as f64))
}

/// Double factorial with `0!! = (-1)!! = 1`.
pub fn double_factorial(k: i64) -> ExactInteger {
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// Parameters of `Hl(1/2, -2nθ; -2n, 2θ; γ, γ; x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParamsNeg {
    n: u32,
    theta: f64,
    gamma: f64,
}

impl FamilyParamsNeg {
    pub fn new(n: u32, theta: f64, gamma: f64) -> Result<Self> {
        if !theta.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidParams("theta and gamma must be finite".into()));
        }
        if is_nonpositive_integer(gamma) {
            return Err(Error::InvalidParams(format!(
                "gamma must not be zero or a negative integer, got {gamma}"
            )));
        }
        Ok(FamilyParamsNeg { n, theta, gamma })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The Heun parameters `(a, q, α, β, γ, δ)` this family member stands for.
    pub fn heun_params(&self) -> [f64; 6] {
        let n = self.n as f64;
        [0.5, -2.0 * n * self.theta, -2.0 * n, 2.0 * self.theta, self.gamma, self.gamma]
    }
}

/// Parameters of `Hl(1/2, 2nθ; 2n, 2θ; γ, γ; x)` with integer `0 < γ ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParamsPos {
    n: u32,
    theta: f64,
    gamma: u32,
}

impl FamilyParamsPos {
    pub fn new(n: u32, theta: f64, gamma: u32) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParams("theta must be finite".into()));
        }
        if gamma == 0 || gamma > n {
            return Err(Error::InvalidParams(format!(
                "need 0 < gamma <= n, got gamma = {gamma}, n = {n}"
            )));
        }
        Ok(FamilyParamsPos { n, theta, gamma })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn heun_params(&self) -> [f64; 6] {
        let n = self.n as f64;
        let g = self.gamma as f64;
        [0.5, 2.0 * n * self.theta, 2.0 * n, 2.0 * self.theta, g, g]
    }

    /// Exponent of the `(1 - 2x)` prefactor, `-2(n - γ + θ)`.
    pub fn exponent(&self) -> f64 {
        -2.0 * (self.n as f64 - self.gamma as f64 + self.theta)
    }
}

struct FamilyKernel {
    n: u32,
    theta: f64,
    gamma: f64,
    x: f64,
}

impl Kernel for FamilyKernel {
    fn run<T: Real>(&self, ctx: T::Ctx, _tol: f64) -> Partial {
        let r = |v: f64| T::from_f64(ctx, v);
        let y: T = Variable::XxMinusX.at(ctx, self.x);
        let one = BigInt::one();
        let (theta, gamma) = (r(self.theta), r(self.gamma));
        let mut acc = r(0.0);
        let mut mag = 0.0;
        let mut ratio = r(1.0);
        let mut power = r(1.0);
        for k in 0..=self.n {
            if k > 0 {
                let kf = (k - 1) as f64;
                ratio = ratio * (theta.clone() + r(kf)) / (gamma.clone() + r(kf));
                power = power * y.clone();
            }
            let binom = pow4(k as u64) * binomial_exact(self.n as u64, k as i64);
            let term = T::from_ratio(ctx, &binom, &one) * ratio.clone() * power.clone();
            crate::precision::accumulate(&mut acc, &mut mag, &term);
        }
        Partial {
            sums: vec![acc.to_f64()],
            magnitudes: vec![mag],
            terms: self.n as usize + 1,
            converged: true,
            error_estimate: 0.0,
        }
    }
}

fn family_sum(n: u32, theta: f64, gamma: f64, x: f64) -> f64 {
    evaluate(&FamilyKernel { n, theta, gamma, x }, 1e-15).sums[0]
}

/// `Hl(1/2, -2nθ; -2n, 2θ; γ, γ; x) = Σ_k 4^k C(n,k) (θ)_k/(γ)_k (x² - x)^k`,
/// a polynomial defined for every real `x`.
pub fn eval_family_negative(fp: &FamilyParamsNeg, x: f64) -> f64 {
    family_sum(fp.n, fp.theta, fp.gamma, x)
}

/// `Hl(1/2, 2nθ; 2n, 2θ; γ, γ; x)
///   = (1 - 2x)^{-2(n-γ+θ)} Σ_k 4^k C(n-γ,k) (γ-θ)_k/(γ)_k (x² - x)^k`.
pub fn eval_family_positive(fp: &FamilyParamsPos, x: f64) -> Result<f64> {
    let e = fp.exponent();
    let base = 1.0 - 2.0 * x;
    let prefactor = power_prefactor(base, e)?;
    let gamma = fp.gamma as f64;
    Ok(prefactor * family_sum(fp.n - fp.gamma, gamma - fp.theta, gamma, x))
}

pub(crate) fn power_prefactor(base: f64, e: f64) -> Result<f64> {
    if e == 0.0 {
        return Ok(1.0);
    }
    if base == 0.0 && e < 0.0 {
        return Err(Error::Pole(format!(
            "prefactor base vanishes with negative exponent {e}"
        )));
    }
    if base < 0.0 && e.fract() != 0.0 {
        return Err(domain(format!(
            "negative base {base} with non-integer exponent {e}"
        )));
    }
    if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        Ok(base.powi(e as i32))
    } else {
        Ok(base.powf(e))
    }
}

/// Coefficients of the sample family in powers of `(x - 1/2)²`.
fn sample_coefficients(n: u32, i: u32) -> Vec<ExactRational> {
    let (n, i) = (n as u64, i as u64);
    let scale = rational(
        double_factorial(2 * i as i64),
        double_factorial(2 * i as i64 - 1) * pow4(n) * binomial_exact(n, i as i64),
    );
    (0..=n - i)
        .map(|j| {
            let c = pow4(j)
                * binomial_exact(i + j, i as i64)
                * central(i + j)
                * central(n - i - j);
            &scale * int_rational(c)
        })
        .collect()
}

/// The family `Hl(1/2, (i-n)(2i+1); 2(i-n), 2i+1; i+1, i+1; x)` for
/// `i = 0..=n`, as the finite sum
///
/// ```text
/// (2i)!!/(2i-1)!! 4^{-n} C(n,i)^{-1} Σ_j 4^j C(i+j,i) C(2i+2j,i+j) C(2n-2i-2j,n-i-j) (x - 1/2)^{2j}
/// ```
pub fn eval_sample_family(n: u32, i: u32, x: f64) -> Result<f64> {
    if i > n {
        return Err(Error::InvalidParams(format!("need i <= n, got i = {i}, n = {n}")));
    }
    if !x.is_finite() {
        return Err(domain("x must be finite"));
    }
    Ok(eval_rational_poly(&sample_coefficients(n, i), Variable::XMinusHalfSq, x))
}

/// Heun parameters `(a, q, α, β, γ, δ)` of the sample family member.
pub fn sample_family_params(n: u32, i: u32) -> [f64; 6] {
    let (n, i) = (n as f64, i as f64);
    [0.5, (i - n) * (2.0 * i + 1.0), 2.0 * (i - n), 2.0 * i + 1.0, i + 1.0, i + 1.0]
}
