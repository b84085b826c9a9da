//! Working precision for the series and polynomial kernels.
//!
//! Every kernel is written once against [`Real`] and first run in `f64`. When
//! the terms it summed are much larger than the result (cancellation), the
//! kernel is re-run in [`Fixed`] binary fixed point, doubling the number of
//! fraction bits until two runs that differ by a guard width agree. Inputs are
//! doubles, which are exact dyadic rationals, so the escalated runs see
//! exactly the same problem as the `f64` run.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{decompose, ldexp_bigint};

pub(crate) trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Copy;

    fn from_f64(ctx: Self::Ctx, v: f64) -> Self;
    fn from_ratio(ctx: Self::Ctx, num: &BigInt, den: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    /// Natural logarithm; `self > 0`.
    fn ln(&self) -> Self;

    fn powi(&self, n: u32) -> Self {
        let mut acc = self.clone() / self.clone();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Real for f64 {
    type Ctx = ();

    fn from_f64(_: (), v: f64) -> f64 {
        v
    }

    fn from_ratio(_: (), num: &BigInt, den: &BigInt) -> f64 {
        crate::exact::ratio_to_f64(num, den)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn ln(&self) -> f64 {
        f64::ln(*self)
    }

    fn powi(&self, n: u32) -> f64 {
        let mut acc = 1.0;
        for _ in 0..n {
            acc *= *self;
        }
        acc
    }
}

/// Binary fixed point: `mant * 2^-bits`.
#[derive(Clone, Debug)]
pub(crate) struct Fixed {
    mant: BigInt,
    bits: u32,
}

impl Fixed {
    fn raw(mant: BigInt, bits: u32) -> Self {
        Fixed { mant, bits }
    }

    fn one(bits: u32) -> Self {
        Fixed::raw(BigInt::one() << bits as usize, bits)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// `2 * atanh(z)` for `|z| <= 1/3`.
    fn two_atanh(z: &Fixed) -> Fixed {
        let z2 = z.clone() * z.clone();
        let mut power = z.clone();
        let mut acc = z.clone();
        let mut k: i64 = 1;
        loop {
            power = power * z2.clone();
            if power.is_zero() {
                break;
            }
            k += 2;
            acc = acc + Fixed::raw(&power.mant / k, power.bits);
        }
        Fixed::raw(acc.mant << 1usize, acc.bits)
    }

    fn ln2(bits: u32) -> Fixed {
        // ln 2 = 2 atanh(1/3)
        let third = Fixed::raw((BigInt::one() << bits as usize) / 3, bits);
        Fixed::two_atanh(&third)
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        debug_assert_eq!(self.bits, rhs.bits);
        Fixed::raw(self.mant + rhs.mant, self.bits)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        debug_assert_eq!(self.bits, rhs.bits);
        Fixed::raw(self.mant - rhs.mant, self.bits)
    }
}

impl Mul for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: Fixed) -> Fixed {
        debug_assert_eq!(self.bits, rhs.bits);
        // truncate towards zero so that repeated products of a negative value
        // decay to zero instead of sticking at -1 ulp
        let prod = self.mant * rhs.mant;
        let mag = prod.magnitude() >> self.bits as usize;
        Fixed::raw(BigInt::from_biguint(prod.sign(), mag), self.bits)
    }
}

impl Div for Fixed {
    type Output = Fixed;
    fn div(self, rhs: Fixed) -> Fixed {
        debug_assert_eq!(self.bits, rhs.bits);
        assert!(!rhs.is_zero(), "fixed-point division by zero");
        Fixed::raw((self.mant << self.bits as usize) / rhs.mant, self.bits)
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed::raw(-self.mant, self.bits)
    }
}

impl Real for Fixed {
    type Ctx = u32;

    fn from_f64(bits: u32, v: f64) -> Fixed {
        let (m, e) = decompose(v);
        let shift = e + bits as i64;
        let mant = if shift >= 0 {
            m << shift as usize
        } else {
            m >> (-shift) as usize
        };
        Fixed::raw(mant, bits)
    }

    fn from_ratio(bits: u32, num: &BigInt, den: &BigInt) -> Fixed {
        Fixed::raw((num << bits as usize) / den, bits)
    }

    fn to_f64(&self) -> f64 {
        ldexp_bigint(&self.mant, -(self.bits as i64))
    }

    fn ln(&self) -> Fixed {
        assert!(self.mant.is_positive(), "logarithm of a non-positive value");
        let bits = self.bits;
        // Scale into [2/3, 4/3) by a power of two, then use the atanh series.
        let top = self.mant.bits() as i64 - bits as i64;
        let mut e = top;
        let mut w = if e >= 0 {
            Fixed::raw(&self.mant >> e as usize, bits)
        } else {
            Fixed::raw(&self.mant << (-e) as usize, bits)
        };
        let four_thirds = Fixed::raw((BigInt::one() << (bits as usize + 2)) / 3, bits);
        while w.mant > four_thirds.mant {
            w = Fixed::raw(w.mant >> 1usize, bits);
            e += 1;
        }
        let two_thirds = Fixed::raw((BigInt::one() << (bits as usize + 1)) / 3, bits);
        while w.mant < two_thirds.mant {
            w = Fixed::raw(w.mant << 1usize, bits);
            e -= 1;
        }
        let one = Fixed::one(bits);
        let z = (w.clone() - one.clone()) / (w + one);
        let mut out = Fixed::two_atanh(&z);
        if e != 0 {
            let ln2 = Fixed::ln2(bits);
            out = out + Fixed::raw(ln2.mant * e, bits);
        }
        out
    }
}

/// Result of one kernel run: a handful of sums evaluated together.
#[derive(Clone, Debug)]
pub(crate) struct Partial {
    pub sums: Vec<f64>,
    /// Sum of absolute values of the terms behind each entry of `sums`.
    pub magnitudes: Vec<f64>,
    pub terms: usize,
    pub converged: bool,
    pub error_estimate: f64,
}

pub(crate) trait Kernel {
    /// Runs the computation in working precision `T`. `tol` is the relative
    /// truncation tolerance for any infinite series inside the kernel.
    fn run<T: Real>(&self, ctx: T::Ctx, tol: f64) -> Partial;
}

/// Largest tolerated ratio between summed magnitudes and result before the
/// kernel is re-run in fixed point.
const CANCELLATION_LIMIT: f64 = 64.0;
const GUARD_BITS: u32 = 32;
const MAX_BITS: u32 = 4096;
/// Truncation tolerance used inside escalated runs.
const FIXED_TOL: f64 = 1e-21;

fn needs_escalation(p: &Partial) -> bool {
    p.sums
        .iter()
        .zip(&p.magnitudes)
        .any(|(s, m)| *m > CANCELLATION_LIMIT * s.abs())
}

fn initial_bits(p: &Partial) -> u32 {
    let mut need = 0f64;
    for (s, m) in p.sums.iter().zip(&p.magnitudes) {
        let m = m.max(f64::MIN_POSITIVE);
        let floor = m * 2f64.powi(-52);
        let s = s.abs().max(floor);
        let v = m.log2().max(0.0) + (1.0 / s).log2().max(0.0);
        need = need.max(v);
    }
    let terms = (p.terms.max(1) as f64).log2();
    let bits = 96.0 + need + terms;
    ((bits / 32.0).ceil() as u32 * 32).min(MAX_BITS)
}

fn agree(lo: &Partial, hi: &Partial) -> bool {
    lo.sums
        .iter()
        .zip(&hi.sums)
        .all(|(a, b)| (a - b).abs() <= 2f64.powi(-55) * b.abs())
}

/// Evaluates `kernel`, escalating precision when cancellation is detected.
pub(crate) fn evaluate<K: Kernel>(kernel: &K, rel_tol: f64) -> Partial {
    let first = kernel.run::<f64>((), rel_tol);
    if !first.converged || !needs_escalation(&first) {
        return first;
    }
    let tol = rel_tol.min(FIXED_TOL);
    let mut bits = initial_bits(&first);
    loop {
        let lo = kernel.run::<Fixed>(bits, tol);
        let mut hi = kernel.run::<Fixed>(bits + GUARD_BITS, tol);
        if agree(&lo, &hi) || bits >= MAX_BITS {
            let spread = lo
                .sums
                .iter()
                .zip(&hi.sums)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            hi.error_estimate = hi.error_estimate.max(spread);
            return hi;
        }
        bits = (bits * 2).min(MAX_BITS);
    }
}

/// Adds `term` to `acc` and its magnitude to `mag`.
pub(crate) fn accumulate<T: Real>(acc: &mut T, mag: &mut f64, term: &T) -> f64 {
    let t = term.to_f64();
    *acc = acc.clone() + term.clone();
    *mag += t.abs();
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(v: f64) -> Fixed {
        Fixed::from_f64(200, v)
    }

    #[test]
    fn fixed_arithmetic_matches_double() {
        let a = fx(0.3);
        let b = fx(-1.75);
        assert_eq!((a.clone() + b.clone()).to_f64(), 0.3 - 1.75);
        assert_eq!((a.clone() * b.clone()).to_f64(), 0.3 * -1.75);
        assert_eq!((a.clone() / b.clone()).to_f64(), 0.3 / -1.75);
        assert_eq!((-a).to_f64(), -0.3);
        assert_eq!(fx(1.5).powi(3).to_f64(), 3.375);
    }

    #[test]
    fn fixed_logarithm() {
        for v in [0.1, 0.5, 0.9, 1.0, 1.3, 2.0, 7.25, 1e-3, 123.0] {
            let l = fx(v).ln().to_f64();
            assert!((l - v.ln()).abs() <= 2e-16 * v.ln().abs().max(1.0), "{v}: {l}");
        }
    }

    #[test]
    fn fixed_resolves_cancellation_double_cannot() {
        // (1 - 0.9)^20 expanded binomially; the terms reach ~3e5.
        struct Binom;
        impl Kernel for Binom {
            fn run<T: Real>(&self, ctx: T::Ctx, _tol: f64) -> Partial {
                let y = T::from_f64(ctx, -0.9);
                let mut acc = T::from_f64(ctx, 0.0);
                let mut mag = 0.0;
                let mut coef = T::from_f64(ctx, 1.0);
                for k in 0..=20u32 {
                    let term = coef.clone() * y.powi(k);
                    accumulate(&mut acc, &mut mag, &term);
                    coef = coef * T::from_f64(ctx, (20 - k) as f64) / T::from_f64(ctx, (k + 1) as f64);
                }
                Partial {
                    sums: vec![acc.to_f64()],
                    magnitudes: vec![mag],
                    terms: 21,
                    converged: true,
                    error_estimate: 0.0,
                }
            }
        }
        let base = num_rational::BigRational::from_integer(1.into())
            - crate::exact::f64_to_rational(0.9);
        let exact = crate::exact::rational_to_f64(&base.pow(20));
        let got = evaluate(&Binom, 1e-15).sums[0];
        assert!((got - exact).abs() <= 4.0 * f64::EPSILON * exact, "{got} vs {exact}");
        let naive = Binom.run::<f64>((), 1e-15).sums[0];
        assert!((naive - exact).abs() > 1e-6 * exact);
    }
}
