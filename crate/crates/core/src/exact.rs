//! Exact integer and rational arithmetic shared by the closed forms and the
//! identity verifier.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary-precision signed integer.
pub type ExactInteger = BigInt;

/// Reduced fraction with a positive denominator.
pub type ExactRational = BigRational;

/// Exact binomial coefficient. Returns zero when `k < 0` or `k > n`.
pub fn binomial_exact(n: u64, k: i64) -> ExactInteger {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient with an arbitrary (possibly negative) top argument
/// treated as zero outside the triangle. Used where mutated arguments may
/// leave the valid range.
pub(crate) fn binomial_signed(n: i64, k: i64) -> ExactInteger {
    if n < 0 {
        return BigInt::zero();
    }
    binomial_exact(n as u64, k)
}

pub(crate) fn factorial(n: u64) -> ExactInteger {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub(crate) fn pow4(e: u64) -> ExactInteger {
    BigInt::one() << (2 * e as usize)
}

/// Central binomial coefficient C(2k, k).
pub(crate) fn central(k: u64) -> ExactInteger {
    binomial_exact(2 * k, k as i64)
}

pub(crate) fn rational(num: ExactInteger, den: ExactInteger) -> ExactRational {
    BigRational::new(num, den)
}

pub(crate) fn int_rational(v: ExactInteger) -> ExactRational {
    BigRational::from_integer(v)
}

/// `m * 2^exp` rounded to the nearest double (up to one extra rounding of the
/// top 64 bits).
pub(crate) fn ldexp_bigint(m: &BigInt, exp: i64) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let mag = m.magnitude();
    let bits = mag.bits() as i64;
    let (top, shift) = if bits > 64 {
        let s = bits - 64;
        (mag >> (s as usize), s)
    } else {
        (mag.clone(), 0)
    };
    let f = top.to_f64().unwrap_or(f64::INFINITY);
    let v = ldexp(f, exp + shift);
    if m.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

pub(crate) fn ldexp(mut f: f64, mut e: i64) -> f64 {
    while e > 1000 {
        f *= 2f64.powi(1000);
        e -= 1000;
        if f.is_infinite() {
            return f;
        }
    }
    while e < -1000 {
        f *= 2f64.powi(-1000);
        e += 1000;
        if f == 0.0 {
            return f;
        }
    }
    f * 2f64.powi(e as i32)
}

/// Nearest double to `num / den`.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 66;
    let q = if shift >= 0 {
        (num << (shift as usize)) / den
    } else {
        num / (den << ((-shift) as usize))
    };
    ldexp_bigint(&q, -shift)
}

pub(crate) fn rational_to_f64(r: &ExactRational) -> f64 {
    ratio_to_f64(r.numer(), r.denom())
}

/// Exact rational value of a finite double.
#[cfg(test)]
pub(crate) fn f64_to_rational(v: f64) -> ExactRational {
    let (m, e) = decompose(v);
    if e >= 0 {
        int_rational(m << (e as usize))
    } else {
        rational(m, BigInt::one() << ((-e) as usize))
    }
}

/// Splits a finite double into `m * 2^e` with integer `m`.
pub(crate) fn decompose(v: f64) -> (BigInt, i64) {
    assert!(v.is_finite(), "non-finite value {v}");
    if v == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (BigInt::from(sign) * BigInt::from(mant), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal(n: usize) -> Vec<Vec<BigInt>> {
        let mut rows = vec![vec![BigInt::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigInt::one(); i + 1];
            for k in 1..i {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        let tri = pascal(40);
        for (n, row) in tri.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert_eq!(&binomial_exact(n as u64, k as i64), v, "C({n},{k})");
            }
        }
        assert_eq!(binomial_exact(0, 0), BigInt::one());
        assert_eq!(binomial_exact(4, 2), BigInt::from(6));
        assert_eq!(binomial_exact(4, -1), BigInt::zero());
        assert_eq!(binomial_exact(4, 5), BigInt::zero());
    }

    #[test]
    fn binomial_50_25_matches_factorial_ratio() {
        let oracle = factorial(50) / (factorial(25) * factorial(25));
        assert_eq!(binomial_exact(50, 25), oracle);
        assert_eq!(oracle.to_string(), "126410606437752");
    }

    #[test]
    fn conversions_round_trip() {
        for v in [0.0, 1.0, -0.375, 1e-300, 3.0e200, 0.1, 5e-324] {
            let r = f64_to_rational(v);
            assert_eq!(rational_to_f64(&r), v);
        }
        assert_eq!(ratio_to_f64(&BigInt::from(1), &BigInt::from(3)), 1.0 / 3.0);
        assert_eq!(ratio_to_f64(&BigInt::from(-2), &BigInt::from(7)), -2.0 / 7.0);
    }
}
