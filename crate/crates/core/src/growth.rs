//! Growth functions: increasing maps `F` on the naturals with `F(n) >= n+1`,
//! evaluated in exact big-rational arithmetic. Iterates `F^(m)(0)` are the
//! engine behind the explicit partition-complexity bounds, where values
//! explode far beyond floating point range.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Intermediate results whose decimal digit count exceeds this are reported
/// as overflowed rather than materialized.
pub const DIGIT_CAP: f64 = 1e5;

/// Range over which table-backed growth functions are validated on
/// construction.
const VALIDATE_RANGE: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GrowthFunction {
    /// `F(n) = n + 1`.
    Successor,
    /// `F(n) = a*n + b` with `a >= 1`, `b >= 1`.
    Affine { a: BigRational, b: BigRational },
    /// Explicit values for `n < values.len()`, then the affine tail
    /// `tail_a*n + tail_b`.
    Table {
        values: Vec<BigRational>,
        tail_a: BigRational,
        tail_b: BigRational,
    },
}

/// Result of an exact iterate computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Iterated {
    Exact(BigRational),
    /// The value was not materialized; `digits_log10` estimates its decimal
    /// digit count (may be infinite).
    Overflow { digits_log10: f64 },
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidGrowth(format!("non-finite coefficient {x}")))
}

/// Approximate log10 of a nonnegative rational.
pub(crate) fn log10_approx(x: &BigRational) -> f64 {
    let digits = |i: &BigInt| -> f64 {
        let (_, d) = i.to_radix_le(10);
        let len = d.len();
        let lead = *d.last().unwrap_or(&0) as f64;
        (len as f64 - 1.0) + (lead + 0.5).log10()
    };
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    digits(&x.numer().abs()) - digits(&x.denom().abs())
}

fn ceil_to_biguint(x: &BigRational) -> BigUint {
    let c = x.ceil().to_integer();
    if c.is_negative() {
        BigUint::zero()
    } else {
        c.to_biguint().expect("nonnegative")
    }
}

fn pow_rational(base: &BigRational, exp: &BigUint) -> Option<BigRational> {
    let e = exp.to_u32()?;
    Some(BigRational::new(base.numer().pow(e), base.denom().pow(e)))
}

impl GrowthFunction {
    pub fn successor() -> Self {
        GrowthFunction::Successor
    }

    pub fn affine(a: BigRational, b: BigRational) -> Result<Self> {
        if a < BigRational::one() {
            return Err(Error::InvalidGrowth("affine slope must be >= 1".into()));
        }
        if b < BigRational::one() {
            return Err(Error::InvalidGrowth("affine offset must be >= 1".into()));
        }
        Ok(GrowthFunction::Affine { a, b })
    }

    pub fn affine_f64(a: f64, b: f64) -> Result<Self> {
        GrowthFunction::affine(ratio_from_f64(a)?, ratio_from_f64(b)?)
    }

    /// Build a table-backed growth function from f64 samples of an arbitrary
    /// increasing map; the tail continues with the last observed increment.
    pub fn table_from_fn(len: usize, f: impl Fn(u64) -> f64) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidGrowth("table needs at least two entries".into()));
        }
        let values: Vec<BigRational> = (0..len as u64)
            .map(|n| ratio_from_f64(f(n)))
            .collect::<Result<_>>()?;
        let last = values[len - 1].clone();
        let prev = values[len - 2].clone();
        let mut tail_a = last.clone() - prev;
        if tail_a < BigRational::one() {
            tail_a = BigRational::one();
        }
        let tail_b = last - tail_a.clone() * big(len as u64 - 1);
        let g = GrowthFunction::Table { values, tail_a, tail_b };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if let GrowthFunction::Table { values, tail_a, tail_b } = self {
            let limit = values.len().min(VALIDATE_RANGE);
            for n in 0..limit {
                let v = &values[n];
                if *v < big(n as u64) + BigRational::one() {
                    return Err(Error::InvalidGrowth(format!("F({n}) < {n}+1")));
                }
                if n > 0 && values[n] < values[n - 1] {
                    return Err(Error::InvalidGrowth(format!("F not increasing at {n}")));
                }
            }
            let at_len = tail_a.clone() * big(values.len() as u64) + tail_b.clone();
            if at_len < values[values.len() - 1] {
                return Err(Error::InvalidGrowth("tail drops below table".into()));
            }
            if *tail_a < BigRational::one() {
                return Err(Error::InvalidGrowth("tail slope must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Exact evaluation at a nonnegative rational argument. Table lookups
    /// round the argument up to the next natural.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        match self {
            GrowthFunction::Successor => x.clone() + BigRational::one(),
            GrowthFunction::Affine { a, b } => a.clone() * x.clone() + b.clone(),
            GrowthFunction::Table { values, tail_a, tail_b } => {
                let idx = ceil_to_biguint(x);
                match idx.to_usize() {
                    Some(i) if i < values.len() => values[i].clone(),
                    _ => tail_a.clone() * x.clone() + tail_b.clone(),
                }
            }
        }
    }

    /// Evaluation at a natural argument as f64 (saturating to infinity).
    pub fn eval_f64(&self, n: u64) -> f64 {
        let v = self.eval(&big(n));
        let l = log10_approx(&v);
        if l > 300.0 {
            f64::INFINITY
        } else {
            v.to_f64().unwrap_or(f64::INFINITY)
        }
    }

    /// Exact `m`-fold iterate `F^(m)(0)`, with closed forms where the shape
    /// permits and an overflow estimate otherwise.
    pub fn iterate0(&self, m: &BigUint) -> Iterated {
        match self {
            // F^(m)(0) = m.
            GrowthFunction::Successor => {
                Iterated::Exact(BigRational::from_integer(BigInt::from(m.clone())))
            }
            GrowthFunction::Affine { a, b } => affine_iterate(a, b, &BigRational::zero(), m),
            GrowthFunction::Table { values, tail_a, tail_b } => {
                // Each step advances the argument by at least one, so at most
                // `values.len()` steps stay inside the table.
                let mut x = BigRational::zero();
                let mut remaining = m.clone();
                let mut steps = 0usize;
                while !remaining.is_zero() {
                    let idx = ceil_to_biguint(&x);
                    match idx.to_usize() {
                        Some(i) if i < values.len() => {
                            x = values[i].clone();
                            remaining -= BigUint::one();
                            steps += 1;
                            if steps > values.len() + 1 {
                                // Non-progressing table would loop; treat as overflow.
                                return Iterated::Overflow { digits_log10: f64::INFINITY };
                            }
                        }
                        _ => return affine_iterate(tail_a, tail_b, &x, &remaining),
                    }
                }
                Iterated::Exact(x)
            }
        }
    }
}

/// Closed-form iterate of `x -> a*x + b` applied `m` times starting at `x0`.
fn affine_iterate(a: &BigRational, b: &BigRational, x0: &BigRational, m: &BigUint) -> Iterated {
    if m.is_zero() {
        return Iterated::Exact(x0.clone());
    }
    if a.is_one() {
        // x0 + m*b: digits grow like log10(m).
        let m_log = log10_approx(&BigRational::from_integer(BigInt::from(m.clone())));
        if m_log > DIGIT_CAP {
            return Iterated::Overflow { digits_log10: m_log };
        }
        let m_rat = BigRational::from_integer(BigInt::from(m.clone()));
        return Iterated::Exact(x0.clone() + m_rat * b.clone());
    }
    // x_m = a^m x0 + b (a^m - 1)/(a - 1); digit estimate m*log10(a).
    let la = log10_approx(a);
    let m_f = m.to_f64().unwrap_or(f64::INFINITY);
    let est = m_f * la + log10_approx(&(x0.clone() + BigRational::one()));
    if est > DIGIT_CAP || m.to_u32().is_none() {
        return Iterated::Overflow { digits_log10: est };
    }
    let am = match pow_rational(a, m) {
        Some(v) => v,
        None => return Iterated::Overflow { digits_log10: est },
    };
    let geom = b.clone() * (am.clone() - BigRational::one()) / (a.clone() - BigRational::one());
    Iterated::Exact(am * x0.clone() + geom)
}
