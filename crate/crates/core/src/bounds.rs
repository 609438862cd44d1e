//! Exact evaluation of the explicit partition-complexity bounds. The
//! recursion iterates growth functions from zero, squares the iterates and
//! accumulates ceilings, all in big-rational arithmetic; results whose digit
//! count would exceed the cap are flagged as overflowed instead of
//! materialized.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::growth::{log10_approx, ratio_from_f64, GrowthFunction, Iterated, DIGIT_CAP};

/// Cap on the number of materialized steps of the `h` recursion.
const H_STEP_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Outer-loop budget `L = ceil(l / (sigma^2 (p-1)))`.
    pub l: BigUint,
    /// `R = h(L-1)`, when computed.
    pub r: Option<BigUint>,
    /// The materialized prefix `h(0), h(1), ...` of the recursion.
    pub h_table: Vec<BigUint>,
    /// `F^(R)(0)`, when computed.
    pub reg: Option<BigUint>,
    /// `(k+1)^reg` for the primed bound; `None` for the plain bound.
    pub reg_prime: Option<BigUint>,
    pub overflowed: bool,
    /// Estimated decimal digit count of the first non-materialized value.
    pub overflow_digits_log10: Option<f64>,
}

impl BoundReport {
    fn overflow(l: BigUint, h_table: Vec<BigUint>, digits: f64) -> Self {
        BoundReport {
            l,
            r: None,
            h_table,
            reg: None,
            reg_prime: None,
            overflowed: true,
            overflow_digits_log10: Some(digits),
        }
    }
}

/// Growth function driving a bound recursion: either `F` itself or the
/// composed map `n -> F((k+1)^n)` used by the primed bound.
enum Driver<'a> {
    Plain(&'a GrowthFunction),
    Composed { f: &'a GrowthFunction, base: u64 },
}

impl Driver<'_> {
    fn iterate0(&self, m: &BigUint) -> Iterated {
        match self {
            Driver::Plain(f) => f.iterate0(m),
            Driver::Composed { f, base } => {
                // Values at least double each step past the first, so either
                // `m` is exhausted quickly or the digit cap is hit.
                let log_base = (*base as f64).log10();
                let mut x = BigRational::zero();
                let mut remaining = m.clone();
                while !remaining.is_zero() {
                    let exp_digits = log10_approx(&x).max(0.0);
                    let x_f = x.to_f64().unwrap_or(f64::INFINITY);
                    if x_f * log_base > DIGIT_CAP || exp_digits > 18.0 {
                        return Iterated::Overflow {
                            digits_log10: x_f * log_base,
                        };
                    }
                    let e = x.ceil().to_integer().to_biguint().expect("nonnegative");
                    let power = BigUint::from(*base).pow(e.to_u32().expect("small exponent"));
                    x = f.eval(&BigRational::from_integer(BigInt::from(power)));
                    remaining -= BigUint::one();
                }
                Iterated::Exact(x)
            }
        }
    }
}

fn check_params(k: u64, ell: u64, sigma: &BigRational, p: &BigRational) -> Result<()> {
    if k < 1 || ell < 1 {
        return Err(Error::ParameterDomain("k and l must be positive".into()));
    }
    if !(sigma > &BigRational::zero() && sigma <= &BigRational::one()) {
        return Err(Error::ParameterDomain("sigma must lie in (0, 1]".into()));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    if !(p > &BigRational::one() && p <= &two) {
        return Err(Error::ParameterDomain("p must lie in (1, 2]".into()));
    }
    Ok(())
}

fn ceil_positive(x: &BigRational) -> BigUint {
    let c = x.ceil().to_integer();
    c.to_biguint().unwrap_or_else(BigUint::zero)
}

/// Iteration count bound `Reg = F^(R)(0)` with
/// `h(0) = 0`, `h(i+1) = h(i) + ceil(sigma^2 l F^(h(i)+2)(0)^2 / (p-1))`,
/// `R = h(L-1)`, `L = ceil(l / (sigma^2 (p-1)))`.
pub fn reg_bound(
    k: u64,
    ell: u64,
    sigma: &BigRational,
    p: &BigRational,
    f: &GrowthFunction,
) -> Result<BoundReport> {
    check_params(k, ell, sigma, p)?;
    run_recursion(ell, sigma, p, &Driver::Plain(f))
}

/// The primed bound `(k+1)^Reg` where `Reg` is computed with `l = 1` and the
/// composed growth `n -> F((k+1)^n)`.
pub fn reg_prime_bound(
    k: u64,
    sigma: &BigRational,
    p: &BigRational,
    f: &GrowthFunction,
) -> Result<BoundReport> {
    check_params(k, 1, sigma, p)?;
    let driver = Driver::Composed { f, base: k + 1 };
    let mut report = run_recursion(1, sigma, p, &driver)?;
    if let Some(reg) = report.reg.clone() {
        let log_base = ((k + 1) as f64).log10();
        let reg_f = reg.to_f64().unwrap_or(f64::INFINITY);
        match reg.to_u32() {
            Some(e) if reg_f * log_base <= DIGIT_CAP => {
                report.reg_prime = Some(BigUint::from(k + 1).pow(e));
            }
            _ => {
                report.overflowed = true;
                report.overflow_digits_log10 = Some(reg_f * log_base);
            }
        }
    }
    Ok(report)
}

fn run_recursion(
    ell: u64,
    sigma: &BigRational,
    p: &BigRational,
    driver: &Driver<'_>,
) -> Result<BoundReport> {
    let ell_rat = BigRational::from_integer(BigInt::from(ell));
    let sigma_sq = sigma * sigma;
    let p_minus_1 = p - BigRational::one();
    let l = ceil_positive(&(ell_rat.clone() / (sigma_sq.clone() * p_minus_1.clone())));
    let steps = match (l.clone() - BigUint::one()).to_usize() {
        Some(s) if s <= H_STEP_CAP => s,
        _ => {
            // h advances by at least 1 per step, so R >= L-1 and the final
            // iterate has at least log10(L) digits.
            let digits = log10_approx(&BigRational::from_integer(BigInt::from(l.clone())));
            return Ok(BoundReport::overflow(l, vec![BigUint::zero()], digits));
        }
    };
    let mut h = BigUint::zero();
    let mut h_table = vec![BigUint::zero()];
    let factor = sigma_sq * ell_rat / p_minus_1;
    for _ in 0..steps {
        let arg = h.clone() + BigUint::from(2u32);
        let v = match driver.iterate0(&arg) {
            Iterated::Exact(v) => v,
            Iterated::Overflow { digits_log10 } => {
                return Ok(BoundReport::overflow(l, h_table, digits_log10))
            }
        };
        if log10_approx(&v) * 2.0 > DIGIT_CAP {
            return Ok(BoundReport::overflow(l, h_table, log10_approx(&v) * 2.0));
        }
        let inc = ceil_positive(&(factor.clone() * v.clone() * v));
        h += inc;
        h_table.push(h.clone());
    }
    let r = h;
    let reg = match driver.iterate0(&r) {
        Iterated::Exact(v) => ceil_positive(&v),
        Iterated::Overflow { digits_log10 } => {
            return Ok(BoundReport::overflow(l, h_table, digits_log10))
        }
    };
    Ok(BoundReport {
        l,
        r: Some(r),
        h_table,
        reg: Some(reg),
        reg_prime: None,
        overflowed: false,
        overflow_digits_log10: None,
    })
}

pub fn reg_bound_f64(
    k: u64,
    ell: u64,
    sigma: f64,
    p: f64,
    f: &GrowthFunction,
) -> Result<BoundReport> {
    reg_bound(k, ell, &ratio_from_f64(sigma)?, &ratio_from_f64(p)?, f)
}

pub fn reg_prime_bound_f64(k: u64, sigma: f64, p: f64, f: &GrowthFunction) -> Result<BoundReport> {
    reg_prime_bound(k, &ratio_from_f64(sigma)?, &ratio_from_f64(p)?, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn minimal_parameters_give_zero() {
        let f = GrowthFunction::successor();
        let rep = reg_bound_f64(1, 1, 1.0, 2.0, &f).unwrap();
        assert_eq!(rep.l, u(1));
        assert_eq!(rep.r, Some(u(0)));
        assert_eq!(rep.reg, Some(u(0)));
        assert!(!rep.overflowed);
    }

    #[test]
    fn two_function_case_hand_checked() {
        // L=2, h(1) = ceil(1 * 2 * F^(2)(0)^2 / 1) = ceil(2 * 4) = 8,
        // R = 8, Reg = F^(8)(0) = 8.
        let f = GrowthFunction::successor();
        let rep = reg_bound_f64(1, 2, 1.0, 2.0, &f).unwrap();
        assert_eq!(rep.l, u(2));
        assert_eq!(rep.h_table, vec![u(0), u(8)]);
        assert_eq!(rep.r, Some(u(8)));
        assert_eq!(rep.reg, Some(u(8)));
    }

    #[test]
    fn primed_bound_minimal_case() {
        // Inner Reg with l=1 is 0, so the primed bound is (k+1)^0 = 1.
        let f = GrowthFunction::successor();
        for k in [1, 2, 5] {
            let rep = reg_prime_bound_f64(k, 1.0, 2.0, &f).unwrap();
            assert_eq!(rep.reg, Some(u(0)));
            assert_eq!(rep.reg_prime, Some(u(1)));
        }
    }

    #[test]
    fn primed_bound_composed_growth() {
        // sigma = 1, p = 2, l = 2 is not reachable through the primed entry
        // point, so exercise the composed driver directly: with F = succ and
        // k = 1, F'(n) = 2^n + 1, so F'(0)=2, F'(2)=5, F'(5)=33.
        let f = GrowthFunction::successor();
        let d = Driver::Composed { f: &f, base: 2 };
        match d.iterate0(&u(3)) {
            Iterated::Exact(v) => {
                assert_eq!(v, BigRational::from_integer(BigInt::from(33)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overflow_reported_not_materialized() {
        let f = GrowthFunction::affine_f64(2.0, 1.0).unwrap();
        let rep = reg_bound_f64(1, 1, 0.01, 1.01, &f).unwrap();
        assert!(rep.overflowed);
        assert!(rep.reg.is_none());
        assert!(rep.overflow_digits_log10.unwrap() > 0.0);
    }

    #[test]
    fn parameter_domain_enforced() {
        let f = GrowthFunction::successor();
        assert!(reg_bound_f64(0, 1, 1.0, 2.0, &f).is_err());
        assert!(reg_bound_f64(1, 0, 1.0, 2.0, &f).is_err());
        assert!(reg_bound_f64(1, 1, 0.0, 2.0, &f).is_err());
        assert!(reg_bound_f64(1, 1, 1.5, 2.0, &f).is_err());
        assert!(reg_bound_f64(1, 1, 1.0, 1.0, &f).is_err());
        assert!(reg_bound_f64(1, 1, 1.0, 2.5, &f).is_err());
    }

    #[test]
    fn smaller_sigma_does_not_shrink_bounds() {
        let f = GrowthFunction::successor();
        let a = reg_bound_f64(1, 1, 0.5, 2.0, &f).unwrap();
        let b = reg_bound_f64(1, 1, 0.25, 2.0, &f).unwrap();
        assert!(a.l <= b.l);
        match (a.reg, b.reg) {
            (Some(x), Some(y)) => assert!(x <= y),
            _ => {} // overflow on the tighter parameters is acceptable
        }
    }
}
