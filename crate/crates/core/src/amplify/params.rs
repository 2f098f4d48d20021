//! Exact parameter arithmetic for the amplification theorem.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{ceil, from_biguint, int, parse_ratio, ratio};

/// `4^100`.
pub fn four_pow_100() -> BigUint {
    BigUint::from(4u32).pow(100)
}

/// `⌈2/ε⌉`.
pub fn stopping_parameter(eps: &BigRational) -> Result<u64> {
    check_open_unit(eps, "ε")?;
    let r = ceil(&(int(2) / eps));
    r.try_into().map_err(|_| Error::Domain("r does not fit in 64 bits".into()))
}

/// `2 ⌈(3 · 4^100 / (100 ρ))²⌉`.
pub fn expander_multiplier(rho: &BigRational) -> Result<BigUint> {
    check_open_unit(rho, "ρ")?;
    let base = int(3) * from_biguint(&four_pow_100()) / (int(100) * rho);
    let c = ceil(&(&base * &base)) * 2u32;
    Ok(c.to_biguint().expect("positive"))
}

/// `0.0294 / (3 + 2d/(d − λ))`.
pub fn amplified_soundness(d: &BigRational, lambda: &BigRational) -> Result<BigRational> {
    if *d <= BigRational::zero() || *lambda < BigRational::zero() || lambda >= d {
        return Err(Error::Domain("need d > 0 and 0 ≤ λ < d".into()));
    }
    let c = parse_ratio("0.0294").expect("literal");
    Ok(c / (int(3) + int(2) * d / (d - lambda)))
}

/// `2(r−1)/(100 r²) · (r/(r−1))^(100 r)`, the factor relating λ'/d' to λ/d.
pub fn power_ratio_coefficient(r: u64) -> Result<BigRational> {
    if r < 2 {
        return Err(Error::Domain("r must be at least 2".into()));
    }
    let r = BigInt::from(r);
    let rm1: BigInt = &r - 1u32;
    let base = BigRational::new(r.clone(), rm1.clone());
    let pow = num_traits::pow(base, 100 * usize::try_from(&r).expect("small r"));
    Ok(BigRational::new(&rm1 * 2u32, &r * &r * 100u32) * pow)
}

fn check_open_unit(x: &BigRational, name: &str) -> Result<()> {
    if x.is_positive() && *x < BigRational::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1)")))
    }
}

/// `(Δ + 2√(CΔ)) / (Δ + CΔ) ≤ bound`, decided on squared integers.
pub fn expander_ratio_within(delta: &BigUint, c: &BigUint, bound: &BigRational) -> bool {
    // Δ + 2√(CΔ) ≤ b(Δ + CΔ)  ⇔  4CΔ ≤ (b(Δ+CΔ) − Δ)² with the right side's base ≥ 0.
    let dl = from_biguint(delta);
    let cd = from_biguint(&(c * delta));
    let slack = bound * (&dl + &cd) - &dl;
    if slack.is_negative() {
        return false;
    }
    int(4) * cd <= &slack * &slack
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationParameters {
    pub eps: BigRational,
    pub rho: BigRational,
    pub r: u64,
    pub big_r: u64,
    pub delta: BigUint,
    pub c: BigUint,
    pub d0: BigUint,
    pub d: BigRational,
    pub lambda: BigRational,
    /// Soundness after a pure expanderization step: ε·Δ/(Δ+d₀).
    pub eps_expanderized: BigRational,
    pub eps_prime: BigRational,
    /// `(4^100/100) · λ/d`.
    pub lambda_ratio_bound: BigRational,
    pub coefficient: BigRational,
    /// `coefficient ≤ 4^100/100`.
    pub coefficient_ok: bool,
    /// `(Δ + 2√(CΔ))/(Δ + CΔ) ≤ (100/4^100) ρ`.
    pub expander_ratio_ok: bool,
    /// `3/√C ≤ (100/4^100) ρ`.
    pub c_chain_ok: bool,
}

pub fn amplification_parameters(
    eps: &BigRational,
    rho: &BigRational,
    delta: &BigUint,
    d: &BigRational,
    lambda: &BigRational,
) -> Result<AmplificationParameters> {
    check_open_unit(eps, "ε")?;
    check_open_unit(rho, "ρ")?;
    if delta.is_zero() {
        return Err(Error::Domain("Δ must be positive".into()));
    }
    if !d.is_positive() || lambda.is_negative() {
        return Err(Error::Domain("need d > 0 and λ ≥ 0".into()));
    }
    if lambda * int(2) > *d {
        return Err(Error::Domain("need λ ≤ d/2".into()));
    }
    let r = stopping_parameter(eps)?;
    let c = expander_multiplier(rho)?;
    let d0 = &c * delta;
    let four = from_biguint(&four_pow_100());
    let target = int(100) * rho / &four;
    let coefficient = power_ratio_coefficient(r)?;
    // 3/√C ≤ t  ⇔  9 ≤ t² C.
    let c_chain_ok = int(9) <= &target * &target * from_biguint(&c);
    Ok(AmplificationParameters {
        eps: eps.clone(),
        rho: rho.clone(),
        r,
        big_r: 100 * r,
        delta: delta.clone(),
        eps_expanderized: eps * from_biguint(delta) / from_biguint(&(delta + &d0)),
        expander_ratio_ok: expander_ratio_within(delta, &c, &target),
        c_chain_ok,
        coefficient_ok: coefficient <= &four / int(100),
        coefficient,
        lambda_ratio_bound: &four / int(100) * lambda / d,
        eps_prime: amplified_soundness(d, lambda)?,
        c,
        d0,
        d: d.clone(),
        lambda: lambda.clone(),
    })
}

/// `ε′` as a function of `t = λ/d` alone.
pub fn eps_prime_at_ratio(t: &BigRational) -> Result<BigRational> {
    amplified_soundness(&ratio(1, 1), t)
}
