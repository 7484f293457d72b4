//! The contraction ratio and the named algebraic parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A contraction ratio `0 < λ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lambda(f64);

impl Lambda {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Lambda(value))
        } else {
            Err(Error::param("lambda", format!("{value} is not in (0, 1)")))
        }
    }

    /// Like [`Lambda::new`] but additionally requires the overlap regime `1/2 < λ < 1`.
    pub fn overlapping(value: f64) -> Result<Self> {
        let l = Self::new(value)?;
        if value > 0.5 {
            Ok(l)
        } else {
            Err(Error::param(
                "lambda",
                format!("{value} is not in the overlap regime (1/2, 1)"),
            ))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `λ^n` by repeated multiplication, the same order used when building tables.
    pub fn pow(self, n: u32) -> f64 {
        let mut p = 1.0;
        for _ in 0..n {
            p *= self.0;
        }
        p
    }

    /// The normalization factor `λ⁻¹ − 1` that maps digit sums into `[0, 1]`.
    pub fn norm(self) -> f64 {
        1.0 / self.0 - 1.0
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Named parameters whose value is an algebraic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `(√5 − 1)/2`, inverse of the golden mean.
    Golden,
    /// Inverse of the plastic number, the real root of `x³ − x − 1`.
    PlasticInv,
    /// Inverse of the Pisot root of `x⁴ − x³ − 1`.
    PisotX4,
    /// Inverse of Lehmer's Salem number, `λ ≈ 0.8501`.
    SalemX5,
    /// `2^{−1/2}`.
    Sqrt2,
    /// `2^{−1/3}`.
    Cbrt2,
}

/// Lehmer's polynomial, whose root above one is the smallest known Salem number.
const LEHMER: [i32; 11] = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1];

impl Preset {
    /// Integer coefficients, highest degree first, of the monic polynomial whose
    /// real root in `(1, 2)` is `1/λ`.
    pub fn polynomial(self) -> &'static [i32] {
        match self {
            Preset::Golden => &[1, -1, -1],
            Preset::PlasticInv => &[1, 0, -1, -1],
            Preset::PisotX4 => &[1, -1, 0, 0, -1],
            Preset::SalemX5 => &LEHMER,
            Preset::Sqrt2 => &[1, 0, -2],
            Preset::Cbrt2 => &[1, 0, 0, -2],
        }
    }

    pub fn lambda(self) -> Lambda {
        Lambda(inverse_root(self.polynomial()))
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Preset as clap::ValueEnum>::from_str(s, true)
            .map_err(|_| Error::param("lambda-preset", format!("unknown preset `{s}`")))
    }
}

/// Finds `λ ∈ (1/2, 1)` with `p(1/λ) = 0` by bisection on the reversed
/// polynomial `λ^d · p(1/λ)`, run until the bracket can no longer shrink.
///
/// Panics if the reversed polynomial has no sign change on `(1/2, 1)`, which
/// only happens for a malformed coefficient table.
pub fn inverse_root(coeffs: &[i32]) -> f64 {
    // λ^d p(1/λ) = Σ c_k λ^k with c listed from the leading coefficient.
    let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc: f64, &c| acc.mul_add(x, c as f64));
    let (mut lo, mut hi) = (0.5_f64, 1.0_f64);
    let (flo, fhi) = (eval(lo), eval(hi));
    assert!(
        flo.signum() != fhi.signum(),
        "no sign change for inverse root bracket"
    );
    let lo_negative = flo < 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = eval(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if eval(lo).abs() <= eval(hi).abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(Lambda::new(0.0).is_err());
        assert!(Lambda::new(1.0).is_err());
        assert!(Lambda::new(f64::NAN).is_err());
        assert!(Lambda::overlapping(0.5).is_err());
        assert!(Lambda::overlapping(0.6).is_ok());
    }

    #[test]
    fn presets_match_closed_forms() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((Preset::Golden.lambda().get() - golden).abs() <= f64::EPSILON);
        assert!((Preset::Sqrt2.lambda().get() - 0.5f64.sqrt()).abs() <= f64::EPSILON);
        assert!((Preset::Cbrt2.lambda().get() - 2f64.powf(-1.0 / 3.0)).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn presets_are_inverse_roots() {
        for p in [Preset::PlasticInv, Preset::PisotX4, Preset::SalemX5] {
            let x = 1.0 / p.lambda().get();
            let v = p.polynomial().iter().fold(0.0, |acc, &c| acc * x + c as f64);
            assert!(v.abs() < 1e-12, "{p:?}: residual {v}");
        }
        assert!((Preset::PlasticInv.lambda().get() - 0.754877666).abs() < 1e-9);
        assert!((Preset::PisotX4.lambda().get() - 0.724491959).abs() < 1e-9);
        assert!((Preset::SalemX5.lambda().get() - 0.850137).abs() < 1e-6);
    }

    #[test]
    fn preset_names_parse() {
        assert_eq!("salem-x5".parse::<Preset>().unwrap(), Preset::SalemX5);
        assert_eq!("plastic-inv".parse::<Preset>().unwrap(), Preset::PlasticInv);
        assert!("nope".parse::<Preset>().is_err());
    }
}
