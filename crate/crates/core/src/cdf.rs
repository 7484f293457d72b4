//! Certified two-sided bounds on the distribution function `F_λ`.
//!
//! For digit depth `L` the truncated sums underestimate the full series by at
//! most `λ^L` after normalization, so
//!
//! ```text
//! 2^{-L} #{ sums ≤ x − λ^L }  ≤  F_λ(x)  ≤  2^{-L} #{ sums ≤ x }.
//! ```
//!
//! Over a parameter interval `[λ₀ − ε, λ₀ + ε]` each truncated sum moves by at
//! most `ε·D`, with `D` bounding `|d/dλ|` of the normalized series.

use serde::{Deserialize, Serialize};

use crate::digits::HalfSumTable;
use crate::error::{Error, Result};
use crate::lambda::Lambda;

/// An exact probability `count · 2^{−depth}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicProb {
    pub count: u64,
    pub depth: u32,
}

impl DyadicProb {
    pub fn new(count: u64, depth: u32) -> Result<Self> {
        if depth > 63 || count > 1u64 << depth {
            return Err(Error::param("count", format!("{count}·2^-{depth} exceeds one")));
        }
        Ok(DyadicProb { count, depth })
    }

    pub fn to_f64(self) -> f64 {
        self.count as f64 / (1u64 << self.depth) as f64
    }
}

/// `1/(λ(1−λ))` at the right end of the interval, which is its supremum on
/// `(1/2, 1)` since the function is increasing there.
pub fn lipschitz_d(center: Lambda, eps: f64) -> Result<f64> {
    let (lo, hi) = interval_ends(center, eps)?;
    debug_assert!(lo > 0.5);
    Ok(1.0 / (hi * (1.0 - hi)))
}

fn interval_ends(center: Lambda, eps: f64) -> Result<(f64, f64)> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::param("eps", format!("{eps} is not a finite nonnegative radius")));
    }
    let lo = center.get() - eps;
    let hi = center.get() + eps;
    if lo <= 0.5 || hi >= 1.0 {
        return Err(Error::param(
            "eps",
            format!("[{lo}, {hi}] is not contained in (1/2, 1)"),
        ));
    }
    Ok((lo, hi))
}

/// The parameter interval `[λ₀ − ε, λ₀ + ε]` together with its derivative bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaInterval {
    center: Lambda,
    eps: f64,
    d: f64,
}

impl LambdaInterval {
    pub fn new(center: Lambda, eps: f64) -> Result<Self> {
        let d = lipschitz_d(center, eps)?;
        Self::with_bound(center, eps, d)
    }

    /// Uses a caller-supplied derivative bound, which must dominate
    /// `1/(λ(1−λ))` at both ends and the center.
    pub fn with_bound(center: Lambda, eps: f64, d: f64) -> Result<Self> {
        let (lo, hi) = interval_ends(center, eps)?;
        for l in [lo, center.get(), hi] {
            if !(d >= 1.0 / (l * (1.0 - l))) {
                return Err(Error::param(
                    "D",
                    format!("{d} does not bound 1/(λ(1−λ)) at λ = {l}"),
                ));
            }
        }
        Ok(LambdaInterval { center, eps, d })
    }

    pub fn point(center: Lambda) -> Result<Self> {
        Self::new(center, 0.0)
    }

    pub fn center(&self) -> Lambda {
        self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn lo(&self) -> f64 {
        self.center.get() - self.eps
    }

    pub fn hi(&self) -> f64 {
        self.center.get() + self.eps
    }

    /// `ε·D`, the uniform shift of every truncated sum across the interval.
    pub fn shift(&self) -> f64 {
        self.eps * self.d
    }
}

/// `F⁺_{λ,L}(x)`: an upper bound on `F_λ(x)`.
pub fn f_upper(table: &HalfSumTable, x: f64) -> DyadicProb {
    DyadicProb {
        count: table.count_le(x + table.eta()),
        depth: table.depth(),
    }
}

/// `F⁻_{λ,L}(x)`: a lower bound on `F_λ(x)`.
pub fn f_lower(table: &HalfSumTable, x: f64) -> DyadicProb {
    DyadicProb {
        count: table.count_le(x - table.tail() - table.eta()),
        depth: table.depth(),
    }
}

fn check_center(table: &HalfSumTable, interval: &LambdaInterval) -> Result<()> {
    if table.lambda() != interval.center() {
        return Err(Error::param(
            "lambda",
            format!(
                "table built at λ = {} but the interval is centered at {}",
                table.lambda(),
                interval.center()
            ),
        ));
    }
    Ok(())
}

/// Lower bound on `F_λ(x)` valid for every `λ` in the interval.
pub fn f_lower_interval(table: &HalfSumTable, interval: &LambdaInterval, x: f64) -> Result<DyadicProb> {
    check_center(table, interval)?;
    Ok(f_lower(table, x - interval.shift()))
}

/// Upper bound on `F_λ(x)` valid for every `λ` in the interval.
pub fn f_upper_interval(table: &HalfSumTable, interval: &LambdaInterval, x: f64) -> Result<DyadicProb> {
    check_center(table, interval)?;
    Ok(f_upper(table, x + interval.shift()))
}

/// A table paired with the parameter range its bounds must cover.
///
/// With `shift == 0` this is the point bound at the table's `λ`.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<'a> {
    table: &'a HalfSumTable,
    shift: f64,
}

impl<'a> Bounds<'a> {
    pub fn point(table: &'a HalfSumTable) -> Self {
        Bounds { table, shift: 0.0 }
    }

    pub fn interval(table: &'a HalfSumTable, interval: &LambdaInterval) -> Result<Self> {
        check_center(table, interval)?;
        Ok(Bounds {
            table,
            shift: interval.shift(),
        })
    }

    pub fn table(&self) -> &'a HalfSumTable {
        self.table
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn depth(&self) -> u32 {
        self.table.depth()
    }

    pub fn total(&self) -> u64 {
        self.table.total()
    }

    /// Count behind the upper bound at `x`.
    pub fn upper_count(&self, x: f64) -> u64 {
        f_upper(self.table, x + self.shift).count
    }

    /// Count behind the lower bound at `x`.
    pub fn lower_count(&self, x: f64) -> u64 {
        f_lower(self.table, x - self.shift).count
    }

    pub fn upper(&self, x: f64) -> DyadicProb {
        DyadicProb {
            count: self.upper_count(x),
            depth: self.depth(),
        }
    }

    pub fn lower(&self, x: f64) -> DyadicProb {
        DyadicProb {
            count: self.lower_count(x),
            depth: self.depth(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(l: f64, d: u32) -> HalfSumTable {
        HalfSumTable::build(Lambda::new(l).unwrap(), d, crate::digits::default_eta(d)).unwrap()
    }

    #[test]
    fn dyadic_values() {
        assert_eq!(DyadicProb::new(3, 2).unwrap().to_f64(), 0.75);
        assert!(DyadicProb::new(5, 2).is_err());
    }

    #[test]
    fn bound_examples() {
        let t = table(0.6, 2);
        assert_eq!(f_upper(&t, 0.5).to_f64(), 0.75);
        assert_eq!(f_lower(&t, 0.5).to_f64(), 0.25);
        assert_eq!(f_upper(&t, 1.0).to_f64(), 1.0);
        assert_eq!(f_lower(&t, 0.0).count, 0);
        assert_eq!(f_upper(&t, -1e-6).count, 0);
        let t = table(0.7, 12);
        assert_eq!(f_lower(&t, 1.0 + t.tail() + t.eta()).to_f64(), 1.0);
    }

    #[test]
    fn lipschitz_examples() {
        let l = |v| Lambda::new(v).unwrap();
        assert!((lipschitz_d(l(0.75), 0.0).unwrap() - 16.0 / 3.0).abs() < 1e-12);
        assert!((lipschitz_d(l(0.6), 0.0).unwrap() - 1.0 / 0.24).abs() < 1e-12);
        assert!(lipschitz_d(l(0.6), 0.2).is_err());
        assert!(lipschitz_d(l(0.99), 0.02).is_err());
        assert!(lipschitz_d(l(0.7), -1.0).is_err());
    }

    #[test]
    fn interval_bound_validation() {
        let c = Lambda::new(0.75).unwrap();
        assert!(LambdaInterval::with_bound(c, 1e-3, 5.0).is_err());
        assert!(LambdaInterval::with_bound(c, 1e-3, 6.0).is_ok());
    }

    #[test]
    fn interval_bounds_require_matching_center() {
        let t = table(0.75, 8);
        let other = LambdaInterval::new(Lambda::new(0.7).unwrap(), 0.0).unwrap();
        assert!(f_lower_interval(&t, &other, 0.3).is_err());
        assert!(Bounds::interval(&t, &other).is_err());
        let same = LambdaInterval::new(Lambda::new(0.75).unwrap(), 0.0).unwrap();
        assert_eq!(f_lower_interval(&t, &same, 0.3).unwrap(), f_lower(&t, 0.3));
        assert_eq!(f_upper_interval(&t, &same, 0.3).unwrap(), f_upper(&t, 0.3));
    }
}
