//! Sup-norm bounds on the invariant density under a piecewise-convexity
//! hypothesis.
//!
//! If `φ_λ` is convex on both halves, `g = 1/|φ'|` has `sup g_n = λⁿ` and
//! `var g_n ≤ 2^{n−1} λⁿ` on each generation-`n` cylinder, and the
//! Lasota–Yorke inequality for the transfer operator closes once `2λⁿ < 1`:
//!
//! ```text
//! var h ≤ 2^{n−1} λⁿ / (min|C_n| (1 − 2λⁿ)),   sup h ≤ 1 + var h.
//! ```
//!
//! `C_1` is the base partition `{[0, 1/2], (1/2, 1]}`.

use serde::{Deserialize, Serialize};

use crate::cdf::Bounds;
use crate::digits::HalfSumTable;
use crate::error::{Error, Result};
use crate::exact::ExactMap;
use crate::lambda::Lambda;

/// Hypothesis under which [`RychlikBound`] holds.
pub const HYPOTHESIS: &str = "piecewise-convex";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RychlikBound {
    pub lambda: Lambda,
    pub n: u32,
    pub min_cyl: f64,
    pub var_bound: f64,
    pub sup_bound: f64,
    pub hypothesis: &'static str,
}

/// Smallest `n ≥ 1` with `2λⁿ < 1`.
pub fn minimal_n(lambda: Lambda) -> u32 {
    let mut n = 1;
    while 2.0 * lambda.pow(n) >= 1.0 {
        n += 1;
    }
    n
}

pub fn rychlik_bounds(lambda: Lambda, n: u32, min_cyl: f64) -> Result<RychlikBound> {
    let ln = lambda.pow(n);
    if n == 0 || 2.0 * ln >= 1.0 {
        return Err(Error::param(
            "n",
            format!(
                "2λⁿ = {} is not below 1 for λ = {lambda}, n = {n}; the minimal admissible n is {}",
                2.0 * ln,
                minimal_n(lambda)
            ),
        ));
    }
    if !(min_cyl > 0.0 && min_cyl.is_finite()) {
        return Err(Error::param("min-cyl", format!("{min_cyl} is not a positive length")));
    }
    let var_bound = 2f64.powi(n as i32 - 1) * ln / (min_cyl * (1.0 - 2.0 * ln));
    Ok(RychlikBound {
        lambda,
        n,
        min_cyl,
        var_bound,
        sup_bound: 1.0 + var_bound,
        hypothesis: HYPOTHESIS,
    })
}

/// A point or bracket of partition points, kept as `[lo, hi]`.
type Bracket = (f64, f64);

/// Left preimage bracket of a bracket `[p_lo, p_hi] ⊂ [0, 1]`.
///
/// `φ(b) = p` on `[0, 1/2]` means `F(b) = F(p)/2`. Any `y` with
/// `2F⁺(y) < F⁻(p_lo)` lies left of `b`, and any `y` with `2F⁻(y) > F⁺(p_hi)`
/// lies right of it.
fn preimage_bracket(bounds: &Bounds<'_>, (p_lo, p_hi): Bracket, rho: f64) -> Bracket {
    let left_target = bounds.lower_count(p_lo);
    let is_left = |y: f64| 2 * bounds.upper_count(y) < left_target;
    let right_target = bounds.upper_count(p_hi);
    let is_right = |y: f64| 2 * bounds.lower_count(y) > right_target;

    let lo = if is_left(0.0) {
        let (mut a, mut b) = (0.0_f64, 0.5_f64);
        while b - a > rho {
            let m = 0.5 * (a + b);
            if is_left(m) {
                a = m;
            } else {
                b = m;
            }
        }
        a
    } else {
        0.0
    };
    let hi = if is_right(0.5) {
        let (mut a, mut b) = (0.0_f64, 0.5_f64);
        while b - a > rho {
            let m = 0.5 * (a + b);
            if is_right(m) {
                b = m;
            } else {
                a = m;
            }
        }
        b
    } else {
        0.5
    };
    (lo, hi)
}

/// Interior partition points of `C_n`, each as a bracket: `1/2` together with
/// the iterated preimages of `1/2` of order up to `n − 1`.
fn partition_points<F>(n: u32, mut left_preimage: F) -> Vec<Bracket>
where
    F: FnMut(Bracket) -> Bracket,
{
    let mut all = vec![(0.5, 0.5)];
    let mut frontier = vec![(0.5, 0.5)];
    for _ in 1..n {
        let mut next = Vec::with_capacity(2 * frontier.len());
        for &p in &frontier {
            let (lo, hi) = left_preimage(p);
            next.push((lo, hi));
            next.push((1.0 - hi, 1.0 - lo));
        }
        all.extend_from_slice(&next);
        frontier = next;
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all
}

fn min_gap(points: &[Bracket]) -> Result<f64> {
    let mut prev_hi = 0.0;
    let mut best = f64::INFINITY;
    for &(lo, hi) in points.iter().chain(std::iter::once(&(1.0, 1.0))) {
        let gap = lo - prev_hi;
        if !(gap > 0.0) {
            return Err(Error::Precision(format!(
                "partition brackets overlap near x = {lo}; use a larger depth"
            )));
        }
        best = best.min(gap);
        prev_hi = hi;
    }
    Ok(best)
}

/// Exact minimum cylinder length of `C_n` for a closed-form map.
pub fn min_cylinder_length_exact(map: &ExactMap, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "cylinder generation starts at 1"));
    }
    let pts = partition_points(n, |(p, _)| {
        let b = map.left_preimage(p);
        (b, b)
    });
    min_gap(&pts)
}

/// Certified lower bound on the minimum cylinder length of `C_n` from the
/// point bounds of a table.
pub fn min_cylinder_length_bounds(table: &HalfSumTable, n: u32, rho: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "cylinder generation starts at 1"));
    }
    if !(rho > 0.0) {
        return Err(Error::param("rho", format!("{rho} is not positive")));
    }
    let bounds = Bounds::point(table);
    let pts = partition_points(n, |p| preimage_bracket(&bounds, p, rho));
    min_gap(&pts)
}

/// Where the cylinder lengths come from.
#[derive(Debug, Clone, Copy)]
pub enum CylinderSource<'a> {
    Exact(ExactMap),
    Table { table: &'a HalfSumTable, rho: f64 },
}

pub fn min_cylinder_length(source: &CylinderSource<'_>, n: u32) -> Result<f64> {
    match source {
        CylinderSource::Exact(map) => min_cylinder_length_exact(map, n),
        CylinderSource::Table { table, rho } => min_cylinder_length_bounds(table, n, *rho),
    }
}

/// Picks `n` (the minimal admissible one unless overridden), bounds the
/// minimum cylinder length from `source` and evaluates the density bounds.
pub fn sup_density_pipeline(source: &CylinderSource<'_>, n_override: Option<u32>) -> Result<RychlikBound> {
    let lambda = match source {
        CylinderSource::Exact(map) => map.lambda(),
        CylinderSource::Table { table, .. } => table.lambda(),
    };
    let n = n_override.unwrap_or_else(|| minimal_n(lambda));
    // Fail on the precondition before the preimage search.
    if 2.0 * lambda.pow(n) >= 1.0 {
        return rychlik_bounds(lambda, n, 1.0);
    }
    let min_cyl = min_cylinder_length(source, n)?;
    rychlik_bounds(lambda, n, min_cyl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn formula_examples() {
        let b = rychlik_bounds(lam(0.7), 2, 0.15).unwrap();
        assert!((b.var_bound - 0.98 / (0.15 * 0.02)).abs() < 1e-9);
        assert!((b.sup_bound - b.var_bound - 1.0).abs() < 1e-12);
        assert_eq!(b.hypothesis, "piecewise-convex");
        match rychlik_bounds(lam(0.8), 2, 0.1) {
            Err(Error::Parameter { reason, .. }) => assert!(reason.contains("minimal admissible n is 4"), "{reason}"),
            other => panic!("{other:?}"),
        }
        assert!(rychlik_bounds(lam(0.7), 2, 0.0).is_err());
    }

    #[test]
    fn minimal_n_brackets_threshold() {
        assert_eq!(minimal_n(lam(std::f64::consts::FRAC_1_SQRT_2)), 3);
        assert_eq!(minimal_n(lam(0.8)), 4);
        for k in 1..100 {
            let l = lam(0.5 + k as f64 * 0.005);
            let n = minimal_n(l);
            assert!(2.0 * l.pow(n) < 1.0);
            assert!(n == 1 || 2.0 * l.pow(n - 1) >= 1.0);
        }
    }

    #[test]
    fn exact_cylinders() {
        let m = ExactMap::Sqrt2;
        assert_eq!(min_cylinder_length_exact(&m, 1).unwrap(), 0.5);
        let c2 = min_cylinder_length_exact(&m, 2).unwrap();
        assert!((c2 - 0.151690).abs() < 1e-6, "{c2}");
        assert!(min_cylinder_length_exact(&m, 0).is_err());
    }

    #[test]
    fn smaller_cylinders_give_larger_bounds() {
        let a = rychlik_bounds(lam(0.75), 3, 0.1).unwrap();
        let b = rychlik_bounds(lam(0.75), 3, 0.05).unwrap();
        assert!(b.var_bound > a.var_bound && b.sup_bound > a.sup_bound);
    }
}
