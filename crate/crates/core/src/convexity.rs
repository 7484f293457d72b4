//! Convexity of `φ_λ` on `[0, 1/2]` up to the grid scale `1/M`.
//!
//! On the grid `x_i = i/M` the map is convex to scale `1/M` when
//! `φ(x_i) ≤ ½(φ(x_{i−1}) + φ(x_{i+1}))` for every interior `i < M/2`. With
//! certified brackets this is decided three ways:
//!
//! * certified: `hi[i] ≤ ½(lo[i−1] + lo[i+1])` at every checked index,
//! * refuted: `lo[i] > ½(hi[i−1] + hi[i+1])` at some index,
//! * inconclusive otherwise.
//!
//! Indices entirely inside the linear segment `x ≤ 1 − λ` are skipped since
//! the map is affine there. At the junction triple, where only `x_{i+1}` is
//! past `1 − λ_max`, the inequality for each `λ` reduces to
//! `φ_λ(x_{i+1}) ≥ x_{i+1}/λ`, and that margin is what gets recorded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::TableOptions;
use crate::envelope::{envelope_from_table, EnvelopeParams, TentEnvelope, DEFAULT_RHO};
use crate::error::{Error, Result};
use crate::lambda::Lambda;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub lambda0: Lambda,
    pub eps: f64,
    pub depth: u32,
    pub grid: u32,
    pub eta: f64,
    pub rho: f64,
    pub status: Status,
    pub scale: f64,
    /// Grid index of the first refuting (or, failing that, first undecided) triple.
    pub witness: Option<usize>,
    pub witness_x: Option<f64>,
    /// Smallest `½(lo[i−1] + lo[i+1]) − hi[i]` over checked indices.
    pub min_margin: f64,
    /// Inclusive range of checked indices; empty when `first > last`.
    pub checked_range: (usize, usize),
    /// Set on interval refutations: some `λ` of the interval violates.
    pub exists_witness: bool,
}

impl ConvexityCertificate {
    pub fn is_refuted(&self) -> bool {
        self.status == Status::Refuted
    }
}

/// Run parameters shared by the point and interval checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckParams {
    pub depth: u32,
    pub grid: u32,
    pub eta: f64,
    pub rho: f64,
    pub table: TableOptions,
}

impl CheckParams {
    pub fn new(depth: u32, grid: u32) -> Self {
        CheckParams {
            depth,
            grid,
            eta: crate::digits::default_eta(depth),
            rho: DEFAULT_RHO,
            table: TableOptions::default(),
        }
    }

    fn envelope_params(&self, lambda0: Lambda, eps: f64) -> EnvelopeParams {
        EnvelopeParams {
            lambda0,
            eps,
            depth: self.depth,
            grid: self.grid,
            eta: self.eta,
            rho: self.rho,
            table: self.table,
        }
    }
}

/// Indices `i ≥ 1` with `x_{i+1} > 1 − λ_max` and `x_i < 1/2`.
pub fn checked_indices(grid: u32, lambda_max: f64) -> (usize, usize) {
    let m = grid as f64;
    let cut = 1.0 - lambda_max;
    let first = (1..).find(|&i| (i + 1) as f64 / m > cut).unwrap_or(1);
    let last = (grid as usize).div_ceil(2).saturating_sub(1);
    (first, last)
}

/// Applies the three-way verdict to an envelope.
pub fn certify_envelope(env: &TentEnvelope) -> Result<ConvexityCertificate> {
    let meta = *env.meta();
    let lambda_max = meta.lambda0.get() + meta.eps;
    let (first, last) = checked_indices(meta.grid, lambda_max);
    let mut min_margin = f64::INFINITY;
    let mut refuted = None;
    let mut undecided = None;
    let cut = 1.0 - lambda_max;
    for i in first..=last {
        let (lo_l, hi_l) = env.bracket(i - 1);
        let (lo_c, hi_c) = env.bracket(i);
        let (lo_r, hi_r) = env.bracket(i + 1);
        let margin = if env.x(i) <= cut {
            // Affine on x_{i−1}, x_i: the bracket form would lose O(ε) and
            // O(ulp) against an exact tie, so compare against the floor.
            0.5 * (lo_r - env.x(i + 1) / lambda_max)
        } else {
            0.5 * (lo_l + lo_r) - hi_c
        };
        min_margin = min_margin.min(margin);
        if margin >= 0.0 {
            continue;
        }
        if lo_c > 0.5 * (hi_l + hi_r) {
            refuted.get_or_insert(i);
        } else {
            undecided.get_or_insert(i);
        }
    }
    if first > last {
        min_margin = 0.0;
    }
    let (status, witness) = match (refuted, undecided) {
        (Some(i), _) => (Status::Refuted, Some(i)),
        (None, Some(i)) => (Status::Inconclusive, Some(i)),
        (None, None) => (Status::Certified, None),
    };
    if !min_margin.is_finite() {
        return Err(Error::Internal("non-finite convexity margin".into()));
    }
    Ok(ConvexityCertificate {
        lambda0: meta.lambda0,
        eps: meta.eps,
        depth: meta.depth,
        grid: meta.grid,
        eta: meta.eta,
        rho: meta.rho,
        status,
        scale: 1.0 / meta.grid as f64,
        witness,
        witness_x: witness.map(|i| env.x(i)),
        min_margin,
        checked_range: (first, last),
        exists_witness: status == Status::Refuted && meta.eps > 0.0,
    })
}

/// Point check at a single `λ ∈ (1/2, 1)`.
pub fn check_point(lambda: Lambda, params: &CheckParams) -> Result<ConvexityCertificate> {
    check_interval(lambda, 0.0, params)
}

/// Uniform check over `[λ₀ − ε, λ₀ + ε]`.
pub fn check_interval(lambda0: Lambda, eps: f64, params: &CheckParams) -> Result<ConvexityCertificate> {
    let lambda0 = Lambda::overlapping(lambda0.get())?;
    let ep = params.envelope_params(lambda0, eps);
    // Validate the interval before paying for the table.
    crate::cdf::LambdaInterval::new(lambda0, eps)?;
    let table = ep.build_table()?;
    let env = envelope_from_table(&table, eps, params.grid, params.rho)?;
    certify_envelope(&env)
}

/// Parameter grid `from, from + step, …` up to and including `to`.
pub fn scan_lambdas(from: f64, to: f64, step: f64) -> Result<Vec<Lambda>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::param("step", format!("{step} is not positive")));
    }
    if !(from <= to) {
        return Err(Error::param("from", format!("empty range [{from}, {to}]")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| Lambda::overlapping(from + k as f64 * step))
        .collect()
}

/// Point checks over a list of parameters, returned in input order.
pub fn scan_points(lambdas: &[Lambda], params: &CheckParams) -> Result<Vec<ConvexityCertificate>> {
    if lambdas.is_empty() {
        return Err(Error::param("lambda", "empty scan"));
    }
    lambdas.par_iter().map(|&l| check_point(l, params)).collect()
}

pub fn scan(from: f64, to: f64, step: f64, params: &CheckParams) -> Result<Vec<ConvexityCertificate>> {
    scan_points(&scan_lambdas(from, to, step)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_range_examples() {
        // 1 − λ ≈ 0.293: index 2 straddles the junction (x₃ = 0.375).
        assert_eq!(checked_indices(8, std::f64::consts::FRAC_1_SQRT_2), (2, 3));
        assert_eq!(checked_indices(50, 0.8), (9, 24));
        assert_eq!(checked_indices(51, 0.8), (10, 25));
    }

    #[test]
    fn scan_grid() {
        let ls = scan_lambdas(0.6, 0.7, 0.05).unwrap();
        assert_eq!(ls.len(), 3);
        assert!(scan_lambdas(0.7, 0.6, 0.05).is_err());
        assert!(scan_lambdas(0.6, 0.7, 0.0).is_err());
        assert!(scan_lambdas(0.4, 0.7, 0.1).is_err());
        assert!(scan_points(&[], &CheckParams::new(8, 8)).is_err());
    }

    #[test]
    fn point_check_rejects_non_overlap() {
        assert!(check_point(Lambda::new(0.4).unwrap(), &CheckParams::new(8, 8)).is_err());
    }

    #[test]
    fn trichotomy_and_witness() {
        for l in [0.62, 0.7, 0.8, 0.9] {
            let c = check_point(Lambda::new(l).unwrap(), &CheckParams::new(20, 20)).unwrap();
            assert_eq!(c.witness.is_none(), c.status == Status::Certified);
            assert_eq!(c.status == Status::Certified, c.min_margin >= 0.0);
        }
    }

    #[test]
    fn zero_radius_matches_point() {
        let l = Lambda::new(0.72).unwrap();
        let p = CheckParams::new(20, 16);
        assert_eq!(check_point(l, &p).unwrap(), check_interval(l, 0.0, &p).unwrap());
    }
}
