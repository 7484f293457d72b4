//! Certified envelopes for the tent map `φ_λ = F_λ⁻¹ ∘ 2F_λ` on `[0, 1/2]`.
//!
//! Lower and upper values are obtained by inverting the dyadic bounds on
//! `F_λ`: if `F⁺(y) ≤ 2F⁻(x)` then `y ≤ φ_λ(x)`, and if `F⁻(y) ≥ 2F⁺(x)` then
//! `y ≥ φ_λ(x)`. Both inequalities compare integer counts, so the only
//! rounding that enters is already absorbed by the table slack.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{f_lower, f_upper, Bounds, LambdaInterval};
use crate::digits::{HalfSumTable, TableOptions};
use crate::error::{Error, Result};
use crate::exact::ExactMap;
use crate::lambda::Lambda;

/// Default bisection resolution `2⁻²⁰`.
pub const DEFAULT_RHO: f64 = 1.0 / (1u64 << 20) as f64;

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(Error::param("rho", format!("{rho} is not a positive resolution")))
    }
}

fn check_half(x: f64) -> Result<()> {
    if (0.0..=0.5).contains(&x) {
        Ok(())
    } else {
        Err(Error::param("x", format!("{x} is outside [0, 1/2]")))
    }
}

/// A certified lower bound on `φ_λ(x)` for every `λ` covered by `bounds`.
///
/// Returns the largest bisection point `y` with `F⁺(y) ≤ 2F⁻(x)`, which is
/// within `rho` of the supremum of such points.
pub fn phi_lower(bounds: &Bounds<'_>, x: f64, rho: f64) -> Result<f64> {
    check_half(x)?;
    check_rho(rho)?;
    let target = 2 * bounds.lower_count(x);
    let total = bounds.total();
    if target > total {
        return Err(Error::Internal(format!(
            "2F⁻({x}) = {target}/{total} exceeds one"
        )));
    }
    let ok = |y: f64| bounds.upper_count(y) <= target;
    if !ok(0.0) {
        return Ok(0.0);
    }
    if ok(1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > rho {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// A certified upper bound on `φ_λ(x)`: the smallest bisection point `y` with
/// `F⁻(y) ≥ 2F⁺(x)`, or `1` when no `y ≤ 1` qualifies.
pub fn phi_upper(bounds: &Bounds<'_>, x: f64, rho: f64) -> Result<f64> {
    check_half(x)?;
    check_rho(rho)?;
    let target = 2 * bounds.upper_count(x);
    let ok = |y: f64| bounds.lower_count(y) >= target;
    if !ok(1.0) {
        return Ok(1.0);
    }
    if ok(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > rho {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Parameters of one envelope computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeMeta {
    pub lambda0: Lambda,
    pub eps: f64,
    pub depth: u32,
    pub grid: u32,
    pub eta: f64,
    pub rho: f64,
}

/// Certified brackets `lo[i] ≤ φ_λ(i/M) ≤ hi[i]` for `i = 0..=⌊M/2⌋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TentEnvelope {
    meta: EnvelopeMeta,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TentEnvelope {
    pub fn meta(&self) -> &EnvelopeMeta {
        &self.meta
    }

    pub fn grid(&self) -> u32 {
        self.meta.grid
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// The grid point `i/M`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.meta.grid as f64
    }

    /// Number of stored grid points, `⌊M/2⌋ + 1`.
    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Bracket at grid index `i ∈ 0..=M`, using `φ(x) = φ(1 − x)` above 1/2.
    pub fn bracket(&self, i: usize) -> (f64, f64) {
        let m = self.meta.grid as usize;
        let k = if 2 * i > m { m - i } else { i };
        (self.lo[k], self.hi[k])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    /// Largest bracket width over stored points with `x_i ≤ x_max`.
    pub fn max_width_up_to(&self, x_max: f64) -> f64 {
        (0..self.len())
            .filter(|&i| self.x(i) <= x_max)
            .map(|i| self.width(i))
            .fold(0.0, f64::max)
    }

    pub fn max_width(&self) -> f64 {
        self.max_width_up_to(0.5)
    }

    /// Piecewise-linear interpolation of the bracket midpoints on `[0, 1]`.
    pub fn midpoint(&self, x: f64) -> f64 {
        let m = self.meta.grid as usize;
        let x = x.clamp(0.0, 1.0);
        let t = x * m as f64;
        let i = (t.floor() as usize).min(m - 1);
        let frac = t - i as f64;
        let mid = |k: usize| {
            let (a, b) = self.bracket(k);
            0.5 * (a + b)
        };
        mid(i) * (1.0 - frac) + mid(i + 1) * frac
    }

    /// Rows `(x, lo, hi)` for every grid point of `[0, 1]`.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        (0..=self.meta.grid as usize)
            .map(|i| {
                let (a, b) = self.bracket(i);
                (self.x(i), a, b)
            })
            .collect()
    }
}

/// Whether `x_i` lies in the segment where `φ_λ(x) = x/λ` for every `λ` of
/// the interval.
pub(crate) fn in_linear_region(x: f64, interval: &LambdaInterval) -> bool {
    x <= 1.0 - interval.hi()
}

/// Builds the envelope on a grid of `M` cells from an existing table.
///
/// `eps = 0` gives the point envelope at the table's `λ`.
pub fn envelope_from_table(table: &HalfSumTable, eps: f64, grid: u32, rho: f64) -> Result<TentEnvelope> {
    if grid < 2 {
        return Err(Error::param("grid", format!("{grid} must be at least 2")));
    }
    check_rho(rho)?;
    let lambda0 = Lambda::overlapping(table.lambda().get())?;
    let interval = LambdaInterval::new(lambda0, eps)?;
    let bounds = Bounds::interval(table, &interval)?;
    let m = grid as usize;
    let n = m / 2 + 1;
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let x = i as f64 / grid as f64;
            if i == 0 {
                return Ok((0.0, 0.0));
            }
            if 2 * i == m {
                // φ(1/2) = 1 for every λ.
                return Ok((1.0, 1.0));
            }
            if in_linear_region(x, &interval) {
                return Ok((x / interval.hi(), x / interval.lo()));
            }
            // 2F(x) ≥ F(x/λ) by self-similarity, so φ_λ(x) ≥ x/λ everywhere.
            let floor = (x / interval.hi()).min(1.0);
            Ok((phi_lower(&bounds, x, rho)?.max(floor), phi_upper(&bounds, x, rho)?))
        })
        .collect::<Result<_>>()?;
    let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    // φ is increasing on [0, 1/2], so neighbouring bounds transfer.
    for i in 1..n {
        lo[i] = lo[i].max(lo[i - 1]);
    }
    for i in (0..n - 1).rev() {
        hi[i] = hi[i].min(hi[i + 1]);
    }
    if let Some(i) = (0..n).find(|&i| lo[i] > hi[i]) {
        return Err(Error::Internal(format!(
            "envelope crossed at x = {}: {} > {}",
            i as f64 / grid as f64,
            lo[i],
            hi[i]
        )));
    }
    Ok(TentEnvelope {
        meta: EnvelopeMeta {
            lambda0,
            eps,
            depth: table.depth(),
            grid,
            eta: table.eta(),
            rho,
        },
        lo,
        hi,
    })
}

/// Everything needed to build an envelope from scratch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub lambda0: Lambda,
    pub eps: f64,
    pub depth: u32,
    pub grid: u32,
    pub eta: f64,
    pub rho: f64,
    pub table: TableOptions,
}

impl EnvelopeParams {
    /// Defaults: `ε = 0`, `η = L·2⁻⁴⁶`, `ρ = 2⁻²⁰`.
    pub fn new(lambda0: Lambda, depth: u32, grid: u32) -> Self {
        EnvelopeParams {
            lambda0,
            eps: 0.0,
            depth,
            grid,
            eta: crate::digits::default_eta(depth),
            rho: DEFAULT_RHO,
            table: TableOptions::default(),
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn build_table(&self) -> Result<HalfSumTable> {
        HalfSumTable::build_with(self.lambda0, self.depth, self.eta, self.table)
    }
}

pub fn build_envelope(params: &EnvelopeParams) -> Result<TentEnvelope> {
    let table = params.build_table()?;
    envelope_from_table(&table, params.eps, params.grid, params.rho)
}

/// Where map values come from for diagnostics that need `φ` off the grid.
#[derive(Debug, Clone, Copy)]
pub enum MapSource<'a> {
    Exact(ExactMap),
    /// Midpoint of the point-mode brackets at arbitrary `x`.
    Midpoint { bounds: Bounds<'a>, rho: f64 },
}

impl MapSource<'_> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            MapSource::Exact(map) => Ok(map.eval(x)),
            MapSource::Midpoint { bounds, rho } => {
                let x = if x > 0.5 { 1.0 - x } else { x };
                Ok(0.5 * (phi_lower(bounds, x, *rho)? + phi_upper(bounds, x, *rho)?))
            }
        }
    }
}

/// Dyadic sample points `x = 2^{−j}·x₀` for `j = first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub x0: f64,
    pub first: u32,
    pub last: u32,
}

impl FitWindow {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (self.first..=self.last).map(|j| self.x0 / (1u64 << j) as f64)
    }
}

/// `−log λ / log 2`, the predicted blow-up exponent at `x = 1/2`.
pub fn predicted_exponent(lambda: Lambda) -> f64 {
    -lambda.get().ln() / std::f64::consts::LN_2
}

/// Least-squares slope of `log(1 − φ(1/2 − x))` against `log x` over the window.
pub fn blowup_exponent(source: &MapSource<'_>, window: &FitWindow) -> Result<f64> {
    if window.last < window.first || window.last - window.first < 2 {
        return Err(Error::param("window", "a fit needs at least three points"));
    }
    if !(window.x0 > 0.0 && window.x0 <= 0.5) {
        return Err(Error::param("window", format!("x0 = {} is outside (0, 1/2]", window.x0)));
    }
    let mut pts = Vec::new();
    for x in window.points() {
        let gap = 1.0 - source.eval(0.5 - x)?;
        if !(gap > 0.0) {
            return Err(Error::Precision(format!(
                "1 − φ(1/2 − {x}) = {gap} is not positive; shrink the window or raise the depth"
            )));
        }
        pts.push((x.ln(), gap.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Default number of digits per Monte-Carlo sample.
pub const DEFAULT_SAMPLE_DEPTH: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub sample_depth: u32,
    pub seed: u64,
    /// Distance between the sample pushed through the pointwise midpoint map
    /// and the bound midpoint.
    pub statistic: f64,
    /// Same distance when the map interpolates the grid midpoints linearly.
    /// Diagnostic only: the chord misses the square-root-type cusp at `1/2`.
    pub interpolated_statistic: f64,
    /// Same distance for the sample itself.
    pub identity_statistic: f64,
    pub max_width: f64,
    /// `max_width + 3/√N`.
    pub tolerance: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.statistic <= self.tolerance
    }
}

/// Draws `samples` points of the truncated series with fair digits.
///
/// Sequential from one seeded stream, so the sample does not depend on the
/// thread count.
pub fn sample_series(lambda: Lambda, sample_depth: u32, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = lambda.get();
    let norm = lambda.norm();
    let words = (sample_depth as usize).div_ceil(64);
    let mut buf = vec![0u64; words];
    (0..samples)
        .map(|_| {
            for w in buf.iter_mut() {
                *w = rng.next_u64();
            }
            let mut s = 0.0;
            for i in (0..sample_depth as usize).rev() {
                let digit = (buf[i / 64] >> (i % 64)) & 1;
                s = (s + digit as f64) * l;
            }
            norm * s
        })
        .collect()
}

fn cdf_distance(sorted: &[f64], table: &HalfSumTable, grid: u32) -> f64 {
    let n = sorted.len() as f64;
    (0..=grid)
        .map(|i| {
            let x = i as f64 / grid as f64;
            let emp = sorted.partition_point(|&v| v <= x) as f64 / n;
            let mid = 0.5 * (f_lower(table, x).to_f64() + f_upper(table, x).to_f64());
            (emp - mid).abs()
        })
        .fold(0.0, f64::max)
}

/// `½(φ⁻(x) + φ⁺(x))` at an arbitrary `x ∈ [0, 1/2]`, with the same exact
/// pieces and floor as the grid envelope.
fn midpoint_at(bounds: &Bounds<'_>, interval: &LambdaInterval, x: f64, rho: f64) -> Result<f64> {
    if x >= 0.5 {
        return Ok(1.0);
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if in_linear_region(x, interval) {
        return Ok(x / interval.hi());
    }
    let floor = (x / interval.hi()).min(1.0);
    Ok(0.5 * (phi_lower(bounds, x, rho)?.max(floor) + phi_upper(bounds, x, rho)?))
}

/// Bisection steps for the preimage `a(y)` below. Only samples within `2⁻³¹`
/// of `a` can be misassigned, an expected share of `2⁻³¹` times the density.
const PREIMAGE_STEPS: u32 = 30;

/// Distance at the grid points for the sample pushed through the pointwise
/// midpoint map `ψ`, symmetric about `1/2`.
///
/// `ψ` is non-decreasing on `[0, 1/2]` with `ψ(1/2) = 1`, so for `y < 1`
/// `{ψ(X) ≤ y} = {X ≤ a} ∪ {1 − X ≤ a}` with `a = sup{x ≤ 1/2 : ψ(x) ≤ y}`.
/// Only `M` preimages are bisected instead of mapping every sample.
fn pushforward_distance(sorted: &[f64], table: &HalfSumTable, grid: u32, rho: f64) -> Result<f64> {
    let interval = LambdaInterval::new(table.lambda(), 0.0)?;
    let bounds = Bounds::interval(table, &interval)?;
    let n = sorted.len() as f64;
    let dists: Vec<f64> = (0..=grid)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let y = i as f64 / grid as f64;
            let emp = if i == grid {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
                for _ in 0..PREIMAGE_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if midpoint_at(&bounds, &interval, mid, rho)? <= y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let left = sorted.partition_point(|&v| v <= lo);
                let right = sorted.partition_point(|&v| v <= 0.5 || 1.0 - v > lo);
                (left + sorted.len() - right) as f64 / n
            };
            let mid = 0.5 * (f_lower(table, y).to_f64() + f_upper(table, y).to_f64());
            Ok((emp - mid).abs())
        })
        .collect::<Result<_>>()?;
    Ok(dists.into_iter().fold(0.0, f64::max))
}

/// Monte-Carlo check that pushing `ν_λ` through the envelope midpoint leaves
/// its distribution unchanged at the grid points.
pub fn invariance_mc(
    table: &HalfSumTable,
    envelope: &TentEnvelope,
    sample_depth: u32,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    if samples == 0 {
        return Err(Error::param("samples", "at least one sample is required"));
    }
    if envelope.meta().eps != 0.0 || envelope.meta().lambda0 != table.lambda() {
        return Err(Error::param("envelope", "a point-mode envelope at the table's λ is required"));
    }
    if sample_depth < table.depth() {
        return Err(Error::param(
            "sample-depth",
            format!("{sample_depth} is below the table depth {}", table.depth()),
        ));
    }
    let mut raw = sample_series(table.lambda(), sample_depth, samples, seed);
    let mut mapped: Vec<f64> = raw.iter().map(|&x| envelope.midpoint(x)).collect();
    raw.sort_unstable_by(f64::total_cmp);
    mapped.sort_unstable_by(f64::total_cmp);
    let grid = envelope.grid();
    let max_width = envelope.max_width();
    Ok(InvarianceReport {
        samples,
        sample_depth,
        seed,
        statistic: pushforward_distance(&raw, table, grid, envelope.meta().rho)?,
        interpolated_statistic: cdf_distance(&mapped, table, grid),
        identity_statistic: cdf_distance(&raw, table, grid),
        max_width,
        tolerance: max_width + 3.0 / (samples as f64).sqrt(),
    })
}
