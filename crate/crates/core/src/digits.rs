//! Meet-in-the-middle counting of binary digit sums.
//!
//! A length-`L` digit string `a₁…a_L` is split into a low block `a₁…a_{L/2}`
//! and a high block `a_{L/2+1}…a_L`. Both blocks contribute a value from the
//! same multiset of half sums `Σ_{i≤L/2} aᵢ λⁱ`, the high block scaled by
//! `λ^{L/2}`, so a single sorted table of `2^{L/2}` values supports counting
//! all `2^L` full sums.

use crate::error::{Error, Result};
use crate::lambda::Lambda;

/// Largest depth accepted by [`TableOptions::default`].
pub const DEFAULT_MAX_DEPTH: u32 = 60;
/// Default memory cap for a single table, 4 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

/// Default floating-point slack for depth `L`: `L · 2⁻⁴⁶`.
pub fn default_eta(depth: u32) -> f64 {
    depth as f64 * 2f64.powi(-46)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub max_depth: u32,
    pub memory_cap: u64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Sorted multiset of the `2^{L/2}` half sums at a fixed `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSumTable {
    lambda: Lambda,
    depth: u32,
    halves: Vec<f64>,
    combine_scale: f64,
    norm: f64,
    eta: f64,
}

/// Bytes needed to hold the half sums of a depth-`L` table.
pub fn table_bytes(depth: u32) -> u64 {
    8u64.saturating_mul(1u64 << (depth / 2).min(63))
}

fn check_depth(depth: u32, max_depth: u32) -> Result<()> {
    if !depth.is_multiple_of(2) {
        return Err(Error::param("depth", format!("{depth} is odd; an even digit depth is required")));
    }
    if depth < 2 || depth > max_depth {
        return Err(Error::param(
            "depth",
            format!("{depth} is outside the supported range [2, {max_depth}]"),
        ));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("eta", format!("{eta} is not a finite nonnegative slack")))
    }
}

impl HalfSumTable {
    pub fn build(lambda: Lambda, depth: u32, eta: f64) -> Result<Self> {
        Self::build_with(lambda, depth, eta, TableOptions::default())
    }

    /// Builds the table by repeated doubling: the sorted sums over `i ≤ k` are
    /// merged with themselves shifted by `λ^k`. Each round is a linear merge
    /// done in place from the back, so no sort and no scratch buffer are needed.
    pub fn build_with(lambda: Lambda, depth: u32, eta: f64, opts: TableOptions) -> Result<Self> {
        check_depth(depth, opts.max_depth)?;
        check_eta(eta)?;
        let bytes = table_bytes(depth);
        if bytes > opts.memory_cap {
            return Err(Error::Resource(format!(
                "depth {depth} needs {bytes} bytes for its half-sum table, above the cap of {} bytes",
                opts.memory_cap
            )));
        }
        let half = depth / 2;
        let len = 1usize << half;
        let mut halves = Vec::new();
        halves
            .try_reserve_exact(len)
            .map_err(|_| Error::Resource(format!("cannot allocate {bytes} bytes for half sums")))?;
        halves.push(0.0);
        let mut power = 1.0;
        for _ in 0..half {
            power *= lambda.get();
            let m = halves.len();
            halves.resize(2 * m, 0.0);
            merge_shifted_in_place(&mut halves, m, power);
        }
        Ok(HalfSumTable {
            lambda,
            depth,
            halves,
            combine_scale: lambda.pow(half),
            norm: lambda.norm(),
            eta,
        })
    }

    /// Reassembles a table from stored half sums, validating length and order.
    pub fn from_parts(lambda: Lambda, depth: u32, halves: Vec<f64>, eta: f64) -> Result<Self> {
        check_depth(depth, 64)?;
        check_eta(eta)?;
        let expected = 1usize << (depth / 2);
        if halves.len() != expected {
            return Err(Error::Integrity(format!(
                "depth {depth} needs {expected} half sums, found {}",
                halves.len()
            )));
        }
        if halves.iter().any(|v| !v.is_finite()) || halves.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Integrity("half sums are not a sorted finite sequence".into()));
        }
        Ok(HalfSumTable {
            lambda,
            depth,
            halves,
            combine_scale: lambda.pow(depth / 2),
            norm: lambda.norm(),
            eta,
        })
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn halves(&self) -> &[f64] {
        &self.halves
    }

    pub fn combine_scale(&self) -> f64 {
        self.combine_scale
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The same table with a different slack.
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        self.eta = eta;
        Ok(self)
    }

    /// Total number of digit strings, `2^L`.
    pub fn total(&self) -> u64 {
        1u64 << self.depth
    }

    /// `λ^L`, the bound on the normalized tail beyond digit `L`.
    pub fn tail(&self) -> f64 {
        self.combine_scale * self.combine_scale
    }

    /// Normalized full sum as evaluated by [`HalfSumTable::count_le`].
    #[inline]
    pub fn full_sum(&self, low: f64, high: f64) -> f64 {
        self.norm * (low + self.combine_scale * high)
    }

    /// Number of digit strings of length `L` whose normalized sum is `≤ x`.
    ///
    /// Exact with respect to the stored half sums and the evaluation order of
    /// [`HalfSumTable::full_sum`]. Both the low and the high coordinate enter
    /// monotonically, so the count is found by locating the band of low sums
    /// whose outcome depends on the high sum and resolving only that band.
    pub fn count_le(&self, x: f64) -> u64 {
        let h = &self.halves;
        let n = h.len();
        let top = h[n - 1];
        // Low sums that pass even with the largest high sum.
        let all = h.partition_point(|&s| self.full_sum(s, top) <= x);
        // Low sums that pass at least with high sum zero.
        let some = h.partition_point(|&s| self.full_sum(s, 0.0) <= x);
        let mut count = all as u64 * n as u64;
        let band = &h[all..some];
        if band.is_empty() {
            return count;
        }
        let log_n = usize::BITS - n.leading_zeros();
        if band.len().saturating_mul(log_n as usize) < 2 * n {
            for &s in band {
                count += h.partition_point(|&t| self.full_sum(s, t) <= x) as u64;
            }
        } else {
            // Low sums ascending, admissible high sums shrink.
            let mut j = n;
            for &s in band {
                while j > 0 && self.full_sum(s, h[j - 1]) > x {
                    j -= 1;
                }
                count += j as u64;
            }
        }
        count
    }

    /// Reference two-pointer sweep over the whole table; `O(2^{L/2})` per query.
    pub fn count_le_sweep(&self, x: f64) -> u64 {
        let h = &self.halves;
        let mut count = 0u64;
        let mut j = h.len();
        for &s in h {
            while j > 0 && self.full_sum(s, h[j - 1]) > x {
                j -= 1;
            }
            if j == 0 {
                break;
            }
            count += j as u64;
        }
        count
    }
}

/// `buf[..m]` is sorted; afterwards `buf[..2m]` is the sorted union of it and
/// its copy shifted by `shift`.
fn merge_shifted_in_place(buf: &mut [f64], m: usize, shift: f64) {
    debug_assert_eq!(buf.len(), 2 * m);
    let (mut i, mut j) = (m, m);
    let mut w = 2 * m;
    // Reads at i-1 and j-1 always sit below the write cursor w-1.
    while j > 0 {
        let shifted = buf[j - 1] + shift;
        w -= 1;
        if i > 0 && buf[i - 1] > shifted {
            buf[w] = buf[i - 1];
            i -= 1;
        } else {
            buf[w] = shifted;
            j -= 1;
        }
    }
}

/// Largest depth accepted by [`brute_force_count`].
pub const BRUTE_FORCE_MAX_DEPTH: u32 = 24;

/// Direct enumeration of all `2^L` digit strings with left-to-right summation.
pub fn brute_force_count(lambda: Lambda, depth: u32, x: f64) -> Result<u64> {
    if depth == 0 || depth > BRUTE_FORCE_MAX_DEPTH {
        return Err(Error::param(
            "depth",
            format!("brute force enumeration supports 1..={BRUTE_FORCE_MAX_DEPTH}, got {depth}"),
        ));
    }
    let powers: Vec<f64> = (1..=depth).map(|i| lambda.get().powi(i as i32)).collect();
    let norm = lambda.norm();
    let mut count = 0;
    for bits in 0u64..(1u64 << depth) {
        let mut sum = 0.0;
        for (i, p) in powers.iter().enumerate() {
            if bits >> i & 1 == 1 {
                sum += p;
            }
        }
        if norm * sum <= x {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn small_tables() {
        let t = HalfSumTable::build(lam(0.5), 2, 0.0).unwrap();
        assert_eq!(t.halves(), &[0.0, 0.5]);
        let t = HalfSumTable::build(lam(0.6), 4, 0.0).unwrap();
        assert!(close(t.halves(), &[0.0, 0.36, 0.6, 0.96]));
        let t = HalfSumTable::build(lam(0.8), 8, 0.0).unwrap();
        assert_eq!(t.halves().len(), 16);
        assert_eq!(t.halves()[0], 0.0);
        assert!((t.halves()[15] - 2.3616).abs() < 1e-12);
    }

    #[test]
    fn invariants_hold() {
        for &(l, d) in &[(0.6, 10), (0.75, 16), (0.9, 20)] {
            let eta = default_eta(d);
            let t = HalfSumTable::build(lam(l), d, eta).unwrap();
            let h = t.halves();
            assert_eq!(h.len(), 1 << (d / 2));
            assert!(h.windows(2).all(|w| w[0] <= w[1]));
            let geo: f64 = (1..=d / 2).map(|i| l.powi(i as i32)).sum();
            assert!((h[h.len() - 1] - geo).abs() <= eta);
            let top = t.full_sum(h[h.len() - 1], h[h.len() - 1]);
            assert!((top - (1.0 - l.powi(d as i32))).abs() <= eta);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            HalfSumTable::build(lam(0.7), 7, 0.0),
            Err(Error::Parameter { name: "depth", .. })
        ));
        assert!(HalfSumTable::build(lam(0.7), 0, 0.0).is_err());
        assert!(HalfSumTable::build(lam(0.7), 62, 0.0).is_err());
        assert!(HalfSumTable::build(lam(0.7), 8, -1.0).is_err());
        let opts = TableOptions {
            max_depth: 60,
            memory_cap: 1 << 10,
        };
        match HalfSumTable::build_with(lam(0.7), 20, 0.0, opts) {
            Err(Error::Resource(msg)) => assert!(msg.contains("8192"), "{msg}"),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn count_examples() {
        let t = HalfSumTable::build(lam(0.6), 2, 0.0).unwrap();
        assert_eq!(t.count_le(0.5), 3);
        assert_eq!(t.count_le(1.0), 4);
        assert_eq!(t.count_le(-1e-9), 0);
        assert_eq!(brute_force_count(lam(0.6), 2, 0.5).unwrap(), 3);
        assert_eq!(brute_force_count(lam(0.75), 4, 0.0).unwrap(), 1);
    }

    #[test]
    fn brute_force_guard() {
        assert!(brute_force_count(lam(0.7), 25, 0.5).is_err());
        assert!(brute_force_count(lam(0.7), 0, 0.5).is_err());
    }

    #[test]
    fn band_and_sweep_agree() {
        for &(l, d) in &[(0.55, 16), (0.62, 18), (0.8, 20), (0.95, 16)] {
            let t = HalfSumTable::build(lam(l), d, 0.0).unwrap();
            for k in 0..=200 {
                let x = k as f64 / 200.0;
                assert_eq!(t.count_le(x), t.count_le_sweep(x), "λ={l} L={d} x={x}");
            }
        }
    }

    #[test]
    fn deterministic_build() {
        let a = HalfSumTable::build(lam(0.7), 18, 1e-12).unwrap();
        let b = HalfSumTable::build(lam(0.7), 18, 1e-12).unwrap();
        let bits = |t: &HalfSumTable| t.halves().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
