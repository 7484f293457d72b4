//! Command-line front end.
//!
//! Exit statuses: `0` success, `1` parameter error, `2` resource or cache
//! error, `3` refuted convexity, `4` internal-consistency error.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache::TableCache;
use crate::cdf::{Bounds, LambdaInterval};
use crate::convexity::{self, certify_envelope, CheckParams, ConvexityCertificate};
use crate::digits::{
    brute_force_count, default_eta, HalfSumTable, TableOptions, DEFAULT_MAX_DEPTH, DEFAULT_MEMORY_CAP,
};
use crate::density::{self, CylinderSource};
use crate::envelope::{envelope_from_table, invariance_mc, DEFAULT_RHO, DEFAULT_SAMPLE_DEPTH};
use crate::error::{Error, Result};
use crate::exact::ExactMap;
use crate::lambda::{Lambda, Preset};
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 3;

#[derive(Debug, Clone, Parser)]
#[command(name = "bernconv", version, about = "Certified envelopes and convexity checks for Bernoulli-convolution tent maps")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Largest half-sum table, in bytes.
    #[arg(long, global = true, default_value_t = DEFAULT_MEMORY_CAP)]
    pub mem_cap: u64,

    /// Directory for cached half-sum tables; caching is off when unset.
    #[arg(long, global = true, env = crate::cache::CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct LambdaArgs {
    /// Contraction ratio as a decimal.
    #[arg(long, conflicts_with = "lambda_preset")]
    pub lambda: Option<f64>,

    /// Named algebraic parameter computed to full binary64 precision.
    #[arg(long, value_enum)]
    pub lambda_preset: Option<Preset>,
}

impl LambdaArgs {
    pub fn resolve(&self) -> Result<Lambda> {
        match (self.lambda, self.lambda_preset) {
            (Some(v), None) => Lambda::new(v),
            (None, Some(p)) => Ok(p.lambda()),
            _ => Err(Error::param("lambda", "give exactly one of --lambda or --lambda-preset")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Numerics {
    /// Digit depth L (even).
    #[arg(long, default_value_t = 40)]
    pub depth: u32,

    /// Grid size M; points are i/M.
    #[arg(long, default_value_t = 50)]
    pub grid: u32,

    /// Floating-point slack; defaults to L·2^-46.
    #[arg(long)]
    pub eta: Option<f64>,

    /// Bisection resolution.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
}

impl Numerics {
    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(self.depth))
    }

    fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::param("grid", format!("{} must be at least 2", self.grid)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::param("rho", format!("{} is not positive", self.rho)));
        }
        let eta = self.eta();
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::param("eta", format!("{eta} is not a nonnegative slack")));
        }
        if !self.depth.is_multiple_of(2) || !(2..=DEFAULT_MAX_DEPTH).contains(&self.depth) {
            return Err(Error::param("depth", format!("{} is not an even depth in [2, {DEFAULT_MAX_DEPTH}]", self.depth)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RychlikSource {
    /// Point bounds from the half-sum table.
    Table,
    /// Closed-form map; needs λ = 1/√2 or λ ≤ 1/2.
    Exact,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Dyadic bounds on the distribution function at the grid points.
    Cdf {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Certified brackets of the tent map on the grid.
    Envelope {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Convexity verdict at a single λ.
    Certify {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
    },
    /// Convexity verdict uniformly over [λ − ε, λ + ε].
    CertifyInterval {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
        #[arg(long)]
        eps: f64,
    },
    /// Point verdicts over λ = from, from + step, ..., to.
    Scan {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        num: Numerics,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Density bounds from minimum cylinder lengths.
    Rychlik {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
        /// Cylinder generation; defaults to the smallest n with 2λⁿ < 1.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_enum, default_value_t = RychlikSource::Table)]
        source: RychlikSource,
    },
    /// Monte-Carlo invariance check of the envelope midpoint.
    Invariance {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        num: Numerics,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_DEPTH)]
        sample_depth: u32,
    },
    /// Compare table counting against direct enumeration.
    OracleCheck {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, default_value_t = 16)]
        depth: u32,
        #[arg(long, default_value_t = 100)]
        checks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time table construction against a cache round trip.
    Bench {
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, default_value_t = 40)]
        depth: u32,
    },
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::param("threads", "at least one thread is required"));
        }
        match &self.command {
            Command::Cdf { lambda, num, eps }
            | Command::Envelope { lambda, num, eps, .. }
            | Command::CertifyInterval { lambda, num, eps } => {
                num.validate()?;
                let l = lambda.resolve()?;
                if *eps != 0.0 || !matches!(self.command, Command::Cdf { .. }) {
                    LambdaInterval::new(Lambda::overlapping(l.get())?, *eps)?;
                }
            }
            Command::Certify { lambda, num } => {
                num.validate()?;
                Lambda::overlapping(lambda.resolve()?.get())?;
            }
            Command::Scan { from, to, step, num, .. } => {
                num.validate()?;
                convexity::scan_lambdas(*from, *to, *step)?;
            }
            Command::Rychlik { lambda, num, .. } => {
                num.validate()?;
                lambda.resolve()?;
            }
            Command::Invariance { lambda, num, samples, sample_depth, .. } => {
                num.validate()?;
                Lambda::overlapping(lambda.resolve()?.get())?;
                if *samples == 0 {
                    return Err(Error::param("samples", "at least one sample is required"));
                }
                if *sample_depth < num.depth {
                    return Err(Error::param("sample-depth", "must be at least the table depth"));
                }
            }
            Command::OracleCheck { lambda, depth, .. } => {
                lambda.resolve()?;
                if depth % 2 != 0 || !(2..=crate::digits::BRUTE_FORCE_MAX_DEPTH).contains(depth) {
                    return Err(Error::param("depth", format!("{depth} is not an even depth in [2, 24]")));
                }
            }
            Command::Bench { lambda, depth } => {
                lambda.resolve()?;
                if depth % 2 != 0 || !(2..=DEFAULT_MAX_DEPTH).contains(depth) {
                    return Err(Error::param("depth", format!("{depth} is not an even depth")));
                }
            }
        }
        Ok(())
    }

    fn table_options(&self) -> TableOptions {
        TableOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            memory_cap: self.mem_cap,
        }
    }

    fn table(&self, lambda: Lambda, num: &Numerics) -> Result<HalfSumTable> {
        let eta = num.eta();
        match &self.cache_dir {
            Some(dir) => Ok(TableCache::new(dir)
                .load_or_build(lambda, num.depth, eta, self.table_options())?
                .0),
            None => HalfSumTable::build_with(lambda, num.depth, eta, self.table_options()),
        }
    }

    fn check_params(&self, num: &Numerics) -> CheckParams {
        CheckParams {
            depth: num.depth,
            grid: num.grid,
            eta: num.eta(),
            rho: num.rho,
            table: self.table_options(),
        }
    }
}

fn json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Resource(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn certificate_exit(certs: &[ConvexityCertificate]) -> i32 {
    if certs.iter().any(|c| c.is_refuted()) {
        EXIT_REFUTED
    } else {
        EXIT_OK
    }
}

#[derive(Serialize)]
struct OracleReport {
    lambda: Lambda,
    depth: u32,
    checks: usize,
    mismatches: usize,
}

#[derive(Serialize)]
struct BenchReport {
    lambda: Lambda,
    depth: u32,
    entries: usize,
    build_seconds: f64,
    store_seconds: f64,
    load_seconds: f64,
    cache_file: PathBuf,
}

/// Thresholds at least `2η` away from every attained value of both counters.
fn separated_thresholds(table: &HalfSumTable, checks: usize, seed: u64) -> Vec<f64> {
    let h = table.halves();
    let mut sums: Vec<f64> = h
        .iter()
        .flat_map(|&a| h.iter().map(move |&b| (a, b)))
        .map(|(a, b)| table.full_sum(a, b))
        .collect();
    sums.sort_unstable_by(f64::total_cmp);
    let gap = 2.0 * table.eta().max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(checks);
    while out.len() < checks {
        let x: f64 = rng.gen_range(-0.05..1.05);
        let i = sums.partition_point(|&s| s < x);
        let near = [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|k| sums.get(k))
            .any(|&s| (s - x).abs() < gap);
        if !near {
            out.push(x);
        }
    }
    out
}

/// Counting oracle comparison; returns the number of mismatches.
pub fn oracle_check(lambda: Lambda, depth: u32, checks: usize, seed: u64) -> Result<usize> {
    let table = HalfSumTable::build(lambda, depth, default_eta(depth))?;
    let mut mismatches = 0;
    for x in separated_thresholds(&table, checks, seed) {
        if table.count_le(x) != brute_force_count(lambda, depth, x)? {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

/// Runs one command, writing its artifact to `out` (or to `--out`).
///
/// The artifact is assembled in memory and written once the command finishes.
pub fn dispatch<W: Write>(cfg: &RunConfig, mut out: W) -> Result<i32> {
    cfg.validate()?;
    let run = || -> Result<(i32, Vec<u8>)> {
        let mut buf = Vec::new();
        let code = execute(cfg, &mut buf)?;
        Ok((code, buf))
    };
    let (code, bytes) = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    match &cfg.out {
        Some(path) => File::create(path)?.write_all(&bytes)?,
        None => out.write_all(&bytes)?,
    }
    out.flush()?;
    Ok(code)
}

fn execute<W: Write>(cfg: &RunConfig, mut out: W) -> Result<i32> {
    match &cfg.command {
        Command::Cdf { lambda, num, eps } => {
            let l = lambda.resolve()?;
            let table = cfg.table(l, num)?;
            let bounds = if *eps == 0.0 {
                Bounds::point(&table)
            } else {
                Bounds::interval(&table, &LambdaInterval::new(l, *eps)?)?
            };
            output::write_cdf_csv(&bounds, num.grid, &mut out)?;
            Ok(EXIT_OK)
        }
        Command::Envelope { lambda, num, eps, format } => {
            let l = lambda.resolve()?;
            let table = cfg.table(l, num)?;
            let env = envelope_from_table(&table, *eps, num.grid, num.rho)?;
            match format {
                Format::Csv => output::write_envelope_csv(&env, &mut out)?,
                Format::Json => json(&env, &mut out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Certify { lambda, num } => certify(cfg, lambda.resolve()?, 0.0, num, out),
        Command::CertifyInterval { lambda, num, eps } => certify(cfg, lambda.resolve()?, *eps, num, out),
        Command::Scan { from, to, step, num, format } => {
            let lambdas = convexity::scan_lambdas(*from, *to, *step)?;
            let certs: Vec<ConvexityCertificate> = if cfg.cache_dir.is_some() {
                lambdas
                    .iter()
                    .map(|&l| {
                        let t = cfg.table(l, num)?;
                        certify_envelope(&envelope_from_table(&t, 0.0, num.grid, num.rho)?)
                    })
                    .collect::<Result<_>>()?
            } else {
                convexity::scan_points(&lambdas, &cfg.check_params(num))?
            };
            match format {
                Format::Csv => output::write_scan_csv(&certs, &mut out)?,
                Format::Json => json(&certs, &mut out)?,
            }
            Ok(certificate_exit(&certs))
        }
        Command::Rychlik { lambda, num, n, source } => {
            let l = lambda.resolve()?;
            let bound = match source {
                RychlikSource::Exact => {
                    let map = if l.get().to_bits() == std::f64::consts::FRAC_1_SQRT_2.to_bits() {
                        ExactMap::Sqrt2
                    } else {
                        ExactMap::small_lambda_tent(l).map_err(|_| {
                            Error::param("source", "the exact source needs λ = 1/√2 or λ ≤ 1/2")
                        })?
                    };
                    density::sup_density_pipeline(&CylinderSource::Exact(map), *n)?
                }
                RychlikSource::Table => {
                    let table = cfg.table(l, num)?;
                    density::sup_density_pipeline(&CylinderSource::Table { table: &table, rho: num.rho }, *n)?
                }
            };
            json(&bound, &mut out)?;
            Ok(EXIT_OK)
        }
        Command::Invariance { lambda, num, samples, seed, sample_depth } => {
            let l = Lambda::overlapping(lambda.resolve()?.get())?;
            let table = cfg.table(l, num)?;
            let env = envelope_from_table(&table, 0.0, num.grid, num.rho)?;
            let report = invariance_mc(&table, &env, *sample_depth, *samples, *seed)?;
            json(&report, &mut out)?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck { lambda, depth, checks, seed } => {
            let l = lambda.resolve()?;
            let mismatches = oracle_check(l, *depth, *checks, *seed)?;
            json(
                &OracleReport {
                    lambda: l,
                    depth: *depth,
                    checks: *checks,
                    mismatches,
                },
                &mut out,
            )?;
            if mismatches > 0 {
                return Err(Error::Internal(format!("{mismatches} counting mismatches")));
            }
            Ok(EXIT_OK)
        }
        Command::Bench { lambda, depth } => {
            let l = lambda.resolve()?;
            let dir = cfg.cache_dir.clone().unwrap_or_else(crate::cache::default_cache_dir);
            let cache = TableCache::new(dir);
            let eta = default_eta(*depth);
            let t0 = Instant::now();
            let table = HalfSumTable::build_with(l, *depth, eta, cfg.table_options())?;
            let build = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let path = cache.store(&table)?;
            let store = t1.elapsed().as_secs_f64();
            let t2 = Instant::now();
            let loaded = cache
                .load(l, *depth, eta)?
                .ok_or_else(|| Error::Internal("stored table vanished".into()))?;
            let load = t2.elapsed().as_secs_f64();
            if loaded != table {
                return Err(Error::Internal("cache round trip changed the table".into()));
            }
            json(
                &BenchReport {
                    lambda: l,
                    depth: *depth,
                    entries: table.halves().len(),
                    build_seconds: build,
                    store_seconds: store,
                    load_seconds: load,
                    cache_file: path,
                },
                &mut out,
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn certify<W: Write>(cfg: &RunConfig, l: Lambda, eps: f64, num: &Numerics, out: W) -> Result<i32> {
    let l = Lambda::overlapping(l.get())?;
    let cert = if cfg.cache_dir.is_some() {
        let t = cfg.table(l, num)?;
        certify_envelope(&envelope_from_table(&t, eps, num.grid, num.rho)?)?
    } else {
        convexity::check_interval(l, eps, &cfg.check_params(num))?
    };
    json(&cert, out)?;
    Ok(certificate_exit(std::slice::from_ref(&cert)))
}
