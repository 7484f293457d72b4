//! C ABI over the `bernconv` library.
//!
//! Tables and envelopes are opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`BcStatus`];
//! outputs go through pointer arguments and are written only on success. The
//! message of the most recent failure on the calling thread is available from
//! [`bc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bernconv::convexity::certify_envelope;
use bernconv::density::{minimal_n, CylinderSource};
use bernconv::digits::default_eta;
use bernconv::envelope::envelope_from_table;
use bernconv::exact::ExactMap;
use bernconv::{
    check_interval, check_point, rychlik_bounds, sup_density_pipeline, Bounds, CheckParams, ConvexityCertificate,
    Error, HalfSumTable, Lambda, Preset, RychlikBound, Status, TentEnvelope,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    InvalidParameter = 1,
    Resource = 2,
    Integrity = 3,
    Precision = 4,
    Internal = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcVerdict {
    Certified = 0,
    Refuted = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcPreset {
    Golden = 0,
    PlasticInv = 1,
    PisotX4 = 2,
    SalemX5 = 3,
    Sqrt2 = 4,
    Cbrt2 = 5,
}

/// Flat view of a convexity certificate. `witness` is meaningful only when
/// `has_witness` is set; `checked_first > checked_last` means nothing was
/// checked.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcCertificate {
    pub lambda0: f64,
    pub eps: f64,
    pub depth: u32,
    pub grid: u32,
    pub verdict: BcVerdict,
    pub scale: f64,
    pub has_witness: bool,
    pub witness: u32,
    pub witness_x: f64,
    pub min_margin: f64,
    pub checked_first: u32,
    pub checked_last: u32,
    pub exists_witness: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcRychlik {
    pub lambda: f64,
    pub n: u32,
    pub min_cyl: f64,
    pub var_bound: f64,
    pub sup_bound: f64,
}

/// Opaque sorted half-sum table.
pub struct BcTable(HalfSumTable);

/// Opaque tent-map envelope.
pub struct BcEnvelope(TentEnvelope);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BcStatus {
    match e {
        Error::Parameter { .. } => BcStatus::InvalidParameter,
        Error::Resource(_) => BcStatus::Resource,
        Error::Integrity(_) => BcStatus::Integrity,
        Error::Precision(_) => BcStatus::Precision,
        Error::Internal(_) => BcStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), BcStatus>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("panic inside bernconv".into());
            BcStatus::Panic
        }
    }
}

fn lib<T>(r: bernconv::Result<T>) -> Result<T, BcStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_last_error(e.to_string());
        s
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BcStatus> {
    if p.is_null() {
        set_last_error(format!("`{name}` is null"));
        Err(BcStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn certificate(c: &ConvexityCertificate) -> BcCertificate {
    BcCertificate {
        lambda0: c.lambda0.get(),
        eps: c.eps,
        depth: c.depth,
        grid: c.grid,
        verdict: match c.status {
            Status::Certified => BcVerdict::Certified,
            Status::Refuted => BcVerdict::Refuted,
            Status::Inconclusive => BcVerdict::Inconclusive,
        },
        scale: c.scale,
        has_witness: c.witness.is_some(),
        witness: c.witness.unwrap_or(0) as u32,
        witness_x: c.witness_x.unwrap_or(f64::NAN),
        min_margin: c.min_margin,
        checked_first: c.checked_range.0 as u32,
        checked_last: c.checked_range.1 as u32,
        exists_witness: c.exists_witness,
    }
}

fn rychlik(r: &RychlikBound) -> BcRychlik {
    BcRychlik {
        lambda: r.lambda.get(),
        n: r.n,
        min_cyl: r.min_cyl,
        var_bound: r.var_bound,
        sup_bound: r.sup_bound,
    }
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default slack `η` for depth `L`; `NaN` for `L > 64`.
#[no_mangle]
pub extern "C" fn bc_default_eta(depth: u32) -> f64 {
    if depth > 64 {
        f64::NAN
    } else {
        default_eta(depth)
    }
}

/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn bc_preset_lambda(preset: BcPreset, out: *mut f64) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = match preset {
            BcPreset::Golden => Preset::Golden,
            BcPreset::PlasticInv => Preset::PlasticInv,
            BcPreset::PisotX4 => Preset::PisotX4,
            BcPreset::SalemX5 => Preset::SalemX5,
            BcPreset::Sqrt2 => Preset::Sqrt2,
            BcPreset::Cbrt2 => Preset::Cbrt2,
        };
        *out = p.lambda().get();
        Ok(())
    })
}

/// Builds the half-sum table for `λ ∈ (0, 1)` at even depth `L`.
///
/// # Safety
/// `out` must be valid for a write of one pointer. On success `*out` owns a
/// table that must be released with [`bc_table_free`].
#[no_mangle]
pub unsafe extern "C" fn bc_table_build(lambda: f64, depth: u32, eta: f64, out: *mut *mut BcTable) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let l = lib(Lambda::new(lambda))?;
        let t = lib(HalfSumTable::build(l, depth, eta))?;
        *out = Box::into_raw(Box::new(BcTable(t)));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a pointer from [`bc_table_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_table_free(table: *mut BcTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of digit strings of length `L` whose normalized sum is `≤ x`.
///
/// # Safety
/// `table` must be a live table and `out` valid for one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn bc_table_count_le(table: *const BcTable, x: f64, out: *mut u64) -> BcStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out, "out")?;
        if x.is_nan() {
            return lib(Err(Error::param("x", "NaN")));
        }
        *out = (*table).0.count_le(x);
        Ok(())
    })
}

/// Dyadic bounds `lower/2^L ≤ F_λ(x) ≤ upper/2^L` at the table's `λ`.
///
/// # Safety
/// `table` must be a live table; `lower` and `upper` valid for one
/// `uint64_t` each.
#[no_mangle]
pub unsafe extern "C" fn bc_cdf_bounds(table: *const BcTable, x: f64, lower: *mut u64, upper: *mut u64) -> BcStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        if x.is_nan() {
            return lib(Err(Error::param("x", "NaN")));
        }
        let b = Bounds::point(&(*table).0);
        *lower = b.lower_count(x);
        *upper = b.upper_count(x);
        Ok(())
    })
}

/// Envelope of `φ_λ` on the grid `i/M` for every `λ ∈ [λ − ε, λ + ε]`,
/// where `λ` is the table's parameter.
///
/// # Safety
/// `table` must be a live table and `out` valid for one pointer. On success
/// `*out` must be released with [`bc_envelope_free`].
#[no_mangle]
pub unsafe extern "C" fn bc_envelope_build(
    table: *const BcTable,
    eps: f64,
    grid: u32,
    rho: f64,
    out: *mut *mut BcEnvelope,
) -> BcStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out, "out")?;
        let env = lib(envelope_from_table(&(*table).0, eps, grid, rho))?;
        *out = Box::into_raw(Box::new(BcEnvelope(env)));
        Ok(())
    })
}

/// # Safety
/// `env` must be null or a pointer from [`bc_envelope_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_envelope_free(env: *mut BcEnvelope) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Bracket at grid index `i ∈ 0..=M`.
///
/// # Safety
/// `env` must be a live envelope; `lo` and `hi` valid for one `double` each.
#[no_mangle]
pub unsafe extern "C" fn bc_envelope_bracket(env: *const BcEnvelope, i: u32, lo: *mut f64, hi: *mut f64) -> BcStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        let e = &(*env).0;
        if i > e.grid() {
            return lib(Err(Error::param("i", format!("{i} exceeds the grid size {}", e.grid()))));
        }
        (*lo, *hi) = e.bracket(i as usize);
        Ok(())
    })
}

/// # Safety
/// `env` must be a live envelope and `out` valid for one [`BcCertificate`].
#[no_mangle]
pub unsafe extern "C" fn bc_envelope_certify(env: *const BcEnvelope, out: *mut BcCertificate) -> BcStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(out, "out")?;
        *out = certificate(&lib(certify_envelope(&(*env).0))?);
        Ok(())
    })
}

/// Point convexity check with default `η` and `ρ`.
///
/// # Safety
/// `out` must be valid for one [`BcCertificate`].
#[no_mangle]
pub unsafe extern "C" fn bc_check_point(lambda: f64, depth: u32, grid: u32, out: *mut BcCertificate) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let l = lib(Lambda::new(lambda))?;
        *out = certificate(&lib(check_point(l, &CheckParams::new(depth, grid)))?);
        Ok(())
    })
}

/// Uniform convexity check over `[λ₀ − ε, λ₀ + ε]` with default `η` and `ρ`.
///
/// # Safety
/// `out` must be valid for one [`BcCertificate`].
#[no_mangle]
pub unsafe extern "C" fn bc_check_interval(
    lambda0: f64,
    eps: f64,
    depth: u32,
    grid: u32,
    out: *mut BcCertificate,
) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let l = lib(Lambda::new(lambda0))?;
        *out = certificate(&lib(check_interval(l, eps, &CheckParams::new(depth, grid)))?);
        Ok(())
    })
}

/// Smallest `n` with `2λⁿ < 1`; 0 for `λ` outside `(0, 1)`.
#[no_mangle]
pub extern "C" fn bc_minimal_n(lambda: f64) -> u32 {
    Lambda::new(lambda).map_or(0, minimal_n)
}

/// Variation and sup bounds on the invariant density from a minimum
/// cylinder length, conditional on piecewise convexity of `φ_λ`.
///
/// # Safety
/// `out` must be valid for one [`BcRychlik`].
#[no_mangle]
pub unsafe extern "C" fn bc_rychlik_bounds(lambda: f64, n: u32, min_cyl: f64, out: *mut BcRychlik) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let l = lib(Lambda::new(lambda))?;
        let r = lib(rychlik_bounds(l, n, min_cyl))?;
        *out = rychlik(&r);
        Ok(())
    })
}

/// Density bounds from the minimum cylinder length measured on `table`, at
/// `n` or, when `n == 0`, at the minimal admissible `n`.
///
/// # Safety
/// `table` must be a live table and `out` valid for one [`BcRychlik`].
#[no_mangle]
pub unsafe extern "C" fn bc_sup_density(table: *const BcTable, n: u32, rho: f64, out: *mut BcRychlik) -> BcStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out, "out")?;
        let src = CylinderSource::Table {
            table: &(*table).0,
            rho,
        };
        let r = lib(sup_density_pipeline(&src, (n > 0).then_some(n)))?;
        *out = rychlik(&r);
        Ok(())
    })
}

/// Exact density bounds at `λ = 2^{−1/2}`, where `F_λ` is piecewise quadratic.
///
/// # Safety
/// `out` must be valid for one [`BcRychlik`].
#[no_mangle]
pub unsafe extern "C" fn bc_sup_density_sqrt2(n: u32, out: *mut BcRychlik) -> BcStatus {
    guard(|| {
        non_null(out, "out")?;
        let src = CylinderSource::Exact(ExactMap::Sqrt2);
        let r = lib(sup_density_pipeline(&src, (n > 0).then_some(n)))?;
        *out = rychlik(&r);
        Ok(())
    })
}
