//! C interface to `obscon-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions and
//! released by the matching `*_free`. Every fallible call returns an
//! [`ObsconStatus`]; on failure the message is available from
//! [`obscon_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use obscon_core::experiments::{mesh_for, PotentialFamily};
use obscon_core::observability::{asymptotic_constant, finite_time_constant, j_functional};
use obscon_core::optimizer::{maximize_relaxed, AscentOptions};
use obscon_core::{enumerate_basis, Coupling, Domain, Error, ModeFamily, Point, SpectralBasis, SubsetSpec};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsconStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    DegenerateSpectrum = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsconDomain {
    Interval = 0,
    Disk = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsconPotential {
    /// `x²` on `[0.5 - δ, 0.5 + δ]`.
    IntervalQuadratic = 0,
    /// `1/r²` on `r <= δ`.
    DiskInverseSquare = 1,
    /// `r` on `r <= δ`.
    DiskRadius = 2,
}

/// Opaque enumerated eigenbasis.
pub struct ObsconBasis {
    inner: SpectralBasis,
}

/// Opaque mode family sampled on a mesh.
pub struct ObsconFamily {
    inner: ModeFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ObsconStatus {
    match err {
        Error::DegenerateSpectrum { .. } | Error::UnsupportedDegeneracy(_) => ObsconStatus::DegenerateSpectrum,
        Error::Numerical(_) => ObsconStatus::Numerical,
        _ => ObsconStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ObsconStatus, String)>) -> ObsconStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ObsconStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ObsconStatus::Panic
        }
    }
}

fn core<T>(r: obscon_core::Result<T>) -> Result<T, (ObsconStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (ObsconStatus, String) {
    (ObsconStatus::NullPointer, format!("`{name}` is null"))
}

fn invalid(message: impl Into<String>) -> (ObsconStatus, String) {
    (ObsconStatus::InvalidArgument, message.into())
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (ObsconStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

fn domain_of(d: ObsconDomain) -> Domain {
    match d {
        ObsconDomain::Interval => Domain::UnitInterval,
        ObsconDomain::Disk => Domain::UnitDisk,
    }
}

/// Copies the last error message of this thread into `buffer` (nul-terminated,
/// truncated to `len`). Returns the full message length without the nul, or 0 when
/// there is no error.
///
/// # Safety
/// `buffer` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn obscon_last_error_message(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buffer.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// `J_order(x)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn obscon_bessel_j(order: u32, x: f64, out: *mut f64) -> ObsconStatus {
    guard(|| {
        *out_ref(out, "out")? = core(obscon_core::bessel_j(order as usize, x))?;
        Ok(())
    })
}

/// `J'_order(x)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn obscon_bessel_j_prime(order: u32, x: f64, out: *mut f64) -> ObsconStatus {
    guard(|| {
        *out_ref(out, "out")? = core(obscon_core::bessel_j_prime(order as usize, x))?;
        Ok(())
    })
}

/// The `rank`-th positive zero of `J_order` (rank starts at 1).
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn obscon_bessel_zero(order: u32, rank: u32, out: *mut f64) -> ObsconStatus {
    guard(|| {
        *out_ref(out, "out")? = core(obscon_core::bessel_zero(order as usize, rank as usize))?;
        Ok(())
    })
}

/// The first `count` Dirichlet eigenpairs of the domain, in eigenvalue order.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to release with
/// [`obscon_basis_free`].
#[no_mangle]
pub unsafe extern "C" fn obscon_basis_new(domain: ObsconDomain, count: usize, out: *mut *mut ObsconBasis) -> ObsconStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inner = core(enumerate_basis(domain_of(domain), count))?;
        *out = Box::into_raw(Box::new(ObsconBasis { inner }));
        Ok(())
    })
}

/// # Safety
/// `basis` must be null or a handle from [`obscon_basis_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obscon_basis_free(basis: *mut ObsconBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Number of eigenpairs in the basis; 0 for a null handle.
///
/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obscon_basis_len(basis: *const ObsconBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.inner.len())
}

/// Eigenvalue of mode `index` (0-based).
///
/// # Safety
/// `basis` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obscon_basis_eigenvalue(basis: *const ObsconBasis, index: usize, out: *mut f64) -> ObsconStatus {
    guard(|| {
        let b = basis.as_ref().ok_or_else(|| null("basis"))?;
        let pair = b.inner.pairs.get(index).ok_or_else(|| invalid(format!("index {index} out of range")))?;
        *out_ref(out, "out")? = pair.eigenvalue;
        Ok(())
    })
}

/// Value of mode `index` at `x` (interval) or at polar `(x, theta)` (disk; `x` is
/// the radius).
///
/// # Safety
/// `basis` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obscon_basis_evaluate(
    basis: *const ObsconBasis,
    index: usize,
    x: f64,
    theta: f64,
    out: *mut f64,
) -> ObsconStatus {
    guard(|| {
        let b = basis.as_ref().ok_or_else(|| null("basis"))?;
        let pair = b.inner.pairs.get(index).ok_or_else(|| invalid(format!("index {index} out of range")))?;
        let p = match b.inner.domain {
            Domain::UnitInterval => Point::Line(x),
            Domain::UnitDisk => Point::Polar { r: x, theta },
        };
        *out_ref(out, "out")? = pair.evaluate(p);
        Ok(())
    })
}

/// First-order perturbed modes of `-Δ + εV₀` sampled on the default mesh of the
/// potential's domain, or on `mesh` cells (interval) / increments (disk) when
/// nonzero. `modes` is `N`, `truncation` the number of modes in the correction
/// sums. Degenerate disk clusters use the mock-degenerate treatment.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to release with
/// [`obscon_family_free`].
#[no_mangle]
pub unsafe extern "C" fn obscon_family_new(
    potential: ObsconPotential,
    epsilon: f64,
    delta: f64,
    modes: usize,
    truncation: usize,
    mesh: usize,
    out: *mut *mut ObsconFamily,
) -> ObsconStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let family = match potential {
            ObsconPotential::IntervalQuadratic => PotentialFamily::IntervalQuadratic,
            ObsconPotential::DiskInverseSquare => PotentialFamily::DiskInverseSquare,
            ObsconPotential::DiskRadius => PotentialFamily::DiskRadius,
        };
        let domain = family.domain();
        let mesh = core(mesh_for(domain, (mesh > 0).then_some(mesh)))?;
        let basis = core(enumerate_basis(domain, truncation.max(modes)))?;
        let v = core(family.build(epsilon, delta))?;
        let coupling = core(Coupling::new(&basis, &v, basis.len(), &mesh, domain == Domain::UnitDisk))?;
        let inner = core(ModeFamily::perturbed(&coupling, epsilon, modes, &mesh))?;
        *out = Box::into_raw(Box::new(ObsconFamily { inner }));
        Ok(())
    })
}

/// # Safety
/// `family` must be null or a handle from [`obscon_family_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obscon_family_free(family: *mut ObsconFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Observation region for the functional calls: `count` closed pieces given as
/// `bounds[2i], bounds[2i+1]`, intervals of `[0, 1]` on the interval and angular
/// sectors (radians) on the disk.
unsafe fn subset_of(family: &ModeFamily, bounds: *const f64, count: usize) -> Result<SubsetSpec, (ObsconStatus, String)> {
    if bounds.is_null() {
        return Err(null("bounds"));
    }
    let raw = std::slice::from_raw_parts(bounds, 2 * count);
    let pieces: Vec<(f64, f64)> = raw.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    core(match family.mesh.domain() {
        Domain::UnitInterval => SubsetSpec::interval_union(pieces),
        Domain::UnitDisk => SubsetSpec::radial_angular(pieces),
    })
}

/// `J_N = min_{j<N} ∫_ω φ_j²` and the 0-based position of the minimising mode.
///
/// # Safety
/// `family` must be a live handle, `bounds` must hold `2 * count` doubles, and the
/// output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn obscon_j_functional(
    family: *const ObsconFamily,
    bounds: *const f64,
    count: usize,
    modes: usize,
    value: *mut f64,
    argmin: *mut usize,
) -> ObsconStatus {
    guard(|| {
        let f = &family.as_ref().ok_or_else(|| null("family"))?.inner;
        let subset = subset_of(f, bounds, count)?;
        let report = core(j_functional(f, &subset, modes))?;
        *out_ref(value, "value")? = report.j_value;
        *out_ref(argmin, "argmin")? = report.argmin_position;
        Ok(())
    })
}

/// Truncated finite-time observability constant over horizon `horizon`.
///
/// # Safety
/// As [`obscon_j_functional`].
#[no_mangle]
pub unsafe extern "C" fn obscon_finite_time_constant(
    family: *const ObsconFamily,
    bounds: *const f64,
    count: usize,
    modes: usize,
    horizon: f64,
    out: *mut f64,
) -> ObsconStatus {
    guard(|| {
        let f = &family.as_ref().ok_or_else(|| null("family"))?.inner;
        let subset = subset_of(f, bounds, count)?;
        *out_ref(out, "out")? = core(finite_time_constant(f, &subset, modes, horizon))?;
        Ok(())
    })
}

/// Time-asymptotic constant with eigenvalue clusters grouped.
///
/// # Safety
/// As [`obscon_j_functional`].
#[no_mangle]
pub unsafe extern "C" fn obscon_asymptotic_constant(
    family: *const ObsconFamily,
    bounds: *const f64,
    count: usize,
    modes: usize,
    out: *mut f64,
) -> ObsconStatus {
    guard(|| {
        let f = &family.as_ref().ok_or_else(|| null("family"))?.inner;
        let subset = subset_of(f, bounds, count)?;
        *out_ref(out, "out")? = core(asymptotic_constant(f, &subset, modes))?;
        Ok(())
    })
}

/// Maximises `J_N` over densities of mass `fraction · |Ω|`. When `density` is
/// non-null it receives the optimal density, one value per mesh node (`capacity`
/// must be at least [`obscon_family_nodes`]).
///
/// # Safety
/// `family` must be a live handle, `value` valid, and `density` null or pointing to
/// `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn obscon_maximize_relaxed(
    family: *const ObsconFamily,
    modes: usize,
    fraction: f64,
    value: *mut f64,
    density: *mut f64,
    capacity: usize,
) -> ObsconStatus {
    guard(|| {
        let f = &family.as_ref().ok_or_else(|| null("family"))?.inner;
        let value = out_ref(value, "value")?;
        if !density.is_null() && capacity < f.weights.len() {
            return Err(invalid(format!("density buffer holds {capacity} of {} nodes", f.weights.len())));
        }
        let solution = core(maximize_relaxed(f, modes, fraction, &AscentOptions::default()))?;
        *value = solution.value;
        if !density.is_null() {
            ptr::copy_nonoverlapping(solution.density.as_ptr(), density, solution.density.len());
        }
        Ok(())
    })
}

/// Number of mesh nodes of the family; 0 for a null handle.
///
/// # Safety
/// `family` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obscon_family_nodes(family: *const ObsconFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.weights.len())
}
