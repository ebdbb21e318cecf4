//! C ABI over `curved-kepler`.
//!
//! Every entry point returns a [`CkStatus`]. Results go through out-pointers.
//! Surfaces, trajectories and blocks are opaque handles that the caller
//! releases with the matching `*_free` function. After a failure the message
//! is available from [`ck_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curved_kepler::block::{self, BlockSpec};
use curved_kepler::dynamics::{self, PhaseState, Termination, Trajectory};
use curved_kepler::geometry::SurfaceSpec;
use curved_kepler::{invariants, Error};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PoleEvaluation = 3,
    EmbeddingUnavailable = 4,
    EquatorDegeneracy = 5,
    ChartDomain = 6,
    DegenerateOrbit = 7,
    BlockTooLarge = 8,
    ZetaDomain = 9,
    AsymptoticSet = 10,
    TransitTimeout = 11,
    NumericalFailure = 12,
    IndexOutOfRange = 13,
    Panic = 14,
}

/// How an integration ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkTermination {
    TimeLimit = 0,
    CollisionApproach = 1,
    NumericalFailure = 2,
}

/// Phase-space point `(r, θ, p_r, p_θ)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkState {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
}

/// Values of the four first integrals at one state.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkConserved {
    pub h: f64,
    pub p_theta: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Regularizability verdict. Zero in `north_m` or `orbifold_n` means none.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkVerdict {
    pub beta: f64,
    pub north_m: u32,
    pub orbifold_n: u32,
}

/// Opaque surface handle.
pub struct CkSurface(SurfaceSpec);

/// Opaque trajectory handle.
pub struct CkTrajectory(Trajectory);

/// Opaque isolating-block handle; keeps its surface.
pub struct CkBlock {
    surface: SurfaceSpec,
    spec: BlockSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CkStatus {
    match e {
        Error::Validation { .. } => CkStatus::InvalidArgument,
        Error::PoleEvaluation { .. } => CkStatus::PoleEvaluation,
        Error::EmbeddingUnavailable { .. } => CkStatus::EmbeddingUnavailable,
        Error::EquatorDegeneracy { .. } => CkStatus::EquatorDegeneracy,
        Error::ChartDomain { .. } => CkStatus::ChartDomain,
        Error::DegenerateOrbit => CkStatus::DegenerateOrbit,
        Error::BlockTooLarge { .. } => CkStatus::BlockTooLarge,
        Error::ZetaDomain { .. } => CkStatus::ZetaDomain,
        Error::AsymptoticSet => CkStatus::AsymptoticSet,
        Error::TransitTimeout { .. } => CkStatus::TransitTimeout,
        Error::Numerical(_) => CkStatus::NumericalFailure,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Index(usize, usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(body: F) -> CkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CkStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("{name} is null"));
            CkStatus::NullPointer
        }
        Ok(Err(Fail::Index(i, len))) => {
            set_error(format!("index {i} out of range for length {len}"));
            CkStatus::IndexOutOfRange
        }
        Err(_) => {
            set_error("internal panic".to_string());
            CkStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

fn phase(x: &CkState) -> PhaseState {
    PhaseState::new(x.r, x.theta, x.p_r, x.p_theta)
}

fn ck_state(x: &PhaseState) -> CkState {
    CkState {
        r: x.r,
        theta: x.theta,
        p_r: x.p_r,
        p_theta: x.p_theta,
    }
}

/// Short static description of a status code.
#[no_mangle]
pub extern "C" fn ck_status_name(status: CkStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CkStatus::Ok => c"ok",
        CkStatus::NullPointer => c"null pointer",
        CkStatus::InvalidArgument => c"invalid argument",
        CkStatus::PoleEvaluation => c"evaluation at a pole",
        CkStatus::EmbeddingUnavailable => c"embedding unavailable",
        CkStatus::EquatorDegeneracy => c"equator degeneracy",
        CkStatus::ChartDomain => c"outside chart domain",
        CkStatus::DegenerateOrbit => c"degenerate orbit",
        CkStatus::BlockTooLarge => c"block too large",
        CkStatus::ZetaDomain => c"u outside boundary circle",
        CkStatus::AsymptoticSet => c"point on asymptotic set",
        CkStatus::TransitTimeout => c"transit timeout",
        CkStatus::NumericalFailure => c"numerical failure",
        CkStatus::IndexOutOfRange => c"index out of range",
        CkStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ck_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates the surface `f(r) = L sin(√K r)` with coupling `gamma_c`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ck_surface_new(k: f64, l: f64, gamma_c: f64, out: *mut *mut CkSurface) -> CkStatus {
    guard(|| {
        let s = SurfaceSpec::new(k, l, gamma_c)?;
        put(out, Box::into_raw(Box::new(CkSurface(s))), "out")
    })
}

/// Creates a surface from curvature and `β = L√K`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ck_surface_from_beta(
    k: f64,
    beta: f64,
    gamma_c: f64,
    out: *mut *mut CkSurface,
) -> CkStatus {
    guard(|| {
        let s = SurfaceSpec::from_beta(k, beta, gamma_c)?;
        put(out, Box::into_raw(Box::new(CkSurface(s))), "out")
    })
}

/// # Safety
/// `surface` must be null or a handle from `ck_surface_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_surface_free(surface: *mut CkSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// β and the south-pole radius of the surface.
///
/// # Safety
/// `surface` must be a live handle; the out-pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn ck_surface_params(surface: *const CkSurface, beta: *mut f64, r_south: *mut f64) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        put(beta, s.beta(), "beta")?;
        put(r_south, s.r_south(), "r_south")
    })
}

/// # Safety
/// `surface` and `state` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_hamiltonian(surface: *const CkSurface, state: *const CkState, out: *mut f64) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        let h = dynamics::hamiltonian(s, &phase(get(state, "state")?))?;
        put(out, h, "out")
    })
}

/// # Safety
/// `surface` and `state` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_conserved(
    surface: *const CkSurface,
    state: *const CkState,
    out: *mut CkConserved,
) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        let c = invariants::conserved(s, &phase(get(state, "state")?))?;
        put(
            out,
            CkConserved {
                h: c.h,
                p_theta: c.p_theta,
                i1: c.i1,
                i2: c.i2,
            },
            "out",
        )
    })
}

/// Residual of the quadratic relation between the four integrals.
///
/// # Safety
/// `surface` and `state` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_dependency_residual(
    surface: *const CkSurface,
    state: *const CkState,
    out: *mut f64,
) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        let r = invariants::dependency_residual(s, &phase(get(state, "state")?))?;
        put(out, r, "out")
    })
}

/// Integrates from `state` up to `t_end`, stopping near the north pole.
/// `collision_margin <= 0` selects the default margin.
///
/// # Safety
/// `surface` and `state` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_integrate(
    surface: *const CkSurface,
    state: *const CkState,
    t_end: f64,
    tol: f64,
    collision_margin: f64,
    out: *mut *mut CkTrajectory,
) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        let x0 = phase(get(state, "state")?);
        let margin = if collision_margin > 0.0 {
            collision_margin
        } else {
            dynamics::default_collision_margin(s)
        };
        let traj = dynamics::integrate(s, &x0, t_end, tol, margin)?;
        put(out, Box::into_raw(Box::new(CkTrajectory(traj))), "out")
    })
}

/// # Safety
/// `traj` must be null or a handle from `ck_integrate` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_trajectory_free(traj: *mut CkTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples and the termination reason.
///
/// # Safety
/// `traj` must be a live handle; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ck_trajectory_info(
    traj: *const CkTrajectory,
    len: *mut usize,
    termination: *mut CkTermination,
) -> CkStatus {
    guard(|| {
        let t = &get(traj, "traj")?.0;
        put(len, t.samples.len(), "len")?;
        let term = match t.termination {
            Termination::TimeLimit => CkTermination::TimeLimit,
            Termination::CollisionApproach => CkTermination::CollisionApproach,
            Termination::NumericalFailure(_) => CkTermination::NumericalFailure,
        };
        put(termination, term, "termination")
    })
}

/// Sample `index` of the trajectory.
///
/// # Safety
/// `traj` must be a live handle; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ck_trajectory_sample(
    traj: *const CkTrajectory,
    index: usize,
    t: *mut f64,
    state: *mut CkState,
) -> CkStatus {
    guard(|| {
        let tr = &get(traj, "traj")?.0;
        let smp = tr.samples.get(index).ok_or(Fail::Index(index, tr.samples.len()))?;
        put(t, smp.t, "t")?;
        put(state, ck_state(&smp.state), "state")
    })
}

/// Regularizability verdict with integer search bound `m_max`.
///
/// # Safety
/// `surface` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_classify(surface: *const CkSurface, m_max: u32, out: *mut CkVerdict) -> CkStatus {
    guard(|| {
        let s = &get(surface, "surface")?.0;
        let v = block::classify_regularizability(s, m_max)?;
        put(
            out,
            CkVerdict {
                beta: v.beta,
                north_m: v.north.unwrap_or(0),
                orbifold_n: v.orbifold_n.unwrap_or(0),
            },
            "out",
        )
    })
}

/// Isolating block around the north pole at energy `h`. `delta <= 0`
/// selects the default size.
///
/// # Safety
/// `surface` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_block_new(surface: *const CkSurface, h: f64, delta: f64, out: *mut *mut CkBlock) -> CkStatus {
    guard(|| {
        let s = get(surface, "surface")?.0;
        let spec = if delta > 0.0 {
            block::make_block(&s, h, delta)?
        } else {
            block::default_block(&s, h)?
        };
        put(out, Box::into_raw(Box::new(CkBlock { surface: s, spec })), "out")
    })
}

/// # Safety
/// `blk` must be null or a handle from `ck_block_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ck_block_free(blk: *mut CkBlock) {
    if !blk.is_null() {
        drop(Box::from_raw(blk));
    }
}

/// Block size δ, boundary radius and the largest admissible |u|.
///
/// # Safety
/// `blk` must be a live handle; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ck_block_params(
    blk: *const CkBlock,
    delta: *mut f64,
    r_delta: *mut f64,
    u_max: *mut f64,
) -> CkStatus {
    guard(|| {
        let b = get(blk, "blk")?;
        put(delta, b.spec.delta, "delta")?;
        put(r_delta, b.spec.r_delta, "r_delta")?;
        put(u_max, b.spec.u_max(&b.surface), "u_max")
    })
}

/// Analytic θ-shift Γ(u) of the map across the block.
///
/// # Safety
/// `blk` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_block_gamma(blk: *const CkBlock, u: f64, out: *mut f64) -> CkStatus {
    guard(|| {
        let b = get(blk, "blk")?;
        put(out, block::gamma_exit(&b.spec, &b.surface, u)?, "out")
    })
}

/// θ-shift from integrating the regularized flow through the block.
///
/// # Safety
/// `blk` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ck_block_transit(blk: *const CkBlock, theta: f64, u: f64, out: *mut f64) -> CkStatus {
    guard(|| {
        let b = get(blk, "blk")?;
        let tr = block::numeric_transit(&b.spec, &b.surface, theta, u, &block::TransitOptions::default())?;
        put(out, tr.exit.theta - theta, "out")
    })
}
