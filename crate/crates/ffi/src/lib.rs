//! C ABI for shockselect.
//!
//! Models live behind an opaque `SsModel` handle created by one of the
//! `ss_model_new_*` functions and released with `ss_model_free`. Every
//! fallible call returns an `SsStatus`; on failure the message is available
//! from `ss_last_error_message` on the same thread until the next call.
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shockselect::pde::{self, SimulationConfig};
use shockselect::regularization::{self, RegularisationWeight};
use shockselect::shock;
use shockselect::wave::{self, ShootingOptions, SpeedSearch};
use shockselect::{
    DiffusivityModel, Error, PotentialModel, ReactionModel, ShockRule, WeightFamily,
};

/// Status codes; values 1 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    /// Bad argument, configuration or I/O.
    Usage = 1,
    /// Inadmissible model or parameters.
    Model = 2,
    /// A root finder, quadrature or shooting solve failed.
    Solver = 3,
    /// The time integration blew up.
    Instability = 4,
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsRule {
    EqualArea = 0,
    ContinuousDiffusivity = 1,
    LowerKnee = 2,
    UpperKnee = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsWeightFamily {
    Exponential = 0,
    Quadratic = 1,
}

/// A shock joining `u_left` and `u_right` at potential `phi_s`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SsShock {
    pub u_left: f64,
    pub u_right: f64,
    pub phi_s: f64,
}

/// Opaque model handle.
pub struct SsModel {
    inner: PotentialModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e.exit_code() {
        1 => SsStatus::Usage,
        2 => SsStatus::Model,
        3 => SsStatus::Solver,
        _ => SsStatus::Instability,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SsFailure>) -> SsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(SsFailure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(SsFailure::Null(name))) => {
            set_error(format!("null pointer passed as `{name}`"));
            SsStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            SsStatus::Internal
        }
    }
}

enum SsFailure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for SsFailure {
    fn from(e: Error) -> Self {
        SsFailure::Lib(e)
    }
}

unsafe fn model_ref<'a>(m: *const SsModel) -> Result<&'a PotentialModel, SsFailure> {
    m.as_ref().map(|m| &m.inner).ok_or(SsFailure::Null("model"))
}

unsafe fn write<T>(out: *mut T, name: &'static str, value: T) -> Result<(), SsFailure> {
    if out.is_null() {
        return Err(SsFailure::Null(name));
    }
    out.write(value);
    Ok(())
}

// Enum-typed values arrive from C as plain integers and are checked here.
fn rule(r: i32) -> Result<ShockRule, Error> {
    match r {
        x if x == SsRule::EqualArea as i32 => Ok(ShockRule::EqualArea),
        x if x == SsRule::ContinuousDiffusivity as i32 => Ok(ShockRule::ContinuousDiffusivity),
        x if x == SsRule::LowerKnee as i32 => Ok(ShockRule::LowerKnee),
        x if x == SsRule::UpperKnee as i32 => Ok(ShockRule::UpperKnee),
        _ => Err(Error::Config(format!("unknown shock rule {r}"))),
    }
}

fn family(f: i32) -> Result<WeightFamily, Error> {
    match f {
        x if x == SsWeightFamily::Exponential as i32 => Ok(WeightFamily::Exponential),
        x if x == SsWeightFamily::Quadratic as i32 => Ok(WeightFamily::Quadratic),
        _ => Err(Error::Config(format!("unknown weight family {f}"))),
    }
}

fn select(model: &PotentialModel, r: i32) -> Result<shock::ShockPosition, Error> {
    match rule(r)? {
        ShockRule::EqualArea => shock::equal_area_shock(model),
        ShockRule::ContinuousDiffusivity => shock::continuous_diffusivity_shock(model),
        ShockRule::LowerKnee => Ok(shock::knee_shocks(model)?.0),
        _ => Ok(shock::knee_shocks(model)?.1),
    }
}

fn boxed(model: PotentialModel, out: *mut *mut SsModel) -> Result<(), SsFailure> {
    if out.is_null() {
        return Err(SsFailure::Null("out"));
    }
    let handle = Box::into_raw(Box::new(SsModel { inner: model }));
    // SAFETY: checked non-null above
    unsafe { out.write(handle) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Cubic model `D(u) = (u - a)(u - b - delta u^2)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_model_new_cubic(
    a: f64,
    b: f64,
    delta: f64,
    out: *mut *mut SsModel,
) -> SsStatus {
    guard(|| boxed(PotentialModel::cubic(a, b, delta)?, out))
}

/// Polynomial model with `D(u) = sum coeffs[i] u^i`.
///
/// # Safety
/// `coeffs` must point to `len` readable values and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_model_new_polynomial(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut SsModel,
) -> SsStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(SsFailure::Null("coeffs"));
        }
        let c = std::slice::from_raw_parts(coeffs, len).to_vec();
        boxed(PotentialModel::new(DiffusivityModel::polynomial(c)?), out)
    })
}

/// Releases a model; NULL is ignored.
///
/// # Safety
/// `model` must come from `ss_model_new_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_model_free(model: *mut SsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Zeros `alpha < beta` of the diffusivity.
///
/// # Safety
/// `model` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_model_zeros(
    model: *const SsModel,
    alpha: *mut f64,
    beta: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        if alpha.is_null() || beta.is_null() {
            return Err(SsFailure::Null("alpha/beta"));
        }
        write(alpha, "alpha", m.alpha())?;
        write(beta, "beta", m.beta())
    })
}

/// `D(u)` for `u` in `[0, 1]`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_model_diffusivity(
    model: *const SsModel,
    u: f64,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, "out", m.diffusivity().eval_diffusivity(u)?)
    })
}

/// `Phi(u)` for `u` in `[0, 1]`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_model_potential(
    model: *const SsModel,
    u: f64,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, "out", m.eval_potential(u)?)
    })
}

/// Shock selected by `rule` (an `SsRule` value).
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_shock(model: *const SsModel, rule: i32, out: *mut SsShock) -> SsStatus {
    guard(|| {
        let s = select(model_ref(model)?, rule)?;
        write(
            out,
            "out",
            SsShock {
                u_left: s.u_left,
                u_right: s.u_right,
                phi_s: s.phi_s,
            },
        )
    })
}

/// Weight parameter `A` making the modified equal-area rule select the
/// shock given by `rule`; `family_id` is an `SsWeightFamily` value and
/// `residual` may be NULL.
///
/// # Safety
/// `model` must be a live handle; `a` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_solve_weight(
    model: *const SsModel,
    rule: i32,
    family_id: i32,
    a: *mut f64,
    residual: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let target = select(m, rule)?;
        let sol = regularization::solve_weight_parameter(m, &target, family(family_id)?)?;
        write(a, "a", sol.weight.a)?;
        if !residual.is_null() {
            residual.write(sol.residual);
        }
        Ok(())
    })
}

/// Shock selected by the weight `f(u) = exp(-A u)` (exponential) or
/// `1 + A u^2` (quadratic); `family_id` is an `SsWeightFamily` value.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_shock_for_weight(
    model: *const SsModel,
    family_id: i32,
    a: f64,
    out: *mut SsShock,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let w = RegularisationWeight::new(family(family_id)?, a)?;
        let s = regularization::shock_for_weight(m, &w)?;
        write(
            out,
            "out",
            SsShock {
                u_left: s.u_left,
                u_right: s.u_right,
                phi_s: s.phi_s,
            },
        )
    })
}

/// Travelling-wave speed for the cubic reaction with threshold `gamma`.
///
/// # Safety
/// `model` must be a live handle; `c` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_wave_speed(
    model: *const SsModel,
    rule: i32,
    gamma: f64,
    c: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let target = select(m, rule)?;
        let reaction = ReactionModel::cubic(gamma)?;
        let sol = wave::solve_wave_speed(
            &target,
            m,
            &reaction,
            &SpeedSearch::default(),
            &ShootingOptions::default(),
        )?;
        write(c, "c", sol.c)
    })
}

/// Runs a simulation. `config_json` is a JSON object with any subset of the
/// simulation fields (missing ones take their defaults); `gamma <= 0` means
/// no reaction. On success `*result_json` receives a JSON summary with the
/// final shock estimate and speeds, to be released with `ss_string_free`.
///
/// # Safety
/// `model` must be a live handle, `config_json` a NUL-terminated string and
/// `result_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_simulate(
    model: *const SsModel,
    gamma: f64,
    config_json: *const c_char,
    result_json: *mut *mut c_char,
) -> SsStatus {
    guard(|| {
        let m = model_ref(model)?;
        if config_json.is_null() {
            return Err(SsFailure::Null("config_json"));
        }
        if result_json.is_null() {
            return Err(SsFailure::Null("result_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let cfg: SimulationConfig = serde_json::from_str(text).map_err(Error::from)?;
        let reaction = if gamma > 0.0 {
            ReactionModel::cubic(gamma)?
        } else {
            ReactionModel::Zero
        };
        let result = pde::integrate(&cfg, m, &reaction)?;
        let summary = serde_json::json!({
            "final_shock": result.final_shock(),
            "speeds": result.speeds(),
            "steps": result.steps,
            "min_u": result.min_u,
            "max_u": result.max_u,
            "overshoot": result.overshoot,
        });
        let s = CString::new(summary.to_string()).map_err(|e| Error::Config(e.to_string()))?;
        result_json.write(s.into_raw());
        Ok(())
    })
}

/// Releases a string returned by the library; NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
