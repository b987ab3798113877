//! C ABI over the tensor toolkit: opaque tensor handles, integer status
//! codes, and JSON strings for structured results. All functions are
//! panic-safe. On any non-Ok status a message describing the failure is
//! stored per thread and can be fetched with `strata_last_error_message`.
//!
//! Conventions: modes are 1-based; weights are exact fractions passed as
//! numerator and denominator; strings returned through `char**` are owned by
//! the caller and must be released with `strata_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_bigint::BigInt;
use num_rational::BigRational;
use strata::edge::{acr, commutative_rank, zeta_edge, CrMethod, EdgeParam};
use strata::quiver::{Rep, Stability};
use strata::tensor::Tensor;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StrataStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ComputeError = 4,
    Panic = 5,
}

/// Opaque tensor handle; create with `strata_tensor_parse`, release with
/// `strata_tensor_free`.
pub struct StrataTensor {
    inner: Tensor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded<F: FnOnce() -> StrataStatus>(f: F) -> StrataStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".to_string());
            StrataStatus::Panic
        }
    }
}

fn fail(status: StrataStatus, msg: impl Into<String>) -> StrataStatus {
    set_error(msg.into());
    status
}

unsafe fn tensor_ref<'a>(t: *const StrataTensor) -> Option<&'a Tensor> {
    unsafe { t.as_ref() }.map(|w| &w.inner)
}

fn unit_ratio(num: i64, den: u64) -> Result<BigRational, String> {
    if den == 0 {
        return Err("weight denominator must be nonzero".into());
    }
    let r = BigRational::new(BigInt::from(num), BigInt::from(den));
    if r < BigRational::new(0.into(), 1.into()) || r > BigRational::new(1.into(), 1.into()) {
        return Err(format!("weight {num}/{den} is outside [0, 1]"));
    }
    Ok(r)
}

/// Latest error message on this thread, or NULL when the last call
/// succeeded. The caller owns the string; free with `strata_string_free`.
#[no_mangle]
pub extern "C" fn strata_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn strata_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses tensor JSON ({"field", "dims", "entries"}, 1-based indices) into a
/// new handle written to `out`.
#[no_mangle]
pub unsafe extern "C" fn strata_tensor_parse(
    json: *const c_char,
    out: *mut *mut StrataTensor,
) -> StrataStatus {
    guarded(|| {
        if json.is_null() || out.is_null() {
            return fail(StrataStatus::NullArgument, "json and out must be non-NULL");
        }
        unsafe { *out = std::ptr::null_mut() };
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(StrataStatus::InvalidArgument, "json is not valid UTF-8"),
        };
        let v: serde_json::Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => return fail(StrataStatus::ParseError, e.to_string()),
        };
        match Tensor::from_json(&v) {
            Ok(t) => {
                unsafe { *out = Box::into_raw(Box::new(StrataTensor { inner: t })) };
                clear_error();
                StrataStatus::Ok
            }
            Err(e) => fail(StrataStatus::ParseError, e.0),
        }
    })
}

/// Releases a tensor handle. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn strata_tensor_free(t: *mut StrataTensor) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Number of modes.
#[no_mangle]
pub unsafe extern "C" fn strata_tensor_order(
    t: *const StrataTensor,
    out: *mut usize,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false) = (unsafe { tensor_ref(t) }, out.is_null()) else {
            return fail(StrataStatus::NullArgument, "tensor and out must be non-NULL");
        };
        unsafe { *out = t.order() };
        clear_error();
        StrataStatus::Ok
    })
}

/// Dimension of one mode (1-based).
#[no_mangle]
pub unsafe extern "C" fn strata_tensor_dim(
    t: *const StrataTensor,
    mode: usize,
    out: *mut usize,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false) = (unsafe { tensor_ref(t) }, out.is_null()) else {
            return fail(StrataStatus::NullArgument, "tensor and out must be non-NULL");
        };
        if mode < 1 || mode > t.order() {
            return fail(
                StrataStatus::InvalidArgument,
                format!("mode {mode} is outside 1..={}", t.order()),
            );
        }
        unsafe { *out = t.dims()[mode - 1] };
        clear_error();
        StrataStatus::Ok
    })
}

/// Edge functional of the mode pencil at the exact weight rho_num/rho_den,
/// written to `out_value` as a double.
#[no_mangle]
pub unsafe extern "C" fn strata_zeta(
    t: *const StrataTensor,
    mode: u32,
    rho_num: i64,
    rho_den: u64,
    seed: u64,
    out_value: *mut f64,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false) = (unsafe { tensor_ref(t) }, out_value.is_null()) else {
            return fail(StrataStatus::NullArgument, "tensor and out_value must be non-NULL");
        };
        let rho = match unit_ratio(rho_num, rho_den) {
            Ok(r) => r,
            Err(m) => return fail(StrataStatus::InvalidArgument, m),
        };
        let param = match EdgeParam::new(mode as usize, rho) {
            Ok(p) => p,
            Err(e) => return fail(StrataStatus::InvalidArgument, e.0),
        };
        match zeta_edge(t, &param, seed) {
            Ok(fv) => {
                unsafe { *out_value = fv.value.to_f64() };
                clear_error();
                StrataStatus::Ok
            }
            Err(e) => fail(StrataStatus::ComputeError, e.0),
        }
    })
}

/// Minimum of the edge functional over the weight, with its minimizer.
#[no_mangle]
pub unsafe extern "C" fn strata_acr(
    t: *const StrataTensor,
    seed: u64,
    out_value: *mut f64,
    out_argmin_rho: *mut f64,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false, false) =
            (unsafe { tensor_ref(t) }, out_value.is_null(), out_argmin_rho.is_null())
        else {
            return fail(StrataStatus::NullArgument, "tensor and outputs must be non-NULL");
        };
        match acr(t, seed) {
            Ok(av) => {
                unsafe {
                    *out_value = av.value.to_f64();
                    *out_argmin_rho = av.argmin_rho.to_f64();
                }
                clear_error();
                StrataStatus::Ok
            }
            Err(e) => fail(StrataStatus::ComputeError, e.0),
        }
    })
}

/// Whether the mode pencil is slope-semistable.
#[no_mangle]
pub unsafe extern "C" fn strata_is_semistable(
    t: *const StrataTensor,
    mode: u32,
    seed: u64,
    out: *mut bool,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false) = (unsafe { tensor_ref(t) }, out.is_null()) else {
            return fail(StrataStatus::NullArgument, "tensor and out must be non-NULL");
        };
        if t.order() != 3 {
            return fail(
                StrataStatus::InvalidArgument,
                format!("expected a 3-mode tensor, got {} modes", t.order()),
            );
        }
        if !(1..=3).contains(&mode) {
            return fail(StrataStatus::InvalidArgument, format!("mode {mode} is not 1, 2, or 3"));
        }
        let rep = Rep::from_tensor_mode(t, mode as usize - 1);
        match rep.is_semistable(seed) {
            Ok(s) => {
                unsafe { *out = matches!(s, Stability::Semistable) };
                clear_error();
                StrataStatus::Ok
            }
            Err(e) => fail(StrataStatus::ComputeError, e.0),
        }
    })
}

/// Dimension data of the mode pencil's filtration, as a JSON string
/// "[[n, m], ...]" written to `out_json` (free with `strata_string_free`).
#[no_mangle]
pub unsafe extern "C" fn strata_hn_dim_data_json(
    t: *const StrataTensor,
    mode: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false) = (unsafe { tensor_ref(t) }, out_json.is_null()) else {
            return fail(StrataStatus::NullArgument, "tensor and out_json must be non-NULL");
        };
        unsafe { *out_json = std::ptr::null_mut() };
        if t.order() != 3 {
            return fail(
                StrataStatus::InvalidArgument,
                format!("expected a 3-mode tensor, got {} modes", t.order()),
            );
        }
        if !(1..=3).contains(&mode) {
            return fail(StrataStatus::InvalidArgument, format!("mode {mode} is not 1, 2, or 3"));
        }
        let rep = Rep::from_tensor_mode(t, mode as usize - 1);
        let hn = match rep.hn_filtration(seed) {
            Ok(h) => h,
            Err(e) => return fail(StrataStatus::ComputeError, e.0),
        };
        if let Err(e) = hn.verify(&rep, seed) {
            return fail(StrataStatus::ComputeError, e.0);
        }
        let text = serde_json::to_string(&hn.dim_data()).expect("dim data serializes");
        let c = CString::new(text).expect("JSON has no NUL");
        unsafe { *out_json = c.into_raw() };
        clear_error();
        StrataStatus::Ok
    })
}

/// Generic rank of the mode pencil; `out_exact` reports whether the value
/// came from symbolic minors (true) or random evaluation (false).
#[no_mangle]
pub unsafe extern "C" fn strata_commutative_rank(
    t: *const StrataTensor,
    mode: u32,
    seed: u64,
    out_value: *mut usize,
    out_exact: *mut bool,
) -> StrataStatus {
    guarded(|| {
        let (Some(t), false, false) =
            (unsafe { tensor_ref(t) }, out_value.is_null(), out_exact.is_null())
        else {
            return fail(StrataStatus::NullArgument, "tensor and outputs must be non-NULL");
        };
        match commutative_rank(t, mode as usize, seed) {
            Ok(cr) => {
                unsafe {
                    *out_value = cr.value;
                    *out_exact = matches!(cr.method, CrMethod::ExactMinors);
                }
                clear_error();
                StrataStatus::Ok
            }
            Err(e) => fail(StrataStatus::ComputeError, e.0),
        }
    })
}
