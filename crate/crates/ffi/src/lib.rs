//! C ABI for the anonqc simulator.
//!
//! Every fallible call returns an [`AnqStatus`]. On failure a message is kept
//! per thread and can be read with [`anq_last_error`]. Runs are returned as
//! opaque [`AnqRun`] handles that the caller releases with [`anq_run_free`].
//! Strings handed out by the library are released with [`anq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anonqc::analysis::{minimal_d_one, minimal_d_two};
use anonqc::channel::{intercept_resend_detection_probability, ChannelConfig, EveModel};
use anonqc::protocol::{
    run_protocol_one_seeded, run_protocol_two_seeded, verify_transcript, ProtocolOneConfig, ProtocolTwoConfig,
    SymmetricFunction, Transcript,
};
use anonqc::qudit::{BasisKind, Dimension};
use anonqc::swap::{swap_check, SwapCheckMode};
use anonqc::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnqStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// An argument was out of range.
    Domain = 2,
    /// The request exceeds the dense engine's cap.
    Capability = 3,
    /// Inconsistent protocol bookkeeping.
    Protocol = 4,
    Internal = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// The library panicked; the handle state is unspecified.
    Panic = 7,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 8,
}

/// Eavesdropper acting on every channel.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnqEve {
    None = 0,
    /// Measure in a uniformly random basis and resend.
    InterceptResend = 1,
    /// Always measure in the computational basis.
    InterceptComputational = 2,
    /// Always measure in the Fourier basis.
    InterceptFourier = 3,
}

impl From<AnqEve> for EveModel {
    fn from(e: AnqEve) -> Self {
        match e {
            AnqEve::None => EveModel::None,
            AnqEve::InterceptResend => EveModel::InterceptResend,
            AnqEve::InterceptComputational => EveModel::FixedBasisInterceptResend(BasisKind::Computational),
            AnqEve::InterceptFourier => EveModel::FixedBasisInterceptResend(BasisKind::Fourier),
        }
    }
}

/// Settings for a protocol run. Obtain defaults from [`anq_run_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnqRunOptions {
    /// Qudit dimension; 0 selects the smallest admissible one.
    pub d: usize,
    /// Protocol one: require d to exceed the total number of data items.
    pub strict_d: bool,
    /// Protocol one: largest admissible value; negative uses the data maximum.
    pub xi: i64,
    /// Protocol two: singlet test copies per participant.
    pub tau: usize,
    /// Decoys per channel session; negative means one per payload qudit.
    pub decoys: i64,
    /// Mismatches tolerated before a channel aborts.
    pub threshold: usize,
    pub eve: AnqEve,
    pub seed: u64,
}

/// A finished run. Opaque to C.
pub struct AnqRun {
    transcript: Transcript,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> AnqStatus {
    match err {
        Error::Domain(_) => AnqStatus::Domain,
        Error::Capability(_) => AnqStatus::Capability,
        Error::Protocol(_) => AnqStatus::Protocol,
        Error::Internal(_) => AnqStatus::Internal,
    }
}

/// Run `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (AnqStatus, String)>) -> AnqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AnqStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside anonqc".into());
            AnqStatus::Panic
        }
    }
}

fn fail(err: Error) -> (AnqStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (AnqStatus, String) {
    (AnqStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must point to `len` readable values, or be null when `len` is 0.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (AnqStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn channel(options: &AnqRunOptions) -> ChannelConfig {
    ChannelConfig {
        decoys: usize::try_from(options.decoys).ok(),
        threshold: options.threshold,
    }
}

fn explicit_d(options: &AnqRunOptions) -> Result<Option<Dimension>, Error> {
    match options.d {
        0 => Ok(None),
        d => Dimension::new(d).map(Some),
    }
}

unsafe fn store_run(out: *mut *mut AnqRun, transcript: Transcript) {
    *out = Box::into_raw(Box::new(AnqRun { transcript }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn anq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anq_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

#[no_mangle]
pub extern "C" fn anq_run_options_default() -> AnqRunOptions {
    AnqRunOptions {
        d: 0,
        strict_d: false,
        xi: -1,
        tau: ProtocolTwoConfig::DEFAULT_TAU,
        decoys: -1,
        threshold: 0,
        eve: AnqEve::None,
        seed: 0,
    }
}

/// Run protocol two on one value per participant.
///
/// # Safety
/// `values` must point to `n` readable integers; `options` and `out` must be
/// valid pointers. On success `*out` receives a handle for [`anq_run_free`].
#[no_mangle]
pub unsafe extern "C" fn anq_run_protocol_two(
    values: *const usize,
    n: usize,
    options: *const AnqRunOptions,
    out: *mut *mut AnqRun,
) -> AnqStatus {
    guard(|| {
        let options = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let values = slice(values, n, "values")?;
        let d = match explicit_d(options).map_err(fail)? {
            Some(d) => d,
            None => minimal_d_two(values).map_err(fail)?.d,
        };
        let mut config = ProtocolTwoConfig::new(n, d);
        config.tau = options.tau;
        config.channel = channel(options);
        let transcript = run_protocol_two_seeded(&config, values, &SymmetricFunction::Sum, &options.eve.into(), options.seed)
            .map_err(fail)?;
        store_run(out, transcript);
        Ok(())
    })
}

/// Run protocol one. Participant `i` holds `lens[i]` values starting at
/// `sets[i]`.
///
/// # Safety
/// `sets` and `lens` must each point to `n` entries, and every `sets[i]` to
/// `lens[i]` readable integers. `options` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anq_run_protocol_one(
    sets: *const *const usize,
    lens: *const usize,
    n: usize,
    options: *const AnqRunOptions,
    out: *mut *mut AnqRun,
) -> AnqStatus {
    guard(|| {
        let options = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ptrs = slice(sets, n, "sets")?;
        let lens = slice(lens, n, "lens")?;
        let secrets: Vec<Vec<usize>> = ptrs
            .iter()
            .zip(lens)
            .map(|(&p, &len)| slice(p, len, "data set").map(<[usize]>::to_vec))
            .collect::<Result<_, _>>()?;
        let d = match explicit_d(options).map_err(fail)? {
            Some(d) => d,
            None if options.strict_d => minimal_d_one(&[lens.iter().sum()]).map_err(fail)?.d,
            None => minimal_d_one(lens).map_err(fail)?.d,
        };
        let xi = match usize::try_from(options.xi) {
            Ok(xi) => xi,
            Err(_) => secrets.iter().flatten().copied().max().unwrap_or(0),
        };
        let mut config = ProtocolOneConfig::new(n, xi, d);
        config.strict_d = options.strict_d;
        config.channel = channel(options);
        let transcript = run_protocol_one_seeded(&config, &secrets, &SymmetricFunction::Sum, &options.eve.into(), options.seed)
            .map_err(fail)?;
        store_run(out, transcript);
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anq_run_free(run: *mut AnqRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Whether an eavesdropper or a failed singlet test stopped the run.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anq_run_aborted(run: *const AnqRun) -> bool {
    run.as_ref().is_some_and(|r| r.transcript.is_aborted())
}

/// Copy the recovered data into `buf`. Protocol one yields the counts
/// `R^0..R^xi`; protocol two the values in slot order. `*len` is always set to
/// the number of entries available.
///
/// # Safety
/// `run` must be a live handle, `len` a valid pointer, and `buf` must have
/// room for `cap` entries (it may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn anq_run_recovered(run: *const AnqRun, buf: *mut usize, cap: usize, len: *mut usize) -> AnqStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let recovered = run
            .transcript
            .recovered()
            .ok_or_else(|| (AnqStatus::Protocol, "the run was aborted and recovered nothing".to_owned()))?;
        *len = recovered.len();
        if recovered.len() > cap {
            return Err((AnqStatus::BufferTooSmall, format!("need room for {} entries", recovered.len())));
        }
        if !recovered.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(recovered.as_ptr(), buf, recovered.len());
        }
        Ok(())
    })
}

/// The run's transcript as JSON. Release with [`anq_string_free`]; null on
/// failure.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anq_run_transcript_json(run: *const AnqRun) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let json = CString::new(run.transcript.to_json()).map_err(|e| (AnqStatus::Internal, e.to_string()))?;
        result = json.into_raw();
        Ok(())
    });
    result
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Replay a JSON transcript and report whether every round is consistent.
///
/// # Safety
/// `json` must be a NUL-terminated string and `consistent` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn anq_verify_transcript(json: *const c_char, consistent: *mut bool) -> AnqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let consistent = consistent.as_mut().ok_or_else(|| null("consistent"))?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (AnqStatus::InvalidUtf8, e.to_string()))?;
        let transcript = Transcript::from_json(text).map_err(fail)?;
        *consistent = verify_transcript(&transcript).is_consistent();
        Ok(())
    })
}

/// Compare the label swap rule with the dense oracle for cat labels with `m`
/// shift marks. `samples == 0` checks every case.
///
/// # Safety
/// `passed` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn anq_swap_check(d: usize, m: usize, samples: usize, seed: u64, passed: *mut bool) -> AnqStatus {
    guard(|| {
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        let mode = match samples {
            0 => SwapCheckMode::Exhaustive,
            samples => SwapCheckMode::Sampled { samples, seed },
        };
        let d = Dimension::new(d).map_err(fail)?;
        *passed = swap_check(d, m, mode, 1e-9).map_err(fail)?.passed();
        Ok(())
    })
}

/// Per-decoy detection probability of uniform-basis intercept-resend, or a
/// negative value when `d < 2`.
#[no_mangle]
pub extern "C" fn anq_intercept_detection_probability(d: usize) -> f64 {
    Dimension::new(d).map_or(-1.0, intercept_resend_detection_probability)
}
