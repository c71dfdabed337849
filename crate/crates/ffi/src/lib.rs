//! C ABI over the dialogue engine.
//!
//! Every fallible function returns an [`AvatarStatus`]; on failure a message
//! is available from [`avatar_last_error`] on the same thread. Strings handed
//! out by the library must be released with [`avatar_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use avatar_dm::engine::{EngineConfig, EngineError, Session};
use avatar_dm::policy::PolicyMode;
use avatar_dm::{sentiment, trend, Assets};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvatarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    SessionEnded = 4,
    AssetError = 5,
    Panic = 99,
}

/// Loaded domain files and engine settings shared by sessions.
pub struct AvatarEngine {
    assets: Assets,
    config: EngineConfig,
}

/// One conversation.
pub struct AvatarSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

struct Failure(AvatarStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(AvatarStatus::NullPointer, format!("{what} is null"))
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AvatarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AvatarStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AvatarStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AvatarStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_path<'a>(p: *const c_char, what: &str) -> Result<Option<&'a Path>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(|s| Some(Path::new(s)))
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

fn to_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn avatar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Engine with the shipped ontology, model and lexicon.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn avatar_engine_new_default(out: *mut *mut AvatarEngine) -> AvatarStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = Box::into_raw(Box::new(AvatarEngine {
            assets: Assets::shipped(),
            config: EngineConfig::default(),
        }));
        Ok(())
    })
}

/// Engine from files on disk. Any path may be null to use the shipped file.
///
/// # Safety
/// Non-null paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_engine_from_files(
    ontology: *const c_char,
    model: *const c_char,
    lexicon: *const c_char,
    out: *mut *mut AvatarEngine,
) -> AvatarStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let assets = Assets::load(
            opt_path(ontology, "ontology")?,
            opt_path(model, "model")?,
            opt_path(lexicon, "lexicon")?,
        )
        .map_err(|e| Failure(AvatarStatus::AssetError, e.to_string()))?;
        *out = Box::into_raw(Box::new(AvatarEngine {
            assets,
            config: EngineConfig::default(),
        }));
        Ok(())
    })
}

/// Selects the policy for sessions created afterwards: "hand-crafted",
/// "learned" or "random".
///
/// # Safety
/// `engine` must come from this library; `policy` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn avatar_engine_set_policy(engine: *mut AvatarEngine, policy: *const c_char) -> AvatarStatus {
    guard(|| {
        let engine = out_ref(engine, "engine")?;
        let name = str_arg(policy, "policy")?;
        engine.config.policy = name
            .parse::<PolicyMode>()
            .map_err(|e| Failure(AvatarStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// # Safety
/// `engine` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn avatar_engine_free(engine: *mut AvatarEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Starts a session. Sessions own their data and outlive the engine.
///
/// # Safety
/// `engine` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_new(
    engine: *const AvatarEngine,
    seed: u64,
    out: *mut *mut AvatarSession,
) -> AvatarStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| Failure::null("engine"))?;
        let out = out_ref(out, "out")?;
        let inner = Session::new(engine.assets.clone(), engine.config.clone(), seed)
            .map_err(|e| Failure(AvatarStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(AvatarSession { inner }));
        Ok(())
    })
}

/// Opening prompt of the session, to be freed with `avatar_string_free`.
///
/// # Safety
/// `session` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_greeting(session: *const AvatarSession, out: *mut *mut c_char) -> AvatarStatus {
    guard(|| {
        let session = session.as_ref().ok_or_else(|| Failure::null("session"))?;
        *out_ref(out, "out")? = to_c_string(session.inner.greeting());
        Ok(())
    })
}

/// Feeds one user utterance and writes the agent turn as a JSON object.
///
/// # Safety
/// `session` must come from this library; `utterance` must be NUL-terminated;
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_step(
    session: *mut AvatarSession,
    utterance: *const c_char,
    out_json: *mut *mut c_char,
) -> AvatarStatus {
    guard(|| {
        let session = out_ref(session, "session")?;
        let text = str_arg(utterance, "utterance")?;
        let out = out_ref(out_json, "out_json")?;
        let turn = session.inner.step(text).map_err(|e| match e {
            EngineError::SessionEnded => Failure(AvatarStatus::SessionEnded, e.to_string()),
            _ => Failure(AvatarStatus::InvalidArgument, e.to_string()),
        })?;
        let json = serde_json::to_string(&turn).map_err(|e| Failure(AvatarStatus::InvalidArgument, e.to_string()))?;
        *out = to_c_string(&json);
        Ok(())
    })
}

/// # Safety
/// `session` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_goal_reached(session: *const AvatarSession, out: *mut bool) -> AvatarStatus {
    guard(|| {
        let session = session.as_ref().ok_or_else(|| Failure::null("session"))?;
        *out_ref(out, "out")? = session.inner.goal_reached();
        Ok(())
    })
}

/// # Safety
/// `session` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_ended(session: *const AvatarSession, out: *mut bool) -> AvatarStatus {
    guard(|| {
        let session = session.as_ref().ok_or_else(|| Failure::null("session"))?;
        *out_ref(out, "out")? = session.inner.ended();
        Ok(())
    })
}

/// # Safety
/// `session` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn avatar_session_free(session: *mut AvatarSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// # Safety
/// `s` must be a string returned by this library, freed at most once. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn avatar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Sharp-point count and its ratio for a belief series of at least two values.
///
/// # Safety
/// `signal` must point to `len` doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_haar_ncp(
    signal: *const f64,
    len: usize,
    out_ncp: *mut usize,
    out_ratio: *mut f64,
) -> AvatarStatus {
    guard(|| {
        if signal.is_null() {
            return Err(Failure::null("signal"));
        }
        let values = std::slice::from_raw_parts(signal, len);
        let result = trend::analyze(values).map_err(|e| Failure(AvatarStatus::InvalidArgument, e.to_string()))?;
        *out_ref(out_ncp, "out_ncp")? = result.ncp;
        *out_ref(out_ratio, "out_ratio")? = result.ncp_ratio;
        Ok(())
    })
}

/// Compound sentiment of `text` under the engine's lexicon.
///
/// # Safety
/// `engine` must come from this library; `text` must be NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn avatar_sentiment_compound(
    engine: *const AvatarEngine,
    text: *const c_char,
    out: *mut f64,
) -> AvatarStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| Failure::null("engine"))?;
        let text = str_arg(text, "text")?;
        let score = sentiment::score_utterance(text, &engine.assets.lexicon)
            .map_err(|e| Failure(AvatarStatus::InvalidArgument, e.to_string()))?;
        *out_ref(out, "out")? = score.compound;
        Ok(())
    })
}
