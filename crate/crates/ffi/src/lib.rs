//! C interface to trained hwgail networks.
//!
//! Networks and states are opaque handles created and destroyed through this
//! interface. Every fallible function returns an [`HwgStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`hwg_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hwgail::eval::{curvature_at, generate_from_prefix};
use hwgail::gail::q_value;
use hwgail::nn::{
    actor_forward, checkpoint, critic_forward, discriminator_forward, Head, ParameterSet,
};
use hwgail::trajectory::{env_step, make_state, Action, Point, State, Trajectory};
use hwgail::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwgStatus {
    Ok = 0,
    InvalidArgument = 1,
    EpisodeComplete = 2,
    Format = 3,
    Io = 4,
    NonFinite = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Which network a handle holds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwgNetworkKind {
    Actor = 0,
    Critic = 1,
    Discriminator = 2,
}

/// A loaded network.
pub struct HwgNetwork {
    params: ParameterSet,
}

/// A partial trajectory of fixed horizon.
pub struct HwgState {
    state: State,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(e: &Error) -> HwgStatus {
    match e {
        Error::InvalidArgument(_) | Error::ShapeMismatch(_) | Error::Training(_) => {
            HwgStatus::InvalidArgument
        }
        Error::EpisodeComplete { .. } => HwgStatus::EpisodeComplete,
        Error::Format { .. } | Error::MissingKey { .. } => HwgStatus::Format,
        Error::Io { .. } => HwgStatus::Io,
        Error::NonFinite(_) => HwgStatus::NonFinite,
    }
}

struct Failure(HwgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HwgStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(HwgStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HwgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HwgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HwgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn points<'a>(xy: *const f64, n: usize) -> Result<Vec<Point>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if xy.is_null() {
        return Err(null("coordinate buffer"));
    }
    let flat = std::slice::from_raw_parts(xy, 2 * n);
    Ok(flat.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
}

fn expect_head(net: &HwgNetwork, head: Head) -> Result<(), Failure> {
    if net.params.spec().head == head {
        Ok(())
    } else {
        Err(invalid(format!(
            "expected a {head:?} network, got {:?}",
            net.params.spec().head
        )))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hwg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hwg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_network_load(
    path: *const c_char,
    out_net: *mut *mut HwgNetwork,
) -> HwgStatus {
    guard(|| {
        let out_net = out(out_net, "output handle")?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let (params, _) = checkpoint::load(Path::new(path))?;
        *out_net = Box::into_raw(Box::new(HwgNetwork { params }));
        Ok(())
    })
}

/// Releases a network; null is ignored.
///
/// # Safety
/// `net` must come from [`hwg_network_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hwg_network_free(net: *mut HwgNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_network_info(
    net: *const HwgNetwork,
    kind: *mut HwgNetworkKind,
    horizon: *mut usize,
) -> HwgStatus {
    guard(|| {
        let net = deref(net, "network")?;
        let spec = net.params.spec();
        *out(kind, "kind")? = match spec.head {
            Head::Actor => HwgNetworkKind::Actor,
            Head::Critic => HwgNetworkKind::Critic,
            Head::Discriminator => HwgNetworkKind::Discriminator,
        };
        *out(horizon, "horizon")? = spec.sequence_length;
        Ok(())
    })
}

/// Creates a state from `n_points` interleaved `x, y` coordinates.
///
/// # Safety
/// `xy` must hold `2 * n_points` values; `out_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_state_new(
    horizon: usize,
    xy: *const f64,
    n_points: usize,
    out_state: *mut *mut HwgState,
) -> HwgStatus {
    guard(|| {
        let out_state = out(out_state, "output handle")?;
        let state = make_state(&points(xy, n_points)?, horizon)?;
        *out_state = Box::into_raw(Box::new(HwgState { state }));
        Ok(())
    })
}

/// Releases a state; null is ignored.
///
/// # Safety
/// `state` must come from [`hwg_state_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hwg_state_free(state: *mut HwgState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of filled slots, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hwg_state_len(state: *const HwgState) -> usize {
    state.as_ref().map_or(0, |s| s.state.len())
}

/// Appends a point in place.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hwg_state_push(state: *mut HwgState, x: f64, y: f64) -> HwgStatus {
    guard(|| {
        let s = out(state, "state")?;
        s.state = env_step(&s.state, Action::new(x, y))?;
        Ok(())
    })
}

/// Reads the point at 0-based `index`.
///
/// # Safety
/// `state` must be a live handle; `x` and `y` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_state_point(
    state: *const HwgState,
    index: usize,
    x: *mut f64,
    y: *mut f64,
) -> HwgStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let p = s
            .state
            .point(index)
            .ok_or_else(|| invalid(format!("index {index} beyond length {}", s.state.len())))?;
        *out(x, "x")? = p.x;
        *out(y, "y")? = p.y;
        Ok(())
    })
}

/// Next pen position chosen by an actor.
///
/// # Safety
/// Handles must be live; `x` and `y` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_actor_forward(
    net: *const HwgNetwork,
    state: *const HwgState,
    x: *mut f64,
    y: *mut f64,
) -> HwgStatus {
    guard(|| {
        let net = deref(net, "network")?;
        expect_head(net, Head::Actor)?;
        let a = actor_forward(&net.params, &deref(state, "state")?.state)?;
        *out(x, "x")? = a.0.x;
        *out(y, "y")? = a.0.y;
        Ok(())
    })
}

/// # Safety
/// Handles must be live; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_critic_forward(
    net: *const HwgNetwork,
    state: *const HwgState,
    value: *mut f64,
) -> HwgStatus {
    guard(|| {
        let net = deref(net, "network")?;
        expect_head(net, Head::Critic)?;
        *out(value, "value")? = critic_forward(&net.params, &deref(state, "state")?.state)?;
        Ok(())
    })
}

/// Probability that `state` comes from the expert.
///
/// # Safety
/// Handles must be live; `prob` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_discriminator_forward(
    net: *const HwgNetwork,
    state: *const HwgState,
    prob: *mut f64,
) -> HwgStatus {
    guard(|| {
        let net = deref(net, "network")?;
        expect_head(net, Head::Discriminator)?;
        *out(prob, "prob")? = discriminator_forward(&net.params, &deref(state, "state")?.state)?;
        Ok(())
    })
}

/// `Q(state, (x, y))` from a critic and a discriminator.
///
/// # Safety
/// Handles must be live; `q` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_q_value(
    critic: *const HwgNetwork,
    discriminator: *const HwgNetwork,
    state: *const HwgState,
    x: f64,
    y: f64,
    gamma: f64,
    q: *mut f64,
) -> HwgStatus {
    guard(|| {
        let critic = deref(critic, "critic")?;
        let disc = deref(discriminator, "discriminator")?;
        expect_head(critic, Head::Critic)?;
        expect_head(disc, Head::Discriminator)?;
        let s = &deref(state, "state")?.state;
        *out(q, "q")? = q_value(&critic.params, &disc.params, s, Action::new(x, y), gamma)?;
        Ok(())
    })
}

/// Curvature at 0-based index `t` and scale `delta` of an interleaved
/// `x, y` polyline.
///
/// # Safety
/// `xy` must hold `2 * n_points` values; `kappa` writable.
#[no_mangle]
pub unsafe extern "C" fn hwg_curvature_at(
    xy: *const f64,
    n_points: usize,
    t: usize,
    delta: usize,
    kappa: *mut f64,
) -> HwgStatus {
    guard(|| {
        let traj = Trajectory::new(points(xy, n_points)?);
        *out(kappa, "kappa")? = curvature_at(&traj, t, delta)?;
        Ok(())
    })
}

/// Keeps the first `t0` points of `source_xy` (exactly `horizon` points) and
/// lets the actor write the rest into `out_xy` (room for `horizon` points).
///
/// # Safety
/// `source_xy` must hold `2 * n_points` values and `out_xy` `2 * n_points`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn hwg_generate_from_prefix(
    actor: *const HwgNetwork,
    source_xy: *const f64,
    n_points: usize,
    t0: usize,
    out_xy: *mut f64,
) -> HwgStatus {
    guard(|| {
        let actor = deref(actor, "actor")?;
        expect_head(actor, Head::Actor)?;
        if out_xy.is_null() {
            return Err(null("output buffer"));
        }
        let source = Trajectory::new(points(source_xy, n_points)?);
        let generated = generate_from_prefix(&actor.params, &source, t0)?;
        let dest = std::slice::from_raw_parts_mut(out_xy, 2 * n_points);
        for (d, p) in dest.chunks_exact_mut(2).zip(&generated.points) {
            d[0] = p.x;
            d[1] = p.y;
        }
        Ok(())
    })
}
